//! Command-line front end. Every table starts with a header row and rows
//! come out in a fixed order, so a run depends only on its flags.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Number, Value};

use crate::adm::{build_psi, factorial_moment_adm, mean_adm, pmf_adm_table};
use crate::births::{
    corr_nb, correlation_curves, cov_nb, limiting_births_moments, limiting_births_pmf,
    limiting_births_series, mean_births, mean_deaths, var_births,
};
use crate::error::{FbdpError, Result};
use crate::linear::{
    extinction_cdf, extinction_cdf_zero_asymptote, extinction_survival, extinction_tail_asymptote,
    mean_linear, pmf_linear, var_linear, LinearParams, SubordinatorModel, DEFAULT_L_MAX,
};
use crate::mc::{
    extinction_time_samples, fbdp_pmf_mc_range, joint_nb_samples, replicates, run_counts,
    sample_inverse_stable, sample_inverse_subordinator_path, simulate_joint_nb, uniformization_pmf,
    write_raw_csv, ExtinctionSample, MCEstimate, PmfMode, RngSpec, Uniformized, EVENT_CAP,
};
use crate::rates::{FractionalOrder, RateModel};
use crate::validate::{run_all, Scale, ValidateConfig};

#[derive(Debug, Parser)]
#[command(name = "fbdp", version, about = "Fractional birth-death processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// State probabilities p(n, t)
    Pmf(PmfArgs),
    /// Mean, variance and factorial moments of N(t)
    Moments(MomentsArgs),
    /// Cumulative births: means, covariance, variance, correlation
    Births(BirthsArgs),
    /// Extinction-time law, its asymptotes and the limiting births law
    Extinction(ExtinctionArgs),
    /// Monte Carlo estimates through the inverse-stable time change
    Simulate(SimulateArgs),
    /// Run the acceptance checks and print a JSON report
    Validate(ValidateArgs),
    /// Dump the ψ table of a rate model
    Psi(PsiArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Adm,
    ClosedForm,
    Mc,
    Uniformization,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Adm => "adm",
            Method::ClosedForm => "closed-form",
            Method::Mc => "mc",
            Method::Uniformization => "uniformization",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum McMode {
    /// exact classical law at each sampled time (lower variance)
    Uniformization,
    /// indicator of one simulated path per replicate
    Path,
}

/// `linear:λ,μ`, `equal:λ` or `table:path.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec(pub RateModel);

impl FromStr for ModelSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| format!("expected linear:λ,μ | equal:λ | table:path, got '{s}'"))?;
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad number '{x}' in model '{s}'"))
        };
        let m = match kind {
            "linear" => {
                let (l, m) = rest
                    .split_once(',')
                    .ok_or_else(|| format!("linear model needs λ,μ, got '{rest}'"))?;
                RateModel::linear(num(l)?, num(m)?)
            }
            "equal" => RateModel::equal(num(rest)?),
            "table" => RateModel::from_csv_path(rest.as_ref()),
            _ => return Err(format!("unknown model kind '{kind}'")),
        };
        m.map(ModelSpec).map_err(|e| e.to_string())
    }
}

/// `a:b:n` with an optional `log` or `lin` suffix on n (default lin), or a
/// single time.
#[derive(Debug, Clone, PartialEq)]
pub struct TGrid(pub Vec<f64>);

impl FromStr for TGrid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let num = |x: &str| {
            let v: f64 = x.parse().map_err(|_| format!("bad time '{x}'"))?;
            if v >= 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(format!("times must be finite and nonnegative, got {x}"))
            }
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [one] => Ok(TGrid(vec![num(one)?])),
            [a, b, n] => {
                let (count, log) = if let Some(c) = n.strip_suffix("log") {
                    (c, true)
                } else {
                    (n.strip_suffix("lin").unwrap_or(n), false)
                };
                let count: usize = count
                    .parse()
                    .map_err(|_| format!("bad point count '{n}'"))?;
                let (a, b) = (num(a)?, num(b)?);
                if count == 0 || b < a {
                    return Err(format!("empty grid '{s}'"));
                }
                if count == 1 {
                    return Ok(TGrid(vec![a]));
                }
                if log {
                    if a <= 0.0 {
                        return Err("a log grid needs a positive start".into());
                    }
                    return Ok(TGrid(crate::births::log_grid(a, b, count)));
                }
                let step = (b - a) / (count - 1) as f64;
                let mut g: Vec<f64> = (0..count).map(|i| a + step * i as f64).collect();
                g[count - 1] = b;
                Ok(TGrid(g))
            }
            _ => Err(format!("expected t or a:b:n[log|lin], got '{s}'")),
        }
    }
}

/// `a..b` (inclusive) or a single state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NRange(pub usize, pub usize);

impl FromStr for NRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let num = |x: &str| {
            x.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad state '{x}'"))
        };
        match s.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
                if b < a {
                    return Err(format!("empty range '{s}'"));
                }
                Ok(NRange(a, b))
            }
            None => {
                let n = num(s)?;
                Ok(NRange(n, n))
            }
        }
    }
}

#[derive(Debug, Args)]
pub struct Output {
    /// write here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// linear:λ,μ | equal:λ | table:path.csv
    #[arg(long, default_value = "linear:1,1")]
    pub model: ModelSpec,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// t or a:b:n[log|lin]
    #[arg(long, default_value = "1")]
    pub t: TGrid,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = McMode::Uniformization)]
    pub mc_mode: McMode,
    /// state cap for uniformization inside mc runs on unbounded models
    #[arg(long, default_value_t = 256)]
    pub mc_nmax: usize,
}

#[derive(Debug, Args)]
pub struct PmfArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// states a..b (inclusive)
    #[arg(long, default_value = "0..10")]
    pub n: NRange,
    #[arg(long, default_value_t = 60)]
    pub kmax: usize,
    #[arg(long, default_value_t = DEFAULT_L_MAX)]
    pub lmax: usize,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// relative stopping tolerance of the ADM series
    #[arg(long, default_value_t = 1e-15)]
    pub tol: f64,
    #[command(flatten)]
    pub mc: McArgs,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 60)]
    pub kmax: usize,
    /// highest factorial moment (adm only)
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[command(flatten)]
    pub mc: McArgs,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct BirthsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// emit the correlation curves for the fixed α and rate grid instead
    #[arg(long)]
    pub figure: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExtinctionWhat {
    Cdf,
    LimitingBirths,
    LimitingMoments,
}

#[derive(Debug, Args)]
pub struct ExtinctionArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = ExtinctionWhat::Cdf)]
    pub what: ExtinctionWhat,
    #[arg(long, default_value_t = DEFAULT_L_MAX)]
    pub lmax: usize,
    /// tail bound for the limiting births series
    #[arg(long, default_value_t = 1e-10)]
    pub tail_tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimulateWhat {
    Pmf,
    Mean,
    Births,
    Extinction,
    InverseTime,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = SimulateWhat::Mean)]
    pub what: SimulateWhat,
    #[arg(long, default_value = "0..10")]
    pub n: NRange,
    /// gamma:a,b replaces the stable subordinator for extinction and
    /// inverse-time runs
    #[arg(long)]
    pub subordinator: Option<String>,
    /// grid step for inverse gamma subordinator paths
    #[arg(long, default_value_t = 1e-3)]
    pub grid_step: f64,
    /// classical-time cutoff for extinction runs; later deaths are censored
    #[arg(long, default_value_t = f64::INFINITY)]
    pub cutoff: f64,
    /// dump per-replicate values as replicate,value CSV (single t only)
    #[arg(long)]
    pub raw: Option<PathBuf>,
    #[command(flatten)]
    pub mc: McArgs,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// smallest sample sizes
    #[arg(long, conflicts_with = "full")]
    pub fast: bool,
    /// sample sizes of the full acceptance matrix
    #[arg(long)]
    pub full: bool,
    /// corrupt one ψ entry; the report must then fail
    #[arg(long)]
    pub inject_fault: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PsiArgs {
    #[arg(long, default_value = "linear:1,1")]
    pub model: ModelSpec,
    #[arg(long, default_value_t = 12)]
    pub kmax: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug)]
pub enum CliError {
    Usage { msg: String, hint: String },
    Run(FbdpError),
}

impl From<FbdpError> for CliError {
    fn from(e: FbdpError) -> Self {
        CliError::Run(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } => 2,
            CliError::Run(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage { msg, hint } => write!(f, "error: {msg}\nhint: {hint}"),
            CliError::Run(e) => write!(f, "error: {e}"),
        }
    }
}

fn usage(msg: impl Into<String>, hint: impl Into<String>) -> CliError {
    CliError::Usage {
        msg: msg.into(),
        hint: hint.into(),
    }
}

/// Parameter errors found before any computation are usage errors.
fn check<T>(r: Result<T>, hint: &str) -> std::result::Result<T, CliError> {
    r.map_err(|e| usage(e.to_string(), hint))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, format: Format, w: W) -> Result<()> {
        match format {
            Format::Csv => {
                let mut wtr = csv::Writer::from_writer(w);
                let io = |e: csv::Error| FbdpError::Io(e.to_string());
                wtr.write_record(&self.columns).map_err(io)?;
                for r in &self.rows {
                    wtr.write_record(r.iter().map(Cell::csv)).map_err(io)?;
                }
                wtr.flush()?;
            }
            Format::Json => {
                let recs: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let m: Map<String, Value> = self
                            .columns
                            .iter()
                            .zip(r)
                            .map(|(c, v)| (c.to_string(), v.json()))
                            .collect();
                        Value::Object(m)
                    })
                    .collect();
                let mut w = w;
                serde_json::to_writer_pretty(&mut w, &recs)
                    .map_err(|e| FbdpError::Io(e.to_string()))?;
                writeln!(w)?;
            }
        }
        Ok(())
    }
}

/// Writes a rendered document to the file or stdout. A reader that closes
/// stdout early (`| head`) is not an error.
fn deliver(bytes: &[u8], out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes)?,
        None => {
            let mut w = io::stdout().lock();
            match w.write_all(bytes).and_then(|_| w.flush()) {
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {}
                r => r?,
            }
        }
    }
    Ok(())
}

fn emit(table: &Table, out: &Output) -> std::result::Result<(), CliError> {
    let mut buf = Vec::new();
    table.write(out.format, &mut buf)?;
    deliver(&buf, &out.out)?;
    Ok(())
}

/// Runs a parsed command; the value is the process exit status.
pub fn run(cli: Cli) -> std::result::Result<i32, CliError> {
    match cli.command {
        Command::Pmf(a) => {
            let t = pmf_table(&a)?;
            emit(&t, &a.output)?;
        }
        Command::Moments(a) => {
            let t = moments_table(&a)?;
            emit(&t, &a.output)?;
        }
        Command::Births(a) => {
            let t = births_table(&a)?;
            emit(&t, &a.output)?;
        }
        Command::Extinction(a) => {
            let t = extinction_table(&a)?;
            emit(&t, &a.output)?;
        }
        Command::Simulate(a) => {
            let t = simulate_table(&a)?;
            emit(&t, &a.output)?;
        }
        Command::Validate(a) => return validate(&a),
        Command::Psi(a) => {
            let t = psi_table(&a)?;
            emit(&t, &a.output)?;
        }
    }
    Ok(0)
}

fn order(alpha: f64) -> std::result::Result<FractionalOrder, CliError> {
    check(
        FractionalOrder::new(alpha),
        "--alpha takes a value in (0, 1]",
    )
}

fn linear_params(m: &ModelArgs, what: &str) -> std::result::Result<LinearParams, CliError> {
    let (l, mu) = m.model.0.linear_params().ok_or_else(|| {
        usage(
            format!("{what} needs a linear or equal model"),
            "use --model linear:λ,μ or --model equal:λ",
        )
    })?;
    check(
        LinearParams::new(l, mu, m.alpha),
        "check --model and --alpha",
    )
}

fn check_samples(n: usize, min: usize) -> std::result::Result<(), CliError> {
    if n < min {
        return Err(usage(
            format!("--samples must be at least {min}, got {n}"),
            "raise --samples",
        ));
    }
    Ok(())
}

const AUTO_LEAK: f64 = 1e-12;

/// Uniformization with the state cap doubled until the mass lost above it
/// is below 1e-12 (bounded models use their own extent).
fn uniformization_auto(model: &RateModel, n_hi: usize, t: f64) -> Result<Uniformized> {
    if let Some(n_max) = model.n_max() {
        return uniformization_pmf(model, n_max.max(1), t);
    }
    let mut n_max = (2 * n_hi + 2).max(64);
    loop {
        let u = uniformization_pmf(model, n_max, t)?;
        if u.leak <= AUTO_LEAK || n_max >= 1 << 14 {
            return Ok(u);
        }
        n_max *= 2;
    }
}

struct PmfValue {
    value: f64,
    stderr: Option<f64>,
    method: Method,
    flags: String,
}

fn mc_pmf_column(
    model: &RateModel,
    alpha: f64,
    n_hi: usize,
    t: f64,
    mc: &McArgs,
    stream: u64,
) -> Result<Vec<MCEstimate>> {
    let mode = match mc.mc_mode {
        McMode::Path => PmfMode::Path,
        McMode::Uniformization => PmfMode::Uniformization {
            n_max: model.n_max().unwrap_or(mc.mc_nmax.max(n_hi)),
        },
    };
    fbdp_pmf_mc_range(
        model,
        alpha,
        n_hi,
        t,
        mc.samples,
        RngSpec::new(mc.seed, stream),
        mode,
    )
}

fn pmf_table(a: &PmfArgs) -> std::result::Result<Table, CliError> {
    let model = &a.model.model.0;
    let alpha = order(a.model.alpha)?;
    let NRange(n_lo, n_hi) = a.n;
    let is_linear = model.linear_params().is_some();
    match a.method {
        Some(Method::ClosedForm) if !is_linear => {
            return Err(usage(
                "closed-form needs a linear or equal model",
                "use --method adm, or --method uniformization with --alpha 1",
            ))
        }
        Some(Method::Uniformization) if !alpha.is_classical() => {
            return Err(usage(
                "uniformization solves the classical process only",
                "use --alpha 1, or --method mc for α < 1",
            ))
        }
        Some(Method::Mc) => check_samples(a.mc.samples, 1000)?,
        _ => {}
    }
    let uses_adm = matches!(a.method, Some(Method::Adm)) || (a.method.is_none() && !is_linear);
    let psi = if uses_adm {
        if let Some(n_max) = model.n_max() {
            if n_max < a.kmax {
                return Err(usage(
                    format!(
                        "rate table covers states 0..={n_max}, --kmax {} needs more",
                        a.kmax
                    ),
                    format!("use --kmax {n_max} or extend the table"),
                ));
            }
        }
        Some(build_psi(model, a.kmax)?)
    } else {
        None
    };
    let lin = if is_linear {
        Some(linear_params(&a.model, "closed-form")?)
    } else {
        None
    };
    let mut cols: Vec<Vec<PmfValue>> = Vec::new();
    for (ti, &t) in a.model.t.0.iter().enumerate() {
        let mut col = Vec::new();
        let mut uni: Option<Uniformized> = None;
        let mut mc: Option<Vec<MCEstimate>> = None;
        let uniform = |uni: &mut Option<Uniformized>, n: usize| -> Result<PmfValue> {
            if uni.is_none() {
                *uni = Some(uniformization_auto(model, n_hi, t)?);
            }
            let u = uni.as_ref().unwrap();
            Ok(PmfValue {
                value: u.get(n),
                stderr: None,
                method: Method::Uniformization,
                flags: if u.leak_exceeds_warning() {
                    format!("leak={:e}", u.leak)
                } else {
                    "ok".into()
                },
            })
        };
        let monte = |mc: &mut Option<Vec<MCEstimate>>, n: usize| -> Result<PmfValue> {
            if mc.is_none() {
                *mc = Some(mc_pmf_column(
                    model,
                    alpha.get(),
                    n_hi,
                    t,
                    &a.mc,
                    ti as u64,
                )?);
            }
            let e = mc.as_ref().unwrap()[n];
            Ok(PmfValue {
                value: e.mean,
                stderr: Some(e.stderr),
                method: Method::Mc,
                flags: "ok".into(),
            })
        };
        for n in n_lo..=n_hi {
            let v = match a.method {
                Some(Method::ClosedForm) => closed_form(lin.as_ref().unwrap(), n, t, a.lmax)?,
                Some(Method::Uniformization) => uniform(&mut uni, n)?,
                Some(Method::Mc) => monte(&mut mc, n)?,
                None if is_linear => closed_form(lin.as_ref().unwrap(), n, t, a.lmax)?,
                _ => {
                    let (value, diag) = pmf_adm_table(psi.as_ref().unwrap(), alpha, n, t, a.tol)?;
                    let bad = diag.divergence_flag || !diag.converged;
                    if a.method.is_none() && bad {
                        let mut fb = if alpha.is_classical() {
                            uniform(&mut uni, n)?
                        } else {
                            check_samples(a.mc.samples, 1000)?;
                            monte(&mut mc, n)?
                        };
                        fb.flags = format!("adm-{};{}", diag.flag(), fb.flags);
                        fb
                    } else {
                        PmfValue {
                            value,
                            stderr: None,
                            method: Method::Adm,
                            flags: diag.flag().into(),
                        }
                    }
                }
            };
            col.push(v);
        }
        cols.push(col);
    }
    let mut table = Table::new(&["n", "t", "method", "value", "stderr", "flags"]);
    for (i, n) in (n_lo..=n_hi).enumerate() {
        for (col, &t) in cols.iter().zip(&a.model.t.0) {
            let v = &col[i];
            table.push(vec![
                n.into(),
                t.into(),
                v.method.name().into(),
                v.value.into(),
                v.stderr.into(),
                v.flags.clone().into(),
            ]);
        }
    }
    Ok(table)
}

fn closed_form(p: &LinearParams, n: usize, t: f64, lmax: usize) -> Result<PmfValue> {
    Ok(PmfValue {
        value: pmf_linear(p, n, t, lmax)?,
        stderr: None,
        method: Method::ClosedForm,
        flags: "ok".into(),
    })
}

fn moments_table(a: &MomentsArgs) -> std::result::Result<Table, CliError> {
    let model = &a.model.model.0;
    let alpha = order(a.model.alpha)?;
    let is_linear = model.linear_params().is_some();
    let method = a.method.unwrap_or(if is_linear {
        Method::ClosedForm
    } else {
        Method::Adm
    });
    let mut table = Table::new(&["t", "quantity", "method", "value", "stderr", "flags"]);
    match method {
        Method::ClosedForm => {
            let p = linear_params(&a.model, "closed-form")?;
            if a.order > 2 {
                return Err(usage(
                    "closed forms cover the mean and variance only",
                    "use --method adm for factorial moments above order 2",
                ));
            }
            for &t in &a.model.t.0 {
                let m = mean_linear(&p, t)?;
                let v = var_linear(&p, t)?;
                for (q, x) in [("mean", m), ("variance", v), ("factorial_2", v + m * m - m)] {
                    table.push(vec![
                        t.into(),
                        q.into(),
                        "closed-form".into(),
                        x.into(),
                        Cell::Empty,
                        "ok".into(),
                    ]);
                }
            }
        }
        Method::Adm => {
            for &t in &a.model.t.0 {
                let (m, dm) = mean_adm(model, alpha, t, a.kmax)?;
                table.push(vec![
                    t.into(),
                    "mean".into(),
                    "adm".into(),
                    m.into(),
                    Cell::Empty,
                    dm.flag().into(),
                ]);
                let mut rows = Vec::new();
                let mut var = None;
                for r in 2..=a.order.max(2) {
                    let (f, df) = factorial_moment_adm(model, alpha, r, t, a.kmax)?;
                    if r == 2 {
                        let flag = if df.flag() == "ok" {
                            dm.flag()
                        } else {
                            df.flag()
                        };
                        var = Some((f + m - m * m, flag));
                    }
                    if r <= a.order {
                        rows.push((format!("factorial_{r}"), f, df.flag()));
                    }
                }
                let (v, flag) = var.unwrap();
                table.push(vec![
                    t.into(),
                    "variance".into(),
                    "adm".into(),
                    v.into(),
                    Cell::Empty,
                    flag.into(),
                ]);
                for (q, f, flag) in rows {
                    table.push(vec![
                        t.into(),
                        q.into(),
                        "adm".into(),
                        f.into(),
                        Cell::Empty,
                        flag.into(),
                    ]);
                }
            }
        }
        Method::Mc => {
            check_samples(a.mc.samples, 2)?;
            for (ti, &t) in a.model.t.0.iter().enumerate() {
                let xs = population_samples(
                    model,
                    alpha.get(),
                    t,
                    a.mc.samples,
                    RngSpec::new(a.mc.seed, ti as u64),
                )?;
                let e = MCEstimate::from_samples(&xs)?;
                table.push(vec![
                    t.into(),
                    "mean".into(),
                    "mc".into(),
                    e.mean.into(),
                    e.stderr.into(),
                    "ok".into(),
                ]);
            }
        }
        Method::Uniformization => {
            return Err(usage(
                "moments are not available by uniformization",
                "use --method closed-form, adm or mc",
            ))
        }
    }
    Ok(table)
}

fn population_samples(
    model: &RateModel,
    alpha: f64,
    t: f64,
    n: usize,
    spec: RngSpec,
) -> Result<Vec<f64>> {
    replicates(spec, n, |rng| {
        let tau = sample_inverse_stable(alpha, t, rng)?;
        Ok(run_counts(model, tau, EVENT_CAP, rng)?.state as f64)
    })
}

fn births_table(a: &BirthsArgs) -> std::result::Result<Table, CliError> {
    if a.figure {
        let mut table = Table::new(&["alpha", "lambda", "mu", "t", "corr"]);
        for r in correlation_curves()? {
            table.push(vec![
                r.alpha.into(),
                r.lambda.into(),
                r.mu.into(),
                r.t.into(),
                r.corr.into(),
            ]);
        }
        return Ok(table);
    }
    let p = linear_params(&a.model, "births")?;
    let mut table = Table::new(&[
        "alpha",
        "lambda",
        "mu",
        "t",
        "mean_births",
        "mean_deaths",
        "var_births",
        "cov_nb",
        "corr",
        "flags",
    ]);
    for &t in &a.model.t.0 {
        let mb = mean_births(&p, t)?;
        let mut flags = Vec::new();
        let mut opt = |r: Result<f64>| match r {
            Ok(x) => Some(x),
            Err(e) => {
                let s = match e {
                    FbdpError::Regime(_) => "critical".to_string(),
                    e => e.to_string(),
                };
                if !flags.contains(&s) {
                    flags.push(s);
                }
                None
            }
        };
        let md = opt(mean_deaths(&p, t));
        let vb = opt(var_births(&p, t));
        let c = opt(cov_nb(&p, t));
        let corr = if t > 0.0 { opt(corr_nb(&p, t)) } else { None };
        let flags = if flags.is_empty() {
            "ok".to_string()
        } else {
            flags.join(";")
        };
        table.push(vec![
            p.a().into(),
            p.lambda.into(),
            p.mu.into(),
            t.into(),
            mb.into(),
            md.into(),
            vb.into(),
            c.into(),
            corr.into(),
            flags.into(),
        ]);
    }
    Ok(table)
}

fn extinction_table(a: &ExtinctionArgs) -> std::result::Result<Table, CliError> {
    let p = linear_params(&a.model, "extinction")?;
    let (l, m) = (p.lambda, p.mu);
    match a.what {
        ExtinctionWhat::Cdf => {
            let sub = SubordinatorModel::stable(p.a()).ok();
            let mut table = Table::new(&[
                "t",
                "cdf",
                "survival",
                "tail_asymptote",
                "zero_asymptote",
                "flags",
            ]);
            for &t in &a.model.t.0 {
                let cdf = pmf_linear(&p, 0, t, a.lmax)?;
                let surv = if l < m {
                    extinction_survival(&p, t)?
                } else {
                    1.0 - extinction_cdf(&p, t)?
                };
                let (tail, zero, flag) = match sub {
                    Some(s) if l < m && t > 0.0 => (
                        Some(extinction_tail_asymptote(&s, l, m, t)?),
                        Some(extinction_cdf_zero_asymptote(&s, l, m, t)?),
                        "ok",
                    ),
                    Some(_) if l < m => (None, None, "t=0"),
                    Some(_) => (None, None, "asymptotes need lambda < mu"),
                    None => (None, None, "asymptotes need alpha < 1"),
                };
                table.push(vec![
                    t.into(),
                    cdf.into(),
                    surv.into(),
                    tail.into(),
                    zero.into(),
                    flag.into(),
                ]);
            }
            Ok(table)
        }
        ExtinctionWhat::LimitingBirths => {
            let s = limiting_births_series(l, m, a.tail_tol)?;
            let mut table = Table::new(&["b", "pmf"]);
            for b in 1..=s.b_star {
                table.push(vec![b.into(), limiting_births_pmf(l, m, b)?.into()]);
            }
            Ok(table)
        }
        ExtinctionWhat::LimitingMoments => {
            let s = limiting_births_series(l, m, a.tail_tol)?;
            let (mean, var) = limiting_births_moments(l, m)?;
            let mut table = Table::new(&["quantity", "value"]);
            for (q, v) in [
                ("b_star", s.b_star as f64),
                ("mass", s.mass),
                ("tail_bound", s.tail_bound),
                ("series_mean", s.mean),
                ("series_variance", s.variance),
                ("mean", mean),
                ("variance", var),
            ] {
                table.push(vec![q.into(), v.into()]);
            }
            Ok(table)
        }
    }
}

fn parse_gamma(s: &str) -> std::result::Result<SubordinatorModel, CliError> {
    let bad = || {
        usage(
            format!("bad subordinator '{s}'"),
            "use --subordinator gamma:a,b",
        )
    };
    let rest = s.strip_prefix("gamma:").ok_or_else(bad)?;
    let (x, y) = rest.split_once(',').ok_or_else(bad)?;
    let (x, y) = (
        x.trim().parse().map_err(|_| bad())?,
        y.trim().parse().map_err(|_| bad())?,
    );
    check(SubordinatorModel::gamma(x, y), "a and b must be positive")
}

fn estimate_row(q: &str, t: f64, e: &MCEstimate, censored: Option<usize>) -> Vec<Cell> {
    vec![
        q.into(),
        t.into(),
        e.mean.into(),
        e.stderr.into(),
        e.n_samples.into(),
        censored.map_or(Cell::Empty, Cell::from),
    ]
}

fn simulate_table(a: &SimulateArgs) -> std::result::Result<Table, CliError> {
    let model = &a.model.model.0;
    let alpha = order(a.model.alpha)?.get();
    let ts = &a.model.t.0;
    if a.raw.is_some() && (ts.len() != 1 || a.what == SimulateWhat::Pmf) {
        return Err(usage(
            "raw dumps need a single --t and a per-replicate quantity",
            "pass one time and --what mean, births, extinction or inverse-time",
        ));
    }
    let dump = |xs: &[f64]| -> Result<()> {
        if let Some(p) = &a.raw {
            write_raw_csv(xs, io::BufWriter::new(File::create(p)?))?;
        }
        Ok(())
    };
    let mc = &a.mc;
    let spec = |i: usize| RngSpec::new(mc.seed, i as u64);
    let mut table = Table::new(&["quantity", "t", "mean", "stderr", "n", "censored"]);
    match a.what {
        SimulateWhat::Pmf => {
            check_samples(mc.samples, 1000)?;
            let NRange(lo, hi) = a.n;
            let cols: Vec<Vec<MCEstimate>> = ts
                .iter()
                .enumerate()
                .map(|(i, &t)| mc_pmf_column(model, alpha, hi, t, mc, i as u64))
                .collect::<Result<_>>()?;
            for n in lo..=hi {
                for (col, &t) in cols.iter().zip(ts) {
                    table.push(estimate_row(&format!("pmf_{n}"), t, &col[n], None));
                }
            }
        }
        SimulateWhat::Mean => {
            check_samples(mc.samples, 2)?;
            for (i, &t) in ts.iter().enumerate() {
                let xs = population_samples(model, alpha, t, mc.samples, spec(i))?;
                dump(&xs)?;
                table.push(estimate_row(
                    "mean",
                    t,
                    &MCEstimate::from_samples(&xs)?,
                    None,
                ));
            }
        }
        SimulateWhat::Births => {
            check_samples(mc.samples, 2)?;
            let p = linear_params(&a.model, "births simulation")?;
            for (i, &t) in ts.iter().enumerate() {
                if a.raw.is_some() {
                    let s = joint_nb_samples(p.lambda, p.mu, alpha, t, mc.samples, spec(i))?;
                    dump(&s.iter().map(|x| x.b as f64).collect::<Vec<_>>())?;
                }
                let j = simulate_joint_nb(p.lambda, p.mu, alpha, t, mc.samples, spec(i))?;
                for (q, e) in [
                    ("mean_n", j.mean_n),
                    ("mean_b", j.mean_b),
                    ("mean_d", j.mean_d),
                    ("var_n", j.var_n),
                    ("var_b", j.var_b),
                    ("cov_nb", j.cov_nb),
                ] {
                    table.push(estimate_row(q, t, &e, None));
                }
            }
        }
        SimulateWhat::Extinction => {
            check_samples(mc.samples, 2)?;
            let p = linear_params(&a.model, "extinction simulation")?;
            let samples = match &a.subordinator {
                Some(s) => extinction_time_samples(
                    &parse_gamma(s)?,
                    p.lambda,
                    p.mu,
                    a.cutoff,
                    mc.samples,
                    spec(0),
                )?,
                None if alpha < 1.0 => extinction_time_samples(
                    &SubordinatorModel::Stable { alpha },
                    p.lambda,
                    p.mu,
                    a.cutoff,
                    mc.samples,
                    spec(0),
                )?,
                None => {
                    let lin = RateModel::linear(p.lambda, p.mu)?;
                    replicates(spec(0), mc.samples, |rng| {
                        Ok(match run_counts(&lin, a.cutoff, EVENT_CAP, rng) {
                            Ok(c) => c
                                .extinct_at
                                .map_or(ExtinctionSample::Censored, ExtinctionSample::Finite),
                            Err(FbdpError::EventCap(_)) => ExtinctionSample::Censored,
                            Err(e) => return Err(e),
                        })
                    })?
                }
            };
            let censored = samples
                .iter()
                .filter(|s| matches!(s, ExtinctionSample::Censored))
                .count();
            let times: Vec<f64> = samples
                .iter()
                .map(|s| match s {
                    ExtinctionSample::Finite(x) => *x,
                    ExtinctionSample::Censored => f64::INFINITY,
                })
                .collect();
            dump(&times)?;
            for &t in ts {
                let ind: Vec<f64> = times
                    .iter()
                    .map(|&x| if x > t { 1.0 } else { 0.0 })
                    .collect();
                let e = MCEstimate::from_samples(&ind)?;
                table.push(estimate_row("survival", t, &e, Some(censored)));
            }
        }
        SimulateWhat::InverseTime => {
            check_samples(mc.samples, 2)?;
            let sub = a.subordinator.as_deref().map(parse_gamma).transpose()?;
            for (i, &t) in ts.iter().enumerate() {
                let xs = replicates(spec(i), mc.samples, |rng| match &sub {
                    Some(g) => sample_inverse_subordinator_path(g, t, a.grid_step, rng),
                    None => sample_inverse_stable(alpha, t, rng),
                })?;
                dump(&xs)?;
                table.push(estimate_row(
                    "inverse_time",
                    t,
                    &MCEstimate::from_samples(&xs)?,
                    None,
                ));
            }
        }
    }
    Ok(table)
}

fn validate(a: &ValidateArgs) -> std::result::Result<i32, CliError> {
    let scale = if a.fast {
        Scale::Fast
    } else if a.full {
        Scale::Full
    } else {
        Scale::Reduced
    };
    let cfg = ValidateConfig {
        seed: a.seed,
        scale,
        inject_fault: a.inject_fault,
    };
    let report = run_all(&cfg);
    deliver(format!("{}\n", report.to_json()).as_bytes(), &a.out)?;
    Ok(if report.passed { 0 } else { 1 })
}

fn psi_table(a: &PsiArgs) -> std::result::Result<Table, CliError> {
    let model = &a.model.0;
    if let Some(n_max) = model.n_max() {
        if n_max < a.kmax {
            return Err(usage(
                format!(
                    "rate table covers states 0..={n_max}, --kmax {} needs more",
                    a.kmax
                ),
                format!("use --kmax {n_max} or extend the table"),
            ));
        }
    }
    let psi = build_psi(model, a.kmax)?;
    let mut table = Table::new(&["n", "k", "psi"]);
    for k in 0..=a.kmax {
        for n in 0..=k + 1 {
            table.push(vec![n.into(), k.into(), psi.get(n, k)?.into()]);
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!("2".parse::<TGrid>().unwrap().0, vec![2.0]);
        assert_eq!("0:1:3lin".parse::<TGrid>().unwrap().0, vec![0.0, 0.5, 1.0]);
        let g = "0.01:100:5log".parse::<TGrid>().unwrap().0;
        assert_eq!(g.len(), 5);
        assert!((g[2] - 1.0).abs() < 1e-12);
        assert!("0:1:3log".parse::<TGrid>().is_err());
        assert!("1:0:3".parse::<TGrid>().is_err());
        assert_eq!("0..4".parse::<NRange>().unwrap(), NRange(0, 4));
        assert_eq!("3".parse::<NRange>().unwrap(), NRange(3, 3));
    }

    #[test]
    fn models() {
        assert_eq!(
            "linear:0.5,1".parse::<ModelSpec>().unwrap().0,
            RateModel::linear(0.5, 1.0).unwrap()
        );
        assert!("linear:0.5".parse::<ModelSpec>().is_err());
        assert!("quadratic:1".parse::<ModelSpec>().is_err());
        assert!("equal:-1".parse::<ModelSpec>().is_err());
    }

    #[test]
    fn csv_and_json_cells() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1.5.into(), Cell::Empty]);
        let mut buf = Vec::new();
        t.write(Format::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1.5e0,\n");
        let mut buf = Vec::new();
        t.write(Format::Json, &mut buf).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v[0]["a"], 1.5);
        assert!(v[0]["b"].is_null());
    }
}
