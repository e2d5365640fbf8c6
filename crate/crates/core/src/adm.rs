//! Adomian decomposition for general rate models.
//!
//! The state probabilities are p(n,t) = Σ_k p_k(n,t) with
//! p_k(n,t) = (-1)^{k-n+1} ψ_{n,k} t^{kα} / Γ(kα+1), where the ψ table obeys
//!
//! ψ_{n,k+1} = Λₙ ψ_{n,k} + λ_{n-1} ψ_{n-1,k} + μ_{n+1} ψ_{n+1,k},
//!
//! ψ_{0,0} = 0, ψ_{1,0} = 1, ψ_{n,k} = 0 for n > k+1. The boundary rows of
//! the recursion are the same rule with λ₀ = μ₀ = 0.
//!
//! ψ values are kept in double-double precision: the alternating sums over a
//! row cancel by many orders of magnitude.

use std::io::Write;

use serde::Serialize;
use twofloat::TwoFloat;

use crate::error::{FbdpError, Result};
use crate::rates::{FractionalOrder, RateModel};
use crate::special_fn::gamma::ln_gamma;
use crate::special_fn::Compensated;

#[derive(Debug, Clone)]
pub struct PsiTable {
    k_max: usize,
    rows: Vec<Vec<TwoFloat>>,
    model: RateModel,
}

impl PsiTable {
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn model(&self) -> &RateModel {
        &self.model
    }

    /// ψ_{n,k}; zero outside the triangle.
    pub fn get(&self, n: usize, k: usize) -> Result<f64> {
        Ok(self.get_dd(n, k)?.hi())
    }

    pub fn get_dd(&self, n: usize, k: usize) -> Result<TwoFloat> {
        if k > self.k_max {
            return Err(FbdpError::KBeyondTable {
                k,
                k_max: self.k_max,
            });
        }
        Ok(self.rows[k].get(n).copied().unwrap_or_default())
    }

    /// Σ_{n=0}^{k+1} (-1)^{k-n+1} ψ_{n,k}, optionally stopping at n ≤ n_top.
    pub fn signed_row_sum(&self, k: usize, n_top: usize) -> Result<TwoFloat> {
        if k > self.k_max {
            return Err(FbdpError::KBeyondTable {
                k,
                k_max: self.k_max,
            });
        }
        let mut s = TwoFloat::from(0.0);
        for (n, v) in self.rows[k].iter().enumerate().take(n_top + 1) {
            if (k + 1 - n) % 2 == 0 {
                s += *v;
            } else {
                s -= *v;
            }
        }
        Ok(s)
    }

    /// Adds `delta` to one entry; used to exercise the validators.
    pub fn perturb(&mut self, n: usize, k: usize, delta: f64) -> Result<()> {
        if k > self.k_max || n > k + 1 {
            return Err(FbdpError::InvalidParameter(format!(
                "({n},{k}) lies outside the table"
            )));
        }
        self.rows[k][n] += delta;
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| FbdpError::Io(e.to_string());
        wr.write_record(["n", "k", "psi"]).map_err(io)?;
        for (k, row) in self.rows.iter().enumerate() {
            for (n, v) in row.iter().enumerate() {
                wr.write_record([n.to_string(), k.to_string(), format!("{:e}", v.hi())])
                    .map_err(io)?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

pub fn build_psi(model: &RateModel, k_max: usize) -> Result<PsiTable> {
    if let Some(n_max) = model.n_max() {
        if n_max < k_max {
            return Err(FbdpError::TableExtent { n: k_max, n_max });
        }
    }
    let mut rows: Vec<Vec<TwoFloat>> = Vec::with_capacity(k_max + 1);
    rows.push(vec![TwoFloat::from(0.0), TwoFloat::from(1.0)]);
    for k in 0..k_max {
        let prev = &rows[k];
        let mut next = vec![TwoFloat::from(0.0); k + 3];
        for (n, slot) in next.iter_mut().enumerate() {
            let mut acc = TwoFloat::from(0.0);
            if n <= k + 1 && n > 0 {
                // Λₙψ as two products: λₙ + μₙ rounded to f64 would break the
                // exact cancellation of the signed row sums
                acc += prev[n] * model.lambda_at(n)?;
                acc += prev[n] * model.mu_at(n)?;
            }
            if n >= 2 && n - 1 <= k + 1 {
                acc += prev[n - 1] * model.lambda_at(n - 1)?;
            }
            if n + 1 <= k + 1 {
                acc += prev[n + 1] * model.mu_at(n + 1)?;
            }
            *slot = acc;
        }
        rows.push(next);
    }
    Ok(PsiTable {
        k_max,
        rows,
        model: model.clone(),
    })
}

/// ln(t^{kα}/Γ(kα+1)); None when t = 0 and k > 0.
fn ln_time_factor(k: usize, alpha: f64, t: f64) -> Option<f64> {
    if k == 0 {
        return Some(0.0);
    }
    if t == 0.0 {
        return None;
    }
    let ka = k as f64 * alpha;
    Some(ka * t.ln() - ln_gamma(ka + 1.0))
}

fn time_factor(k: usize, alpha: f64, t: f64) -> f64 {
    ln_time_factor(k, alpha, t).map_or(0.0, f64::exp)
}

fn sign(k: usize, n: usize) -> f64 {
    // (-1)^{k-n+1}, only called with n ≤ k+1
    if (k + 1 - n) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn series_component(
    psi: &PsiTable,
    n: usize,
    k: usize,
    alpha: FractionalOrder,
    t: f64,
) -> Result<f64> {
    if k > psi.k_max {
        return Err(FbdpError::KBeyondTable {
            k,
            k_max: psi.k_max,
        });
    }
    if !(t >= 0.0) {
        return Err(FbdpError::InvalidParameter(format!(
            "t must be nonnegative, got {t}"
        )));
    }
    if n > k + 1 {
        return Ok(0.0);
    }
    let v = psi.get(n, k)?;
    Ok(sign(k, n) * v * time_factor(k, alpha.get(), t))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesDiagnostics {
    pub terms_used: usize,
    pub last_term_magnitude: f64,
    pub divergence_flag: bool,
    pub converged: bool,
    pub partial_sums: Option<Vec<f64>>,
}

impl SeriesDiagnostics {
    fn trivial() -> Self {
        SeriesDiagnostics {
            terms_used: 0,
            last_term_magnitude: 0.0,
            divergence_flag: false,
            converged: true,
            partial_sums: None,
        }
    }

    /// Short status tag for tabular output.
    pub fn flag(&self) -> &'static str {
        if self.divergence_flag {
            "divergent"
        } else if !self.converged {
            "truncated"
        } else {
            "ok"
        }
    }
}

/// Sums a sequence of series terms with the stopping and divergence rules:
/// stop once |term| < tol·|sum| for three consecutive terms; flag divergence
/// after five consecutive growing terms past index `grow_from`.
struct SeriesAccumulator {
    sum: Compensated,
    tol: f64,
    grow_from: usize,
    small_run: usize,
    grow_run: usize,
    prev_mag: f64,
    diag: SeriesDiagnostics,
}

impl SeriesAccumulator {
    fn new(tol: f64, grow_from: usize, keep_partials: bool) -> Self {
        SeriesAccumulator {
            sum: Compensated::default(),
            tol,
            grow_from,
            small_run: 0,
            grow_run: 0,
            prev_mag: f64::INFINITY,
            diag: SeriesDiagnostics {
                terms_used: 0,
                last_term_magnitude: 0.0,
                divergence_flag: false,
                converged: false,
                partial_sums: keep_partials.then(Vec::new),
            },
        }
    }

    /// Returns true when the series may stop.
    fn push(&mut self, k: usize, term: f64) -> bool {
        self.sum.add(term);
        let s = self.sum.value();
        let mag = term.abs();
        self.diag.terms_used += 1;
        self.diag.last_term_magnitude = mag;
        if let Some(p) = self.diag.partial_sums.as_mut() {
            p.push(s);
        }
        if k > self.grow_from && mag > self.prev_mag {
            self.grow_run += 1;
            if self.grow_run >= 5 {
                self.diag.divergence_flag = true;
            }
        } else {
            self.grow_run = 0;
        }
        self.prev_mag = mag;
        if mag <= self.tol * s.abs() {
            self.small_run += 1;
        } else {
            self.small_run = 0;
        }
        if self.small_run >= 3 && !self.diag.divergence_flag {
            self.diag.converged = true;
            return true;
        }
        false
    }

    fn finish(self) -> (f64, SeriesDiagnostics) {
        (self.sum.value(), self.diag)
    }
}

/// Truncated state probability from an existing table.
pub fn pmf_adm_table(
    psi: &PsiTable,
    alpha: FractionalOrder,
    n: usize,
    t: f64,
    tol: f64,
) -> Result<(f64, SeriesDiagnostics)> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(FbdpError::InvalidParameter(format!(
            "t must be finite and nonnegative, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok((if n == 1 { 1.0 } else { 0.0 }, SeriesDiagnostics::trivial()));
    }
    if n > psi.k_max + 1 {
        return Ok((0.0, SeriesDiagnostics::trivial()));
    }
    let k0 = n.saturating_sub(1);
    let mut acc = SeriesAccumulator::new(tol, n + 2, false);
    for k in k0..=psi.k_max {
        let term = series_component(psi, n, k, alpha, t)?;
        if acc.push(k, term) {
            break;
        }
    }
    Ok(acc.finish())
}

pub fn pmf_adm(
    model: &RateModel,
    alpha: FractionalOrder,
    n: usize,
    t: f64,
    k_max: usize,
    tol: f64,
) -> Result<(f64, SeriesDiagnostics)> {
    let psi = build_psi(model, k_max)?;
    pmf_adm_table(&psi, alpha, n, t, tol)
}

/// |1 - Σ_{n=0}^{n_max} p(n,t)| with every series truncated at exactly k_max.
/// The second value reports whether any row's terms kept growing.
pub fn regularity_defect(
    model: &RateModel,
    alpha: FractionalOrder,
    t: f64,
    n_max: usize,
    k_max: usize,
) -> Result<(f64, bool)> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(FbdpError::InvalidParameter(format!(
            "t must be finite and nonnegative, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok((0.0, false));
    }
    let psi = build_psi(model, k_max)?;
    let mut total = TwoFloat::from(0.0);
    let mut growing = 0;
    let mut divergent = false;
    let mut prev = f64::INFINITY;
    for k in 0..=k_max {
        let row = psi.signed_row_sum(k, n_max)?;
        let f = time_factor(k, alpha.get(), t);
        total += row * f;
        let mag = psi.get(k.min(n_max), k)? * f;
        if k > 2 && mag > prev {
            growing += 1;
            divergent |= growing >= 5;
        } else {
            growing = 0;
        }
        prev = mag;
    }
    Ok(((TwoFloat::from(1.0) - total).hi().abs(), divergent))
}

/// Probability generating function Σ p(n,t) uⁿ through the ADM series.
pub fn pgf_adm(
    model: &RateModel,
    alpha: FractionalOrder,
    u: f64,
    t: f64,
    k_max: usize,
) -> Result<(f64, SeriesDiagnostics)> {
    if !(-1.0..=1.0).contains(&u) {
        return Err(FbdpError::InvalidParameter(format!(
            "u must lie in [-1, 1], got {u}"
        )));
    }
    if t == 0.0 {
        return Ok((u, SeriesDiagnostics::trivial()));
    }
    let psi = build_psi(model, k_max)?;
    let a = alpha.get();
    let mut acc = SeriesAccumulator::new(1e-15, 2, false);
    acc.sum.add(u);
    for k in 0..=k_max {
        let f = time_factor(k + 1, a, t);
        let mut inner = Compensated::default();
        for n in 1..=k + 1 {
            let w =
                u.powi(n as i32 - 1) * (u - 1.0) * (model.lambda_at(n)? * u - model.mu_at(n)?);
            inner.add(sign(k, n) * w * psi.get(n, k)?);
        }
        if acc.push(k, inner.value() * f) {
            break;
        }
    }
    Ok(acc.finish())
}

/// E N(t) = 1 + Σ_k Σ_n (-1)^{k-n+1} (λₙ-μₙ) ψ_{n,k} t^{(k+1)α}/Γ((k+1)α+1).
pub fn mean_adm(
    model: &RateModel,
    alpha: FractionalOrder,
    t: f64,
    k_max: usize,
) -> Result<(f64, SeriesDiagnostics)> {
    moment_series(model, alpha, t, k_max, |_, l, m| l - m, 1.0)
}

fn falling(x: i64, j: usize) -> f64 {
    (0..j as i64).map(|i| (x - i) as f64).product()
}

/// r-th factorial moment E[N(N-1)...(N-r+1)] for r ≥ 2.
pub fn factorial_moment_adm(
    model: &RateModel,
    alpha: FractionalOrder,
    r: usize,
    t: f64,
    k_max: usize,
) -> Result<(f64, SeriesDiagnostics)> {
    if r < 2 {
        return Err(FbdpError::InvalidParameter(
            "factorial moments start at r = 2; use mean_adm for r = 1".into(),
        ));
    }
    let rf = r as f64;
    moment_series(
        model,
        alpha,
        t,
        k_max,
        move |n, l, m| {
            let nm1 = n as i64 - 1;
            l * rf * (rf - 1.0) * falling(nm1, r - 2) + (l - m) * rf * falling(nm1, r - 1)
        },
        0.0,
    )
}

fn moment_series<W: Fn(usize, f64, f64) -> f64>(
    model: &RateModel,
    alpha: FractionalOrder,
    t: f64,
    k_max: usize,
    weight: W,
    base: f64,
) -> Result<(f64, SeriesDiagnostics)> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(FbdpError::InvalidParameter(format!(
            "t must be finite and nonnegative, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok((base, SeriesDiagnostics::trivial()));
    }
    let psi = build_psi(model, k_max)?;
    let a = alpha.get();
    let mut acc = SeriesAccumulator::new(1e-15, 2, false);
    acc.sum.add(base);
    for k in 0..=k_max {
        let f = time_factor(k + 1, a, t);
        let mut inner = TwoFloat::from(0.0);
        for n in 1..=k + 1 {
            let w = weight(n, model.lambda_at(n)?, model.mu_at(n)?);
            inner += psi.get_dd(n, k)? * (sign(k, n) * w);
        }
        if acc.push(k, inner.hi() * f) {
            break;
        }
    }
    Ok(acc.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> RateModel {
        RateModel::table(
            vec![0.0, 1.3, 0.7, 2.2, 0.4, 1.1],
            vec![0.0, 0.9, 1.7, 0.3, 2.5, 0.8],
        )
        .unwrap()
    }

    #[test]
    fn hand_computed_entries() {
        let m = table();
        let p = build_psi(&m, 3).unwrap();
        let l = |n| m.lambda_at(n).unwrap();
        let bl = |n| m.big_lambda(n).unwrap();
        let th = |n| m.theta(n).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-13 * b.abs().max(1.0);
        assert_eq!(p.get(0, 0).unwrap(), 0.0);
        assert_eq!(p.get(1, 0).unwrap(), 1.0);
        assert!(close(p.get(0, 1).unwrap(), m.mu_at(1).unwrap()));
        assert!(close(p.get(1, 1).unwrap(), bl(1)));
        assert!(close(p.get(1, 2).unwrap(), bl(1).powi(2) + th(1)));
        assert!(close(p.get(2, 2).unwrap(), l(1) * (bl(1) + bl(2))));
        assert!(close(
            p.get(1, 3).unwrap(),
            bl(1).powi(3) + 2.0 * th(1) * bl(1) + th(1) * bl(2)
        ));
        assert!(close(
            p.get(2, 3).unwrap(),
            l(1) * (bl(1).powi(2) + bl(1) * bl(2) + bl(2).powi(2) + th(1) + th(2))
        ));
    }

    #[test]
    fn components_and_initial_condition() {
        let m = table();
        let p = build_psi(&m, 4).unwrap();
        let a = FractionalOrder::new(0.6).unwrap();
        let t: f64 = 0.3;
        let p1 = series_component(&p, 0, 1, a, t).unwrap();
        let expect = m.mu_at(1).unwrap() * t.powf(0.6) / crate::special_fn::gamma::gamma(1.6);
        assert!((p1 - expect).abs() < 1e-15);
        assert_eq!(series_component(&p, 5, 2, a, t).unwrap(), 0.0);
        assert_eq!(series_component(&p, 1, 0, a, t).unwrap(), 1.0);
        assert_eq!(series_component(&p, 2, 0, a, t).unwrap(), 0.0);
        assert_eq!(pmf_adm_table(&p, a, 1, 0.0, 1e-14).unwrap().0, 1.0);
        assert!(series_component(&p, 1, 5, a, t).is_err());
    }

    #[test]
    fn equal_rates_mean_is_one() {
        let m = RateModel::table(
            vec![0.0, 1.0, 2.5, 0.5, 3.0, 1.0, 2.0],
            vec![0.0, 1.0, 2.5, 0.5, 3.0, 1.0, 2.0],
        )
        .unwrap();
        let a = FractionalOrder::new(0.8).unwrap();
        for t in [0.01, 0.1, 0.5] {
            let (v, _) = mean_adm(&m, a, t, 6).unwrap();
            assert!((v - 1.0).abs() < 1e-15);
        }
        let (f2, _) = factorial_moment_adm(&m, a, 2, 0.0, 6).unwrap();
        assert_eq!(f2, 0.0);
    }

    #[test]
    fn pgf_at_one_and_zero_time() {
        let m = RateModel::linear(0.5, 1.0).unwrap();
        let a = FractionalOrder::new(0.7).unwrap();
        assert_eq!(pgf_adm(&m, a, 1.0, 0.2, 30).unwrap().0, 1.0);
        assert_eq!(pgf_adm(&m, a, 0.3, 0.0, 30).unwrap().0, 0.3);
    }

    #[test]
    fn psi_csv_has_header() {
        let p = build_psi(&table(), 2).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("n,k,psi\n0,0,0e0\n1,0,1e0\n"));
        assert_eq!(s.lines().count(), 1 + 2 + 3 + 4);
    }

    #[test]
    fn table_extent_checked() {
        assert!(matches!(
            build_psi(&table(), 6),
            Err(FbdpError::TableExtent { .. })
        ));
        assert!(build_psi(&table(), 5).is_ok());
    }
}
