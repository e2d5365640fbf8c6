//! Cumulative births B(t) of the linear process: moments, correlation with
//! N(t), the joint pgf of (N, B), and the law of the total number of births
//! when extinction is certain.
//!
//! Notation: d = λ-μ, E₁ = E_α(dt^α), E₂ = E_α(2dt^α) and
//! F = (t^α/α) E_{α,α}(dt^α), which is the time-changed t·e^{dt}.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FbdpError, Result};
use crate::linear::{mean_linear, ml_difference_quotient, var_linear, LinearParams, Regime};
use crate::special_fn::gamma::{gamma, ln_binom};
use crate::special_fn::ml::{ml_one, ml_two};
use crate::special_fn::Compensated;

const PGF_K_CAP: usize = 100_000;
const PGF_TAIL: f64 = 1e-15;

/// Roots r₁ ≤ r₂ of λv r² - (λ+μ) r + μ = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootsPair {
    pub r1: f64,
    pub r2: f64,
    pub v: f64,
}

pub fn roots(p: &LinearParams, v: f64) -> Result<RootsPair> {
    if !(v > 0.0 && v <= 1.0) {
        return Err(FbdpError::InvalidParameter(format!(
            "v must lie in (0, 1], got {v}"
        )));
    }
    let (l, m) = (p.lambda, p.mu);
    let disc = (l + m) * (l + m) - 4.0 * l * m * v;
    assert!(disc >= 0.0, "negative discriminant {disc}");
    let q = 0.5 * ((l + m) + disc.sqrt());
    let (a, b) = (m / q, q / (l * v));
    Ok(RootsPair {
        r1: a.min(b),
        r2: a.max(b),
        v,
    })
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(FbdpError::InvalidParameter(format!(
            "t must be finite and nonnegative, got {t}"
        )));
    }
    Ok(())
}

fn reject_critical(p: &LinearParams, what: &str) -> Result<()> {
    if p.regime() == Regime::Critical {
        return Err(FbdpError::Regime(format!(
            "{what} has no closed form at lambda = mu"
        )));
    }
    Ok(())
}

struct Terms {
    d: f64,
    e1: f64,
    e2: f64,
    f: f64,
}

fn terms(p: &LinearParams, t: f64) -> Result<Terms> {
    let (a, d) = (p.a(), p.lambda - p.mu);
    let s = t.powf(a);
    Ok(Terms {
        d,
        e1: ml_one(a, d * s)?,
        e2: ml_one(a, 2.0 * d * s)?,
        // the convolution integral in closed form; conv_ml is the quadrature
        f: s / a * ml_two(a, a, d * s)?,
    })
}

/// E B(t) = 1 + (λ/d)(E₁ - 1); at λ = μ the limit 1 + λt^α/Γ(1+α).
pub fn mean_births(p: &LinearParams, t: f64) -> Result<f64> {
    check_t(t)?;
    let a = p.a();
    if p.regime() == Regime::Critical {
        return Ok(1.0 + p.lambda * t.powf(a) / gamma(1.0 + a));
    }
    let d = p.lambda - p.mu;
    Ok(1.0 + p.lambda / d * (ml_one(a, d * t.powf(a))? - 1.0))
}

/// E D(t) = (μ/d)(E₁ - 1).
pub fn mean_deaths(p: &LinearParams, t: f64) -> Result<f64> {
    check_t(t)?;
    reject_critical(p, "mean_deaths")?;
    let d = p.lambda - p.mu;
    Ok(p.mu / d * (ml_one(p.a(), d * t.powf(p.a()))? - 1.0))
}

/// Cov(N, B) = (2λ²/d²)(E₂ - E₁) - (λ/d)(E₁² - E₁) - 2λμF/d.
pub fn cov_nb(p: &LinearParams, t: f64) -> Result<f64> {
    check_t(t)?;
    reject_critical(p, "cov_nb")?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let (l, m) = (p.lambda, p.mu);
    let Terms { d, e1, f, .. } = terms(p, t)?;
    let q = ml_difference_quotient(p.a(), d, t)?;
    Ok(2.0 * l * l / d * q - l / d * (e1 * e1 - e1) - 2.0 * l * m * f / d)
}

/// Var B(t) with X = E₁ - 1, Y = E₂ - 1:
/// λX/d - 4λ²X/d² + 2λ³Y/d³ - λ²X²/d² - 4λ²μF/d².
pub fn var_births(p: &LinearParams, t: f64) -> Result<f64> {
    check_t(t)?;
    reject_critical(p, "var_births")?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let (l, m) = (p.lambda, p.mu);
    let Terms { d, e1, e2, f } = terms(p, t)?;
    let (x, y) = (e1 - 1.0, e2 - 1.0);
    let d2 = d * d;
    Ok(
        l * x / d - 4.0 * l * l * x / d2 + 2.0 * l * l * l * y / (d2 * d)
            - l * l * x * x / d2
            - 4.0 * l * l * m * f / d2,
    )
}

pub fn corr_nb(p: &LinearParams, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(FbdpError::InvalidParameter(
            "correlation is undefined at t = 0".into(),
        ));
    }
    let c = cov_nb(p, t)?;
    let vn = var_linear(p, t)?;
    let vb = var_births(p, t)?;
    if !(vn > 0.0 && vb > 0.0) {
        return Err(FbdpError::InvalidParameter(format!(
            "nonpositive variance at t = {t}: {vn}, {vb}"
        )));
    }
    Ok(c / (vn * vb).sqrt())
}

/// E u^{N(t)} v^{B(t)} = v(r₁ - (r₂-r₁) Σ_{k≥1} q^k E_α(-λv(r₂-r₁)k t^α)),
/// q = (u-r₁)/(u-r₂).
pub fn joint_pgf(p: &LinearParams, u: f64, v: f64, t: f64, k_max: usize) -> Result<f64> {
    check_t(t)?;
    if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
        return Err(FbdpError::InvalidParameter(format!(
            "u and v must lie in [0, 1], got {u}, {v}"
        )));
    }
    if t == 0.0 {
        return Ok(u * v);
    }
    if v == 0.0 {
        // B(t) ≥ 1
        return Ok(0.0);
    }
    if u == 1.0 && v == 1.0 {
        return Ok(1.0);
    }
    let r = roots(p, v)?;
    let gap = r.r2 - r.r1;
    if gap < 1e-10 {
        return Err(FbdpError::Regime("double root of the pgf kernel".into()));
    }
    let q = (u - r.r1) / (u - r.r2);
    if !(q.abs() < 1.0) {
        return Err(FbdpError::InvalidParameter(format!(
            "pgf ratio |q| = {} is not below one",
            q.abs()
        )));
    }
    let a = p.a();
    let c = -p.lambda * v * gap * t.powf(a);
    let cap = k_max.min(PGF_K_CAP);
    let mut acc = Compensated::default();
    let mut w = 1.0;
    let mut done = q == 0.0;
    for k in 1..=cap {
        if done {
            break;
        }
        w *= q;
        acc.add(w * ml_one(a, c * k as f64)?);
        // |E_α| ≤ 1 on the negative axis
        done = w.abs() * q.abs() / (1.0 - q.abs()) < PGF_TAIL;
    }
    if !done {
        return Err(FbdpError::Truncation {
            terms: cap,
            tail: w.abs() * q.abs() / (1.0 - q.abs()),
        });
    }
    Ok(v * (r.r1 - gap * acc.value()))
}

fn check_limit_regime(lambda: f64, mu: f64) -> Result<()> {
    if !(lambda > 0.0 && mu > 0.0 && lambda.is_finite() && mu.is_finite()) {
        return Err(FbdpError::InvalidParameter(format!(
            "rates must be positive, got {lambda}, {mu}"
        )));
    }
    if lambda > mu {
        return Err(FbdpError::Regime(
            "total births are finite only for lambda <= mu".into(),
        ));
    }
    Ok(())
}

/// Pr{B(∞) = b} = C(2b,b)/(2b-1) · (λμ)^b / (2λ(λ+μ)^{2b-1}) for λ ≤ μ;
/// the same for every α.
pub fn limiting_births_pmf(lambda: f64, mu: f64, b: usize) -> Result<f64> {
    check_limit_regime(lambda, mu)?;
    if b == 0 {
        return Err(FbdpError::InvalidParameter("b must be at least 1".into()));
    }
    let bf = b as f64;
    let ln = ln_binom(2.0 * bf, bf) - (2.0 * bf - 1.0).ln() + bf * (lambda * mu).ln()
        - (2.0 * lambda).ln()
        - (2.0 * bf - 1.0) * (lambda + mu).ln();
    Ok(ln.exp())
}

/// Mean μ/(μ-λ) and variance λμ(λ+μ)/(μ-λ)³ of the total births.
pub fn limiting_births_moments(lambda: f64, mu: f64) -> Result<(f64, f64)> {
    check_limit_regime(lambda, mu)?;
    if lambda == mu {
        return Err(FbdpError::Regime(
            "total births have infinite mean at lambda = mu".into(),
        ));
    }
    let g = mu - lambda;
    Ok((mu / g, lambda * mu * (lambda + mu) / (g * g * g)))
}

/// Partial sums of the limiting law up to the first b* whose geometric tail
/// bound on the mass falls below `tail_tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitingSeries {
    pub b_star: usize,
    pub mass: f64,
    pub mean: f64,
    pub variance: f64,
    pub tail_bound: f64,
}

pub fn limiting_births_series(lambda: f64, mu: f64, tail_tol: f64) -> Result<LimitingSeries> {
    check_limit_regime(lambda, mu)?;
    if lambda == mu {
        return Err(FbdpError::Regime(
            "tail decays only algebraically at lambda = mu".into(),
        ));
    }
    // term ratios increase to R = 4λμ/(λ+μ)² < 1
    let big_r = 4.0 * lambda * mu / ((lambda + mu) * (lambda + mu));
    let (mut m0, mut m1, mut m2) = (
        Compensated::default(),
        Compensated::default(),
        Compensated::default(),
    );
    for b in 1..10_000_000usize {
        let pb = limiting_births_pmf(lambda, mu, b)?;
        let bf = b as f64;
        m0.add(pb);
        m1.add(bf * pb);
        m2.add(bf * bf * pb);
        // bound the moment tails too: b²·R^j decays once b is past 2/(1-R)
        let tail = pb * big_r / (1.0 - big_r);
        if bf > 2.0 / (1.0 - big_r) && tail * bf * bf < tail_tol {
            let mean = m1.value();
            return Ok(LimitingSeries {
                b_star: b,
                mass: m0.value(),
                mean,
                variance: m2.value() - mean * mean,
                tail_bound: tail,
            });
        }
    }
    Err(FbdpError::Truncation {
        terms: 10_000_000,
        tail: f64::NAN,
    })
}

/// One row of the correlation curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrRow {
    pub alpha: f64,
    pub lambda: f64,
    pub mu: f64,
    pub t: f64,
    pub corr: f64,
}

pub const CORR_ALPHAS: [f64; 4] = [0.5, 0.7, 0.9, 1.0];
pub const CORR_RATES: [(f64, f64); 2] = [(0.7, 0.4), (0.4, 0.7)];

/// n points log-uniform on [lo, hi].
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut g: Vec<f64> = (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect();
    g[0] = lo;
    g[n - 1] = hi;
    g
}

/// Corr(N, B) on 200 log-spaced times in [1e-2, 1e2] for each α and rate pair.
pub fn correlation_curves() -> Result<Vec<CorrRow>> {
    let grid = log_grid(1e-2, 1e2, 200);
    let mut cases = Vec::new();
    for &(lambda, mu) in &CORR_RATES {
        for &alpha in &CORR_ALPHAS {
            let p = LinearParams::new(lambda, mu, alpha)?;
            cases.extend(grid.iter().map(|&t| (p, t)));
        }
    }
    cases
        .into_par_iter()
        .map(|(p, t)| {
            Ok(CorrRow {
                alpha: p.a(),
                lambda: p.lambda,
                mu: p.mu,
                t,
                corr: corr_nb(&p, t)?,
            })
        })
        .collect()
}

pub fn write_correlation_csv<W: Write>(rows: &[CorrRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["alpha", "lambda", "mu", "t", "corr"])
        .map_err(|e| FbdpError::Io(e.to_string()))?;
    for r in rows {
        wtr.write_record([r.alpha, r.lambda, r.mu, r.t, r.corr].map(|v| format!("{v:e}")))
            .map_err(|e| FbdpError::Io(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

/// E N(t) + E D(t) - E B(t), zero up to rounding since B counts the
/// initial individual.
pub fn bookkeeping_defect(p: &LinearParams, t: f64) -> Result<f64> {
    Ok(mean_linear(p, t)? + mean_deaths(p, t)? - mean_births(p, t)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(l: f64, m: f64, a: f64) -> LinearParams {
        LinearParams::new(l, m, a).unwrap()
    }

    #[test]
    fn roots_cases() {
        let r = roots(&lp(0.5, 1.0, 0.7), 1.0).unwrap();
        assert!((r.r1 - 1.0).abs() < 1e-15 && (r.r2 - 2.0).abs() < 1e-15);
        let r = roots(&lp(1.0, 1.0, 0.7), 1.0).unwrap();
        assert_eq!((r.r1, r.r2), (1.0, 1.0));
        let r = roots(&lp(2.0, 1.0, 0.7), 1.0).unwrap();
        assert!((r.r1 - 0.5).abs() < 1e-15 && (r.r2 - 1.0).abs() < 1e-15);
        let (l, m, v) = (0.4, 1.0, 0.5);
        let r = roots(&lp(l, m, 0.7), v).unwrap();
        for x in [r.r1, r.r2] {
            assert!((l * v * x * x - (l + m) * x + m).abs() < 1e-14);
        }
        assert!(r.r1 < 1.0 && r.r2 > 1.0);
        assert!(roots(&lp(l, m, 0.7), 0.0).is_err());
    }

    #[test]
    fn zero_time_and_critical() {
        let p = lp(0.5, 1.0, 0.7);
        assert_eq!(mean_births(&p, 0.0).unwrap(), 1.0);
        assert_eq!(cov_nb(&p, 0.0).unwrap(), 0.0);
        assert_eq!(var_births(&p, 0.0).unwrap(), 0.0);
        assert_eq!(mean_deaths(&p, 0.0).unwrap(), 0.0);
        assert!(corr_nb(&p, 0.0).is_err());
        assert_eq!(joint_pgf(&p, 0.3, 0.6, 0.0, 100).unwrap(), 0.3 * 0.6);
        let c = lp(0.8, 0.8, 0.6);
        assert!(
            cov_nb(&c, 1.0).is_err()
                && var_births(&c, 1.0).is_err()
                && mean_deaths(&c, 1.0).is_err()
        );
        let m = mean_births(&c, 2.0).unwrap();
        assert!((m - (1.0 + 0.8 * 2f64.powf(0.6) / gamma(1.6))).abs() < 1e-14);
        // continuity of the mean through λ = μ
        let near = mean_births(&lp(0.8 + 1e-7, 0.8, 0.6), 2.0).unwrap();
        assert!((near - m).abs() < 1e-6);
    }

    #[test]
    fn classical_reduction() {
        let (l, m, t): (f64, f64, f64) = (0.5, 1.0, 1.3);
        let p = lp(l, m, 1.0);
        let d = l - m;
        let e = (d * t).exp();
        assert!((mean_births(&p, t).unwrap() - (1.0 + l / d * (e - 1.0))).abs() < 1e-14);
        let cov = l * (l + m) / (d * d) * (e * e - e) - 2.0 * l * m * t * e / d;
        assert!((cov_nb(&p, t).unwrap() - cov).abs() < 1e-12);
        assert!((mean_deaths(&p, t).unwrap() - m / d * (e - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn births_minus_deaths_is_growth() {
        for (l, m, a) in [(0.5, 1.0, 0.8), (0.7, 0.4, 0.5), (1.2, 0.3, 1.0)] {
            for t in [0.1, 1.0, 3.0] {
                assert!(bookkeeping_defect(&lp(l, m, a), t).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn births_and_deaths_are_correlated() {
        let p = lp(0.5, 1.0, 0.8);
        let cbd = cov_nb(&p, 1.0).unwrap() - var_births(&p, 1.0).unwrap();
        assert!(cbd.abs() > 1e-3);
    }

    #[test]
    fn limiting_law() {
        let v = limiting_births_pmf(0.4, 1.0, 1).unwrap();
        assert!((v - 1.0 / 1.4).abs() < 1e-15);
        assert!((limiting_births_pmf(0.9, 0.9, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!(limiting_births_pmf(1.1, 1.0, 1).is_err());
        let (mean, var) = limiting_births_moments(0.4, 1.0).unwrap();
        assert!((mean - 5.0 / 3.0).abs() < 1e-15);
        assert!((var - 0.4 * 1.4 / 0.216).abs() < 1e-12);
        let s = limiting_births_series(0.4, 1.0, 1e-12).unwrap();
        assert!((s.mass - 1.0).abs() < 1e-10);
        assert!((s.mean - mean).abs() < 1e-9);
        assert!((s.variance - var).abs() < 1e-7);
        assert!(limiting_births_moments(1.0, 1.0).is_err());
    }

    #[test]
    fn pgf_marginals() {
        let p = lp(0.5, 1.0, 0.7);
        let t = 1.5;
        // ∂ᵤ at u = 1 with v = 1 gives E N
        let h = 1e-5;
        let g1 = joint_pgf(&p, 1.0 - h, 1.0, t, 100_000).unwrap();
        let g2 = joint_pgf(&p, 1.0 - 2.0 * h, 1.0, t, 100_000).unwrap();
        let du = (3.0 - 4.0 * g1 + g2) / (2.0 * h);
        assert!((du - mean_linear(&p, t).unwrap()).abs() < 1e-5, "{du}");
        let g1 = joint_pgf(&p, 1.0, 1.0 - h, t, 100_000).unwrap();
        let g2 = joint_pgf(&p, 1.0, 1.0 - 2.0 * h, t, 100_000).unwrap();
        let dv = (3.0 - 4.0 * g1 + g2) / (2.0 * h);
        assert!((dv - mean_births(&p, t).unwrap()).abs() < 1e-5, "{dv}");
    }

    #[test]
    fn grid_endpoints() {
        let g = log_grid(1e-2, 1e2, 200);
        assert_eq!(g.len(), 200);
        assert!((g[0] - 1e-2).abs() < 1e-16 && (g[199] - 1e2).abs() < 1e-12);
    }
}
