//! Linear rates λₙ = nλ, μₙ = nμ: Mittag-Leffler closed forms for the
//! state probabilities, moments and extinction time, plus the large- and
//! small-time asymptotics of the extinction time under a general
//! subordinator.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{FbdpError, Result};
use crate::rates::FractionalOrder;
use crate::special_fn::gamma::{gamma, ln_binom, ln_factorial, ln_gamma};
use crate::special_fn::ml::ml_one;
use crate::special_fn::quadrature::{gk_adaptive, GkOptions};
use crate::special_fn::Compensated;

pub const DEFAULT_L_MAX: usize = 10_000;
const L_TAIL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Supercritical,
    Subcritical,
    Critical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearParams {
    pub lambda: f64,
    pub mu: f64,
    pub alpha: FractionalOrder,
}

impl LinearParams {
    pub fn new(lambda: f64, mu: f64, alpha: f64) -> Result<Self> {
        for (name, v) in [("lambda", lambda), ("mu", mu)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(FbdpError::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(LinearParams {
            lambda,
            mu,
            alpha: FractionalOrder::new(alpha)?,
        })
    }

    pub fn regime(&self) -> Regime {
        if self.lambda > self.mu {
            Regime::Supercritical
        } else if self.lambda < self.mu {
            Regime::Subcritical
        } else {
            Regime::Critical
        }
    }

    pub fn a(&self) -> f64 {
        self.alpha.get()
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(FbdpError::InvalidParameter(format!(
            "t must be finite and nonnegative, got {t}"
        )));
    }
    Ok(())
}

/// Pr{N(t) = n} for the linear process started from one individual.
pub fn pmf_linear(p: &LinearParams, n: usize, t: f64, l_max: usize) -> Result<f64> {
    check_t(t)?;
    if t == 0.0 {
        return Ok(if n == 1 { 1.0 } else { 0.0 });
    }
    let r = match p.regime() {
        Regime::Critical => return pmf_critical(p, n, t),
        _ if n == 0 => extinction_cdf_with(p, t, l_max),
        _ => pmf_noncritical(p, n, t, l_max),
    };
    // near λ = μ the series converge too slowly
    match r {
        Err(FbdpError::Truncation { .. }) => pmf_noncritical_mixture(p, n, t),
        r => r,
    }
}

/// Pr{N(t) = 0}; for λ > μ it tends to μ/λ, otherwise to 1.
pub fn extinction_cdf(p: &LinearParams, t: f64) -> Result<f64> {
    pmf_linear(p, 0, t, DEFAULT_L_MAX)
}

fn extinction_cdf_with(p: &LinearParams, t: f64, l_max: usize) -> Result<f64> {
    match p.regime() {
        Regime::Supercritical => {
            let (l, m) = (p.lambda, p.mu);
            let s = geometric_ml_sum(p.a(), m / l, t, l - m, l_max)?;
            Ok(m / l - (l - m) / l * s)
        }
        Regime::Subcritical => Ok(1.0 - extinction_survival_with(p, t, l_max)?),
        Regime::Critical => pmf_critical(p, 0, t),
    }
}

/// Pr{T > t} = 1 - Pr{N(t) = 0}, computed without the cancellation of the
/// complement for λ < μ.
pub fn extinction_survival(p: &LinearParams, t: f64) -> Result<f64> {
    check_t(t)?;
    if t == 0.0 {
        return Ok(1.0);
    }
    match p.regime() {
        Regime::Subcritical => match extinction_survival_with(p, t, DEFAULT_L_MAX) {
            Err(FbdpError::Truncation { .. }) => Ok(1.0 - pmf_noncritical_mixture(p, 0, t)?),
            r => r,
        },
        _ => Ok(1.0 - extinction_cdf(p, t)?),
    }
}

fn extinction_survival_with(p: &LinearParams, t: f64, l_max: usize) -> Result<f64> {
    let (l, m) = (p.lambda, p.mu);
    // ((μ-λ)/λ) Σ_{l≥1} (λ/μ)^l E(-t^α l (μ-λ))
    Ok((m - l) / l * geometric_ml_sum(p.a(), l / m, t, m - l, l_max)?)
}

/// Σ_{l≥1} ρ^l E_α(-t^α l d), stopped once the remainder ρ^{L+1}/(1-ρ)
/// falls below the tail tolerance.
fn geometric_ml_sum(alpha: f64, rho: f64, t: f64, d: f64, l_max: usize) -> Result<f64> {
    let s = t.powf(alpha);
    let mut acc = Compensated::default();
    let mut w = 1.0;
    for l in 1..=l_max {
        w *= rho;
        acc.add(w * ml_one(alpha, -s * l as f64 * d)?);
        let tail = w * rho / (1.0 - rho);
        if tail < L_TAIL * acc.value().abs().max(1e-300) || tail < 1e-300 {
            return Ok(acc.value());
        }
    }
    Err(FbdpError::Truncation {
        terms: l_max,
        tail: w * rho / (1.0 - rho),
    })
}

fn pmf_noncritical(p: &LinearParams, n: usize, t: f64, l_max: usize) -> Result<f64> {
    let (l, m) = (p.lambda, p.mu);
    let (rho, d, pref) = match p.regime() {
        Regime::Supercritical => (m / l, l - m, ((l - m) / l).powi(2)),
        _ => (
            l / m,
            m - l,
            (l / m).powi(n as i32 - 1) * ((m - l) / m).powi(2),
        ),
    };
    let alpha = p.a();
    let s = t.powf(alpha);
    let ln_rho = rho.ln();
    let binoms: Vec<f64> = (0..n)
        .map(|r| ln_binom((n - 1) as f64, r as f64).exp())
        .collect();
    let mut acc = Compensated::default();
    let mut size = 0.0;
    for li in 0..=l_max {
        let lw = li as f64 * ln_rho + ln_binom((n + li) as f64, li as f64);
        let w = lw.exp();
        let mut inner = Compensated::default();
        for (r, b) in binoms.iter().enumerate() {
            let e = ml_one(alpha, -s * (r + li + 1) as f64 * d)?;
            inner.add(if r % 2 == 0 { b * e } else { -b * e });
            size += w * b * e;
        }
        // the inner sums are all of one sign, so the first shows the loss
        if li == 0 && size > MAX_CANCELLATION * inner.value().abs() {
            return pmf_noncritical_mixture(p, n, t);
        }
        acc.add(w * inner.value());
        // remaining Σ_{l>li} ρ^l C(n+l,l) 2^{n-1}, ratios ρ(n+l+1)/(l+1) decrease in l
        let ratio = rho * (n + li + 1) as f64 / (li + 1) as f64;
        if ratio < 1.0 {
            let tail = pref * w * ratio / (1.0 - ratio) * 2f64.powi(n as i32 - 1);
            if tail < L_TAIL {
                let v = pref * acc.value();
                if pref * size > MAX_CANCELLATION * v.abs() {
                    return pmf_noncritical_mixture(p, n, t);
                }
                return Ok(v);
            }
        }
    }
    Err(FbdpError::Truncation {
        terms: l_max,
        tail: f64::NAN,
    })
}

const MAX_CANCELLATION: f64 = 1e6;

/// E f(t^α M) where t^α M is the inverse stable time E(t), E e^{-qM} =
/// E_α(-q). By Kanter's representation M = (W/A(θ))^{1-α} with W ~ Exp(1)
/// and θ ~ U(0,π), a double integral with smooth, bounded integrands for
/// bounded f.
fn inverse_stable_average(alpha: f64, t: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    let s = t.powf(alpha);
    let beta = 1.0 - alpha;
    let opts = GkOptions {
        abs_tol: 1e-16,
        rel_tol: 1e-13,
        max_segments: 400,
    };
    let mut worst: f64 = 0.0;
    let outer = gk_adaptive(
        |theta| {
            // A(θ)^{1-α} = (sin αθ / sin θ) (sin((1-α)θ) / sin αθ)^{1-α}
            let sa = (alpha * theta).sin();
            let ab = if theta == 0.0 {
                alpha * (beta / alpha).powf(beta)
            } else {
                sa / theta.sin() * ((beta * theta).sin() / sa).powf(beta)
            };
            if !(ab.is_finite() && ab > 0.0) {
                return f(0.0);
            }
            let k = s / ab;
            let r = gk_adaptive(
                |w| (-w).exp() * f(k * w.powf(beta)),
                &[0.0, 1.0, 5.0, 40.0],
                opts,
            );
            worst = worst.max(r.error);
            r.value
        },
        &[0.0, 0.5, 1.5, 2.5, 3.0, PI],
        opts,
    );
    let err = outer.error + worst;
    if err > 1e-10 * outer.value.abs().max(1e-300) && err > 1e-15 {
        return Err(FbdpError::Quadrature {
            value: outer.value,
            error: err,
        });
    }
    Ok(outer.value / PI)
}

/// λ = μ: the classical critical law averaged over the inverse stable time.
fn pmf_critical(p: &LinearParams, n: usize, t: f64) -> Result<f64> {
    let alpha = p.a();
    if alpha == 1.0 {
        return Ok(critical_classical(n, p.lambda * t));
    }
    inverse_stable_average(alpha, t, |tau| critical_classical(n, p.lambda * tau))
}

/// λ ≠ μ by the same average; used where the binomial sums lose accuracy.
fn pmf_noncritical_mixture(p: &LinearParams, n: usize, t: f64) -> Result<f64> {
    let (l, m) = (p.lambda, p.mu);
    if p.a() == 1.0 {
        return Ok(noncritical_classical(l, m, n, t));
    }
    inverse_stable_average(p.a(), t, |tau| noncritical_classical(l, m, n, tau))
}

/// Classical law at time τ with x = e^{dτ} - 1, d = λ-μ:
/// p₀ = μx/(λx+d), pₙ = d² e^{dτ} (λx)^{n-1} / (λx+d)^{n+1}.
fn noncritical_classical(l: f64, m: f64, n: usize, tau: f64) -> f64 {
    let d = l - m;
    let x = (d * tau).exp_m1();
    let den = l * x + d;
    if n == 0 {
        return m * x / den;
    }
    if x == 0.0 {
        return if n == 1 { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    (2.0 * d.abs().ln() + d * tau + (nf - 1.0) * (l * x).abs().ln() - (nf + 1.0) * den.abs().ln())
        .exp()
}

/// Geometric law of the classical critical process at c = λt.
fn critical_classical(n: usize, c: f64) -> f64 {
    if n == 0 {
        c / (1.0 + c)
    } else if c == 0.0 {
        if n == 1 {
            1.0
        } else {
            0.0
        }
    } else {
        ((n - 1) as f64 * c.ln() - (n + 1) as f64 * c.ln_1p()).exp()
    }
}

/// E N(t) = E_α((λ-μ) t^α).
pub fn mean_linear(p: &LinearParams, t: f64) -> Result<f64> {
    check_t(t)?;
    ml_one(p.a(), (p.lambda - p.mu) * t.powf(p.a()))
}

/// (E_α(2dt^α) - E_α(dt^α)) / d with d = λ-μ, continuous through d = 0.
pub(crate) fn ml_difference_quotient(alpha: f64, d: f64, t: f64) -> Result<f64> {
    let s = t.powf(alpha);
    if d == 0.0 || (d * s).abs() <= 0.5 {
        // Σ_{k≥1} (2^k - 1) d^{k-1} s^k / Γ(kα+1)
        let mut acc = Compensated::default();
        for k in 1..400usize {
            let kf = k as f64;
            let coef = 2f64.powi(k as i32) - 1.0;
            let term =
                coef * d.powi(k as i32 - 1) * (kf * s.ln() - ln_gamma(kf * alpha + 1.0)).exp();
            acc.add(term);
            if term.abs() < 1e-17 * acc.value().abs() {
                break;
            }
        }
        return Ok(acc.value());
    }
    Ok((ml_one(alpha, 2.0 * d * s)? - ml_one(alpha, d * s)?) / d)
}

/// Var N(t) = (2λ/d) E_α(2dt^α) - ((λ+μ)/d) E_α(dt^α) - E_α(dt^α)², written
/// as 2λ (E₂-E₁)/d + E₁ - E₁² so that λ = μ is the continuous limit
/// 2λ t^α / Γ(α+1).
pub fn var_linear(p: &LinearParams, t: f64) -> Result<f64> {
    check_t(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let d = p.lambda - p.mu;
    let q = ml_difference_quotient(p.a(), d, t)?;
    let e1 = mean_linear(p, t)?;
    Ok(2.0 * p.lambda * q + e1 - e1 * e1)
}

/// ((λ+μ)/(λ-μ)) (E_α(2dt^α) - E_α(dt^α)). Agrees with [`var_linear`] only
/// at α = 1; kept for comparison.
pub fn var_linear_alternate(p: &LinearParams, t: f64) -> Result<f64> {
    check_t(t)?;
    let d = p.lambda - p.mu;
    Ok((p.lambda + p.mu) * ml_difference_quotient(p.a(), d, t)?)
}

/// (μ - μe^{-t(μ-λ)}) / (μ - λe^{-t(μ-λ)}) for λ < μ.
pub fn classical_extinction(lambda: f64, mu: f64, t: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < mu) {
        return Err(FbdpError::Regime(format!(
            "classical extinction formula needs 0 < lambda < mu, got {lambda}, {mu}"
        )));
    }
    check_t(t)?;
    let e = (-(mu - lambda) * t).exp();
    Ok(mu * (1.0 - e) / (mu - lambda * e))
}

/// -(1/λ) ln(1 - λ/μ), the mean extinction time of the classical process.
pub fn mean_extinction_time_classical(lambda: f64, mu: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < mu) {
        return Err(FbdpError::Regime(format!(
            "mean extinction time needs 0 < lambda < mu, got {lambda}, {mu}"
        )));
    }
    Ok(-(-lambda / mu).ln_1p() / lambda)
}

/// Subordinator families for the time change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SubordinatorModel {
    /// φ(η) = η^α, 0 < α < 1
    Stable { alpha: f64 },
    /// φ(η) = a ln(1 + η/b)
    Gamma { a: f64, b: f64 },
}

impl SubordinatorModel {
    pub fn stable(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(FbdpError::InvalidParameter(format!(
                "stable index must lie in (0, 1), got {alpha}"
            )));
        }
        Ok(SubordinatorModel::Stable { alpha })
    }

    pub fn gamma(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(FbdpError::InvalidParameter(format!(
                "gamma subordinator needs a, b > 0, got {a}, {b}"
            )));
        }
        Ok(SubordinatorModel::Gamma { a, b })
    }

    pub fn laplace_exponent(&self, eta: f64) -> f64 {
        match *self {
            SubordinatorModel::Stable { alpha } => eta.powf(alpha),
            SubordinatorModel::Gamma { a, b } => a * (eta / b).ln_1p(),
        }
    }

    /// Index of regular variation of φ at infinity.
    pub fn rv_index_at_infinity(&self) -> f64 {
        match *self {
            SubordinatorModel::Stable { alpha } => alpha,
            SubordinatorModel::Gamma { .. } => 0.0,
        }
    }

    /// Index of regular variation of φ at zero.
    pub fn rv_index_at_zero(&self) -> f64 {
        match *self {
            SubordinatorModel::Stable { alpha } => alpha,
            SubordinatorModel::Gamma { .. } => 1.0,
        }
    }
}

fn check_subcritical(lambda: f64, mu: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < mu && mu.is_finite()) {
        return Err(FbdpError::Regime(format!(
            "asymptotics need 0 < lambda < mu, got {lambda}, {mu}"
        )));
    }
    Ok(())
}

/// -ln(1-λ/μ) φ(1/t) / (λ Γ(1-δ)) given φ(1/t) and the index δ ∈ [0,1).
pub fn tail_asymptote_from(phi_inv_t: f64, delta: f64, lambda: f64, mu: f64) -> Result<f64> {
    check_subcritical(lambda, mu)?;
    if !(0.0..1.0).contains(&delta) {
        return Err(FbdpError::Regime(format!(
            "tail asymptote needs index in [0, 1) at zero, got {delta}"
        )));
    }
    Ok(-(-lambda / mu).ln_1p() * phi_inv_t / (lambda * gamma(1.0 - delta)))
}

/// Large-t equivalent of Pr{T > t} for the time-changed linear process.
pub fn extinction_tail_asymptote(
    model: &SubordinatorModel,
    lambda: f64,
    mu: f64,
    t: f64,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(FbdpError::InvalidParameter(format!(
            "t must be positive, got {t}"
        )));
    }
    tail_asymptote_from(
        model.laplace_exponent(1.0 / t),
        model.rv_index_at_zero(),
        lambda,
        mu,
    )
}

/// Small-t equivalent of Pr{T ≤ t}:
/// (1/Γ(1+δ)) (μ - μ e^{(λ-μ)/φ(1/t)}) / (μ - λ e^{(λ-μ)/φ(1/t)}).
pub fn extinction_cdf_zero_asymptote(
    model: &SubordinatorModel,
    lambda: f64,
    mu: f64,
    t: f64,
) -> Result<f64> {
    check_subcritical(lambda, mu)?;
    if !(t > 0.0) {
        return Err(FbdpError::InvalidParameter(format!(
            "t must be positive, got {t}"
        )));
    }
    let delta = model.rv_index_at_infinity();
    if !(delta > 0.0) {
        return Err(FbdpError::Regime(format!(
            "zero asymptote needs positive index at infinity, got {delta}"
        )));
    }
    let e = ((lambda - mu) / model.laplace_exponent(1.0 / t)).exp();
    Ok(mu * (1.0 - e) / (mu - lambda * e) / gamma(1.0 + delta))
}

/// ψ_{n,k} for linear rates from the closed forms (λ ≠ μ: geometric l-sums
/// of finite differences of x^k; λ = μ: C(k+1,n) k! λ^k). k ≤ 20.
pub fn linear_psi_closed_form(lambda: f64, mu: f64, n: usize, k: usize) -> Result<f64> {
    if k > 20 {
        return Err(FbdpError::InvalidParameter(
            "closed-form ψ supports k ≤ 20".into(),
        ));
    }
    if n == 0 && k == 0 {
        return Ok(0.0);
    }
    if n > k + 1 {
        return Ok(0.0);
    }
    if lambda == mu {
        let lb = ln_binom((k + 1) as f64, n as f64) + ln_factorial(k) + k as f64 * lambda.ln();
        return Ok(lb.exp().round_if_integral());
    }
    let sup = lambda > mu;
    let (rho, d) = if sup {
        (mu / lambda, lambda - mu)
    } else {
        (lambda / mu, mu - lambda)
    };
    let mut acc = Compensated::default();
    let mut w = if sup && n == 0 { rho } else { 1.0 };
    for l in 0..5000usize {
        let term = if n == 0 {
            let (a, b) = ((l + 1) as i128, l as i128);
            w * (a.pow(k as u32) - b.pow(k as u32)) as f64
        } else {
            w * ln_binom((n + l) as f64, l as f64).exp()
                * forward_difference(n - 1, l + 1, k) as f64
        };
        acc.add(term);
        let s = acc.value();
        if l > k + n && term.abs() < 1e-17 * s.abs() {
            break;
        }
        w *= rho;
    }
    let s = acc.value();
    if n == 0 {
        return Ok(d.powi(k as i32) * s);
    }
    let pref = if sup {
        d.powi(k as i32 + 2) / (lambda * lambda)
    } else {
        rho.powi(n as i32 - 1) * d.powi(k as i32 + 2) / (mu * mu)
    };
    Ok(pref * s)
}

/// Σ_{r=0}^{m} (-1)^{m-r} C(m,r) (x0+r)^k, the m-th forward difference of
/// x^k at x0, exact in integers.
fn forward_difference(m: usize, x0: usize, k: usize) -> i128 {
    let mut total: i128 = 0;
    let mut c: i128 = 1;
    for r in 0..=m {
        let v = ((x0 + r) as i128).pow(k as u32);
        let sgn = if (m - r) % 2 == 0 { 1 } else { -1 };
        total += sgn * c * v;
        c = c * (m - r) as i128 / (r + 1) as i128;
    }
    total
}

trait RoundIfIntegral {
    fn round_if_integral(self) -> f64;
}

impl RoundIfIntegral for f64 {
    fn round_if_integral(self) -> f64 {
        let r = self.round();
        if (self - r).abs() <= 1e-9 * self.abs() && self.abs() < 9e15 {
            r
        } else {
            self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(l: f64, m: f64, a: f64) -> LinearParams {
        LinearParams::new(l, m, a).unwrap()
    }

    #[test]
    fn mixture_matches_binomial_sums() {
        let p = lp(0.9, 0.3, 0.6);
        for n in [0, 1, 4, 9] {
            let a = pmf_linear(&p, n, 0.8, DEFAULT_L_MAX).unwrap();
            let b = pmf_noncritical_mixture(&p, n, 0.8).unwrap();
            assert!((a - b).abs() < 1e-11 * a.max(1e-12), "n = {n}: {a} vs {b}");
        }
        let q = lp(0.9, 0.3, 1.0);
        let c = noncritical_classical(0.9, 0.3, 3, 0.8);
        assert!((pmf_linear(&q, 3, 0.8, DEFAULT_L_MAX).unwrap() - c).abs() < 1e-13);
    }

    #[test]
    fn large_n_stays_nonnegative() {
        let p = lp(0.8929, 0.1, 0.3);
        let mut total = 0.0;
        for n in 0..200 {
            let v = pmf_linear(&p, n, 0.05, DEFAULT_L_MAX).unwrap();
            assert!(v >= 0.0, "n = {n}: {v}");
            total += v;
        }
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn classical_values() {
        let v = classical_extinction(0.5, 1.0, 1.0).unwrap();
        let e = (-0.5f64).exp();
        assert!((v - (1.0 - e) / (1.0 - 0.5 * e)).abs() < 1e-15);
        assert!((v - 0.5647334016064161).abs() < 1e-15);
        assert_eq!(classical_extinction(0.5, 1.0, 0.0).unwrap(), 0.0);
        assert!(
            (mean_extinction_time_classical(0.5, 1.0).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-14
        );
        assert!((mean_extinction_time_classical(1e-9, 1.0).unwrap() - 1.0).abs() < 1e-8);
        assert!(classical_extinction(1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn alpha_one_extinction_matches_classical() {
        let p = lp(0.5, 1.0, 1.0);
        for t in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let a = extinction_cdf(&p, t).unwrap();
            let b = classical_extinction(0.5, 1.0, t).unwrap();
            assert!((a - b).abs() < 1e-10, "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn alpha_one_p1_supercritical() {
        let p = lp(1.0, 0.4, 1.0);
        let t = 0.7;
        let d: f64 = 0.6;
        let e = (-d * t).exp();
        let expect = d * d * e / (1.0 - 0.4 * e).powi(2);
        assert!((pmf_linear(&p, 1, t, DEFAULT_L_MAX).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn initial_condition_all_regimes() {
        for (l, m) in [(1.0, 0.5), (0.5, 1.0), (0.7, 0.7)] {
            let p = lp(l, m, 0.6);
            assert_eq!(pmf_linear(&p, 1, 0.0, 100).unwrap(), 1.0);
            assert_eq!(pmf_linear(&p, 0, 0.0, 100).unwrap(), 0.0);
            assert_eq!(pmf_linear(&p, 4, 0.0, 100).unwrap(), 0.0);
        }
    }

    #[test]
    fn critical_alpha_one_geometric() {
        let p = lp(0.8, 0.8, 1.0);
        let c: f64 = 0.8 * 1.5;
        assert!((pmf_linear(&p, 3, 1.5, 10).unwrap() - c * c / (1.0 + c).powi(4)).abs() < 1e-15);
    }

    #[test]
    fn critical_integral_route_near_one() {
        // α close to 1 should approach the geometric law
        let p = lp(0.8, 0.8, 0.999);
        let q = lp(0.8, 0.8, 1.0);
        for n in 0..4 {
            let a = pmf_linear(&p, n, 1.0, 10).unwrap();
            let b = pmf_linear(&q, n, 1.0, 10).unwrap();
            assert!((a - b).abs() < 5e-3, "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn critical_mixture_matches_derivative_integrals() {
        use crate::special_fn::ml::ml_one_deriv;
        use crate::special_fn::quadrature::laguerre_adaptive;
        let (alpha, lam, t): (f64, f64, f64) = (0.6, 0.8, 1.5);
        let p = lp(lam, lam, alpha);
        let c = lam * t.powf(alpha);
        let mut total = 0.0;
        for n in 0..4usize {
            let direct = if n == 0 {
                1.0 - laguerre_adaptive(|x| ml_one(alpha, -c * x).unwrap(), 1e-10)
                    .unwrap()
                    .value
            } else {
                let nf: f64 = (1..=n).map(|i| i as f64).product();
                laguerre_adaptive(
                    |x| {
                        let z = c * x;
                        (n as f64 * z.powi(n as i32 - 1) * ml_one_deriv(alpha, n - 1, -z).unwrap()
                            - z.powi(n as i32) * ml_one_deriv(alpha, n, -z).unwrap())
                            / nf
                    },
                    1e-10,
                )
                .unwrap()
                .value
            };
            let v = pmf_linear(&p, n, t, 10).unwrap();
            total += v;
            assert!((v - direct).abs() < 1e-9, "n={n}: {v} vs {direct}");
        }
        let tail: f64 = (4..4000).map(|n| pmf_linear(&p, n, t, 10).unwrap()).sum();
        assert!((total + tail - 1.0).abs() < 1e-6);
    }

    #[test]
    fn moments_classical_reduction() {
        let p = lp(0.5, 1.0, 1.0);
        for t in [0.3, 1.0, 4.0] {
            let d: f64 = -0.5;
            let e = (d * t).exp();
            assert!((mean_linear(&p, t).unwrap() - e).abs() < 1e-14);
            let v = (1.5 / d) * e * (e - 1.0);
            assert!((var_linear(&p, t).unwrap() - v).abs() < 1e-12);
            assert!((var_linear_alternate(&p, t).unwrap() - v).abs() < 1e-12);
        }
    }

    #[test]
    fn variance_continuous_at_equal_rates() {
        let a = 0.7;
        let t: f64 = 1.3;
        let v0 = var_linear(&lp(0.6, 0.6, a), t).unwrap();
        let lim = 2.0 * 0.6 * t.powf(a) / gamma(1.0 + a);
        assert!((v0 - lim).abs() < 1e-14);
        let v1 = var_linear(&lp(0.6 + 1e-7, 0.6, a), t).unwrap();
        assert!((v1 - v0).abs() < 1e-5);
        assert_eq!(mean_linear(&lp(0.6, 0.6, a), t).unwrap(), 1.0);
    }

    #[test]
    fn supercritical_limit() {
        let p = lp(1.0, 0.4, 0.8);
        let v = extinction_cdf(&p, 1e4).unwrap();
        assert!((v - 0.4).abs() < 1e-2);
    }

    #[test]
    fn asymptote_formulas() {
        let s = SubordinatorModel::stable(0.6).unwrap();
        let t: f64 = 100.0;
        let v = extinction_tail_asymptote(&s, 0.5, 1.0, t).unwrap();
        let expect = 2f64.ln() * t.powf(-0.6) / (0.5 * gamma(0.4));
        assert!((v - expect).abs() < 1e-15);
        assert!(
            (tail_asymptote_from(0.3, 0.0, 0.5, 1.0).unwrap() - 2f64.ln() * 0.3 / 0.5).abs()
                < 1e-15
        );
        let g = SubordinatorModel::gamma(1.0, 1.0).unwrap();
        assert!(extinction_tail_asymptote(&g, 0.5, 1.0, t).is_err());
        assert!(extinction_cdf_zero_asymptote(&g, 0.5, 1.0, 1e-3).is_err());
        assert!(extinction_tail_asymptote(&s, 1.0, 0.5, t).is_err());
        let z = extinction_cdf_zero_asymptote(&s, 0.5, 1.0, 1e-8).unwrap();
        let lead = 1.0 * 1e-8f64.powf(0.6) / gamma(1.6);
        assert!((z / lead - 1.0).abs() < 1e-4);
    }

    #[test]
    fn closed_form_psi_small_cases() {
        // ψ_{1,1} = λ+μ, ψ_{0,1} = μ, ψ_{2,1} = λ
        for (l, m) in [(2.0, 1.0), (1.0, 2.0), (1.0, 1.0)] {
            assert!((linear_psi_closed_form(l, m, 0, 1).unwrap() - m).abs() < 1e-12);
            assert!((linear_psi_closed_form(l, m, 1, 1).unwrap() - (l + m)).abs() < 1e-12);
            assert!((linear_psi_closed_form(l, m, 2, 1).unwrap() - l).abs() < 1e-12);
        }
        assert_eq!(forward_difference(2, 1, 2), 2);
    }
}
