use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use crate::error::{FbdpError, Result};
use crate::linear::SubordinatorModel;
use crate::special_fn::quadrature::{gk_adaptive, GkOptions};

use super::open_unit;

fn check_stable_index(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(FbdpError::InvalidParameter(format!(
            "stable index must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

/// ln A(θ), A(θ) = (sin αθ / sin θ)^{1/(1-α)} sin((1-α)θ) / sin αθ.
fn ln_kanter(alpha: f64, theta: f64) -> f64 {
    let b = 1.0 - alpha;
    if theta == 0.0 {
        return (alpha.ln()) * alpha / b + b.ln();
    }
    let sa = (alpha * theta).sin().ln();
    (sa - theta.sin().ln()) / b + (b * theta).sin().ln() - sa
}

/// S with E e^{-ηS} = e^{-η^α}, by Kanter's representation
/// S = (A(θ)/W)^{(1-α)/α}, θ ~ U(0,π), W ~ Exp(1).
pub fn sample_positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<f64> {
    check_stable_index(alpha)?;
    let theta = PI * open_unit(rng);
    let w: f64 = Exp1.sample(rng);
    Ok((((1.0 - alpha) / alpha) * (ln_kanter(alpha, theta) - w.ln())).exp())
}

/// Pr{S ≤ x} = (1/π) ∫₀^π exp(-x^{-α/(1-α)} A(θ)) dθ.
pub fn positive_stable_cdf(alpha: f64, x: f64) -> Result<f64> {
    check_stable_index(alpha)?;
    if !(x > 0.0) {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let lx = -alpha / (1.0 - alpha) * x.ln();
    let r = gk_adaptive(
        |th| {
            let th = th.min(PI * (1.0 - 1e-16));
            (-(lx + ln_kanter(alpha, th)).exp()).exp()
        },
        &[0.0, 0.5, 1.5, 2.5, 3.0, PI],
        GkOptions {
            abs_tol: 1e-15,
            rel_tol: 1e-12,
            max_segments: 400,
        },
    );
    Ok((r.value / PI).clamp(0.0, 1.0))
}

/// E(t) = (t/S)^α, the inverse stable subordinator at a fixed time.
pub fn sample_inverse_stable<R: Rng + ?Sized>(alpha: f64, t: f64, rng: &mut R) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(FbdpError::InvalidParameter(format!(
            "t must be finite and nonnegative, got {t}"
        )));
    }
    if alpha == 1.0 {
        return Ok(t);
    }
    if t == 0.0 {
        check_stable_index(alpha)?;
        return Ok(0.0);
    }
    let s = sample_positive_stable(alpha, rng)?;
    Ok((t / s).powf(alpha))
}

/// S^φ(x): x^{1/α} S(1) for the stable case, Gamma(ax, rate b) for the
/// gamma case.
pub fn sample_subordinator<R: Rng + ?Sized>(
    sub: &SubordinatorModel,
    x: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(FbdpError::InvalidParameter(format!(
            "time must be nonnegative, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    match *sub {
        SubordinatorModel::Stable { alpha } => {
            Ok(x.powf(1.0 / alpha) * sample_positive_stable(alpha, rng)?)
        }
        SubordinatorModel::Gamma { a, b } => {
            let g = Gamma::new(a * x, 1.0 / b)
                .map_err(|e| FbdpError::InvalidParameter(e.to_string()))?;
            Ok(g.sample(rng))
        }
    }
}

/// Pr{S^φ(h) > t}, the chance that the first grid step already passes t.
fn first_step_overshoot(sub: &SubordinatorModel, h: f64, t: f64) -> Result<f64> {
    match *sub {
        SubordinatorModel::Stable { alpha } => {
            Ok(1.0 - positive_stable_cdf(alpha, t * h.powf(-1.0 / alpha))?)
        }
        SubordinatorModel::Gamma { a, b } => Ok(statrs::function::gamma::gamma_ur(a * h, b * t)),
    }
}

const MAX_REFINE: u32 = 10;
const OVERSHOOT_LIMIT: f64 = 1e-3;

/// E^φ(t) from a subordinator path on a grid of step h: the midpoint of the
/// first cell where the path passes t, so the bias is at most h/2. The step
/// is halved (up to 2^10 times) until the first cell is passed with
/// probability below 1e-3.
pub fn sample_inverse_subordinator_path<R: Rng + ?Sized>(
    sub: &SubordinatorModel,
    t: f64,
    grid_step: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(FbdpError::InvalidParameter(format!(
            "grid step must be positive, got {grid_step}"
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(FbdpError::InvalidParameter(format!(
            "t must be finite and nonnegative, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let h = refined_step(sub, t, grid_step)?;
    let mut s = 0.0;
    let mut k = 0u64;
    while s <= t {
        s += sample_subordinator(sub, h, rng)?;
        k += 1;
        if k > 1_000_000_000 {
            return Err(FbdpError::EventCap(1_000_000_000));
        }
    }
    Ok((k as f64 - 0.5) * h)
}

fn refined_step(sub: &SubordinatorModel, t: f64, grid_step: f64) -> Result<f64> {
    let mut h = grid_step;
    for _ in 0..=MAX_REFINE {
        if first_step_overshoot(sub, h, t)? < OVERSHOOT_LIMIT {
            return Ok(h);
        }
        h *= 0.5;
    }
    Err(FbdpError::InvalidParameter(format!(
        "grid step {grid_step} too coarse for t = {t} even after {MAX_REFINE} halvings"
    )))
}
