use serde::{Deserialize, Serialize};

use crate::error::{FbdpError, Result};
use crate::rates::RateModel;
use crate::special_fn::gamma::ln_factorial;
use crate::special_fn::Compensated;

const POISSON_TAIL: f64 = 1e-14;
const LEAK_WARN: f64 = 1e-6;

/// Transient law of the classical process on states 0..=n_max. Births out
/// of n_max go to an absorbing sink whose mass is reported as `leak`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Uniformized {
    pub probs: Vec<f64>,
    pub leak: f64,
    /// Poisson terms used
    pub terms: usize,
}

impl Uniformized {
    pub fn leak_exceeds_warning(&self) -> bool {
        self.leak > LEAK_WARN
    }

    pub fn get(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }
}

/// e^{Qt} δ₁ = Σ_k Pois(k; qt) Pᵏ δ₁ with P = I + Q/q and q = max Λₙ,
/// stopped once the remaining Poisson weight is below 1e-14.
pub fn uniformization_pmf(model: &RateModel, n_max: usize, t: f64) -> Result<Uniformized> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(FbdpError::InvalidParameter(format!(
            "t must be finite and nonnegative, got {t}"
        )));
    }
    if n_max < 1 {
        return Err(FbdpError::InvalidParameter(
            "n_max must be at least 1".into(),
        ));
    }
    let lam: Vec<f64> = (0..=n_max)
        .map(|n| model.lambda_at(n))
        .collect::<Result<_>>()?;
    let mu: Vec<f64> = (0..=n_max).map(|n| model.mu_at(n)).collect::<Result<_>>()?;
    let q = lam.iter().zip(&mu).map(|(l, m)| l + m).fold(0.0, f64::max);
    if !q.is_finite() {
        return Err(FbdpError::Overflow(format!(
            "uniformization rate is not finite for n_max = {n_max}"
        )));
    }
    let mut v = vec![0.0; n_max + 2];
    v[1] = 1.0;
    if t == 0.0 || q == 0.0 {
        v.truncate(n_max + 1);
        return Ok(Uniformized {
            probs: v,
            leak: 0.0,
            terms: 0,
        });
    }
    let qt = q * t;
    let mut out: Vec<Compensated> = vec![Compensated::default(); n_max + 2];
    let mut seen = 0.0;
    let mut k = 0usize;
    let mut next = vec![0.0; n_max + 2];
    loop {
        let w = (k as f64 * qt.ln() - qt - ln_factorial(k)).exp();
        for (o, x) in out.iter_mut().zip(&v) {
            o.add(w * x);
        }
        seen += w;
        if (k as f64 > qt && 1.0 - seen < POISSON_TAIL) || k > 10 * (qt as usize) + 1000 {
            break;
        }
        // next = v P; the sink at index n_max+1 is absorbing
        next.iter_mut().for_each(|x| *x = 0.0);
        next[n_max + 1] = v[n_max + 1];
        for n in 0..=n_max {
            let p = v[n];
            if p == 0.0 {
                continue;
            }
            let (up, down) = (lam[n] / q, mu[n] / q);
            next[n] += p * (1.0 - up - down);
            next[n + 1] += p * up;
            if n > 0 {
                next[n - 1] += p * down;
            }
        }
        std::mem::swap(&mut v, &mut next);
        k += 1;
    }
    let mut probs: Vec<f64> = out.iter().map(|c| c.value()).collect();
    let leak = probs.pop().unwrap();
    Ok(Uniformized {
        probs,
        leak,
        terms: k + 1,
    })
}
