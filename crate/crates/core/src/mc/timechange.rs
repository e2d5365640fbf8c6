use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, FbdpError, Result};
use crate::linear::SubordinatorModel;
use crate::rates::RateModel;

use super::gillespie::{run_counts, EVENT_CAP};
use super::stable::{sample_inverse_stable, sample_subordinator};
use super::uniformization::uniformization_pmf;
use super::{replicates, MCEstimate, RngSpec};

const MIN_PMF_SAMPLES: usize = 1000;
const LEAK_LIMIT: f64 = 1e-6;
const LEAK_TARGET: f64 = 1e-9;

/// How each replicate turns a time-change draw τ into an estimate of
/// Pr{N(τ) = n}: an indicator from one simulated path, or the exact
/// classical law at τ by uniformization on 0..=cap. The cap doubles up to
/// n_max until less than 1e-9 of the mass leaves it; above 1e-6 at n_max
/// the replicate fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PmfMode {
    Path,
    Uniformization { n_max: usize },
}

/// Pr{N_α(t) = n} for n = 0..=n_hi from one set of replicates.
pub fn fbdp_pmf_mc_range(
    model: &RateModel,
    alpha: f64,
    n_hi: usize,
    t: f64,
    n_samples: usize,
    spec: RngSpec,
    mode: PmfMode,
) -> Result<Vec<MCEstimate>> {
    check_alpha(alpha)?;
    if n_samples < MIN_PMF_SAMPLES {
        return Err(FbdpError::InvalidParameter(format!(
            "need at least {MIN_PMF_SAMPLES} samples, got {n_samples}"
        )));
    }
    let rows: Vec<Vec<f64>> = replicates(spec, n_samples, |rng| {
        let tau = sample_inverse_stable(alpha, t, rng)?;
        match mode {
            PmfMode::Path => {
                let c = run_counts(model, tau, EVENT_CAP, rng)?;
                Ok((0..=n_hi)
                    .map(|n| if c.state == n { 1.0 } else { 0.0 })
                    .collect())
            }
            PmfMode::Uniformization { n_max } => {
                // the cost grows like n_max² τ, so start small and double
                let mut cap = n_max.min((2 * n_hi + 2).max(16));
                let u = loop {
                    let u = uniformization_pmf(model, cap, tau)?;
                    if u.leak <= LEAK_TARGET || cap == n_max {
                        break u;
                    }
                    cap = (2 * cap).min(n_max);
                };
                if u.leak > LEAK_LIMIT {
                    return Err(FbdpError::Truncation {
                        terms: n_max,
                        tail: u.leak,
                    });
                }
                Ok((0..=n_hi).map(|n| u.get(n)).collect())
            }
        }
    })?;
    (0..=n_hi)
        .map(|n| {
            let col: Vec<f64> = rows.iter().map(|r| r[n]).collect();
            MCEstimate::from_samples(&col)
        })
        .collect()
}

pub fn fbdp_pmf_mc(
    model: &RateModel,
    alpha: f64,
    n: usize,
    t: f64,
    n_samples: usize,
    spec: RngSpec,
    mode: PmfMode,
) -> Result<MCEstimate> {
    let all = fbdp_pmf_mc_range(model, alpha, n, t, n_samples, spec, mode)?;
    Ok(all[n])
}

/// E N_α(t) from simulated paths at inverse-stable times.
pub fn fbdp_mean_mc(
    model: &RateModel,
    alpha: f64,
    t: f64,
    n_samples: usize,
    spec: RngSpec,
) -> Result<MCEstimate> {
    check_alpha(alpha)?;
    let xs = replicates(spec, n_samples, |rng| {
        let tau = sample_inverse_stable(alpha, t, rng)?;
        Ok(run_counts(model, tau, EVENT_CAP, rng)?.state as f64)
    })?;
    MCEstimate::from_samples(&xs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExtinctionSample {
    Finite(f64),
    /// the classical path had not died out by the cutoff or hit the event cap
    Censored,
}

/// T^φ = S^φ(T) with T the classical extinction time of the linear process.
pub fn sample_extinction_time_timechanged<R: Rng + ?Sized>(
    sub: &SubordinatorModel,
    lambda: f64,
    mu: f64,
    cutoff: f64,
    rng: &mut R,
) -> Result<ExtinctionSample> {
    let model = RateModel::linear(lambda, mu)?;
    match run_counts(&model, cutoff, EVENT_CAP, rng) {
        Ok(c) => match c.extinct_at {
            Some(t) => Ok(ExtinctionSample::Finite(sample_subordinator(sub, t, rng)?)),
            None => Ok(ExtinctionSample::Censored),
        },
        Err(FbdpError::EventCap(_)) => Ok(ExtinctionSample::Censored),
        Err(e) => Err(e),
    }
}

pub fn extinction_time_samples(
    sub: &SubordinatorModel,
    lambda: f64,
    mu: f64,
    cutoff: f64,
    n_samples: usize,
    spec: RngSpec,
) -> Result<Vec<ExtinctionSample>> {
    replicates(spec, n_samples, |rng| {
        sample_extinction_time_timechanged(sub, lambda, mu, cutoff, rng)
    })
}

/// Population, cumulative births (counting the initial individual) and
/// deaths at one inverse-stable time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointSample {
    pub n: u64,
    pub b: u64,
    pub d: u64,
}

pub fn joint_nb_samples(
    lambda: f64,
    mu: f64,
    alpha: f64,
    t: f64,
    n_samples: usize,
    spec: RngSpec,
) -> Result<Vec<JointSample>> {
    check_alpha(alpha)?;
    let model = RateModel::linear(lambda, mu)?;
    replicates(spec, n_samples, |rng| {
        let tau = sample_inverse_stable(alpha, t, rng)?;
        let c = run_counts(&model, tau, EVENT_CAP, rng)?;
        Ok(JointSample {
            n: c.state as u64,
            b: c.births + 1,
            d: c.deaths,
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointNb {
    pub mean_n: MCEstimate,
    pub mean_b: MCEstimate,
    pub mean_d: MCEstimate,
    pub var_n: MCEstimate,
    pub var_b: MCEstimate,
    pub cov_nb: MCEstimate,
}

/// Sample moments of (N, B, D); second moments are means of centred
/// products, rescaled to the unbiased estimator.
pub fn simulate_joint_nb(
    lambda: f64,
    mu: f64,
    alpha: f64,
    t: f64,
    n_samples: usize,
    spec: RngSpec,
) -> Result<JointNb> {
    let s = joint_nb_samples(lambda, mu, alpha, t, n_samples, spec)?;
    let col = |f: fn(&JointSample) -> f64| s.iter().map(f).collect::<Vec<f64>>();
    let (n, b, d) = (
        col(|x| x.n as f64),
        col(|x| x.b as f64),
        col(|x| x.d as f64),
    );
    let mean_n = MCEstimate::from_samples(&n)?;
    let mean_b = MCEstimate::from_samples(&b)?;
    let mean_d = MCEstimate::from_samples(&d)?;
    let k = n_samples as f64 / (n_samples as f64 - 1.0);
    let centred = |x: &[f64], mx: f64, y: &[f64], my: f64| -> Result<MCEstimate> {
        let prods: Vec<f64> = x
            .iter()
            .zip(y)
            .map(|(a, b)| k * (a - mx) * (b - my))
            .collect();
        MCEstimate::from_samples(&prods)
    };
    Ok(JointNb {
        var_n: centred(&n, mean_n.mean, &n, mean_n.mean)?,
        var_b: centred(&b, mean_b.mean, &b, mean_b.mean)?,
        cov_nb: centred(&n, mean_n.mean, &b, mean_b.mean)?,
        mean_n,
        mean_b,
        mean_d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bookkeeping_per_sample() {
        let s = joint_nb_samples(0.7, 0.4, 0.6, 2.0, 500, RngSpec::new(1, 0)).unwrap();
        for x in s {
            assert_eq!(x.b - x.d, x.n);
        }
    }

    #[test]
    fn too_few_samples() {
        let m = RateModel::linear(1.0, 1.0).unwrap();
        assert!(fbdp_pmf_mc(&m, 0.5, 0, 1.0, 10, RngSpec::new(1, 0), PmfMode::Path).is_err());
    }

    #[test]
    fn censoring_for_supercritical() {
        let sub = SubordinatorModel::stable(0.5).unwrap();
        let s = extinction_time_samples(&sub, 2.0, 0.5, 50.0, 400, RngSpec::new(2, 0)).unwrap();
        let censored = s
            .iter()
            .filter(|x| matches!(x, ExtinctionSample::Censored))
            .count();
        // survival probability 1 - μ/λ = 3/4
        assert!(censored > 200 && censored < 400);
    }
}
