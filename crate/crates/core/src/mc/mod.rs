//! Monte Carlo and uniformization oracles built on the inverse-stable time
//! change N_α(t) = N₁(E(t)).

mod gillespie;
mod stable;
mod timechange;
mod uniformization;

pub use gillespie::{gillespie, run_counts, Counts, Path, EVENT_CAP};
pub use stable::{
    positive_stable_cdf, sample_inverse_stable, sample_inverse_subordinator_path,
    sample_positive_stable, sample_subordinator,
};
pub use timechange::{
    extinction_time_samples, fbdp_mean_mc, fbdp_pmf_mc, fbdp_pmf_mc_range, joint_nb_samples,
    sample_extinction_time_timechanged, simulate_joint_nb, ExtinctionSample, JointNb, JointSample,
    PmfMode,
};
pub use uniformization::{uniformization_pmf, Uniformized};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FbdpError, Result};
use crate::special_fn::Compensated;

/// Seed and stream of a reproducible random source. Replicate i of a run
/// draws from its own block of the stream, so results do not depend on how
/// replicates are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngSpec { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        self.replicate(0)
    }

    pub fn replicate(&self, i: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream);
        r.set_word_pos((i as u128) << 40);
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

impl MCEstimate {
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n < 2 {
            return Err(FbdpError::InvalidParameter(format!(
                "need at least 2 samples, got {n}"
            )));
        }
        let mean = xs.iter().copied().collect::<Compensated>().value() / n as f64;
        let ss = xs
            .iter()
            .map(|x| (x - mean) * (x - mean))
            .collect::<Compensated>()
            .value();
        let var = ss / (n - 1) as f64;
        Ok(MCEstimate {
            mean,
            stderr: (var / n as f64).sqrt(),
            n_samples: n,
        })
    }

    /// |mean - target| in units of stderr; infinite when stderr is zero and
    /// the values differ.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.stderr
        }
    }
}

/// Runs `f` on replicates 0..n in parallel and returns the results in
/// replicate order.
pub fn replicates<T, F>(spec: RngSpec, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    (0..n as u64)
        .into_par_iter()
        .map(|i| f(&mut spec.replicate(i)))
        .collect()
}

/// `replicate,value` rows.
pub fn write_raw_csv<W: std::io::Write>(values: &[f64], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["replicate", "value"])
        .map_err(|e| FbdpError::Io(e.to_string()))?;
    for (i, v) in values.iter().enumerate() {
        wtr.write_record([i.to_string(), format!("{v:e}")])
            .map_err(|e| FbdpError::Io(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

fn open_unit<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}
