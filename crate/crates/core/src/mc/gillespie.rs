use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{FbdpError, Result};
use crate::rates::RateModel;

/// Maximum number of events on one path before it is given up.
pub const EVENT_CAP: usize = 1_000_000;

/// A classical path from one individual. `births` and `deaths` count jumps,
/// so births - deaths = final state - 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub jump_times: Vec<f64>,
    pub states: Vec<usize>,
    pub births: u64,
    pub deaths: u64,
    pub extinct_at: Option<f64>,
}

/// End state of a path without the jump record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub state: usize,
    pub births: u64,
    pub deaths: u64,
    pub extinct_at: Option<f64>,
}

pub fn gillespie<R: Rng + ?Sized>(model: &RateModel, horizon: f64, rng: &mut R) -> Result<Path> {
    let mut path = Path {
        jump_times: vec![0.0],
        states: vec![1],
        births: 0,
        deaths: 0,
        extinct_at: None,
    };
    let c = simulate(model, horizon, EVENT_CAP, rng, |t, n| {
        path.jump_times.push(t);
        path.states.push(n);
    })?;
    path.births = c.births;
    path.deaths = c.deaths;
    path.extinct_at = c.extinct_at;
    Ok(path)
}

/// Same dynamics as [`gillespie`], keeping only counts. `event_cap`
/// bounds the number of jumps.
pub fn run_counts<R: Rng + ?Sized>(
    model: &RateModel,
    horizon: f64,
    event_cap: usize,
    rng: &mut R,
) -> Result<Counts> {
    simulate(model, horizon, event_cap, rng, |_, _| {})
}

fn simulate<R: Rng + ?Sized, F: FnMut(f64, usize)>(
    model: &RateModel,
    horizon: f64,
    event_cap: usize,
    rng: &mut R,
    mut record: F,
) -> Result<Counts> {
    if !(horizon >= 0.0) {
        return Err(FbdpError::InvalidParameter(format!(
            "horizon must be nonnegative, got {horizon}"
        )));
    }
    let (mut n, mut t) = (1usize, 0.0);
    let (mut births, mut deaths) = (0u64, 0u64);
    let mut events = 0usize;
    loop {
        let l = model.lambda_at(n)?;
        let m = model.mu_at(n)?;
        let total = l + m;
        if total == 0.0 {
            break;
        }
        let e: f64 = Exp1.sample(rng);
        t += e / total;
        if t > horizon {
            break;
        }
        if events == event_cap {
            return Err(FbdpError::EventCap(event_cap));
        }
        events += 1;
        if rng.random::<f64>() * total < l {
            n += 1;
            births += 1;
        } else {
            n -= 1;
            deaths += 1;
        }
        record(t, n);
        if n == 0 {
            return Ok(Counts {
                state: 0,
                births,
                deaths,
                extinct_at: Some(t),
            });
        }
    }
    Ok(Counts {
        state: n,
        births,
        deaths,
        extinct_at: None,
    })
}
