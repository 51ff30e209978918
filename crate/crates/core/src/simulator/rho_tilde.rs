//! Monte-Carlo estimate of the expected discounted number of births of one vertex.
//!
//! In fitness mode a vertex's rates depend only on its own birth count, so its
//! life is simulated alone. In in-degree mode the rates follow its alive
//! children, whose deaths depend on their own offspring, so the whole subtree is
//! simulated until the focal vertex dies or the horizon passes.

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rates::RateFunction;
use crate::scalar::Scalar;
use crate::simulator::population::{new_population, EventKind, Mode};
use crate::simulator::rng::{mix, rng_from_seed, SimRng};

/// Events after which a replicate is abandoned.
pub const EVENT_GUARD: u64 = 10_000_000;
/// Trailing fraction of the horizon used for the truncation estimate.
const LATE_WINDOW: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RhoTildeError {
    #[error("lambda must be positive, got {0}")]
    Lambda(f64),
    #[error("horizon must be positive, got {0}")]
    Horizon(f64),
    #[error("at least two replicates are needed for a standard error")]
    Replicates,
    #[error("all {0} replicates exceeded the event guard")]
    AllAborted(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoTildeEstimate<T> {
    pub estimate: T,
    pub std_error: T,
    /// Bound on the discounted births lost by stopping at the horizon.
    pub truncation_bias_bound: T,
    pub replicates: u64,
    pub aborted: u64,
}

struct Replicate<T> {
    discounted: T,
    late_births: u64,
}

struct Clock<T> {
    lambda: T,
    horizon: T,
    late_from: T,
}

impl<T: Scalar> Clock<T> {
    fn record(&self, t: T, out: &mut Replicate<T>) {
        out.discounted = out.discounted + (-self.lambda * t).exp();
        if t >= self.late_from {
            out.late_births += 1;
        }
    }
}

fn lone_vertex<T: Scalar>(b: &RateFunction<T>, d: &RateFunction<T>, clock: &Clock<T>, rng: &mut SimRng) -> Option<Replicate<T>> {
    let mut out = Replicate {
        discounted: T::zero(),
        late_births: 0,
    };
    let mut t = T::zero();
    let mut i = 0u64;
    for _ in 0..EVENT_GUARD {
        let (bi, di) = (b.evaluate(i), d.evaluate(i));
        let total = bi + di;
        if !(total > T::zero()) {
            return Some(out);
        }
        t = t + T::lit(rng.sample::<f64, _>(Exp1)) / total;
        if t > clock.horizon {
            return Some(out);
        }
        if T::lit(rng.random::<f64>()) * total < bi {
            clock.record(t, &mut out);
            i += 1;
        } else {
            return Some(out);
        }
    }
    None
}

fn with_subtree<T: Scalar>(b: &RateFunction<T>, d: &RateFunction<T>, clock: &Clock<T>, rng: &mut SimRng) -> Option<Replicate<T>> {
    let mut out = Replicate {
        discounted: T::zero(),
        late_births: 0,
    };
    let mut state = new_population(*b, *d, Mode::InDegree, 16);
    let mut t = T::zero();
    for _ in 0..EVENT_GUARD {
        let total = state.total_rate();
        if !(total > T::zero()) {
            return Some(out);
        }
        t = t + T::lit(rng.sample::<f64, _>(Exp1)) / total;
        if t > clock.horizon {
            return Some(out);
        }
        match state.step(rng) {
            EventKind::Birth { mother: 0, .. } => clock.record(t, &mut out),
            EventKind::Death { victim: 0 } => return Some(out),
            _ => {}
        }
    }
    None
}

/// Estimates `E[sum over births of exp(-lambda * sigma)]` for one vertex.
///
/// Replicate `r` draws from the stream seeded with `mix(seed, r)`.
pub fn estimate_rho_tilde<T: Scalar>(
    b: &RateFunction<T>,
    d: &RateFunction<T>,
    mode: Mode,
    lambda: T,
    horizon: T,
    replicates: u64,
    seed: u64,
) -> Result<RhoTildeEstimate<T>, RhoTildeError> {
    let as_f64 = |x: T| x.to_f64().unwrap_or(f64::NAN);
    if !(lambda > T::zero()) {
        return Err(RhoTildeError::Lambda(as_f64(lambda)));
    }
    if !(horizon > T::zero()) {
        return Err(RhoTildeError::Horizon(as_f64(horizon)));
    }
    if replicates < 2 {
        return Err(RhoTildeError::Replicates);
    }
    let clock = Clock {
        lambda,
        horizon,
        late_from: horizon * T::lit(1.0 - LATE_WINDOW),
    };
    // Without deaths the alive-children count equals the birth count.
    let subtree = mode == Mode::InDegree && !d.is_identically_zero();

    let results: Vec<Option<Replicate<T>>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from_seed(mix(seed, r));
            if subtree {
                with_subtree(b, d, &clock, &mut rng)
            } else {
                lone_vertex(b, d, &clock, &mut rng)
            }
        })
        .collect();

    let done: Vec<&Replicate<T>> = results.iter().flatten().collect();
    let aborted = replicates - done.len() as u64;
    if done.is_empty() {
        return Err(RhoTildeError::AllAborted(replicates));
    }
    let n = T::from_count(done.len() as u64);
    let mean = done.iter().fold(T::zero(), |acc, r| acc + r.discounted) / n;
    let var = if done.len() > 1 {
        done.iter().fold(T::zero(), |acc, r| {
            let e = r.discounted - mean;
            acc + e * e
        }) / (n - T::one())
    } else {
        T::zero()
    };
    let late = T::from_count(done.iter().map(|r| r.late_births).sum::<u64>()) / n;
    let window = T::lit(LATE_WINDOW) * horizon;
    Ok(RhoTildeEstimate {
        estimate: mean,
        std_error: (var / n).sqrt(),
        truncation_bias_bound: (-lambda * horizon).exp() * late / (lambda * window),
        replicates,
        aborted,
    })
}
