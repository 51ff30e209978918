//! Single runs to a target population size.

use std::collections::BTreeMap;

use bitvec::vec::BitVec;
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::rates::RateFunction;
use crate::scalar::Scalar;
use crate::simulator::population::{new_population, EventKind, Mode, PopulationState};
use crate::simulator::rng::rng_from_seed;

/// Number of points kept in the birth-fraction trajectory.
pub const BIRTH_FRACTION_POINTS: u64 = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig<T> {
    pub b: RateFunction<T>,
    pub d: RateFunction<T>,
    pub mode: Mode,
    pub target_alive: u64,
    pub max_events: u64,
    pub track_time: bool,
}

impl<T: Scalar> SimulationConfig<T> {
    pub fn new(b: RateFunction<T>, d: RateFunction<T>, mode: Mode, target_alive: u64) -> Self {
        Self {
            b,
            d,
            mode,
            target_alive,
            max_events: u64::MAX,
            track_time: false,
        }
    }

    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            b: self.b.to_string(),
            d: self.d.to_string(),
            mode: self.mode,
            target_alive: self.target_alive,
            max_events: self.max_events,
            track_time: self.track_time,
        }
    }
}

/// Serializable copy of the configuration a summary came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub b: String,
    pub d: String,
    pub mode: Mode,
    pub target_alive: u64,
    pub max_events: u64,
    pub track_time: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TargetReached,
    Extinct,
    MaxEvents,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub config: ConfigEcho,
    pub seed: u64,
    pub termination: Termination,
    pub fitness_histogram: BTreeMap<u64, u64>,
    pub indegree_histogram: BTreeMap<u64, u64>,
    pub births_total: u64,
    pub deaths_total: u64,
    /// `(event number, births / events so far)`, sampled on a fixed stride.
    pub birth_fraction_series: Vec<(u64, f64)>,
    pub elapsed_model_time: Option<f64>,
    /// Extinct attempts discarded before this run, when retrying.
    #[serde(default)]
    pub retries: u64,
}

impl SimulationSummary {
    pub fn alive(&self) -> u64 {
        self.fitness_histogram.values().sum()
    }

    pub fn events(&self) -> u64 {
        self.births_total + self.deaths_total
    }

    pub fn birth_fraction(&self) -> Option<f64> {
        let n = self.events();
        (n > 0).then(|| self.births_total as f64 / n as f64)
    }
}

fn birth_fraction_series(events: &BitVec) -> Vec<(u64, f64)> {
    let total = events.len() as u64;
    if total == 0 {
        return Vec::new();
    }
    let stride = total.div_ceil(BIRTH_FRACTION_POINTS);
    let mut out = Vec::with_capacity((total / stride + 1) as usize);
    let mut births = 0u64;
    for (i, bit) in events.iter().by_vals().enumerate() {
        births += bit as u64;
        let n = i as u64 + 1;
        if n.is_multiple_of(stride) || n == total {
            out.push((n, births as f64 / n as f64));
        }
    }
    out
}

/// Steps a population until the target size, extinction or the event budget.
///
/// Returns the final state alongside its summary.
///
/// # Panics
/// When `target_alive` or `max_events` is zero.
pub fn run_population<T: Scalar>(config: &SimulationConfig<T>, seed: u64) -> (PopulationState<T>, SimulationSummary) {
    assert!(config.target_alive >= 1, "target_alive must be at least 1");
    assert!(config.max_events >= 1, "max_events must be at least 1");
    let mut rng = rng_from_seed(seed);
    let hint = config.target_alive.min(1 << 20) as usize;
    let mut state = new_population(config.b, config.d, config.mode, hint);
    let mut events = BitVec::new();
    let mut clock = 0.0f64;

    let termination = loop {
        if state.alive_count() == config.target_alive {
            break Termination::TargetReached;
        }
        if state.alive_count() == 0 {
            break Termination::Extinct;
        }
        if events.len() as u64 >= config.max_events {
            break Termination::MaxEvents;
        }
        if config.track_time {
            let e: f64 = rng.sample(Exp1);
            clock += e / state.total_rate().to_f64().unwrap_or(f64::NAN);
        }
        let ev = state.step(&mut rng);
        events.push(matches!(ev, EventKind::Birth { .. }));
    };

    let summary = SimulationSummary {
        config: config.echo(),
        seed,
        termination,
        fitness_histogram: state.fitness_histogram(),
        indegree_histogram: state.indegree_histogram(),
        births_total: state.births_total(),
        deaths_total: state.deaths_total(),
        birth_fraction_series: birth_fraction_series(&events),
        elapsed_model_time: config.track_time.then_some(clock),
        retries: 0,
    };
    (state, summary)
}

pub fn run<T: Scalar>(config: &SimulationConfig<T>, seed: u64) -> SimulationSummary {
    run_population(config, seed).1
}

/// Reruns with `seed + 1, seed + 2, ...` while the population dies out.
///
/// At most `max_retries` extra attempts are made; the last summary is returned
/// either way, with `retries` counting the discarded attempts.
pub fn run_retrying<T: Scalar>(config: &SimulationConfig<T>, seed: u64, max_retries: u64) -> SimulationSummary {
    let mut attempt = 0;
    loop {
        let mut s = run(config, seed.wrapping_add(attempt));
        if s.termination != Termination::Extinct || attempt == max_retries {
            s.retries = attempt;
            return s;
        }
        attempt += 1;
    }
}
