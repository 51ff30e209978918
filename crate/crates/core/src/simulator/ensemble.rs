//! Independent replicates run in parallel.

use rayon::prelude::*;

use crate::scalar::Scalar;
use crate::simulator::rng::mix;
use crate::simulator::run::{run, run_retrying, SimulationConfig, SimulationSummary};

/// Replicate `r` runs with seed `mix(master_seed, r)`; output is ordered by `r`.
///
/// # Panics
/// When `replicates` is zero.
pub fn run_ensemble<T: Scalar>(
    config: &SimulationConfig<T>,
    replicates: u64,
    master_seed: u64,
) -> Vec<SimulationSummary> {
    run_ensemble_retrying(config, replicates, master_seed, 0)
}

/// As [`run_ensemble`], retrying extinct replicates on successive seeds.
pub fn run_ensemble_retrying<T: Scalar>(
    config: &SimulationConfig<T>,
    replicates: u64,
    master_seed: u64,
    max_retries: u64,
) -> Vec<SimulationSummary> {
    assert!(replicates >= 1, "an ensemble needs at least one replicate");
    (0..replicates)
        .into_par_iter()
        .map(|r| {
            let seed = mix(master_seed, r);
            if max_retries == 0 {
                run(config, seed)
            } else {
                run_retrying(config, seed, max_retries)
            }
        })
        .collect()
}
