//! Exact simulation of the vertex birth/death process.
//!
//! Only the embedded jump chain is simulated unless model time is requested:
//! every reported statistic depends on the event sequence alone.

pub mod ensemble;
pub mod population;
pub mod rho_tilde;
pub mod rng;
pub mod run;
pub mod weighted_index;

pub use ensemble::{run_ensemble, run_ensemble_retrying};
pub use population::{new_population, EventKind, Mode, Parent, PopulationState, VertexRecord};
pub use rho_tilde::{estimate_rho_tilde, RhoTildeError, RhoTildeEstimate};
pub use rng::{mix, rng_from_seed, SimRng};
pub use run::{run, run_population, run_retrying, ConfigEcho, SimulationConfig, SimulationSummary, Termination};
pub use weighted_index::WeightedIndex;
