//! Numerical theory: the Laplace transform of the reproduction density, the
//! Malthusian parameter, and the limiting fitness distribution.

pub mod distribution;
pub mod malthusian;
pub mod oracles;
pub mod series;
pub mod special;
pub mod tail;

pub use distribution::{fitness_distribution, DistributionError, TheoreticalFitnessDist};
pub use malthusian::{
    eval_rho_hat, find_malthusian, find_malthusian_with, mean_offspring, Criticality, Extended,
    MalthusianResult, DEFAULT_MAX_TERMS,
};
pub use oracles::{birth_fraction_limit, rho_hat_affine_closed_form, OracleError};
pub use series::{SeriesOptions, SeriesValue};
pub use tail::{classify_tail, TailClass};
