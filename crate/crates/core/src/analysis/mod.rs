//! Empirical distributions, comparisons with the theory and tail fits.

pub mod distribution;
pub mod fit;
pub mod forest;

pub use distribution::{
    ccdf, ks_distance, Completeness, DiscreteDistribution, EmpiricalDistribution, EmpiricalError, ExactEmpirical,
    HistogramKind, PointMasses,
};
pub use fit::{
    default_window, fit_tail, mean_ccdf, FitError, FittedLaw, TailFit, TailLaw, DEFAULT_K_MIN, MIN_FIT_POINTS, MIN_TAIL_COUNT,
};
pub use forest::forest_components;
