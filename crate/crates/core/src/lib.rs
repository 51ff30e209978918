//! Random networks grown by preferential attachment with vertex death.
//!
//! A vertex with fitness `i` (children ever produced, dead ones included) gives
//! birth at rate `b(i)` and dies at rate `d(i)`. The crate provides
//!
//! * [`rates`]: the rate-function families and their text grammar,
//! * [`theory`]: the Laplace transform of the reproduction density, the Malthusian
//!   parameter and the limiting fitness distribution,
//! * [`simulator`]: an exact event-driven simulator over a weighted sum tree,
//!   in fitness mode and in momentaneous in-degree mode,
//! * [`analysis`]: empirical distributions, CCDFs, KS distances, tail fits and a
//!   forest-component diagnostic.
//!
//! The numeric core is generic over [`Scalar`] (`f32`/`f64`); the aliases below fix
//! it to `f64`, which is what the simulator and the command line use.

// `!(x > 0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod rates;
pub mod scalar;
pub mod simulator;
pub mod theory;

pub use scalar::{CompensatedSum, Probability, Scalar};

/// `f64` rate function.
pub type Rate = rates::RateFunction<f64>;
/// `f32` rate function.
pub type Rate32 = rates::RateFunction<f32>;
pub type Series = theory::SeriesValue<f64>;
pub type Malthusian = theory::MalthusianResult<f64>;
pub type FitnessDist = theory::TheoreticalFitnessDist<f64>;
pub type Tail = theory::TailClass<f64>;
pub type SumTree = simulator::WeightedIndex<f64>;
pub type Fit = analysis::TailFit<f64>;
/// Exact rational probabilities for empirical pmfs.
pub type Rational = num_rational::Ratio<i64>;
