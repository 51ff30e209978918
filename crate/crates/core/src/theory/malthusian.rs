//! Laplace transform of the reproduction density and the Malthusian parameter.

use serde::{Deserialize, Serialize};

use crate::rates::RateFunction;
use crate::scalar::Scalar;
use crate::theory::series::{sum_ratio_series, SeriesOptions, SeriesValue};

/// Default term budget for series evaluations.
pub const DEFAULT_MAX_TERMS: u64 = 1 << 22;

const BRACKET_START: f64 = 1e-3;
const BRACKET_CAP: f64 = 1e6;
const BRACKET_FLOOR: f64 = 1e-12;
const MAX_BISECTIONS: usize = 400;
/// Relative step below the root at which the transform must still converge.
const C2_MARGIN: f64 = 1e-3;
/// Floor on the series accuracy, in units of machine epsilon. Near `rho_hat = 1`
/// the hypergeometric tail estimate is noise-limited at a few tens of epsilon.
const SERIES_TOL_FLOOR_EPS: f64 = 256.0;

/// A value on the extended half line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extended<T> {
    Finite(T),
    Infinite,
    Undetermined,
}

impl<T: Scalar> Extended<T> {
    pub fn finite(&self) -> Option<T> {
        match self {
            Extended::Finite(x) => Some(*x),
            _ => None,
        }
    }

    pub fn exceeds_one(&self) -> Option<bool> {
        match self {
            Extended::Finite(x) => Some(*x > T::one()),
            Extended::Infinite => Some(true),
            Extended::Undetermined => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criticality {
    Supercritical,
    NotSupercritical,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MalthusianResult<T> {
    /// Root of `rho_hat(lambda) = 1`; zero when no positive root exists.
    pub lambda_star: T,
    /// `|rho_hat(lambda_star) - 1|`; infinite when no root was located.
    pub residual: T,
    pub bracket: (T, T),
    pub classification: Criticality,
    pub mean_offspring: Extended<T>,
}

/// Series factor `b(i)/(lambda + b(i) + d(i))`.
#[inline]
fn discount_factor<T: Scalar>(b: &RateFunction<T>, d: &RateFunction<T>, lambda: T, i: u64) -> T {
    let bi = b.evaluate(i);
    bi / (lambda + bi + d.evaluate(i))
}

fn product_series<T: Scalar>(
    b: &RateFunction<T>,
    d: &RateFunction<T>,
    lambda: T,
    opts: &SeriesOptions<T>,
) -> SeriesValue<T> {
    sum_ratio_series(
        0,
        discount_factor(b, d, lambda, 0),
        |i| discount_factor(b, d, lambda, i),
        opts,
    )
}

/// `rho_hat(lambda) = sum_{k>=0} prod_{i=0}^{k} b(i)/(lambda + b(i) + d(i))`.
///
/// # Panics
/// When `lambda <= 0` or `tol <= 0`.
pub fn eval_rho_hat<T: Scalar>(
    b: &RateFunction<T>,
    d: &RateFunction<T>,
    lambda: T,
    tol: T,
    max_terms: u64,
) -> SeriesValue<T> {
    assert!(lambda > T::zero(), "rho_hat needs lambda > 0");
    assert!(tol > T::zero(), "tolerance must be positive");
    product_series(b, d, lambda, &SeriesOptions::new(tol, max_terms))
}

/// Expected number of children of one vertex, `sum_{k>=1} prod_{i<k} b(i)/(b(i)+d(i))`.
pub fn mean_offspring<T: Scalar>(
    b: &RateFunction<T>,
    d: &RateFunction<T>,
    tol: T,
    max_terms: u64,
) -> Extended<T> {
    assert!(tol > T::zero(), "tolerance must be positive");
    match product_series(b, d, T::zero(), &SeriesOptions::new(tol, max_terms)) {
        SeriesValue::Converged { value, .. } => Extended::Finite(value),
        SeriesValue::Diverges => Extended::Infinite,
        SeriesValue::Inconclusive { .. } => Extended::Undetermined,
    }
}

/// Side of the root a given lambda sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Above,
    Below,
    Unknown,
}

struct Evaluator<'a, T> {
    b: &'a RateFunction<T>,
    d: &'a RateFunction<T>,
    opts: SeriesOptions<T>,
    /// Retried when `opts` asks for more accuracy than the tail model delivers.
    fallback: SeriesOptions<T>,
}

impl<T: Scalar> Evaluator<'_, T> {
    fn eval(&self, lambda: T) -> SeriesValue<T> {
        match product_series(self.b, self.d, lambda, &self.opts) {
            SeriesValue::Inconclusive { .. } if self.fallback.tol > self.opts.tol => {
                product_series(self.b, self.d, lambda, &self.fallback)
            }
            v => v,
        }
    }

    fn side(&self, lambda: T) -> Side {
        match self.eval(lambda).certainly_exceeds(T::one()) {
            Some(true) => Side::Above,
            Some(false) => Side::Below,
            None => Side::Unknown,
        }
    }
}

fn undetermined<T: Scalar>(mean: Extended<T>, bracket: (T, T)) -> MalthusianResult<T> {
    MalthusianResult {
        lambda_star: T::zero(),
        residual: T::infinity(),
        bracket,
        classification: Criticality::Undetermined,
        mean_offspring: mean,
    }
}

/// Locates the Malthusian parameter with the default term budget.
pub fn find_malthusian<T: Scalar>(
    b: &RateFunction<T>,
    d: &RateFunction<T>,
    tol: T,
) -> MalthusianResult<T> {
    find_malthusian_with(b, d, tol, DEFAULT_MAX_TERMS)
}

/// Brackets the root of `rho_hat = 1` by doubling from `1e-3` and then bisects.
///
/// Divergent and undecided evaluations count as lying above 1 since `rho_hat`
/// decreases in lambda. Bisection continues until the bracket is narrower than `tol` and the
/// residual at the midpoint is at most `tol`.
pub fn find_malthusian_with<T: Scalar>(
    b: &RateFunction<T>,
    d: &RateFunction<T>,
    tol: T,
    max_terms: u64,
) -> MalthusianResult<T> {
    assert!(tol > T::zero(), "tolerance must be positive");
    let series_tol = (tol * T::lit(1e-3)).max(T::epsilon() * T::lit(SERIES_TOL_FLOOR_EPS));
    let mean = mean_offspring(b, d, series_tol, max_terms);
    if let Some(m) = mean.finite() {
        if m <= T::one() {
            return MalthusianResult {
                lambda_star: T::zero(),
                residual: T::infinity(),
                bracket: (T::zero(), T::zero()),
                classification: Criticality::NotSupercritical,
                mean_offspring: mean,
            };
        }
    }

    let ev = Evaluator {
        b,
        d,
        opts: SeriesOptions::new(series_tol, max_terms),
        fallback: SeriesOptions::new(tol * T::lit(0.1), max_terms),
    };

    let two = T::lit(2.0);
    let mut hi = T::lit(BRACKET_START);
    let cap = T::lit(BRACKET_CAP);
    loop {
        match ev.side(hi) {
            Side::Below => break,
            _ if hi >= cap => return undetermined(mean, (T::zero(), hi)),
            _ => hi = hi * two,
        }
    }
    let floor = T::lit(BRACKET_FLOOR);
    let mut lo = hi / two;
    loop {
        match ev.side(lo) {
            Side::Above => break,
            Side::Below => hi = lo,
            Side::Unknown => {}
        }
        if lo <= floor {
            return undetermined(mean, (lo, hi));
        }
        lo = lo / two;
    }

    let mut mid = (lo + hi) / two;
    let mut residual = T::infinity();
    for _ in 0..MAX_BISECTIONS {
        mid = (lo + hi) / two;
        let value = ev.eval(mid);
        if let Some(v) = value.value() {
            residual = (v - T::one()).abs();
        }
        if hi - lo <= tol && residual <= tol {
            break;
        }
        if mid <= lo || mid >= hi {
            break;
        }
        match value.certainly_exceeds(T::one()) {
            Some(true) => lo = mid,
            Some(false) => hi = mid,
            // Too slow to decide: near the convergence edge, where rho_hat is large.
            // A wrong move leaves rho_hat < 1 on the whole bracket and fails the
            // residual check below.
            None => lo = mid,
        }
        residual = T::infinity();
    }

    if !(residual <= tol) {
        return undetermined(mean, (lo, hi));
    }
    // Operational check that lambda_star lies strictly inside the convergence region.
    if !ev.eval(mid * (T::one() - T::lit(C2_MARGIN))).is_converged() {
        return undetermined(mean, (lo, hi));
    }

    MalthusianResult {
        lambda_star: mid,
        residual,
        bracket: (lo, hi),
        classification: Criticality::Supercritical,
        mean_offspring: mean,
    }
}
