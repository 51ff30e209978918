//! Certified summation of positive series built by a multiplicative term recurrence.
//!
//! Every series in the theory module has the shape `u_{n+1} = u_n * r(n+1)` with
//! `0 < r <= 1`. Two tail models are used to certify convergence:
//!
//! * geometric: once the largest of the last 8 ratios is below 0.999 the remainder
//!   is bounded by `u_K r / (1 - r)`;
//! * hypergeometric: when ratios creep towards 1 like `(k + a)/(k + c)`, the
//!   quantity `1/(1 - r_k)` is linear in `k`. Fitting it over the last 32 ratios
//!   gives `s = c - a` and the remainder is exactly `u_K (K + 1 + a)/(s - 1)`.
//!   The estimate is added to the partial sum and the reported error is the
//!   change of the corrected value between two checkpoints.
//!
//! A fitted `s` at most 1 on three successive checkpoints certifies divergence.
//! Three checkpoints without a smaller error end the evaluation as inconclusive.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::scalar::{CompensatedSum, Scalar};

const GEOMETRIC_WINDOW: usize = 8;
const FIT_WINDOW: usize = 32;
const FIRST_CHECKPOINT: u64 = 64;
const STRIKES: u32 = 3;

/// Result of evaluating an infinite positive series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesValue<T> {
    /// `value` is within `tail_bound` of the infinite sum.
    Converged {
        value: T,
        tail_bound: T,
        terms_used: u64,
    },
    Diverges,
    Inconclusive { partial_sum: T, terms_used: u64 },
}

impl<T: Scalar> SeriesValue<T> {
    pub fn value(&self) -> Option<T> {
        match self {
            SeriesValue::Converged { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, SeriesValue::Converged { .. })
    }

    /// Whether the sum is certainly larger than `level`.
    ///
    /// Partial sums of a positive series are lower bounds, so an inconclusive
    /// evaluation can still settle the comparison.
    pub fn certainly_exceeds(&self, level: T) -> Option<bool> {
        match *self {
            SeriesValue::Converged {
                value, tail_bound, ..
            } => {
                if value - tail_bound > level {
                    Some(true)
                } else if value + tail_bound < level {
                    Some(false)
                } else {
                    Some(value > level)
                }
            }
            SeriesValue::Diverges => Some(true),
            SeriesValue::Inconclusive { partial_sum, .. } => (partial_sum > level).then_some(true),
        }
    }
}

/// Tuning knobs of the series evaluator.
#[derive(Debug, Clone, Copy)]
pub struct SeriesOptions<T> {
    /// Absolute accuracy demanded before `Converged` is returned.
    pub tol: T,
    pub max_terms: u64,
    /// Largest ratio for which the geometric tail bound is trusted.
    pub geometric_max_ratio: T,
    /// Smallest fitted decay exponent for which the hypergeometric tail is trusted.
    pub min_poly_exponent: T,
    /// Partial sums above this value certify divergence.
    pub divergence_cap: T,
}

impl<T: Scalar> SeriesOptions<T> {
    pub fn new(tol: T, max_terms: u64) -> Self {
        Self {
            tol,
            max_terms,
            geometric_max_ratio: T::lit(0.999),
            min_poly_exponent: T::lit(1.05),
            divergence_cap: T::lit(1e12),
        }
    }
}

/// Magnitude of the current term; switches to log space below the underflow guard.
#[derive(Debug, Clone, Copy)]
enum Term<T> {
    Linear(T),
    Log(T),
}

impl<T: Scalar> Term<T> {
    fn from_linear(x: T) -> Self {
        if x < T::underflow_guard() && x > T::zero() {
            Term::Log(x.ln())
        } else {
            Term::Linear(x)
        }
    }

    fn value(self) -> T {
        match self {
            Term::Linear(x) => x,
            Term::Log(l) => l.exp(),
        }
    }

    fn times(self, r: T) -> Self {
        match self {
            Term::Linear(x) => Term::from_linear(x * r),
            Term::Log(l) => Term::Log(l + r.ln()),
        }
    }
}

/// Parameters of the fitted `(k + a)/(k + c)` ratio model.
#[derive(Debug, Clone, Copy)]
struct RatioFit<T> {
    /// `c - a`, the polynomial decay exponent of the terms.
    s: T,
    a: T,
}

fn fit_ratio_model<T: Scalar>(ratios: &VecDeque<(u64, T)>) -> Option<RatioFit<T>> {
    // `None` here means the ratios are not approaching 1 polynomially.
    let n = T::from_count(ratios.len() as u64);
    let origin = ratios.front()?.0;
    let mut sx = T::zero();
    let mut sy = T::zero();
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for &(k, r) in ratios {
        if r >= T::one() {
            return Some(RatioFit {
                s: T::zero(),
                a: T::zero(),
            });
        }
        let x = T::from_count(k - origin);
        let y = T::one() / (T::one() - r);
        sx = sx + x;
        sy = sy + y;
        sxx = sxx + x * x;
        sxy = sxy + x * y;
    }
    let denom = n * sxx - sx * sx;
    if denom <= T::zero() {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    if slope <= T::zero() {
        return None;
    }
    let intercept = (sy - slope * sx) / n;
    let s = T::one() / slope;
    // y = (k + c)/s with k measured from `origin`.
    let c = intercept * s - T::from_count(origin);
    Some(RatioFit { s, a: c - s })
}

/// Sums `sum_{n >= start} u_n` with `u_start = first` and `u_{n+1} = u_n * ratio(n + 1)`.
pub fn sum_ratio_series<T, F>(start: u64, first: T, ratio: F, opts: &SeriesOptions<T>) -> SeriesValue<T>
where
    T: Scalar,
    F: Fn(u64) -> T,
{
    sum_from_term(start, Term::from_linear(first), ratio, opts)
}

/// As [`sum_ratio_series`] with the first term given by its natural logarithm.
pub fn sum_ratio_series_log<T, F>(
    start: u64,
    ln_first: T,
    ratio: F,
    opts: &SeriesOptions<T>,
) -> SeriesValue<T>
where
    T: Scalar,
    F: Fn(u64) -> T,
{
    let first = if ln_first > T::underflow_guard().ln() {
        Term::Linear(ln_first.exp())
    } else {
        Term::Log(ln_first)
    };
    sum_from_term(start, first, ratio, opts)
}

fn sum_from_term<T, F>(start: u64, first: Term<T>, ratio: F, opts: &SeriesOptions<T>) -> SeriesValue<T>
where
    T: Scalar,
    F: Fn(u64) -> T,
{
    let mut term = first;
    let mut sum = CompensatedSum::new();
    sum.add(term.value());
    if term.value().is_zero() && matches!(term, Term::Linear(_)) {
        return SeriesValue::Converged {
            value: T::zero(),
            tail_bound: T::zero(),
            terms_used: 1,
        };
    }

    let eps = T::epsilon();
    let mut ratios: VecDeque<(u64, T)> = VecDeque::with_capacity(FIT_WINDOW + 1);
    let mut terms_used: u64 = 1;
    let mut next_checkpoint = FIRST_CHECKPOINT;
    let mut previous_estimate: Option<T> = None;
    let mut divergence_strikes = 0u32;
    let mut slow_strikes = 0u32;
    let mut best_err: Option<T> = None;
    let mut stall_strikes = 0u32;

    let mut n = start;
    while terms_used < opts.max_terms {
        n += 1;
        let r = ratio(n);
        term = term.times(r);
        let t = term.value();
        sum.add(t);
        terms_used += 1;

        if ratios.len() == FIT_WINDOW {
            ratios.pop_front();
        }
        ratios.push_back((n, r));

        let partial = sum.value();
        if !partial.is_finite() || partial > opts.divergence_cap {
            return SeriesValue::Diverges;
        }

        if ratios.len() >= GEOMETRIC_WINDOW {
            let recent = ratios.iter().rev().take(GEOMETRIC_WINDOW);
            let mut r_max = T::zero();
            let mut increasing = false;
            let mut later = None;
            for &(_, q) in recent {
                r_max = r_max.max(q);
                if let Some(l) = later {
                    if l > q {
                        increasing = true;
                    }
                }
                later = Some(q);
            }
            let rising_unfitted = increasing && ratios.len() < FIT_WINDOW;
            if r_max < opts.geometric_max_ratio && !rising_unfitted {
                let mut bound = t * r_max / (T::one() - r_max);
                if increasing {
                    // Rising ratios: the geometric bound alone may undershoot.
                    if let Some(fit) = fit_ratio_model(&ratios) {
                        if fit.s > T::one() {
                            let poly = t * (T::from_count(n) + T::one() + fit.a) / (fit.s - T::one());
                            if poly.is_finite() {
                                bound = bound.max(poly);
                            }
                        }
                    }
                }
                if bound <= opts.tol {
                    let rounding = eps * T::lit(4.0) * partial;
                    return SeriesValue::Converged {
                        value: partial,
                        tail_bound: bound + rounding,
                        terms_used,
                    };
                }
            }
        }

        if terms_used >= next_checkpoint && ratios.len() == FIT_WINDOW {
            next_checkpoint = next_checkpoint.saturating_mul(2);
            match fit_ratio_model(&ratios) {
                Some(fit) if fit.s <= T::one() + T::lit(1e-6) => {
                    divergence_strikes += 1;
                    slow_strikes = 0;
                    previous_estimate = None;
                    if divergence_strikes >= STRIKES {
                        return SeriesValue::Diverges;
                    }
                }
                Some(fit) if fit.s <= opts.min_poly_exponent => {
                    divergence_strikes = 0;
                    slow_strikes += 1;
                    previous_estimate = None;
                    if slow_strikes >= STRIKES {
                        return SeriesValue::Inconclusive {
                            partial_sum: partial,
                            terms_used,
                        };
                    }
                }
                Some(fit) => {
                    divergence_strikes = 0;
                    slow_strikes = 0;
                    let tail = t * (T::from_count(n) + T::one() + fit.a) / (fit.s - T::one());
                    if tail.is_finite() && tail >= T::zero() {
                        let estimate = partial + tail;
                        if let Some(prev) = previous_estimate {
                            let err = (estimate - prev).abs()
                                + eps * T::from_count(FIT_WINDOW as u64) * estimate;
                            if err <= opts.tol {
                                return SeriesValue::Converged {
                                    value: estimate,
                                    tail_bound: err,
                                    terms_used,
                                };
                            }
                            // Rounding in the fitted ratios grows with k, so a
                            // stalled error will not reach `tol` later either.
                            if best_err.is_some_and(|b| err >= b) {
                                stall_strikes += 1;
                                if stall_strikes >= STRIKES {
                                    return SeriesValue::Inconclusive {
                                        partial_sum: partial,
                                        terms_used,
                                    };
                                }
                            } else {
                                best_err = Some(err);
                                stall_strikes = 0;
                            }
                        }
                        previous_estimate = Some(estimate);
                    } else {
                        previous_estimate = None;
                    }
                }
                None => {
                    divergence_strikes = 0;
                    slow_strikes = 0;
                    previous_estimate = None;
                }
            }
        }
    }

    SeriesValue::Inconclusive {
        partial_sum: sum.value(),
        terms_used,
    }
}
