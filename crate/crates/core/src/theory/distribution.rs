//! Asymptotic fitness distribution of the alive population.
//!
//! `p_k = C / (λ* + b(k) + d(k)) · Π_{i<k} b(i)/(λ* + b(i) + d(i))`, built by the
//! recurrence `p_{k+1} = p_k b(k) / (λ* + b(k+1) + d(k+1))`. `C` is fixed by
//! normalization, with the mass beyond `K` summed by the certified series evaluator.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rates::RateFunction;
use crate::scalar::{CompensatedSum, Scalar};
use crate::theory::malthusian::DEFAULT_MAX_TERMS;
use crate::theory::series::{sum_ratio_series_log, SeriesOptions, SeriesValue};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("lambda_star must be positive and finite, got {0}")]
    InvalidLambda(f64),
    #[error("weights beyond k = {k_max} do not decay; the tail mass cannot be bounded")]
    TailNotDecaying { k_max: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoreticalFitnessDist<T> {
    pub lambda_star: T,
    /// `p_0 ..= p_K`; entries below the underflow guard may be zero or subnormal.
    pub p: Vec<T>,
    /// `ln p_k`, finite even where `p_k` underflows.
    pub ln_p: Vec<T>,
    pub normalization_c: T,
    /// Probability mass beyond `K`.
    pub tail_mass_bound: T,
    /// Accuracy of `tail_mass_bound` as certified by the series evaluator.
    pub tail_error: T,
}

impl<T: Scalar> TheoreticalFitnessDist<T> {
    pub fn k_max(&self) -> u64 {
        self.p.len() as u64 - 1
    }

    /// `Σ_{k<=K} p_k + tail_mass_bound`.
    pub fn total_mass(&self) -> T {
        let mut acc: CompensatedSum<T> = self.p.iter().copied().collect();
        acc.add(self.tail_mass_bound);
        acc.value()
    }
}

/// Entries of the weight recurrence, tracked linearly until they underflow.
struct WeightBuilder<T> {
    linear: Vec<T>,
    ln: Vec<T>,
}

pub fn fitness_distribution<T: Scalar>(
    b: &RateFunction<T>,
    d: &RateFunction<T>,
    lambda_star: T,
    k_max: u64,
) -> Result<TheoreticalFitnessDist<T>, DistributionError> {
    if !(lambda_star > T::zero()) || !lambda_star.is_finite() {
        return Err(DistributionError::InvalidLambda(
            lambda_star.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let denom = |k: u64| lambda_star + b.evaluate(k) + d.evaluate(k);
    let step = |k: u64| b.evaluate(k - 1) / denom(k);

    let len = k_max as usize + 1;
    let mut w = WeightBuilder {
        linear: Vec::with_capacity(len),
        ln: Vec::with_capacity(len),
    };
    let guard = T::underflow_guard();
    let first = denom(0).recip();
    w.linear.push(first);
    w.ln.push(first.ln());
    let mut in_log = false;
    for k in 1..=k_max {
        let r = step(k);
        let prev = w.linear[k as usize - 1];
        let next_ln = w.ln[k as usize - 1] + r.ln();
        if !in_log {
            let next = prev * r;
            if next >= guard {
                w.linear.push(next);
                w.ln.push(next.ln());
                continue;
            }
            in_log = true;
        }
        w.linear.push(next_ln.exp());
        w.ln.push(next_ln);
    }

    let head: CompensatedSum<T> = w.linear.iter().copied().collect();
    let head = head.value();

    let ln_next = w.ln[k_max as usize] + step(k_max + 1).ln();
    let tail_opts = SeriesOptions::new(head * T::lit(1e-14), DEFAULT_MAX_TERMS);
    let (tail, tail_err) = match sum_ratio_series_log(k_max + 1, ln_next, step, &tail_opts) {
        SeriesValue::Converged {
            value, tail_bound, ..
        } => (value, tail_bound),
        _ => return Err(DistributionError::TailNotDecaying { k_max }),
    };

    let c = (head + tail).recip();
    let ln_c = c.ln();
    let p = w.linear.iter().map(|&x| x * c).collect();
    let ln_p = w.ln.iter().map(|&l| l + ln_c).collect();
    Ok(TheoreticalFitnessDist {
        lambda_star,
        p,
        ln_p,
        normalization_c: c,
        tail_mass_bound: tail * c,
        tail_error: tail_err * c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rate(s: &str) -> RateFunction<f64> {
        s.parse().unwrap()
    }

    #[test]
    fn pure_birth_affine() {
        let dist = fitness_distribution(&rate("affine(1,1)"), &RateFunction::zero(), 2.0, 50).unwrap();
        assert!((dist.p[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((dist.p[1] - 1.0 / 6.0).abs() < 1e-12);
        for k in 0..=50u64 {
            let kf = k as f64;
            let exact = 4.0 / ((kf + 1.0) * (kf + 2.0) * (kf + 3.0));
            assert!((dist.p[k as usize] - exact).abs() < 1e-11 * exact);
        }
        // tail beyond 50: sum_{k>50} 4/((k+1)(k+2)(k+3)) = 2/(52*53)
        assert!((dist.tail_mass_bound - 2.0 / (52.0 * 53.0)).abs() < 1e-12);
        assert!((dist.normalization_c - 2.0).abs() < 1e-12);
    }

    #[test]
    fn constant_birth_is_geometric() {
        let c = 1.7;
        let dist = fitness_distribution(&RateFunction::constant(c), &RateFunction::zero(), c, 60).unwrap();
        for (k, &pk) in dist.p.iter().enumerate() {
            let exact = 0.5f64.powi(k as i32 + 1);
            assert!((pk - exact).abs() < 1e-13 * exact);
        }
    }

    #[test]
    fn affine_const_ratio() {
        let dist = fitness_distribution(&rate("affine(1,1)"), &rate("const(0.5)"), 1.5, 200).unwrap();
        for k in 0..200usize {
            let expected = (k as f64 + 1.0) / (k as f64 + 4.0);
            assert!((dist.p[k + 1] / dist.p[k] - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn exponential_family_underflows_gracefully() {
        let b = rate("affine(1,1)");
        let d = rate("power(0.5,1)");
        let dist = fitness_distribution(&b, &d, 0.7865, 10_000).unwrap();
        assert!(dist.p.iter().all(|&x| x >= 0.0));
        assert!(dist.ln_p.iter().all(|x| x.is_finite()));
        assert_eq!(*dist.p.last().unwrap(), 0.0);
        assert!((dist.total_mass() - 1.0).abs() < 1e-12);
        // log-space recurrence keeps holding past the underflow point
        let k = 9_000usize;
        let lhs = dist.ln_p[k + 1] + (0.7865 + b.evaluate(k as u64 + 1) + d.evaluate(k as u64 + 1)).ln();
        let rhs = dist.ln_p[k] + b.evaluate(k as u64).ln();
        assert!((lhs - rhs).abs() < 1e-9 * rhs.abs());
    }

    #[test]
    fn rejects_bad_lambda() {
        let err = fitness_distribution(&rate("affine(1,1)"), &RateFunction::zero(), -1.0, 5);
        assert!(matches!(err, Err(DistributionError::InvalidLambda(_))));
    }

    #[test]
    fn slowly_decaying_tail_is_reported() {
        // weight ratios (k + alpha - 1)/(k + alpha + lambda): decay exponent 1 + lambda
        let b = rate("affine(1,1)");
        let err = fitness_distribution(&b, &RateFunction::zero(), 1e-9, 10);
        assert_eq!(err, Err(DistributionError::TailNotDecaying { k_max: 10 }));
        assert!(fitness_distribution(&b, &RateFunction::zero(), 0.5, 10).is_ok());
    }
}
