//! Least-squares tail fits in linearizing coordinates.
//!
//! | law         | x       | y                | parameter          |
//! |-------------|---------|------------------|--------------------|
//! | power law   | `ln k`  | `ln F(k)`        | `tau = 1 - slope`  |
//! | exponential | `k`     | `ln F(k)`        | `rate = -slope`    |
//! | stretched   | `ln k`  | `ln(-ln F(k))`   | `gamma = slope`    |
//!
//! `F` is the CCDF `P(X >= k)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Smallest number of points accepted by [`fit_tail`].
pub const MIN_FIT_POINTS: usize = 10;
/// Default lower end of the fit window.
pub const DEFAULT_K_MIN: u64 = 10;
/// Observations required at or above the upper end of the default window.
pub const MIN_TAIL_COUNT: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailLaw {
    PowerLaw,
    Exponential,
    Stretched,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FittedLaw<T> {
    PowerLaw { tau: T },
    Exponential { rate: T },
    Stretched { gamma: T },
}

impl<T: Copy> FittedLaw<T> {
    pub fn parameter(&self) -> T {
        match *self {
            FittedLaw::PowerLaw { tau } => tau,
            FittedLaw::Exponential { rate } => rate,
            FittedLaw::Stretched { gamma } => gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit<T> {
    pub law: FittedLaw<T>,
    /// Smallest and largest `k` actually used.
    pub fit_range: (u64, u64),
    pub r_squared: T,
    pub slope: T,
    pub intercept: T,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("{found} points in the fit window, at least {needed} needed")]
    InsufficientPoints { found: usize, needed: usize },
    #[error("CCDF is not positive at k = {k}")]
    NonPositive { k: u64 },
    #[error("k = {k} is outside the domain of the {law:?} linearization")]
    OutOfDomain { k: u64, law: TailLaw },
}

fn linearize<T: Scalar>(law: TailLaw, k: u64, f: T) -> Result<(T, T), FitError> {
    if !(f > T::zero()) {
        return Err(FitError::NonPositive { k });
    }
    let kf = T::from_count(k);
    match law {
        TailLaw::Exponential => Ok((kf, f.ln())),
        TailLaw::PowerLaw if k > 0 => Ok((kf.ln(), f.ln())),
        TailLaw::Stretched if k > 0 && f < T::one() => Ok((kf.ln(), (-f.ln()).ln())),
        _ => Err(FitError::OutOfDomain { k, law }),
    }
}

/// Fits `law` to the CCDF points with `k_min <= k <= k_max`.
pub fn fit_tail<T: Scalar>(
    ccdf: &[(u64, T)],
    law: TailLaw,
    k_min: u64,
    k_max: Option<u64>,
) -> Result<TailFit<T>, FitError> {
    let upper = k_max.unwrap_or(u64::MAX);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut range = (u64::MAX, 0);
    for &(k, f) in ccdf.iter().filter(|&&(k, _)| k >= k_min && k <= upper) {
        let (x, y) = linearize(law, k, f)?;
        xs.push(x);
        ys.push(y);
        range = (range.0.min(k), range.1.max(k));
    }
    if xs.len() < MIN_FIT_POINTS {
        return Err(FitError::InsufficientPoints {
            found: xs.len(),
            needed: MIN_FIT_POINTS,
        });
    }

    let n = T::from_count(xs.len() as u64);
    let mx = xs.iter().fold(T::zero(), |a, &x| a + x) / n;
    let my = ys.iter().fold(T::zero(), |a, &y| a + y) / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(&ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > T::zero() {
        let ss_res = ys.iter().zip(&xs).fold(T::zero(), |a, (&y, &x)| {
            let e = y - (intercept + slope * x);
            a + e * e
        });
        (T::one() - ss_res / syy).max(T::zero()).min(T::one())
    } else {
        T::one()
    };
    let fitted = match law {
        TailLaw::PowerLaw => FittedLaw::PowerLaw { tau: T::one() - slope },
        TailLaw::Exponential => FittedLaw::Exponential { rate: -slope },
        TailLaw::Stretched => FittedLaw::Stretched { gamma: slope },
    };
    Ok(TailFit {
        law: fitted,
        fit_range: range,
        r_squared,
        slope,
        intercept,
        points: xs.len(),
    })
}

/// `(10, K)` with `K` the largest `k` having at least 10 observations at or above it.
///
/// When that leaves fewer than [`MIN_FIT_POINTS`] points, the lower end moves down
/// (not below 1) until it does not. `None` when even `1..=K` is too short.
pub fn default_window(counts: &BTreeMap<u64, u64>) -> Option<(u64, u64)> {
    let mut acc = 0;
    for (&k, &c) in counts.iter().rev() {
        acc += c;
        if acc >= MIN_TAIL_COUNT {
            let span = MIN_FIT_POINTS as u64 - 1;
            let k_min = DEFAULT_K_MIN.min(k.saturating_sub(span)).max(1);
            return (k >= k_min + span).then_some((k_min, k));
        }
    }
    None
}

/// Pointwise mean of several CCDFs, each extended by zeros past its end.
pub fn mean_ccdf<T: Scalar>(curves: &[Vec<(u64, T)>]) -> Vec<(u64, T)> {
    let len = curves.iter().map(|c| c.len()).max().unwrap_or(0);
    let n = T::from_count(curves.len() as u64);
    (0..len)
        .map(|i| {
            let s = curves.iter().filter_map(|c| c.get(i)).fold(T::zero(), |a, &(_, f)| a + f);
            (i as u64, s / n)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(f: impl Fn(f64) -> f64, ks: std::ops::RangeInclusive<u64>) -> Vec<(u64, f64)> {
        ks.map(|k| (k, f(k as f64))).collect()
    }

    #[test]
    fn power_law_from_pure_birth_ccdf() {
        let c = curve(|k| 2.0 / ((k + 1.0) * (k + 2.0)), 0..=2000);
        let fit = fit_tail(&c, TailLaw::PowerLaw, 20, None).unwrap();
        assert!((fit.law.parameter() - 3.0).abs() < 0.05, "{fit:?}");
        assert!(fit.r_squared > 0.99);
    }

    #[test]
    fn exponential_rate_is_exact() {
        let c = curve(|k| 0.5f64.powf(k), 0..=60);
        let fit = fit_tail(&c, TailLaw::Exponential, 0, None).unwrap();
        assert!((fit.law.parameter() - 2f64.ln()).abs() < 1e-6);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stretched_exponent_is_exact() {
        let c = curve(|k| (-k.sqrt()).exp(), 0..=400);
        let fit = fit_tail(&c, TailLaw::Stretched, 1, None).unwrap();
        assert!((fit.law.parameter() - 0.5).abs() < 0.01);
        assert_eq!(fit.fit_range, (1, 400));
    }

    #[test]
    fn window_limits_are_respected() {
        let c = curve(|k| 0.5f64.powf(k), 0..=60);
        let fit = fit_tail(&c, TailLaw::Exponential, 10, Some(30)).unwrap();
        assert_eq!((fit.fit_range, fit.points), ((10, 30), 21));
    }

    #[test]
    fn errors() {
        let c = curve(|k| 0.5f64.powf(k), 0..=5);
        assert!(matches!(fit_tail(&c, TailLaw::Exponential, 0, None), Err(FitError::InsufficientPoints { found: 6, .. })));
        let mut c = curve(|k| 0.5f64.powf(k), 0..=20);
        c[12].1 = 0.0;
        assert_eq!(fit_tail(&c, TailLaw::Exponential, 0, None).unwrap_err(), FitError::NonPositive { k: 12 });
        let c = curve(|k| 1.0 / (k + 1.0), 0..=20);
        assert!(matches!(fit_tail(&c, TailLaw::PowerLaw, 0, None), Err(FitError::OutOfDomain { k: 0, .. })));
    }

    #[test]
    fn default_window_uses_tail_counts() {
        // tail counts: k<=20 -> 13, k in 21..=30 -> 8
        let counts = BTreeMap::from([(0, 100), (5, 3), (20, 5), (30, 8)]);
        assert_eq!(default_window(&counts), Some((10, 20)));
        let counts = BTreeMap::from([(0, 100), (12, 1), (15, 20), (40, 9)]);
        assert_eq!(default_window(&counts), Some((6, 15)));
        // a short tail widens the window downwards
        let counts = BTreeMap::from([(0, 100), (14, 20)]);
        assert_eq!(default_window(&counts), Some((5, 14)));
        let counts = BTreeMap::from([(0, 100), (9, 20)]);
        assert_eq!(default_window(&counts), None);
    }

    #[test]
    fn mean_of_curves_pads_with_zeros() {
        let m = mean_ccdf(&[vec![(0, 1.0), (1, 0.5)], vec![(0, 1.0)]]);
        assert_eq!(m, vec![(0, 1.0), (1, 0.25)]);
    }
}
