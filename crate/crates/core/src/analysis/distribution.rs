//! Discrete distributions on the nonnegative integers: empirical histograms,
//! the theoretical fitness law and explicit point-mass tables.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Probability, Scalar};
use crate::simulator::{SimulationSummary, Termination};
use crate::theory::TheoreticalFitnessDist;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmpiricalError {
    #[error("histogram is empty")]
    Empty,
    #[error("run ended with {0:?}, not at its target size")]
    Incomplete(Termination),
    #[error("count {0} does not fit exact arithmetic")]
    Overflow(u64),
}

/// Which per-vertex count a histogram records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistogramKind {
    Fitness,
    InDegree,
}

/// Whether truncated or extinct runs may be analysed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Completeness {
    #[default]
    RequireTarget,
    AllowIncomplete,
}

/// A law on `0..=support_max()`, possibly with extra mass placed beyond it.
pub trait DiscreteDistribution {
    type Prob: Probability;

    /// Largest `k` with explicitly stored mass.
    fn support_max(&self) -> u64;

    fn mass(&self, k: u64) -> Self::Prob;

    /// Mass somewhere above `support_max()`.
    fn mass_beyond(&self) -> Self::Prob {
        Self::Prob::zero()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub counts: BTreeMap<u64, u64>,
    pub n: u64,
    pub source: HistogramKind,
}

impl EmpiricalDistribution {
    pub fn from_counts(counts: BTreeMap<u64, u64>, source: HistogramKind) -> Result<Self, EmpiricalError> {
        let counts: BTreeMap<u64, u64> = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        let n: u64 = counts.values().sum();
        if n == 0 {
            return Err(EmpiricalError::Empty);
        }
        if i64::try_from(n).is_err() {
            return Err(EmpiricalError::Overflow(n));
        }
        Ok(Self { counts, n, source })
    }

    pub fn from_summary(
        summary: &SimulationSummary,
        which: HistogramKind,
        completeness: Completeness,
    ) -> Result<Self, EmpiricalError> {
        if summary.termination != Termination::TargetReached && completeness == Completeness::RequireTarget {
            return Err(EmpiricalError::Incomplete(summary.termination));
        }
        let h = match which {
            HistogramKind::Fitness => &summary.fitness_histogram,
            HistogramKind::InDegree => &summary.indegree_histogram,
        };
        Self::from_counts(h.clone(), which)
    }

    /// Pools several histograms of the same kind.
    pub fn pooled<'a>(parts: impl IntoIterator<Item = &'a EmpiricalDistribution>) -> Result<Self, EmpiricalError> {
        let mut counts = BTreeMap::new();
        let mut source = None;
        for p in parts {
            source.get_or_insert(p.source);
            for (&k, &c) in &p.counts {
                *counts.entry(k).or_insert(0) += c;
            }
        }
        Self::from_counts(counts, source.ok_or(EmpiricalError::Empty)?)
    }

    pub fn count(&self, k: u64) -> u64 {
        self.counts.get(&k).copied().unwrap_or(0)
    }

    pub fn pmf(&self, k: u64) -> f64 {
        self.count(k) as f64 / self.n as f64
    }

    pub fn pmf_exact(&self, k: u64) -> Rational {
        Rational::new(self.count(k) as i64, self.n as i64)
    }

    /// View with exact rational masses.
    pub fn exact(&self) -> ExactEmpirical<'_> {
        ExactEmpirical(self)
    }

    /// Number of observations at or above each `k` in `0..=support_max()`.
    pub fn tail_counts(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.support_max() as usize + 1];
        let mut acc = 0;
        for k in (0..out.len()).rev() {
            acc += self.count(k as u64);
            out[k] = acc;
        }
        out
    }
}

impl DiscreteDistribution for EmpiricalDistribution {
    type Prob = f64;

    fn support_max(&self) -> u64 {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }

    fn mass(&self, k: u64) -> f64 {
        self.pmf(k)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ExactEmpirical<'a>(&'a EmpiricalDistribution);

impl DiscreteDistribution for ExactEmpirical<'_> {
    type Prob = Rational;

    fn support_max(&self) -> u64 {
        self.0.support_max()
    }

    fn mass(&self, k: u64) -> Rational {
        self.0.pmf_exact(k)
    }
}

impl<T: Scalar + Signed> DiscreteDistribution for TheoreticalFitnessDist<T> {
    type Prob = T;

    fn support_max(&self) -> u64 {
        self.k_max()
    }

    fn mass(&self, k: u64) -> T {
        self.p.get(k as usize).copied().unwrap_or_else(T::zero)
    }

    fn mass_beyond(&self) -> T {
        self.tail_mass_bound
    }
}

/// An explicit table `p_0, ..., p_K` plus an optional remainder beyond `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointMasses<P> {
    pub masses: Vec<P>,
    pub beyond: P,
}

impl<P: Probability> PointMasses<P> {
    pub fn new(masses: Vec<P>) -> Self {
        Self {
            masses,
            beyond: P::zero(),
        }
    }
}

impl<P: Probability> DiscreteDistribution for PointMasses<P> {
    type Prob = P;

    fn support_max(&self) -> u64 {
        self.masses.len().saturating_sub(1) as u64
    }

    fn mass(&self, k: u64) -> P {
        self.masses.get(k as usize).copied().unwrap_or_else(P::zero)
    }

    fn mass_beyond(&self) -> P {
        self.beyond
    }
}

/// `(k, P(X >= k))` for `k = 0, 1, ...` up to the last positive value.
///
/// Tail sums are accumulated from the top so small tails keep their relative
/// accuracy, then divided by the total so that `P(X >= 0) = 1`.
pub fn ccdf<D: DiscreteDistribution + ?Sized>(dist: &D) -> Vec<(u64, D::Prob)> {
    let top = dist.support_max();
    let mut suffix = vec![D::Prob::zero(); top as usize + 1];
    let mut acc = dist.mass_beyond();
    for k in (0..=top).rev() {
        acc = acc + dist.mass(k);
        suffix[k as usize] = acc;
    }
    let total = suffix[0];
    if !(total > D::Prob::zero()) {
        return Vec::new();
    }
    let last = suffix.iter().rposition(|&x| x > D::Prob::zero()).unwrap_or(0);
    suffix
        .into_iter()
        .take(last + 1)
        .enumerate()
        .map(|(k, s)| (k as u64, if k == 0 { D::Prob::one() } else { s / total }))
        .collect()
}

/// `max_k |F_a(k) - F_b(k)|` over `k` up to the larger support maximum.
///
/// Mass stored beyond a support maximum is not assigned to any `k` in range.
pub fn ks_distance<A, B>(a: &A, b: &B) -> A::Prob
where
    A: DiscreteDistribution + ?Sized,
    B: DiscreteDistribution<Prob = A::Prob> + ?Sized,
{
    let top = a.support_max().max(b.support_max());
    let mut fa = A::Prob::zero();
    let mut fb = A::Prob::zero();
    let mut best = A::Prob::zero();
    for k in 0..=top {
        if k <= a.support_max() {
            fa = fa + a.mass(k);
        }
        if k <= b.support_max() {
            fb = fb + b.mass(k);
        }
        let gap = Signed::abs(&(fa - fb));
        if gap > best {
            best = gap;
        }
    }
    best
}
