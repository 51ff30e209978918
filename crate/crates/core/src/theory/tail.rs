//! Predicted tail class of the limiting fitness distribution.

use serde::{Deserialize, Serialize};

use crate::rates::RateFunction;
use crate::scalar::Scalar;
use crate::theory::malthusian::{find_malthusian, Criticality};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailClass<T> {
    /// `p_k ~ k^{-exponent}`
    PowerLaw { exponent: T },
    /// `p_k` decays like `e^{-rate k}` up to polynomial factors.
    Exponential { rate: T },
    /// `ln p_k ~ -k^{exponent}`
    StretchedExponential { exponent: T },
    Unknown,
}

/// Pattern-matches the rate families against the analysed cases.
///
/// * affine birth `s i + c` with constant death: power law with exponent `2 + c/s`;
/// * `b = β_b (i+1)^γ`, `d = β_d (i+1)^γ`, `γ > 0`: exponential with rate `ln(1 + β_d/β_b)`;
/// * `b = β_b (i+1)^γ`, `d = β_d (i+1)^η` with `0 < γ - η < 1`: stretched exponential
///   with exponent `1 - (γ - η)`;
/// * constant birth `α` with `d = 1/(i+1)`: exponential with rate `ln((λ* + α)/α)`.
pub fn classify_tail<T: Scalar>(b: &RateFunction<T>, d: &RateFunction<T>) -> TailClass<T> {
    let zero = T::zero();
    let one = T::one();

    if let (RateFunction::Affine { slope, offset }, Some(_)) = (*b, d.as_constant()) {
        if slope > zero {
            return TailClass::PowerLaw {
                exponent: T::lit(2.0) + offset / slope,
            };
        }
    }

    if let (Some(level), RateFunction::Power { scale, exponent }) = (b.as_constant(), *d) {
        if scale == one && exponent == -one {
            let root = find_malthusian(b, d, T::lit(1e-10));
            if root.classification == Criticality::Supercritical {
                return TailClass::Exponential {
                    rate: ((root.lambda_star + level) / level).ln(),
                };
            }
            return TailClass::Unknown;
        }
    }

    if let (Some((bs, gamma)), Some((ds, eta))) = (b.as_power_law(), d.as_power_law()) {
        if gamma > zero && eta == gamma {
            return TailClass::Exponential {
                rate: (one + ds / bs).ln(),
            };
        }
        let gap = gamma - eta;
        if eta >= zero && gap > zero && gap < one {
            return TailClass::StretchedExponential {
                exponent: one - gap,
            };
        }
    }

    TailClass::Unknown
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rate(s: &str) -> RateFunction<f64> {
        s.parse().unwrap()
    }

    #[test]
    fn standard_families() {
        let b = rate("affine(1,1)");
        assert_eq!(
            classify_tail(&b, &rate("const(0.5)")),
            TailClass::PowerLaw { exponent: 3.0 }
        );
        assert_eq!(
            classify_tail(&b, &rate("power(0.5,1)")),
            TailClass::Exponential { rate: 1.5f64.ln() }
        );
        assert_eq!(
            classify_tail(&b, &rate("power(0.5,0.5)")),
            TailClass::StretchedExponential { exponent: 0.5 }
        );
    }

    #[test]
    fn pure_birth_is_a_power_law() {
        assert_eq!(
            classify_tail(&rate("affine(1,2)"), &RateFunction::zero()),
            TailClass::PowerLaw { exponent: 4.0 }
        );
    }

    #[test]
    fn inverse_death_uses_the_root() {
        let b = rate("const(0.75)");
        match classify_tail(&b, &rate("power(1,-1)")) {
            TailClass::Exponential { rate: decay } => {
                let root = find_malthusian(&b, &rate("power(1,-1)"), 1e-10);
                assert!((decay - ((root.lambda_star + 0.75) / 0.75).ln()).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(classify_tail(&rate("const(0.4)"), &rate("power(1,-1)")), TailClass::Unknown);
    }


    #[test]
    fn unmatched_pairs_are_unknown() {
        assert_eq!(classify_tail(&rate("power(1,2)"), &rate("power(1,0.5)")), TailClass::Unknown);
        assert_eq!(classify_tail(&rate("const(1)"), &rate("power(2,-1)")), TailClass::Unknown);
    }
}
