//! Closed forms for the affine-birth / constant-death family and the other
//! standard families. These are used as oracles against the generic series evaluator.

use thiserror::Error;

use crate::scalar::Scalar;
use crate::theory::special::ln_gamma_ratio;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("parameters outside the family's domain: {0}")]
    Domain(&'static str),
}

/// `sum_k prod_{i<=k} (i+alpha)/(lambda+i+alpha+beta)`: infinite for `lambda <= 1 - beta`,
/// otherwise `alpha / (lambda + beta - 1)`.
pub fn rho_hat_affine_closed_form<T: Scalar>(alpha: T, beta: T, lambda: T) -> T {
    if lambda + beta - T::one() <= T::zero() {
        T::infinity()
    } else {
        alpha / (lambda + beta - T::one())
    }
}

/// Malthusian parameter `1 + alpha - beta` of `b(i) = i + alpha`, `d(i) = beta`.
pub fn malthusian_affine_closed_form<T: Scalar>(alpha: T, beta: T) -> Option<T> {
    let root = T::one() + alpha - beta;
    (root > T::zero()).then_some(root)
}

/// Long-run probability that the next event is a birth for `b(i) = i + alpha`, `d(i) = beta`.
///
/// Only meaningful for that family; `beta = alpha + 1` gives the critical value 1/2.
pub fn birth_fraction_limit<T: Scalar>(alpha: T, beta: T) -> Result<T, OracleError> {
    if !(alpha > T::zero()) || !(beta >= T::zero()) {
        return Err(OracleError::Domain("need alpha > 0 and beta >= 0"));
    }
    if beta > alpha + T::one() {
        return Err(OracleError::Domain("not supercritical (beta > alpha + 1)"));
    }
    Ok((T::one() + alpha) / (T::one() + alpha + beta))
}

/// Mean offspring `1/beta` of `b(i) = i + 1`, `d(i) = beta (i + 1)`.
pub fn mean_offspring_linear_death<T: Scalar>(beta: T) -> T {
    beta.recip()
}

/// Mean offspring of `b(i) = alpha`, `d(i) = 1/(i+1)`: `alpha/(1-alpha)`, infinite for `alpha >= 1`.
pub fn mean_offspring_inverse_death<T: Scalar>(alpha: T) -> T {
    if alpha >= T::one() {
        T::infinity()
    } else {
        alpha / (T::one() - alpha)
    }
}

/// Unnormalized `ln p_k` of the affine/constant family: `ln Γ(k+alpha) - ln Γ(k+2+2 alpha)`.
pub fn affine_const_ln_weight<T: Scalar>(alpha: T, k: u64) -> T {
    ln_gamma_ratio(T::from_count(k), alpha, T::lit(2.0) + alpha + alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_closed_form_values() {
        assert_eq!(rho_hat_affine_closed_form(1.0, 0.5, 2.5), 0.5);
        assert_eq!(rho_hat_affine_closed_form(2.0, 0.0, 3.0), 1.0);
        assert!(rho_hat_affine_closed_form(1.0, 0.5, 0.5f64).is_infinite());
        assert_eq!(malthusian_affine_closed_form(2.0, 0.0), Some(3.0));
        assert_eq!(malthusian_affine_closed_form(0.5, 2.0), None);
    }

    #[test]
    fn birth_fraction_values() {
        assert!((birth_fraction_limit(1.0, 0.5f64).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(birth_fraction_limit(1.0, 0.0f64).unwrap(), 1.0);
        assert_eq!(birth_fraction_limit(1.0, 2.0f64).unwrap(), 0.5);
        assert!(birth_fraction_limit(1.0, 2.5f64).is_err());
        assert!(birth_fraction_limit(0.0, 0.5f64).is_err());
    }

    #[test]
    fn mean_offspring_closed_forms() {
        assert_eq!(mean_offspring_linear_death(0.5f64), 2.0);
        assert!((mean_offspring_inverse_death(0.75f64) - 3.0).abs() < 1e-15);
        assert!(mean_offspring_inverse_death(1.0f64).is_infinite());
    }

    #[test]
    fn gamma_weight_ratio_matches_product_form() {
        // p_{k+1}/p_k = (k+alpha)/(k+2+2alpha)
        let alpha = 0.7f64;
        for k in 0..200u64 {
            let ratio = (affine_const_ln_weight(alpha, k + 1) - affine_const_ln_weight(alpha, k)).exp();
            let expected = (k as f64 + alpha) / (k as f64 + 2.0 + 2.0 * alpha);
            assert!((ratio - expected).abs() < 1e-12 * expected);
        }
    }
}
