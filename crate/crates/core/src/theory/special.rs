//! Log-gamma for the gamma-ratio closed forms.

use crate::scalar::Scalar;

// B_{2j} / (2j (2j - 1)) for j = 1..8
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

const SHIFT_TO: f64 = 15.0;

/// Natural log of the gamma function for `x > 0`.
///
/// Arguments below 15 are shifted up with `ln Γ(x) = ln Γ(x + n) - ln(x (x+1) ... (x+n-1))`,
/// then the Stirling series is evaluated with eight correction terms.
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    assert!(x > T::zero(), "ln_gamma requires a positive argument");
    let mut z = x;
    let mut shift = T::one();
    let threshold = T::lit(SHIFT_TO);
    while z < threshold {
        shift = shift * z;
        z = z + T::one();
    }
    let half = T::lit(0.5);
    let ln_two_pi = T::lit((2.0 * std::f64::consts::PI).ln());
    let inv = z.recip();
    let inv2 = inv * inv;
    let mut correction = T::zero();
    let mut power = inv;
    for &c in STIRLING.iter() {
        correction = correction + T::lit(c) * power;
        power = power * inv2;
    }
    (z - half) * z.ln() - z + half * ln_two_pi + correction - shift.ln()
}

/// `ln(Γ(x + a) / Γ(x + c))`.
pub fn ln_gamma_ratio<T: Scalar>(x: T, a: T, c: T) -> T {
    ln_gamma(x + a) - ln_gamma(x + c)
}
