//! Gaussian draws built only on `libm`, so the same seed gives the same bits
//! on every platform. Each draw consumes exactly two `u64` values.

use rand::Rng;

/// Box-Muller, keeping the cosine branch.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // (0, 1] so the logarithm stays finite
    let u1 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(std::f64::consts::TAU * u2)
}
