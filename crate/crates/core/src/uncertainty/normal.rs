use std::f64::consts::SQRT_2;

/// Standard normal cumulative distribution function.
///
/// Evaluated through the complementary error function so that both tails keep
/// full relative precision; `phi(±inf)` returns 1 and 0.
pub fn phi(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// Standard normal density.
pub fn density(z: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Probability that `N(mu, sigma²)` lands in `[lower, upper]`.
///
/// A zero `sigma` collapses the distribution onto `mu`.
pub fn interval_probability(lower: f64, upper: f64, mu: f64, sigma: f64) -> f64 {
    if upper < lower {
        return 0.0;
    }
    if sigma <= 0.0 {
        return if lower <= mu && mu <= upper { 1.0 } else { 0.0 };
    }
    let hi = phi((upper - mu) / sigma);
    let lo = phi((lower - mu) / sigma);
    (hi - lo).max(0.0)
}
