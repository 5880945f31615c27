//! Standard normal CDF, its antiderivative and quantile.

use statrs::distribution::{ContinuousCDF, Normal};

/// `Φ(x)`, through `erfc` so the lower tail keeps full relative accuracy.
pub fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `Ψ(x) = ∫_{-∞}^x Φ(t) dt = xΦ(x) + φ(x)`.
pub fn phi_integral(x: f64) -> f64 {
    if x < -8.0 {
        // Mills-ratio expansion; the closed form cancels badly here
        let x2 = x * x;
        return density(x) / x2 * (1.0 - 3.0 / x2 + 15.0 / (x2 * x2) - 105.0 / (x2 * x2 * x2));
    }
    x * phi(x) + density(x)
}

/// Inverse of `Φ` on `(0, 1)`: a library starting value polished by one
/// Newton step against [`phi`].
pub fn quantile(p: f64) -> f64 {
    let x = Normal::standard().inverse_cdf(p);
    if !x.is_finite() {
        return x;
    }
    // work in the upper tail there so 1 − p keeps its digits
    let residual = if p > 0.5 { (1.0 - p) - phi(-x) } else { phi(x) - p };
    x - residual / density(x)
}
