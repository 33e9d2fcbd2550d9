use statrs::distribution::{ContinuousCDF, Normal};

/// Standard normal quantile `Φ⁻¹(p)`.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

pub fn normal_cdf(z: f64) -> f64 {
    Normal::standard().cdf(z)
}
