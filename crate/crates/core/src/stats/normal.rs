//! Standard normal tail and quantile.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

fn standard() -> Normal {
    Normal::standard()
}

/// `P(Z > x)`.
pub fn normal_tail(x: f64) -> f64 {
    standard().sf(x)
}

/// Upper-`alpha` quantile `z` with `P(Z > z) = alpha`.
pub fn upper_quantile(alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0, "level must lie in (0, 1)");
    let n = standard();
    // inverse_cdf(1 - alpha) loses digits for small alpha; use symmetry
    let mut z = -n.inverse_cdf(alpha);
    for _ in 0..2 {
        // Newton polish on the tail equation
        let step = (n.sf(z) - alpha) / n.pdf(z);
        z += step;
    }
    z
}
