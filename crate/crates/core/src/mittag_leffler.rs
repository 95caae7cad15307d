//! E_α(−x) for 0 < α < 1 and x ≥ 0, the relaxation function of the scalar
//! fractional ODE. Used as an independent temporal oracle.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::adaptive_gk;

const SERIES_LIMIT: f64 = 1.0;

/// Mittag-Leffler function evaluated on the negative real axis, `E_α(−x)`.
///
/// Power series for `x ≤ 1`; above that the Laplace-type representation
///
/// ```text
/// E_α(−x) = sin(απ)/(απ) ∫₀^∞ exp(−v^{1/α}) x / (v² + 2vx cos(απ) + x²) dv
/// ```
///
/// integrated adaptively. Both branches are accurate to about 1e−12 relative.
pub fn mittag_leffler(alpha: f64, x: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(Error::invalid(format!(
            "only E_α(−x) with finite x ≥ 0 is supported, got x = {x}"
        )));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x <= SERIES_LIMIT {
        Ok(series(alpha, x))
    } else {
        Ok(integral(alpha, x))
    }
}

fn series(alpha: f64, x: f64) -> f64 {
    let lnx = x.ln();
    let mut sum = 1.0;
    for k in 1..2000 {
        let kf = k as f64;
        let mag = (kf * lnx - ln_gamma(alpha * kf + 1.0)).exp();
        let term = if k % 2 == 0 { mag } else { -mag };
        sum += term;
        // Terms decay monotonically once Γ(αk+1) outgrows x^k.
        if mag < 1e-18 * sum.abs() && alpha * kf > 2.0 {
            break;
        }
    }
    sum
}

fn integral(alpha: f64, x: f64) -> f64 {
    let (sin, cos) = (alpha * std::f64::consts::PI).sin_cos();
    let inv = 1.0 / alpha;
    // exp(−v^{1/α}) < e^{−60} beyond this point.
    let upper = 60f64.powf(alpha);
    let integrand = |v: f64| (-v.powf(inv)).exp() * x / (v * v + 2.0 * v * x * cos + x * x);

    let mut breaks = vec![0.0, upper];
    for f in [0.1, 1.0, 10.0] {
        breaks.push(f * x);
    }
    if cos < 0.0 {
        // Near α = 1 the denominator has a sharp minimum at v = −x cos(απ).
        let centre = -x * cos;
        let width = x * sin;
        breaks.push(centre);
        for k in [1.0, 4.0, 16.0] {
            breaks.push(centre - k * width);
            breaks.push(centre + k * width);
        }
    }
    breaks.retain(|&b| (0.0..=upper).contains(&b));
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup();

    let total: f64 = breaks
        .windows(2)
        .map(|w| adaptive_gk(integrand, w[0], w[1], 1e-300, 1e-14))
        .sum();
    sin / (alpha * std::f64::consts::PI) * total
}
