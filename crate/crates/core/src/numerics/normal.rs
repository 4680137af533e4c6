//! Standard normal and Student t distribution helpers.

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};
use std::f64::consts::PI;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Φ(x), via erfc(y) = Q(1/2, y²) so that both tails keep relative precision.
pub fn normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let half_tail = 0.5 * crate::numerics::special::gamma_q(0.5, 0.5 * x * x).unwrap_or(0.0);
    if x < 0.0 {
        half_tail
    } else {
        1.0 - half_tail
    }
}

/// 1 - Φ(x).
pub fn normal_sf(x: f64) -> f64 {
    normal_cdf(-x)
}

/// Standard normal quantile, polished with one Newton step on the cdf.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let std = Normal::standard();
    let mut x = std.inverse_cdf(p);
    if x.is_finite() {
        // work on the smaller tail for relative accuracy
        let (target, cur, sign) = if p < 0.5 {
            (p, normal_cdf(x), 1.0)
        } else {
            (1.0 - p, normal_cdf(-x), -1.0)
        };
        let dens = normal_pdf(x);
        if dens > 0.0 {
            x += sign * (target - cur) / dens;
        }
    }
    x
}

pub fn student_pdf(x: f64, nu: f64) -> f64 {
    let ln_c = crate::numerics::special::ln_gamma_unchecked(0.5 * (nu + 1.0))
        - crate::numerics::special::ln_gamma_unchecked(0.5 * nu)
        - 0.5 * (nu * PI).ln();
    (ln_c - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()).exp()
}

pub fn student_cdf(x: f64, nu: f64) -> f64 {
    match StudentsT::new(0.0, 1.0, nu) {
        Ok(t) => t.cdf(x),
        Err(_) => f64::NAN,
    }
}

pub fn student_quantile(p: f64, nu: f64) -> f64 {
    match StudentsT::new(0.0, 1.0, nu) {
        Ok(t) => t.inverse_cdf(p),
        Err(_) => f64::NAN,
    }
}
