//! Special functions and generic numeric kernels.

pub mod bessel;
pub mod normal;
pub mod quadrature;
pub mod regression;
pub mod roots;
pub mod special;

pub use bessel::{bessel_k, bessel_k_scaled, ln_bessel_k};
pub use quadrature::{integrate, integrate_with_breaks, QuadratureSpec};
pub use regression::{fit_loglog_slope, log_grid, SlopeFit};
pub use roots::invert_monotone;
pub use special::{gamma_p, gamma_p_inv, gamma_q, ln_gamma_p, ln_gamma_q, log_gamma, upper_incomplete_gamma};
