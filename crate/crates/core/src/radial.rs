//! Positive laws used as radial variables or frailties.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::Serialize;

use crate::error::{Result, TailError};
use crate::numerics::quadrature::{integrate_lenient, integrate_with_breaks, QuadratureSpec};
use crate::numerics::roots::invert_monotone;
use crate::numerics::special::{gamma_p, gamma_p_inv, gamma_q, ln_beta, ln_gamma_p, ln_gamma_q, ln_gamma_unchecked};
use crate::numerics::{ln_bessel_k, special};

/// A positive distribution. Parameters are dimensionless; construct through
/// the checked constructors or call [`RadialLaw::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RadialLaw {
    PointMass { r0: f64 },
    Gamma { shape: f64 },
    /// `1/X ~ Gamma(shape, 1)`.
    InverseGamma { shape: f64 },
    /// `R^2 ~ InverseGamma(nu/2, nu/2)`.
    GenInvGammaT { nu: f64 },
    /// Product of independent Gamma(d, 1) and Gamma(alpha, 1) variables.
    KProduct { d: u32, alpha: f64 },
    /// cdf `[1 + (x/sigma)^(-alpha)]^(-beta)`.
    Dagum { alpha: f64, beta: f64, sigma: f64 },
    /// cdf `1 - exp(-x^alpha)`.
    PositiveWeibull { alpha: f64 },
    /// `beta R^(2 xi) ~ Gamma(n / xi, 1)`.
    KotzRadial { n: f64, beta: f64, xi: f64 },
}

/// Upper-tail behaviour of a law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum UpperTailClass {
    /// Survival function regularly varying with index `-index`.
    RegularlyVarying { index: f64 },
    GumbelMDA,
    Bounded,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(TailError::domain(format!("{name} must be positive and finite, got {v}")))
    }
}

fn tight_spec() -> QuadratureSpec {
    QuadratureSpec { abs_tol: 1e-300, rel_tol: 1e-12, max_subdivisions: 2000 }
}

impl RadialLaw {
    pub fn point_mass(r0: f64) -> Result<Self> {
        Self::PointMass { r0 }.validated()
    }
    pub fn gamma(shape: f64) -> Result<Self> {
        Self::Gamma { shape }.validated()
    }
    pub fn inverse_gamma(shape: f64) -> Result<Self> {
        Self::InverseGamma { shape }.validated()
    }
    pub fn gen_inv_gamma_t(nu: f64) -> Result<Self> {
        Self::GenInvGammaT { nu }.validated()
    }
    pub fn k_product(d: u32, alpha: f64) -> Result<Self> {
        Self::KProduct { d, alpha }.validated()
    }
    pub fn dagum(alpha: f64, beta: f64, sigma: f64) -> Result<Self> {
        Self::Dagum { alpha, beta, sigma }.validated()
    }
    pub fn positive_weibull(alpha: f64) -> Result<Self> {
        Self::PositiveWeibull { alpha }.validated()
    }
    pub fn kotz(n: f64, beta: f64, xi: f64) -> Result<Self> {
        Self::KotzRadial { n, beta, xi }.validated()
    }
    /// Chi law with two degrees of freedom (`R^2 ~ chi-square(2)`).
    pub fn chi2() -> Self {
        Self::KotzRadial { n: 1.0, beta: 0.5, xi: 1.0 }
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::PointMass { r0 } => positive("r0", r0),
            Self::Gamma { shape } | Self::InverseGamma { shape } => positive("shape", shape),
            Self::GenInvGammaT { nu } => positive("nu", nu),
            Self::KProduct { d, alpha } => {
                if d < 2 {
                    return Err(TailError::domain(format!("KProduct needs d >= 2, got {d}")));
                }
                positive("alpha", alpha)
            }
            Self::Dagum { alpha, beta, sigma } => {
                positive("alpha", alpha)?;
                positive("beta", beta)?;
                positive("sigma", sigma)
            }
            Self::PositiveWeibull { alpha } => positive("alpha", alpha),
            Self::KotzRadial { n, beta, xi } => {
                positive("N", n)?;
                positive("beta", beta)?;
                positive("xi", xi)
            }
        }
    }

    /// A representative scale of the law (its median).
    pub fn scale(&self) -> f64 {
        match *self {
            Self::PointMass { r0 } => r0,
            _ => self.quantile(0.5).unwrap_or(1.0),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 0.0;
        }
        if x == f64::INFINITY {
            return 1.0;
        }
        match *self {
            Self::PointMass { r0 } => {
                if x >= r0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Gamma { shape } => gamma_p(shape, x).unwrap_or(f64::NAN),
            Self::InverseGamma { shape } => gamma_q(shape, 1.0 / x).unwrap_or(f64::NAN),
            Self::GenInvGammaT { nu } => gamma_q(0.5 * nu, 0.5 * nu / (x * x)).unwrap_or(f64::NAN),
            Self::KProduct { d, alpha } => {
                let mean = d as f64 * alpha;
                if x <= mean {
                    self.k_product_lower(x)
                } else {
                    1.0 - self.k_product_upper(x)
                }
            }
            Self::Dagum { alpha, beta, sigma } => {
                let z = (x / sigma).powf(-alpha);
                (-beta * z.ln_1p()).exp()
            }
            Self::PositiveWeibull { alpha } => -(-x.powf(alpha)).exp_m1(),
            Self::KotzRadial { n, beta, xi } => gamma_p(n / xi, beta * x.powf(2.0 * xi)).unwrap_or(f64::NAN),
        }
    }

    /// `1 - F(x)`, computed directly wherever a closed form is available.
    pub fn survival(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 1.0;
        }
        if x == f64::INFINITY {
            return 0.0;
        }
        match *self {
            Self::PointMass { .. } => 1.0 - self.cdf(x),
            Self::Gamma { shape } => gamma_q(shape, x).unwrap_or(f64::NAN),
            Self::InverseGamma { shape } => gamma_p(shape, 1.0 / x).unwrap_or(f64::NAN),
            Self::GenInvGammaT { nu } => gamma_p(0.5 * nu, 0.5 * nu / (x * x)).unwrap_or(f64::NAN),
            Self::KProduct { d, alpha } => {
                if x > d as f64 * alpha {
                    self.k_product_upper(x)
                } else {
                    1.0 - self.k_product_lower(x)
                }
            }
            Self::Dagum { alpha, beta, sigma } => {
                let z = (x / sigma).powf(-alpha);
                -(-beta * z.ln_1p()).exp_m1()
            }
            Self::PositiveWeibull { alpha } => (-x.powf(alpha)).exp(),
            Self::KotzRadial { n, beta, xi } => gamma_q(n / xi, beta * x.powf(2.0 * xi)).unwrap_or(f64::NAN),
        }
    }

    /// `ln(1 - F(x))`, finite far beyond the point where the survival underflows
    /// for the incomplete-gamma families.
    pub fn log_survival(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 0.0;
        }
        match *self {
            Self::Gamma { shape } => ln_gamma_q(shape, x).unwrap_or(f64::NAN),
            Self::InverseGamma { shape } => ln_gamma_p(shape, 1.0 / x).unwrap_or(f64::NAN),
            Self::GenInvGammaT { nu } => ln_gamma_p(0.5 * nu, 0.5 * nu / (x * x)).unwrap_or(f64::NAN),
            Self::PositiveWeibull { alpha } => -x.powf(alpha),
            Self::KotzRadial { n, beta, xi } => ln_gamma_q(n / xi, beta * x.powf(2.0 * xi)).unwrap_or(f64::NAN),
            _ => self.survival(x).ln(),
        }
    }

    /// `ln F(x)`.
    pub fn log_cdf(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return f64::NEG_INFINITY;
        }
        match *self {
            Self::Gamma { shape } => ln_gamma_p(shape, x).unwrap_or(f64::NAN),
            Self::InverseGamma { shape } => ln_gamma_q(shape, 1.0 / x).unwrap_or(f64::NAN),
            Self::GenInvGammaT { nu } => ln_gamma_q(0.5 * nu, 0.5 * nu / (x * x)).unwrap_or(f64::NAN),
            Self::Dagum { alpha, beta, sigma } => -beta * (x / sigma).powf(-alpha).ln_1p(),
            Self::KotzRadial { n, beta, xi } => ln_gamma_p(n / xi, beta * x.powf(2.0 * xi)).unwrap_or(f64::NAN),
            _ => self.cdf(x).ln(),
        }
    }

    /// Log density; `None` for the point mass.
    pub fn ln_density(&self, x: f64) -> Option<f64> {
        if !(x > 0.0) || !x.is_finite() {
            return match self {
                Self::PointMass { .. } => None,
                _ => Some(f64::NEG_INFINITY),
            };
        }
        let lx = x.ln();
        let v = match *self {
            Self::PointMass { .. } => return None,
            Self::Gamma { shape } => (shape - 1.0) * lx - x - ln_gamma_unchecked(shape),
            Self::InverseGamma { shape } => -(shape + 1.0) * lx - 1.0 / x - ln_gamma_unchecked(shape),
            Self::GenInvGammaT { nu } => {
                // R = sqrt(c / G), G ~ Gamma(a), a = c = nu/2
                let a = 0.5 * nu;
                let g = a / (x * x);
                (a - 1.0) * g.ln() - g - ln_gamma_unchecked(a) + (2.0 * a).ln() - 3.0 * lx
            }
            Self::KProduct { d, alpha } => {
                let df = d as f64;
                std::f64::consts::LN_2 - ln_gamma_unchecked(df) - ln_gamma_unchecked(alpha)
                    + (0.5 * (alpha + df) - 1.0) * lx
                    + ln_bessel_k(df - alpha, 2.0 * x.sqrt()).unwrap_or(f64::NAN)
            }
            Self::Dagum { alpha, beta, sigma } => {
                let lz = -alpha * (x / sigma).ln();
                let z = lz.exp();
                (alpha * beta).ln() - lx + lz - (beta + 1.0) * z.ln_1p()
            }
            Self::PositiveWeibull { alpha } => alpha.ln() + (alpha - 1.0) * lx - x.powf(alpha),
            Self::KotzRadial { n, beta, xi } => {
                let a = n / xi;
                (2.0 * xi).ln() + a * beta.ln() + (2.0 * n - 1.0) * lx
                    - beta * x.powf(2.0 * xi)
                    - ln_gamma_unchecked(a)
            }
        };
        Some(v)
    }

    pub fn density(&self, x: f64) -> Option<f64> {
        self.ln_density(x).map(f64::exp)
    }

    // ∫_0^x f, integrating 2t f(t^2) over t in [0, sqrt(x)].
    fn k_product_lower(&self, x: f64) -> f64 {
        let root = x.sqrt();
        let f = |t: f64| if t > 0.0 { 2.0 * t * self.density(t * t).unwrap_or(0.0) } else { 0.0 };
        integrate_lenient(f, &[0.0, root], &tight_spec(), 1e-8).unwrap_or(f64::NAN).clamp(0.0, 1.0)
    }

    fn k_product_upper(&self, x: f64) -> f64 {
        let root = x.sqrt();
        let f = |t: f64| 2.0 * t * self.density(t * t).unwrap_or(0.0);
        integrate_lenient(f, &[root, f64::INFINITY], &tight_spec(), 1e-8).unwrap_or(f64::NAN).clamp(0.0, 1.0)
    }

    /// Generalized inverse `inf{x : F(x) >= p}` for `p` in (0, 1).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(TailError::domain(format!("quantile needs p in (0, 1), got {p}")));
        }
        let q = match *self {
            Self::PointMass { r0 } => return Ok(r0),
            Self::Gamma { shape } => gamma_p_inv(shape, p)?,
            Self::InverseGamma { shape } => 1.0 / gamma_p_inv(shape, 1.0 - p)?,
            Self::GenInvGammaT { nu } => {
                let a = 0.5 * nu;
                (a / gamma_p_inv(a, 1.0 - p)?).sqrt()
            }
            Self::KProduct { .. } => self.numeric_quantile(p)?,
            Self::Dagum { alpha, beta, sigma } => sigma * (-p.ln() / beta).exp_m1().powf(-1.0 / alpha),
            Self::PositiveWeibull { alpha } => (-(-p).ln_1p()).powf(1.0 / alpha),
            Self::KotzRadial { n, beta, xi } => (gamma_p_inv(n / xi, p)? / beta).powf(0.5 / xi),
        };
        Ok(self.nudge_up(q, p))
    }

    // Solve on the log scale of the smaller tail.
    fn numeric_quantile(&self, p: f64) -> Result<f64> {
        let hi = match *self {
            Self::KProduct { d, alpha } => d as f64 * alpha,
            _ => 1.0,
        };
        if p <= 0.5 {
            invert_monotone(|x| self.log_cdf(x), p.ln(), 0.0, hi, 1e-13)
        } else {
            invert_monotone(|x| self.log_survival(x), (-p).ln_1p(), 0.0, hi, 1e-13)
        }
    }

    // Enforce F(q) >= p in the face of rounding.
    fn nudge_up(&self, q: f64, p: f64) -> f64 {
        let mut q = q;
        for _ in 0..64 {
            if self.cdf(q) >= p {
                return q;
            }
            q = if q == 0.0 { f64::MIN_POSITIVE } else { q * (1.0 + 4.0 * f64::EPSILON) };
        }
        q
    }

    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::PointMass { r0 } => r0,
            Self::Gamma { shape } => gamma_draw(rng, shape),
            Self::InverseGamma { shape } => 1.0 / gamma_draw(rng, shape),
            Self::GenInvGammaT { nu } => {
                let a = 0.5 * nu;
                (a / gamma_draw(rng, a)).sqrt()
            }
            Self::KProduct { d, alpha } => gamma_draw(rng, d as f64) * gamma_draw(rng, alpha),
            Self::Dagum { alpha, beta, sigma } => {
                let u: f64 = open_unit(rng);
                sigma * (-u.ln() / beta).exp_m1().powf(-1.0 / alpha)
            }
            Self::PositiveWeibull { alpha } => {
                let u: f64 = open_unit(rng);
                (-u.ln()).powf(1.0 / alpha)
            }
            Self::KotzRadial { n, beta, xi } => (gamma_draw(rng, n / xi) / beta).powf(0.5 / xi),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }

    /// `E[R]` when finite.
    pub fn mean(&self) -> Option<f64> {
        match *self {
            Self::PointMass { r0 } => Some(r0),
            Self::Gamma { shape } => Some(shape),
            Self::InverseGamma { shape } => (shape > 1.0).then(|| 1.0 / (shape - 1.0)),
            Self::GenInvGammaT { nu } => (nu > 1.0).then(|| {
                let a = 0.5 * nu;
                a.sqrt() * (ln_gamma_unchecked(a - 0.5) - ln_gamma_unchecked(a)).exp()
            }),
            Self::KProduct { d, alpha } => Some(d as f64 * alpha),
            Self::Dagum { alpha, beta, sigma } => {
                (alpha > 1.0).then(|| sigma * beta * ln_beta(beta + 1.0 / alpha, 1.0 - 1.0 / alpha).exp())
            }
            Self::PositiveWeibull { alpha } => Some(special::ln_gamma_unchecked(1.0 + 1.0 / alpha).exp()),
            Self::KotzRadial { n, beta, xi } => {
                let a = n / xi;
                let e = 0.5 / xi;
                Some(beta.powf(-e) * (ln_gamma_unchecked(a + e) - ln_gamma_unchecked(a)).exp())
            }
        }
    }

    /// Index `a` with `F ∈ RV_a(0+)`, when the lower tail is regularly varying.
    pub fn lower_tail_index(&self) -> Option<f64> {
        match *self {
            Self::PointMass { .. } | Self::InverseGamma { .. } | Self::GenInvGammaT { .. } => None,
            Self::Gamma { shape } => Some(shape),
            Self::KProduct { d, alpha } => Some(alpha.min(d as f64)),
            Self::Dagum { alpha, beta, .. } => Some(alpha * beta),
            Self::PositiveWeibull { alpha } => Some(alpha),
            Self::KotzRadial { n, .. } => Some(2.0 * n),
        }
    }

    pub fn upper_tail_class(&self) -> UpperTailClass {
        match *self {
            Self::PointMass { .. } => UpperTailClass::Bounded,
            Self::InverseGamma { shape } => UpperTailClass::RegularlyVarying { index: shape },
            Self::GenInvGammaT { nu } => UpperTailClass::RegularlyVarying { index: nu },
            Self::Dagum { alpha, .. } => UpperTailClass::RegularlyVarying { index: alpha },
            Self::Gamma { .. } | Self::KProduct { .. } | Self::PositiveWeibull { .. } | Self::KotzRadial { .. } => {
                UpperTailClass::GumbelMDA
            }
        }
    }

    /// Regular-variation index of the Gumbel auxiliary function `a(x)` as
    /// `x -> ∞`, for the Gumbel-domain families.
    pub fn aux_rv_index(&self) -> Option<f64> {
        match *self {
            Self::Gamma { .. } => Some(0.0),
            Self::PositiveWeibull { alpha } => Some(1.0 - alpha),
            Self::KotzRadial { xi, .. } => Some(1.0 - 2.0 * xi),
            Self::KProduct { .. } => Some(0.5),
            _ => None,
        }
    }

    /// Auxiliary function `a(x) = ∫_x^∞ F̄(t) dt / F̄(x)` of a Gumbel-domain law.
    pub fn gumbel_aux(&self, x: f64) -> Result<f64> {
        if self.upper_tail_class() != UpperTailClass::GumbelMDA {
            return Err(TailError::domain(format!("{self:?} is not in the Gumbel domain")));
        }
        if !(x > 0.0 && x.is_finite()) {
            return Err(TailError::EvaluationPoint(format!("gumbel_aux needs a positive finite x, got {x}")));
        }
        let base = self.log_survival(x);
        if !base.is_finite() {
            return Err(TailError::EvaluationPoint(format!("survival vanishes at x = {x}; use a smaller x")));
        }
        // a local decay-length guess keeps the tail map well scaled
        let h = (self.density(x).unwrap_or(0.0).ln() - base).exp();
        let h = if h.is_finite() && h > 0.0 { 1.0 / h } else { 1.0 };
        let spec = QuadratureSpec { abs_tol: 1e-300, rel_tol: 1e-11, max_subdivisions: 2000 };
        let v = integrate_with_breaks(|u| (self.log_survival(x + h * u) - base).exp(), &[0.0, 1.0, f64::INFINITY], &spec);
        let v = match v {
            Err(TailError::Accuracy { estimate, error }) if error < 1e-7 * estimate.abs() => estimate,
            other => other?,
        };
        Ok(h * v)
    }
}

pub(crate) fn gamma_draw<R: Rng + ?Sized>(rng: &mut R, shape: f64) -> f64 {
    // shape is validated positive by every caller
    Gamma::new(shape, 1.0).expect("positive gamma shape").sample(rng)
}

/// Uniform draw on the open interval (0, 1).
pub(crate) fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{fit_loglog_slope, integrate, log_grid};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn all_laws() -> Vec<RadialLaw> {
        vec![
            RadialLaw::gamma(0.7).unwrap(),
            RadialLaw::gamma(3.0).unwrap(),
            RadialLaw::inverse_gamma(1.5).unwrap(),
            RadialLaw::gen_inv_gamma_t(4.0).unwrap(),
            RadialLaw::k_product(2, 1.5).unwrap(),
            RadialLaw::k_product(3, 2.5).unwrap(),
            RadialLaw::dagum(0.6, 1.8, 1.0).unwrap(),
            RadialLaw::dagum(2.0, 0.7, 3.0).unwrap(),
            RadialLaw::positive_weibull(1.5).unwrap(),
            RadialLaw::kotz(1.0, 1.0, 1.0).unwrap(),
            RadialLaw::kotz(1.5, 2.0, 0.5).unwrap(),
        ]
    }

    fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn constructors_reject_bad_parameters() {
        assert!(RadialLaw::dagum(0.0, 1.0, 1.0).is_err());
        assert!(RadialLaw::k_product(1, 1.0).is_err());
        assert!(RadialLaw::kotz(1.0, -1.0, 1.0).is_err());
        assert!(RadialLaw::point_mass(f64::NAN).is_err());
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(RadialLaw::dagum(1.0, 1.0, 1.0).unwrap().cdf(1.0), 0.5);
        let pm = RadialLaw::point_mass(2.0).unwrap();
        assert_eq!((pm.cdf(1.9), pm.cdf(2.0)), (0.0, 1.0));
        let kotz = RadialLaw::kotz(1.0, 1.0, 1.0).unwrap();
        let oracle = integrate(|t| 2.0 * t * (-t * t).exp(), 0.0, 1.0, &QuadratureSpec::default()).unwrap();
        assert_relative_eq!(kotz.cdf(1.0), oracle, max_relative = 1e-12);
        assert_relative_eq!(kotz.cdf(1.0), 1.0 - (-1.0f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn survival_examples() {
        let w = RadialLaw::positive_weibull(1.7).unwrap();
        for x in [0.1, 1.0, 4.0, 20.0] {
            assert_relative_eq!(w.survival(x), (-x.powf(1.7)).exp(), max_relative = 1e-15);
        }
        assert_relative_eq!(RadialLaw::gamma(1.0).unwrap().survival(3.0), (-3.0f64).exp(), max_relative = 1e-14);
        let k = RadialLaw::kotz(2.0, 1.5, 0.8).unwrap();
        let a: f64 = 2.0 / 0.8;
        for x in [0.5f64, 1.3, 3.0] {
            let w = 1.5 * x.powf(1.6);
            let g = crate::numerics::upper_incomplete_gamma(a, w).unwrap() / crate::numerics::log_gamma(a).unwrap().exp();
            assert_relative_eq!(k.survival(x), g, max_relative = 1e-10);
        }
    }

    #[test]
    fn cdf_plus_survival_is_one() {
        for law in all_laws() {
            let s = law.scale();
            for m in [0.05, 0.3, 1.0, 2.0, 5.0] {
                let x = m * s;
                assert!((law.cdf(x) + law.survival(x) - 1.0).abs() < 1e-12, "{law:?} at {x}");
            }
        }
    }

    #[test]
    fn densities_integrate_to_cdf() {
        for law in all_laws() {
            let s = law.scale();
            let (a, b) = (0.5 * s, 2.0 * s);
            let mass = integrate(|x| law.density(x).unwrap(), a, b, &QuadratureSpec::with_tolerance(1e-12)).unwrap();
            assert!((mass - (law.cdf(b) - law.cdf(a))).abs() < 1e-9, "{law:?}: {mass}");
        }
    }

    #[test]
    fn quantile_examples() {
        assert_relative_eq!(RadialLaw::dagum(1.0, 1.0, 1.0).unwrap().quantile(0.5).unwrap(), 1.0, max_relative = 1e-14);
        let w = RadialLaw::positive_weibull(2.0).unwrap();
        assert_relative_eq!(w.quantile(1.0 - (-1.0f64).exp()).unwrap(), 1.0, max_relative = 1e-14);
        assert!(w.quantile(0.0).is_err());
        assert!(w.quantile(1.0).is_err());
    }

    #[test]
    fn k_product_median_matches_monte_carlo() {
        let law = RadialLaw::k_product(2, 1.5).unwrap();
        let q = law.quantile(0.5).unwrap();
        assert!((law.cdf(q) - 0.5).abs() < 1e-10);
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let n = 1_000_000;
        let below = (0..n).filter(|_| law.sample_one(&mut rng) <= q).count() as f64 / n as f64;
        // binomial standard error at p = 1/2
        let se = 0.5 / (n as f64).sqrt();
        assert!((below - 0.5).abs() < 3.0 * se, "{below}");
    }

    #[test]
    fn generalized_inverse_property() {
        for law in all_laws() {
            let scale = law.scale();
            for p in [1e-6, 0.01, 0.25, 0.5, 0.9, 0.999] {
                let q = law.quantile(p).unwrap();
                assert!(law.cdf(q) >= p, "{law:?} p={p}");
                // compare on the side of the smaller tail, where rounding leaves room
                if p <= 0.5 {
                    assert!(law.cdf(q - 1e-9 * scale) < p, "{law:?} p={p}");
                } else {
                    assert!(law.survival(q - 1e-9 * scale) > 1.0 - p, "{law:?} p={p}");
                }
            }
        }
    }

    #[test]
    fn samplers_match_cdfs() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let pm = RadialLaw::point_mass(2.0).unwrap();
        assert_eq!(pm.sample(&mut rng, 5), vec![2.0; 5]);
        let n = 100_000;
        for law in all_laws() {
            let xs = law.sample(&mut rng, n);
            let d = ks_statistic(xs, |x| law.cdf(x));
            assert!(d <= 0.01, "{law:?}: KS {d}");
        }
    }

    #[test]
    fn sample_means_match() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let n = 100_000;
        for law in all_laws() {
            let Some(mu) = law.mean() else { continue };
            let xs = law.sample(&mut rng, n);
            let m = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            let se = (var / n as f64).sqrt();
            // heavy-tailed laws with infinite variance are skipped
            let finite_var = match law {
                RadialLaw::InverseGamma { shape } => shape > 2.0,
                RadialLaw::GenInvGammaT { nu } => nu > 2.0,
                RadialLaw::Dagum { alpha, .. } => alpha > 2.0,
                _ => true,
            };
            if finite_var {
                assert!((m - mu).abs() < 4.0 * se, "{law:?}: {m} vs {mu}");
            }
        }
    }

    #[test]
    fn lower_tail_indices() {
        assert_relative_eq!(RadialLaw::dagum(0.6, 1.8, 1.0).unwrap().lower_tail_index().unwrap(), 1.08, max_relative = 1e-15);
        assert_eq!(RadialLaw::positive_weibull(1.5).unwrap().lower_tail_index(), Some(1.5));
        assert_eq!(RadialLaw::k_product(2, 1.5).unwrap().lower_tail_index(), Some(1.5));
        assert_eq!(RadialLaw::gen_inv_gamma_t(3.0).unwrap().lower_tail_index(), None);
        assert_eq!(RadialLaw::point_mass(1.0).unwrap().lower_tail_index(), None);
    }

    #[test]
    fn lower_tail_index_matches_cdf_slope() {
        for law in all_laws() {
            let Some(idx) = law.lower_tail_index() else { continue };
            let s = law.scale();
            let pts: Vec<_> = log_grid(1e-6 * s, 1e-3 * s, 20).into_iter().map(|x| (x, law.cdf(x))).collect();
            let fit = fit_loglog_slope(&pts).unwrap();
            assert!((fit.slope - idx).abs() < 0.02, "{law:?}: slope {}", fit.slope);
        }
    }

    #[test]
    fn upper_tail_classes() {
        assert_eq!(RadialLaw::gen_inv_gamma_t(4.0).unwrap().upper_tail_class(), UpperTailClass::RegularlyVarying { index: 4.0 });
        assert_eq!(RadialLaw::kotz(1.0, 1.0, 1.0).unwrap().upper_tail_class(), UpperTailClass::GumbelMDA);
        assert_eq!(RadialLaw::point_mass(1.0).unwrap().upper_tail_class(), UpperTailClass::Bounded);
        assert_eq!(RadialLaw::dagum(0.6, 1.8, 1.0).unwrap().upper_tail_class(), UpperTailClass::RegularlyVarying { index: 0.6 });
    }

    #[test]
    fn gumbel_aux_examples() {
        let e = RadialLaw::gamma(1.0).unwrap();
        for x in [0.5, 3.0, 40.0] {
            assert_relative_eq!(e.gumbel_aux(x).unwrap(), 1.0, max_relative = 1e-9);
        }
        let k = RadialLaw::kotz(1.0, 1.0, 1.0).unwrap();
        assert!((k.gumbel_aux(10.0).unwrap() / 0.05 - 1.0).abs() < 0.05);
        let k = RadialLaw::kotz(1.0, 1.0, 0.5).unwrap();
        let pts: Vec<_> = log_grid(1e2, 1e4, 10).into_iter().map(|x| (x, k.gumbel_aux(x).unwrap())).collect();
        assert!(fit_loglog_slope(&pts).unwrap().slope.abs() < 0.05);
        assert!(RadialLaw::dagum(1.0, 1.0, 1.0).unwrap().gumbel_aux(1.0).is_err());
    }

    #[test]
    fn log_survival_in_far_tail() {
        let k = RadialLaw::kotz(1.0, 1.0, 2.0).unwrap();
        // survival = Q(1/2, x^4) ~ exp(-w) / sqrt(pi w)
        let w = 50f64.powi(4);
        let asymptotic = -w - 0.5 * (std::f64::consts::PI * w).ln();
        assert!((k.log_survival(50.0) - asymptotic).abs() < 1e-6);
        assert_eq!(k.survival(50.0), 0.0);
    }
}
