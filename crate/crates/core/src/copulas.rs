//! Copula models: cdf, diagonal and survival diagonal.

use serde::Serialize;

use crate::error::{Result, TailError};
use crate::generators::Generator;
use crate::numerics::normal::{normal_cdf, normal_pdf, normal_quantile, student_cdf, student_pdf, student_quantile};
use crate::numerics::quadrature::{integrate_lenient, QuadratureSpec};

/// Largest dimension accepted by inclusion–exclusion sums.
pub const MAX_INCLUSION_EXCLUSION_DIM: u32 = 20;

/// Pickands-type dependence function `A` of an extreme-value copula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PickandsFn {
    /// `A(x) = (Σ x_i^θ)^{1/θ}`.
    Logistic { theta: f64, d: u32 },
    /// `A(x) = Σ x_i` (independence).
    SumA { d: u32 },
    /// `A(x) = max x_i` (comonotonicity).
    MaxA { d: u32 },
}

impl PickandsFn {
    pub fn logistic(theta: f64, d: u32) -> Result<Self> {
        let a = Self::Logistic { theta, d };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d < 2 {
            return Err(TailError::domain(format!("dimension must be >= 2, got {d}")));
        }
        match *self {
            Self::Logistic { theta, .. } if !(theta >= 1.0 && theta.is_finite()) => {
                Err(TailError::domain(format!("logistic theta must be >= 1, got {theta}")))
            }
            _ => Ok(()),
        }
    }

    pub fn dim(&self) -> u32 {
        match *self {
            Self::Logistic { d, .. } | Self::SumA { d } | Self::MaxA { d } => d,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() as usize {
            return Err(TailError::domain(format!("A expects {} arguments, got {}", self.dim(), x.len())));
        }
        if x.iter().any(|&v| !(v >= 0.0)) {
            return Err(TailError::domain("A is defined on the nonnegative orthant"));
        }
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match *self {
            Self::SumA { .. } => x.iter().sum(),
            Self::MaxA { .. } => x.iter().copied().fold(0.0, f64::max),
            Self::Logistic { theta, .. } => {
                let m = x.iter().copied().fold(0.0, f64::max);
                if m == 0.0 || m.is_infinite() {
                    return m;
                }
                m * x.iter().map(|&v| (v / m).powf(theta)).sum::<f64>().powf(1.0 / theta)
            }
        }
    }

    /// `A_k(1,…,1)`: the `k`-dimensional margin restriction at the unit vector.
    pub fn at_ones(&self, k: u32) -> f64 {
        let k = k as f64;
        match *self {
            Self::SumA { .. } => k,
            Self::MaxA { .. } => 1.0,
            Self::Logistic { theta, .. } => k.powf(1.0 / theta),
        }
    }
}

/// A copula family with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CopulaModel {
    Archimedean { d: u32, generator: Generator },
    GaussianBiv { rho: f64 },
    StudentBiv { rho: f64, nu: f64 },
    /// Sampling only; no analytic cdf.
    KotzBiv { rho: f64, n: f64, beta: f64, xi: f64 },
    ExtremeValue(PickandsFn),
    Independence { d: u32 },
    Comonotone { d: u32 },
}

impl CopulaModel {
    /// Archimedean copula; the generator must pass the d-monotone spot check.
    pub fn archimedean(d: u32, generator: Generator) -> Result<Self> {
        if d < 2 {
            return Err(TailError::domain(format!("dimension must be >= 2, got {d}")));
        }
        generator.validate()?;
        generator.check_d_monotone(d)?;
        Ok(Self::Archimedean { d, generator })
    }

    pub fn gaussian(rho: f64) -> Result<Self> {
        check_rho(rho)?;
        Ok(Self::GaussianBiv { rho })
    }

    pub fn student(rho: f64, nu: f64) -> Result<Self> {
        check_rho(rho)?;
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(TailError::domain(format!("degrees of freedom must be > 0, got {nu}")));
        }
        Ok(Self::StudentBiv { rho, nu })
    }

    pub fn kotz(rho: f64, n: f64, beta: f64, xi: f64) -> Result<Self> {
        check_rho(rho)?;
        crate::radial::RadialLaw::kotz(n, beta, xi)?;
        Ok(Self::KotzBiv { rho, n, beta, xi })
    }

    pub fn extreme_value(a: PickandsFn) -> Result<Self> {
        a.validate()?;
        Ok(Self::ExtremeValue(a))
    }

    pub fn independence(d: u32) -> Result<Self> {
        check_dim(d)?;
        Ok(Self::Independence { d })
    }

    pub fn comonotone(d: u32) -> Result<Self> {
        check_dim(d)?;
        Ok(Self::Comonotone { d })
    }

    pub fn dim(&self) -> u32 {
        match *self {
            Self::Archimedean { d, .. } | Self::Independence { d } | Self::Comonotone { d } => d,
            Self::GaussianBiv { .. } | Self::StudentBiv { .. } | Self::KotzBiv { .. } => 2,
            Self::ExtremeValue(a) => a.dim(),
        }
    }

    /// True when `C(u·1)` and `Ĉ(u·1)` can be evaluated without simulation.
    pub fn has_analytic_diagonal(&self) -> bool {
        !matches!(self, Self::KotzBiv { .. })
    }

    fn unsupported(&self) -> TailError {
        TailError::Unsupported(format!(
            "{self:?} has no analytic cdf; estimate it by Monte Carlo from the sampling module"
        ))
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > -1.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(TailError::domain(format!("correlation must lie in (-1, 1), got {rho}")))
    }
}

fn check_dim(d: u32) -> Result<()> {
    if d >= 2 {
        Ok(())
    } else {
        Err(TailError::domain(format!("dimension must be >= 2, got {d}")))
    }
}

fn quad_spec() -> QuadratureSpec {
    QuadratureSpec { abs_tol: 1e-300, rel_tol: 1e-11, max_subdivisions: 2000 }
}

/// `C(u)`.
pub fn copula_cdf(model: &CopulaModel, u: &[f64]) -> Result<f64> {
    let d = model.dim() as usize;
    if u.len() != d {
        return Err(TailError::domain(format!("expected {d} coordinates, got {}", u.len())));
    }
    if u.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(TailError::domain(format!("coordinates must lie in [0, 1], got {u:?}")));
    }
    if let CopulaModel::KotzBiv { .. } = model {
        return Err(model.unsupported());
    }
    if u.iter().any(|&v| v == 0.0) {
        return Ok(0.0);
    }
    // drop unit coordinates: the margins are uniform
    let active: Vec<f64> = u.iter().copied().filter(|&v| v < 1.0).collect();
    match active.len() {
        0 => return Ok(1.0),
        1 => return Ok(active[0]),
        _ => {}
    }
    let c = match *model {
        CopulaModel::Independence { .. } => active.iter().product(),
        CopulaModel::Comonotone { .. } => active.iter().copied().fold(1.0, f64::min),
        CopulaModel::ExtremeValue(a) => {
            let x: Vec<f64> = u.iter().map(|&v| -v.ln()).collect();
            (-a.eval_unchecked(&x)).exp()
        }
        CopulaModel::Archimedean { generator, .. } => {
            let mut s = 0.0;
            for &v in &active {
                s += generator.psi_inverse(v)?;
            }
            generator.psi(s)?
        }
        CopulaModel::GaussianBiv { rho } => gaussian_cdf(rho, u[0], u[1])?,
        CopulaModel::StudentBiv { rho, nu } => student_biv_cdf(rho, nu, u[0], u[1])?,
        CopulaModel::KotzBiv { .. } => unreachable!(),
    };
    let lower = (active.iter().sum::<f64>() - active.len() as f64 + 1.0).max(0.0);
    let upper = active.iter().copied().fold(1.0, f64::min);
    Ok(c.clamp(lower, upper))
}

fn tail_breaks(start: f64) -> Vec<f64> {
    let mut pts = vec![start];
    pts.extend([-8.0, -4.0, -2.0, 0.0, 2.0, 4.0, 8.0].into_iter().filter(|&b| b > start));
    pts.push(f64::INFINITY);
    pts
}

// C(u, v) = ∫_{-∞}^{y} Φ((x - ρt)/√(1-ρ²)) φ(t) dt, integrated in -t.
fn gaussian_cdf(rho: f64, u: f64, v: f64) -> Result<f64> {
    if rho == 0.0 {
        return Ok(u * v);
    }
    let (x, y) = (normal_quantile(u), normal_quantile(v));
    let s = (1.0 - rho * rho).sqrt();
    integrate_lenient(|t| normal_cdf((x + rho * t) / s) * normal_pdf(t), &tail_breaks(-y), &quad_spec(), 1e-8)
}

// Given T2 = t, T1 is ρt plus a t_{ν+1} variable scaled by √((1-ρ²)(ν+t²)/(ν+1)).
fn student_biv_cdf(rho: f64, nu: f64, u: f64, v: f64) -> Result<f64> {
    let (x, y) = (student_quantile(u, nu), student_quantile(v, nu));
    let one_minus = 1.0 - rho * rho;
    let f = |t: f64| {
        // t here is -T2
        let scale = (one_minus * (nu + t * t) / (nu + 1.0)).sqrt();
        student_cdf((x + rho * t) / scale, nu + 1.0) * student_pdf(t, nu)
    };
    integrate_lenient(f, &tail_breaks(-y), &quad_spec(), 1e-8)
}

/// `C(u, …, u)`.
pub fn diagonal(model: &CopulaModel, u: f64) -> Result<f64> {
    check_open_unit(u)?;
    let d = model.dim();
    match *model {
        CopulaModel::KotzBiv { .. } => Err(model.unsupported()),
        CopulaModel::Independence { .. } => Ok(u.powi(d as i32)),
        CopulaModel::Comonotone { .. } => Ok(u),
        CopulaModel::ExtremeValue(a) => Ok(u.powf(a.at_ones(d))),
        CopulaModel::Archimedean { generator: Generator::Gumbel { theta }, .. } => {
            Ok(u.powf((d as f64).powf(1.0 / theta)))
        }
        CopulaModel::Archimedean { generator, .. } => {
            let s = generator.psi_inverse(u)?;
            generator.psi(d as f64 * s)
        }
        _ => copula_cdf(model, &vec![u; d as usize]),
    }
}

fn check_open_unit(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(TailError::domain(format!("u must lie in (0, 1), got {u}")))
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Ĉ(u·1) = C̄((1-u)·1)` by inclusion–exclusion over the margins.
///
/// Each term is formed as `1 - C_k((1-u)·1)` directly, so the sum keeps
/// relative precision as `u → 0`.
pub fn survival_diagonal(model: &CopulaModel, u: f64) -> Result<f64> {
    check_open_unit(u)?;
    let d = model.dim();
    if d > MAX_INCLUSION_EXCLUSION_DIM {
        return Err(TailError::CombinatorialBudget { d: d as usize });
    }
    // terms[k-1] = 1 - C_k((1-u)·1)
    let terms: Vec<f64> = match *model {
        CopulaModel::KotzBiv { .. } => return Err(model.unsupported()),
        CopulaModel::Independence { .. } => return Ok(u.powi(d as i32)),
        CopulaModel::Comonotone { .. } => return Ok(u),
        // radially symmetric
        CopulaModel::GaussianBiv { .. } | CopulaModel::StudentBiv { .. } => return diagonal(model, u),
        CopulaModel::ExtremeValue(a) => {
            let l = (-u).ln_1p();
            (1..=d).map(|k| -(a.at_ones(k) * l).exp_m1()).collect()
        }
        CopulaModel::Archimedean { generator, .. } => {
            let s = generator.psi_inverse_pair(1.0 - u, u)?;
            let mut out = vec![u];
            for k in 2..=d {
                out.push(generator.psi_complement(k as f64 * s)?);
            }
            out
        }
    };
    let mut pos = 0.0;
    let mut neg = 0.0;
    for (i, t) in terms.iter().enumerate() {
        let k = i as u32 + 1;
        let term = binomial(d, k) * t;
        if k % 2 == 1 {
            pos += term;
        } else {
            neg += term;
        }
    }
    Ok((pos - neg).clamp(0.0, u))
}

/// `κ_L = A(1,…,1)`.
pub fn ev_lower_tail_order(a: &PickandsFn) -> f64 {
    a.at_ones(a.dim())
}

/// Upper tail dependence parameter `d - Σ_{|I|≥2} (-1)^{|I|} A_I(1)`.
pub fn ev_upper_lambda(a: &PickandsFn) -> Result<f64> {
    let d = a.dim();
    if d > MAX_INCLUSION_EXCLUSION_DIM {
        return Err(TailError::CombinatorialBudget { d: d as usize });
    }
    let mut sum = d as f64;
    for k in 2..=d {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum -= sign * binomial(d, k) * a.at_ones(k);
    }
    Ok(sum.max(0.0))
}
