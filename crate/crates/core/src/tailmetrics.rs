//! Tail-order catalog and estimators.

use serde::Serialize;

use crate::copulas::{diagonal, ev_lower_tail_order, ev_upper_lambda, survival_diagonal, CopulaModel, PickandsFn};
use crate::error::{Result, TailError};
use crate::generators::Generator;
use crate::numerics::{fit_loglog_slope, log_grid};
use crate::radial::{RadialLaw, UpperTailClass};
use crate::sampling::{empirical_copula_diagonal, SampleMatrix, Side};

/// Log-spaced grid of `u` values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl UGrid {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo > 0.0 && lo < hi && hi < 1.0) || points < 5 {
            return Err(TailError::domain(format!(
                "grid needs 0 < lo < hi < 1 and at least 5 points (lo={lo}, hi={hi}, points={points})"
            )));
        }
        Ok(Self { lo, hi, points })
    }

    /// 20 points on `[1e-6, 1e-3]`.
    pub fn analytic() -> Self {
        Self { lo: 1e-6, hi: 1e-3, points: 20 }
    }

    /// 10 points on `[5e-3, 5e-2]`.
    pub fn monte_carlo() -> Self {
        Self { lo: 5e-3, hi: 5e-2, points: 10 }
    }

    pub fn values(&self) -> Vec<f64> {
        log_grid(self.lo, self.hi, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimationMethod {
    AnalyticDiagonal,
    MonteCarlo,
    MdaRatio,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailOrderEstimate {
    /// Slope clamped to `[1, d]`.
    pub kappa: f64,
    /// Unclamped regression slope.
    pub raw_slope: f64,
    pub stderr: f64,
    pub side: Side,
    pub lambda: Option<f64>,
    pub eta: f64,
    pub chi_bar: f64,
    pub grid: UGrid,
    /// Grid points that entered the fit.
    pub points_used: usize,
    pub method: EstimationMethod,
}

/// `(η, χ̄) = (1/κ, 2/κ - 1)`.
pub fn derived_measures(kappa: f64) -> Result<(f64, f64)> {
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(TailError::domain(format!("tail order must be >= 1, got {kappa}")));
    }
    Ok((1.0 / kappa, 2.0 / kappa - 1.0))
}

/// Log-log regression of a diagonal probability on `u`.
///
/// Points where the diagonal is zero are dropped with a warning; fewer than
/// five survivors is an error.
pub fn estimate_tail_order_diagonal<F>(
    diag: F,
    side: Side,
    grid: &UGrid,
    d: u32,
    method: EstimationMethod,
) -> Result<TailOrderEstimate>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut pts = Vec::with_capacity(grid.points);
    for u in grid.values() {
        let p = diag(u)?;
        if p > 0.0 {
            pts.push((u, p));
        } else {
            log::warn!("diagonal is zero at u = {u:e}; dropping the point from the fit");
        }
    }
    if pts.len() < 5 {
        return Err(TailError::Estimation(format!(
            "only {} grid points have a positive diagonal; need at least 5",
            pts.len()
        )));
    }
    let fit = fit_loglog_slope(&pts)?;
    let kappa = fit.slope.clamp(1.0, d as f64);
    let (eta, chi_bar) = derived_measures(kappa)?;
    Ok(TailOrderEstimate {
        kappa,
        raw_slope: fit.slope,
        stderr: fit.slope_stderr,
        side,
        lambda: None,
        eta,
        chi_bar,
        grid: *grid,
        points_used: pts.len(),
        method,
    })
}

/// Diagonal regression on a model with a closed-form or quadrature diagonal.
pub fn estimate_tail_order_analytic(model: &CopulaModel, side: Side, grid: &UGrid) -> Result<TailOrderEstimate> {
    if !model.has_analytic_diagonal() {
        return Err(TailError::Unsupported(format!(
            "{model:?} has no analytic diagonal; use the Monte Carlo estimator"
        )));
    }
    let d = model.dim();
    match side {
        Side::Lower => estimate_tail_order_diagonal(|u| diagonal(model, u), side, grid, d, EstimationMethod::AnalyticDiagonal),
        Side::Upper => {
            estimate_tail_order_diagonal(|u| survival_diagonal(model, u), side, grid, d, EstimationMethod::AnalyticDiagonal)
        }
    }
}

/// Diagonal regression on the empirical copula of a sample.
pub fn estimate_tail_order_mc(samples: &SampleMatrix, side: Side, grid: &UGrid) -> Result<TailOrderEstimate> {
    let u = samples.to_uniform();
    estimate_tail_order_diagonal(
        |v| empirical_copula_diagonal(&u, v, side),
        side,
        grid,
        u.ncols() as u32,
        EstimationMethod::MonteCarlo,
    )
}

/// Mean of `diag(u)/u` over the three smallest grid points with a nonzero diagonal.
pub fn estimate_lambda<F>(diag: F, grid: &UGrid) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut ratios = Vec::with_capacity(3);
    for u in grid.values() {
        let p = diag(u)?;
        if p > 0.0 {
            ratios.push(p / u);
            if ratios.len() == 3 {
                break;
            }
        }
    }
    if ratios.is_empty() {
        return Err(TailError::Estimation("diagonal vanishes on the whole grid".into()));
    }
    Ok(ratios.iter().sum::<f64>() / ratios.len() as f64)
}

/// `ln F̄(b r) / ln F̄(r)` with `b = √(d / (1 + (d-1)ρ))`.
pub fn mda_gumbel_tail_order(law: &RadialLaw, rho: f64, d: u32, r: f64) -> Result<f64> {
    if law.upper_tail_class() != UpperTailClass::GumbelMDA {
        return Err(TailError::domain(format!("{law:?} is not in the Gumbel domain of attraction")));
    }
    if d < 2 {
        return Err(TailError::domain(format!("dimension must be >= 2, got {d}")));
    }
    let lower_rho = -1.0 / (d as f64 - 1.0);
    if !(rho > lower_rho && rho <= 1.0) {
        return Err(TailError::domain(format!("correlation must lie in ({lower_rho}, 1], got {rho}")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(TailError::EvaluationPoint(format!("evaluation point must be positive and finite, got {r}")));
    }
    let b = (d as f64 / (1.0 + (d as f64 - 1.0) * rho)).sqrt();
    let (num, den) = (law.log_survival(b * r), law.log_survival(r));
    if !num.is_finite() || !den.is_finite() {
        return Err(TailError::EvaluationPoint(format!(
            "radial survival underflows at r = {r}; try a smaller evaluation point"
        )));
    }
    let threshold = 1e-4f64.ln();
    if den > threshold || num > threshold {
        return Err(TailError::EvaluationPoint(format!(
            "radial survival at r = {r} is not below 1e-4; try a larger evaluation point"
        )));
    }
    Ok(num / den)
}

/// Closed-form tail quantities of a model; unknown fields stay `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub model: String,
    pub kappa_lower: Option<f64>,
    pub kappa_upper: Option<f64>,
    pub lambda_lower: Option<f64>,
    pub lambda_upper: Option<f64>,
    /// `sup{m ≥ 0 : E[H^m] < ∞}` for the frailty `H`.
    pub moment_index: Option<f64>,
    pub note: String,
}

impl CatalogEntry {
    fn new(model: &CopulaModel, note: impl Into<String>) -> Self {
        Self {
            model: format!("{model:?}"),
            kappa_lower: None,
            kappa_upper: None,
            lambda_lower: None,
            lambda_upper: None,
            moment_index: None,
            note: note.into(),
        }
    }

    pub fn kappa(&self, side: Side) -> Option<f64> {
        match side {
            Side::Lower => self.kappa_lower,
            Side::Upper => self.kappa_upper,
        }
    }

    pub fn lambda(&self, side: Side) -> Option<f64> {
        match side {
            Side::Lower => self.lambda_lower,
            Side::Upper => self.lambda_upper,
        }
    }
}

fn clamp_order(k: f64, d: u32) -> f64 {
    k.clamp(1.0, d as f64)
}

/// Tail orders known in closed form for `model`.
pub fn tail_order_catalog(model: &CopulaModel) -> CatalogEntry {
    let d = model.dim();
    let df = d as f64;
    match *model {
        CopulaModel::Independence { .. } => CatalogEntry {
            kappa_lower: Some(df),
            kappa_upper: Some(df),
            ..CatalogEntry::new(model, "independence: u^d on both corners")
        },
        CopulaModel::Comonotone { .. } => CatalogEntry {
            kappa_lower: Some(1.0),
            kappa_upper: Some(1.0),
            lambda_lower: Some(1.0),
            lambda_upper: Some(1.0),
            ..CatalogEntry::new(model, "comonotone: diagonal equals u")
        },
        CopulaModel::GaussianBiv { rho } => {
            if rho >= 0.0 {
                let k = 2.0 / (1.0 + rho);
                CatalogEntry {
                    kappa_lower: Some(k),
                    kappa_upper: Some(k),
                    ..CatalogEntry::new(model, "Gaussian: 2/(1+rho) on both corners")
                }
            } else {
                CatalogEntry::new(model, "Gaussian with rho < 0: the order 2/(1+rho) exceeds d and is not reported")
            }
        }
        CopulaModel::StudentBiv { .. } => CatalogEntry {
            kappa_lower: Some(1.0),
            kappa_upper: Some(1.0),
            ..CatalogEntry::new(model, "Student t: usual tail dependence on both corners")
        },
        CopulaModel::KotzBiv { rho, xi, .. } => {
            if rho >= 0.0 {
                let k = clamp_order((2.0 / (1.0 + rho)).powf(xi), d);
                CatalogEntry {
                    kappa_lower: Some(k),
                    kappa_upper: Some(k),
                    ..CatalogEntry::new(model, "symmetric Kotz: [2/(1+rho)]^xi on both corners")
                }
            } else {
                CatalogEntry::new(model, "Kotz with rho < 0 is not cataloged")
            }
        }
        CopulaModel::ExtremeValue(a) => ev_entry(model, &a),
        CopulaModel::Archimedean { generator, .. } => archimedean_entry(model, &generator, d),
    }
}

fn ev_entry(model: &CopulaModel, a: &PickandsFn) -> CatalogEntry {
    let d = a.dim();
    let kl = ev_lower_tail_order(a);
    let mut e = CatalogEntry { kappa_lower: Some(kl), ..CatalogEntry::new(model, "extreme value: kappa_L = A(1,...,1)") };
    if kl == 1.0 {
        e.lambda_lower = Some(1.0);
    }
    match ev_upper_lambda(a) {
        Ok(l) if l > 1e-12 => {
            e.kappa_upper = Some(1.0);
            e.lambda_upper = Some(l.min(1.0));
        }
        Ok(_) if kl == d as f64 => e.kappa_upper = Some(d as f64),
        _ => {}
    }
    e
}

fn archimedean_entry(model: &CopulaModel, generator: &Generator, d: u32) -> CatalogEntry {
    let df = d as f64;
    match *generator {
        Generator::Gumbel { theta } => {
            // the Gumbel copula is also the logistic extreme-value copula
            let a = PickandsFn::Logistic { theta, d };
            let mut e = ev_entry(model, &a);
            e.note = "Gumbel: kappa_L = d^(1/theta); upper corner from the logistic extreme-value form".into();
            e.moment_index = if theta == 1.0 { None } else { Some(1.0 / theta) };
            e
        }
        Generator::Acig { alpha } => CatalogEntry {
            kappa_lower: Some(df.sqrt()),
            kappa_upper: Some(clamp_order(alpha, d)),
            moment_index: Some(alpha),
            ..CatalogEntry::new(model, "ACIG: kappa_U = max(1, min(alpha, d)), kappa_L = sqrt(d)")
        },
        Generator::Joe2000 { alpha } => CatalogEntry {
            kappa_lower: Some(df.powf(alpha)),
            kappa_upper: Some(clamp_order(1.0 + alpha, d)),
            moment_index: Some(1.0 + alpha),
            ..CatalogEntry::new(model, "Joe2000: kappa_U = 1 + alpha, kappa_L = d^alpha")
        },
        Generator::Williamson(w) => {
            let law = w.law;
            let mut e = CatalogEntry::new(model, "scale mixture: kappa_U from the lower tail index of R");
            e.kappa_upper = law.lower_tail_index().map(|k| clamp_order(k, d));
            match law.upper_tail_class() {
                UpperTailClass::GumbelMDA => {
                    if let Some(beta) = law.aux_rv_index().filter(|b| *b > 0.0 && *b < 1.0) {
                        e.kappa_lower = Some(df.powf(1.0 - beta));
                        e.note.push_str("; kappa_L = d^(1-beta) from the auxiliary function index");
                    }
                }
                UpperTailClass::RegularlyVarying { index } => {
                    e.kappa_lower = Some(1.0);
                    if d == 2 {
                        e.lambda_lower = Some(2f64.powf(-index));
                        e.note.push_str("; regularly varying R: lambda_L = 2^(-alpha)");
                    }
                }
                UpperTailClass::Bounded => {}
            }
            e
        }
    }
}
