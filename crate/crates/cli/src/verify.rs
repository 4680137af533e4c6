//! Acceptance criteria as runnable checks.
//!
//! Targets are fixed constants; a [`Fixture`] only changes the model
//! parameters fed to each check, so a tampered fixture shows up as a failure.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use tailorder::copulas::{diagonal, CopulaModel, PickandsFn};
use tailorder::generators::{williamson_transform, Generator};
use tailorder::numerics::normal::normal_cdf;
use tailorder::numerics::{fit_loglog_slope, log_grid};
use tailorder::sampling::{
    empirical_copula, empirical_copula_diagonal, ks_critical, ks_statistic, sample_archimedean_frailty,
    sample_archimedean_scale_mixture, sample_copula, sample_simplex, sample_sphere, PositiveStable,
    ScaleMixtureSampler,
};
use tailorder::tailmetrics::{estimate_lambda, estimate_tail_order_analytic, estimate_tail_order_mc, mda_gumbel_tail_order};
use tailorder::{RadialLaw, RngStream, Side, UGrid};

use crate::commands::figure1_to_dir;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Quick,
    Full,
}

impl Suite {
    /// Monte Carlo sample size for the tail-order criteria.
    pub fn mc_size(self) -> usize {
        match self {
            Suite::Quick => 100_000,
            Suite::Full => 1_000_000,
        }
    }
}

/// Model parameters used by the criteria.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fixture {
    pub gaussian_rhos: [f64; 4],
    pub kotz_xis: [f64; 3],
    pub kotz_rho: f64,
    pub kotz_r: f64,
    /// (θ, d) pairs.
    pub ev_cases: [(f64, u32); 3],
    /// (d, α) pairs.
    pub acig_cross: [(u32, f64); 2],
    pub acig_alphas: [f64; 2],
    pub weibull_alpha: f64,
    /// Dagum (α, β).
    pub dagum: (f64, f64),
    pub joe2000_alpha: f64,
    pub gumbel_theta: f64,
}

impl Default for Fixture {
    fn default() -> Self {
        Self {
            gaussian_rhos: [0.0, 0.3, 0.5, 0.7],
            kotz_xis: [0.5, 1.0, 2.0],
            kotz_rho: 0.5,
            kotz_r: 50.0,
            ev_cases: [(1.0, 2), (2.0, 2), (2.0, 3)],
            acig_cross: [(2, 1.5), (3, 2.5)],
            acig_alphas: [1.5, 2.5],
            weibull_alpha: 1.5,
            dagum: (0.6, 1.8),
            joe2000_alpha: 0.5,
            gumbel_theta: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub target: f64,
    pub observed: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn near(label: impl Into<String>, target: f64, observed: f64, tolerance: f64) -> Self {
        Self { label: label.into(), target, observed, tolerance, passed: (observed - target).abs() <= tolerance }
    }

    /// `observed ≤ target`.
    fn at_most(label: impl Into<String>, target: f64, observed: f64) -> Self {
        Self { label: label.into(), target, observed, tolerance: 0.0, passed: observed <= target }
    }

    fn holds(label: impl Into<String>, ok: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        Self { label: label.into(), target: 1.0, observed: v, tolerance: 0.0, passed: ok }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub error: Option<String>,
    pub budget_secs: f64,
    pub duration_secs: f64,
}

impl CriterionResult {
    /// One-line summary, e.g. `PASS  3 ev-lower-order`.
    pub fn summary_line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut line = format!("{status} {:>2} {}", self.id, self.name);
        for c in self.checks.iter().filter(|c| !c.passed) {
            line.push_str(&format!(
                " | {}: observed {} target {} tol {}",
                c.label, c.observed, c.target, c.tolerance
            ));
        }
        if let Some(e) = &self.error {
            line.push_str(&format!(" | error: {e}"));
        }
        line
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub passed: bool,
    pub failed: Vec<String>,
    pub criteria: Vec<CriterionResult>,
}

/// Criterion ids with their names and runtime budgets in seconds.
pub const CRITERIA: [(u32, &str, f64); 12] = [
    (1, "gaussian-tail-order", 10.0),
    (2, "kotz-mda-ratio", 1.0),
    (3, "ev-lower-order", 1.0),
    (4, "acig-cross-construction", 30.0),
    (5, "acig-tail-orders", 30.0),
    (6, "weibull-mixture-upper-order", 120.0),
    (7, "dagum-lambda-and-upper-order", 180.0),
    (8, "figure1-reproduction", 60.0),
    (9, "joe2000-tail-orders", 10.0),
    (10, "sampler-invariants", 120.0),
    (11, "generator-invariants", 30.0),
    (12, "diagonal-ordering", 1.0),
];

type Checks = tailorder::Result<Vec<Check>>;

/// Run one criterion.
pub fn run_criterion(id: u32, fx: &Fixture, suite: Suite, seed: u64) -> CliResult<CriterionResult> {
    let (_, name, budget) = CRITERIA
        .iter()
        .copied()
        .find(|c| c.0 == id)
        .ok_or_else(|| CliError::Usage(format!("no acceptance criterion {id}")))?;
    let start = Instant::now();
    let rng = RngStream::new(seed, id as u64);
    let outcome: Checks = match id {
        1 => gaussian(fx),
        2 => kotz_ratio(fx),
        3 => ev_lower(fx),
        4 => acig_cross(fx),
        5 => acig_orders(fx),
        6 => weibull_upper(fx, suite, &rng),
        7 => dagum_mc(fx, suite, &rng),
        8 => figure1(seed),
        9 => joe2000(fx),
        10 => sampler_invariants(fx, &rng),
        11 => generator_invariants(fx),
        _ => ordering(fx),
    };
    let duration = start.elapsed().as_secs_f64();
    let (mut checks, error) = match outcome {
        Ok(c) => (c, None),
        Err(e) => (vec![], Some(e.to_string())),
    };
    checks.push(Check::at_most("runtime-secs", budget, duration));
    let passed = error.is_none() && checks.iter().all(|c| c.passed);
    Ok(CriterionResult { id, name: name.into(), passed, checks, error, budget_secs: budget, duration_secs: duration })
}

/// Run every criterion in order.
pub fn run_suite(fx: &Fixture, suite: Suite, seed: u64) -> CliResult<VerifyReport> {
    let mut criteria = vec![];
    for (id, _, _) in CRITERIA {
        let r = run_criterion(id, fx, suite, seed)?;
        log::info!("{}", r.summary_line());
        criteria.push(r);
    }
    let failed: Vec<String> = criteria.iter().filter(|c| !c.passed).map(|c| format!("{} {}", c.id, c.name)).collect();
    Ok(VerifyReport { suite, seed, passed: failed.is_empty(), failed, criteria })
}

fn gaussian(fx: &Fixture) -> Checks {
    let grid = UGrid::analytic();
    let mut out = vec![];
    for (rho_fx, rho) in fx.gaussian_rhos.iter().zip([0.0, 0.3, 0.5, 0.7]) {
        let m = CopulaModel::gaussian(*rho_fx)?;
        let e = estimate_tail_order_analytic(&m, Side::Lower, &grid)?;
        out.push(Check::near(format!("kappa rho={rho}"), 2.0 / (1.0 + rho), e.kappa, 0.1));
    }
    Ok(out)
}

fn kotz_ratio(fx: &Fixture) -> Checks {
    let mut out = vec![];
    for (xi_fx, xi) in fx.kotz_xis.iter().zip([0.5, 1.0, 2.0]) {
        let law = RadialLaw::kotz(1.0, 1.0, *xi_fx)?;
        let ratio = mda_gumbel_tail_order(&law, fx.kotz_rho, 2, fx.kotz_r)?;
        out.push(Check::near(format!("ratio xi={xi}"), (4.0f64 / 3.0).powf(xi), ratio, 0.01));
    }
    Ok(out)
}

fn ev_lower(fx: &Fixture) -> Checks {
    let grid = UGrid::analytic();
    let mut out = vec![];
    for (&(theta_fx, d_fx), (theta, d)) in fx.ev_cases.iter().zip([(1.0, 2u32), (2.0, 2), (2.0, 3)]) {
        let a = PickandsFn::logistic(theta_fx, d_fx)?;
        let target = (d as f64).powf(1.0 / theta);
        out.push(Check::near(format!("A(1) theta={theta} d={d}"), target, tailorder::copulas::ev_lower_tail_order(&a), 1e-12));
        let e = estimate_tail_order_analytic(&CopulaModel::extreme_value(a)?, Side::Lower, &grid)?;
        out.push(Check::near(format!("regression theta={theta} d={d}"), target, e.raw_slope, 1e-8));
    }
    Ok(out)
}

fn acig_cross(fx: &Fixture) -> Checks {
    let mut out = vec![];
    for &(d, alpha) in &fx.acig_cross {
        let acig = Generator::acig(alpha)?;
        let law = RadialLaw::k_product(d, alpha)?;
        let mut worst: f64 = 0.0;
        for s in log_grid(1e-3, 1e2, 20) {
            worst = worst.max((williamson_transform(law, d, s)? - acig.psi(s)?).abs());
        }
        out.push(Check::near(format!("max |diff| d={d} alpha={alpha}"), 0.0, worst, 1e-6));
    }
    Ok(out)
}

fn acig_orders(fx: &Fixture) -> Checks {
    let grid = UGrid::analytic();
    let mut out = vec![];
    for (alpha_fx, alpha) in fx.acig_alphas.iter().zip([1.5f64, 2.5]) {
        let m = CopulaModel::archimedean(2, Generator::acig(*alpha_fx)?)?;
        let up = estimate_tail_order_analytic(&m, Side::Upper, &grid)?;
        out.push(Check::near(format!("kappa_U alpha={alpha}"), alpha.min(2.0), up.kappa, 0.1));
        let lo = estimate_tail_order_analytic(&m, Side::Lower, &grid)?;
        out.push(Check::near(format!("kappa_L alpha={alpha}"), 2f64.sqrt(), lo.kappa, 0.1));
    }
    Ok(out)
}

fn weibull_upper(fx: &Fixture, suite: Suite, rng: &RngStream) -> Checks {
    let law = RadialLaw::positive_weibull(fx.weibull_alpha)?;
    let s = sample_archimedean_scale_mixture(law, 2, rng, suite.mc_size())?;
    let e = estimate_tail_order_mc(&s, Side::Upper, &UGrid::monte_carlo())?;
    Ok(vec![Check::near("kappa_U", 1.5, e.kappa, 0.2)])
}

fn dagum_mc(fx: &Fixture, suite: Suite, rng: &RngStream) -> Checks {
    let law = RadialLaw::dagum(fx.dagum.0, fx.dagum.1, 1.0)?;
    let s = sample_archimedean_scale_mixture(law, 2, rng, suite.mc_size())?;
    let grid = UGrid::monte_carlo();
    let lambda = estimate_lambda(|u| empirical_copula_diagonal(&s, u, Side::Lower), &grid)?;
    // The slowly varying factor is strong here; push the grid down to the
    // sample resolution (about 500 expected points at the lowest u).
    let n = suite.mc_size() as f64;
    let deep = UGrid::new((500.0 / n).min(grid.lo), (5000.0 / n).min(grid.hi), grid.points)?;
    let up = estimate_tail_order_mc(&s, Side::Upper, &deep)?;
    Ok(vec![
        Check::near("lambda_L", 2f64.powf(-0.6), lambda, 0.05),
        Check::near("kappa_U", 1.08, up.kappa, 0.2),
    ])
}

fn figure1(seed: u64) -> Checks {
    let io = |e: CliError| tailorder::TailError::Estimation(e.to_string());
    let dir_a = tempfile::tempdir().map_err(|e| io(e.into()))?;
    let dir_b = tempfile::tempdir().map_err(|e| io(e.into()))?;
    figure1_to_dir(dir_a.path(), seed).map_err(io)?;
    figure1_to_dir(dir_b.path(), seed).map_err(io)?;
    let mut out = vec![];
    let crit = 0.0365;
    for (file, normal) in [("dagum-simplex-unif.csv", false), ("dagum-simplex-norm.csv", true)] {
        let a = std::fs::read_to_string(dir_a.path().join(file)).map_err(|e| io(e.into()))?;
        let b = std::fs::read_to_string(dir_b.path().join(file)).map_err(|e| io(e.into()))?;
        out.push(Check::holds(format!("{file} deterministic"), a == b));
        let rows: Vec<Vec<f64>> = a.lines().skip(1).map(|l| l.split(',').filter_map(|v| v.parse().ok()).collect()).collect();
        out.push(Check::near(format!("{file} rows"), 2000.0, rows.len() as f64, 0.0));
        out.push(Check::holds(format!("{file} two columns"), rows.iter().all(|r| r.len() == 2)));
        for j in 0..2 {
            let col: Vec<f64> = rows.iter().filter_map(|r| r.get(j).copied()).collect();
            let ks = if normal { ks_statistic(&col, normal_cdf) } else { ks_statistic(&col, |x| x.clamp(0.0, 1.0)) };
            out.push(Check::at_most(format!("{file} KS column {}", j + 1), crit, ks));
        }
        if !normal {
            out.push(Check::holds(format!("{file} entries in [0,1]"), rows.iter().flatten().all(|v| (0.0..=1.0).contains(v))));
        }
    }
    Ok(out)
}

fn joe2000(fx: &Fixture) -> Checks {
    let grid = UGrid::analytic();
    let m = CopulaModel::archimedean(2, Generator::joe2000(fx.joe2000_alpha)?)?;
    let up = estimate_tail_order_analytic(&m, Side::Upper, &grid)?;
    let lo = estimate_tail_order_analytic(&m, Side::Lower, &grid)?;
    Ok(vec![
        Check::near("kappa_U", 1.5, up.kappa, 0.05),
        Check::near("kappa_L", 2f64.sqrt(), lo.kappa, 0.05),
    ])
}

fn sampler_invariants(fx: &Fixture, rng: &RngStream) -> Checks {
    const N: usize = 100_000;
    let crit = ks_critical(N);
    let mut out = vec![];
    let mut stream = 0;
    let mut next = || {
        stream += 1;
        rng.with_stream(rng.stream * 1000 + stream)
    };

    for d in [2usize, 3, 5] {
        let s = sample_simplex(&next(), d, N)?;
        let worst = s.rows().map(|r| (r.iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max);
        out.push(Check::at_most(format!("simplex d={d} row-sum error"), 1e-12, worst));
    }
    for d in [2usize, 3] {
        let s = sample_sphere(&next(), d, N)?;
        let worst = s.rows().map(|r| (r.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs()).fold(0.0, f64::max);
        out.push(Check::at_most(format!("sphere d={d} row-norm error"), 1e-12, worst));
    }

    let dagum = RadialLaw::dagum(fx.dagum.0, fx.dagum.1, 1.0)?;
    let weibull = RadialLaw::positive_weibull(fx.weibull_alpha)?;
    for (label, law, d) in [("dagum d=2", dagum, 2usize), ("weibull d=3", weibull, 3)] {
        let (u, simplex) = ScaleMixtureSampler::new(law, d)?.sample_with_simplex(&next(), N)?;
        for j in 0..d {
            let ks = ks_statistic(&u.column(j), |x| x.clamp(0.0, 1.0));
            out.push(Check::at_most(format!("scale mixture {label} margin {}", j + 1), crit, ks));
        }
        let dm1 = (d - 1) as i32;
        let ks = ks_statistic(&simplex.column(0), |x| 1.0 - (1.0 - x).powi(dm1));
        out.push(Check::at_most(format!("scale mixture {label} simplex margin"), crit, ks));
    }

    let gumbel = Generator::gumbel(fx.gumbel_theta)?;
    let acig = Generator::acig(fx.acig_alphas[0])?;
    let frailty_stable = sample_archimedean_frailty(&PositiveStable::new(1.0 / fx.gumbel_theta)?, &gumbel, 2, &next(), N)?;
    let frailty_ig = sample_archimedean_frailty(&RadialLaw::inverse_gamma(fx.acig_alphas[0])?, &acig, 2, &next(), N)?;
    let models = [
        ("gaussian", CopulaModel::gaussian(0.5)?),
        ("student", CopulaModel::student(0.5, 4.0)?),
        ("joe2000", CopulaModel::archimedean(2, Generator::joe2000(fx.joe2000_alpha)?)?),
    ];
    let mut uniform_sets = vec![("frailty positive-stable".to_string(), frailty_stable), ("frailty inverse-gamma".to_string(), frailty_ig.clone())];
    for (label, m) in models {
        uniform_sets.push((label.to_string(), sample_copula(&m, &next(), N)?));
    }
    for (label, s) in &uniform_sets {
        for j in 0..s.ncols() {
            let ks = ks_statistic(&s.column(j), |x| x.clamp(0.0, 1.0));
            out.push(Check::at_most(format!("{label} margin {}", j + 1), crit, ks));
        }
    }

    // frailty vs simplex representation of the same ACIG copula
    let mixture = sample_archimedean_scale_mixture(RadialLaw::k_product(2, fx.acig_alphas[0])?, 2, &next(), N)?;
    for a in [0.25, 0.5, 0.75] {
        for b in [0.25, 0.5, 0.75] {
            let p = empirical_copula(&frailty_ig, &[a, b])?;
            let q = empirical_copula(&mixture, &[a, b])?;
            let pooled = 0.5 * (p + q);
            let se = (2.0 * pooled * (1.0 - pooled) / N as f64).sqrt();
            out.push(Check::near(format!("frailty vs mixture C({a},{b})"), 0.0, p - q, 4.0 * se));
        }
    }
    Ok(out)
}

fn generator_invariants(fx: &Fixture) -> Checks {
    let dagum = RadialLaw::dagum(fx.dagum.0, fx.dagum.1, 1.0)?;
    let weibull = RadialLaw::positive_weibull(fx.weibull_alpha)?;
    let gens = [
        ("acig", Generator::acig(fx.acig_alphas[0])?),
        ("joe2000", Generator::joe2000(fx.joe2000_alpha)?),
        ("gumbel", Generator::gumbel(fx.gumbel_theta)?),
        ("williamson dagum", Generator::williamson(dagum, 2)?),
        ("williamson weibull", Generator::williamson(weibull, 2)?),
    ];
    let mut us: Vec<f64> = (1..=6).map(|k| 10f64.powi(-k)).collect();
    us.extend((1..10).map(|i| i as f64 / 10.0));
    us.extend((1..=6).map(|k| 1.0 - 10f64.powi(-k)));
    let mut out = vec![];
    for (label, g) in &gens {
        let mut worst: f64 = 0.0;
        for &u in &us {
            worst = worst.max((g.psi(g.psi_inverse(u)?)? - u).abs());
        }
        out.push(Check::at_most(format!("{label} round trip"), 1e-9, worst));
    }
    for (label, g) in &gens[3..] {
        let pts: Vec<(f64, f64)> =
            log_grid(1e-6, 1e-3, 20).into_iter().map(|s| Ok((s, g.psi_complement(s)?))).collect::<tailorder::Result<_>>()?;
        let slope = fit_loglog_slope(&pts)?.slope;
        out.push(Check::near(format!("{label} 1-psi slope"), 1.0, slope, 0.02));
    }
    Ok(out)
}

fn ordering(fx: &Fixture) -> Checks {
    let u = 1e-4;
    let co = diagonal(&CopulaModel::comonotone(2)?, u)?;
    let gu = diagonal(&CopulaModel::archimedean(2, Generator::gumbel(fx.gumbel_theta)?)?, u)?;
    let ind = diagonal(&CopulaModel::independence(2)?, u)?;
    Ok(vec![
        Check::holds("comonotone > gumbel", co > gu),
        Check::holds("gumbel > independence", gu > ind),
        Check::near("gumbel diagonal", u.powf(2f64.sqrt()), gu, 1e-12),
    ])
}
