//! Seeded samplers for the stochastic representations, plus empirical copulas.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::copulas::{CopulaModel, PickandsFn};
use crate::error::{Result, TailError};
use crate::generators::{Generator, WilliamsonGen};
use crate::numerics::normal::{normal_cdf, normal_quantile, student_cdf};
use crate::numerics::roots::invert_monotone;
use crate::numerics::special::{gamma_p, gamma_q, ln_gamma_unchecked};
use crate::radial::{open_unit, RadialLaw};

/// A seed plus a stream index; equal pairs give identical sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Another stream under the same seed.
    pub fn with_stream(&self, stream: u64) -> Self {
        Self { seed: self.seed, stream }
    }
}

/// How the entries of a [`SampleMatrix`] are scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MarginTag {
    Uniform,
    NormalScores,
    Raw,
}

/// Row-major `n × d` sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    n: usize,
    d: usize,
    data: Vec<f64>,
    pub margins: MarginTag,
}

impl SampleMatrix {
    pub fn new(n: usize, d: usize, data: Vec<f64>, margins: MarginTag) -> Result<Self> {
        if n == 0 || d < 2 || data.len() != n * d {
            return Err(TailError::domain(format!(
                "sample matrix needs n >= 1, d >= 2 and n*d entries (n={n}, d={d}, len={})",
                data.len()
            )));
        }
        if margins == MarginTag::Uniform && data.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(TailError::domain("uniform-tagged entries must lie in [0, 1]"));
        }
        Ok(Self { n, d, data, margins })
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Pseudo-observations `rank / (n + 1)`, column by column.
    pub fn rank_transform(&self) -> SampleMatrix {
        let mut out = vec![0.0; self.data.len()];
        let scale = 1.0 / (self.n as f64 + 1.0);
        for j in 0..self.d {
            let col = self.column(j);
            let mut idx: Vec<usize> = (0..self.n).collect();
            idx.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
            for (rank, &i) in idx.iter().enumerate() {
                out[i * self.d + j] = (rank + 1) as f64 * scale;
            }
        }
        SampleMatrix { n: self.n, d: self.d, data: out, margins: MarginTag::Uniform }
    }

    /// Uniform-tagged view: raw samples are rank-transformed, normal scores mapped back through Φ.
    pub fn to_uniform(&self) -> SampleMatrix {
        match self.margins {
            MarginTag::Uniform => self.clone(),
            MarginTag::Raw => self.rank_transform(),
            MarginTag::NormalScores => SampleMatrix {
                n: self.n,
                d: self.d,
                data: self.data.iter().map(|&z| crate::numerics::normal::normal_cdf(z)).collect(),
                margins: MarginTag::Uniform,
            },
        }
    }

    /// Standard normal scores of a uniform-tagged sample.
    pub fn to_normal_scores(&self) -> Result<SampleMatrix> {
        if self.margins != MarginTag::Uniform {
            return Err(TailError::domain("normal scores need uniform margins"));
        }
        let lo = f64::MIN_POSITIVE;
        let hi = 1.0 - f64::EPSILON / 2.0;
        let data = self.data.iter().map(|&u| normal_quantile(u.clamp(lo, hi))).collect();
        Ok(SampleMatrix { n: self.n, d: self.d, data, margins: MarginTag::NormalScores })
    }
}

/// A sampler of positive random variables.
pub trait RandomPositive {
    fn draw(&self, rng: &mut ChaCha20Rng) -> f64;
}

impl RandomPositive for RadialLaw {
    fn draw(&self, rng: &mut ChaCha20Rng) -> f64 {
        self.sample_one(rng)
    }
}

impl RandomPositive for crate::generators::FrailtyRadial {
    fn draw(&self, rng: &mut ChaCha20Rng) -> f64 {
        self.sample_one(rng)
    }
}

/// Product of two independent positive variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductLaw(pub RadialLaw, pub RadialLaw);

impl RandomPositive for ProductLaw {
    fn draw(&self, rng: &mut ChaCha20Rng) -> f64 {
        self.0.sample_one(rng) * self.1.sample_one(rng)
    }
}

/// Radial variable of the bivariate Student-t law with `nu` degrees of freedom.
pub fn student_radial(nu: f64) -> Result<ProductLaw> {
    Ok(ProductLaw(RadialLaw::gen_inv_gamma_t(nu)?, RadialLaw::chi2()))
}

/// Positive stable law with Laplace transform `exp(-s^alpha)`, 0 < alpha ≤ 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositiveStable {
    pub alpha: f64,
}

impl PositiveStable {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha <= 1.0 {
            Ok(Self { alpha })
        } else {
            Err(TailError::domain(format!("stable index must lie in (0, 1], got {alpha}")))
        }
    }
}

impl RandomPositive for PositiveStable {
    // Kanter's representation
    fn draw(&self, rng: &mut ChaCha20Rng) -> f64 {
        let a = self.alpha;
        if a == 1.0 {
            return 1.0;
        }
        let u = std::f64::consts::PI * open_unit(rng);
        let e: f64 = Exp1.sample(rng);
        let zolotarev = (a * u).sin().powf(a / (1.0 - a)) * ((1.0 - a) * u).sin() / u.sin().powf(1.0 / (1.0 - a));
        (zolotarev / e).powf((1.0 - a) / a)
    }
}

/// Radial law of the bivariate Joe2000 copula, `F(x) = 1 - ψ(x) + xψ'(x)`,
/// sampled by numeric inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Joe2000Radial {
    pub alpha: f64,
}

impl Joe2000Radial {
    pub fn new(alpha: f64) -> Result<Self> {
        Generator::joe2000(alpha)?;
        Ok(Self { alpha })
    }

    pub fn survival(&self, x: f64) -> f64 {
        let a = self.alpha;
        let w = x.powf(a);
        let psi = gamma_q(1.0 / a, w).unwrap_or(f64::NAN);
        psi + x * (-w - ln_gamma_unchecked(1.0 + 1.0 / a)).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let a = self.alpha;
        let w = x.powf(a);
        let comp = gamma_p(1.0 / a, w).unwrap_or(f64::NAN);
        comp - x * (-w - ln_gamma_unchecked(1.0 + 1.0 / a)).exp()
    }
}

impl RandomPositive for Joe2000Radial {
    fn draw(&self, rng: &mut ChaCha20Rng) -> f64 {
        let p = open_unit(rng);
        let r = if p < 0.5 {
            invert_monotone(|x| self.cdf(x).max(f64::MIN_POSITIVE).ln(), p.ln(), 0.0, 1.0, 1e-12)
        } else {
            invert_monotone(|x| self.survival(x).max(f64::MIN_POSITIVE).ln(), (-p).ln_1p(), 0.0, 1.0, 1e-12)
        };
        r.unwrap_or(f64::NAN)
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d >= 2 {
        Ok(())
    } else {
        Err(TailError::domain(format!("dimension must be >= 2, got {d}")))
    }
}

fn simplex_row(rng: &mut ChaCha20Rng, row: &mut [f64]) {
    let mut total = 0.0;
    for v in row.iter_mut() {
        *v = Exp1.sample(rng);
        total += *v;
    }
    for v in row.iter_mut() {
        *v /= total;
    }
}

/// Rows uniform on the unit simplex.
pub fn sample_simplex(rng: &RngStream, d: usize, n: usize) -> Result<SampleMatrix> {
    check_dim(d)?;
    let mut r = rng.rng();
    let mut data = vec![0.0; n * d];
    for row in data.chunks_exact_mut(d) {
        simplex_row(&mut r, row);
    }
    SampleMatrix::new(n, d, data, MarginTag::Raw)
}

fn sphere_row(rng: &mut ChaCha20Rng, row: &mut [f64]) {
    loop {
        let mut norm2 = 0.0;
        for v in row.iter_mut() {
            *v = StandardNormal.sample(rng);
            norm2 += *v * *v;
        }
        if norm2 > 0.0 {
            let inv = 1.0 / norm2.sqrt();
            row.iter_mut().for_each(|v| *v *= inv);
            return;
        }
    }
}

/// Rows uniform on the unit sphere.
pub fn sample_sphere(rng: &RngStream, d: usize, n: usize) -> Result<SampleMatrix> {
    check_dim(d)?;
    let mut r = rng.rng();
    let mut data = vec![0.0; n * d];
    for row in data.chunks_exact_mut(d) {
        sphere_row(&mut r, row);
    }
    SampleMatrix::new(n, d, data, MarginTag::Raw)
}

/// Number of nodes in the ψ table.
pub const PSI_TABLE_SIZE: usize = 4096;

/// Monotone piecewise-cubic table of `ψ` against `ln s`.
#[derive(Debug, Clone)]
struct PsiTable {
    t0: f64,
    h: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl PsiTable {
    fn build(gen: &WilliamsonGen, s_lo: f64, s_hi: f64) -> Result<Self> {
        let (t0, t1) = (s_lo.ln(), s_hi.ln());
        let m = PSI_TABLE_SIZE;
        let h = (t1 - t0) / (m - 1) as f64;
        let values: Vec<f64> = (0..m)
            .into_par_iter()
            .map(|i| gen.eval((t0 + i as f64 * h).exp()).map(|p| p.0))
            .collect::<Result<_>>()?;
        // Fritsch–Carlson slopes
        let delta: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]) / h).collect();
        let mut slopes = vec![0.0; m];
        slopes[0] = delta[0];
        slopes[m - 1] = delta[m - 2];
        for i in 1..m - 1 {
            slopes[i] = if delta[i - 1] * delta[i] <= 0.0 { 0.0 } else { 0.5 * (delta[i - 1] + delta[i]) };
        }
        for i in 0..m - 1 {
            if delta[i] == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            let a = slopes[i] / delta[i];
            let b = slopes[i + 1] / delta[i];
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                slopes[i] = tau * a * delta[i];
                slopes[i + 1] = tau * b * delta[i];
            }
        }
        Ok(Self { t0, h, values, slopes })
    }

    fn eval(&self, s: f64) -> Option<f64> {
        let x = (s.ln() - self.t0) / self.h;
        let last = (self.values.len() - 1) as f64;
        if !(x >= 0.0 && x <= last) {
            return None;
        }
        let i = (x.floor() as usize).min(self.values.len() - 2);
        let t = x - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.h, self.slopes[i + 1] * self.h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1;
        Some(v.clamp(y1.min(y0), y0.max(y1)))
    }
}

/// Scale-mixture sampler `X = R·S`, `U_j = ψ(X_j)` with ψ the Williamson
/// d-transform of the law of `R`.
#[derive(Debug, Clone)]
pub struct ScaleMixtureSampler {
    gen: WilliamsonGen,
    table: Option<PsiTable>,
}

impl ScaleMixtureSampler {
    pub fn new(law: RadialLaw, d: usize) -> Result<Self> {
        check_dim(d)?;
        let gen = WilliamsonGen::new(law, d as u32)?;
        let table = match law {
            // closed form already
            RadialLaw::PointMass { .. } => None,
            _ => Some(PsiTable::build(&gen, law.quantile(1e-7)?, law.quantile(1.0 - 1e-7)?)?),
        };
        Ok(Self { gen, table })
    }

    pub fn psi(&self, s: f64) -> Result<f64> {
        if let Some(v) = self.table.as_ref().and_then(|t| t.eval(s)) {
            return Ok(v);
        }
        Ok(self.gen.eval(s)?.0)
    }

    /// Uniform-margin sample together with the simplex coordinates behind it.
    pub fn sample_with_simplex(&self, rng: &RngStream, n: usize) -> Result<(SampleMatrix, SampleMatrix)> {
        let d = self.gen.d as usize;
        let mut r = rng.rng();
        let mut simplex = vec![0.0; n * d];
        let mut x = vec![0.0; n * d];
        for (srow, xrow) in simplex.chunks_exact_mut(d).zip(x.chunks_exact_mut(d)) {
            let radius = self.gen.law.sample_one(&mut r);
            simplex_row(&mut r, srow);
            for (xv, sv) in xrow.iter_mut().zip(srow.iter()) {
                *xv = radius * sv;
            }
        }
        let u: Vec<f64> = x.par_iter().map(|&s| self.psi(s)).collect::<Result<_>>()?;
        Ok((SampleMatrix::new(n, d, u, MarginTag::Uniform)?, SampleMatrix::new(n, d, simplex, MarginTag::Raw)?))
    }

    pub fn sample(&self, rng: &RngStream, n: usize) -> Result<SampleMatrix> {
        Ok(self.sample_with_simplex(rng, n)?.0)
    }
}

/// Archimedean copula sample through the simplex representation.
pub fn sample_archimedean_scale_mixture(law: RadialLaw, d: usize, rng: &RngStream, n: usize) -> Result<SampleMatrix> {
    ScaleMixtureSampler::new(law, d)?.sample(rng, n)
}

/// Archimedean copula sample through a frailty: given `H = h`,
/// `U_j = ψ(E_j / h)` with `E_j` i.i.d. unit exponentials.
///
/// `psi` must be the Laplace transform of `h_law`; this is not checked.
pub fn sample_archimedean_frailty<H: RandomPositive>(
    h_law: &H,
    psi: &Generator,
    d: usize,
    rng: &RngStream,
    n: usize,
) -> Result<SampleMatrix> {
    check_dim(d)?;
    let mut r = rng.rng();
    let mut x = vec![0.0; n * d];
    for row in x.chunks_exact_mut(d) {
        let h = h_law.draw(&mut r);
        for v in row.iter_mut() {
            let e: f64 = Exp1.sample(&mut r);
            *v = e / h;
        }
    }
    let u: Vec<f64> = x.par_iter().map(|&s| psi.psi(s)).collect::<Result<_>>()?;
    SampleMatrix::new(n, d, u, MarginTag::Uniform)
}

/// Simplex representation with an arbitrary radial sampler and its generator.
pub fn sample_archimedean_radial<L: RandomPositive>(
    radial: &L,
    psi: &Generator,
    d: usize,
    rng: &RngStream,
    n: usize,
) -> Result<SampleMatrix> {
    check_dim(d)?;
    let mut r = rng.rng();
    let mut x = vec![0.0; n * d];
    for row in x.chunks_exact_mut(d) {
        let radius = radial.draw(&mut r);
        simplex_row(&mut r, row);
        row.iter_mut().for_each(|v| *v *= radius);
    }
    let u: Vec<f64> = x.par_iter().map(|&s| psi.psi(s)).collect::<Result<_>>()?;
    SampleMatrix::new(n, d, u, MarginTag::Uniform)
}

/// Uniform-margin sample from any copula model.
///
/// Elliptical models with closed-form margins are mapped through their
/// marginal cdf; the Kotz model is rank-transformed.
pub fn sample_copula(model: &CopulaModel, rng: &RngStream, n: usize) -> Result<SampleMatrix> {
    let d = model.dim() as usize;
    match *model {
        CopulaModel::Independence { .. } => {
            let mut r = rng.rng();
            let data = (0..n * d).map(|_| open_unit(&mut r)).collect();
            SampleMatrix::new(n, d, data, MarginTag::Uniform)
        }
        CopulaModel::Comonotone { .. } => {
            let mut r = rng.rng();
            let data = (0..n).flat_map(|_| std::iter::repeat_n(open_unit(&mut r), d)).collect();
            SampleMatrix::new(n, d, data, MarginTag::Uniform)
        }
        CopulaModel::GaussianBiv { rho } => {
            let raw = sample_elliptical(rho, &RadialLaw::chi2(), rng, n)?;
            map_margins(&raw, normal_cdf)
        }
        CopulaModel::StudentBiv { rho, nu } => {
            let raw = sample_elliptical(rho, &student_radial(nu)?, rng, n)?;
            map_margins(&raw, |x| student_cdf(x, nu))
        }
        CopulaModel::KotzBiv { rho, n: kn, beta, xi } => {
            Ok(sample_elliptical(rho, &RadialLaw::kotz(kn, beta, xi)?, rng, n)?.rank_transform())
        }
        CopulaModel::ExtremeValue(a) => match a {
            PickandsFn::Logistic { theta, d } => {
                let g = Generator::gumbel(theta)?;
                sample_archimedean_frailty(&PositiveStable::new(1.0 / theta)?, &g, d as usize, rng, n)
            }
            PickandsFn::SumA { d } => sample_copula(&CopulaModel::Independence { d }, rng, n),
            PickandsFn::MaxA { d } => sample_copula(&CopulaModel::Comonotone { d }, rng, n),
        },
        CopulaModel::Archimedean { generator, .. } => match generator {
            Generator::Gumbel { theta } => {
                sample_archimedean_frailty(&PositiveStable::new(1.0 / theta)?, &generator, d, rng, n)
            }
            Generator::Acig { alpha } => {
                sample_archimedean_frailty(&RadialLaw::inverse_gamma(alpha)?, &generator, d, rng, n)
            }
            Generator::Joe2000 { alpha } if d == 2 => {
                sample_archimedean_radial(&Joe2000Radial::new(alpha)?, &generator, d, rng, n)
            }
            Generator::Joe2000 { .. } => Err(TailError::Unsupported(
                "the Joe2000 sampler is only available for d = 2".into(),
            )),
            Generator::Williamson(w) => ScaleMixtureSampler::new(w.law, d)?.sample(rng, n),
        },
    }
}

fn map_margins<F: Fn(f64) -> f64>(raw: &SampleMatrix, cdf: F) -> Result<SampleMatrix> {
    let data = raw.rows().flatten().map(|&x| cdf(x)).collect();
    SampleMatrix::new(raw.nrows(), raw.ncols(), data, MarginTag::Uniform)
}

/// Bivariate elliptical sample `R·A·U`, `A = [[1, 0], [ρ, √(1-ρ²)]]`.
pub fn sample_elliptical<L: RandomPositive>(rho: f64, radial: &L, rng: &RngStream, n: usize) -> Result<SampleMatrix> {
    if !(rho > -1.0 && rho < 1.0) {
        return Err(TailError::domain(format!("correlation must lie in (-1, 1), got {rho}")));
    }
    let c = (1.0 - rho * rho).sqrt();
    let mut r = rng.rng();
    let mut data = vec![0.0; 2 * n];
    let mut dir = [0.0; 2];
    for row in data.chunks_exact_mut(2) {
        let radius = radial.draw(&mut r);
        sphere_row(&mut r, &mut dir);
        row[0] = radius * dir[0];
        row[1] = radius * (rho * dir[0] + c * dir[1]);
    }
    SampleMatrix::new(n, 2, data, MarginTag::Raw)
}

/// Which corner of the unit cube a diagonal probability refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

/// Lower: fraction of rows with every coordinate ≤ u. Upper: every coordinate > 1 - u.
pub fn empirical_copula_diagonal(samples: &SampleMatrix, u: f64, side: Side) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(TailError::domain(format!("u must lie in (0, 1), got {u}")));
    }
    let owned;
    let s = if samples.margins == MarginTag::Uniform {
        samples
    } else {
        owned = samples.to_uniform();
        &owned
    };
    let count = match side {
        Side::Lower => s.rows().filter(|r| r.iter().all(|&v| v <= u)).count(),
        Side::Upper => {
            let t = 1.0 - u;
            s.rows().filter(|r| r.iter().all(|&v| v > t)).count()
        }
    };
    Ok(count as f64 / s.nrows() as f64)
}

/// Empirical copula `(1/n)·#{rows ≤ u componentwise}`.
pub fn empirical_copula(samples: &SampleMatrix, u: &[f64]) -> Result<f64> {
    if u.len() != samples.ncols() {
        return Err(TailError::domain("evaluation point has the wrong dimension"));
    }
    let count = samples.rows().filter(|r| r.iter().zip(u).all(|(v, b)| v <= b)).count();
    Ok(count as f64 / samples.nrows() as f64)
}

/// One-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |acc, (i, &x)| {
        let f = cdf(x);
        acc.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    })
}

/// KS acceptance threshold at level about 0.01.
pub fn ks_critical(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}
