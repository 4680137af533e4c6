//! Command implementations. Every command that writes files also writes a
//! [`RunManifest`] that `replay` can re-execute.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use tailorder::sampling::{sample_copula, ScaleMixtureSampler};
use tailorder::tailmetrics::{estimate_lambda, estimate_tail_order_analytic, estimate_tail_order_mc, tail_order_catalog};
use tailorder::{CatalogEntry, RadialLaw, RngStream, Side, TailError, UGrid};

use crate::error::{CliError, CliResult};
use crate::model::parse_model;
use crate::output::{to_json, write_csv, write_file};
use crate::verify::{run_suite, Fixture, Suite, VerifyReport};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Record of one command invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub version: String,
    pub outputs: Vec<PathBuf>,
    pub duration_secs: f64,
}

impl RunManifest {
    fn new<T: Serialize>(command: &str, params: &T, seed: u64, outputs: Vec<PathBuf>, start: Instant) -> CliResult<Self> {
        Ok(Self {
            command: command.into(),
            params: serde_json::to_value(params).map_err(|e| CliError::Io(e.to_string()))?,
            seed,
            version: VERSION.into(),
            outputs,
            duration_secs: start.elapsed().as_secs_f64(),
        })
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        write_file(path, &to_json(self)?)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{} is not a run manifest: {e}", path.display())))
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Margins {
    Uniform,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SideArg {
    Lower,
    Upper,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::Lower => Side::Lower,
            SideArg::Upper => Side::Upper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Mc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct SampleArgs {
    /// Model spec, e.g. `archimedean:williamson:dagum(0.6,1.8,1):d=2`.
    #[arg(long)]
    pub model: String,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, env = "TAILORDER_SEED", default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Margins::Uniform)]
    pub margins: Margins,
    /// Output CSV path; the manifest goes to `<out>.manifest.json`.
    #[arg(long)]
    pub out: PathBuf,
}

/// Write a sample CSV and its manifest.
pub fn cmd_sample(args: &SampleArgs) -> CliResult<RunManifest> {
    let start = Instant::now();
    let model = parse_model(&args.model)?;
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let mut m = sample_copula(&model, &RngStream::new(args.seed, 0), args.n)?;
    if args.margins == Margins::Normal {
        m = m.to_normal_scores()?;
    }
    write_csv(&args.out, &m)?;
    let manifest = RunManifest::new("sample", args, args.seed, vec![args.out.clone()], start)?;
    manifest.write(&manifest_path(&args.out))?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct TailOrderArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long, value_enum, default_value_t = SideArg::Lower)]
    pub side: SideArg,
    #[arg(long, value_enum, default_value_t = Method::Analytic)]
    pub method: Method,
    /// Monte Carlo sample size.
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long)]
    pub grid_lo: Option<f64>,
    #[arg(long)]
    pub grid_hi: Option<f64>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long, env = "TAILORDER_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Also report lambda, assuming the tail order is 1.
    #[arg(long)]
    pub lambda: bool,
    /// Write the JSON report here (plus a manifest) instead of only printing it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailOrderReport {
    pub model: String,
    pub side: Side,
    pub kappa: f64,
    pub raw_slope: f64,
    pub stderr: f64,
    pub eta: f64,
    pub chi_bar: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub catalog: Option<f64>,
    pub catalog_entry: CatalogEntry,
    pub grid: UGrid,
    pub points_used: usize,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub seed: u64,
}

pub fn tail_order_report(args: &TailOrderArgs) -> CliResult<TailOrderReport> {
    let model = parse_model(&args.model)?;
    let side: Side = args.side.into();
    let default = match args.method {
        Method::Analytic => UGrid::analytic(),
        Method::Mc => UGrid::monte_carlo(),
    };
    let grid = UGrid::new(
        args.grid_lo.unwrap_or(default.lo),
        args.grid_hi.unwrap_or(default.hi),
        args.grid_points.unwrap_or(default.points),
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let (estimate, lambda) = match args.method {
        Method::Analytic => {
            let e = estimate_tail_order_analytic(&model, side, &grid).map_err(|e| match e {
                TailError::Unsupported(_) => CliError::Usage(format!(
                    "{} has no analytic diagonal; rerun with --method mc for the Monte Carlo estimate",
                    args.model
                )),
                other => other.into(),
            })?;
            let lambda = if args.lambda {
                Some(match side {
                    Side::Lower => estimate_lambda(|u| tailorder::diagonal(&model, u), &grid)?,
                    Side::Upper => estimate_lambda(|u| tailorder::survival_diagonal(&model, u), &grid)?,
                })
            } else {
                None
            };
            (e, lambda)
        }
        Method::Mc => {
            if args.n < 10 {
                return Err(CliError::Usage("--n must be at least 10 for Monte Carlo estimates".into()));
            }
            let s = sample_copula(&model, &RngStream::new(args.seed, 0), args.n)?;
            let e = estimate_tail_order_mc(&s, side, &grid)?;
            let lambda = if args.lambda {
                Some(estimate_lambda(|u| tailorder::sampling::empirical_copula_diagonal(&s, u, side), &grid)?)
            } else {
                None
            };
            (e, lambda)
        }
    };
    let entry = tail_order_catalog(&model);
    Ok(TailOrderReport {
        model: args.model.clone(),
        side,
        kappa: estimate.kappa,
        raw_slope: estimate.raw_slope,
        stderr: estimate.stderr,
        eta: estimate.eta,
        chi_bar: estimate.chi_bar,
        lambda,
        catalog: entry.kappa(side),
        catalog_entry: entry,
        grid,
        points_used: estimate.points_used,
        method: args.method,
        n: (args.method == Method::Mc).then_some(args.n),
        seed: args.seed,
    })
}

/// Compute the report; write it and a manifest when `--out` is given.
pub fn cmd_tail_order(args: &TailOrderArgs) -> CliResult<(String, Option<RunManifest>)> {
    let start = Instant::now();
    let json = to_json(&tail_order_report(args)?)?;
    let manifest = match &args.out {
        Some(out) => {
            write_file(out, &json)?;
            let m = RunManifest::new("tail-order", args, args.seed, vec![out.clone()], start)?;
            m.write(&manifest_path(out))?;
            Some(m)
        }
        None => None,
    };
    Ok((json, manifest))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::Quick)]
    pub suite: Suite,
    #[arg(long, env = "TAILORDER_SEED", default_value_t = 1)]
    pub seed: u64,
    /// JSON file overriding model parameters of the criteria.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    /// Only run these criterion ids (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn load_fixture(path: Option<&Path>) -> CliResult<Fixture> {
    match path {
        None => Ok(Fixture::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad fixture {}: {e}", p.display())))
        }
    }
}

/// Run the suite. The report is returned even when criteria fail.
pub fn cmd_verify(args: &VerifyArgs) -> CliResult<(VerifyReport, String)> {
    let start = Instant::now();
    let fx = load_fixture(args.fixture.as_deref())?;
    let mut report = if args.only.is_empty() {
        run_suite(&fx, args.suite, args.seed)?
    } else {
        let mut criteria = vec![];
        for &id in &args.only {
            criteria.push(crate::verify::run_criterion(id, &fx, args.suite, args.seed)?);
        }
        VerifyReport { suite: args.suite, seed: args.seed, passed: true, failed: vec![], criteria }
    };
    report.failed = report.criteria.iter().filter(|c| !c.passed).map(|c| format!("{} {}", c.id, c.name)).collect();
    report.passed = report.failed.is_empty();
    let json = to_json(&report)?;
    if let Some(out) = &args.out {
        write_file(out, &json)?;
        RunManifest::new("verify", args, args.seed, vec![out.clone()], start)?.write(&manifest_path(out))?;
    }
    Ok((report, json))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct Figure1Args {
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, env = "TAILORDER_SEED", default_value_t = 1)]
    pub seed: u64,
}

pub const FIGURE1_UNIFORM: &str = "dagum-simplex-unif.csv";
pub const FIGURE1_NORMAL: &str = "dagum-simplex-norm.csv";
pub const FIGURE1_MANIFEST: &str = "figure1-manifest.json";
pub const FIGURE1_N: usize = 2000;

/// Write the two Dagum-simplex scatter files into `dir`.
pub fn figure1_to_dir(dir: &Path, seed: u64) -> CliResult<Vec<PathBuf>> {
    let law = RadialLaw::dagum(0.6, 1.8, 1.0)?;
    let u = ScaleMixtureSampler::new(law, 2)?.sample(&RngStream::new(seed, 0), FIGURE1_N)?;
    let z = u.to_normal_scores()?;
    let (pu, pz) = (dir.join(FIGURE1_UNIFORM), dir.join(FIGURE1_NORMAL));
    write_csv(&pu, &u)?;
    write_csv(&pz, &z)?;
    Ok(vec![pu, pz])
}

pub fn cmd_figure1(args: &Figure1Args) -> CliResult<RunManifest> {
    let start = Instant::now();
    let outputs = figure1_to_dir(&args.out_dir, args.seed)?;
    let m = RunManifest::new("figure1", args, args.seed, outputs, start)?;
    m.write(&args.out_dir.join(FIGURE1_MANIFEST))?;
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write outputs here (same file names) instead of the original paths.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

fn redirect(path: &Path, dir: Option<&Path>) -> CliResult<PathBuf> {
    match dir {
        None => Ok(path.to_path_buf()),
        Some(d) => {
            let name = path.file_name().ok_or_else(|| CliError::Usage(format!("{} has no file name", path.display())))?;
            Ok(d.join(name))
        }
    }
}

fn params<T: serde::de::DeserializeOwned>(m: &RunManifest) -> CliResult<T> {
    serde_json::from_value(m.params.clone()).map_err(|e| CliError::Usage(format!("manifest parameters do not match `{}`: {e}", m.command)))
}

/// Re-run the command recorded in a manifest.
pub fn cmd_replay(args: &ReplayArgs) -> CliResult<RunManifest> {
    let m = RunManifest::read(&args.manifest)?;
    let dir = args.out_dir.as_deref();
    match m.command.as_str() {
        "sample" => {
            let mut a: SampleArgs = params(&m)?;
            a.out = redirect(&a.out, dir)?;
            cmd_sample(&a)
        }
        "tail-order" => {
            let mut a: TailOrderArgs = params(&m)?;
            if let Some(out) = &a.out {
                a.out = Some(redirect(out, dir)?);
            }
            cmd_tail_order(&a)?.1.ok_or_else(|| CliError::Usage("tail-order manifest without an output path".into()))
        }
        "figure1" => {
            let mut a: Figure1Args = params(&m)?;
            if let Some(d) = dir {
                a.out_dir = d.to_path_buf();
            }
            cmd_figure1(&a)
        }
        "verify" => {
            let mut a: VerifyArgs = params(&m)?;
            if let Some(out) = &a.out {
                a.out = Some(redirect(out, dir)?);
            }
            let start = Instant::now();
            let (report, _) = cmd_verify(&a)?;
            if !report.passed {
                return Err(CliError::Verification(report.failed.join(", ")));
            }
            RunManifest::new("verify", &a, a.seed, a.out.clone().into_iter().collect(), start)
        }
        other => Err(CliError::Usage(format!("unknown command `{other}` in manifest"))),
    }
}
