//! Command-line front end. Coordinates are 1-based on the command line and in
//! every report.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{
    default_k, estimate_constants, hill, rank_regression, survival_scaling, CurveOptions, TailEstimate,
};
use crate::garch::simulate_garch;
use crate::io::{write_batch_csv, write_curve_csv, write_garch_csv, write_traces_csv, write_useq_csv};
use crate::model::{lyapunov_mc, lyapunov_sufficient, profile, solve_alpha, validate, ModelSpec, TailProfile};
use crate::modelfile::{parse_model_file, ModelFile};
use crate::rng::DEFAULT_SEED;
use crate::simulate::{decompose_batch, stationary_sample, u_sequence, PathConfig, Split};

#[derive(Debug, Parser)]
#[command(name = "triax", version, about = "Tail indices and Monte Carlo for upper-triangular stochastic recurrences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Model file.
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Monte Carlo paths (or sample size).
    #[arg(long, global = true, default_value_t = 10_000)]
    pub paths: usize,
    #[arg(long = "burnin", global = true, default_value_t = 200)]
    pub burn_in: usize,
    /// Horizon for `decompose`, maximum horizon for `useq` and `constants`.
    #[arg(long, global = true, default_value_t = 10)]
    pub s: usize,
    #[arg(long, global = true, default_value_t = 200)]
    pub truncation: usize,
    /// Order statistics for tail estimators; defaults to floor(n^(2/3)).
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Moment order for the Lyapunov sufficiency check; defaults to half the smallest index.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    #[arg(long, global = true, env = "TRIAX_WORKERS")]
    pub workers: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorChoice {
    Hill,
    RankRegression,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the standing conditions and print the report as JSON.
    Validate,
    /// Marginal and modified tail indices with dominating coordinates.
    Indices,
    /// Stationary batch as CSV, one row per path.
    Simulate,
    /// Tail index estimates per coordinate as JSON.
    Estimate {
        /// Restrict to one coordinate.
        #[arg(long)]
        coord: Option<usize>,
        #[arg(long, value_enum, default_value_t = EstimatorChoice::Both)]
        method: EstimatorChoice,
        /// Write the survival-scaling curve of `--coord` (default 1) here.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Path-wise decomposition traces as CSV.
    Decompose {
        #[arg(long)]
        coord: usize,
        /// First part of the horizon split; defaults to s/2.
        #[arg(long)]
        s1: Option<usize>,
    },
    /// u-sequence of a coordinate as CSV.
    Useq {
        #[arg(long)]
        coord: usize,
    },
    /// Tail constants as JSON.
    Constants,
    /// Lyapunov sufficiency check and Monte Carlo exponent as JSON.
    Lyapunov {
        #[arg(long, default_value_t = 500)]
        steps: usize,
    },
    /// Simulate the GARCH section: returns and squared volatilities as CSV.
    Garch {
        /// Series length after burn-in.
        #[arg(long, default_value_t = 10_000)]
        length: usize,
        /// Also write a JSON analysis (indices and Hill estimates of sigma^2 and X^2).
        #[arg(long)]
        analysis: Option<PathBuf>,
    },
}

/// Exit status 1 for input and validation failures, 2 for numerical ones.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numeric() {
        2
    } else {
        1
    }
}

#[derive(Debug, Serialize)]
struct IndicesReport {
    alpha: Vec<f64>,
    tilde_alpha: Vec<f64>,
    /// 1-based.
    j0: Vec<usize>,
}

impl From<TailProfile> for IndicesReport {
    fn from(p: TailProfile) -> Self {
        Self { j0: p.j0.iter().map(|j| j + 1).collect(), alpha: p.alpha, tilde_alpha: p.tilde_alpha }
    }
}

#[derive(Debug, Serialize)]
struct LyapunovReport {
    sufficiency: crate::model::LyapunovSufficiency,
    estimate: crate::model::LyapunovEstimate,
}

#[derive(Debug, Serialize)]
struct GarchAnalysis {
    accepted: bool,
    alpha: Vec<Option<f64>>,
    indices: Option<IndicesReport>,
    sigma2: Vec<TailEstimate>,
    squared_returns: Vec<TailEstimate>,
}

fn load(path: Option<&Path>) -> Result<ModelFile> {
    let path = path.ok_or_else(|| Error::InvalidInput("--model is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_model_file(&text)
}

fn output(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut w = output(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn coordinate(spec: &ModelSpec, coord: usize) -> Result<usize> {
    if coord == 0 || coord > spec.dim() {
        return Err(Error::InvalidInput(format!("--coord must be in 1..={}", spec.dim())));
    }
    Ok(coord - 1)
}

fn estimates(sample: &[f64], k: Option<usize>, method: EstimatorChoice, coord: usize, seed: u64) -> Result<Vec<TailEstimate>> {
    let k = k.unwrap_or_else(|| default_k(sample.len()));
    let mut out = Vec::new();
    if method != EstimatorChoice::RankRegression {
        out.push(hill(sample, k)?.with_context(coord, seed));
    }
    if method != EstimatorChoice::Hill {
        out.push(rank_regression(sample, k)?.with_context(coord, seed));
    }
    Ok(out)
}

/// Runs one command and returns the process exit status.
pub fn run(cli: &Cli) -> Result<i32> {
    let args = &cli.run;
    if let Some(n) = args.workers {
        if n == 0 {
            return Err(Error::InvalidInput("--workers must be positive".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| Error::InvalidInput(e.to_string()))?;
        return pool.install(|| dispatch(cli));
    }
    dispatch(cli)
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let args = &cli.run;
    let file = load(args.model.as_deref())?;
    let out = args.out.as_deref();
    let config = PathConfig {
        burn_in: args.burn_in,
        horizon: args.s,
        truncation: args.truncation,
        seed: args.seed,
        paths: args.paths,
    };
    config.check()?;
    match &cli.command {
        Command::Validate => {
            let report = validate(&file.recurrence()?);
            write_json(out, &report)?;
            if !report.accepted {
                for c in report.failed() {
                    eprintln!("{} failed: {}", c.id, c.detail);
                }
                return Ok(1);
            }
        }
        Command::Indices => write_json(out, &IndicesReport::from(profile(&file.recurrence()?)?))?,
        Command::Simulate => {
            let batch = stationary_sample(&file.recurrence()?, &config)?;
            let mut w = output(out)?;
            write_batch_csv(&mut w, &batch)?;
        }
        Command::Estimate { coord, method, curve } => {
            let spec = file.recurrence()?;
            let coords: Vec<usize> = match coord {
                Some(c) => vec![coordinate(&spec, *c)?],
                None => (0..spec.dim()).collect(),
            };
            let batch = stationary_sample(&spec, &config)?;
            let mut all = Vec::new();
            for &i in &coords {
                let sample: Vec<f64> = batch.iter().map(|w| w[i]).collect();
                all.extend(estimates(&sample, args.k, *method, i + 1, args.seed)?);
            }
            write_json(out, &all)?;
            if let Some(path) = curve {
                let i = coords[0];
                let sample: Vec<f64> = batch.iter().map(|w| w[i]).collect();
                let alpha = match profile(&spec) {
                    Ok(p) => p.tilde_alpha[i],
                    Err(_) => hill(&sample, args.k.unwrap_or_else(|| default_k(sample.len())))?.point,
                };
                let c = survival_scaling(&sample, alpha, CurveOptions::default())?;
                write_curve_csv(output(Some(path))?, &c)?;
            }
        }
        Command::Decompose { coord, s1 } => {
            let spec = file.recurrence()?;
            let ell = coordinate(&spec, *coord)?;
            let split = match s1 {
                Some(s1) if *s1 <= args.s => Some(Split { s1: *s1, s2: args.s - s1 }),
                Some(s1) => return Err(Error::InvalidInput(format!("--s1 {s1} exceeds --s {}", args.s))),
                None => None,
            };
            let traces = decompose_batch(&spec, ell, args.s, split, &config)?;
            write_traces_csv(output(out)?, &traces)?;
        }
        Command::Useq { coord } => {
            let spec = file.recurrence()?;
            let ell = coordinate(&spec, *coord)?;
            let seq = u_sequence(&spec, ell, args.s, &config)?;
            write_useq_csv(output(out)?, &seq)?;
            eprintln!(
                "u_{} -> {} (j0 = {}, converged: {}, monotonicity violations: {})",
                coord,
                seq.points.last().map_or(f64::NAN, |p| p.estimate),
                seq.j0 + 1,
                seq.converged,
                seq.monotone_violations
            );
            for (j, s) in seq.first_below.iter().enumerate() {
                if let Some(s) = s {
                    eprintln!("E pi_{coord},{}(s)^alpha below u from s = {s}", j + 1);
                }
            }
        }
        Command::Constants => write_json(out, &estimate_constants(&file.recurrence()?, &config, args.s)?)?,
        Command::Lyapunov { steps } => {
            let spec = file.recurrence()?;
            let eps = match args.eps {
                Some(e) => e,
                None => {
                    let alphas = (0..spec.dim()).map(|i| solve_alpha(spec.diag(i))).collect::<Result<Vec<_>>>()?;
                    0.5 * alphas.iter().cloned().fold(f64::INFINITY, f64::min)
                }
            };
            let report = LyapunovReport {
                sufficiency: lyapunov_sufficient(&spec, eps)?,
                estimate: lyapunov_mc(&spec, *steps, args.paths, args.seed)?,
            };
            write_json(out, &report)?;
        }
        Command::Garch { length, analysis } => {
            let g = file.garch.clone().ok_or_else(|| Error::InvalidInput("model file has no garch section".into()))?;
            let cfg = PathConfig { horizon: *length, paths: 1, ..config };
            let series = simulate_garch(&g, &cfg)?.remove(0);
            write_garch_csv(output(out)?, &series)?;
            if let Some(path) = analysis {
                let spec = g.to_sre();
                let report = validate(&spec);
                let indices = if report.accepted { Some(IndicesReport::from(profile(&spec)?)) } else { None };
                let mut sigma2 = Vec::new();
                let mut squared_returns = Vec::new();
                for i in 0..g.dim() {
                    sigma2.extend(estimates(&series.sigma2_coordinate(i), args.k, EstimatorChoice::Hill, i + 1, args.seed)?);
                    let x2: Vec<f64> = series.x_coordinate(i).iter().map(|x| x * x).collect();
                    squared_returns.extend(estimates(&x2, args.k, EstimatorChoice::Hill, i + 1, args.seed)?);
                }
                let a = GarchAnalysis { accepted: report.accepted, alpha: report.alpha, indices, sigma2, squared_returns };
                write_json(Some(path), &a)?;
            }
        }
    }
    Ok(0)
}
