//! `rkhs-lab`: curvature, positivity and extremality checks from the command line.
//!
//! Exit status is 0 when every verdict passes, 2 when an inequality or identity
//! is violated, and 1 on operational errors (reported as JSON on stderr).

mod config;
mod error;
mod job;
mod output;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::{ContextKind, ContextValue, ErrorKind};
use clap::{Args, Parser, Subcommand};

use crate::error::{CliError, CliResult};
use crate::job::{parse_point, GridSpec, KernelSource, RawJob};
use crate::output::{write_atomic, Verdict};

#[derive(Parser, Debug)]
#[command(name = "rkhs-lab", version, about = "Curvature invariants of reproducing-kernel Hilbert spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Positivity tolerance
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for sampled point clouds, recorded in the output
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// csv or json; tables default to csv, reports to json
    #[arg(long, global = true)]
    format: Option<String>,
    /// Output file, written atomically; stdout when absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Curvature along a radial grid, with the Szego bound
    Curvature {
        #[arg(long)]
        kernel: String,
        /// r0:r1:steps, both ends included
        #[arg(long)]
        grid: Option<String>,
        /// Argument of the grid points
        #[arg(long, allow_hyphen_values = true)]
        angle: Option<f64>,
    },
    /// Canonical form of the local operator at a point
    LocalOp {
        #[arg(long)]
        kernel: String,
        /// re or re,im
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long)]
        m: Option<usize>,
    },
    /// Positivity, contractivity, hyponormality and 2-hypercontractivity
    Check {
        #[arg(long)]
        kernel: String,
        /// Comma-separated subset of gram,contraction,hyponormal,2hyper
        #[arg(long)]
        tests: Option<String>,
        /// Size of the seeded sample cloud
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Extremality report for a weighted shift
    Extremal {
        #[arg(long)]
        kernel: String,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        /// Also replay the uniqueness argument
        #[arg(long)]
        pipeline: bool,
        #[arg(long)]
        truncation: Option<usize>,
    },
    /// Planar curvature inequality against the Szego kernel
    CiCheck {
        #[arg(long)]
        kernel: Option<String>,
        /// disc or annulus
        #[arg(long)]
        domain: Option<String>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        weight: Option<String>,
        #[arg(long)]
        truncation: Option<usize>,
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        angle: Option<f64>,
    },
    /// Weighted Bergman and Szego kernels of the annulus r < |z| < 1
    Annulus {
        #[arg(long)]
        r: f64,
        /// 1, rho or rho^b
        #[arg(long)]
        weight: Option<String>,
        /// szego, bergman, strict-ci, character, extremal, period or equivalence
        #[arg(long)]
        task: String,
        #[arg(long)]
        truncation: Option<usize>,
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        angle: Option<f64>,
        /// Second exponent for the equivalence task
        #[arg(long, allow_hyphen_values = true)]
        against: Option<f64>,
        /// Curvature gap below which two weights count as equivalent
        #[arg(long)]
        gap_tol: Option<f64>,
    },
    /// Run a JSON config file; flags given here override its entries
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn grid(s: Option<String>) -> CliResult<Option<GridSpec>> {
    s.as_deref().map(GridSpec::parse).transpose()
}

impl Cli {
    fn into_raw(self) -> CliResult<RawJob> {
        let kernel = |s: &str| Some(KernelSource::from_arg(s));
        let mut raw = match self.command {
            Command::Curvature { kernel: k, grid: g, angle } => RawJob {
                task: "curvature".into(),
                kernel: kernel(&k),
                grid: grid(g)?,
                angle,
                ..Default::default()
            },
            Command::LocalOp { kernel: k, at, m } => RawJob {
                task: "local-op".into(),
                kernel: kernel(&k),
                at: Some(parse_point(&at, "at")?),
                m,
                ..Default::default()
            },
            Command::Check {
                kernel: k,
                tests,
                points,
                radius,
            } => RawJob {
                task: "check".into(),
                kernel: kernel(&k),
                tests: tests.map(|t| t.split(',').map(str::to_string).collect()),
                points,
                radius,
                ..Default::default()
            },
            Command::Extremal {
                kernel: k,
                at,
                pipeline,
                truncation,
            } => RawJob {
                task: "extremal".into(),
                kernel: kernel(&k),
                at: Some(parse_point(&at, "at")?),
                pipeline,
                truncation,
                ..Default::default()
            },
            Command::CiCheck {
                kernel: k,
                domain,
                r,
                weight,
                truncation,
                grid: g,
                angle,
            } => RawJob {
                task: "ci-check".into(),
                kernel: k.as_deref().and_then(kernel),
                domain,
                r,
                weight,
                truncation,
                grid: grid(g)?,
                angle,
                ..Default::default()
            },
            Command::Annulus {
                r,
                weight,
                task,
                truncation,
                grid: g,
                angle,
                against,
                gap_tol,
            } => RawJob {
                task: "annulus".into(),
                annulus_task: Some(task),
                r: Some(r),
                weight,
                truncation,
                grid: grid(g)?,
                angle,
                against,
                gap_tol,
                ..Default::default()
            },
            Command::Run { config } => config::load(&config)?,
        };
        let c = self.common;
        raw.tol = c.tol.or(raw.tol);
        raw.seed = c.seed.or(raw.seed);
        raw.format = c.format.or(raw.format);
        raw.out = c.out.or(raw.out);
        Ok(raw)
    }
}

const THREADS_VAR: &str = "RKHS_LAB_THREADS";

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n = value
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::config(THREADS_VAR, format!("`{value}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(THREADS_VAR, e.to_string()))
}

fn run(cli: Cli) -> CliResult<Verdict> {
    configure_threads()?;
    let job = cli.into_raw()?.build()?;
    let artifact = tasks::execute(&job)?;
    let text = artifact.render(job.format.unwrap_or(artifact.default_format()))?;
    match &job.out {
        Some(path) => write_atomic(path, &text)?,
        None => print!("{text}"),
    }
    Ok(artifact.verdict)
}

fn report(err: &CliError) -> ExitCode {
    eprintln!("{}", err.diagnostic());
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let field = match e.get(ContextKind::InvalidArg) {
                Some(ContextValue::String(s)) => s.clone(),
                _ => "<arguments>".to_string(),
            };
            let message = e.to_string();
            let first = message.lines().next().unwrap_or_default();
            let first = first.strip_prefix("error: ").unwrap_or(first);
            return report(&CliError::config(field, first));
        }
    };
    match run(cli) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Violation) => ExitCode::from(2),
        Err(e) => report(&e),
    }
}
