//! Validated description of one run, shared by the subcommands and `run --config`.

use std::fmt;
use std::fs;
use std::path::PathBuf;

use num_complex::Complex64;
use rkhs_core::annulus::{RadialWeight, CURVATURE_GAP_TOL};
use rkhs_core::extremality::DEFAULT_TRUNCATION;
use rkhs_core::kernel::{KernelSpec, DEFAULT_N_MAX};
use rkhs_core::positivity::DEFAULT_TOL;
use rkhs_core::sampling::{DEFAULT_CLOUD_RADIUS, DEFAULT_CLOUD_SIZE, DEFAULT_SEED};
use rkhs_core::{Point, SeriesKernel};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn parse(s: &str) -> CliResult<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::config("format", format!("`{other}` is not csv or json"))),
        }
    }
}

/// `steps` evenly spaced radii from `start` to `stop`, both included.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl GridSpec {
    pub fn new(start: f64, stop: f64, steps: usize) -> CliResult<Self> {
        if !(start.is_finite() && stop.is_finite()) {
            return Err(CliError::config("grid", "bounds must be finite"));
        }
        if !(0.0..1.0).contains(&start) || !(0.0..1.0).contains(&stop) {
            return Err(CliError::config("grid", format!("radii {start}..{stop} must lie in [0, 1)")));
        }
        if steps < 1 {
            return Err(CliError::config("grid.steps", "must be at least 1"));
        }
        Ok(Self { start, stop, steps })
    }

    /// `r0:r1:steps`.
    pub fn parse(s: &str) -> CliResult<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [a, b, n] = parts[..] else {
            return Err(CliError::config("grid", format!("`{s}` is not of the form r0:r1:steps")));
        };
        let num = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| CliError::config("grid", format!("`{t}` is not a number")))
        };
        let steps = n
            .parse::<usize>()
            .map_err(|_| CliError::config("grid.steps", format!("`{n}` is not a non-negative integer")))?;
        Self::new(num(a)?, num(b)?, steps)
    }

    pub fn radii(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let span = self.stop - self.start;
        (0..self.steps)
            .map(|k| self.start + span * (k as f64 / (self.steps - 1) as f64))
            .collect()
    }

    pub fn points(&self, angle: f64) -> Vec<Point> {
        self.radii().into_iter().map(|r| Complex64::from_polar(r, angle)).collect()
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.steps)
    }
}

/// `re` or `re,im`.
pub fn parse_point(s: &str, field: &str) -> CliResult<Point> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| CliError::config(field, format!("`{s}` is not `re` or `re,im`")))
    };
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(num(re)?, num(im)?)),
        None => Ok(Complex64::new(num(s)?, 0.0)),
    }
}

/// A kernel JSON document given by path or inline.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelSource {
    File(PathBuf),
    Inline(String),
}

impl KernelSource {
    /// Text starting with `{` is an inline document, anything else a path.
    pub fn from_arg(s: &str) -> Self {
        if s.trim_start().starts_with('{') {
            KernelSource::Inline(s.to_string())
        } else {
            KernelSource::File(PathBuf::from(s))
        }
    }

    pub fn load(&self) -> CliResult<SeriesKernel> {
        let text = match self {
            KernelSource::File(path) => fs::read_to_string(path).map_err(|e| CliError::io(path, e))?,
            KernelSource::Inline(text) => text.clone(),
        };
        Ok(KernelSpec::from_json_str(&text)?.build()?)
    }

    pub fn label(&self) -> String {
        match self {
            KernelSource::File(path) => path.display().to_string(),
            KernelSource::Inline(_) => "inline".to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckTest {
    Gram,
    Contraction,
    Hyponormal,
    TwoHyper,
}

impl CheckTest {
    pub const ALL: [CheckTest; 4] = [CheckTest::Gram, CheckTest::Contraction, CheckTest::Hyponormal, CheckTest::TwoHyper];

    fn parse(s: &str) -> CliResult<Self> {
        match s.trim() {
            "gram" => Ok(CheckTest::Gram),
            "contraction" => Ok(CheckTest::Contraction),
            "hyponormal" => Ok(CheckTest::Hyponormal),
            "2hyper" | "two-hyper" | "two_hypercontraction" => Ok(CheckTest::TwoHyper),
            other => Err(CliError::config(
                "tests",
                format!("unknown test `{other}`; expected gram, contraction, hyponormal or 2hyper"),
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CheckTest::Gram => "gram",
            CheckTest::Contraction => "contraction",
            CheckTest::Hyponormal => "hyponormal",
            CheckTest::TwoHyper => "2hyper",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CiDomain {
    Disc,
    Annulus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnnulusTask {
    Szego,
    Bergman,
    StrictCi,
    Character,
    Extremal,
    Period,
    Equivalence,
}

impl AnnulusTask {
    fn parse(s: &str) -> CliResult<Self> {
        Ok(match s.trim() {
            "szego" => AnnulusTask::Szego,
            "bergman" => AnnulusTask::Bergman,
            "strict-ci" => AnnulusTask::StrictCi,
            "character" => AnnulusTask::Character,
            "extremal" => AnnulusTask::Extremal,
            "period" => AnnulusTask::Period,
            "equivalence" => AnnulusTask::Equivalence,
            other => {
                return Err(CliError::config(
                    "task",
                    format!(
                        "unknown annulus task `{other}`; expected szego, bergman, strict-ci, \
                         character, extremal, period or equivalence"
                    ),
                ))
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            AnnulusTask::Szego => "szego",
            AnnulusTask::Bergman => "bergman",
            AnnulusTask::StrictCi => "strict-ci",
            AnnulusTask::Character => "character",
            AnnulusTask::Extremal => "extremal",
            AnnulusTask::Period => "period",
            AnnulusTask::Equivalence => "equivalence",
        }
    }
}

#[derive(Clone, Debug)]
pub enum Task {
    Curvature {
        kernel: KernelSource,
        grid: GridSpec,
        angle: f64,
    },
    LocalOp {
        kernel: KernelSource,
        at: Point,
        m: usize,
    },
    Check {
        kernel: KernelSource,
        tests: Vec<CheckTest>,
        points: usize,
        radius: f64,
    },
    Extremal {
        kernel: KernelSource,
        at: Point,
        pipeline: bool,
        truncation: usize,
    },
    CiCheck {
        domain: CiDomain,
        kernel: Option<KernelSource>,
        r: Option<f64>,
        weight: Option<RadialWeight>,
        truncation: usize,
        grid: Option<GridSpec>,
        angle: f64,
    },
    Annulus {
        task: AnnulusTask,
        r: f64,
        weight: RadialWeight,
        truncation: usize,
        grid: Option<GridSpec>,
        angle: f64,
        against: Option<f64>,
        gap_tol: f64,
    },
}

impl Task {
    pub fn name(&self) -> String {
        match self {
            Task::Curvature { .. } => "curvature".into(),
            Task::LocalOp { .. } => "local-op".into(),
            Task::Check { .. } => "check".into(),
            Task::Extremal { .. } => "extremal".into(),
            Task::CiCheck { .. } => "ci-check".into(),
            Task::Annulus { task, .. } => format!("annulus/{}", task.name()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Job {
    pub task: Task,
    pub tol: f64,
    pub seed: u64,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

/// Unvalidated settings as they come from flags or a config file.
#[derive(Clone, Debug, Default)]
pub struct RawJob {
    pub task: String,
    pub annulus_task: Option<String>,
    pub kernel: Option<KernelSource>,
    pub grid: Option<GridSpec>,
    pub angle: Option<f64>,
    pub at: Option<Point>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
    pub m: Option<usize>,
    pub tests: Option<Vec<String>>,
    pub points: Option<usize>,
    pub radius: Option<f64>,
    pub pipeline: bool,
    pub truncation: Option<usize>,
    pub domain: Option<String>,
    pub r: Option<f64>,
    pub weight: Option<String>,
    pub against: Option<f64>,
    pub gap_tol: Option<f64>,
}

fn positive(value: f64, field: &str) -> CliResult<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CliError::config(field, format!("{value} is not a positive finite number")))
    }
}

fn finite(value: f64, field: &str) -> CliResult<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::config(field, format!("{value} is not finite")))
    }
}

fn parse_weight(s: &str) -> CliResult<RadialWeight> {
    Ok(s.parse::<RadialWeight>()?)
}

impl RawJob {
    pub fn build(self) -> CliResult<Job> {
        let tol = positive(self.tol.unwrap_or(DEFAULT_TOL), "tol")?;
        let format = self.format.as_deref().map(Format::parse).transpose()?;
        let angle = finite(self.angle.unwrap_or(0.0), "angle")?;
        let kernel = || self.kernel.clone().ok_or_else(|| CliError::config("kernel", "missing"));
        let at = || self.at.ok_or_else(|| CliError::config("at", "missing"));
        let r = || {
            let r = self.r.ok_or_else(|| CliError::config("r", "missing"))?;
            if r > 0.0 && r < 1.0 {
                Ok(r)
            } else {
                Err(CliError::config("r", format!("inner radius {r} is not in (0, 1)")))
            }
        };
        let weight = |default: Option<&str>| match self.weight.as_deref().or(default) {
            Some(s) => parse_weight(s),
            None => Err(CliError::config("weight", "missing")),
        };
        let truncation = self.truncation.unwrap_or(DEFAULT_N_MAX as usize);

        let task = match self.task.as_str() {
            "curvature" => Task::Curvature {
                kernel: kernel()?,
                grid: self.grid.unwrap_or(GridSpec::new(0.0, 0.9, 10)?),
                angle,
            },
            "local-op" => Task::LocalOp {
                kernel: kernel()?,
                at: at()?,
                m: self.m.unwrap_or(1),
            },
            "check" => {
                let tests = match &self.tests {
                    Some(names) if !names.is_empty() => names
                        .iter()
                        .map(|s| CheckTest::parse(s))
                        .collect::<CliResult<Vec<_>>>()?,
                    Some(_) => return Err(CliError::config("tests", "empty list")),
                    None => CheckTest::ALL.to_vec(),
                };
                let points = self.points.unwrap_or(DEFAULT_CLOUD_SIZE);
                if points == 0 {
                    return Err(CliError::config("points", "must be at least 1"));
                }
                let radius = positive(self.radius.unwrap_or(DEFAULT_CLOUD_RADIUS), "radius")?;
                if radius >= 1.0 {
                    return Err(CliError::config("radius", format!("{radius} is not below 1")));
                }
                Task::Check {
                    kernel: kernel()?,
                    tests,
                    points,
                    radius,
                }
            }
            "extremal" => Task::Extremal {
                kernel: kernel()?,
                at: at()?,
                pipeline: self.pipeline,
                truncation: self.truncation.unwrap_or(DEFAULT_TRUNCATION),
            },
            "ci-check" => {
                let domain = match self.domain.as_deref().unwrap_or("disc") {
                    "disc" => CiDomain::Disc,
                    "annulus" => CiDomain::Annulus,
                    other => {
                        return Err(CliError::config("domain", format!("`{other}` is not disc or annulus")))
                    }
                };
                let (kernel, r, weight) = match (domain, &self.kernel) {
                    (CiDomain::Disc, _) => (Some(kernel()?), None, None),
                    (CiDomain::Annulus, Some(k)) => (Some(k.clone()), self.r, None),
                    (CiDomain::Annulus, None) => (None, Some(r()?), Some(weight(Some("1"))?)),
                };
                Task::CiCheck {
                    domain,
                    kernel,
                    r,
                    weight,
                    truncation,
                    grid: self.grid,
                    angle,
                }
            }
            "annulus" => {
                let task = AnnulusTask::parse(
                    self.annulus_task
                        .as_deref()
                        .ok_or_else(|| CliError::config("task", "missing annulus task"))?,
                )?;
                let against = self.against.map(|b| finite(b, "against")).transpose()?;
                if task == AnnulusTask::Equivalence && against.is_none() {
                    return Err(CliError::config("against", "required by the equivalence task"));
                }
                Task::Annulus {
                    task,
                    r: r()?,
                    weight: weight(Some("1"))?,
                    truncation,
                    grid: self.grid,
                    angle,
                    against,
                    gap_tol: positive(self.gap_tol.unwrap_or(CURVATURE_GAP_TOL), "gap_tol")?,
                }
            }
            other => {
                return Err(CliError::config(
                    "task",
                    format!("unknown task `{other}`; expected curvature, local-op, check, extremal, ci-check or annulus"),
                ))
            }
        };
        Ok(Job {
            task,
            tol,
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            format,
            out: self.out,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_both_ends() {
        let g = GridSpec::parse("0:0.9:10").unwrap();
        let r = g.radii();
        assert_eq!(r.len(), 10);
        assert_eq!(r[0], 0.0);
        assert_eq!(r[9], 0.9);
        assert_eq!(GridSpec::parse("0.3:0.5:1").unwrap().radii(), vec![0.3]);
    }

    #[test]
    fn bad_grids_name_a_field() {
        for (text, field) in [("0:0.9", "grid"), ("0:x:3", "grid"), ("0:0.5:0", "grid.steps"), ("0:1.5:3", "grid")] {
            match GridSpec::parse(text) {
                Err(CliError::Config { field: f, .. }) => assert_eq!(f, field, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn points_parse() {
        assert_eq!(parse_point("0.3", "at").unwrap(), Complex64::new(0.3, 0.0));
        assert_eq!(parse_point("0.3, -0.1", "at").unwrap(), Complex64::new(0.3, -0.1));
        assert!(parse_point("nan", "at").is_err());
    }

    #[test]
    fn kernel_source_detects_inline_documents() {
        assert!(matches!(KernelSource::from_arg(" {\"kind\":1}"), KernelSource::Inline(_)));
        assert!(matches!(KernelSource::from_arg("k.json"), KernelSource::File(_)));
    }

    #[test]
    fn missing_kernel_is_reported() {
        let raw = RawJob {
            task: "curvature".into(),
            ..Default::default()
        };
        match raw.build() {
            Err(CliError::Config { field, .. }) => assert_eq!(field, "kernel"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nonpositive_tolerance_is_rejected() {
        let raw = RawJob {
            task: "annulus".into(),
            annulus_task: Some("period".into()),
            r: Some(0.5),
            tol: Some(0.0),
            ..Default::default()
        };
        match raw.build() {
            Err(CliError::Config { field, .. }) => assert_eq!(field, "tol"),
            other => panic!("{other:?}"),
        }
    }
}
