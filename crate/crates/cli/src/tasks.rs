//! Dispatch from a [`Job`] to the library and shaping of the result.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rkhs_core::annulus::{
    character_equivalence_with_tol, character_of_weight, extremal_problem, period_matrix, strict_ci_slack,
    szego_kernel, weighted_bergman_kernel, AnnulusSpec, RadialWeight,
};
use rkhs_core::caratheodory::{disc_szego, planar_ci_check};
use rkhs_core::curvature::curvature_scalar;
use rkhs_core::extremality::{classify_shift, dependence_test, uniqueness_pipeline_check, EXTREMAL_TOL};
use rkhs_core::kernel::SeriesKind;
use rkhs_core::linalg::CMatrix;
use rkhs_core::local_operator::{canonical_form, jet_gram, verify_tt_identity};
use rkhs_core::positivity::{
    contraction_check, hyponormal_check, kernel_gram, psd_check, two_hypercontraction_check, WeightSequence,
};
use rkhs_core::sampling::disc_cloud;
use rkhs_core::{Error, Kernel, Point, SeriesKernel};
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};
use crate::job::{AnnulusTask, CheckTest, CiDomain, GridSpec, Job, KernelSource, Task};
use crate::output::{num, Artifact, Body, Cell, Table, Verdict};

/// Agreement required between `t t^*` and `-K^{-1}`, and between the closed
/// form and the least-squares value of the extremal problem.
pub const AGREEMENT_TOL: f64 = 1e-8;

const DISC_SZEGO: &str = "S(z,w) = 1/(2 pi (1 - z conj(w)))";
const ANNULUS_SZEGO: &str = "S(z,w) = sum_n (z conj(w))^n / (2 pi (1 + r^(2n+1)))";
const BERGMAN_NORM: &str = "||z^n||^2 = 2 pi int_r^1 rho^(2n+1) h(rho) d rho";
const WITH: &str = "with4pi2";
const WITHOUT: &str = "without4pi2";

fn complex(z: Complex64) -> Value {
    json!([num(z.re), num(z.im)])
}

fn matrix(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex(m[(i, j)])).collect()))
            .collect(),
    )
}

fn to_json(v: impl serde::Serialize) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// Diagonal of the Szego kernel matching the domain of a kernel.
enum Szego {
    Disc,
    Annulus(SeriesKernel),
}

impl Szego {
    fn for_kernel(kernel: &SeriesKernel) -> CliResult<Self> {
        match kernel.inner_radius() {
            None => Ok(Szego::Disc),
            Some(r) => Ok(Szego::Annulus(szego_kernel(&AnnulusSpec::with_default_truncation(r)?)?)),
        }
    }

    fn at(&self, w: Point) -> CliResult<f64> {
        match self {
            Szego::Disc => Ok(disc_szego(w)),
            Szego::Annulus(s) => Ok(s.eval(w, w)?.re),
        }
    }

    fn formula(&self) -> &'static str {
        match self {
            Szego::Disc => DISC_SZEGO,
            Szego::Annulus(_) => ANNULUS_SZEGO,
        }
    }
}

fn polar_cells(w: Point) -> Vec<Cell> {
    vec![w.norm().into(), w.re.into(), w.im.into()]
}

/// Evaluates `f` on every point in parallel, keeping point order.
fn par_map<T, F>(points: &[Point], f: F) -> CliResult<Vec<T>>
where
    T: Send,
    F: Fn(Point) -> CliResult<T> + Sync,
{
    points.par_iter().map(|&w| f(w)).collect()
}

fn rows_for<F>(points: &[Point], f: F) -> CliResult<Vec<Vec<Cell>>>
where
    F: Fn(Point) -> CliResult<Vec<Cell>> + Sync,
{
    par_map(points, f)
}

fn nums(row: &[Cell], col: usize) -> f64 {
    match row[col] {
        Cell::Num(x) => x,
        _ => f64::NAN,
    }
}

pub fn execute(job: &Job) -> CliResult<Artifact> {
    let mut constants: Vec<(&'static str, Value)> = Vec::new();
    let (verdict, body) = match &job.task {
        Task::Curvature { kernel, grid, angle } => {
            let k = kernel.load()?;
            let szego = Szego::for_kernel(&k)?;
            constants.extend([
                ("kernel", json!(kernel.label())),
                ("grid", json!(grid.to_string())),
                ("angle", num(*angle)),
                ("szego_normalization", json!(szego.formula())),
                ("bound", json!("-4 pi^2 S(w,w)^2")),
            ]);
            let rows = rows_for(&grid.points(*angle), |w| {
                let curvature = curvature_scalar(&k, w)?;
                let s = szego.at(w)?;
                let mut row = polar_cells(w);
                row.extend([curvature.into(), (-4.0 * PI * PI * s * s).into(), WITH.into()]);
                Ok(row)
            })?;
            let pass = rows.iter().all(|r| {
                let (c, b) = (nums(r, 3), nums(r, 4));
                c <= b + job.tol * b.abs().max(1.0)
            });
            let columns = vec!["modulus", "re", "im", "curvature", "bound", "convention"];
            (Verdict::from_pass(pass), Body::Table(Table { columns, rows }))
        }

        Task::LocalOp { kernel, at, m } => {
            let k = kernel.load()?;
            constants.push(("kernel", json!(kernel.label())));
            let form = canonical_form(&jet_gram(&k, *at, *m)?)?;
            let tt = verify_tt_identity(&k, *at, *m)?;
            let curvature = curvature_scalar(&k, *at)?;
            let pass = form.tt_residual <= AGREEMENT_TOL && tt.relative() <= AGREEMENT_TOL;
            let doc = json!({
                "point": complex(*at),
                "m": form.m,
                "n": form.n,
                "t": matrix(&form.t),
                "R": matrix(&form.r),
                "P": matrix(&form.p),
                "curvature": num(curvature),
                "residual": num(form.tt_residual),
                "inverse_curvature_residual": num(tt.relative()),
            });
            (Verdict::from_pass(pass), Body::Document(doc))
        }

        Task::Check {
            kernel,
            tests,
            points,
            radius,
        } => {
            let k = kernel.load()?;
            constants.extend([
                ("kernel", json!(kernel.label())),
                ("points", json!(points)),
                ("radius", num(*radius)),
            ]);
            check(&k, tests, sample_points(&k, job.seed, *points, *radius), job.tol)?
        }

        Task::Extremal {
            kernel,
            at,
            pipeline,
            truncation,
        } => {
            let k = kernel.load()?;
            constants.push(("kernel", json!(kernel.label())));
            let ws = WeightSequence::from_kernel(&k)?;
            let mut doc = to_json(classify_shift(&ws, *at)?);
            doc["dependence_test"] = to_json(dependence_test(&k, *at, EXTREMAL_TOL)?);
            if *pipeline {
                constants.push(("truncation", json!(truncation)));
                doc["pipeline"] = match uniqueness_pipeline_check(&ws, *at, *truncation) {
                    Ok(report) => {
                        let passed = report.steps.iter().all(|s| s.passed);
                        json!({"passed": passed, "report": to_json(report)})
                    }
                    Err(Error::HypothesisFailed { step, detail }) => {
                        json!({"passed": false, "failed_step": step, "detail": detail})
                    }
                    Err(e) => return Err(e.into()),
                };
            }
            (Verdict::Pass, Body::Document(doc))
        }

        Task::CiCheck {
            domain,
            kernel,
            r,
            weight,
            truncation,
            grid,
            angle,
        } => {
            let (k, points) = ci_inputs(*domain, kernel.as_ref(), *r, weight.as_ref(), *truncation, grid.as_ref(), *angle)?;
            let szego = Szego::for_kernel(&k)?;
            if let Some(src) = kernel {
                constants.push(("kernel", json!(src.label())));
            }
            if let (Some(r), Some(h)) = (r, weight) {
                constants.extend([
                    ("r", num(*r)),
                    ("weight", json!(h.to_string())),
                    ("truncation", json!(truncation)),
                    ("bergman_normalization", json!(BERGMAN_NORM)),
                ]);
            }
            constants.extend([
                ("szego_normalization", json!(szego.formula())),
                ("bound_with4pi2", json!("-4 pi^2 S(w,w)^2")),
                ("bound_without4pi2", json!("-S(w,w)^2")),
            ]);
            let verdicts = par_map(&points, |w| Ok(planar_ci_check(&k, w, szego.at(w)?, job.tol)?))?;
            let mut rows = Vec::with_capacity(2 * points.len());
            for (&w, v) in points.iter().zip(&verdicts) {
                let s2 = v.szego * v.szego;
                let variants = [(-4.0 * PI * PI * s2, v.slack_with4pi2, WITH), (-s2, v.slack_without4pi2, WITHOUT)];
                for (bound, slack, tag) in variants {
                    let mut row = polar_cells(w);
                    row.extend([v.curvature.into(), bound.into(), slack.into(), tag.into()]);
                    rows.push(row);
                }
            }
            let pass = verdicts.iter().all(|v| v.pass);
            let columns = vec!["modulus", "re", "im", "curvature", "bound", "slack", "convention"];
            (Verdict::from_pass(pass), Body::Table(Table { columns, rows }))
        }

        Task::Annulus {
            task,
            r,
            weight,
            truncation,
            grid,
            angle,
            against,
            gap_tol,
        } => {
            let spec = AnnulusSpec::new(*r, *truncation)?;
            constants.extend([
                ("r", num(*r)),
                ("truncation", json!(truncation)),
                ("weight", json!(weight.to_string())),
                ("szego_normalization", json!(ANNULUS_SZEGO)),
                ("bergman_normalization", json!(BERGMAN_NORM)),
            ]);
            let points = match grid {
                Some(g) => {
                    constants.extend([("grid", json!(g.to_string())), ("angle", num(*angle))]);
                    g.points(*angle)
                }
                None => spec.grid(),
            };
            annulus(&spec, *task, weight, &points, *against, *gap_tol, &mut constants)?
        }
    };
    Ok(Artifact {
        task: job.task.name(),
        seed: job.seed,
        tol: job.tol,
        verdict,
        constants,
        body,
    })
}

/// Seeded disc cloud; for annulus kernels the moduli are moved into `(r, radius]`.
fn sample_points(kernel: &SeriesKernel, seed: u64, count: usize, radius: f64) -> Vec<Point> {
    let cloud = disc_cloud(seed, count, radius);
    match kernel.inner_radius() {
        None => cloud,
        Some(r) => {
            let lo = r + 0.05 * (1.0 - r);
            let hi = radius.max(lo);
            cloud
                .into_iter()
                .map(|z| Complex64::from_polar(lo + (hi - lo) * z.norm() / radius, z.arg()))
                .collect()
        }
    }
}

fn check(kernel: &SeriesKernel, tests: &[CheckTest], points: Vec<Point>, tol: f64) -> CliResult<(Verdict, Body)> {
    let annulus = kernel.kind() == SeriesKind::AnnulusLaurent;
    let mut verdicts = Map::new();
    let mut pass = true;
    let weights = || WeightSequence::from_kernel(kernel);
    for &t in tests {
        if annulus && t != CheckTest::Gram {
            return Err(CliError::config(
                "tests",
                format!("{} needs a disc kernel; only gram applies to annulus kernels", t.name()),
            ));
        }
        let (ok, v) = match t {
            CheckTest::Gram => {
                let v = psd_check(&kernel_gram(kernel, &points)?, tol)?;
                (v.pass, to_json(v))
            }
            CheckTest::Contraction => {
                let v = contraction_check(kernel, &points, tol)?;
                (v.pass, to_json(v))
            }
            CheckTest::Hyponormal => {
                let v = hyponormal_check(&weights()?, tol);
                (v.pass, to_json(v))
            }
            CheckTest::TwoHyper => match two_hypercontraction_check(&weights()?, tol) {
                Ok(v) => (v.pass, to_json(v)),
                Err(Error::NotAContraction(reason)) => (false, json!({"pass": false, "reason": reason})),
                Err(e) => return Err(e.into()),
            },
        };
        pass &= ok;
        verdicts.insert(t.name().to_string(), v);
    }
    Ok((Verdict::from_pass(pass), Body::Document(Value::Object(verdicts))))
}

fn ci_inputs(
    domain: CiDomain,
    kernel: Option<&KernelSource>,
    r: Option<f64>,
    weight: Option<&RadialWeight>,
    truncation: usize,
    grid: Option<&GridSpec>,
    angle: f64,
) -> CliResult<(SeriesKernel, Vec<Point>)> {
    let k = match (kernel, r, weight) {
        (Some(src), _, _) => src.load()?,
        (None, Some(r), Some(h)) => weighted_bergman_kernel(&AnnulusSpec::new(r, truncation)?, h)?,
        _ => return Err(CliError::config("kernel", "missing")),
    };
    match (domain, k.inner_radius()) {
        (CiDomain::Disc, Some(_)) => {
            return Err(CliError::config("domain", "disc requested for an annulus kernel"))
        }
        (CiDomain::Annulus, None) => {
            return Err(CliError::config("domain", "annulus requested for a disc kernel"))
        }
        (CiDomain::Annulus, Some(inner)) => {
            if let Some(r) = r.filter(|r| (r - inner).abs() > 0.0) {
                return Err(CliError::config("r", format!("{r} differs from the kernel's inner radius {inner}")));
            }
        }
        _ => {}
    }
    let points = match (grid, k.inner_radius()) {
        (Some(g), _) => g.points(angle),
        (None, None) => GridSpec::new(0.0, 0.9, 10)?.points(angle),
        (None, Some(inner)) => AnnulusSpec::with_default_truncation(inner)?.grid(),
    };
    Ok((k, points))
}

fn annulus(
    spec: &AnnulusSpec,
    task: AnnulusTask,
    weight: &RadialWeight,
    points: &[Point],
    against: Option<f64>,
    gap_tol: f64,
    constants: &mut Vec<(&'static str, Value)>,
) -> CliResult<(Verdict, Body)> {
    let table = |columns: Vec<&'static str>, rows| Body::Table(Table { columns, rows });
    Ok(match task {
        AnnulusTask::Szego => {
            let s = szego_kernel(spec)?;
            let rows = rows_for(points, |w| {
                let mut row = polar_cells(w);
                row.push(s.eval(w, w)?.re.into());
                Ok(row)
            })?;
            (Verdict::Pass, table(vec!["modulus", "re", "im", "szego"], rows))
        }
        AnnulusTask::Bergman => {
            let k = weighted_bergman_kernel(spec, weight)?;
            let rows = k
                .terms()
                .map(|(n, a)| vec![Cell::Int(n), (1.0 / a).into(), a.into()])
                .collect();
            (Verdict::Pass, table(vec!["n", "norm_sq", "coeff"], rows))
        }
        AnnulusTask::StrictCi => {
            let (k, s) = (weighted_bergman_kernel(spec, weight)?, szego_kernel(spec)?);
            constants.push(("slack", json!("d dbar log K - 4 pi^2 S(w,w)^2")));
            let rows = rows_for(points, |w| {
                let v = strict_ci_slack(&k, &s, w)?;
                let mut row = polar_cells(w);
                row.extend([
                    v.ddbar_log_k.into(),
                    v.szego.into(),
                    (4.0 * PI * PI * v.szego * v.szego).into(),
                    v.slack.into(),
                    WITH.into(),
                ]);
                Ok(row)
            })?;
            let pass = rows.iter().all(|r| nums(r, 6) > 0.0);
            let columns = vec!["modulus", "re", "im", "ddbar_log_k", "szego", "bound", "slack", "convention"];
            (Verdict::from_pass(pass), table(columns, rows))
        }
        AnnulusTask::Character => {
            let report = character_of_weight(spec, weight)?;
            let p = period_matrix(spec);
            let doc = json!({"report": to_json(report), "period_matrix": [[num(p[(0, 0)])]]});
            (Verdict::Pass, Body::Document(doc))
        }
        AnnulusTask::Period => {
            let p = period_matrix(spec);
            (Verdict::Pass, Body::Document(json!({"period_matrix": [[num(p[(0, 0)])]]})))
        }
        AnnulusTask::Extremal => {
            let k = weighted_bergman_kernel(spec, weight)?;
            constants.push(("agreement_tol", num(AGREEMENT_TOL)));
            let rows = rows_for(points, |w| {
                let v = extremal_problem(&k, w)?;
                let mut row = polar_cells(w);
                row.extend([v.closed_form.into(), v.least_squares.into(), v.relative_gap.into()]);
                Ok(row)
            })?;
            let pass = rows.iter().all(|r| nums(r, 5) <= AGREEMENT_TOL);
            let columns = vec!["modulus", "re", "im", "closed_form", "least_squares", "relative_gap"];
            (Verdict::from_pass(pass), table(columns, rows))
        }
        AnnulusTask::Equivalence => {
            let RadialWeight::PowerLaw { b } = weight else {
                return Err(CliError::config("weight", "equivalence needs a power weight rho^b"));
            };
            let b2 = against.ok_or_else(|| CliError::config("against", "missing"))?;
            constants.push(("gap_tol", num(gap_tol)));
            let v = character_equivalence_with_tol(spec, *b, b2, gap_tol)?;
            (Verdict::from_pass(v.agree), Body::Document(to_json(v)))
        }
    })
}
