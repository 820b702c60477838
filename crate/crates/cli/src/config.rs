//! `run --config file.json`.
//!
//! ```json
//! {"task": "curvature", "kernel": "geometric.json", "grid": "0:0.9:10",
//!  "seed": 7, "format": "csv", "out": "curvature.csv"}
//! ```
//!
//! Relative paths are resolved against the directory of the config file.
//! `kernel` may also be an inline kernel object, `grid` an object
//! `{"start", "stop", "steps"}` and `at` a pair `[re, im]`.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};
use crate::job::{parse_point, GridSpec, KernelSource, RawJob};

pub fn load(path: &Path) -> CliResult<RawJob> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse(&text, &base)
}

fn f64_of(v: &Value, field: &str) -> CliResult<f64> {
    v.as_f64()
        .ok_or_else(|| CliError::config(field, format!("expected a number, got {v}")))
}

fn usize_of(v: &Value, field: &str) -> CliResult<usize> {
    v.as_u64()
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| CliError::config(field, format!("expected a non-negative integer, got {v}")))
}

fn str_of<'a>(v: &'a Value, field: &str) -> CliResult<&'a str> {
    v.as_str()
        .ok_or_else(|| CliError::config(field, format!("expected a string, got {v}")))
}

fn bool_of(v: &Value, field: &str) -> CliResult<bool> {
    v.as_bool()
        .ok_or_else(|| CliError::config(field, format!("expected true or false, got {v}")))
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = PathBuf::from(p);
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

fn grid_of(v: &Value) -> CliResult<GridSpec> {
    match v {
        Value::String(s) => GridSpec::parse(s),
        Value::Object(o) => {
            let get = |k: &str| {
                o.get(k)
                    .ok_or_else(|| CliError::config(format!("grid.{k}"), "missing"))
            };
            for k in o.keys() {
                if !matches!(k.as_str(), "start" | "stop" | "steps") {
                    return Err(CliError::config(format!("grid.{k}"), "unknown key"));
                }
            }
            GridSpec::new(
                f64_of(get("start")?, "grid.start")?,
                f64_of(get("stop")?, "grid.stop")?,
                usize_of(get("steps")?, "grid.steps")?,
            )
        }
        other => Err(CliError::config("grid", format!("expected \"r0:r1:steps\" or an object, got {other}"))),
    }
}

fn point_of(v: &Value) -> CliResult<Complex64> {
    match v {
        Value::String(s) => parse_point(s, "at"),
        Value::Number(_) => Ok(Complex64::new(f64_of(v, "at")?, 0.0)),
        Value::Array(xs) if xs.len() == 2 => Ok(Complex64::new(f64_of(&xs[0], "at[0]")?, f64_of(&xs[1], "at[1]")?)),
        other => Err(CliError::config("at", format!("expected [re, im], a number or \"re,im\", got {other}"))),
    }
}

pub fn parse(text: &str, base: &Path) -> CliResult<RawJob> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| CliError::config("<config>", format!("malformed JSON: {e}")))?;
    let obj: &Map<String, Value> = value
        .as_object()
        .ok_or_else(|| CliError::config("<config>", "expected a JSON object"))?;
    let mut raw = RawJob::default();
    let mut task = None;
    for (key, v) in obj {
        let k = key.as_str();
        match k {
            "task" => task = Some(str_of(v, k)?.to_string()),
            "annulus_task" => raw.annulus_task = Some(str_of(v, k)?.to_string()),
            "kernel" => {
                raw.kernel = Some(match v {
                    Value::Object(_) => KernelSource::Inline(v.to_string()),
                    _ => KernelSource::File(resolve(base, str_of(v, k)?)),
                })
            }
            "grid" => raw.grid = Some(grid_of(v)?),
            "angle" => raw.angle = Some(f64_of(v, k)?),
            "at" => raw.at = Some(point_of(v)?),
            "tol" => raw.tol = Some(f64_of(v, k)?),
            "seed" => {
                raw.seed = Some(
                    v.as_u64()
                        .ok_or_else(|| CliError::config(k, format!("expected a non-negative integer, got {v}")))?,
                )
            }
            "format" => raw.format = Some(str_of(v, k)?.to_string()),
            "out" => raw.out = Some(resolve(base, str_of(v, k)?)),
            "m" => raw.m = Some(usize_of(v, k)?),
            "tests" => {
                raw.tests = Some(match v {
                    Value::String(s) => s.split(',').map(str::to_string).collect(),
                    Value::Array(xs) => xs
                        .iter()
                        .enumerate()
                        .map(|(i, x)| str_of(x, &format!("tests[{i}]")).map(str::to_string))
                        .collect::<CliResult<_>>()?,
                    other => return Err(CliError::config(k, format!("expected a list, got {other}"))),
                })
            }
            "points" => raw.points = Some(usize_of(v, k)?),
            "radius" => raw.radius = Some(f64_of(v, k)?),
            "pipeline" => raw.pipeline = bool_of(v, k)?,
            "truncation" => raw.truncation = Some(usize_of(v, k)?),
            "domain" => raw.domain = Some(str_of(v, k)?.to_string()),
            "r" => raw.r = Some(f64_of(v, k)?),
            "weight" => raw.weight = Some(str_of(v, k)?.to_string()),
            "against" => raw.against = Some(f64_of(v, k)?),
            "gap_tol" => raw.gap_tol = Some(f64_of(v, k)?),
            _ => return Err(CliError::config(k, "unknown key")),
        }
    }
    raw.task = task.ok_or_else(|| CliError::config("task", "missing"))?;
    Ok(raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(text: &str) -> String {
        match parse(text, Path::new("")).and_then(RawJob::build) {
            Err(CliError::Config { field, .. }) => field,
            other => panic!("{text}: {other:?}"),
        }
    }

    #[test]
    fn relative_paths_follow_the_config() {
        let raw = parse(r#"{"task": "curvature", "kernel": "k.json", "out": "o.csv"}"#, Path::new("/tmp/x")).unwrap();
        assert_eq!(raw.kernel, Some(KernelSource::File(PathBuf::from("/tmp/x/k.json"))));
        assert_eq!(raw.out, Some(PathBuf::from("/tmp/x/o.csv")));
    }

    #[test]
    fn structured_values() {
        let raw = parse(
            r#"{"task": "extremal", "kernel": {"kind": "disc_diagonal", "coeffs": {"rule": "1"}},
                "at": [0.1, 0.2], "grid": {"start": 0, "stop": 0.5, "steps": 3}}"#,
            Path::new(""),
        )
        .unwrap();
        assert!(matches!(raw.kernel, Some(KernelSource::Inline(_))));
        assert_eq!(raw.at, Some(Complex64::new(0.1, 0.2)));
        assert_eq!(raw.grid.unwrap().steps, 3);
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(field_of(r#"{"task": "curvature", "kernel": "k", "colour": 1}"#), "colour");
        assert_eq!(field_of(r#"{"kernel": "k"}"#), "task");
        assert_eq!(field_of(r#"{"task": "curvature", "kernel": "k", "grid": {"start": 0, "stop": 1}}"#), "grid.steps");
        assert_eq!(field_of(r#"{"task": "curvature", "kernel": "k", "seed": -1}"#), "seed");
        assert_eq!(field_of(r#"{"task": "annulus", "annulus_task": "period", "r": 2}"#), "r");
        assert_eq!(field_of("[1]"), "<config>");
    }
}
