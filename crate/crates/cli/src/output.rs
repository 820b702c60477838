//! Rendering and atomic writing of artifacts.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};
use tempfile::NamedTempFile;

use crate::error::{CliError, CliResult};
use crate::job::Format;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Violation,
}

impl Verdict {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Violation
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Violation => "violation",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_f64(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => num(*x),
            Cell::Int(n) => json!(n),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Shortest decimal that reads back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:?}")
    }
}

/// JSON has no infinities; those become strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(fmt_f64(x))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Body {
    Table(Table),
    Document(Value),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub task: String,
    pub seed: u64,
    pub tol: f64,
    pub verdict: Verdict,
    /// Normalization constants and inputs, in display order.
    pub constants: Vec<(&'static str, Value)>,
    pub body: Body,
}

fn constant_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_f64() => n.as_f64().map(fmt_f64).unwrap_or_else(|| n.to_string()),
        Value::Number(n) => n.to_string(),
        other => other.to_string(),
    }
}

impl Artifact {
    pub fn default_format(&self) -> Format {
        match self.body {
            Body::Table(_) => Format::Csv,
            Body::Document(_) => Format::Json,
        }
    }

    pub fn render(&self, format: Format) -> CliResult<String> {
        match format {
            Format::Csv => self.csv(),
            Format::Json => Ok(self.json()),
        }
    }

    fn csv(&self) -> CliResult<String> {
        let Body::Table(table) = &self.body else {
            return Err(CliError::config(
                "format",
                format!("task {} produces a JSON document; use --format json", self.task),
            ));
        };
        let mut s = format!(
            "# rkhs-lab {} task={} seed={} tol={} verdict={}\n",
            env!("CARGO_PKG_VERSION"),
            self.task,
            self.seed,
            fmt_f64(self.tol),
            self.verdict.name()
        );
        for (k, v) in &self.constants {
            s.push_str(&format!("# {k}={}\n", constant_text(v)));
        }
        s.push_str(&table.columns.join(","));
        s.push('\n');
        for row in &table.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        Ok(s)
    }

    fn json(&self) -> String {
        let result = match &self.body {
            Body::Table(t) => json!({
                "columns": t.columns,
                "rows": t.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            }),
            Body::Document(v) => v.clone(),
        };
        let constants: Map<String, Value> = self.constants.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
        let doc = json!({
            "tool": "rkhs-lab",
            "version": env!("CARGO_PKG_VERSION"),
            "task": self.task,
            "seed": self.seed,
            "tol": num(self.tol),
            "verdict": self.verdict.name(),
            "constants": constants,
            "result": result,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
        s.push('\n');
        s
    }
}

/// Writes through a temporary file in the target directory and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn artifact(body: Body) -> Artifact {
        Artifact {
            task: "t".into(),
            seed: 3,
            tol: 1e-10,
            verdict: Verdict::Pass,
            constants: vec![("szego_normalization", json!("1/(2 pi)"))],
            body,
        }
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 1e300, f64::MIN_POSITIVE, 123456.789] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn csv_has_metadata_then_header() {
        let a = artifact(Body::Table(Table {
            columns: vec!["x", "tag"],
            rows: vec![vec![Cell::Num(0.5), "with4pi2".into()]],
        }));
        let text = a.render(Format::Csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].contains("seed=3"));
        assert_eq!(lines[1], "# szego_normalization=1/(2 pi)");
        assert_eq!(lines[2], "x,tag");
        assert_eq!(lines[3], "0.5,with4pi2");
    }

    #[test]
    fn documents_refuse_csv() {
        let a = artifact(Body::Document(json!({"a": 1})));
        assert!(matches!(a.render(Format::Csv), Err(CliError::Config { .. })));
        let v: Value = serde_json::from_str(&a.render(Format::Json).unwrap()).unwrap();
        assert_eq!(v["seed"], 3);
        assert_eq!(v["result"]["a"], 1);
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, "one").unwrap();
        write_atomic(&path, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
