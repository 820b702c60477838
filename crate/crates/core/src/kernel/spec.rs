//! JSON description of a series kernel.
//!
//! ```json
//! {"kind": "disc_diagonal", "coeffs": {"rule": "a_n = n+1"}, "n_max": 200}
//! {"kind": "disc_diagonal", "coeffs": {"rule": "(n+1)^s", "s": 1.5}}
//! {"kind": "disc_diagonal", "coeffs": {"rule": "custom-list", "values": [1, 1, 2, 4]}}
//! {"kind": "annulus_laurent", "inner_radius": 0.5, "coeffs": {"-1": 2.0, "0": 1.0, "1": 2.0}}
//! ```
//!
//! Parse errors name the offending field.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{Map, Value};

use super::{SeriesKernel, SeriesKind, DEFAULT_N_MAX};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum CoeffRule {
    /// `a_n = 1`
    Ones,
    /// `a_n = n + 1`
    Linear,
    /// `a_n = (n + 1)^s`
    Power { s: f64 },
    /// Consecutive values starting at index `n_min`.
    CustomList { n_min: i64, values: Vec<f64> },
    /// Explicit index map; indices must be contiguous.
    Explicit { values: BTreeMap<i64, f64> },
}

impl CoeffRule {
    fn coeff(&self, n: i64) -> f64 {
        match self {
            CoeffRule::Ones => 1.0,
            CoeffRule::Linear => (n + 1) as f64,
            CoeffRule::Power { s } => ((n + 1) as f64).powf(*s),
            CoeffRule::CustomList { .. } | CoeffRule::Explicit { .. } => {
                unreachable!("listed coefficients are not generated")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelSpec {
    pub kind: SeriesKind,
    pub coeffs: CoeffRule,
    pub n_max: i64,
    pub inner_radius: Option<f64>,
}

fn field<'a>(obj: &'a Map<String, Value>, name: &str) -> Option<&'a Value> {
    obj.get(name).filter(|v| !v.is_null())
}

fn as_f64(v: &Value, name: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::spec(name, format!("expected a finite number, got {v}")))
}

fn as_i64(v: &Value, name: &str) -> Result<i64> {
    v.as_i64()
        .ok_or_else(|| Error::spec(name, format!("expected an integer, got {v}")))
}

fn parse_rule(obj: &Map<String, Value>) -> Result<CoeffRule> {
    let raw = field(obj, "rule")
        .ok_or_else(|| Error::spec("coeffs.rule", "missing"))?
        .as_str()
        .ok_or_else(|| Error::spec("coeffs.rule", "expected a string"))?;
    let mut rule: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(rest) = rule.strip_prefix("a_n=") {
        rule = rest.to_string();
    }
    match rule.as_str() {
        "1" => Ok(CoeffRule::Ones),
        "n+1" => Ok(CoeffRule::Linear),
        "custom-list" => {
            let values = field(obj, "values")
                .ok_or_else(|| Error::spec("coeffs.values", "missing (required by custom-list)"))?
                .as_array()
                .ok_or_else(|| Error::spec("coeffs.values", "expected an array"))?
                .iter()
                .enumerate()
                .map(|(i, v)| as_f64(v, &format!("coeffs.values[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            let n_min = field(obj, "n_min")
                .map(|v| as_i64(v, "coeffs.n_min"))
                .transpose()?
                .unwrap_or(0);
            Ok(CoeffRule::CustomList { n_min, values })
        }
        r => {
            let Some(exp) = r.strip_prefix("(n+1)^") else {
                return Err(Error::spec(
                    "coeffs.rule",
                    format!("unknown rule `{raw}`; expected one of 1, n+1, (n+1)^s, custom-list"),
                ));
            };
            let s = if exp == "s" {
                let v = field(obj, "s").ok_or_else(|| Error::spec("coeffs.s", "missing (required by (n+1)^s)"))?;
                as_f64(v, "coeffs.s")?
            } else {
                exp.parse::<f64>()
                    .ok()
                    .filter(|s| s.is_finite())
                    .ok_or_else(|| Error::spec("coeffs.rule", format!("bad exponent `{exp}`")))?
            };
            Ok(CoeffRule::Power { s })
        }
    }
}

fn parse_explicit(obj: &Map<String, Value>) -> Result<CoeffRule> {
    let mut values = BTreeMap::new();
    for (key, v) in obj {
        let name = format!("coeffs.{key}");
        let n: i64 = key
            .trim()
            .parse()
            .map_err(|_| Error::spec(&name, "coefficient keys must be integers"))?;
        values.insert(n, as_f64(v, &name)?);
    }
    if values.is_empty() {
        return Err(Error::spec("coeffs", "no coefficients given"));
    }
    let (&lo, &hi) = (values.keys().next().unwrap(), values.keys().next_back().unwrap());
    if (hi - lo + 1) as usize != values.len() {
        return Err(Error::spec("coeffs", "coefficient indices must be contiguous"));
    }
    Ok(CoeffRule::Explicit { values })
}

impl KernelSpec {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::spec("<document>", format!("malformed JSON: {e}")))?;
        Self::from_json(&value)
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::spec("<document>", "expected a JSON object"))?;
        let kind = match field(obj, "kind").and_then(Value::as_str) {
            Some("disc_diagonal") => SeriesKind::DiscDiagonal,
            Some("annulus_laurent") => SeriesKind::AnnulusLaurent,
            Some(other) => {
                return Err(Error::spec(
                    "kind",
                    format!("unknown kind `{other}`; expected disc_diagonal or annulus_laurent"),
                ))
            }
            None => return Err(Error::spec("kind", "missing or not a string")),
        };
        let coeffs_obj = field(obj, "coeffs")
            .ok_or_else(|| Error::spec("coeffs", "missing"))?
            .as_object()
            .ok_or_else(|| Error::spec("coeffs", "expected an object"))?;
        let coeffs = if coeffs_obj.contains_key("rule") {
            parse_rule(coeffs_obj)?
        } else {
            parse_explicit(coeffs_obj)?
        };
        let n_max = match field(obj, "n_max") {
            Some(v) => {
                let n = as_i64(v, "n_max")?;
                if n < 1 {
                    return Err(Error::spec("n_max", "must be at least 1"));
                }
                n
            }
            None => DEFAULT_N_MAX,
        };
        let inner_radius = field(obj, "inner_radius").map(|v| as_f64(v, "inner_radius")).transpose()?;
        match (kind, inner_radius) {
            (SeriesKind::AnnulusLaurent, None) => {
                return Err(Error::spec("inner_radius", "required for annulus_laurent"))
            }
            (SeriesKind::AnnulusLaurent, Some(r)) if !(r > 0.0 && r < 1.0) => {
                return Err(Error::spec("inner_radius", format!("{r} is not in (0, 1)")))
            }
            (SeriesKind::DiscDiagonal, Some(_)) => {
                return Err(Error::spec("inner_radius", "not allowed for disc_diagonal"))
            }
            _ => {}
        }
        let spec = Self {
            kind,
            coeffs,
            n_max,
            inner_radius,
        };
        spec.build()?;
        Ok(spec)
    }

    /// Instantiates the kernel. Rule-based coefficients fill `0..=n_max` on the
    /// disc and `-n_max..=n_max` on the annulus.
    pub fn build(&self) -> Result<SeriesKernel> {
        let (n_min, values) = match &self.coeffs {
            CoeffRule::CustomList { n_min, values } => (*n_min, values.clone()),
            CoeffRule::Explicit { values } => (*values.keys().next().unwrap(), values.values().copied().collect()),
            rule => {
                let lo = match self.kind {
                    SeriesKind::DiscDiagonal => 0,
                    SeriesKind::AnnulusLaurent => -self.n_max,
                };
                (lo, (lo..=self.n_max).map(|n| rule.coeff(n)).collect())
            }
        };
        let bad = values
            .iter()
            .position(|&a| !(a > 0.0 && a.is_finite()));
        if let Some(i) = bad {
            return Err(Error::spec(
                "coeffs",
                format!("a_{} = {} must be positive", n_min + i as i64, values[i]),
            ));
        }
        match self.kind {
            SeriesKind::DiscDiagonal => {
                if n_min != 0 {
                    return Err(Error::spec("coeffs.n_min", "disc kernels start at n = 0"));
                }
                SeriesKernel::disc(values)
            }
            SeriesKind::AnnulusLaurent => {
                SeriesKernel::annulus(self.inner_radius.unwrap_or(0.5), n_min, values)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(text: &str) -> String {
        match KernelSpec::from_json_str(text) {
            Err(Error::Spec { field, .. }) => field,
            other => panic!("expected a spec error, got {other:?}"),
        }
    }

    #[test]
    fn parses_rules() {
        let k = KernelSpec::from_json_str(r#"{"kind":"disc_diagonal","coeffs":{"rule":"a_n = n+1"},"n_max":10}"#)
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(k.coeffs(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0]);
        let k = KernelSpec::from_json_str(r#"{"kind":"disc_diagonal","coeffs":{"rule":"(n+1)^s","s":2}}"#)
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(k.n_max(), 200);
        assert_eq!(k.coeff(3), Some(16.0));
        let k = KernelSpec::from_json_str(r#"{"kind":"disc_diagonal","coeffs":{"rule":"(n+1)^3"}}"#)
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(k.coeff(1), Some(8.0));
    }

    #[test]
    fn parses_lists_and_maps() {
        let spec = KernelSpec::from_json_str(
            r#"{"kind":"annulus_laurent","inner_radius":0.5,"coeffs":{"-1":2.0,"0":1.0,"1":2.0}}"#,
        )
        .unwrap();
        let k = spec.build().unwrap();
        assert_eq!((k.n_min(), k.n_max()), (-1, 1));
        let k = KernelSpec::from_json_str(
            r#"{"kind":"disc_diagonal","coeffs":{"rule":"custom-list","values":[1,1,2,4]}}"#,
        )
        .unwrap()
        .build()
        .unwrap();
        assert_eq!(k.coeffs(), &[1.0, 1.0, 2.0, 4.0]);
    }

    #[test]
    fn diagnostics_name_fields() {
        assert_eq!(field_of(r#"{"coeffs":{"rule":"1"}}"#), "kind");
        assert_eq!(field_of(r#"{"kind":"disc_diagonal"}"#), "coeffs");
        assert_eq!(field_of(r#"{"kind":"disc_diagonal","coeffs":{"rule":"n^2"}}"#), "coeffs.rule");
        assert_eq!(field_of(r#"{"kind":"disc_diagonal","coeffs":{"rule":"1"},"n_max":"big"}"#), "n_max");
        assert_eq!(field_of(r#"{"kind":"annulus_laurent","coeffs":{"rule":"1"}}"#), "inner_radius");
        assert_eq!(
            field_of(r#"{"kind":"disc_diagonal","coeffs":{"rule":"custom-list","values":[1,"x"]}}"#),
            "coeffs.values[1]"
        );
        assert_eq!(field_of(r#"{"kind":"disc_diagonal","coeffs":{"0":1,"2":1}}"#), "coeffs");
        assert_eq!(field_of(r#"{"kind":"annulus_laurent","inner_radius":0.5,"coeffs":{"rule":"n+1"}}"#), "coeffs");
        assert_eq!(field_of("not json"), "<document>");
    }
}
