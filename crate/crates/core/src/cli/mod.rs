//! Model-file ingestion, command dispatch, and report emission.

pub mod builtin;
mod report;

use std::collections::BTreeMap;

use serde::Deserialize;
use serde_json::Value;

use crate::algebra::{parse_rat, Polynomial, PolyVectorField, Rat};
use crate::error::{Error, Result};
use crate::flags::StructureModel;
use crate::strata::SubmanifoldChart;

pub use report::{run, to_csv, Command, Report, RunOptions};

/// JSON model document. Polynomial strings follow the text grammar of
/// `algebra::Polynomial::parse`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dim: usize,
    #[serde(default)]
    pub vars: Option<Vec<String>>,
    pub fields: Vec<Vec<String>>,
    #[serde(default)]
    pub volume_density: Option<String>,
    #[serde(default)]
    pub strata: Vec<StratumFile>,
    #[serde(default)]
    pub points: BTreeMap<String, Vec<Value>>,
    #[serde(default)]
    pub caps: Option<CapsFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StratumFile {
    pub label: String,
    pub k: usize,
    pub map: Vec<String>,
    pub domain: Vec<Vec<Value>>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CapsFile {
    #[serde(default)]
    pub bracket_depth: Option<usize>,
    #[serde(default)]
    pub tuple_budget: Option<usize>,
}

fn rat_from_value(v: &Value, context: &str) -> Result<Rat> {
    match v {
        Value::String(s) => parse_rat(s),
        Value::Number(num) => {
            if let Some(i) = num.as_i64() {
                Ok(crate::algebra::rat(i))
            } else {
                Err(Error::SyntaxError(format!(
                    "{context}: non-integer numbers are not exact; write them as strings like \"1/2\""
                )))
            }
        }
        other => Err(Error::SyntaxError(format!(
            "{context}: expected a rational, got {other}"
        ))),
    }
}

/// Parse and validate a model document.
pub fn parse_model(text: &str) -> Result<StructureModel> {
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| Error::SyntaxError(e.to_string()))?;
    model_from_file(&file)
}

pub fn model_from_file(file: &ModelFile) -> Result<StructureModel> {
    let n = file.dim;
    let names = file.vars.as_deref();
    if let Some(names) = names {
        if names.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "vars lists {} names for dimension {n}",
                names.len()
            )));
        }
    }
    let mut family = Vec::with_capacity(file.fields.len());
    for (fi, comps) in file.fields.iter().enumerate() {
        if comps.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "field {} has {} components, expected {n}",
                fi + 1,
                comps.len()
            )));
        }
        let polys: Result<Vec<Polynomial>> = comps
            .iter()
            .map(|s| Polynomial::parse(s, n, names))
            .collect();
        family.push(PolyVectorField::new(polys?)?);
    }
    let density = match &file.volume_density {
        Some(s) => Polynomial::parse(s, n, names)?,
        None => Polynomial::one(n),
    };
    let mut strata = Vec::with_capacity(file.strata.len());
    for s in &file.strata {
        let param: Result<Vec<Polynomial>> = s
            .map
            .iter()
            .map(|m| Polynomial::parse(m, s.k, None))
            .collect();
        let mut domain = Vec::with_capacity(s.domain.len());
        for (i, pair) in s.domain.iter().enumerate() {
            if pair.len() != 2 {
                return Err(Error::SyntaxError(format!(
                    "stratum `{}` domain entry {i} must be [lo, hi]",
                    s.label
                )));
            }
            domain.push((
                rat_from_value(&pair[0], &format!("stratum `{}` domain", s.label))?,
                rat_from_value(&pair[1], &format!("stratum `{}` domain", s.label))?,
            ));
        }
        strata.push(SubmanifoldChart {
            label: s.label.clone(),
            k: s.k,
            param: param?,
            domain,
        });
    }
    let mut points = Vec::new();
    for (name, coords) in &file.points {
        let pt: Result<Vec<Rat>> = coords
            .iter()
            .map(|v| rat_from_value(v, &format!("point `{name}`")))
            .collect();
        points.push((name.clone(), pt?));
    }
    let caps = file.caps.as_ref();
    StructureModel::new(
        n,
        family,
        density,
        strata,
        points,
        caps.and_then(|c| c.bracket_depth),
        caps.and_then(|c| c.tuple_budget),
    )
}

/// Resolve `--point`: a named point or a comma-separated rational tuple.
pub fn resolve_point(model: &StructureModel, spec: &str) -> Result<Vec<Rat>> {
    if let Some(p) = model.named_point(spec) {
        return Ok(p.to_vec());
    }
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != model.dim() {
        return Err(Error::MissingInput(format!(
            "point `{spec}` is neither a named point nor a {}-tuple",
            model.dim()
        )));
    }
    parts.iter().map(|s| parse_rat(s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    const MARTINET_JSON: &str = r#"{
        "dim": 3,
        "fields": [["1","0","0"],["0","1","1/2 x1^2"]],
        "strata": [{"label":"S","k":2,"map":["0","x1","x2"],"domain":[[-1,1],[-1,1]]}],
        "points": {"origin": [0,0,0], "reg": [1,0,0]}
    }"#;

    #[test]
    fn parse_martinet() {
        let m = parse_model(MARTINET_JSON).unwrap();
        assert_eq!(m.dim(), 3);
        assert_eq!(m.family_size(), 2);
        assert_eq!(m.strata.len(), 1);
        assert_eq!(m.named_point("origin").unwrap(), &[rat(0), rat(0), rat(0)]);
    }

    #[test]
    fn missing_fields_is_syntax_error() {
        let err = parse_model(r#"{"dim": 2}"#).unwrap_err();
        match err {
            Error::SyntaxError(msg) => assert!(msg.contains("fields"), "{msg}"),
            other => panic!("expected SyntaxError, got {other:?}"),
        }
    }

    #[test]
    fn unknown_variable_in_density() {
        let err = parse_model(
            r#"{"dim": 3, "fields": [["1","0","0"]], "volume_density": "x0"}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnknownVariable(_)), "{err:?}");
        let err = parse_model(
            r#"{"dim": 3, "fields": [["1","0","0"]], "volume_density": "x4"}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnknownVariable(_)), "{err:?}");
    }

    #[test]
    fn component_count_mismatch() {
        let err = parse_model(r#"{"dim": 3, "fields": [["1","0"]]}"#).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn named_variables() {
        let m = parse_model(
            r#"{"dim": 2, "vars": ["u","v"], "fields": [["1","0"],["0","u"]]}"#,
        )
        .unwrap();
        let g = m.family()[1].component(1);
        assert_eq!(g, &Polynomial::parse("x1", 2, None).unwrap());
    }

    #[test]
    fn resolve_point_literal() {
        let m = parse_model(MARTINET_JSON).unwrap();
        assert_eq!(
            resolve_point(&m, "1/2,0,-3").unwrap(),
            vec![crate::algebra::rat_frac(1, 2), rat(0), rat(-3)]
        );
        assert!(resolve_point(&m, "nope").is_err());
    }

    #[test]
    fn inexact_floats_rejected() {
        let err = parse_model(
            r#"{"dim": 1, "fields": [["1"]], "points": {"p": [0.5]}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::SyntaxError(_)));
    }
}
