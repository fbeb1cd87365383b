//! Built-in example structures and their stored expected invariants.
//!
//! `run_examples_suite` recomputes every stored expectation and reports
//! mismatches; the CLI maps any mismatch to a nonzero exit code.

use serde::Serialize;
use serde_json::json;

use crate::algebra::{rat, Polynomial};
use crate::cli::parse_model;
use crate::error::Result;
use crate::flags::{self, Classification, SampleSpec, StructureModel};
use crate::measure::{self, Homogeneity, OrderBound};
use crate::strata;
use crate::verdict::{self, Conclusion, Criterion};

pub const BUILTIN_NAMES: [&str; 7] = [
    "heisenberg",
    "grushin",
    "martinet",
    "ar3",
    "ar4",
    "r5",
    "ordergap",
];

/// Built-in model by name; `k` parametrizes the five-dimensional family.
pub fn builtin(name: &str, k: u32) -> Option<StructureModel> {
    let text = match name {
        "heisenberg" => r#"{
            "dim": 3,
            "fields": [["1","0","0"],["0","1","x1"]],
            "points": {"origin": [0,0,0], "probe": [1,1,1]}
        }"#
        .to_string(),
        "grushin" => r#"{
            "dim": 2,
            "fields": [["1","0"],["0","x1"]],
            "strata": [{"label":"S","k":1,"map":["0","x1"],"domain":[[-1,1]]}],
            "points": {"origin": [0,0], "reg": [1,0]}
        }"#
        .to_string(),
        "martinet" => r#"{
            "dim": 3,
            "fields": [["1","0","0"],["0","1","1/2 x1^2"]],
            "strata": [{"label":"S","k":2,"map":["0","x1","x2"],"domain":[[-1,1],[-1,1]]}],
            "points": {"origin": [0,0,0], "reg": [1,0,0], "reg2": [2,0,0]}
        }"#
        .to_string(),
        "ar3" => r#"{
            "dim": 3,
            "fields": [["1","0","0"],["0","1","0"],["0","0","x1^2 + x2^2"]],
            "strata": [{"label":"S","k":1,"map":["0","0","x1"],"domain":[[-1,1]]}],
            "points": {"origin": [0,0,0]}
        }"#
        .to_string(),
        "ar4" => r#"{
            "dim": 4,
            "fields": [["1","0","0","0"],["0","1","0","0"],["0","0","1","0"],["0","0","0","x1^2 + x2^2 + x3^2"]],
            "strata": [{"label":"S","k":1,"map":["0","0","0","x1"],"domain":[[-1,1]]}],
            "points": {"origin": [0,0,0,0]}
        }"#
        .to_string(),
        "r5" => {
            let last = if k == 1 {
                "x1 + x2".to_string()
            } else {
                format!("x1^{k} + x2^{k}")
            };
            format!(
                r#"{{
                "dim": 5,
                "fields": [["1","0","0","0","0"],["0","1","x1","0","x1^2"],["0","0","0","1","{last}"]],
                "strata": [{{"label":"S","k":3,"map":["0","0","x1","x2","x3"],"domain":[[-1,1],[-1,1],[-1,1]]}}],
                "points": {{"origin": [0,0,0,0,0]}}
            }}"#
            )
        }
        "ordergap" => r#"{
            "dim": 4,
            "fields": [["1","0","0","0"],["0","1","x1","x1^2 x3^2 - x1 x2^2"]],
            "strata": [{"label":"S","k":2,"map":["x1","0","0","x2"],"domain":[["-1/2","1/2"],[-1,1]]}],
            "points": {"origin": [0,0,0,0]}
        }"#
        .to_string(),
        _ => return None,
    };
    Some(parse_model(&text).expect("built-in model must parse"))
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub model: String,
    pub name: String,
    pub expected: String,
    pub got: String,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct ExamplesOutcome {
    pub k: u32,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

struct Expect {
    name: &'static str,
    origin_growth: &'static [usize],
    origin_q: u64,
    origin_class: Classification,
    q_reg: u64,
    stratum: Option<ExpectStratum>,
}

struct ExpectStratum {
    restricted_growth: Vec<usize>,
    q_n: u64,
    family_size: usize,
    rho_min: u32,
    homogeneous_two_rho: Option<i64>,
    verdict: Conclusion,
    regular_part: Conclusion,
    criteria_contain: Vec<Criterion>,
}

fn expectations(k: u32) -> Vec<Expect> {
    vec![
        Expect {
            name: "heisenberg",
            origin_growth: &[2, 3],
            origin_q: 4,
            origin_class: Classification::Regular,
            q_reg: 4,
            stratum: None,
        },
        Expect {
            name: "grushin",
            origin_growth: &[1, 2],
            origin_q: 3,
            origin_class: Classification::Singular,
            q_reg: 2,
            stratum: Some(ExpectStratum {
                restricted_growth: vec![0, 1],
                q_n: 2,
                family_size: 1,
                rho_min: 1,
                homogeneous_two_rho: Some(2),
                verdict: Conclusion::NotIntegrable,
                regular_part: Conclusion::NotRadon,
                criteria_contain: vec![Criterion::DimensionComparison],
            }),
        },
        Expect {
            name: "martinet",
            origin_growth: &[2, 2, 3],
            origin_q: 5,
            origin_class: Classification::Singular,
            q_reg: 4,
            stratum: Some(ExpectStratum {
                restricted_growth: vec![1, 1, 2],
                q_n: 4,
                family_size: 1,
                rho_min: 1,
                homogeneous_two_rho: Some(2),
                verdict: Conclusion::NotIntegrable,
                regular_part: Conclusion::NotRadon,
                criteria_contain: vec![
                    Criterion::DimensionComparison,
                    Criterion::CodimensionOne,
                ],
            }),
        },
        Expect {
            name: "ar3",
            origin_growth: &[2, 2, 3],
            origin_q: 5,
            origin_class: Classification::Singular,
            q_reg: 3,
            stratum: Some(ExpectStratum {
                restricted_growth: vec![0, 0, 1],
                q_n: 3,
                family_size: 1,
                rho_min: 2,
                homogeneous_two_rho: Some(4),
                verdict: Conclusion::NotIntegrable,
                regular_part: Conclusion::NotRadon,
                criteria_contain: vec![Criterion::DimensionComparison],
            }),
        },
        Expect {
            name: "ar4",
            origin_growth: &[3, 3, 4],
            origin_q: 6,
            origin_class: Classification::Singular,
            q_reg: 4,
            stratum: Some(ExpectStratum {
                restricted_growth: vec![0, 0, 1],
                q_n: 3,
                family_size: 1,
                rho_min: 2,
                homogeneous_two_rho: Some(4),
                verdict: Conclusion::Integrable,
                regular_part: Conclusion::Integrable,
                criteria_contain: vec![],
            }),
        },
        Expect {
            name: "r5",
            origin_growth: if k >= 2 { &[3, 4, 5] } else { &[3, 5] },
            origin_q: if k >= 2 { 8 } else { 7 },
            origin_class: if k >= 2 {
                Classification::Singular
            } else {
                Classification::Regular
            },
            q_reg: 7,
            stratum: Some(ExpectStratum {
                restricted_growth: if k >= 2 { vec![1, 2, 3] } else { vec![1, 3] },
                q_n: if k >= 2 { 6 } else { 5 },
                family_size: if k >= 2 { 2 } else { 1 },
                rho_min: k - 1,
                homogeneous_two_rho: Some(2 * (k as i64 - 1)),
                verdict: if k <= 2 {
                    Conclusion::Integrable
                } else {
                    Conclusion::NotIntegrable
                },
                regular_part: if k <= 2 {
                    Conclusion::Integrable
                } else {
                    Conclusion::NotRadon
                },
                criteria_contain: vec![],
            }),
        },
        Expect {
            name: "ordergap",
            origin_growth: &[2, 3, 3, 4],
            origin_q: 8,
            origin_class: Classification::Singular,
            q_reg: 7,
            stratum: Some(ExpectStratum {
                restricted_growth: vec![1, 1, 1, 2],
                q_n: 5,
                family_size: 2,
                rho_min: 1,
                homogeneous_two_rho: None,
                verdict: Conclusion::Inconclusive,
                regular_part: Conclusion::Inconclusive,
                criteria_contain: vec![],
            }),
        },
    ]
}

fn push(checks: &mut Vec<Check>, model: &str, name: &str, expected: String, got: String) {
    let pass = expected == got;
    checks.push(Check {
        model: model.to_string(),
        name: name.to_string(),
        expected,
        got,
        pass,
    });
}

/// Recompute all stored expectations for the built-in suite.
pub fn run_examples_suite(k: u32, seed: u64) -> Result<ExamplesOutcome> {
    let mut checks = Vec::new();
    for exp in expectations(k) {
        let model = builtin(exp.name, k).unwrap();
        let origin = model.named_point("origin").unwrap().to_vec();
        let spec = SampleSpec {
            seed,
            ..SampleSpec::default()
        };

        let flag = flags::classify_point(
            &model,
            &origin,
            model.bracket_depth_cap,
            &rat(1),
            8,
            seed,
        )?;
        push(
            &mut checks,
            exp.name,
            "origin growth vector",
            format!("{:?}", exp.origin_growth),
            format!("{:?}", flag.growth),
        );
        push(
            &mut checks,
            exp.name,
            "origin Q",
            exp.origin_q.to_string(),
            flag.q.to_string(),
        );
        push(
            &mut checks,
            exp.name,
            "origin classification",
            format!("{:?}", exp.origin_class),
            format!("{:?}", flag.classification),
        );

        let qr = flags::q_reg(&model, &spec)?;
        push(
            &mut checks,
            exp.name,
            "Q_R",
            exp.q_reg.to_string(),
            qr.q_reg.to_string(),
        );

        let Some(stratum_exp) = exp.stratum else {
            // No strata: still confirm the tuple family exists.
            let family = measure::enumerate_family(&model, qr.q_reg)?;
            push(
                &mut checks,
                exp.name,
                "family size",
                "1".into(),
                family.len().to_string(),
            );
            continue;
        };
        let chart = model.stratum("S").unwrap().clone();
        let sr = strata::equisingular_check(&model, &chart, 4, seed)?;
        push(
            &mut checks,
            exp.name,
            "stratum equisingular",
            "true".into(),
            sr.equisingular.to_string(),
        );
        push(
            &mut checks,
            exp.name,
            "restricted growth",
            format!("{:?}", stratum_exp.restricted_growth),
            format!("{:?}", sr.restricted_growth),
        );
        push(
            &mut checks,
            exp.name,
            "Q_N",
            stratum_exp.q_n.to_string(),
            sr.q_n.to_string(),
        );

        let family = measure::enumerate_family(&model, qr.q_reg)?;
        push(
            &mut checks,
            exp.name,
            "family size",
            stratum_exp.family_size.to_string(),
            family.len().to_string(),
        );
        if exp.name == "martinet" {
            push(
                &mut checks,
                exp.name,
                "determinant",
                "x1".into(),
                family.dets[0].poly.to_string(),
            );
        }
        if exp.name == "ar3" {
            let target = Polynomial::parse("x1^2 + x2^2", 3, None).unwrap();
            let ratio = family.dets[0].poly.constant_ratio(&target);
            push(
                &mut checks,
                exp.name,
                "nu proportional to x1^2 + x2^2",
                "positive ratio".into(),
                match ratio {
                    Some(c) if c > rat(0) => "positive ratio".into(),
                    other => format!("{other:?}"),
                },
            );
        }
        if exp.name == "ordergap" {
            let dets: Vec<String> = family.dets.iter().map(|d| d.poly.to_string()).collect();
            push(
                &mut checks,
                exp.name,
                "determinants",
                "[\"2 x3^2\", \"2 x2 - 2 x1^2 x3\"]".into(),
                format!("{dets:?}"),
            );
        }

        let rho = measure::rho_report(
            &model,
            &family,
            &origin,
            &chart,
            sr.q_n,
            qr.q_reg,
            &measure::RhoOptions {
                seed,
                ..Default::default()
            },
        )?;
        push(
            &mut checks,
            exp.name,
            "rho_min",
            format!("{:?}", OrderBound::Exact(stratum_exp.rho_min)),
            format!("{:?}", rho.rho_min),
        );
        let two_rho_got = match rho.homogeneity {
            Homogeneity::Yes { two_rho } => Some(two_rho),
            _ => None,
        };
        push(
            &mut checks,
            exp.name,
            "homogeneity (2 rho)",
            format!("{:?}", stratum_exp.homogeneous_two_rho),
            format!("{two_rho_got:?}"),
        );

        let v = verdict::point_verdict(&rho);
        push(
            &mut checks,
            exp.name,
            "point verdict",
            format!("{:?}", stratum_exp.verdict),
            format!("{:?}", v.conclusion),
        );

        let decomposition = verdict::decomposition_report(
            &model,
            &verdict::DecompositionOptions {
                sample_spec: spec,
                rho: measure::RhoOptions {
                    seed,
                    ..Default::default()
                },
                quad_samples: 800,
                ..Default::default()
            },
        )?;
        push(
            &mut checks,
            exp.name,
            "regular part",
            format!("{:?}", stratum_exp.regular_part),
            format!("{:?}", decomposition.regular_part),
        );
        for criterion in &stratum_exp.criteria_contain {
            push(
                &mut checks,
                exp.name,
                &format!("criterion {}", criterion.id()),
                "fired".into(),
                if decomposition.regular_part_criteria.contains(criterion) {
                    "fired".into()
                } else {
                    "absent".into()
                },
            );
        }
        if exp.name == "ordergap" {
            let quad = decomposition
                .strata
                .first()
                .and_then(|s| s.quad.as_ref())
                .map(|q| format!("{:?}", q.verdict))
                .unwrap_or_else(|| "missing".into());
            push(
                &mut checks,
                exp.name,
                "advisory quadrature",
                "Converges".into(),
                quad,
            );
        }
    }
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(ExamplesOutcome { k, checks, all_pass })
}

impl ExamplesOutcome {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "k": self.k,
            "all_pass": self.all_pass,
            "checks": self.checks,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse() {
        for name in BUILTIN_NAMES {
            assert!(builtin(name, 2).is_some(), "{name}");
        }
        assert!(builtin("nope", 2).is_none());
    }

    #[test]
    fn suite_k2_passes() {
        let outcome = run_examples_suite(2, 42).unwrap();
        for c in &outcome.checks {
            assert!(c.pass, "{}/{}: expected {}, got {}", c.model, c.name, c.expected, c.got);
        }
        assert!(outcome.all_pass);
    }

    #[test]
    fn suite_k3_not_integrable() {
        let outcome = run_examples_suite(3, 42).unwrap();
        for c in &outcome.checks {
            assert!(c.pass, "{}/{}: expected {}, got {}", c.model, c.name, c.expected, c.got);
        }
    }
}
