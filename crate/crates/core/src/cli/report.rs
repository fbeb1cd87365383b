//! Command dispatch and the JSON/CSV report envelope.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::{rat_to_string, Rat};
use crate::cli::{builtin, resolve_point};
use crate::coords;
use crate::error::{Error, Result};
use crate::flags::{self, SampleSpec, StructureModel};
use crate::measure;
use crate::numerics;
use crate::strata;
use crate::verdict;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Flags,
    Strata,
    Nu,
    Rho,
    Verdict,
    Quad,
    Ballbox,
    Examples,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Flags => "flags",
            Command::Strata => "strata",
            Command::Nu => "nu",
            Command::Rho => "rho",
            Command::Verdict => "verdict",
            Command::Quad => "quad",
            Command::Ballbox => "ballbox",
            Command::Examples => "examples",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub point: Option<String>,
    pub stratum: Option<String>,
    pub seed: u64,
    pub depth: Option<usize>,
    pub budget: Option<usize>,
    pub shells: usize,
    pub samples: usize,
    pub k: u32,
    pub grid: Option<String>,
    pub eps_list: Vec<f64>,
    pub segments: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            point: None,
            stratum: None,
            seed: 42,
            depth: None,
            budget: None,
            shells: 8,
            samples: 2000,
            k: 2,
            grid: None,
            eps_list: vec![0.5, 0.25, 0.125],
            segments: 8,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Timings {
    pub total_ms: f64,
}

/// Report envelope. The `results` subtree is a pure function of the model,
/// command, options, and seed; reruns reproduce it byte for byte.
#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub seed: u64,
    pub results: Value,
    pub timings: Timings,
}

impl Report {
    pub fn results_bytes(&self) -> String {
        serde_json::to_string(&self.results).expect("results serialize")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialize")
    }
}

fn point_json(p: &[Rat]) -> Value {
    Value::Array(p.iter().map(|r| Value::String(rat_to_string(r))).collect())
}

fn flag_json(f: &flags::FlagReport) -> Value {
    json!({
        "point": point_json(&f.point),
        "growth": f.growth,
        "weights": f.weights,
        "q": f.q,
        "classification": f.classification,
    })
}

fn stratum_json(s: &strata::StratumReport) -> Value {
    json!({
        "label": s.label,
        "k": s.k,
        "restricted_growth": s.restricted_growth,
        "ambient_growth": s.ambient_growth,
        "q_n": s.q_n,
        "q_ambient": s.q_ambient,
        "equisingular": s.equisingular,
        "hausdorff_dim": s.hausdorff_dim,
        "samples": s.samples.iter().map(|u| point_json(u)).collect::<Vec<_>>(),
    })
}

fn rho_json(r: &measure::RhoReport) -> Value {
    json!({
        "point": point_json(&r.point),
        "stratum": r.stratum,
        "rho_min": r.rho_min,
        "rho_min_stabilized": r.rho_min_stabilized,
        "e_min": r.e_min,
        "q_p": r.q_p,
        "q_n": r.q_n,
        "q_r": r.q_r,
        "codim": r.codim,
        "threshold": r.threshold,
        "homogeneity": r.homogeneity,
        "rho_max": r.rho_max,
        "rho_max_value": r.rho_max.value(),
    })
}

fn verdict_json(v: &verdict::Verdict) -> Value {
    json!({
        "conclusion": v.conclusion,
        "criterion": v.criterion.map(|c| c.id()),
        "satisfied": v.satisfied.iter().map(|c| c.id()).collect::<Vec<_>>(),
        "exact": v.exact,
        "inputs": v.inputs,
        "notes": v.notes,
    })
}

fn summary_json(s: &strata::DimensionSummary) -> Value {
    json!({
        "q_reg": s.q_reg,
        "q_reg_constant": s.q_reg_constant,
        "dim_h": s.dim_h,
        "dim_h_singular": s.dim_h_singular,
        "case": s.case,
        "strata": s.strata.iter().map(stratum_json).collect::<Vec<_>>(),
    })
}

fn decomposition_json(d: &verdict::DecompositionReport) -> Value {
    json!({
        "summary": summary_json(&d.summary),
        "lebesgue": d.lebesgue,
        "singular_part_mutually_singular": d.singular_part_mutually_singular,
        "regular_part": d.regular_part,
        "regular_part_criteria": d.regular_part_criteria.iter().map(|c| c.id()).collect::<Vec<_>>(),
        "notes": d.notes,
        "strata": d.strata.iter().map(|s| json!({
            "stratum": stratum_json(&s.stratum),
            "rho": s.rho.as_ref().map(rho_json),
            "verdict": s.verdict.as_ref().map(verdict_json),
            "quad": s.quad,
        })).collect::<Vec<_>>(),
    })
}

fn require_point(model: &StructureModel, opts: &RunOptions) -> Result<Vec<Rat>> {
    let spec = opts
        .point
        .as_deref()
        .ok_or_else(|| Error::MissingInput("--point is required".into()))?;
    resolve_point(model, spec)
}

fn require_stratum<'m>(
    model: &'m StructureModel,
    opts: &RunOptions,
) -> Result<&'m strata::SubmanifoldChart> {
    let label = opts
        .stratum
        .as_deref()
        .ok_or_else(|| Error::MissingInput("--stratum is required".into()))?;
    model
        .stratum(label)
        .ok_or_else(|| Error::MissingInput(format!("no stratum labeled `{label}`")))
}

fn sample_spec(opts: &RunOptions) -> SampleSpec {
    SampleSpec {
        seed: opts.seed,
        ..SampleSpec::default()
    }
}

/// Execute a command against a model (ignored by `examples`, which runs the
/// built-in suite) and wrap the results in the report envelope.
pub fn run(command: Command, model: Option<&StructureModel>, opts: &RunOptions) -> Result<Report> {
    let start = Instant::now();
    let mut inputs = BTreeMap::new();
    if let Some(p) = &opts.point {
        inputs.insert("point".to_string(), p.clone());
    }
    if let Some(s) = &opts.stratum {
        inputs.insert("stratum".to_string(), s.clone());
    }
    inputs.insert("k".to_string(), opts.k.to_string());

    let results = match command {
        Command::Examples => {
            let outcome = builtin::run_examples_suite(opts.k, opts.seed)?;
            outcome.to_json()
        }
        _ => {
            let model =
                model.ok_or_else(|| Error::MissingInput("a model is required".into()))?;
            dispatch(command, model, opts)?
        }
    };
    Ok(Report {
        schema_version: 1,
        command: command.name().to_string(),
        inputs,
        seed: opts.seed,
        results,
        timings: Timings {
            total_ms: start.elapsed().as_secs_f64() * 1e3,
        },
    })
}

fn dispatch(command: Command, model: &StructureModel, opts: &RunOptions) -> Result<Value> {
    let depth = opts.depth.unwrap_or(model.bracket_depth_cap);
    match command {
        Command::Flags => {
            let p = require_point(model, opts)?;
            let flag = flags::classify_point(
                model,
                &p,
                depth,
                &crate::algebra::rat(1),
                8,
                opts.seed,
            )?;
            Ok(flag_json(&flag))
        }
        Command::Strata => {
            if opts.stratum.is_some() {
                let chart = require_stratum(model, opts)?;
                let report = strata::equisingular_check(model, chart, 4, opts.seed)?;
                Ok(stratum_json(&report))
            } else {
                let summary =
                    strata::stratum_dimension_summary(model, &sample_spec(opts), 4)?;
                Ok(summary_json(&summary))
            }
        }
        Command::Nu => {
            let qr = flags::q_reg(model, &sample_spec(opts))?;
            let family = measure::enumerate_family(model, qr.q_reg)?;
            let mut values = Vec::new();
            let points: Vec<(String, Vec<Rat>)> = match &opts.point {
                Some(spec) => vec![(spec.clone(), resolve_point(model, spec)?)],
                None => model.points.clone(),
            };
            for (name, p) in &points {
                let pf: Vec<f64> = p
                    .iter()
                    .map(|r| num_traits::ToPrimitive::to_f64(r).unwrap())
                    .collect();
                values.push(json!({
                    "point": name,
                    "coords": point_json(p),
                    "nu": measure::nu(&family, &pf)?,
                    "nu_bar": measure::nu_bar(&family, &pf)?,
                }));
            }
            let grid = match &opts.grid {
                Some(spec) => Some(nu_grid(model, &family, opts, spec)?),
                None => None,
            };
            Ok(json!({
                "q_r": qr.q_reg,
                "family_size": family.len(),
                "pruning": family.pruning,
                "determinants": family.dets.iter().map(|d| d.poly.to_string()).collect::<Vec<_>>(),
                "values": values,
                "grid": grid,
            }))
        }
        Command::Rho => {
            let p = require_point(model, opts)?;
            let chart = require_stratum(model, opts)?;
            let qr = flags::q_reg(model, &sample_spec(opts))?;
            let sr = strata::equisingular_check(model, chart, 4, opts.seed)?;
            let family = measure::enumerate_family(model, qr.q_reg)?;
            let rho = measure::rho_report(
                model,
                &family,
                &p,
                chart,
                sr.q_n,
                qr.q_reg,
                &measure::RhoOptions {
                    seed: opts.seed,
                    ..Default::default()
                },
            )?;
            Ok(rho_json(&rho))
        }
        Command::Verdict => {
            if opts.point.is_some() && opts.stratum.is_some() {
                let p = require_point(model, opts)?;
                let chart = require_stratum(model, opts)?;
                let qr = flags::q_reg(model, &sample_spec(opts))?;
                let sr = strata::equisingular_check(model, chart, 4, opts.seed)?;
                let family = measure::enumerate_family(model, qr.q_reg)?;
                let rho = measure::rho_report(
                    model,
                    &family,
                    &p,
                    chart,
                    sr.q_n,
                    qr.q_reg,
                    &measure::RhoOptions {
                        seed: opts.seed,
                        ..Default::default()
                    },
                )?;
                let v = verdict::point_verdict(&rho);
                Ok(json!({
                    "rho": rho_json(&rho),
                    "verdict": verdict_json(&v),
                }))
            } else {
                let d = verdict::decomposition_report(
                    model,
                    &verdict::DecompositionOptions {
                        sample_spec: sample_spec(opts),
                        rho: measure::RhoOptions {
                            seed: opts.seed,
                            ..Default::default()
                        },
                        quad_shells: opts.shells.max(5),
                        quad_samples: opts.samples.min(2000),
                        ..Default::default()
                    },
                )?;
                Ok(decomposition_json(&d))
            }
        }
        Command::Quad => {
            let p = require_point(model, opts)?;
            let chart_def = require_stratum(model, opts)?;
            let qr = flags::q_reg(model, &sample_spec(opts))?;
            let sr = strata::equisingular_check(model, chart_def, 4, opts.seed)?;
            let family = measure::enumerate_family(model, qr.q_reg)?;
            let rho = measure::rho_report(
                model,
                &family,
                &p,
                chart_def,
                sr.q_n,
                qr.q_reg,
                &measure::RhoOptions {
                    seed: opts.seed,
                    ..Default::default()
                },
            )?;
            let chart = coords::chart_for(model, &p, Some(chart_def))?;
            let diag = numerics::quad_diagnose(
                model,
                &family,
                &chart,
                sr.q_n,
                Some(&rho),
                opts.shells,
                opts.samples,
                opts.seed,
            )?;
            Ok(serde_json::to_value(&diag).expect("serialize"))
        }
        Command::Ballbox => {
            let p = require_point(model, opts)?;
            let chart = coords::chart_for(model, &p, None)?;
            let report = numerics::ballbox_check(
                model,
                &chart,
                &opts.eps_list,
                opts.samples,
                opts.segments,
                opts.seed,
            )?;
            Ok(serde_json::to_value(&report).expect("serialize"))
        }
        Command::Examples => unreachable!("handled in run"),
    }
}

fn nu_grid(
    model: &StructureModel,
    family: &measure::TupleFamily,
    opts: &RunOptions,
    spec: &str,
) -> Result<Value> {
    // Grid spec: "i,j,lo,hi,steps" varying coordinates x_i and x_j.
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 5 {
        return Err(Error::MissingInput(
            "--grid expects i,j,lo,hi,steps".into(),
        ));
    }
    let i: usize = parts[0]
        .parse()
        .map_err(|_| Error::MissingInput("bad grid index".into()))?;
    let j: usize = parts[1]
        .parse()
        .map_err(|_| Error::MissingInput("bad grid index".into()))?;
    let lo: f64 = parts[2]
        .parse()
        .map_err(|_| Error::MissingInput("bad grid bound".into()))?;
    let hi: f64 = parts[3]
        .parse()
        .map_err(|_| Error::MissingInput("bad grid bound".into()))?;
    let steps: usize = parts[4]
        .parse()
        .map_err(|_| Error::MissingInput("bad grid steps".into()))?;
    let n = model.dim();
    if i == 0 || i > n || j == 0 || j > n || i == j || steps < 2 {
        return Err(Error::MissingInput("bad grid spec".into()));
    }
    let base: Vec<f64> = match &opts.point {
        Some(spec) => resolve_point(model, spec)?
            .iter()
            .map(|r| num_traits::ToPrimitive::to_f64(r).unwrap())
            .collect(),
        None => vec![0.0; n],
    };
    let mut rows = Vec::with_capacity(steps * steps);
    for a in 0..steps {
        for b in 0..steps {
            let xi = lo + (hi - lo) * a as f64 / (steps - 1) as f64;
            let xj = lo + (hi - lo) * b as f64 / (steps - 1) as f64;
            let mut q = base.clone();
            q[i - 1] = xi;
            q[j - 1] = xj;
            rows.push(json!([xi, xj, measure::nu(family, &q)?, measure::nu_bar(family, &q)?]));
        }
    }
    Ok(json!({
        "coords": [i, j],
        "rows": rows,
    }))
}

/// CSV projections: shell tables for `quad`, grids for `nu`.
pub fn to_csv(report: &Report) -> Option<String> {
    match report.command.as_str() {
        "quad" => {
            let shells = report.results.get("shells")?.as_array()?;
            let mut out = String::from("lambda,shell_integral\n");
            for pair in shells {
                let arr = pair.as_array()?;
                out.push_str(&format!("{},{}\n", arr[0], arr[1]));
            }
            Some(out)
        }
        "nu" => {
            let grid = report.results.get("grid")?;
            let rows = grid.get("rows")?.as_array()?;
            let mut out = String::from("xi,xj,nu,nu_bar\n");
            for row in rows {
                let arr = row.as_array()?;
                out.push_str(&format!("{},{},{},{}\n", arr[0], arr[1], arr[2], arr[3]));
            }
            Some(out)
        }
        _ => None,
    }
}
