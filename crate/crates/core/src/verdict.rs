//! Integrability and Radon verdicts assembled from the exponent reports,
//! the dimension summary, and the generic free-Lie-algebra criterion.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flags::{self, StructureModel};
use crate::measure::{Homogeneity, OrderBound, RhoMax, RhoReport};
use crate::strata::{DimensionSummary, LebesgueCase};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Conclusion {
    Integrable,
    NotIntegrable,
    NotRadon,
    MutuallySingular,
    AbsolutelyContinuous,
    Inconclusive,
}

/// Which rule fired. Identifiers name the mechanism, not a reference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Criterion {
    /// nu is transversally homogeneous: integrable iff rho < Q(p) - Q_N.
    HomogeneousOrder,
    /// rho_min >= Q(p) - Q_N forces divergence of the shell integral.
    OrderLowerBound,
    /// e_min >= codim forces divergence already in Euclidean shells.
    DiffOrderVsCodim,
    /// rho_max (with fit margin) < Q(p) - Q_N gives a convergent bound.
    DecayUpperBound,
    /// Some stratum has Q_N >= Q_R.
    DimensionComparison,
    /// Some stratum has codimension one.
    CodimensionOne,
    /// Free Lie algebra dimension count for generic structures.
    FreeLieGeneric,
}

impl Criterion {
    pub fn id(&self) -> &'static str {
        match self {
            Criterion::HomogeneousOrder => "homogeneous-order",
            Criterion::OrderLowerBound => "order-lower-bound",
            Criterion::DiffOrderVsCodim => "diff-order-vs-codim",
            Criterion::DecayUpperBound => "decay-upper-bound",
            Criterion::DimensionComparison => "dimension-comparison",
            Criterion::CodimensionOne => "codim-one",
            Criterion::FreeLieGeneric => "free-lie-generic",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictInputs {
    pub q_p: u64,
    pub q_n: u64,
    pub q_r: u64,
    pub threshold: i64,
    pub rho_min: OrderBound,
    pub e_min: OrderBound,
    pub rho_max: f64,
    pub codim: usize,
    pub homogeneous_two_rho: Option<i64>,
}

/// Machine-checkable conclusion for a point on a stratum.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub conclusion: Conclusion,
    pub criterion: Option<Criterion>,
    /// Every rule whose hypothesis held, not just the one that decided.
    pub satisfied: Vec<Criterion>,
    /// Whether the decision rests on exact arithmetic only.
    pub exact: bool,
    pub inputs: VerdictInputs,
    pub notes: Vec<String>,
}

/// The decision ladder: homogeneous exact characterization first, then the
/// exact divergence bounds, then the numerical convergence bound.
pub fn point_verdict(report: &RhoReport) -> Verdict {
    let threshold = report.threshold;
    let inputs = VerdictInputs {
        q_p: report.q_p,
        q_n: report.q_n,
        q_r: report.q_r,
        threshold,
        rho_min: report.rho_min,
        e_min: report.e_min,
        rho_max: report.rho_max.value(),
        codim: report.codim,
        homogeneous_two_rho: match report.homogeneity {
            Homogeneity::Yes { two_rho } => Some(two_rho),
            _ => None,
        },
    };
    let mut satisfied = Vec::new();
    let fin_fires = report.rho_min.at_least(threshold);
    if fin_fires {
        satisfied.push(Criterion::OrderLowerBound);
    }
    let diff_fires = report.e_min.at_least(report.codim as i64);
    if diff_fires {
        satisfied.push(Criterion::DiffOrderVsCodim);
    }
    let decay_margin = match &report.rho_max {
        RhoMax::ExactHomogeneous { two_rho } => Some((*two_rho as f64 / 2.0, 0.0)),
        RhoMax::Estimated(e) => Some((e.sup_slope, e.sup_sigma)),
    };
    let decay_fires = decay_margin
        .map(|(v, s)| v + 3.0 * s < threshold as f64)
        .unwrap_or(false);

    let mut notes = Vec::new();
    if let Homogeneity::Yes { two_rho } = report.homogeneity {
        satisfied.insert(0, Criterion::HomogeneousOrder);
        let integrable = two_rho < 2 * threshold;
        if decay_fires && !fin_fires {
            satisfied.push(Criterion::DecayUpperBound);
        }
        return Verdict {
            conclusion: if integrable {
                Conclusion::Integrable
            } else {
                Conclusion::NotIntegrable
            },
            criterion: Some(Criterion::HomogeneousOrder),
            satisfied,
            exact: true,
            inputs,
            notes,
        };
    }
    if fin_fires {
        return Verdict {
            conclusion: Conclusion::NotIntegrable,
            criterion: Some(Criterion::OrderLowerBound),
            satisfied,
            exact: true,
            inputs,
            notes,
        };
    }
    if diff_fires {
        return Verdict {
            conclusion: Conclusion::NotIntegrable,
            criterion: Some(Criterion::DiffOrderVsCodim),
            satisfied,
            exact: true,
            inputs,
            notes,
        };
    }
    if decay_fires {
        satisfied.push(Criterion::DecayUpperBound);
        notes.push("convergence bound rests on a fitted decay exponent".into());
        return Verdict {
            conclusion: Conclusion::Integrable,
            criterion: Some(Criterion::DecayUpperBound),
            satisfied,
            exact: false,
            inputs,
            notes,
        };
    }
    notes.push(format!(
        "order bounds straddle the threshold: rho_min {:?} < {} <= rho_max {:.3}",
        report.rho_min, threshold, report.rho_max.value()
    ));
    Verdict {
        conclusion: Conclusion::Inconclusive,
        criterion: None,
        satisfied,
        exact: true,
        inputs,
        notes,
    }
}

/// Per-stratum bundle inside the decomposition report.
#[derive(Debug)]
pub struct StratumVerdict {
    pub stratum: crate::strata::StratumReport,
    pub rho: Option<RhoReport>,
    pub verdict: Option<Verdict>,
    pub quad: Option<crate::numerics::QuadDiagnosis>,
}

#[derive(Debug)]
pub struct DecompositionReport {
    pub summary: DimensionSummary,
    pub lebesgue: LebesgueCase,
    /// Smooth volume and the singular part are mutually singular whenever
    /// singular strata are declared.
    pub singular_part_mutually_singular: bool,
    pub regular_part: Conclusion,
    pub regular_part_criteria: Vec<Criterion>,
    pub strata: Vec<StratumVerdict>,
    pub notes: Vec<String>,
}

pub struct DecompositionOptions {
    pub sample_spec: flags::SampleSpec,
    pub stratum_samples: usize,
    pub rho: crate::measure::RhoOptions,
    /// Attach a quadrature diagnosis to strata with inconclusive verdicts.
    pub advisory_quad: bool,
    pub quad_shells: usize,
    pub quad_samples: usize,
}

impl Default for DecompositionOptions {
    fn default() -> Self {
        DecompositionOptions {
            sample_spec: flags::SampleSpec::default(),
            stratum_samples: 4,
            rho: crate::measure::RhoOptions::default(),
            advisory_quad: true,
            quad_shells: 8,
            quad_samples: 1500,
        }
    }
}

/// Dimension summary plus Radon analysis of the regular-part Hausdorff
/// volume, with per-stratum point verdicts appended.
pub fn decomposition_report(
    model: &StructureModel,
    opts: &DecompositionOptions,
) -> Result<DecompositionReport> {
    let summary = crate::strata::stratum_dimension_summary(
        model,
        &opts.sample_spec,
        opts.stratum_samples,
    )?;
    let family = crate::measure::enumerate_family(model, summary.q_reg)?;

    let mut criteria = Vec::new();
    let mut notes = Vec::new();
    let max_qn = summary.strata.iter().map(|s| s.hausdorff_dim).max();
    if let Some(qn) = max_qn {
        if qn >= summary.q_reg {
            criteria.push(Criterion::DimensionComparison);
            notes.push(format!(
                "a stratum has Q_N = {qn} >= Q_R = {}",
                summary.q_reg
            ));
        }
    }
    if summary.strata.iter().any(|s| s.k == model.dim() - 1) {
        criteria.push(Criterion::CodimensionOne);
        notes.push("a declared stratum has codimension one".into());
    }

    let mut strata_out = Vec::new();
    let mut any_not_integrable = !criteria.is_empty();
    let mut all_integrable = true;
    let mut any_inconclusive = false;
    for sr in &summary.strata {
        let chart = model.stratum(&sr.label).unwrap().clone();
        let base = chart.point_at(&chart.domain_center())?;
        let rho = crate::measure::rho_report(
            model,
            &family,
            &base,
            &chart,
            sr.q_n,
            summary.q_reg,
            &opts.rho,
        )?;
        let verdict = point_verdict(&rho);
        match verdict.conclusion {
            Conclusion::NotIntegrable => {
                any_not_integrable = true;
                all_integrable = false;
            }
            Conclusion::Integrable => {}
            _ => {
                all_integrable = false;
                any_inconclusive = true;
            }
        }
        let quad = if opts.advisory_quad && verdict.conclusion == Conclusion::Inconclusive {
            crate::numerics::quad_diagnose(
                model,
                &family,
                &crate::coords::chart_for(model, &base, Some(&chart))?,
                sr.q_n,
                Some(&rho),
                opts.quad_shells,
                opts.quad_samples,
                opts.rho.seed,
            )
            .ok()
        } else {
            None
        };
        strata_out.push(StratumVerdict {
            stratum: sr.clone(),
            rho: Some(rho),
            verdict: Some(verdict),
            quad,
        });
    }

    let regular_part = if any_not_integrable {
        Conclusion::NotRadon
    } else if summary.strata.is_empty() || all_integrable {
        Conclusion::Integrable
    } else if any_inconclusive {
        Conclusion::Inconclusive
    } else {
        Conclusion::Inconclusive
    };
    Ok(DecompositionReport {
        lebesgue: summary.case,
        singular_part_mutually_singular: !summary.strata.is_empty(),
        regular_part,
        regular_part_criteria: criteria,
        strata: strata_out,
        notes,
        summary,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GenericCase {
    /// n equals the free Lie algebra dimension at the critical step.
    Equality,
    /// n falls strictly below it.
    Strict,
}

#[derive(Clone, Debug, Serialize)]
pub struct GenericVerdict {
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub n_tilde_r: u64,
    pub case: GenericCase,
    /// Minimal codimension of singular strata: n_tilde_r - n + 1.
    pub min_codim: u64,
    pub conclusion: Conclusion,
}

/// Integrability of the regular-part density for generic rank-m structures
/// on an n-manifold, by comparing n against free Lie algebra dimensions.
pub fn generic_verdict(n: usize, m: usize) -> Result<GenericVerdict> {
    if m < 2 {
        return Err(Error::MissingInput(
            "generic criterion needs at least 2 generators".into(),
        ));
    }
    if n < m {
        return Err(Error::MissingInput(
            "generic criterion needs dimension at least the rank".into(),
        ));
    }
    let mut r = 1usize;
    while free_lie(m, r) < n as u64 {
        r += 1;
    }
    let n_tilde_r = free_lie(m, r);
    let case = if n_tilde_r == n as u64 {
        GenericCase::Equality
    } else {
        GenericCase::Strict
    };
    Ok(GenericVerdict {
        n,
        m,
        r,
        n_tilde_r,
        case,
        min_codim: n_tilde_r - n as u64 + 1,
        conclusion: match case {
            GenericCase::Equality => Conclusion::NotIntegrable,
            GenericCase::Strict => Conclusion::Integrable,
        },
    })
}

fn free_lie(m: usize, s: usize) -> u64 {
    flags::free_lie_dims(m, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::RhoMaxEstimate;

    fn report(
        rho_min: OrderBound,
        e_min: OrderBound,
        homogeneity: Homogeneity,
        rho_max: RhoMax,
        q_p: u64,
        q_n: u64,
        codim: usize,
    ) -> RhoReport {
        RhoReport {
            point: vec![],
            stratum: "S".into(),
            rho_min,
            rho_min_stabilized: true,
            e_min,
            q_p,
            q_n,
            q_r: q_n,
            codim,
            threshold: q_p as i64 - q_n as i64,
            homogeneity,
            rho_max,
        }
    }

    #[test]
    fn homogeneous_ladder() {
        // Martinet-like: rho = 1, threshold 1 -> not integrable.
        let v = point_verdict(&report(
            OrderBound::Exact(1),
            OrderBound::Exact(1),
            Homogeneity::Yes { two_rho: 2 },
            RhoMax::ExactHomogeneous { two_rho: 2 },
            5,
            4,
            1,
        ));
        assert_eq!(v.conclusion, Conclusion::NotIntegrable);
        assert_eq!(v.criterion, Some(Criterion::HomogeneousOrder));
        assert!(v.exact);
        assert!(v.satisfied.contains(&Criterion::OrderLowerBound));

        // rho = 2 < threshold 3 -> integrable.
        let v = point_verdict(&report(
            OrderBound::Exact(2),
            OrderBound::Exact(2),
            Homogeneity::Yes { two_rho: 4 },
            RhoMax::ExactHomogeneous { two_rho: 4 },
            6,
            3,
            3,
        ));
        assert_eq!(v.conclusion, Conclusion::Integrable);
        assert!(v.exact);
    }

    #[test]
    fn order_bound_ladder() {
        let est = RhoMax::Estimated(RhoMaxEstimate {
            sup_slope: 2.0,
            sup_sigma: 0.01,
            rays: vec![],
            excluded_rays: 0,
        });
        let v = point_verdict(&report(
            OrderBound::Exact(3),
            OrderBound::Exact(1),
            Homogeneity::No,
            est,
            8,
            6,
            2,
        ));
        assert_eq!(v.conclusion, Conclusion::NotIntegrable);
        assert_eq!(v.criterion, Some(Criterion::OrderLowerBound));
    }

    #[test]
    fn diff_order_ladder() {
        let est = RhoMax::Estimated(RhoMaxEstimate {
            sup_slope: 2.5,
            sup_sigma: 0.3,
            rays: vec![],
            excluded_rays: 0,
        });
        let v = point_verdict(&report(
            OrderBound::Exact(1),
            OrderBound::Exact(2),
            Homogeneity::No,
            est,
            8,
            6,
            2,
        ));
        assert_eq!(v.conclusion, Conclusion::NotIntegrable);
        assert_eq!(v.criterion, Some(Criterion::DiffOrderVsCodim));
    }

    #[test]
    fn decay_bound_is_flagged_numerical() {
        let est = RhoMax::Estimated(RhoMaxEstimate {
            sup_slope: 1.3,
            sup_sigma: 0.05,
            rays: vec![],
            excluded_rays: 0,
        });
        let v = point_verdict(&report(
            OrderBound::Exact(1),
            OrderBound::Exact(1),
            Homogeneity::No,
            est,
            8,
            6,
            3,
        ));
        assert_eq!(v.conclusion, Conclusion::Integrable);
        assert_eq!(v.criterion, Some(Criterion::DecayUpperBound));
        assert!(!v.exact);
    }

    #[test]
    fn inconclusive_between_bounds() {
        let est = RhoMax::Estimated(RhoMaxEstimate {
            sup_slope: 4.0,
            sup_sigma: 0.05,
            rays: vec![],
            excluded_rays: 0,
        });
        let v = point_verdict(&report(
            OrderBound::Exact(1),
            OrderBound::Exact(1),
            Homogeneity::No,
            est,
            8,
            5,
            2,
        ));
        assert_eq!(v.conclusion, Conclusion::Inconclusive);
        assert!(v.criterion.is_none());
    }

    #[test]
    fn ladder_never_contradicts_itself() {
        // If the homogeneous path fires, the order bound path must agree
        // whenever its hypothesis holds.
        for two_rho in 0..8i64 {
            for threshold in 1..4i64 {
                let q_n = 4u64;
                let q_p = q_n + threshold as u64;
                let rho_min = OrderBound::Exact((two_rho / 2) as u32);
                let v = point_verdict(&report(
                    rho_min,
                    OrderBound::Exact(0),
                    Homogeneity::Yes { two_rho },
                    RhoMax::ExactHomogeneous { two_rho },
                    q_p,
                    q_n,
                    2,
                ));
                if rho_min.at_least(threshold) {
                    assert_eq!(v.conclusion, Conclusion::NotIntegrable);
                }
                assert_ne!(v.conclusion, Conclusion::Inconclusive);
            }
        }
    }

    #[test]
    fn generic_cases() {
        let g = generic_verdict(3, 2).unwrap();
        assert_eq!(g.case, GenericCase::Equality);
        assert_eq!(g.r, 2);
        assert_eq!(g.conclusion, Conclusion::NotIntegrable);

        let g = generic_verdict(4, 2).unwrap();
        assert_eq!(g.case, GenericCase::Strict);
        assert_eq!(g.r, 3);
        assert_eq!(g.n_tilde_r, 5);
        assert_eq!(g.min_codim, 2);
        assert_eq!(g.conclusion, Conclusion::Integrable);

        // Almost-Riemannian: n = m = n_tilde_1.
        let g = generic_verdict(4, 4).unwrap();
        assert_eq!(g.case, GenericCase::Equality);
        assert_eq!(g.conclusion, Conclusion::NotIntegrable);
    }

    #[test]
    fn generic_case_equality_iff_dimension_match() {
        for n in 2..=10usize {
            for m in 2..=4usize {
                if n < m {
                    continue;
                }
                let g = generic_verdict(n, m).unwrap();
                assert_eq!(
                    g.case == GenericCase::Equality,
                    flags::free_lie_dims(m, g.r) == n as u64
                );
            }
        }
    }
}
