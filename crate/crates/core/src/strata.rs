//! Candidate equisingular submanifolds: restricted flags, equisingularity
//! certification by sampling, and the dimension summary.

use num_traits::Zero;

use crate::algebra::{rat, Polynomial, Rat};
use crate::error::{Error, Result};
use crate::flags::{self, StructureModel};
use crate::linalg;
use crate::sample;

/// A parametrized submanifold chart `psi: R^k -> R^n` with polynomial
/// components, restricted to a rational box in parameter space.
#[derive(Clone, Debug)]
pub struct SubmanifoldChart {
    pub label: String,
    pub k: usize,
    /// `n` polynomials in `k` variables.
    pub param: Vec<Polynomial>,
    /// `k` intervals.
    pub domain: Vec<(Rat, Rat)>,
}

/// A chart that embeds coordinate-aligned: each ambient coordinate is either
/// a single parameter or a constant.
#[derive(Clone, Debug)]
pub struct CoordinateAligned {
    /// For each ambient coordinate: the 1-based parameter index carrying it.
    pub tangent: Vec<(usize, usize)>, // (ambient index, parameter index), both 1-based
    /// Ambient coordinates frozen at constants.
    pub transverse: Vec<(usize, Rat)>, // (ambient index, value), 1-based
}

impl SubmanifoldChart {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 || self.k > n {
            return Err(Error::DimensionMismatch(format!(
                "stratum `{}`: intrinsic dimension {} out of range 1..={n}",
                self.label, self.k
            )));
        }
        if self.param.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "stratum `{}`: parameter map has {} components, expected {n}",
                self.label,
                self.param.len()
            )));
        }
        for p in &self.param {
            if p.nvars() != self.k {
                return Err(Error::DimensionMismatch(format!(
                    "stratum `{}`: map component has {} variables, expected {}",
                    self.label,
                    p.nvars(),
                    self.k
                )));
            }
        }
        if self.domain.len() != self.k {
            return Err(Error::DimensionMismatch(format!(
                "stratum `{}`: domain has {} intervals, expected {}",
                self.label,
                self.domain.len(),
                self.k
            )));
        }
        for (lo, hi) in &self.domain {
            if lo > hi {
                return Err(Error::DimensionMismatch(format!(
                    "stratum `{}`: empty domain interval",
                    self.label
                )));
            }
        }
        Ok(())
    }

    pub fn point_at(&self, u: &[Rat]) -> Result<Vec<Rat>> {
        self.param.iter().map(|p| p.eval_rat(u)).collect()
    }

    pub fn point_at_f64(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.param.iter().map(|p| p.eval_f64(u)).collect()
    }

    /// Columns of the differential at `u`, as an `n x k` list of rows.
    pub fn jacobian_rows(&self, u: &[Rat]) -> Result<Vec<Vec<Rat>>> {
        let mut rows = Vec::with_capacity(self.param.len());
        for p in &self.param {
            let mut row = Vec::with_capacity(self.k);
            for j in 1..=self.k {
                row.push(p.partial(j)?.eval_rat(u)?);
            }
            rows.push(row);
        }
        Ok(rows)
    }

    /// The columns of the differential at `u` as ambient vectors.
    pub fn tangent_vectors(&self, u: &[Rat]) -> Result<Vec<Vec<Rat>>> {
        let rows = self.jacobian_rows(u)?;
        let mut cols = vec![vec![Rat::zero(); self.param.len()]; self.k];
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                cols[j][i] = v.clone();
            }
        }
        Ok(cols)
    }

    pub fn domain_center(&self) -> Vec<Rat> {
        self.domain
            .iter()
            .map(|(lo, hi)| (lo + hi) / rat(2))
            .collect()
    }

    pub fn domain_half_width(&self) -> Rat {
        self.domain
            .iter()
            .map(|(lo, hi)| (hi - lo) / rat(2))
            .max()
            .unwrap_or_else(|| rat(1))
    }

    /// Detect the coordinate-aligned shape: every component is a constant or
    /// a bare parameter, each parameter used exactly once.
    pub fn coordinate_aligned(&self) -> Option<CoordinateAligned> {
        let mut tangent = Vec::new();
        let mut transverse = Vec::new();
        let mut used = vec![false; self.k];
        for (i, p) in self.param.iter().enumerate() {
            if let Some(c) = p.constant_value() {
                transverse.push((i + 1, c));
                continue;
            }
            if p.num_terms() == 1 {
                let (exps, coeff) = p.terms().next().unwrap();
                let ones: Vec<usize> = exps
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(j, _)| j)
                    .collect();
                if ones.len() == 1 && exps[ones[0]] == 1 && coeff == &rat(1) && !used[ones[0]] {
                    used[ones[0]] = true;
                    tangent.push((i + 1, ones[0] + 1));
                    continue;
                }
            }
            return None;
        }
        if used.iter().all(|&u| u) {
            Some(CoordinateAligned { tangent, transverse })
        } else {
            None
        }
    }

    /// Parameter value with `psi(u) = p`, exact. Only supported for
    /// coordinate-aligned charts; `p` must lie on the chart.
    pub fn locate(&self, p: &[Rat]) -> Result<Vec<Rat>> {
        let aligned = self.coordinate_aligned().ok_or_else(|| {
            Error::UnsupportedStratumShape(format!(
                "stratum `{}` is not coordinate-aligned; pass the parameter point explicitly",
                self.label
            ))
        })?;
        let mut u = vec![Rat::zero(); self.k];
        for (amb, par) in &aligned.tangent {
            u[par - 1] = p[amb - 1].clone();
        }
        let q = self.point_at(&u)?;
        if q != p {
            return Err(Error::MissingInput(format!(
                "point does not lie on stratum `{}`",
                self.label
            )));
        }
        Ok(u)
    }

    /// Seeded rational parameter samples inside the domain box around a
    /// center, shrunk by `scale` (a power of two).
    pub fn sample_params(
        &self,
        center: &[Rat],
        scale: &Rat,
        count: usize,
        seed: u64,
    ) -> Vec<Vec<Rat>> {
        let mut rng = sample::rng(seed);
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let mut u = Vec::with_capacity(self.k);
            for (j, (lo, hi)) in self.domain.iter().enumerate() {
                let half = (hi - lo) / rat(2) * scale;
                let delta = sample::rat_in_symmetric_box(&mut rng, &half);
                let mut v = &center[j] + delta;
                if &v < lo {
                    v = lo.clone();
                }
                if &v > hi {
                    v = hi.clone();
                }
                u.push(v);
            }
            out.push(u);
        }
        out
    }
}

/// Growth of the flag restricted to the chart at parameter `u`, as the
/// cumulative sequence `(n_1^N, ..., n_r^N)` with `n_r^N = k`.
pub fn restricted_flag_at(
    model: &StructureModel,
    chart: &SubmanifoldChart,
    u: &[Rat],
) -> Result<Vec<usize>> {
    if u.len() != chart.k {
        return Err(Error::ArityMismatch {
            expected: chart.k,
            got: u.len(),
        });
    }
    let q = chart.point_at(u)?;
    let tangent = chart.tangent_vectors(u)?;
    if linalg::rank(&tangent) != chart.k {
        return Err(Error::ImmersionFailure {
            k: chart.k,
            at: format!("{u:?}"),
        });
    }
    let ambient = flags::flag_at(model, &q, model.bracket_depth_cap)?;
    let by_depth = flags::bracket_values_by_depth(model, &q, ambient.step())?;
    let mut out = Vec::with_capacity(ambient.step());
    let mut pool: Vec<Vec<Rat>> = Vec::new();
    for (i, level) in by_depth.iter().enumerate() {
        pool.extend(level.iter().cloned());
        // dim(D^i ∩ T) = dim D^i + dim T − dim(D^i + T)
        let mut joint = pool.clone();
        joint.extend(tangent.iter().cloned());
        let sum_rank = linalg::rank(&joint);
        out.push(ambient.growth[i] + chart.k - sum_rank);
    }
    Ok(out)
}

/// Outcome of the sampled equisingularity certificate for one stratum.
#[derive(Clone, Debug)]
pub struct StratumReport {
    pub label: String,
    pub k: usize,
    pub restricted_growth: Vec<usize>,
    pub ambient_growth: Vec<usize>,
    pub q_n: u64,
    pub q_ambient: u64,
    pub equisingular: bool,
    /// Equals `q_n` when the stratum is equisingular.
    pub hausdorff_dim: u64,
    pub samples: Vec<Vec<Rat>>,
}

fn q_from_growth(growth: &[usize]) -> u64 {
    let mut q = 0u64;
    let mut prev = 0usize;
    for (i, &ni) in growth.iter().enumerate() {
        q += (i as u64 + 1) * (ni - prev) as u64;
        prev = ni;
    }
    q
}

/// Evaluate ambient and restricted growth at seeded parameter samples and
/// certify constancy of both.
pub fn equisingular_check(
    model: &StructureModel,
    chart: &SubmanifoldChart,
    sample_count: usize,
    seed: u64,
) -> Result<StratumReport> {
    if sample_count < 2 {
        return Err(Error::MissingInput("sample_count must be at least 2".into()));
    }
    let center = chart.domain_center();
    let mut params = vec![center.clone()];
    params.extend(chart.sample_params(&center, &rat(1), sample_count - 1, seed));

    let mut restricted: Option<Vec<usize>> = None;
    let mut ambient: Option<Vec<usize>> = None;
    let mut equisingular = true;
    for u in &params {
        let r = restricted_flag_at(model, chart, u)?;
        let q = chart.point_at(u)?;
        let a = flags::flag_at(model, &q, model.bracket_depth_cap)?;
        match (&restricted, &ambient) {
            (None, _) => {
                restricted = Some(r);
                ambient = Some(a.growth);
            }
            (Some(r0), Some(a0)) => {
                if &r != r0 || &a.growth != a0 {
                    equisingular = false;
                }
            }
            _ => unreachable!(),
        }
    }
    let restricted_growth = restricted.unwrap();
    let ambient_growth = ambient.unwrap();
    let q_n = q_from_growth(&restricted_growth);
    let q_ambient = q_from_growth(&ambient_growth);
    Ok(StratumReport {
        label: chart.label.clone(),
        k: chart.k,
        restricted_growth,
        ambient_growth,
        q_n,
        q_ambient,
        equisingular,
        hausdorff_dim: q_n,
        samples: params,
    })
}

/// Which side of the Lebesgue decomposition dominates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum LebesgueCase {
    /// dim_H R < dim_H S: the Hausdorff volume and the smooth volume are
    /// mutually singular.
    MutuallySingular,
    /// dim_H R > dim_H S: the Hausdorff volume is absolutely continuous.
    AbsolutelyContinuous,
    /// Equal dimensions: both parts are present.
    Boundary,
}

#[derive(Clone, Debug)]
pub struct DimensionSummary {
    pub q_reg: u64,
    pub q_reg_constant: bool,
    pub strata: Vec<StratumReport>,
    pub dim_h_singular: Option<u64>,
    pub dim_h: u64,
    pub case: LebesgueCase,
}

/// Q_R, per-stratum Q_N, and `dim_H M = max(Q_R, max_N Q_N)`.
pub fn stratum_dimension_summary(
    model: &StructureModel,
    spec: &flags::SampleSpec,
    stratum_samples: usize,
) -> Result<DimensionSummary> {
    let qr = flags::q_reg(model, spec)?;
    let mut reports = Vec::new();
    for chart in &model.strata {
        let report = equisingular_check(model, chart, stratum_samples.max(2), spec.seed)?;
        reports.push(report);
    }
    let dim_s = reports.iter().map(|r| r.hausdorff_dim).max();
    let dim_h = dim_s.map_or(qr.q_reg, |s| s.max(qr.q_reg));
    let case = match dim_s {
        Some(s) if s > qr.q_reg => LebesgueCase::MutuallySingular,
        Some(s) if s == qr.q_reg => LebesgueCase::Boundary,
        _ => LebesgueCase::AbsolutelyContinuous,
    };
    Ok(DimensionSummary {
        q_reg: qr.q_reg,
        q_reg_constant: qr.constant_over_samples,
        strata: reports,
        dim_h_singular: dim_s,
        dim_h,
        case,
    })
}

/// True when the field is tangent to the chart along sampled points: its
/// value lies in the span of the chart differential. For coordinate-aligned
/// charts the check is symbolic and exact.
pub fn field_tangent_to_chart(
    field: &crate::algebra::PolyVectorField,
    chart: &SubmanifoldChart,
    seed: u64,
) -> Result<bool> {
    if let Some(aligned) = chart.coordinate_aligned() {
        // Substitute the frozen transverse coordinates and require the
        // transverse components to vanish identically on the chart.
        // Freeze the transverse coordinates; the transverse components must
        // vanish identically in the remaining (tangent) variables.
        let assignments: Vec<(usize, Rat)> = aligned.transverse.clone();
        for (amb, _) in &aligned.transverse {
            let restricted = field.component(amb - 1).substitute(&assignments)?;
            if !restricted.is_zero() {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    let center = chart.domain_center();
    let samples = chart.sample_params(&center, &rat(1), 6, seed);
    for u in std::iter::once(&center).chain(samples.iter()) {
        let q = chart.point_at(u)?;
        let tangent = chart.tangent_vectors(u)?;
        let v = field.eval_rat(&q)?;
        if v.iter().all(|c| c.is_zero()) {
            continue;
        }
        let base_rank = linalg::rank(&tangent);
        let mut joined = tangent;
        joined.push(v);
        if linalg::rank(&joined) != base_rank {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::PolyVectorField;

    fn field(comps: &[&str], n: usize) -> PolyVectorField {
        PolyVectorField::new(
            comps
                .iter()
                .map(|s| Polynomial::parse(s, n, None).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn chart(label: &str, k: usize, maps: &[&str]) -> SubmanifoldChart {
        SubmanifoldChart {
            label: label.into(),
            k,
            param: maps
                .iter()
                .map(|s| Polynomial::parse(s, k, None).unwrap())
                .collect(),
            domain: vec![(rat(-1), rat(1)); k],
        }
    }

    fn martinet() -> StructureModel {
        StructureModel::new(
            3,
            vec![field(&["1", "0", "0"], 3), field(&["0", "1", "1/2 x1^2"], 3)],
            Polynomial::one(3),
            vec![chart("S", 2, &["0", "x1", "x2"])],
            vec![],
            None,
            None,
        )
        .unwrap()
    }

    #[test]
    fn martinet_restricted_flag() {
        let m = martinet();
        let s = m.stratum("S").unwrap().clone();
        let growth = restricted_flag_at(&m, &s, &[rat(0), rat(0)]).unwrap();
        assert_eq!(growth, vec![1, 1, 2]);
        let growth = restricted_flag_at(&m, &s, &[rat_frac_half(), rat(-1)]).unwrap();
        assert_eq!(growth, vec![1, 1, 2]);
    }

    fn rat_frac_half() -> Rat {
        crate::algebra::rat_frac(1, 2)
    }

    #[test]
    fn grushin_restricted_flag() {
        let g = StructureModel::new(
            2,
            vec![field(&["1", "0"], 2), field(&["0", "x1"], 2)],
            Polynomial::one(2),
            vec![chart("S", 1, &["0", "x1"])],
            vec![],
            None,
            None,
        )
        .unwrap();
        let s = g.stratum("S").unwrap().clone();
        let growth = restricted_flag_at(&g, &s, &[rat(0)]).unwrap();
        assert_eq!(growth, vec![0, 1]);
    }

    #[test]
    fn r4_ar_restricted_flag() {
        let m = StructureModel::new(
            4,
            vec![
                field(&["1", "0", "0", "0"], 4),
                field(&["0", "1", "0", "0"], 4),
                field(&["0", "0", "1", "0"], 4),
                field(&["0", "0", "0", "x1^2+x2^2+x3^2"], 4),
            ],
            Polynomial::one(4),
            vec![chart("S", 1, &["0", "0", "0", "x1"])],
            vec![],
            None,
            None,
        )
        .unwrap();
        let s = m.stratum("S").unwrap().clone();
        let growth = restricted_flag_at(&m, &s, &[rat(0)]).unwrap();
        assert_eq!(growth, vec![0, 0, 1]);
    }

    #[test]
    fn equisingular_martinet() {
        let m = martinet();
        let s = m.stratum("S").unwrap().clone();
        let report = equisingular_check(&m, &s, 5, 9).unwrap();
        assert!(report.equisingular);
        assert_eq!(report.q_n, 4);
        assert_eq!(report.hausdorff_dim, 4);
        assert_eq!(report.ambient_growth, vec![2, 2, 3]);
    }

    #[test]
    fn full_dimensional_chart_recovers_ambient_growth() {
        let m = martinet();
        let open = chart("O", 3, &["x1 + 2", "x2", "x3"]);
        // Chart centered away from the singular plane.
        let growth = restricted_flag_at(&m, &open, &[rat(0), rat(0), rat(0)]).unwrap();
        let ambient = flags::flag_at(&m, &[rat(2), rat(0), rat(0)], 6).unwrap();
        assert_eq!(growth, ambient.growth);
    }

    #[test]
    fn immersion_failure_detected() {
        let m = martinet();
        let bad = chart("bad", 2, &["0", "x1 x2", "0"]);
        let err = restricted_flag_at(&m, &bad, &[rat(0), rat(0)]).unwrap_err();
        assert!(matches!(err, Error::ImmersionFailure { .. }));
    }

    #[test]
    fn martinet_dimension_summary() {
        let m = martinet();
        let summary =
            stratum_dimension_summary(&m, &flags::SampleSpec::default(), 4).unwrap();
        assert_eq!(summary.q_reg, 4);
        assert_eq!(summary.dim_h, 4);
        assert_eq!(summary.case, LebesgueCase::Boundary);
    }

    #[test]
    fn tangency_checks() {
        let m = martinet();
        let s = m.stratum("S").unwrap().clone();
        let x2 = field(&["0", "1", "1/2 x1^2"], 3);
        let x1 = field(&["1", "0", "0"], 3);
        let _ = &m;
        assert!(field_tangent_to_chart(&x2, &s, 1).unwrap());
        assert!(!field_tangent_to_chart(&x1, &s, 1).unwrap());
    }
}
