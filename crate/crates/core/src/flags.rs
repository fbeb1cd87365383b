//! Flags of the distribution: growth vectors, weights, Q(p), point
//! classification, and free Lie algebra dimensions.

use num_traits::Zero;

use crate::algebra::{BracketTable, MultiIndex, PolyVectorField, Polynomial, Rat};
use crate::error::{Error, Result};
use crate::linalg;
use crate::sample;
use crate::strata::SubmanifoldChart;

/// A sub-Riemannian structure presented by a generating family of polynomial
/// vector fields on `R^n`, with a smooth volume given by a polynomial
/// density against the coordinate volume form.
#[derive(Debug)]
pub struct StructureModel {
    n: usize,
    table: BracketTable,
    volume_density: Polynomial,
    pub strata: Vec<SubmanifoldChart>,
    pub points: Vec<(String, Vec<Rat>)>,
    pub bracket_depth_cap: usize,
    pub tuple_budget: usize,
}

pub const DEFAULT_TUPLE_BUDGET: usize = 20_000;

impl StructureModel {
    pub fn new(
        n: usize,
        family: Vec<PolyVectorField>,
        volume_density: Polynomial,
        strata: Vec<SubmanifoldChart>,
        points: Vec<(String, Vec<Rat>)>,
        bracket_depth_cap: Option<usize>,
        tuple_budget: Option<usize>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionMismatch("dimension must be at least 1".into()));
        }
        if family.is_empty() {
            return Err(Error::DimensionMismatch("generating family is empty".into()));
        }
        for (i, f) in family.iter().enumerate() {
            if f.dim() != n {
                return Err(Error::DimensionMismatch(format!(
                    "field {} has dimension {}, expected {n}",
                    i + 1,
                    f.dim()
                )));
            }
        }
        if volume_density.nvars() != n {
            return Err(Error::DimensionMismatch(format!(
                "volume density has {} variables, expected {n}",
                volume_density.nvars()
            )));
        }
        if volume_density.is_zero() {
            return Err(Error::DimensionMismatch(
                "volume density is identically zero".into(),
            ));
        }
        for s in &strata {
            s.validate(n)?;
        }
        for (name, p) in &points {
            if p.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "point `{name}` has {} coordinates, expected {n}",
                    p.len()
                )));
            }
        }
        Ok(StructureModel {
            n,
            table: BracketTable::new(family)?,
            volume_density,
            strata,
            points,
            bracket_depth_cap: bracket_depth_cap.unwrap_or(2 * n).max(1),
            tuple_budget: tuple_budget.unwrap_or(DEFAULT_TUPLE_BUDGET).max(1),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn family(&self) -> &[PolyVectorField] {
        self.table.family()
    }

    pub fn family_size(&self) -> usize {
        self.table.family_size()
    }

    pub fn table(&self) -> &BracketTable {
        &self.table
    }

    pub fn volume_density(&self) -> &Polynomial {
        &self.volume_density
    }

    pub fn stratum(&self, label: &str) -> Option<&SubmanifoldChart> {
        self.strata.iter().find(|s| s.label == label)
    }

    pub fn named_point(&self, name: &str) -> Option<&[Rat]> {
        self.points
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, p)| p.as_slice())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Classification {
    Regular,
    Singular,
    Undetermined,
}

/// Flag data at a point: growth vector up to the bracket-generating step,
/// weights, and the homogeneous dimension Q.
#[derive(Clone, Debug)]
pub struct FlagReport {
    pub point: Vec<Rat>,
    pub growth: Vec<usize>,
    pub weights: Vec<usize>,
    pub q: u64,
    pub classification: Classification,
}

impl FlagReport {
    pub fn step(&self) -> usize {
        self.growth.len()
    }
}

fn weights_from_growth(growth: &[usize]) -> Vec<usize> {
    let n = *growth.last().unwrap();
    let mut weights = Vec::with_capacity(n);
    let mut prev = 0;
    for (i, &ni) in growth.iter().enumerate() {
        for _ in prev..ni {
            weights.push(i + 1);
        }
        prev = ni;
    }
    weights
}

/// Values of all brackets of length at most `depth` at `q`, grouped by depth.
pub(crate) fn bracket_values_by_depth(
    model: &StructureModel,
    q: &[Rat],
    depth: usize,
) -> Result<Vec<Vec<Vec<Rat>>>> {
    let m = model.family_size();
    let mut by_depth = Vec::with_capacity(depth);
    for idx in MultiIndex::enumerate(m, depth) {
        let level = idx.len();
        if by_depth.len() < level {
            by_depth.push(Vec::new());
        }
        let field = model.table().bracket(&idx)?;
        by_depth[level - 1].push(field.eval_rat(q)?);
    }
    Ok(by_depth)
}

/// Growth vector at `q`, stopping at the first step of full rank; errors if
/// full rank is not certified by depth `lmax`.
pub fn flag_at(model: &StructureModel, q: &[Rat], lmax: usize) -> Result<FlagReport> {
    if q.len() != model.dim() {
        return Err(Error::ArityMismatch {
            expected: model.dim(),
            got: q.len(),
        });
    }
    if lmax == 0 {
        return Err(Error::NotBracketGeneratingAtDepth(0));
    }
    let n = model.dim();
    let m = model.family_size();
    let mut growth = Vec::new();
    let mut vectors: Vec<Vec<Rat>> = Vec::new();
    for depth in 1..=lmax {
        for idx in MultiIndex::enumerate(m, depth)
            .into_iter()
            .filter(|i| i.len() == depth)
        {
            let field = model.table().bracket(&idx)?;
            let v = field.eval_rat(q)?;
            if v.iter().any(|c| !c.is_zero()) {
                vectors.push(v);
            }
        }
        let ni = linalg::rank(&vectors);
        growth.push(ni);
        if ni == n {
            let weights = weights_from_growth(&growth);
            let q_val = weights.iter().map(|&w| w as u64).sum();
            return Ok(FlagReport {
                point: q.to_vec(),
                growth,
                weights,
                q: q_val,
                classification: Classification::Undetermined,
            });
        }
    }
    Err(Error::NotBracketGeneratingAtDepth(lmax))
}

/// Classify a point as regular or singular by comparing its growth vector
/// with seeded probes in a surrounding box.
pub fn classify_point(
    model: &StructureModel,
    q: &[Rat],
    lmax: usize,
    probe_radius: &Rat,
    probe_count: usize,
    seed: u64,
) -> Result<FlagReport> {
    if probe_count == 0 {
        return Err(Error::MissingInput("probe_count must be at least 1".into()));
    }
    let mut base = flag_at(model, q, lmax)?;
    let mut rng = sample::rng(seed);
    let mut all_equal = true;
    for _ in 0..probe_count {
        let probe = sample::rat_point_in_box(&mut rng, q, probe_radius);
        let report = flag_at(model, &probe, lmax)?;
        if report.growth != base.growth {
            all_equal = false;
        }
    }
    base.classification = if all_equal {
        Classification::Regular
    } else {
        Classification::Singular
    };
    if base.classification == Classification::Regular {
        debug_assert!(base.q <= (model.dim() * model.dim()) as u64);
    }
    Ok(base)
}

/// How to draw sample points for `q_reg`.
#[derive(Clone, Debug)]
pub struct SampleSpec {
    pub count: usize,
    pub radius: Rat,
    pub seed: u64,
    pub include_named: bool,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec {
            count: 12,
            radius: crate::algebra::rat(1),
            seed: 42,
            include_named: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct QRegReport {
    pub q_reg: u64,
    /// Whether Q was constant over all sampled regular points.
    pub constant_over_samples: bool,
    pub regular_samples: usize,
    pub warning: Option<String>,
}

/// Max of Q over sampled regular points; also verifies that the sampled
/// regular Q values agree and records a warning otherwise.
pub fn q_reg(model: &StructureModel, spec: &SampleSpec) -> Result<QRegReport> {
    let lmax = model.bracket_depth_cap;
    let mut samples: Vec<Vec<Rat>> = Vec::new();
    if spec.include_named {
        for (_, p) in &model.points {
            samples.push(p.clone());
        }
    }
    let mut rng = sample::rng(spec.seed);
    let origin = vec![Rat::zero(); model.dim()];
    for _ in 0..spec.count {
        samples.push(sample::rat_point_in_box(&mut rng, &origin, &spec.radius));
    }
    let probe_radius = &spec.radius / crate::algebra::rat(8);
    let mut qs: Vec<u64> = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        let report = classify_point(
            model,
            s,
            lmax,
            &probe_radius,
            6,
            sample::derived_seed(spec.seed, i as u64),
        )?;
        if report.classification == Classification::Regular {
            qs.push(report.q);
        }
    }
    if qs.is_empty() {
        return Err(Error::NoRegularPointFound);
    }
    let q_max = *qs.iter().max().unwrap();
    let constant = qs.iter().all(|&q| q == q_max);
    Ok(QRegReport {
        q_reg: q_max,
        constant_over_samples: constant,
        regular_samples: qs.len(),
        warning: (!constant).then(|| {
            "sampled regular points have non-constant Q; dimension bookkeeping assumes constancy"
                .to_string()
        }),
    })
}

fn moebius(n: u64) -> i64 {
    let mut n = n;
    let mut primes = 0;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            primes += 1;
        }
        d += 1;
    }
    if n > 1 {
        primes += 1;
    }
    if primes % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Dimension of the free nilpotent Lie algebra on `m` generators of step `s`
/// (partial sums of the necklace numbers).
pub fn free_lie_dims(m: usize, s: usize) -> u64 {
    assert!(m >= 1 && s >= 1);
    let mut total: i128 = 0;
    for j in 1..=s as u64 {
        let mut acc: i128 = 0;
        for d in 1..=j {
            if j % d == 0 {
                let mu = moebius(d) as i128;
                acc += mu * (m as i128).pow((j / d) as u32);
            }
        }
        total += acc / j as i128;
    }
    total as u64
}
