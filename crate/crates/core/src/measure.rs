//! The bracket-determinant function nu controlling the density of the
//! regular-part Hausdorff volume: tuple-family enumeration, nonholonomic
//! and differential orders, transverse order exponents, and the symbolic
//! homogeneity test.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::algebra::{MultiIndex, Polynomial, Rat};
use crate::coords::ExpChart;
use crate::error::{Error, Result};
use crate::flags::{self, StructureModel};
use crate::linalg;
use crate::sample;
use crate::strata::SubmanifoldChart;

/// An order value that may be cut off by the search cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum OrderBound {
    Exact(u32),
    /// Every probe up to the cap vanished; the order is at least this.
    AtLeast(u32),
}

impl OrderBound {
    pub fn min(self, other: OrderBound) -> OrderBound {
        use OrderBound::*;
        match (self, other) {
            (Exact(a), Exact(b)) => Exact(a.min(b)),
            (Exact(a), AtLeast(b)) | (AtLeast(b), Exact(a)) => {
                if a <= b {
                    Exact(a)
                } else {
                    // The cut-off branch could still be smaller; all we know
                    // is the bound.
                    AtLeast(b.min(a))
                }
            }
            (AtLeast(a), AtLeast(b)) => AtLeast(a.min(b)),
        }
    }

    /// Is the order certainly at least `t`?
    pub fn at_least(&self, t: i64) -> bool {
        match *self {
            OrderBound::Exact(v) => v as i64 >= t,
            OrderBound::AtLeast(v) => v as i64 >= t,
        }
    }

    pub fn exact(&self) -> Option<u32> {
        match *self {
            OrderBound::Exact(v) => Some(v),
            OrderBound::AtLeast(_) => None,
        }
    }
}

/// Smallest number of derivatives along the generating family making `h`
/// nonvanish at `p`, by breadth-first expansion with exact evaluation.
pub fn nonholonomic_order(
    model: &StructureModel,
    h: &Polynomial,
    p: &[Rat],
    s_max: usize,
) -> Result<OrderBound> {
    if !h.eval_rat(p)?.is_zero() {
        return Ok(OrderBound::Exact(0));
    }
    let mut level: BTreeSet<Polynomial> = BTreeSet::new();
    level.insert(h.clone());
    for s in 1..=s_max {
        let mut next: BTreeSet<Polynomial> = BTreeSet::new();
        for poly in &level {
            for field in model.family() {
                let d = field.apply(poly)?;
                if !d.is_zero() {
                    next.insert(d);
                }
            }
        }
        for d in &next {
            if !d.eval_rat(p)?.is_zero() {
                return Ok(OrderBound::Exact(s as u32));
            }
        }
        if next.is_empty() {
            return Ok(OrderBound::AtLeast(s_max as u32 + 1));
        }
        level = next;
    }
    Ok(OrderBound::AtLeast(s_max as u32 + 1))
}

/// Order in the usual differential-calculus sense: the minimal total degree
/// of the Taylor expansion of `h` at `p`.
pub fn ord_diff(h: &Polynomial, p: &[Rat]) -> Result<u32> {
    if h.is_zero() {
        return Err(Error::IdenticallyZero);
    }
    let shifted = h.taylor_shift(p)?;
    shifted.min_total_degree().ok_or(Error::IdenticallyZero)
}

/// A surviving bracket tuple together with its volume-density determinant
/// (sign-normalized).
#[derive(Clone, Debug)]
pub struct DetPolynomial {
    pub tuple: Vec<MultiIndex>,
    pub poly: Polynomial,
}

#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct PruningLog {
    pub zero_brackets: usize,
    pub duplicate_brackets: usize,
    pub considered_tuples: usize,
    pub zero_determinants: usize,
    pub duplicate_determinants: usize,
    pub surviving: usize,
}

/// The family of bracket n-tuples with total length Q_R, pruned to the
/// distinct nonzero determinants.
#[derive(Clone, Debug)]
pub struct TupleFamily {
    pub total_length: u64,
    pub dets: Vec<DetPolynomial>,
    pub pruning: PruningLog,
}

impl TupleFamily {
    pub fn len(&self) -> usize {
        self.dets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dets.is_empty()
    }
}

/// Enumerate the tuple family at total bracket length `total` (Q_R for the
/// nu of the main density estimate).
pub fn enumerate_family(model: &StructureModel, total: u64) -> Result<TupleFamily> {
    let n = model.dim();
    let m = model.family_size();
    if (total as usize) < n {
        return Err(Error::DimensionMismatch(format!(
            "total bracket length {total} below dimension {n}"
        )));
    }
    let max_len = total as usize - (n - 1);

    // Brackets of length <= max_len, dropping zero fields and exact
    // duplicates, in (length, lex) order.
    let mut pruning = PruningLog::default();
    let mut brackets: Vec<(MultiIndex, std::sync::Arc<crate::algebra::PolyVectorField>)> =
        Vec::new();
    for idx in MultiIndex::enumerate(m, max_len) {
        let f = model.table().bracket(&idx)?;
        if f.is_zero() {
            pruning.zero_brackets += 1;
            continue;
        }
        if brackets.iter().any(|(_, g)| **g == *f) {
            pruning.duplicate_brackets += 1;
            continue;
        }
        brackets.push((idx, f));
    }

    // All index combinations i1 < ... < in with lengths summing to `total`.
    let lengths: Vec<usize> = brackets.iter().map(|(i, _)| i.len()).collect();
    let mut combos: Vec<Vec<usize>> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    enumerate_combos(
        &lengths,
        0,
        n,
        total as i64,
        &mut stack,
        &mut combos,
        &mut pruning.considered_tuples,
        model.tuple_budget,
    )?;

    let mut dets: Vec<DetPolynomial> = Vec::new();
    for combo in combos {
        let cols: Vec<&crate::algebra::PolyVectorField> =
            combo.iter().map(|&i| &*brackets[i].1).collect();
        let det = det_poly(&cols);
        if det.is_zero() {
            pruning.zero_determinants += 1;
            continue;
        }
        let weighted = det.mul(model.volume_density());
        let (normalized, _) = weighted.sign_normalized();
        if dets.iter().any(|d| d.poly == normalized) {
            pruning.duplicate_determinants += 1;
            continue;
        }
        dets.push(DetPolynomial {
            tuple: combo.iter().map(|&i| brackets[i].0.clone()).collect(),
            poly: normalized,
        });
    }
    pruning.surviving = dets.len();
    Ok(TupleFamily {
        total_length: total,
        dets,
        pruning,
    })
}

#[allow(clippy::too_many_arguments)]
fn enumerate_combos(
    lengths: &[usize],
    start: usize,
    slots: usize,
    remaining: i64,
    stack: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    considered: &mut usize,
    budget: usize,
) -> Result<()> {
    if slots == 0 {
        if remaining == 0 {
            *considered += 1;
            if *considered > budget {
                return Err(Error::CombinatorialBudgetExceeded {
                    considered: *considered,
                    cap: budget,
                });
            }
            out.push(stack.clone());
        }
        return Ok(());
    }
    for i in start..lengths.len() {
        let l = lengths[i] as i64;
        // Remaining slots each need length >= 1.
        if remaining - l < (slots as i64 - 1) {
            continue;
        }
        stack.push(i);
        enumerate_combos(lengths, i + 1, slots - 1, remaining - l, stack, out, considered, budget)?;
        stack.pop();
    }
    Ok(())
}

/// Symbolic determinant of the matrix whose columns are the given fields,
/// by cofactor expansion.
fn det_poly(cols: &[&crate::algebra::PolyVectorField]) -> Polynomial {
    let n = cols.len();
    let nvars = cols[0].dim();
    let mut rows: Vec<Vec<Polynomial>> = (0..n)
        .map(|r| cols.iter().map(|c| c.component(r).clone()).collect())
        .collect();
    det_poly_rec(&mut rows, nvars)
}

fn det_poly_rec(rows: &mut Vec<Vec<Polynomial>>, nvars: usize) -> Polynomial {
    let n = rows.len();
    if n == 1 {
        return rows[0][0].clone();
    }
    let mut acc = Polynomial::zero(nvars);
    for r in 0..n {
        if rows[r][0].is_zero() {
            continue;
        }
        let mut minor: Vec<Vec<Polynomial>> = rows
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != r)
            .map(|(_, row)| row[1..].to_vec())
            .collect();
        let sub = det_poly_rec(&mut minor, nvars);
        let signed = if r % 2 == 0 { sub } else { sub.neg() };
        acc = acc.add(&rows[r][0].mul(&signed));
    }
    acc
}

/// `nu = sqrt(sum of squared determinants)` at a float point.
pub fn nu(family: &TupleFamily, q: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for d in &family.dets {
        let v = d.poly.eval_f64(q)?;
        acc += v * v;
    }
    Ok(acc.sqrt())
}

/// `nu_bar = max |determinant|` at a float point.
pub fn nu_bar(family: &TupleFamily, q: &[f64]) -> Result<f64> {
    let mut acc = 0.0f64;
    for d in &family.dets {
        acc = acc.max(d.poly.eval_f64(q)?.abs());
    }
    Ok(acc)
}

/// Exact `nu^2` at a rational point.
pub fn nu_sq_exact(family: &TupleFamily, q: &[Rat]) -> Result<Rat> {
    let mut acc = Rat::zero();
    for d in &family.dets {
        let v = d.poly.eval_rat(q)?;
        acc += &v * &v;
    }
    Ok(acc)
}

/// Exact `nu_bar` at a rational point.
pub fn nu_bar_exact(family: &TupleFamily, q: &[Rat]) -> Result<Rat> {
    let mut acc = Rat::zero();
    for d in &family.dets {
        let v = d.poly.eval_rat(q)?.abs();
        if v > acc {
            acc = v;
        }
    }
    Ok(acc)
}

/// Weak equivalent of the blown-up volume of the intersection of the unit
/// nilpotent ball with the tangent space of a coordinate-aligned stratum:
/// over tuples attaining the max |omega| at total length Q(q), the density
/// of the stratum volume form against the tangent block of the tuple.
pub fn nu_bar_submanifold(
    model: &StructureModel,
    chart: &SubmanifoldChart,
    varpi_density: &Polynomial,
    q: &[Rat],
) -> Result<Rat> {
    let aligned = chart.coordinate_aligned().ok_or_else(|| {
        Error::UnsupportedStratumShape(format!(
            "stratum `{}` is not a coordinate subspace",
            chart.label
        ))
    })?;
    let n = model.dim();
    let k = chart.k;
    let flag = flags::flag_at(model, q, model.bracket_depth_cap)?;
    let family = enumerate_family(model, flag.q)?;

    // Tuples attaining the maximal |det| at q.
    let mut best = Rat::zero();
    let mut values: Vec<Rat> = Vec::with_capacity(family.dets.len());
    for d in &family.dets {
        let v = d.poly.eval_rat(q)?.abs();
        if v > best {
            best = v.clone();
        }
        values.push(v);
    }
    if best.is_zero() {
        return Ok(Rat::zero());
    }

    let transverse: Vec<usize> = aligned.transverse.iter().map(|(a, _)| a - 1).collect();
    debug_assert_eq!(transverse.len(), n - k);
    let varpi_at_q = varpi_density.eval_rat(q)?.abs();

    let mut result = Rat::zero();
    for (d, v) in family.dets.iter().zip(&values) {
        if v != &best {
            continue;
        }
        // Values of the tuple fields at q.
        let mut cols: Vec<Vec<Rat>> = Vec::with_capacity(n);
        for idx in &d.tuple {
            cols.push(model.table().bracket(idx)?.eval_rat(q)?);
        }
        // Largest transverse minor over (n-k)-subsets of the tuple.
        let mut best_minor = Rat::zero();
        for subset in subsets_of_size(n, n - k) {
            let rows: Vec<Vec<Rat>> = transverse
                .iter()
                .map(|&ti| subset.iter().map(|&ci| cols[ci][ti].clone()).collect())
                .collect();
            let minor = linalg::det(&rows).abs();
            if minor > best_minor {
                best_minor = minor;
            }
        }
        if best_minor.is_zero() {
            continue;
        }
        let candidate = &varpi_at_q * &best / &best_minor;
        if candidate > result {
            result = candidate;
        }
    }
    Ok(result)
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack = Vec::new();
    fn rec(n: usize, k: usize, start: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if stack.len() == k {
            out.push(stack.clone());
            return;
        }
        for i in start..n {
            stack.push(i);
            rec(n, k, i + 1, stack, out);
            stack.pop();
        }
    }
    rec(n, k, 0, &mut stack, &mut out);
    out
}

/// Result of a shrinking-box order scan along a stratum.
#[derive(Clone, Debug)]
pub struct OrderScan {
    pub value: OrderBound,
    pub rounds: Vec<OrderBound>,
    pub stabilized: bool,
}

/// Minimal nonholonomic order of the family determinants at seeded sample
/// points of the stratum near `p`; the shrinking limit is realized by
/// halving the sample box twice and keeping the stabilized value.
pub fn rho_min(
    model: &StructureModel,
    family: &TupleFamily,
    p: &[Rat],
    chart: &SubmanifoldChart,
    sample_count: usize,
    seed: u64,
    s_max: usize,
) -> Result<OrderScan> {
    order_scan(model, family, p, chart, sample_count, seed, |model, poly, q| {
        nonholonomic_order(model, poly, q, s_max)
    })
}

/// Minimal usual differential order of the family determinants near `p`.
pub fn e_min(
    model: &StructureModel,
    family: &TupleFamily,
    p: &[Rat],
    chart: &SubmanifoldChart,
    sample_count: usize,
    seed: u64,
) -> Result<OrderScan> {
    order_scan(model, family, p, chart, sample_count, seed, |_, poly, q| {
        ord_diff(poly, q).map(OrderBound::Exact)
    })
}

fn order_scan(
    model: &StructureModel,
    family: &TupleFamily,
    p: &[Rat],
    chart: &SubmanifoldChart,
    sample_count: usize,
    seed: u64,
    order_of: impl Fn(&StructureModel, &Polynomial, &[Rat]) -> Result<OrderBound>,
) -> Result<OrderScan> {
    if family.is_empty() {
        return Err(Error::MissingInput("empty tuple family".into()));
    }
    let u_p = chart.locate(p)?;
    let mut rounds = Vec::with_capacity(3);
    let mut scale = crate::algebra::rat(1);
    for round in 0..3u64 {
        let mut params = vec![u_p.clone()];
        params.extend(chart.sample_params(
            &u_p,
            &(&scale / crate::algebra::rat(4)),
            sample_count,
            sample::derived_seed(seed, round),
        ));
        let mut round_min: Option<OrderBound> = None;
        for u in &params {
            let q = chart.point_at(u)?;
            for det in &family.dets {
                let ord = order_of(model, &det.poly, &q)?;
                round_min = Some(match round_min {
                    None => ord,
                    Some(m) => m.min(ord),
                });
            }
        }
        rounds.push(round_min.unwrap());
        scale = &scale / crate::algebra::rat(2);
    }
    let stabilized = rounds[1] == rounds[2];
    Ok(OrderScan {
        value: *rounds.last().unwrap(),
        rounds,
        stabilized,
    })
}

/// Outcome of the symbolic transverse-homogeneity test of `nu^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Homogeneity {
    /// The chart is not axis-aligned, so the symbolic test does not apply.
    NotApplicable,
    No,
    /// `nu(y, dilate(lambda, z)) = lambda^rho nu(y, z)` with `2 rho` stored
    /// exactly.
    Yes { two_rho: i64 },
}

/// Symbolic test: is `nu^2` weighted-homogeneous in the transverse chart
/// coordinates? Exact polynomial identity, no sampling.
pub fn homogeneity_check(
    _model: &StructureModel,
    family: &TupleFamily,
    chart: &ExpChart,
) -> Result<Homogeneity> {
    let Some(perm) = chart.axis_permutation() else {
        return Ok(Homogeneity::NotApplicable);
    };
    if family.is_empty() {
        return Ok(Homogeneity::No);
    }
    let n = perm.len();
    // Map each determinant into chart coordinates: shift to the base point
    // and permute variables.
    let mut maps = Vec::with_capacity(n);
    let mut inv = vec![0usize; n];
    for (j, &a) in perm.iter().enumerate() {
        inv[a] = j;
    }
    for a in 0..n {
        let mut m = Polynomial::var(n, inv[a] + 1)?;
        if !chart.base()[a].is_zero() {
            m = m.add(&Polynomial::constant(n, chart.base()[a].clone()));
        }
        maps.push(m);
    }
    let mut nu_sq = Polynomial::zero(n);
    for d in &family.dets {
        let in_chart = d.poly.compose_truncated(&maps, u32::MAX);
        nu_sq = nu_sq.add(&in_chart.mul(&in_chart));
    }
    if nu_sq.is_zero() {
        return Ok(Homogeneity::No);
    }
    let mut degrees: BTreeSet<u64> = BTreeSet::new();
    for (exps, _) in nu_sq.terms() {
        let d: u64 = (chart.tangent_count..n)
            .map(|j| exps[j] as u64 * chart.weights[j] as u64)
            .sum();
        degrees.insert(d);
    }
    if degrees.len() == 1 {
        Ok(Homogeneity::Yes {
            two_rho: *degrees.iter().next().unwrap() as i64,
        })
    } else {
        Ok(Homogeneity::No)
    }
}

/// Geometric grid of dilation parameters for ray fits.
#[derive(Clone, Copy, Debug)]
pub struct LambdaGrid {
    pub lambda_max: f64,
    pub ratio: f64,
    pub count: usize,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        LambdaGrid {
            lambda_max: 0.25,
            ratio: 0.5,
            count: 10,
        }
    }
}

impl LambdaGrid {
    pub fn values(&self) -> Vec<f64> {
        (0..self.count)
            .map(|j| self.lambda_max * self.ratio.powi(j as i32))
            .collect()
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct RayFit {
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub slope: f64,
    pub sigma: f64,
    pub r_squared: f64,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct RhoMaxEstimate {
    pub sup_slope: f64,
    /// Fit standard error of the ray realizing the sup.
    pub sup_sigma: f64,
    pub rays: Vec<RayFit>,
    pub excluded_rays: usize,
}

/// Per-ray slope of `log nu` against `log lambda` along transverse dilation
/// rays, returning the sup over deterministic axis rays plus seeded random
/// rays. Rays along which nu vanishes are excluded and counted.
pub fn rho_max_estimate(
    _model: &StructureModel,
    family: &TupleFamily,
    chart: &ExpChart,
    grid: &LambdaGrid,
    y_samples: usize,
    z_samples: usize,
    y_radius: f64,
    seed: u64,
) -> Result<RhoMaxEstimate> {
    if grid.count < 6 {
        return Err(Error::MissingInput(
            "lambda grid needs at least 6 points".into(),
        ));
    }
    let k = chart.tangent_count;
    let nz = chart.dim() - k;
    if nz == 0 {
        return Err(Error::MissingInput(
            "chart has no transverse coordinates".into(),
        ));
    }
    let tangent_dim = chart.tangent_dilation();
    let transverse_dim = chart.transverse_dilation();
    let lambdas = grid.values();

    // Deterministic rays: y = 0 with z on each signed transverse axis.
    let mut rays: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for j in 0..nz {
        for sign in [1.0f64, -1.0] {
            let mut z = vec![0.0; nz];
            z[j] = sign;
            rays.push((vec![0.0; k], z));
        }
    }
    let mut rng = sample::rng(seed);
    for _ in 0..y_samples.max(1) {
        let y_unit = sample::f64_point_in_box(&mut rng, &vec![1.0; k]);
        let y = tangent_dim.dilate(y_radius, &y_unit);
        for _ in 0..z_samples.max(1) {
            let mut z;
            loop {
                z = sample::f64_point_in_box(&mut rng, &vec![1.0; nz]);
                if z.iter().any(|v| v.abs() > 1e-6) {
                    break;
                }
            }
            rays.push((y.clone(), transverse_dim.normalize(&z)));
        }
    }

    let mut fits: Vec<RayFit> = Vec::new();
    let mut excluded = 0usize;
    for (y, z) in rays {
        let mut logs: Vec<(f64, f64)> = Vec::with_capacity(lambdas.len());
        let mut degenerate = false;
        for &lambda in &lambdas {
            let dz = transverse_dim.dilate(lambda, &z);
            let mut x = y.clone();
            x.extend(dz);
            let q = chart.map(&x);
            let v = nu(family, &q)?;
            if !(v > 1e-250) {
                degenerate = true;
                break;
            }
            logs.push((lambda.ln(), v.ln()));
        }
        if degenerate {
            excluded += 1;
            continue;
        }
        let (slope, sigma, r2) = least_squares_slope(&logs);
        fits.push(RayFit {
            y,
            z,
            slope,
            sigma,
            r_squared: r2,
        });
    }
    if fits.is_empty() {
        return Err(Error::DegenerateFit(
            "nu vanished along every sampled ray".into(),
        ));
    }
    let best = fits
        .iter()
        .max_by(|a, b| a.slope.total_cmp(&b.slope))
        .unwrap();
    Ok(RhoMaxEstimate {
        sup_slope: best.slope,
        sup_sigma: best.sigma,
        rays: fits.clone(),
        excluded_rays: excluded,
    })
}

/// Least-squares slope with its standard error and R^2.
pub fn least_squares_slope(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (slope * p.0 + intercept)).powi(2))
        .sum();
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let dof = (points.len().max(3) - 2) as f64;
    let sigma = (ss_res / dof / sxx).sqrt();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (slope, sigma, r2)
}

/// How the transverse decay exponent was obtained.
#[derive(Clone, Debug, serde::Serialize)]
pub enum RhoMax {
    /// Exact value from the symbolic homogeneity test (`2 rho` stored).
    ExactHomogeneous { two_rho: i64 },
    Estimated(RhoMaxEstimate),
}

impl RhoMax {
    pub fn value(&self) -> f64 {
        match self {
            RhoMax::ExactHomogeneous { two_rho } => *two_rho as f64 / 2.0,
            RhoMax::Estimated(e) => e.sup_slope,
        }
    }
}

/// Transverse order exponents of nu at `(p, N)` with the integrability
/// threshold `Q(p) - Q_N`.
#[derive(Clone, Debug)]
pub struct RhoReport {
    pub point: Vec<Rat>,
    pub stratum: String,
    pub rho_min: OrderBound,
    pub rho_min_stabilized: bool,
    pub e_min: OrderBound,
    pub q_p: u64,
    pub q_n: u64,
    pub q_r: u64,
    pub codim: usize,
    pub threshold: i64,
    pub homogeneity: Homogeneity,
    pub rho_max: RhoMax,
}

pub struct RhoOptions {
    pub sample_count: usize,
    pub seed: u64,
    pub order_cap: usize,
    pub grid: LambdaGrid,
    pub y_samples: usize,
    pub z_samples: usize,
    pub y_radius: f64,
}

impl Default for RhoOptions {
    fn default() -> Self {
        RhoOptions {
            sample_count: 8,
            seed: 42,
            order_cap: 0, // 0 = derive from the model dimension
            grid: LambdaGrid::default(),
            y_samples: 6,
            z_samples: 8,
            y_radius: 0.5,
        }
    }
}

/// Assemble the full exponent report for a point on a stratum.
pub fn rho_report(
    model: &StructureModel,
    family: &TupleFamily,
    p: &[Rat],
    stratum: &SubmanifoldChart,
    q_n: u64,
    q_r: u64,
    opts: &RhoOptions,
) -> Result<RhoReport> {
    let flag = flags::flag_at(model, p, model.bracket_depth_cap)?;
    let threshold = flag.q as i64 - q_n as i64;
    let order_cap = if opts.order_cap == 0 {
        (2 * model.dim()).max(flag.q as usize)
    } else {
        opts.order_cap
    };
    let rho = rho_min(model, family, p, stratum, opts.sample_count, opts.seed, order_cap)?;
    let e = e_min(model, family, p, stratum, opts.sample_count, opts.seed)?;
    let chart = crate::coords::chart_for(model, p, Some(stratum))?;
    let homogeneity = homogeneity_check(model, family, &chart)?;
    let rho_max = match homogeneity {
        Homogeneity::Yes { two_rho } => RhoMax::ExactHomogeneous { two_rho },
        _ => RhoMax::Estimated(rho_max_estimate(
            model,
            family,
            &chart,
            &opts.grid,
            opts.y_samples,
            opts.z_samples,
            opts.y_radius,
            opts.seed,
        )?),
    };
    Ok(RhoReport {
        point: p.to_vec(),
        stratum: stratum.label.clone(),
        rho_min: rho.value,
        rho_min_stabilized: rho.stabilized,
        e_min: e.value,
        q_p: flag.q,
        q_n,
        q_r,
        codim: model.dim() - stratum.k,
        threshold,
        homogeneity,
        rho_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, PolyVectorField};

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

    fn heisenberg() -> StructureModel {
        StructureModel::new(
            3,
            vec![field(&["1", "0", "0"], 3), field(&["0", "1", "x1"], 3)],
            Polynomial::one(3),
            vec![],
            vec![],
            None,
            None,
        )
        .unwrap()
    }

    fn r5_family(k: u32) -> StructureModel {
        let x3_last = if k == 1 {
            "x1 + x2".to_string()
        } else {
            format!("x1^{k} + x2^{k}")
        };
        StructureModel::new(
            5,
            vec![
                field(&["1", "0", "0", "0", "0"], 5),
                field(&["0", "1", "x1", "0", "x1^2"], 5),
                field(&["0", "0", "0", "1", &x3_last], 5),
            ],
            Polynomial::one(5),
            vec![chart("S", 3, &["0", "0", "x1", "x2", "x3"])],
            vec![],
            None,
            None,
        )
        .unwrap()
    }

    #[test]
    fn martinet_family_is_single_det() {
        let m = martinet();
        let f = enumerate_family(&m, 4).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.dets[0].poly, Polynomial::parse("x1", 3, None).unwrap());
        let tuple: Vec<Vec<usize>> = f.dets[0].tuple.iter().map(|i| i.entries().to_vec()).collect();
        assert_eq!(tuple, vec![vec![1], vec![2], vec![1, 2]]);
    }

    #[test]
    fn heisenberg_family_is_unit() {
        let f = enumerate_family(&heisenberg(), 4).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.dets[0].poly, Polynomial::one(3));
    }

    #[test]
    fn r5_family_two_dets_for_k_at_least_two() {
        for k in 2..=4u32 {
            let m = r5_family(k);
            let f = enumerate_family(&m, 7).unwrap();
            assert_eq!(f.len(), 2, "k={k}");
            let expected: BTreeSet<Polynomial> = [
                format!("{k} x1^{}", k - 1),
                format!("{k} x2^{}", k - 1),
            ]
            .iter()
            .map(|s| {
                let p = Polynomial::parse(s, 5, None).unwrap();
                p.sign_normalized().0
            })
            .collect();
            let got: BTreeSet<Polynomial> = f.dets.iter().map(|d| d.poly.clone()).collect();
            assert_eq!(got, expected, "k={k}");
        }
        // k = 1: the two length-2 brackets coincide as fields, so a single
        // constant determinant survives the pruning.
        let f = enumerate_family(&r5_family(1), 7).unwrap();
        assert_eq!(f.len(), 1);
        assert!(f.dets[0].poly.is_constant());
    }

    #[test]
    fn nu_martinet_matches_abs_x1() {
        let m = martinet();
        let f = enumerate_family(&m, 4).unwrap();
        let mut rng = sample::rng(3);
        for _ in 0..30 {
            let q = sample::f64_point_in_box(&mut rng, &[2.0, 2.0, 2.0]);
            let v = nu(&f, &q).unwrap();
            assert!((v - q[0].abs()).abs() <= 1e-12 * (1.0 + q[0].abs()));
            assert!((nu_bar(&f, &q).unwrap() - q[0].abs()).abs() <= 1e-12);
        }
        // nu vanishes exactly on the singular plane.
        assert!(nu_sq_exact(&f, &[rat(0), rat(5), rat(-2)]).unwrap().is_zero());
    }

    #[test]
    fn nu_bounds_sandwich() {
        let m = r5_family(3);
        let f = enumerate_family(&m, 7).unwrap();
        let sqrt_f = (f.len() as f64).sqrt();
        let mut rng = sample::rng(4);
        for _ in 0..100 {
            let q = sample::f64_point_in_box(&mut rng, &[1.0; 5]);
            let v = nu(&f, &q).unwrap();
            let vb = nu_bar(&f, &q).unwrap();
            assert!(vb <= v + 1e-14);
            assert!(v <= sqrt_f * vb + 1e-14);
        }
    }

    #[test]
    fn nonholonomic_order_examples() {
        let m = martinet();
        let origin = vec![rat(0); 3];
        let x1 = Polynomial::parse("x1", 3, None).unwrap();
        assert_eq!(
            nonholonomic_order(&m, &x1, &origin, 6).unwrap(),
            OrderBound::Exact(1)
        );
        let h = heisenberg();
        let x3 = Polynomial::parse("x3", 3, None).unwrap();
        assert_eq!(
            nonholonomic_order(&h, &x3, &vec![rat(0); 3], 6).unwrap(),
            OrderBound::Exact(2)
        );
        let c = Polynomial::parse("7", 3, None).unwrap();
        assert_eq!(
            nonholonomic_order(&m, &c, &origin, 6).unwrap(),
            OrderBound::Exact(0)
        );
    }

    #[test]
    fn ord_diff_examples() {
        let h = Polynomial::parse("2 x3^2", 4, None).unwrap();
        assert_eq!(ord_diff(&h, &vec![rat(0); 4]).unwrap(), 2);
        let h = Polynomial::parse("3 x1^2 x3^2 - 2 x2", 4, None).unwrap();
        assert_eq!(ord_diff(&h, &vec![rat(0); 4]).unwrap(), 1);
        let c = Polynomial::parse("5", 2, None).unwrap();
        assert_eq!(ord_diff(&c, &[rat(0), rat(0)]).unwrap(), 0);
        assert!(matches!(
            ord_diff(&Polynomial::zero(2), &[rat(0), rat(0)]),
            Err(Error::IdenticallyZero)
        ));
    }

    #[test]
    fn martinet_rho_and_e_min() {
        let m = martinet();
        let f = enumerate_family(&m, 4).unwrap();
        let s = m.stratum("S").unwrap().clone();
        let origin = vec![rat(0); 3];
        let scan = rho_min(&m, &f, &origin, &s, 8, 1, 8).unwrap();
        assert_eq!(scan.value, OrderBound::Exact(1));
        assert!(scan.stabilized);
        let scan = e_min(&m, &f, &origin, &s, 8, 1).unwrap();
        assert_eq!(scan.value, OrderBound::Exact(1));
    }

    #[test]
    fn r5_rho_min_is_k_minus_one() {
        for k in 1..=4u32 {
            let m = r5_family(k);
            let f = enumerate_family(&m, 7).unwrap();
            let s = m.stratum("S").unwrap().clone();
            let origin = vec![rat(0); 5];
            let scan = rho_min(&m, &f, &origin, &s, 6, 2, 10).unwrap();
            assert_eq!(scan.value, OrderBound::Exact(k - 1), "k={k}");
        }
    }

    #[test]
    fn martinet_homogeneity() {
        let m = martinet();
        let f = enumerate_family(&m, 4).unwrap();
        let s = m.stratum("S").unwrap().clone();
        let chart = crate::coords::chart_for(&m, &vec![rat(0); 3], Some(&s)).unwrap();
        let h = homogeneity_check(&m, &f, &chart).unwrap();
        assert_eq!(h, Homogeneity::Yes { two_rho: 2 });
    }

    #[test]
    fn martinet_rho_max_estimate_is_one() {
        let m = martinet();
        let f = enumerate_family(&m, 4).unwrap();
        let s = m.stratum("S").unwrap().clone();
        let chart = crate::coords::chart_for(&m, &vec![rat(0); 3], Some(&s)).unwrap();
        let est = rho_max_estimate(
            &m,
            &f,
            &chart,
            &LambdaGrid::default(),
            4,
            4,
            0.5,
            7,
        )
        .unwrap();
        assert!((est.sup_slope - 1.0).abs() <= 0.05, "slope {}", est.sup_slope);
    }

    #[test]
    fn budget_is_enforced() {
        let m = StructureModel::new(
            3,
            vec![field(&["1", "0", "0"], 3), field(&["0", "1", "x1"], 3)],
            Polynomial::one(3),
            vec![],
            vec![],
            None,
            Some(1),
        )
        .unwrap();
        // Multiple candidate tuples exist at total length 4 before pruning.
        let err = enumerate_family(&m, 4).unwrap_err();
        assert!(matches!(err, Error::CombinatorialBudgetExceeded { .. }));
    }

    #[test]
    fn nu_bar_submanifold_martinet_origin() {
        let m = martinet();
        let s = m.stratum("S").unwrap().clone();
        // Stratum volume form dx2 ^ dx3 has density 1.
        let varpi = Polynomial::one(3);
        let v = nu_bar_submanifold(&m, &s, &varpi, &[rat(0), rat(0), rat(0)]).unwrap();
        assert_eq!(v, rat(1));
        // Linearity in the stratum density.
        let doubled = Polynomial::parse("2", 3, None).unwrap();
        let v2 = nu_bar_submanifold(&m, &s, &doubled, &[rat(0), rat(0), rat(0)]).unwrap();
        assert_eq!(v2, rat(2));
    }

    #[test]
    fn nu_bar_submanifold_full_space_reduces_to_nu_bar() {
        // A full-dimensional coordinate chart: the value must reduce to the
        // max |omega| determinant at total length Q(q).
        let m = martinet();
        let full = chart("O", 3, &["x1", "x2", "x3"]);
        let q = vec![rat(2), rat(0), rat(0)];
        let varpi = Polynomial::one(3);
        let v = nu_bar_submanifold(&m, &full, &varpi, &q).unwrap();
        // At a regular point Q(q) = 4 and the best tuple is (X1, X2, X12)
        // with determinant x1.
        assert_eq!(v, rat(2));
    }

    #[test]
    fn nu_bar_submanifold_rejects_skew_strata() {
        let m = martinet();
        let skew = chart("D", 2, &["x1", "x1 + x2", "x2"]);
        let err =
            nu_bar_submanifold(&m, &skew, &Polynomial::one(3), &[rat(0), rat(0), rat(0)])
                .unwrap_err();
        assert!(matches!(err, Error::UnsupportedStratumShape(_)));
    }

    #[test]
    fn order_bound_min_logic() {
        use OrderBound::*;
        assert_eq!(Exact(1).min(Exact(3)), Exact(1));
        assert_eq!(Exact(2).min(AtLeast(5)), Exact(2));
        assert_eq!(AtLeast(5).min(Exact(7)), AtLeast(5));
        assert_eq!(AtLeast(4).min(AtLeast(6)), AtLeast(4));
        assert!(Exact(3).at_least(3));
        assert!(AtLeast(9).at_least(3));
        assert!(!Exact(2).at_least(3));
    }
}
