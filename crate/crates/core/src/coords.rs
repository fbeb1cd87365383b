//! Adapted bases, exponential coordinate charts, weighted dilations and
//! pseudo-norms, and the weighted-homogeneous nilpotent approximation.


use num_traits::{ToPrimitive, Zero};

use crate::algebra::{MultiIndex, PolyVectorField, Polynomial, Rat};
use crate::error::{Error, Result};
use crate::flags::{self, StructureModel};
use crate::linalg;
use crate::measure;
use crate::strata::{self, SubmanifoldChart};

/// Weighted dilations `x_i -> lambda^{w_i} x_i` and the associated
/// pseudo-norm `max |x_i|^{1/w_i}`, which is 1-homogeneous under them.
#[derive(Clone, Debug)]
pub struct Dilation {
    pub weights: Vec<u32>,
}

impl Dilation {
    pub fn dilate(&self, lambda: f64, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.weights.len());
        x.iter()
            .zip(&self.weights)
            .map(|(&xi, &w)| lambda.powi(w as i32) * xi)
            .collect()
    }

    pub fn pseudo_norm(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.weights.len());
        x.iter()
            .zip(&self.weights)
            .map(|(&xi, &w)| xi.abs().powf(1.0 / w as f64))
            .fold(0.0, f64::max)
    }

    /// Rescale `x` onto the unit pseudo-sphere (`x` must be nonzero).
    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        let norm = self.pseudo_norm(x);
        self.dilate(1.0 / norm, x)
    }
}

/// An adapted basis at a base point: bracket fields whose values realize the
/// flag, with their lengths summing to Q(p).
#[derive(Clone, Debug)]
pub struct AdaptedBasis {
    pub fields: Vec<PolyVectorField>,
    /// Bracket multi-index per field; `None` for user-supplied combinations.
    pub indices: Vec<Option<MultiIndex>>,
    pub lengths: Vec<usize>,
    pub base: Vec<Rat>,
}

/// Greedy adapted-basis selection over iterated brackets by increasing
/// length. With `prefer_tangent_to`, the first k fields are tangent to the
/// stratum and realize the restricted flag; `extra_tangent` supplies
/// user-provided tangent combinations when single brackets do not suffice.
pub fn adapted_basis(
    model: &StructureModel,
    p: &[Rat],
    prefer_tangent_to: Option<&SubmanifoldChart>,
    extra_tangent: &[PolyVectorField],
) -> Result<AdaptedBasis> {
    let flag = flags::flag_at(model, p, model.bracket_depth_cap)?;
    let r = flag.step();
    let m = model.family_size();
    let n = model.dim();

    let mut fields: Vec<PolyVectorField> = Vec::new();
    let mut indices: Vec<Option<MultiIndex>> = Vec::new();
    let mut lengths: Vec<usize> = Vec::new();
    let mut values: Vec<Vec<Rat>> = Vec::new();

    if let Some(chart) = prefer_tangent_to {
        let u_p = chart.locate(p)?;
        let restricted = strata::restricted_flag_at(model, chart, &u_p)?;
        for depth in 1..=r {
            for idx in MultiIndex::enumerate(m, depth)
                .into_iter()
                .filter(|i| i.len() == depth)
            {
                if fields.len() == chart.k {
                    break;
                }
                let f = model.table().bracket(&idx)?;
                if f.is_zero() || !strata::field_tangent_to_chart(&f, chart, 0)? {
                    continue;
                }
                let v = f.eval_rat(p)?;
                if extends_rank(&values, &v) {
                    values.push(v);
                    fields.push((*f).clone());
                    indices.push(Some(idx));
                    lengths.push(depth);
                }
            }
            // User-supplied tangent combinations count with the depth at
            // which they first extend the rank inside D^depth.
            for cand in extra_tangent {
                if fields.len() == chart.k {
                    break;
                }
                if !strata::field_tangent_to_chart(cand, chart, 0)? {
                    continue;
                }
                if !field_in_module_depth(model, cand, p, depth)? {
                    continue;
                }
                let v = cand.eval_rat(p)?;
                if extends_rank(&values, &v) {
                    values.push(v);
                    fields.push(cand.clone());
                    indices.push(None);
                    lengths.push(depth);
                }
            }
            let have = fields.len();
            if have != restricted[depth - 1] {
                return Err(Error::CannotRealizeRestrictedFlag);
            }
        }
        if fields.len() != chart.k {
            return Err(Error::CannotRealizeRestrictedFlag);
        }
    }

    for depth in 1..=r {
        for idx in MultiIndex::enumerate(m, depth)
            .into_iter()
            .filter(|i| i.len() == depth)
        {
            if values.len() == n {
                break;
            }
            let f = model.table().bracket(&idx)?;
            if f.is_zero() {
                continue;
            }
            let v = f.eval_rat(p)?;
            if extends_rank(&values, &v) {
                values.push(v);
                fields.push((*f).clone());
                indices.push(Some(idx));
                lengths.push(depth);
            }
        }
    }
    debug_assert_eq!(values.len(), n);
    let total: u64 = lengths.iter().map(|&l| l as u64).sum();
    if total != flag.q {
        return Err(Error::CannotRealizeRestrictedFlag);
    }
    Ok(AdaptedBasis {
        fields,
        indices,
        lengths,
        base: p.to_vec(),
    })
}

fn extends_rank(values: &[Vec<Rat>], v: &[Rat]) -> bool {
    if v.iter().all(|c| c.is_zero()) {
        return false;
    }
    let base = linalg::rank(values);
    let mut joined = values.to_vec();
    joined.push(v.to_vec());
    linalg::rank(&joined) > base
}

/// Whether the field's value at p lies in D^depth_p (value-level test).
fn field_in_module_depth(
    model: &StructureModel,
    field: &PolyVectorField,
    p: &[Rat],
    depth: usize,
) -> Result<bool> {
    let by_depth = flags::bracket_values_by_depth(model, p, depth)?;
    let mut pool: Vec<Vec<Rat>> = by_depth.into_iter().flatten().collect();
    let v = field.eval_rat(p)?;
    if v.iter().all(|c| c.is_zero()) {
        return Ok(true);
    }
    let base = linalg::rank(&pool);
    pool.push(v);
    Ok(linalg::rank(&pool) == base)
}

#[derive(Clone, Debug)]
enum ChartKind {
    /// Chart coordinate `j` is ambient coordinate `perm[j]` (0-based),
    /// translated to the base point.
    AxisAligned { perm: Vec<usize> },
    /// Composition of flows of an adapted basis.
    Flows { basis: AdaptedBasis },
}

/// Exponential-coordinate chart at a base point. Chart coordinates are
/// ordered with the stratum-tangent block first; `weights[j]` is the weight
/// of chart coordinate `j`.
#[derive(Clone, Debug)]
pub struct ExpChart {
    base: Vec<Rat>,
    base_f64: Vec<f64>,
    pub weights: Vec<u32>,
    /// Number of leading tangent coordinates (equals n without a stratum).
    pub tangent_count: usize,
    kind: ChartKind,
    pub validity_radius: f64,
    pub step_div: u32,
}

impl ExpChart {
    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn base(&self) -> &[Rat] {
        &self.base
    }

    pub fn is_axis_aligned(&self) -> bool {
        matches!(self.kind, ChartKind::AxisAligned { .. })
    }

    pub fn dilation(&self) -> Dilation {
        Dilation {
            weights: self.weights.clone(),
        }
    }

    /// Dilation acting on the transverse block only.
    pub fn transverse_dilation(&self) -> Dilation {
        Dilation {
            weights: self.weights[self.tangent_count..].to_vec(),
        }
    }

    pub fn tangent_dilation(&self) -> Dilation {
        Dilation {
            weights: self.weights[..self.tangent_count].to_vec(),
        }
    }

    /// Ambient coordinate index carried by chart coordinate `j`, when the
    /// chart is axis-aligned.
    pub fn axis_permutation(&self) -> Option<&[usize]> {
        match &self.kind {
            ChartKind::AxisAligned { perm } => Some(perm),
            ChartKind::Flows { .. } => None,
        }
    }

    pub fn basis(&self) -> Option<&AdaptedBasis> {
        match &self.kind {
            ChartKind::Flows { basis } => Some(basis),
            ChartKind::AxisAligned { .. } => None,
        }
    }

    /// Chart map: composition of basis flows (or the translation for
    /// axis-aligned charts), first coordinate applied first.
    pub fn map(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim());
        match &self.kind {
            ChartKind::AxisAligned { perm } => {
                let mut q = self.base_f64.clone();
                for (j, &a) in perm.iter().enumerate() {
                    q[a] += x[j];
                }
                q
            }
            ChartKind::Flows { basis } => {
                let mut q = self.base_f64.clone();
                let steps = self.step_div.max(1) as usize;
                for (j, field) in basis.fields.iter().enumerate() {
                    if x[j] != 0.0 {
                        q = rk4_flow(field, &q, x[j], steps);
                    }
                }
                q
            }
        }
    }

    /// Inverse chart map by damped Newton iteration on `map`.
    pub fn inverse(&self, q: &[f64]) -> Result<Vec<f64>> {
        self.inverse_with_guess(q, None)
    }

    /// Inverse with an optional warm-start guess for the Newton iteration.
    pub fn inverse_with_guess(&self, q: &[f64], guess: Option<&[f64]>) -> Result<Vec<f64>> {
        assert_eq!(q.len(), self.dim());
        match &self.kind {
            ChartKind::AxisAligned { perm } => {
                let mut x = vec![0.0; self.dim()];
                for (j, &a) in perm.iter().enumerate() {
                    x[j] = q[a] - self.base_f64[a];
                }
                Ok(x)
            }
            ChartKind::Flows { .. } => {
                let n = self.dim();
                let scale = 1.0 + q.iter().map(|v| v.abs()).fold(0.0, f64::max);
                let tol = 1e-12 * scale;
                let mut x = guess.map(|g| g.to_vec()).unwrap_or_else(|| vec![0.0; n]);
                let mut residual: Vec<f64> =
                    self.map(&x).iter().zip(q).map(|(a, b)| a - b).collect();
                let mut err: f64 = residual.iter().map(|v| v * v).sum::<f64>().sqrt();
                for _ in 0..60 {
                    if err <= tol {
                        return Ok(x);
                    }
                    let jac = self.jacobian_fd(&x);
                    let rhs: Vec<f64> = residual.iter().map(|v| -v).collect();
                    let Some(dx) = linalg::solve_f64(&jac, &rhs) else {
                        return Err(Error::ChartInversionFailed(
                            "singular Jacobian in Newton step".into(),
                        ));
                    };
                    // Damped update: backtrack until the residual shrinks.
                    let mut lambda = 1.0;
                    loop {
                        let trial: Vec<f64> =
                            x.iter().zip(&dx).map(|(xi, di)| xi + lambda * di).collect();
                        let trial_res: Vec<f64> =
                            self.map(&trial).iter().zip(q).map(|(a, b)| a - b).collect();
                        let trial_err: f64 =
                            trial_res.iter().map(|v| v * v).sum::<f64>().sqrt();
                        if trial_err < err || lambda < 1e-6 {
                            x = trial;
                            residual = trial_res;
                            err = trial_err;
                            break;
                        }
                        lambda *= 0.5;
                    }
                }
                if err <= tol {
                    Ok(x)
                } else {
                    Err(Error::ChartInversionFailed(format!(
                        "Newton residual {err:.3e} above tolerance {tol:.3e}"
                    )))
                }
            }
        }
    }

    fn jacobian_fd(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let n = self.dim();
        let h = 1e-6 * self.validity_radius.max(1e-3);
        let f0 = self.map(x);
        let mut jac = vec![vec![0.0; n]; n];
        for j in 0..n {
            let mut xp = x.to_vec();
            xp[j] += h;
            let fp = self.map(&xp);
            for i in 0..n {
                jac[i][j] = (fp[i] - f0[i]) / h;
            }
        }
        jac
    }
}

/// Classical fixed-step fourth-order integration of the flow of `field`
/// from `start` for time `t`.
pub fn rk4_flow(field: &PolyVectorField, start: &[f64], t: f64, steps: usize) -> Vec<f64> {
    let mut y = start.to_vec();
    let h = t / steps as f64;
    let eval = |y: &[f64]| field.eval_f64(y).expect("dimension checked");
    for _ in 0..steps {
        let k1 = eval(&y);
        let y2: Vec<f64> = y.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
        let k2 = eval(&y2);
        let y3: Vec<f64> = y.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
        let k3 = eval(&y3);
        let y4: Vec<f64> = y.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
        let k4 = eval(&y4);
        for i in 0..y.len() {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

/// Build a chart at `p`, tangent-adapted to `stratum` when given. When the
/// ambient coordinates are already privileged at `p` and the stratum is a
/// coordinate subspace, the chart is the identity translation; otherwise it
/// composes flows of an adapted basis.
pub fn chart_for(
    model: &StructureModel,
    p: &[Rat],
    stratum: Option<&SubmanifoldChart>,
) -> Result<ExpChart> {
    let flag = flags::flag_at(model, p, model.bracket_depth_cap)?;
    let n = model.dim();
    let base_f64: Vec<f64> = p.iter().map(|r| r.to_f64().unwrap()).collect();

    let aligned = match stratum {
        None => None,
        Some(chart) => {
            // The base point must lie on the stratum.
            chart.locate(p).ok().map(|_| chart)
        }
    };
    if stratum.is_some() && aligned.is_none() {
        // Stratum given but not coordinate-aligned through p: fall through
        // to the flows chart, which orders tangent fields first.
        let basis = adapted_basis(model, p, stratum, &[])?;
        return Ok(flows_chart(model, basis, stratum));
    }

    if let Some(orders) = coordinate_orders_if_privileged(model, p, &flag)? {
        let (tangent, transverse): (Vec<usize>, Vec<usize>) = match aligned {
            Some(chart) => {
                let shape = chart.coordinate_aligned().expect("checked aligned");
                let tangent: Vec<usize> = shape.tangent.iter().map(|(a, _)| a - 1).collect();
                let mut transverse: Vec<usize> =
                    (0..n).filter(|i| !tangent.contains(i)).collect();
                transverse.sort_unstable();
                (tangent, transverse)
            }
            None => ((0..n).collect(), Vec::new()),
        };
        let mut perm = tangent.clone();
        perm.extend(transverse.iter().copied());
        let weights: Vec<u32> = perm.iter().map(|&a| orders[a]).collect();
        return Ok(ExpChart {
            base: p.to_vec(),
            base_f64,
            weights,
            tangent_count: tangent.len(),
            kind: ChartKind::AxisAligned { perm },
            validity_radius: 1.0,
            step_div: 256,
        });
    }

    let basis = adapted_basis(model, p, stratum, &[])?;
    Ok(flows_chart(model, basis, stratum))
}

fn flows_chart(
    model: &StructureModel,
    basis: AdaptedBasis,
    stratum: Option<&SubmanifoldChart>,
) -> ExpChart {
    let base = basis.base.clone();
    let base_f64: Vec<f64> = base.iter().map(|r| r.to_f64().unwrap()).collect();
    let weights: Vec<u32> = basis.lengths.iter().map(|&l| l as u32).collect();
    let tangent_count = stratum.map_or(model.dim(), |s| s.k);
    ExpChart {
        base,
        base_f64,
        weights,
        tangent_count,
        kind: ChartKind::Flows { basis },
        validity_radius: 1.0,
        step_div: 256,
    }
}

/// Nonholonomic orders of the centered coordinate functions when they
/// certify the ambient coordinates as privileged at `p`; `None` otherwise.
fn coordinate_orders_if_privileged(
    model: &StructureModel,
    p: &[Rat],
    flag: &flags::FlagReport,
) -> Result<Option<Vec<u32>>> {
    let n = model.dim();
    let w_max = *flag.weights.last().unwrap() as u32;
    let mut orders = Vec::with_capacity(n);
    for i in 0..n {
        let mut h = Polynomial::var(n, i + 1)?;
        if !p[i].is_zero() {
            h = h.sub(&Polynomial::constant(n, p[i].clone()));
        }
        match measure::nonholonomic_order(model, &h, p, w_max as usize)? {
            measure::OrderBound::Exact(s) => orders.push(s),
            measure::OrderBound::AtLeast(_) => return Ok(None),
        }
    }
    // The multiset of coordinate orders must equal the flag weights.
    let mut sorted = orders.clone();
    sorted.sort_unstable();
    let weights: Vec<u32> = flag.weights.iter().map(|&w| w as u32).collect();
    if sorted != weights {
        return Ok(None);
    }
    // Linear adaptedness: span{e_i : ord_i <= s} must equal D^s_p.
    let by_depth = flags::bracket_values_by_depth(model, p, flag.step())?;
    let mut pool: Vec<Vec<Rat>> = Vec::new();
    for (s, level) in by_depth.iter().enumerate() {
        pool.extend(level.iter().cloned());
        let axes: Vec<Vec<Rat>> = (0..n)
            .filter(|&i| orders[i] as usize <= s + 1)
            .map(|i| {
                let mut e = vec![Rat::zero(); n];
                e[i] = crate::algebra::rat(1);
                e
            })
            .collect();
        if axes.len() != flag.growth[s] {
            return Ok(None);
        }
        let mut joined = pool.clone();
        joined.extend(axes);
        if linalg::rank(&joined) != flag.growth[s] {
            return Ok(None);
        }
    }
    Ok(Some(orders))
}

/// Exact pushforward jets of the generating family in chart coordinates,
/// truncated to the weighted-homogeneous degree -1 part. The outputs
/// satisfy exact dilation homogeneity at the coefficient level.
pub fn nilpotent_approx(model: &StructureModel, chart: &ExpChart) -> Result<Vec<PolyVectorField>> {
    let n = model.dim();
    let pushed = pushforward_jets(model, chart)?;
    let mut out = Vec::with_capacity(model.family_size());
    for (fi, comps) in pushed.into_iter().enumerate() {
        let mut truncated = Vec::with_capacity(n);
        for (j, poly) in comps.into_iter().enumerate() {
            let wj = chart.weights[j] as u64;
            if let Some(min) = poly.min_weighted_degree(&chart.weights) {
                if min + 1 < wj {
                    return Err(Error::PrivilegedCertificationFailed(format!(
                        "field {} component {} has weighted order {} in chart coordinates, needs at least {}",
                        fi + 1,
                        j + 1,
                        min as i64 - wj as i64,
                        -1
                    )));
                }
            }
            truncated.push(poly.weighted_part(&chart.weights, wj - 1));
        }
        out.push(PolyVectorField::new(truncated)?);
    }
    Ok(out)
}

/// Pushforward of each family field into chart coordinates as exact
/// polynomial jets (valid through total degree = max chart weight).
fn pushforward_jets(model: &StructureModel, chart: &ExpChart) -> Result<Vec<Vec<Polynomial>>> {
    let n = model.dim();
    match &chart.kind {
        ChartKind::AxisAligned { perm } => {
            // Chart variable j is ambient coordinate perm[j] shifted to the
            // base point: substitute and permute.
            let mut maps = Vec::with_capacity(n); // ambient var a -> polynomial in chart vars
            let mut inv = vec![0usize; n];
            for (j, &a) in perm.iter().enumerate() {
                inv[a] = j;
            }
            for a in 0..n {
                let mut p = Polynomial::var(n, inv[a] + 1)?;
                if !chart.base[a].is_zero() {
                    p = p.add(&Polynomial::constant(n, chart.base[a].clone()));
                }
                maps.push(p);
            }
            let deg_cap = u32::MAX;
            let mut out = Vec::with_capacity(model.family_size());
            for field in model.family() {
                let mut comps = Vec::with_capacity(n);
                for j in 0..n {
                    let a = perm[j];
                    comps.push(field.component(a).compose_truncated(&maps, deg_cap));
                }
                out.push(comps);
            }
            Ok(out)
        }
        ChartKind::Flows { basis } => {
            let deg: u32 = *chart.weights.iter().max().unwrap();
            let phi = chart_map_jet(basis, deg)?;
            // Jacobian of the chart map.
            let mut jac = vec![vec![Polynomial::zero(n); n]; n];
            for (a, comp) in phi.iter().enumerate() {
                for j in 0..n {
                    jac[a][j] = comp.partial(j + 1)?;
                }
            }
            let jac_inv = invert_poly_matrix(&jac, deg)?;
            let mut out = Vec::with_capacity(model.family_size());
            for field in model.family() {
                // X^a evaluated along the chart map.
                let along: Vec<Polynomial> = field
                    .components()
                    .iter()
                    .map(|c| c.compose_truncated(&phi, deg))
                    .collect();
                let mut comps = Vec::with_capacity(n);
                for j in 0..n {
                    let mut acc = Polynomial::zero(n);
                    for a in 0..n {
                        acc = acc.add(&jac_inv[j][a].mul(&along[a]).truncate_total_degree(deg));
                    }
                    comps.push(acc);
                }
                out.push(comps);
            }
            Ok(out)
        }
    }
}

/// Exact polynomial jet of the chart map (composition of basis flows),
/// truncated at total degree `deg` in the chart variables.
fn chart_map_jet(basis: &AdaptedBasis, deg: u32) -> Result<Vec<Polynomial>> {
    let n = basis.base.len();
    // Ambient coordinates as polynomials in the chart variables.
    let mut state: Vec<Polynomial> = basis
        .base
        .iter()
        .map(|c| Polynomial::constant(n, c.clone()))
        .collect();
    for (j, field) in basis.fields.iter().enumerate() {
        state = flow_jet(field, &state, j + 1, deg)?;
    }
    Ok(state)
}

/// Picard iteration for the time-`x_t` flow of `field` starting from the
/// polynomial state, truncated at total degree `deg`.
fn flow_jet(
    field: &PolyVectorField,
    state: &[Polynomial],
    time_var: usize,
    deg: u32,
) -> Result<Vec<Polynomial>> {
    let n = state.len();
    let mut current = state.to_vec();
    for _ in 0..=deg {
        let mut next = Vec::with_capacity(n);
        for j in 0..n {
            let rhs = field.component(j).compose_truncated(&current, deg);
            next.push(state[j].add(&integrate_var(&rhs, time_var)).truncate_total_degree(deg));
        }
        if next == current {
            break;
        }
        current = next;
    }
    Ok(current)
}

/// Antiderivative in variable `v` (1-based) with zero constant term.
fn integrate_var(p: &Polynomial, v: usize) -> Polynomial {
    let mut out = Polynomial::zero(p.nvars());
    for (e, c) in p.terms() {
        let mut exps = e.clone();
        exps[v - 1] += 1;
        let k = exps[v - 1];
        out = out.add(&Polynomial::monomial(
            p.nvars(),
            exps,
            c / crate::algebra::rat(k as i64),
        ));
    }
    out
}

/// Inverse of a polynomial matrix with invertible constant part, as a jet of
/// total degree `deg`.
fn invert_poly_matrix(m: &[Vec<Polynomial>], deg: u32) -> Result<Vec<Vec<Polynomial>>> {
    let n = m.len();
    let nvars = m[0][0].nvars();
    // Constant part and its exact inverse.
    let m0: Vec<Vec<Rat>> = m
        .iter()
        .map(|row| {
            row.iter()
                .map(|p| p.eval_rat(&vec![Rat::zero(); nvars]).unwrap())
                .collect()
        })
        .collect();
    let m0_inv = invert_rat_matrix(&m0).ok_or_else(|| {
        Error::ChartInversionFailed("chart Jacobian singular at the base point".into())
    })?;
    // Higher-order part H = M - M0; inverse = sum_k (-M0inv H)^k M0inv.
    let mut h = vec![vec![Polynomial::zero(nvars); n]; n];
    for i in 0..n {
        for j in 0..n {
            h[i][j] = m[i][j].sub(&Polynomial::constant(nvars, m0[i][j].clone()));
        }
    }
    let m0_inv_poly: Vec<Vec<Polynomial>> = m0_inv
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| Polynomial::constant(nvars, c.clone()))
                .collect()
        })
        .collect();
    let neg_a = {
        // -M0inv * H
        let prod = poly_mat_mul(&m0_inv_poly, &h, deg);
        prod.into_iter()
            .map(|row| row.into_iter().map(|p| p.neg()).collect())
            .collect::<Vec<Vec<Polynomial>>>()
    };
    let mut acc = m0_inv_poly.clone();
    let mut power = m0_inv_poly.clone();
    for _ in 0..deg {
        power = poly_mat_mul(&neg_a, &power, deg);
        if power
            .iter()
            .all(|row| row.iter().all(|p| p.is_zero()))
        {
            break;
        }
        for i in 0..n {
            for j in 0..n {
                acc[i][j] = acc[i][j].add(&power[i][j]);
            }
        }
    }
    Ok(acc)
}

fn poly_mat_mul(a: &[Vec<Polynomial>], b: &[Vec<Polynomial>], deg: u32) -> Vec<Vec<Polynomial>> {
    let n = a.len();
    let nvars = a[0][0].nvars();
    let mut out = vec![vec![Polynomial::zero(nvars); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = Polynomial::zero(nvars);
            for k in 0..n {
                acc = acc.add(&a[i][k].mul(&b[k][j]).truncate_total_degree(deg));
            }
            out[i][j] = acc;
        }
    }
    out
}

fn invert_rat_matrix(m: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut inv: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        crate::algebra::rat(1)
                    } else {
                        Rat::zero()
                    }
                })
                .collect()
        })
        .collect();
    for k in 0..n {
        let pivot = (k..n).find(|&r| !a[r][k].is_zero())?;
        a.swap(k, pivot);
        inv.swap(k, pivot);
        let p = a[k][k].clone();
        for j in 0..n {
            a[k][j] = &a[k][j] / &p;
            inv[k][j] = &inv[k][j] / &p;
        }
        for r in 0..n {
            if r == k || a[r][k].is_zero() {
                continue;
            }
            let f = a[r][k].clone();
            for j in 0..n {
                let av = &a[k][j] * &f;
                a[r][j] = &a[r][j] - av;
                let iv = &inv[k][j] * &f;
                inv[r][j] = &inv[r][j] - iv;
            }
        }
    }
    Some(inv)
}
