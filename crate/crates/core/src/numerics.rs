//! Empirical cross-checks: reachable-set sampling, the uniform Ball-Box
//! check, shell quadrature of 1/nu with divergence-exponent diagnosis, and
//! the nilpotentized ball-volume density estimate.

use num_traits::ToPrimitive;
use rand::Rng;
use serde::Serialize;

use crate::algebra::Polynomial;
use crate::coords::ExpChart;
use crate::error::{Error, Result};
use crate::flags::{self, StructureModel};
use crate::measure::{self, least_squares_slope, RhoReport, TupleFamily};
use crate::sample;

/// Endpoints of admissible trajectories of total duration `eps` with
/// pointwise control norm at most 1, so every endpoint is within
/// sub-Riemannian distance `eps` of the base.
#[derive(Clone, Debug, Serialize)]
pub struct ReachSample {
    pub base: Vec<f64>,
    pub eps: f64,
    pub cloud: Vec<Vec<f64>>,
    /// Per-endpoint piecewise-constant control record (segments x m).
    pub controls: Vec<Vec<Vec<f64>>>,
    pub seed: u64,
}

/// Integrate piecewise-constant controls of total duration `duration`.
pub fn integrate_controls(
    model: &StructureModel,
    start: &[f64],
    controls: &[Vec<f64>],
    duration: f64,
    steps_per_segment: usize,
) -> Result<Vec<f64>> {
    let m = model.family_size();
    for u in controls {
        if u.len() != m {
            return Err(Error::ArityMismatch {
                expected: m,
                got: u.len(),
            });
        }
    }
    if duration == 0.0 || controls.is_empty() {
        return Ok(start.to_vec());
    }
    let seg_time = duration / controls.len() as f64;
    let mut q = start.to_vec();
    for u in controls {
        q = rk4_flow_combination(model, &q, u, seg_time, steps_per_segment);
    }
    Ok(q)
}

/// RK4 for the control-weighted combination of the generating family.
fn rk4_flow_combination(
    model: &StructureModel,
    start: &[f64],
    u: &[f64],
    t: f64,
    steps: usize,
) -> Vec<f64> {
    let eval = |y: &[f64]| -> Vec<f64> {
        let mut v = vec![0.0; model.dim()];
        for (i, field) in model.family().iter().enumerate() {
            if u[i] == 0.0 {
                continue;
            }
            let fv = field.eval_f64(y).expect("dimension checked");
            for (a, b) in v.iter_mut().zip(fv) {
                *a += u[i] * b;
            }
        }
        v
    };
    let mut y = start.to_vec();
    let h = t / steps as f64;
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

pub const REACH_STEPS_PER_SEGMENT: usize = 32;

/// Monte-Carlo surrogate for the sub-Riemannian ball: endpoints of `count`
/// random admissible trajectories at full control speed, with the segment
/// count varied per trajectory (up to `seg`) so straight runs and wiggly
/// paths both appear. The control draws depend only on `(seed, trajectory
/// index)`, not on `eps`.
pub fn reach_ball(
    model: &StructureModel,
    p: &[f64],
    eps: f64,
    count: usize,
    seg: usize,
    seed: u64,
) -> Result<ReachSample> {
    if eps < 0.0 || count == 0 || seg == 0 {
        return Err(Error::MissingInput(
            "reach_ball needs eps >= 0, count >= 1, seg >= 1".into(),
        ));
    }
    let m = model.family_size();
    let mut cloud = Vec::with_capacity(count);
    let mut controls = Vec::with_capacity(count);
    for t in 0..count {
        let mut rng = sample::rng(sample::derived_seed(seed, t as u64));
        let seg_t = (seg >> (t % 4)).max(1);
        let ctrl: Vec<Vec<f64>> = (0..seg_t)
            .map(|_| sample::control_on_unit_sphere(&mut rng, m))
            .collect();
        let endpoint = integrate_controls(model, p, &ctrl, eps, REACH_STEPS_PER_SEGMENT)?;
        cloud.push(endpoint);
        controls.push(ctrl);
    }
    Ok(ReachSample {
        base: p.to_vec(),
        eps,
        cloud,
        controls,
        seed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BallBoxEpsReport {
    pub eps: f64,
    pub c_upper: f64,
    pub c_lower: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BallBoxReport {
    pub per_eps: Vec<BallBoxEpsReport>,
    pub c_upper_spread: f64,
    pub c_lower_spread: f64,
    pub pass: bool,
}

/// Empirical two-sided Ball-Box check at the chart base point: `c_upper`
/// bounds reach endpoints inside the weighted box, `c_lower` probes box
/// corners for reachability by local control search. Passes when both
/// constants are stable within 20 percent across `eps_list`.
pub fn ballbox_check(
    model: &StructureModel,
    chart: &ExpChart,
    eps_list: &[f64],
    count: usize,
    seg: usize,
    seed: u64,
) -> Result<BallBoxReport> {
    if eps_list.is_empty() {
        return Err(Error::MissingInput("eps_list is empty".into()));
    }
    // Flow-chart inversions dominate the cost here; a coarser integrator is
    // plenty for 20-percent stability bands.
    let mut chart = chart.clone();
    chart.step_div = chart.step_div.min(32);
    let base_f64: Vec<f64> = chart.base().iter().map(|r| r.to_f64().unwrap()).collect();
    let dilation = chart.dilation();
    let n = chart.dim();
    let mut per_eps = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let reach = reach_ball(model, &base_f64, eps, count, seg, seed)?;
        let mut cloud_chart = Vec::with_capacity(reach.cloud.len());
        let mut c_upper: f64 = 0.0;
        for endpoint in &reach.cloud {
            let x = chart.inverse(endpoint)?;
            c_upper = c_upper.max(dilation.pseudo_norm(&x) / eps);
            cloud_chart.push(x);
        }

        // Largest corner radius at which all 2^n signed corners are
        // reachable within eps: per corner, walk outward along a radius
        // ladder with a warm-started deterministic control search, then
        // take the worst corner.
        let corners: Vec<Vec<f64>> = (0..(1usize << n))
            .map(|mask| {
                (0..n)
                    .map(|i| if mask & (1 << i) != 0 { 1.0 } else { -1.0 })
                    .collect()
            })
            .collect();
        let r_hi = eps * c_upper.max(0.1);
        let ladder: Vec<f64> = (0..12).map(|j| r_hi * 0.15 * 1.19f64.powi(j)).collect();
        let mut r_star = f64::INFINITY;
        for corner in &corners {
            let r_c = corner_radius(
                model,
                &chart,
                &reach,
                &cloud_chart,
                corner,
                eps,
                &ladder,
                seg,
            );
            r_star = r_star.min(r_c);
        }
        let r_star = r_star.max(1e-9);
        per_eps.push(BallBoxEpsReport {
            eps,
            c_upper,
            c_lower: eps / r_star,
        });
    }
    let spread = |vals: Vec<f64>| -> f64 {
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        vals.iter()
            .map(|v| (v / mean - 1.0).abs())
            .fold(0.0, f64::max)
    };
    let c_upper_spread = spread(per_eps.iter().map(|r| r.c_upper).collect());
    let c_lower_spread = spread(per_eps.iter().map(|r| r.c_lower).collect());
    let pass = c_upper_spread <= 0.2 && c_lower_spread <= 0.2;
    Ok(BallBoxReport {
        per_eps,
        c_upper_spread,
        c_lower_spread,
        pass,
    })
}

/// Resample a piecewise-constant control onto `segments` equal pieces by
/// nearest-index lookup (exact when the counts divide evenly).
fn resample_control(ctrl: &[Vec<f64>], segments: usize) -> Vec<Vec<f64>> {
    if ctrl.len() == segments {
        return ctrl.to_vec();
    }
    (0..segments)
        .map(|j| ctrl[j * ctrl.len() / segments].clone())
        .collect()
}

/// Largest ladder radius at which the corner direction stays reachable
/// within duration `eps`, with the control warm-started from the previous
/// rung. Reachable means within relative pseudo-distance 0.3 of the target
/// after a deterministic pattern search over the control segments.
#[allow(clippy::too_many_arguments)]
fn corner_radius(
    model: &StructureModel,
    chart: &ExpChart,
    reach: &ReachSample,
    cloud_chart: &[Vec<f64>],
    corner: &[f64],
    eps: f64,
    ladder: &[f64],
    full_segments: usize,
) -> f64 {
    let dilation = chart.dilation();
    let m = model.family_size();
    let mut reached = 0.0f64;
    let mut ctrl: Option<Vec<Vec<f64>>> = None;
    let mut guess: Option<Vec<f64>> = None;
    for &r in ladder {
        let target = dilation.dilate(r, corner);
        let tol = 0.3 * r;
        // Warm start: previous rung's control, else the closest cloud
        // point's control resampled to full segment resolution so the
        // search keeps all its degrees of freedom.
        let mut current = match &ctrl {
            Some(c) => c.clone(),
            None => {
                let (mut best_idx, mut best) = (0usize, f64::INFINITY);
                for (i, x) in cloud_chart.iter().enumerate() {
                    let diff: Vec<f64> =
                        x.iter().zip(&target).map(|(a, b)| a - b).collect();
                    let d = dilation.pseudo_norm(&diff);
                    if d < best {
                        best = d;
                        best_idx = i;
                    }
                }
                resample_control(&reach.controls[best_idx], full_segments)
            }
        };
        let eval = |c: &[Vec<f64>], guess: Option<&[f64]>| -> (f64, Option<Vec<f64>>) {
            let Ok(endpoint) =
                integrate_controls(model, &reach.base, c, eps, REACH_STEPS_PER_SEGMENT)
            else {
                return (f64::INFINITY, None);
            };
            let Ok(x) = chart.inverse_with_guess(&endpoint, guess) else {
                return (f64::INFINITY, None);
            };
            let diff: Vec<f64> = x.iter().zip(&target).map(|(a, b)| a - b).collect();
            (dilation.pseudo_norm(&diff), Some(x))
        };
        let (mut best, mut best_x) = eval(&current, guess.as_deref());
        let mut step = 0.4f64;
        'sweeps: for _ in 0..14 {
            if best <= tol {
                break;
            }
            let mut improved = false;
            for s_idx in 0..current.len() {
                for comp in 0..m {
                    for delta in [step, -step] {
                        let mut trial = current.clone();
                        trial[s_idx][comp] += delta;
                        let norm2: f64 = trial[s_idx].iter().map(|v| v * v).sum();
                        if norm2 > 1.0 {
                            let scale = norm2.sqrt();
                            for v in trial[s_idx].iter_mut() {
                                *v /= scale;
                            }
                        }
                        let (d, x) = eval(&trial, best_x.as_deref());
                        if d < best {
                            best = d;
                            best_x = x;
                            current = trial;
                            improved = true;
                            if best <= tol {
                                break 'sweeps;
                            }
                        }
                    }
                }
            }
            if !improved {
                step *= 0.5;
                if step < 1e-3 {
                    break;
                }
            }
        }
        if best <= tol {
            reached = r;
            ctrl = Some(current);
            guess = best_x;
        } else {
            if std::env::var("CARNOT_DEBUG_CORNERS").is_ok() {
                eprintln!(
                    "corner {corner:?} failed at r={r:.5} (eps={eps}): best {best:.5} > tol {tol:.5}"
                );
            }
            break;
        }
    }
    reached
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum QuadVerdict {
    Converges,
    Diverges,
    Unclear,
}

/// Fitted-exponent bands for the shell integrals. The gap between the
/// divergence and convergence thresholds keeps Monte-Carlo noise from
/// flipping a verdict.
pub const QUAD_DIVERGES_BELOW: f64 = -1.0 + 0.1;
pub const QUAD_CONVERGES_ABOVE: f64 = -1.0 + 0.3;

/// Shell-integral diagnosis of the local integrability of 1/nu transverse
/// to a stratum.
#[derive(Clone, Debug, Serialize)]
pub struct QuadDiagnosis {
    /// Pairs (lambda, I(lambda)), lambda strictly decreasing.
    pub shells: Vec<(f64, f64)>,
    /// Fitted total exponent of I(lambda).
    pub alpha: f64,
    pub sigma: f64,
    pub verdict: QuadVerdict,
    /// Q(p) - Q_N - 1 - rho_min, when an exponent report is available.
    pub predicted_exponent: Option<f64>,
    pub dropped_samples: usize,
    pub seed: u64,
}

/// Monte-Carlo shell integrals `I(lambda) = lambda^(Q(p)-Q_N-1) *
/// mean 1/nu(Phi(y, delta_lambda z))` over a fixed seeded sample of
/// (y, z) pairs, with a log-log exponent fit.
#[allow(clippy::too_many_arguments)]
pub fn quad_diagnose(
    model: &StructureModel,
    family: &TupleFamily,
    chart: &ExpChart,
    q_n: u64,
    rho: Option<&RhoReport>,
    shells: usize,
    samples_per_shell: usize,
    seed: u64,
) -> Result<QuadDiagnosis> {
    if shells < 5 {
        return Err(Error::MissingInput("need at least 5 shells".into()));
    }
    let flag = flags::flag_at(model, chart.base(), model.bracket_depth_cap)?;
    let exponent = flag.q as i64 - q_n as i64 - 1;
    let k = chart.tangent_count;
    let nz = chart.dim() - k;
    if nz == 0 {
        return Err(Error::MissingInput(
            "chart has no transverse coordinates".into(),
        ));
    }
    let tangent_dim = chart.tangent_dilation();
    let transverse_dim = chart.transverse_dilation();

    // One fixed sample of (y, z) reused across shells: shell ratios are
    // then smooth in lambda and the fit is insensitive to sampling noise.
    let mut rng = sample::rng(seed);
    let mut pairs = Vec::with_capacity(samples_per_shell);
    for _ in 0..samples_per_shell {
        let y_unit = sample::f64_point_in_box(&mut rng, &vec![1.0; k]);
        let y = tangent_dim.dilate(0.5, &y_unit);
        let mut z;
        loop {
            z = sample::f64_point_in_box(&mut rng, &vec![1.0; nz]);
            if z.iter().any(|v| v.abs() > 1e-6) {
                break;
            }
        }
        pairs.push((y, transverse_dim.normalize(&z)));
    }

    let lambdas: Vec<f64> = (0..shells).map(|j| 0.3 * 0.6f64.powi(j as i32)).collect();
    let mut shell_values = Vec::with_capacity(shells);
    let mut dropped = 0usize;
    for &lambda in &lambdas {
        let mut acc = 0.0;
        let mut used = 0usize;
        for (y, z) in &pairs {
            let dz = transverse_dim.dilate(lambda, z);
            let mut x = y.clone();
            x.extend(dz);
            let q = chart.map(&x);
            let v = measure::nu(family, &q)?;
            if v > 1e-250 {
                acc += 1.0 / v;
                used += 1;
            } else {
                dropped += 1;
            }
        }
        if used == 0 {
            return Err(Error::DegenerateFit(
                "nu vanished at every sample of a shell".into(),
            ));
        }
        let mean = acc / used as f64;
        shell_values.push((lambda, lambda.powi(exponent as i32) * mean));
    }
    let logs: Vec<(f64, f64)> = shell_values
        .iter()
        .map(|&(l, v)| (l.ln(), v.ln()))
        .collect();
    let (alpha, sigma, _r2) = least_squares_slope(&logs);
    let verdict = if alpha <= QUAD_DIVERGES_BELOW {
        QuadVerdict::Diverges
    } else if alpha >= QUAD_CONVERGES_ABOVE {
        QuadVerdict::Converges
    } else {
        QuadVerdict::Unclear
    };
    let predicted = rho.and_then(|r| {
        r.rho_min
            .exact()
            .map(|v| (r.q_p as i64 - r.q_n as i64 - 1 - v as i64) as f64)
    });
    Ok(QuadDiagnosis {
        shells: shell_values,
        alpha,
        sigma,
        verdict,
        predicted_exponent: predicted,
        dropped_samples: dropped,
        seed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityEstimate {
    /// Estimate of 2^Q / mu_hat(unit nilpotent ball).
    pub estimate: f64,
    /// Bootstrap percentile interval.
    pub ci: (f64, f64),
    pub ball_volume: f64,
    pub mu_hat: f64,
    pub q: u64,
    pub seed: u64,
}

/// Indicator Monte-Carlo volume of the region covered by a point cloud:
/// uniform draws over the cloud's bounding box count as inside when within
/// pseudo-distance `bandwidth` of some cloud point. Exactly homogeneous
/// under weighted dilation of cloud and bandwidth together.
pub fn cloud_volume(
    cloud: &[Vec<f64>],
    dilation: &crate::coords::Dilation,
    bandwidth: f64,
    draws: usize,
    seed: u64,
) -> (f64, Vec<f64>) {
    let n = dilation.weights.len();
    let mut half = vec![1e-6f64; n];
    for pt in cloud {
        for i in 0..n {
            half[i] = half[i].max(pt[i].abs() * 1.05);
        }
    }
    let box_volume: f64 = half.iter().map(|h| 2.0 * h).product();
    let mut rng = sample::rng(seed);
    let mut hits: Vec<f64> = Vec::with_capacity(draws);
    for _ in 0..draws {
        let x = sample::f64_point_in_box(&mut rng, &half);
        let inside = cloud.iter().any(|pt| {
            let diff: Vec<f64> = x.iter().zip(pt).map(|(a, b)| a - b).collect();
            dilation.pseudo_norm(&diff) <= bandwidth
        });
        hits.push(if inside { 1.0 } else { 0.0 });
    }
    let fraction = hits.iter().sum::<f64>() / draws as f64;
    (box_volume * fraction, hits)
}

/// Estimate the blown-up-volume normalization `2^Q / mu_hat(B_hat)` at the
/// chart base point. The unit ball of the nilpotent approximation is
/// sampled by admissible trajectories; its volume is measured by indicator
/// Monte-Carlo over a bounding box with a pseudo-distance kernel threshold.
pub fn density_estimate(
    model: &StructureModel,
    chart: &ExpChart,
    mc_count: usize,
    seed: u64,
) -> Result<DensityEstimate> {
    let n = model.dim();
    let nilp = crate::coords::nilpotent_approx(model, chart)?;
    let nilp_model = StructureModel::new(
        n,
        nilp,
        Polynomial::one(n),
        vec![],
        vec![],
        Some(model.bracket_depth_cap),
        None,
    )?;
    let flag = flags::flag_at(model, chart.base(), model.bracket_depth_cap)?;
    let origin = vec![0.0; n];
    let reach = reach_ball(&nilp_model, &origin, 1.0, mc_count.max(64), 8, seed)?;

    let draws = mc_count.max(64);
    let (ball_volume, hits) = cloud_volume(
        &reach.cloud,
        &chart.dilation(),
        0.2,
        draws,
        sample::derived_seed(seed, 0xD3A1),
    );
    let fraction = hits.iter().sum::<f64>() / draws as f64;
    let box_volume = if fraction > 0.0 { ball_volume / fraction } else { 0.0 };
    let density_at_base = model
        .volume_density()
        .eval_rat(chart.base())?
        .to_f64()
        .unwrap_or(f64::NAN)
        .abs();
    let mu_hat = density_at_base * ball_volume;
    if !(mu_hat > 0.0) {
        return Err(Error::DegenerateFit(
            "estimated nilpotent ball volume is zero".into(),
        ));
    }
    let two_q = 2f64.powi(flag.q as i32);
    let estimate = two_q / mu_hat;

    // Bootstrap on the indicator draws.
    let mut boot = Vec::with_capacity(200);
    let mut brng = sample::rng(sample::derived_seed(seed, 0xB007));
    for _ in 0..200 {
        let mut s = 0.0;
        for _ in 0..draws {
            s += hits[brng.gen_range(0..draws)];
        }
        let frac = s / draws as f64;
        let vol = (box_volume * frac * density_at_base).max(1e-300);
        boot.push(two_q / vol);
    }
    boot.sort_by(f64::total_cmp);
    let ci = (boot[(0.025 * 200.0) as usize], boot[(0.975 * 200.0) as usize]);
    Ok(DensityEstimate {
        estimate,
        ci,
        ball_volume,
        mu_hat,
        q: flag.q,
        seed,
    })
}
