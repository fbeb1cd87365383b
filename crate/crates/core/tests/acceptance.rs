//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line with its elapsed time and asserting the stated tolerances.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::Instant;

use num_traits::{Signed, ToPrimitive, Zero};

use carnot_core::algebra::{rat, PolyVectorField, Polynomial, Rat};
use carnot_core::cli::builtin::{builtin, run_examples_suite, BUILTIN_NAMES};
use carnot_core::cli::{run, Command, RunOptions};
use carnot_core::coords;
use carnot_core::flags::{self, Classification, SampleSpec};
use carnot_core::measure::{self, Homogeneity, OrderBound, RhoMax, RhoOptions};
use carnot_core::numerics::{self, QuadVerdict};
use carnot_core::sample;
use carnot_core::strata;
use carnot_core::verdict::{self, Conclusion, Criterion};

const SEED: u64 = 42;

struct Stopwatch {
    label: &'static str,
    budget_s: f64,
    start: Instant,
}

impl Stopwatch {
    fn new(label: &'static str, budget_s: f64) -> Self {
        Stopwatch {
            label,
            budget_s,
            start: Instant::now(),
        }
    }

    fn finish(self, summary: &str) {
        let elapsed = self.start.elapsed().as_secs_f64();
        println!("[{}] PASS ({elapsed:.2} s): {summary}", self.label);
        assert!(
            elapsed < self.budget_s,
            "{} exceeded its {} s budget: {elapsed:.2} s",
            self.label,
            self.budget_s
        );
    }
}

fn origin(n: usize) -> Vec<Rat> {
    vec![rat(0); n]
}

fn spec() -> SampleSpec {
    SampleSpec {
        seed: SEED,
        ..SampleSpec::default()
    }
}

fn rho_opts() -> RhoOptions {
    RhoOptions {
        seed: SEED,
        ..Default::default()
    }
}

#[test]
fn criterion_01_martinet_regression() {
    let sw = Stopwatch::new("criterion 1", 5.0);
    let model = builtin("martinet", 2).unwrap();

    let reg = flags::classify_point(&model, &[rat(1), rat(0), rat(0)], 8, &rat(1), 8, SEED)
        .unwrap();
    assert_eq!(reg.growth, vec![2, 3]);
    assert_eq!(reg.q, 4);
    assert_eq!(reg.classification, Classification::Regular);

    let sing = flags::classify_point(&model, &origin(3), 8, &rat(1), 8, SEED).unwrap();
    assert_eq!(sing.growth, vec![2, 2, 3]);
    assert_eq!(sing.q, 5);
    assert_eq!(sing.classification, Classification::Singular);

    let summary = strata::stratum_dimension_summary(&model, &spec(), 4).unwrap();
    assert_eq!(summary.q_reg, 4);
    assert_eq!(summary.strata[0].q_n, 4);
    assert_eq!(summary.dim_h, 4);

    // nu_bar equals |x1| exactly on 50 seeded rational points.
    let family = measure::enumerate_family(&model, 4).unwrap();
    let mut rng = sample::rng(SEED);
    for _ in 0..50 {
        let q = sample::rat_point_in_box(&mut rng, &origin(3), &rat(2));
        let got = measure::nu_bar_exact(&family, &q).unwrap();
        assert_eq!(got, q[0].abs());
    }

    let chart = model.stratum("S").unwrap().clone();
    let rho = measure::rho_report(&model, &family, &origin(3), &chart, 4, 4, &rho_opts())
        .unwrap();
    assert_eq!(rho.rho_min, OrderBound::Exact(1));
    assert!(matches!(rho.homogeneity, Homogeneity::Yes { two_rho: 2 }));
    assert!(matches!(rho.rho_max, RhoMax::ExactHomogeneous { two_rho: 2 }));

    let v = verdict::point_verdict(&rho);
    assert_eq!(v.conclusion, Conclusion::NotIntegrable);
    assert!(v.exact);
    assert!(v.satisfied.contains(&Criterion::OrderLowerBound));

    let d = verdict::decomposition_report(&model, &Default::default()).unwrap();
    assert_eq!(d.regular_part, Conclusion::NotRadon);
    assert!(d.regular_part_criteria.contains(&Criterion::OrderLowerBound) == false);
    assert!(d.regular_part_criteria.contains(&Criterion::CodimensionOne));
    assert!(d
        .regular_part_criteria
        .contains(&Criterion::DimensionComparison));

    sw.finish("growth (2,3)/(2,2,3), Q_S=4, dim_H=4, nu_bar=|x1| on 50 points, rho_min=rho_max=1, NotIntegrable");
}

#[test]
fn criterion_02_r3_almost_riemannian() {
    let sw = Stopwatch::new("criterion 2", 10.0);
    let model = builtin("ar3", 2).unwrap();

    let qr = flags::q_reg(&model, &spec()).unwrap();
    assert_eq!(qr.q_reg, 3);
    let sing = flags::flag_at(&model, &origin(3), 8).unwrap();
    assert_eq!(sing.q, 5);

    let chart = model.stratum("S").unwrap().clone();
    let sr = strata::equisingular_check(&model, &chart, 4, SEED).unwrap();
    assert_eq!(sr.q_n, 3);

    let family = measure::enumerate_family(&model, 3).unwrap();
    assert_eq!(family.len(), 1);
    let target = Polynomial::parse("x1^2 + x2^2", 3, None).unwrap();
    let ratio = family.dets[0].poly.constant_ratio(&target).unwrap();
    assert!(ratio > rat(0), "nu must be a positive multiple of x1^2 + x2^2");

    let rho = measure::rho_report(&model, &family, &origin(3), &chart, 3, 3, &rho_opts())
        .unwrap();
    assert!(matches!(rho.homogeneity, Homogeneity::Yes { two_rho: 4 }));
    assert_eq!(rho.threshold, 2);
    let v = verdict::point_verdict(&rho);
    assert_eq!(v.conclusion, Conclusion::NotIntegrable);
    assert!(v.exact);

    sw.finish("Q_R=3, Q(0)=5, Q_S=3, nu = c(x1^2+x2^2), homogeneous rho=2=threshold, NotIntegrable");
}

#[test]
fn criterion_03_r4_almost_riemannian() {
    let sw = Stopwatch::new("criterion 3", 60.0);
    let model = builtin("ar4", 2).unwrap();

    let sing = flags::flag_at(&model, &origin(4), 8).unwrap();
    assert_eq!(sing.q, 6);
    let chart = model.stratum("S").unwrap().clone();
    let sr = strata::equisingular_check(&model, &chart, 4, SEED).unwrap();
    assert_eq!(sr.q_n, 3);

    let family = measure::enumerate_family(&model, 4).unwrap();
    let rho = measure::rho_report(&model, &family, &origin(4), &chart, 3, 4, &rho_opts())
        .unwrap();
    assert!(matches!(rho.homogeneity, Homogeneity::Yes { two_rho: 4 }));
    assert_eq!(rho.threshold, 3);
    let v = verdict::point_verdict(&rho);
    assert_eq!(v.conclusion, Conclusion::Integrable);
    assert!(v.exact);

    let exp_chart = coords::chart_for(&model, &origin(4), Some(&chart)).unwrap();
    let diag =
        numerics::quad_diagnose(&model, &family, &exp_chart, 3, Some(&rho), 8, 2000, SEED)
            .unwrap();
    assert_eq!(diag.verdict, QuadVerdict::Converges);
    assert!(
        diag.alpha.abs() <= 0.15,
        "fitted exponent {} outside 0.0 +/- 0.15",
        diag.alpha
    );
    assert_eq!(diag.predicted_exponent, Some(0.0));

    // Shell sums stable within 5 percent under sample doubling.
    let doubled =
        numerics::quad_diagnose(&model, &family, &exp_chart, 3, Some(&rho), 8, 4000, SEED)
            .unwrap();
    for ((_, a), (_, b)) in diag.shells.iter().zip(&doubled.shells) {
        let rel = (a - b).abs() / a.abs().max(1e-300);
        assert!(rel <= 0.05, "shell drift {rel} above 5 percent");
    }

    sw.finish("Q(0)=6, Q_S=3, homogeneous rho=2<3, Integrable; quad exponent 0.0 +/- 0.15, shells stable");
}

#[test]
fn criterion_04_r5_family() {
    let sw = Stopwatch::new("criterion 4", 30.0);
    let mut notes = Vec::new();
    for k in 1..=4u32 {
        let model = builtin("r5", k).unwrap();
        let family = measure::enumerate_family(&model, 7).unwrap();
        if k >= 2 {
            assert_eq!(family.len(), 2, "k={k}");
        } else {
            // The two candidate brackets coincide as fields at k=1, so the
            // pruned family carries a single constant determinant.
            assert_eq!(family.len(), 1, "k=1");
            notes.push("k=1 collapses to 1 determinant (duplicate-field pruning)");
        }
        let chart = model.stratum("S").unwrap().clone();
        let sr = strata::equisingular_check(&model, &chart, 4, SEED).unwrap();
        let rho = measure::rho_report(
            &model,
            &family,
            &origin(5),
            &chart,
            sr.q_n,
            7,
            &rho_opts(),
        )
        .unwrap();
        assert_eq!(rho.rho_min, OrderBound::Exact(k - 1), "k={k}");
        let v = verdict::point_verdict(&rho);
        let expected = if k <= 2 {
            Conclusion::Integrable
        } else {
            Conclusion::NotIntegrable
        };
        assert_eq!(v.conclusion, expected, "k={k}");
        assert!(v.exact);
    }
    sw.finish(&format!(
        "k=1..4: |F|=2 for k>=2, rho_min=k-1 exact, Integrable iff k<=2 ({})",
        notes.first().unwrap_or(&"")
    ));
}

#[test]
fn criterion_05_order_gap_example() {
    let sw = Stopwatch::new("criterion 5", 120.0);
    let model = builtin("ordergap", 2).unwrap();

    let family = measure::enumerate_family(&model, 7).unwrap();
    assert_eq!(family.len(), 2);
    let dets: Vec<String> = family.dets.iter().map(|d| d.poly.to_string()).collect();
    assert!(dets.contains(&"2 x3^2".to_string()), "{dets:?}");
    // Exact bracket arithmetic for the second determinant (the reference
    // display carries a slip; symbolic differentiation gives this value,
    // sign-normalized).
    assert!(dets.contains(&"2 x2 - 2 x1^2 x3".to_string()), "{dets:?}");

    let chart = model.stratum("S").unwrap().clone();
    let sr = strata::equisingular_check(&model, &chart, 4, SEED).unwrap();
    assert_eq!(sr.q_n, 5);
    let rho = measure::rho_report(&model, &family, &origin(4), &chart, 5, 7, &rho_opts())
        .unwrap();
    assert_eq!(rho.rho_min, OrderBound::Exact(1));
    assert_eq!(rho.homogeneity, Homogeneity::No);
    let RhoMax::Estimated(est) = &rho.rho_max else {
        panic!("expected an estimated rho_max");
    };
    assert!(
        (est.sup_slope - 4.0).abs() <= 0.3,
        "rho_max estimate {} outside 4.0 +/- 0.3",
        est.sup_slope
    );

    let v = verdict::point_verdict(&rho);
    assert_eq!(v.conclusion, Conclusion::Inconclusive);

    let exp_chart = coords::chart_for(&model, &origin(4), Some(&chart)).unwrap();
    let diag =
        numerics::quad_diagnose(&model, &family, &exp_chart, 5, Some(&rho), 8, 2000, SEED)
            .unwrap();
    assert_eq!(diag.verdict, QuadVerdict::Converges);

    sw.finish(&format!(
        "determinants 2x3^2 and 2x2-2x1^2x3, rho_min=1, rho_max {:.2}, Inconclusive, quad Converges",
        est.sup_slope
    ));
}

#[test]
fn criterion_06_grushin() {
    let sw = Stopwatch::new("criterion 6", 5.0);
    let model = builtin("grushin", 2).unwrap();

    let sing = flags::classify_point(&model, &[rat(0), rat(0)], 4, &rat(1), 8, SEED).unwrap();
    assert_eq!(sing.classification, Classification::Singular);

    let summary = strata::stratum_dimension_summary(&model, &spec(), 4).unwrap();
    assert_eq!(summary.q_reg, 2);
    assert_eq!(summary.strata[0].q_n, 2);

    let d = verdict::decomposition_report(&model, &Default::default()).unwrap();
    assert_eq!(d.regular_part, Conclusion::NotRadon);
    assert!(d
        .regular_part_criteria
        .contains(&Criterion::DimensionComparison));

    sw.finish("singular set on {x=0}, Q_R=Q_S=2, NotRadon via dimension comparison");
}

#[test]
fn criterion_07_generic_free_lie() {
    let sw = Stopwatch::new("criterion 7", 1.0);

    // Independent oracle: Lyndon-word count by brute force.
    fn lyndon_count(m: usize, len: usize) -> u64 {
        fn is_lyndon(w: &[usize]) -> bool {
            for r in 1..w.len() {
                let rotated: Vec<usize> = w[r..].iter().chain(w[..r].iter()).copied().collect();
                if rotated.as_slice() <= w {
                    return false;
                }
            }
            true
        }
        let total = (m as u64).pow(len as u32);
        (0..total)
            .filter(|&code| {
                let mut w = Vec::with_capacity(len);
                let mut c = code;
                for _ in 0..len {
                    w.push((c % m as u64) as usize);
                    c /= m as u64;
                }
                is_lyndon(&w)
            })
            .count() as u64
    }
    let mut oracle_cumulative = 0;
    let expected = [2u64, 3, 5, 8];
    for s in 1..=4usize {
        oracle_cumulative += lyndon_count(2, s);
        assert_eq!(flags::free_lie_dims(2, s), oracle_cumulative);
        assert_eq!(flags::free_lie_dims(2, s), expected[s - 1]);
    }

    let g = verdict::generic_verdict(3, 2).unwrap();
    assert_eq!(g.conclusion, Conclusion::NotIntegrable);
    let g = verdict::generic_verdict(4, 2).unwrap();
    assert_eq!(g.conclusion, Conclusion::Integrable);
    assert_eq!(g.min_codim, 2);

    sw.finish("free Lie dims (2,3,5,8) vs brute force; (3,2) NotIntegrable, (4,2) Integrable codim 2");
}

fn random_polynomial(rng: &mut rand_chacha::ChaCha8Rng, n: usize, max_deg: u32) -> Polynomial {
    use rand::Rng;
    let mut p = Polynomial::zero(n);
    let terms = rng.gen_range(1..=4usize);
    for _ in 0..terms {
        let mut exps = vec![0u32; n];
        let mut degree_left = max_deg;
        for e in exps.iter_mut() {
            let d = rng.gen_range(0..=degree_left);
            *e = d;
            degree_left -= d;
        }
        let num = rng.gen_range(-9i64..=9);
        let den = rng.gen_range(1i64..=4);
        if num != 0 {
            p = p.add(&Polynomial::monomial(
                n,
                exps,
                Rat::new(num.into(), den.into()),
            ));
        }
    }
    p
}

fn random_field(rng: &mut rand_chacha::ChaCha8Rng, n: usize, max_deg: u32) -> PolyVectorField {
    PolyVectorField::new((0..n).map(|_| random_polynomial(rng, n, max_deg)).collect()).unwrap()
}

#[test]
fn criterion_08_property_suites() {
    let sw = Stopwatch::new("criterion 8", 60.0);

    // Exact algebra identities on 200 seeded random fields of degree <= 3
    // in dimension <= 4.
    let mut rng = sample::rng(SEED);
    let mut fields: Vec<PolyVectorField> = Vec::with_capacity(200);
    for i in 0..200usize {
        let n = 2 + (i % 3); // 2, 3, 4
        fields.push(random_field(&mut rng, n, 3));
    }
    for w in fields.windows(2) {
        if w[0].dim() != w[1].dim() {
            continue;
        }
        let ab = w[0].lie_bracket(&w[1]).unwrap();
        let ba = w[1].lie_bracket(&w[0]).unwrap();
        assert_eq!(ab, ba.neg(), "antisymmetry");
    }
    for w in fields.windows(3) {
        if w[0].dim() != w[1].dim() || w[1].dim() != w[2].dim() {
            continue;
        }
        let (x, y, z) = (&w[0], &w[1], &w[2]);
        let j = x
            .lie_bracket(&y.lie_bracket(z).unwrap())
            .unwrap()
            .add(&y.lie_bracket(&z.lie_bracket(x).unwrap()).unwrap())
            .add(&z.lie_bracket(&x.lie_bracket(y).unwrap()).unwrap());
        assert!(j.is_zero(), "Jacobi identity");
    }
    for i in 0..200usize {
        let n = 2 + (i % 3);
        let x = random_field(&mut rng, n, 3);
        let p = random_polynomial(&mut rng, n, 3);
        let q = random_polynomial(&mut rng, n, 3);
        let lhs = x.apply(&p.mul(&q)).unwrap();
        let rhs = p.mul(&x.apply(&q).unwrap()).add(&q.mul(&x.apply(&p).unwrap()));
        assert_eq!(lhs, rhs, "Leibniz rule");
    }

    // nu_bar <= nu <= sqrt(|F|) nu_bar on 500 points per example.
    for name in BUILTIN_NAMES {
        let model = builtin(name, 3).unwrap();
        let qr = flags::q_reg(&model, &spec()).unwrap();
        let family = measure::enumerate_family(&model, qr.q_reg).unwrap();
        let sqrt_f = (family.len() as f64).sqrt();
        let mut rng = sample::rng(sample::derived_seed(SEED, 17));
        for _ in 0..500 {
            let q = sample::f64_point_in_box(&mut rng, &vec![1.5; model.dim()]);
            let v = measure::nu(&family, &q).unwrap();
            let vb = measure::nu_bar(&family, &q).unwrap();
            assert!(vb <= v * (1.0 + 1e-12) + 1e-300);
            assert!(v <= sqrt_f * vb * (1.0 + 1e-12) + 1e-300);
        }
        // nu vanishes identically on genuinely singular declared strata.
        if let Some(chart) = model.strata.first() {
            let base = chart.point_at(&chart.domain_center()).unwrap();
            let base_flag = flags::classify_point(
                &model,
                &base,
                model.bracket_depth_cap,
                &rat(1),
                6,
                SEED,
            )
            .unwrap();
            if base_flag.classification == Classification::Singular {
                for u in chart.sample_params(&chart.domain_center(), &rat(1), 20, SEED) {
                    let q = chart.point_at(&u).unwrap();
                    assert!(measure::nu_sq_exact(&family, &q).unwrap().is_zero());
                }
            }
        }
    }

    // Order inequalities on every example (p, N).
    for name in ["grushin", "martinet", "ar3", "ar4", "ordergap"] {
        check_order_inequalities(name, 2);
    }
    for k in 1..=4 {
        check_order_inequalities("r5", k);
    }

    // Chart round trips to 1e-9 on 100 seeded points (flows chart).
    let martinet = builtin("martinet", 2).unwrap();
    let chart = coords::chart_for(&martinet, &[rat(1), rat(0), rat(0)], None).unwrap();
    assert!(!chart.is_axis_aligned());
    let mut rng = sample::rng(sample::derived_seed(SEED, 23));
    for _ in 0..100 {
        let x = sample::f64_point_in_box(&mut rng, &[0.5, 0.5, 0.5]);
        let back = chart.inverse(&chart.map(&x)).unwrap();
        let err: f64 = x
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(err <= 1e-9, "round trip error {err}");
    }

    // Nilpotent approximations are exactly homogeneous at the coefficient
    // level for every built-in example.
    for name in BUILTIN_NAMES {
        let model = builtin(name, 2).unwrap();
        let p = origin(model.dim());
        let stratum = model.strata.first().cloned();
        let chart = coords::chart_for(&model, &p, stratum.as_ref()).unwrap();
        let nilp = coords::nilpotent_approx(&model, &chart).unwrap();
        for f in &nilp {
            for (j, comp) in f.components().iter().enumerate() {
                for (exps, _) in comp.terms() {
                    let deg: u64 = exps
                        .iter()
                        .zip(&chart.weights)
                        .map(|(&a, &w)| a as u64 * w as u64)
                        .sum();
                    assert_eq!(deg, chart.weights[j] as u64 - 1, "{name}");
                }
            }
        }
    }

    sw.finish("algebra identities (200 fields), nu sandwich (500 pts x 7 models), order bounds, chart round trips, homogeneity");
}

fn check_order_inequalities(name: &str, k: u32) {
    let model = builtin(name, k).unwrap();
    let qr = flags::q_reg(&model, &spec()).unwrap();
    let family = measure::enumerate_family(&model, qr.q_reg).unwrap();
    let chart = model.stratum("S").unwrap().clone();
    let sr = strata::equisingular_check(&model, &chart, 4, SEED).unwrap();
    let p = origin(model.dim());
    let rho = measure::rho_report(&model, &family, &p, &chart, sr.q_n, qr.q_reg, &rho_opts())
        .unwrap();
    // e_min <= rho_min.
    match (rho.e_min, rho.rho_min) {
        (OrderBound::Exact(e), OrderBound::Exact(r)) => assert!(e <= r, "{name} k={k}"),
        (OrderBound::Exact(_), OrderBound::AtLeast(_)) => {}
        other => panic!("unexpected orders {other:?}"),
    }
    // rho_min >= Q(p) - Q_R.
    assert!(
        rho.rho_min.at_least(rho.q_p as i64 - rho.q_r as i64),
        "{name} k={k}: rho_min {:?} below Q(p)-Q_R = {}",
        rho.rho_min,
        rho.q_p as i64 - rho.q_r as i64
    );
    // When homogeneous, the exact rho agrees with a fresh estimate within
    // 0.05.
    if let Homogeneity::Yes { two_rho } = rho.homogeneity {
        let exp_chart = coords::chart_for(&model, &p, Some(&chart)).unwrap();
        let est = measure::rho_max_estimate(
            &model,
            &family,
            &exp_chart,
            &measure::LambdaGrid::default(),
            4,
            6,
            0.5,
            SEED,
        )
        .unwrap();
        assert!(
            (est.sup_slope - two_rho as f64 / 2.0).abs() <= 0.05,
            "{name} k={k}: estimate {} vs exact {}",
            est.sup_slope,
            two_rho as f64 / 2.0
        );
    }
}

#[test]
fn criterion_09_ballbox_stability() {
    let sw = Stopwatch::new("criterion 9", 120.0);
    let eps = [0.5, 0.25, 0.125];
    let mut summaries = Vec::new();

    let configs: [(&str, Vec<Rat>); 3] = [
        ("heisenberg", origin(3)),
        ("martinet", vec![rat(1), rat(0), rat(0)]),
        ("martinet", origin(3)),
    ];
    for (name, p) in configs {
        let model = builtin(name, 2).unwrap();
        let chart = coords::chart_for(&model, &p, None).unwrap();
        let report = numerics::ballbox_check(&model, &chart, &eps, 2000, 8, SEED).unwrap();
        assert!(
            report.pass,
            "{name} at {p:?}: spreads {:.3}/{:.3}",
            report.c_upper_spread,
            report.c_lower_spread
        );
        summaries.push(format!(
            "{name}@{:?}: C+ {:.2} C- {:.2}",
            p.iter().map(|r| r.to_f64().unwrap()).collect::<Vec<_>>(),
            report.per_eps[0].c_upper,
            report.per_eps[0].c_lower
        ));
    }
    sw.finish(&summaries.join("; "));
}

#[test]
fn criterion_10_martinet_divergence() {
    let sw = Stopwatch::new("criterion 10", 60.0);
    let model = builtin("martinet", 2).unwrap();
    let family = measure::enumerate_family(&model, 4).unwrap();
    let chart_def = model.stratum("S").unwrap().clone();
    let rho = measure::rho_report(&model, &family, &origin(3), &chart_def, 4, 4, &rho_opts())
        .unwrap();
    let chart = coords::chart_for(&model, &origin(3), Some(&chart_def)).unwrap();
    let diag =
        numerics::quad_diagnose(&model, &family, &chart, 4, Some(&rho), 8, 2000, SEED).unwrap();
    assert_eq!(diag.verdict, QuadVerdict::Diverges);
    assert!(
        (diag.alpha + 1.0).abs() <= 0.15,
        "fitted exponent {} outside -1.0 +/- 0.15",
        diag.alpha
    );
    assert_eq!(diag.predicted_exponent, Some(-1.0));
    sw.finish(&format!(
        "fitted exponent {:.3}, Diverges, predicted -1",
        diag.alpha
    ));
}

#[test]
fn criterion_11_determinism() {
    let sw = Stopwatch::new("criterion 11", 120.0);
    let small = RunOptions {
        point: Some("origin".into()),
        stratum: Some("S".into()),
        samples: 300,
        shells: 6,
        eps_list: vec![0.4, 0.2],
        ..Default::default()
    };
    let cases: Vec<(Command, &str, RunOptions)> = vec![
        (Command::Flags, "martinet", small.clone()),
        (Command::Strata, "martinet", small.clone()),
        (
            Command::Nu,
            "martinet",
            RunOptions {
                grid: Some("1,2,-1,1,5".into()),
                ..small.clone()
            },
        ),
        (Command::Rho, "ordergap", small.clone()),
        (Command::Verdict, "ar4", small.clone()),
        (
            Command::Verdict,
            "grushin",
            RunOptions {
                point: None,
                stratum: None,
                ..small.clone()
            },
        ),
        (Command::Quad, "ar4", small.clone()),
        (
            Command::Ballbox,
            "heisenberg",
            RunOptions {
                stratum: None,
                ..small.clone()
            },
        ),
        (
            Command::Examples,
            "martinet",
            RunOptions {
                point: None,
                stratum: None,
                ..small.clone()
            },
        ),
    ];
    for (command, name, opts) in cases {
        let model = builtin(name, 2).unwrap();
        let a = run(command, Some(&model), &opts).unwrap();
        let b = run(command, Some(&model), &opts).unwrap();
        assert_eq!(
            a.results_bytes(),
            b.results_bytes(),
            "{} on {name} not byte-identical",
            command.name()
        );
    }
    // The example suite itself is deterministic across fresh runs.
    let a = run_examples_suite(2, SEED).unwrap();
    let b = run_examples_suite(2, SEED).unwrap();
    assert_eq!(
        serde_json::to_string(&a.to_json()).unwrap(),
        serde_json::to_string(&b.to_json()).unwrap()
    );
    sw.finish("byte-identical result payloads across reruns for all commands");
}
