use carnot_core::algebra::rat;
use carnot_core::cli::builtin::builtin;
use carnot_core::coords;
use carnot_core::numerics;

fn main() {
    let model = builtin("martinet", 2).unwrap();
    let chart = coords::chart_for(&model, &[rat(1), rat(0), rat(0)], None).unwrap();
    for eps in [0.5, 0.25, 0.125] {
        let r = numerics::ballbox_check(&model, &chart, &[eps], 2000, 8, 42).unwrap();
        println!("eps {eps}: c_upper {:.6} c_lower {:.6}", r.per_eps[0].c_upper, r.per_eps[0].c_lower);
    }
}
