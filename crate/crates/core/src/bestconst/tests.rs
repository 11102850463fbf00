use super::*;
use crate::conditions::hardy_block_constant;
use approx::assert_relative_eq;

fn cfg() -> QuadConfig {
    QuadConfig::default()
}

fn exp1() -> WeightSpec {
    WeightSpec::exp_scaled(1.0, 0.0, 1.0).unwrap()
}

fn one() -> WeightSpec {
    WeightSpec::constant(1.0).unwrap()
}

fn small() -> OptimizerConfig {
    OptimizerConfig { cells: 16, t_min: 1e-2, t_max: 1e2, restarts: 2, ..Default::default() }
}

#[test]
fn fast_evaluators_track_accurate_ones() {
    let u = WeightSpec::exp_scaled(1.0, 0.5, 1.0).unwrap();
    let w = WeightSpec::two_piece(0.0, -3.0).unwrap();
    let v = WeightSpec::power(0.5).unwrap();
    let e = Exponents::new(2.0, 1.5, 0.8).unwrap();
    let opt = small();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for target in [Target::Main, Target::Sup, Target::Discrete] {
        let cs = covering_for(&u, opt.t_min, opt.t_max, &cfg()).unwrap();
        let prob = Problem { u: &u, v: &v, w: &w, e, target, cs: Some(cs), cfg: &cfg() };
        let fr = prob.fast(opt.breakpoints()).unwrap();
        for _ in 0..3 {
            let vals: Vec<f64> = (0..opt.cells).map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..2.0) }).collect();
            let h = TestFunction::new(opt.breakpoints(), vals.clone()).unwrap();
            let fast = fr.lhs(&vals);
            let exact = prob.accurate_lhs(&h).unwrap();
            assert_relative_eq!(fast, exact, max_relative = 2e-3);
            assert_relative_eq!(fr.rhs(&vals), rhs_norm(&h, &v, e.p), max_relative = 1e-12);
        }
    }
}

#[test]
fn estimate_beats_hand_function() {
    let e = Exponents::new(1.0, 1.0, 1.0).unwrap();
    let est = estimate_best_constant(&exp1(), &one(), &exp1(), &e, Target::Main, &small(), &cfg()).unwrap();
    let h0 = TestFunction::indicator(0.0, 1.0, 1.0).unwrap();
    let hand = lhs_main(&h0, &exp1(), &exp1(), 1.0, 1.0, &cfg()).unwrap() / rhs_norm(&h0, &one(), 1.0);
    assert!(est.value >= hand, "{} < {hand}", est.value);
    let again = prob_ratio(&est, &exp1(), &one(), &exp1(), &e);
    assert_relative_eq!(est.value, again, max_relative = 1e-10);
    assert!(est.trace.iter().all(|&t| t <= est.value));
}

fn prob_ratio(est: &BestConstantEstimate, u: &WeightSpec, v: &WeightSpec, w: &WeightSpec, e: &Exponents) -> f64 {
    lhs_main(&est.argmax_h, u, w, e.q, e.r, &cfg()).unwrap() / rhs_norm(&est.argmax_h, v, e.p)
}

#[test]
fn scaling_w_scales_estimate() {
    let e = Exponents::new(2.0, 2.0, 2.0).unwrap();
    let lam: f64 = 5.0;
    let w = exp1();
    let a = estimate_best_constant(&exp1(), &one(), &w, &e, Target::Sup, &small(), &cfg()).unwrap();
    let b = estimate_best_constant(&exp1(), &one(), &w.scaled(lam).unwrap(), &e, Target::Sup, &small(), &cfg()).unwrap();
    assert_relative_eq!(b.value, lam.sqrt() * a.value, max_relative = 1e-9);
}

#[test]
fn deterministic_for_a_seed() {
    let e = Exponents::new(2.0, 1.0, 1.0).unwrap();
    let opt = OptimizerConfig { restarts: 3, seed: 11, ..small() };
    let a = estimate_best_constant(&exp1(), &one(), &exp1(), &e, Target::Discrete, &opt, &cfg()).unwrap();
    let b = estimate_best_constant(&exp1(), &one(), &exp1(), &e, Target::Discrete, &opt, &cfg()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn block_extremizer_reaches_half() {
    let h = block_extremizer(&one(), &one(), 2.0, 2.0, (0.0, 1.0), 32).unwrap();
    assert_relative_eq!(rhs_norm(&h, &one(), 2.0), 1.0, max_relative = 1e-10);
    assert!(h.support_start() > 0.0 && h.support_end() <= 1.0);
    let got = block_ratio(&h, &one(), &one(), 2.0, 2.0, (0.0, 1.0), &cfg()).unwrap();
    let bound = hardy_block_constant(&one(), &one(), 2.0, 2.0, (0.0, 1.0), &cfg()).unwrap();
    assert!(got >= 0.5 * bound, "{got} vs {bound}");
}

#[test]
fn config_validation() {
    assert!(OptimizerConfig { cells: 4, ..Default::default() }.validate().is_err());
    assert!(OptimizerConfig { t_min: 0.0, ..Default::default() }.validate().is_err());
    assert!(OptimizerConfig { restarts: 0, ..Default::default() }.validate().is_err());
    assert!(OptimizerConfig { steps: vec![0.5], ..Default::default() }.validate().is_err());
    assert_eq!("sup".parse::<Target>().unwrap(), Target::Sup);
    assert!("max".parse::<Target>().is_err());
}
