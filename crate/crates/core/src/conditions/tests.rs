use super::*;
use crate::error::Error;
use crate::covering::build_covering;
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

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if f(x1) < f(x2) {
            a = x1;
        } else {
            b = x2;
        }
    }
    f(0.5 * (a + b))
}

#[test]
fn regimes() {
    assert_eq!(classify_regime(1.0, 1.0, 1.0), Regime::A);
    assert_eq!(classify_regime(2.0, 3.0, 1.0), Regime::B);
    assert_eq!(classify_regime(2.0, 1.0, 4.0), Regime::C);
    assert_eq!(classify_regime(3.0, 1.0, 0.5), Regime::D);
}

#[test]
fn exponential_f1_f2() {
    let e = Exponents::new(2.0, 2.0, 2.0).unwrap();
    let f = compute_f(&exp1(), &one(), &exp1(), &e, &cfg()).unwrap();
    assert_relative_eq!(f["F2"].value, (-0.5f64).exp() / 2.0, max_relative = 1e-6);
    let oracle = golden_max(|x| ((1.0 - (-x).exp()) * (-x).exp() * x).sqrt(), 0.0, 10.0);
    assert_relative_eq!(f["F1"].value, oracle, max_relative = 1e-6);
    assert_relative_eq!(f["F1"].value, 0.5102406, max_relative = 1e-6);
    assert!(!f["F3"].defined && !f["F5"].defined && !f["F6"].defined);
}

#[test]
fn divergent_tail_is_infinite() {
    let e = Exponents::new(2.0, 2.0, 2.0).unwrap();
    let f = compute_f(&exp1(), &one(), &one(), &e, &cfg()).unwrap();
    assert!(f["F1"].value.is_infinite() && f["F1"].defined && !f["F1"].finite());
    let json = serde_json::to_value(f["F1"]).unwrap();
    assert_eq!(json["value"], serde_json::Value::Null);
    assert_eq!(json["finite"], false);
}

#[test]
fn families_share_one_path() {
    let u = WeightSpec::exp_scaled(2.0, 0.5, 1.0).unwrap();
    let v = WeightSpec::two_piece(0.5, -0.5).unwrap();
    let w = WeightSpec::exp_scaled(1.0, 0.0, 2.0).unwrap();
    let e = Exponents::new(3.0, 1.0, 0.5).unwrap();
    let f = compute_f(&u, &v, &w, &e, &cfg()).unwrap();
    let d = compute_d(&u, &v, &w, &e, &cfg()).unwrap();
    let b = compute_b(&u, &v, &w, &e, &cfg()).unwrap();
    let c = compute_c_sup(&Factor::UpperPower { w: &w, q: e.q }, &u, &v, e.p, e.r, &cfg()).unwrap();
    for i in 1..=4 {
        assert_eq!(f[&format!("F{i}")].value.to_bits(), d[&format!("D{i}")].value.to_bits());
        assert_eq!(c[&format!("C{i}")].value.to_bits(), d[&format!("D{i}")].value.to_bits());
    }
    assert_eq!(b["B1"], f["F1"]);
    assert_eq!(b["B3"], f["F5"]);
    assert_eq!(b["B4"], f["F6"]);
    assert!(f.values().all(|c| c.finite()));
}

#[test]
fn control_bounds() {
    let u = WeightSpec::exp_scaled(1.0, 1.0, 0.5).unwrap();
    let v = WeightSpec::power(0.3).unwrap();
    let w = WeightSpec::two_piece(0.0, -3.0).unwrap();
    for (p, q, r) in [(3.0, 1.0, 0.5), (2.0, 1.0, 1.5), (4.0, 2.0, 1.0)] {
        let e = Exponents::new(p, q, r).unwrap();
        let f = compute_f(&u, &v, &w, &e, &cfg()).unwrap();
        let kappa = ((p - q) / p).powf(-(p - q) / (p * q));
        assert!(f["F1"].value <= kappa * f["F5"].value * (1.0 + 1e-12), "{p} {q} {r}");
        assert!(f["F3"].value <= kappa * f["F6"].value * (1.0 + 1e-12), "{p} {q} {r}");
    }
}

#[test]
fn homogeneity() {
    let u = WeightSpec::exp_scaled(1.0, 0.5, 1.0).unwrap();
    let v = WeightSpec::two_piece(0.0, 1.0).unwrap();
    let w = WeightSpec::exp_scaled(2.0, 0.0, 1.5).unwrap();
    let e = Exponents::new(3.0, 1.0, 0.5).unwrap();
    let lam = 5.0;
    let base = compute_f(&u, &v, &w, &e, &cfg()).unwrap();
    let cases = [
        (compute_f(&u, &v, &w.scaled(lam).unwrap(), &e, &cfg()).unwrap(), lam.powf(1.0 / e.q)),
        (compute_f(&u.scaled(lam).unwrap(), &v, &w, &e, &cfg()).unwrap(), lam.powf(1.0 / e.r)),
        (compute_f(&u, &v.scaled(lam).unwrap(), &w, &e, &cfg()).unwrap(), lam.powf(-1.0 / e.p)),
    ];
    for (scaled, factor) in cases {
        for (name, c) in &base {
            assert_relative_eq!(scaled[name].value, factor * c.value, max_relative = 1e-9);
        }
    }
}

#[test]
fn constant_factor_gives_unbounded_c1() {
    let f = |_: f64| 1.0;
    let factor = Factor::Function { f: &f, breaks: vec![] };
    let c = compute_c_sup(&factor, &exp1(), &one(), 2.0, 2.0, &cfg()).unwrap();
    assert!(c["C1"].value.is_infinite());
    assert!(!c["C3"].defined);
}

#[test]
fn infinite_sigma() {
    assert!(matches!(WeightSpec::power(-2.0), Err(Error::WeightClass(_))));
    // v^{1-p'} = t^{-3/2} is not integrable at 0
    let v = WeightSpec::power(1.5).unwrap();
    let e = Exponents::new(2.0, 1.0, 1.0).unwrap();
    let b = compute_b(&exp1(), &v, &exp1(), &e, &cfg()).unwrap();
    assert!(b.values().filter(|c| c.defined).all(|c| c.value.is_infinite()));
}

#[test]
fn block_examples() {
    let w = WeightSpec::two_piece(0.0, -2.0).unwrap();
    assert_relative_eq!(hardy_block_constant(&one(), &w, 1.0, 1.0, (0.0, f64::INFINITY), &cfg()).unwrap(), 2.0, max_relative = 1e-12);
    let sup = hardy_block_sup(&one(), &one(), 2.0, 1.0, (0.0, 1.0), &cfg()).unwrap();
    assert_relative_eq!(sup, 2.0 / 3.0 / 3f64.sqrt(), max_relative = 1e-6);
    let int = hardy_block_constant(&one(), &one(), 2.0, 1.0, (0.0, 1.0), &cfg()).unwrap();
    assert_relative_eq!(int, (1.0f64 / 6.0).sqrt(), max_relative = 1e-6);
}

#[test]
fn a_family_by_enumeration() {
    let w = WeightSpec::two_piece(0.0, -2.0).unwrap();
    let cs = build_covering(&one(), -10, 10, false, &cfg()).unwrap();
    let e = Exponents::new(1.0, 1.0, 1.0).unwrap();
    let rep = compute_a(&cs, &one(), &w, &e, &cfg()).unwrap();
    let direct = (-10..10)
        .map(|k| {
            let (a, b) = (2f64.powi(k), 2f64.powi(k + 1));
            2f64.powi(k) * w.integral(a, b)
        })
        .fold(0.0, f64::max);
    assert_relative_eq!(rep.family["A1"].value, direct, max_relative = 1e-9);
    assert_relative_eq!(direct, 0.5, max_relative = 1e-12);
    assert!(!rep.family["A2"].defined);
    assert!(!rep.warnings.is_empty());
}

#[test]
fn combined_pairs() {
    let e = Exponents::new(3.0, 1.0, 0.5).unwrap();
    let mut rep = conditions_report(&exp1(), &one(), &one(), &e, None, &cfg()).unwrap();
    assert_eq!(rep.combined_pair, ["F4", "F6"]);
    assert!(rep.combined.value.is_infinite());
    rep.regime = Regime::A;
    rep.f.insert("F1".into(), Constant::of(1.0));
    rep.f.insert("F2".into(), Constant::of(2.0));
    assert_eq!(combined_constant(&rep), 3.0);
}
