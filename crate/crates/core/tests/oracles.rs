use hardy_copson::quad::integrate;
use hardy_copson::{lhs_main, sigma_p, QuadConfig, TestFunction, WeightSpec};

fn cfg() -> QuadConfig {
    QuadConfig::default()
}

fn assert_close(got: f64, want: f64, tol: f64) {
    assert!((got - want).abs() <= tol * want.abs(), "got {got}, want {want}");
}

#[test]
fn gamma_type_integrals() {
    let w = WeightSpec::exp_scaled(2.0, 1.5, 0.5).unwrap();
    // 2 Gamma(2.5) / 0.5^2.5
    let gamma = 0.75 * std::f64::consts::PI.sqrt();
    assert_close(w.total_mass(), 2.0 * gamma / 0.5f64.powf(2.5), 1e-12);
    let direct = integrate(|t| w.value(t), 0.0, f64::INFINITY, &[], &cfg()).unwrap();
    assert_close(direct, w.total_mass(), 1e-9);
}

#[test]
fn sigma_of_power_weights() {
    // v = t^a, p = 2: sigma = (int_x^y t^{-a})^{1/2}
    let v = WeightSpec::power(0.5).unwrap();
    let want = ((4f64.sqrt() - 1.0) * 2.0).sqrt();
    assert_close(sigma_p(&v, 2.0, 1.0, 4.0).unwrap(), want, 1e-12);
    // p = 1: esssup 1/v
    assert_close(sigma_p(&v, 1.0, 1.0, 4.0).unwrap(), 1.0, 1e-15);
    assert!(sigma_p(&WeightSpec::power(1.5).unwrap(), 2.0, 0.0, 1.0).unwrap().is_infinite());
}

#[test]
fn main_side_against_fubini() {
    // q = r = 1: int u(x) int_x^inf H w = int H w U
    let u = WeightSpec::two_piece(0.3, -2.5).unwrap();
    let w = WeightSpec::exp_scaled(1.0, 0.5, 0.7).unwrap();
    let h = TestFunction::new(vec![0.2, 0.9, 2.0, 5.0], vec![1.0, 0.0, 2.5]).unwrap();
    let mut splits = h.breakpoints().to_vec();
    splits.extend(u.breakpoints());
    let oracle =
        integrate(|t| h.primitive(t) * w.value(t) * u.integral(0.0, t), 0.0, f64::INFINITY, &splits, &cfg()).unwrap();
    assert_close(lhs_main(&h, &u, &w, 1.0, 1.0, &cfg()).unwrap(), oracle, 1e-8);
}

#[test]
fn main_side_general_exponents_against_nested_quadrature() {
    let u = WeightSpec::exp_scaled(3.0, 0.0, 1.0).unwrap();
    let w = WeightSpec::exp_scaled(1.0, 0.0, 1.0).unwrap();
    let h = TestFunction::new(vec![0.5, 1.5, 3.0], vec![2.0, 1.0]).unwrap();
    let (q, r) = (2.0, 0.5);
    let splits = h.breakpoints().to_vec();
    let inner = |x: f64| {
        integrate(|t| h.primitive(t).powf(q) * w.value(t), x, f64::INFINITY, &splits, &cfg()).unwrap().powf(r / q)
    };
    let oracle = integrate(|x| inner(x) * u.value(x), 0.0, f64::INFINITY, &splits, &cfg()).unwrap().powf(1.0 / r);
    assert_close(lhs_main(&h, &u, &w, q, r, &cfg()).unwrap(), oracle, 1e-7);
}
