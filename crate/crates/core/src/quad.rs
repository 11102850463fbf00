//! Quadrature, grid suprema and monotone root finding on the half line.
//!
//! Every integral over a subset of (0, inf) is computed in the variable
//! `s = ln t`, so `dt = e^s ds`. Unbounded ends are truncated at the
//! configured s-bounds and the discarded piece is estimated from the local
//! exponential decay rate of the transformed integrand, which is exact for
//! power-law behaviour at 0 and at infinity.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values above this are reported as +inf.
pub const OVERFLOW_GUARD: f64 = 1e300;

/// Log-slope (per unit of `ln t`) above which a function is taken to grow
/// without bound towards an open end of the grid.
pub const BOUNDARY_GROWTH_SLOPE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
    /// Truncation of the log variable, `t in [e^s_lo, e^s_hi]`.
    pub s_lo: f64,
    pub s_hi: f64,
    /// Geometric grid density used by suprema and by the condition grids.
    pub nodes_per_decade: usize,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_depth: 60,
            s_lo: -46.0,
            s_hi: 46.0,
            nodes_per_decade: 2048,
            max_intervals: 4000,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if !(self.s_lo.is_finite() && self.s_hi.is_finite() && self.s_lo < self.s_hi) {
            return Err(Error::Config("truncation bounds must be finite with s_lo < s_hi".into()));
        }
        if self.nodes_per_decade < 8 {
            return Err(Error::Config("nodes_per_decade must be at least 8".into()));
        }
        Ok(())
    }

    /// Same configuration with tighter tolerances.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            rel_tol: (self.rel_tol * factor).max(1e-15),
            abs_tol: (self.abs_tol * factor).max(1e-300),
            ..*self
        }
    }

    fn s_range(&self, a: f64, b: f64) -> (f64, f64) {
        let mut sa = if a == 0.0 { self.s_lo } else { a.ln() };
        let mut sb = if b.is_infinite() { self.s_hi } else { b.ln() };
        if a == 0.0 && sb - sa < 4.0 {
            sa = sb - 4.0;
        }
        if b.is_infinite() && sb - sa < 4.0 {
            sb = sa + 4.0;
        }
        (sa, sb)
    }
}

// Gauss-Kronrod 10/21 abscissae and weights (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208980523073,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut e = err.abs();
    if resasc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / resasc).powf(1.5);
        e = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * resabs);
    }
    e
}

fn kronrod21<G: Fn(f64) -> f64>(g: &G, lo: f64, hi: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = g(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut resabs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = g(center - dx);
        let f2 = g(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let err = rescale_error((res_k - res_g) * half, resabs * half.abs(), resasc * half.abs());
    (value, err)
}

/// Integral of `f` over `(a, b)`, `0 <= a < b <= inf`.
///
/// `splits` are interior points where `f` or one of its derivatives is
/// discontinuous (or has an integrable singularity). Returns `+inf` when the
/// integrand is infinite somewhere or does not decay at a truncated end.
pub fn integrate<F>(f: F, a: f64, b: f64, splits: &[f64], cfg: &QuadConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(a >= 0.0) || b.is_nan() {
        return Err(Error::Domain(format!("integration range ({a}, {b}) is not in [0, inf]")));
    }
    if a >= b {
        return Ok(0.0);
    }
    let (sa, sb) = cfg.s_range(a, b);
    let g = |s: f64| {
        let t = s.exp();
        let v = f(t);
        if v == 0.0 {
            0.0
        } else {
            v * t
        }
    };

    let mut cuts: Vec<f64> = splits
        .iter()
        .filter(|&&x| x > 0.0 && x.is_finite())
        .map(|x| x.ln())
        .filter(|&s| s > sa && s < sb)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(sa);
    edges.extend(cuts);
    edges.push(sb);

    let mut heap = BinaryHeap::new();
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;
    for w in edges.windows(2) {
        let (value, error) = kronrod21(&g, w[0], w[1]);
        if value.is_nan() {
            return Err(Error::Domain("integrand returned NaN".into()));
        }
        if value.is_infinite() {
            return Ok(f64::INFINITY);
        }
        heap.push(Panel { lo: w[0], hi: w[1], value, error, depth: 0 });
    }

    loop {
        let total: f64 = heap.iter().map(|p| p.value).sum::<f64>() + frozen_value;
        let err: f64 = heap.iter().map(|p| p.error).sum::<f64>() + frozen_error;
        if err <= cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
            return finish(total, &g, a, b, sa, sb);
        }
        let Some(worst) = heap.pop() else {
            return Err(Error::Quadrature { estimate: total, error_bound: err });
        };
        if heap.len() + 2 > cfg.max_intervals {
            return Err(Error::Quadrature { estimate: total, error_bound: err });
        }
        let mid = 0.5 * (worst.lo + worst.hi);
        let too_narrow = (worst.hi - worst.lo) <= 4.0 * f64::EPSILON * mid.abs().max(1.0);
        if worst.depth >= cfg.max_depth || too_narrow {
            frozen_value += worst.value;
            frozen_error += worst.error;
            continue;
        }
        for (lo, hi) in [(worst.lo, mid), (mid, worst.hi)] {
            let (value, error) = kronrod21(&g, lo, hi);
            if value.is_nan() {
                return Err(Error::Domain("integrand returned NaN".into()));
            }
            if value.is_infinite() {
                return Ok(f64::INFINITY);
            }
            heap.push(Panel { lo, hi, value, error, depth: worst.depth + 1 });
        }
    }
}

fn finish<G: Fn(f64) -> f64>(total: f64, g: &G, a: f64, b: f64, sa: f64, sb: f64) -> Result<f64> {
    let mut total = total;
    if a == 0.0 {
        total += truncated_tail(g(sa), g(sa + 1.0));
    }
    if b.is_infinite() {
        total += truncated_tail(g(sb), g(sb - 1.0));
    }
    if total.is_nan() {
        return Err(Error::Domain("integrand returned NaN".into()));
    }
    Ok(if total > OVERFLOW_GUARD { f64::INFINITY } else { total })
}

/// Mass beyond a truncation point, given the transformed integrand at the
/// boundary (`edge`) and one unit of `s` inside (`inner`). Assumes
/// exponential behaviour in `s`; a non-decaying integrand diverges.
pub(crate) fn truncated_tail(edge: f64, inner: f64) -> f64 {
    if edge == 0.0 || !edge.is_finite() && edge.is_nan() {
        return 0.0;
    }
    if edge.is_infinite() {
        return f64::INFINITY;
    }
    if !(inner > edge * (1.0 + 1e-9)) {
        return f64::INFINITY;
    }
    let rate = (inner / edge).ln();
    edge / rate
}

/// Supremum of `f` over `(a, b)` on a geometric grid.
///
/// Piece boundaries in `breaks` are sampled from both sides. At an open end
/// (`a = 0` or `b = inf`) a function still growing towards the end is
/// reported as `+inf`.
pub fn sup_on<F>(f: F, a: f64, b: f64, breaks: &[f64], cfg: &QuadConfig) -> f64
where
    F: Fn(f64) -> f64,
{
    if !(a < b) {
        return 0.0;
    }
    let (sa, sb) = cfg.s_range(a, b);
    let n = (((sb - sa) / std::f64::consts::LN_10) * cfg.nodes_per_decade as f64).ceil() as usize;
    let n = n.max(16);
    let h = (sb - sa) / n as f64;
    let s: Vec<f64> = (0..=n).map(|i| sa + i as f64 * h).collect();
    let values: Vec<f64> = s.iter().map(|&si| f(si.exp())).collect();
    let mut best = grid_sup(&values, &s, a == 0.0, b.is_infinite());
    for &x in breaks {
        if x > a && x < b {
            let v = f(x).max(f(x * (1.0 - 1e-14)));
            if v.is_nan() {
                continue;
            }
            best = best.max(v);
        }
    }
    if best > OVERFLOW_GUARD {
        f64::INFINITY
    } else {
        best
    }
}

/// Maximum of tabulated values with the boundary-growth test applied at the
/// open ends. `s` holds the log-abscissae of the values.
pub(crate) fn grid_sup(values: &[f64], s: &[f64], open_left: bool, open_right: bool) -> f64 {
    let mut best = 0.0f64;
    for &v in values {
        if v.is_nan() {
            continue;
        }
        if v > OVERFLOW_GUARD {
            return f64::INFINITY;
        }
        best = best.max(v);
    }
    let n = values.len();
    if n >= 2 {
        if open_right && grows_towards(values, s, n - 1, false) {
            return f64::INFINITY;
        }
        if open_left && grows_towards(values, s, 0, true) {
            return f64::INFINITY;
        }
    }
    best
}

fn grows_towards(values: &[f64], s: &[f64], edge: usize, leftwards: bool) -> bool {
    let v_edge = values[edge];
    if !(v_edge > 0.0) {
        return false;
    }
    let target = if leftwards { s[edge] + 1.0 } else { s[edge] - 1.0 };
    let idx = if leftwards {
        s.partition_point(|&x| x < target).min(values.len() - 1)
    } else {
        s.partition_point(|&x| x <= target).saturating_sub(1)
    };
    if idx == edge {
        return false;
    }
    let v_in = values[idx];
    if !(v_in > 0.0) {
        return true;
    }
    let slope = (v_edge / v_in).ln() / (s[edge] - s[idx]).abs();
    slope > BOUNDARY_GROWTH_SLOPE
}

/// Stopping rule for [`solve_monotone`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveTol {
    pub rel: f64,
    pub abs: f64,
    pub max_iter: usize,
}

impl Default for SolveTol {
    fn default() -> Self {
        Self { rel: 1e-9, abs: 1e-12, max_iter: 400 }
    }
}

impl From<&QuadConfig> for SolveTol {
    fn from(cfg: &QuadConfig) -> Self {
        Self { rel: cfg.rel_tol, abs: cfg.abs_tol, ..Self::default() }
    }
}

/// Solves `f(x) = target` for continuous non-decreasing `f` on `bracket`.
///
/// Safeguarded secant: a secant step from the bracket ends is taken when it
/// lands inside and the previous step halved the bracket, otherwise the
/// bracket is bisected (geometrically when it spans more than a factor 4).
pub fn solve_monotone<F>(f: F, target: f64, bracket: (f64, f64), tol: SolveTol) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = bracket;
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if !(lo <= hi && f_lo <= target && target <= f_hi) {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi, target });
    }
    let accept = tol.abs.max(tol.rel * target.abs());
    if (f_lo - target).abs() <= accept {
        return Ok(lo);
    }
    if (f_hi - target).abs() <= accept {
        return Ok(hi);
    }
    let mut last_width = f64::INFINITY;
    for _ in 0..tol.max_iter {
        let width = hi - lo;
        let secant = lo + (target - f_lo) * width / (f_hi - f_lo);
        let use_secant = f_hi.is_finite()
            && f_hi > f_lo
            && secant > lo
            && secant < hi
            && width <= 0.5 * last_width;
        let x = if use_secant {
            secant
        } else if lo > 0.0 && hi / lo > 4.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        last_width = width;
        let fx = f(x);
        if fx.is_nan() {
            return Err(Error::Domain(format!("monotone solve: F({x}) is NaN")));
        }
        if (fx - target).abs() <= accept {
            return Ok(x);
        }
        if fx < target {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        if hi - lo <= 2.0 * f64::EPSILON * hi.abs() {
            return Ok(if target - f_lo <= f_hi - target { lo } else { hi });
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}
