//! Both sides of the inequality, and of its two reduced forms, on step functions.

use serde::Serialize;

use crate::covering::CoveringSequence;
use crate::error::{Error, Result};
use crate::grid::{mul0, powf0};
use crate::quad::{integrate, QuadConfig};
use crate::weights::WeightSpec;

/// Nonnegative step function: `values[i]` on `[breakpoints[i], breakpoints[i+1])`, zero elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    #[serde(skip)]
    cumulative: Vec<f64>,
}

impl TestFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || breakpoints.len() != values.len() + 1 {
            return Err(Error::Config(format!(
                "step function needs n >= 1 values and n + 1 breakpoints, got {} and {}",
                values.len(),
                breakpoints.len()
            )));
        }
        if !(breakpoints[0] >= 0.0) || breakpoints.iter().any(|t| !t.is_finite()) {
            return Err(Error::Config("breakpoints must be finite and nonnegative".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("breakpoints must be strictly increasing".into()));
        }
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::Config("values must be finite and nonnegative".into()));
        }
        let mut cumulative = Vec::with_capacity(breakpoints.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for (i, v) in values.iter().enumerate() {
            acc += v * (breakpoints[i + 1] - breakpoints[i]);
            cumulative.push(acc);
        }
        Ok(Self { breakpoints, values, cumulative })
    }

    /// `value` on `[a, b)`.
    pub fn indicator(a: f64, b: f64, value: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![value])
    }

    /// `n` log-uniform cells spanning `[t_min, t_max]`.
    pub fn log_grid(n: usize, t_min: f64, t_max: f64, values: Vec<f64>) -> Result<Self> {
        if !(n >= 1 && t_min > 0.0 && t_max > t_min && values.len() == n) {
            return Err(Error::Config("log grid needs n >= 1, 0 < t_min < t_max and n values".into()));
        }
        Self::new(log_breakpoints(n, t_min, t_max), values)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }

    pub fn support_start(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn support_end(&self) -> f64 {
        *self.breakpoints.last().expect("non-empty")
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::new(self.breakpoints.clone(), self.values.iter().map(|v| v * lambda).collect())
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.breakpoints.clone(), values)
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self.cell_of(t) {
            Some(i) => self.values[i],
            None => 0.0,
        }
    }

    fn cell_of(&self, t: f64) -> Option<usize> {
        if t < self.breakpoints[0] || t >= self.support_end() {
            return None;
        }
        Some(self.breakpoints.partition_point(|&b| b <= t) - 1)
    }

    /// `int_0^t h`.
    pub fn primitive(&self, t: f64) -> f64 {
        if t <= self.breakpoints[0] {
            return 0.0;
        }
        if t >= self.support_end() {
            return *self.cumulative.last().expect("non-empty");
        }
        let i = self.breakpoints.partition_point(|&b| b <= t) - 1;
        self.cumulative[i] + self.values[i] * (t - self.breakpoints[i])
    }

    pub fn total(&self) -> f64 {
        *self.cumulative.last().expect("non-empty")
    }

    pub(crate) fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }
}

pub(crate) fn log_breakpoints(n: usize, t_min: f64, t_max: f64) -> Vec<f64> {
    let (a, b) = (t_min.ln(), t_max.ln());
    let mut bp: Vec<f64> = (0..=n).map(|i| (a + (b - a) * i as f64 / n as f64).exp()).collect();
    bp[0] = t_min;
    bp[n] = t_max;
    bp
}

/// `int_0^t h`.
pub fn primitive(h: &TestFunction, t: f64) -> f64 {
    h.primitive(t)
}

/// `(int h^p v)^(1/p)`.
pub fn rhs_norm(h: &TestFunction, v: &WeightSpec, p: f64) -> f64 {
    let bp = h.breakpoints();
    let mut acc = 0.0;
    for (i, &val) in h.values().iter().enumerate() {
        if val > 0.0 {
            acc += val.powf(p) * v.integral(bp[i], bp[i + 1]);
        }
    }
    acc.powf(1.0 / p)
}

fn splits_in(breaks: &[f64], a: f64, b: f64) -> Vec<f64> {
    breaks.iter().copied().filter(|&x| x > a && x < b).collect()
}

/// `H_end^r int_{t_end}^inf W^{r/q} u`, the part of the left sides where `H` has saturated.
fn saturated_tail(h: &TestFunction, u: &WeightSpec, w: &WeightSpec, q: f64, r: f64, cfg: &QuadConfig) -> Result<f64> {
    let hn = h.total();
    if hn == 0.0 {
        return Ok(0.0);
    }
    let t_end = h.support_end();
    if !w.tail_finite() {
        return Ok(f64::INFINITY);
    }
    let j = upper_power_tail(u, w, r / q, t_end, cfg)?;
    Ok(mul0(hn.powf(r), j))
}

/// `int_t^inf W^e u` for a finite-tailed `w`. The integrand is normalized
/// first so the absolute tolerance does not break homogeneity in `u`, `w`.
pub(crate) fn upper_power_tail(u: &WeightSpec, w: &WeightSpec, e: f64, t: f64, cfg: &QuadConfig) -> Result<f64> {
    let w_scale = powf0(w.upper(t), e);
    let u_scale = u.integral(t, 2.0 * t);
    if w_scale == 0.0 {
        return Ok(0.0);
    }
    let u_scale = if u_scale > 0.0 && u_scale.is_finite() { u_scale } else { 1.0 };
    let mut breaks = u.breakpoints();
    breaks.extend(w.breakpoints());
    let j = integrate(|x| powf0(w.upper(x), e) / w_scale * (u.value(x) / u_scale), t, f64::INFINITY, &breaks, cfg)?;
    Ok(j * w_scale * u_scale)
}

/// Left side of the main inequality,
/// `( int_0^inf ( int_x^inf H(t)^q w(t) dt )^{r/q} u(x) dx )^{1/r}`, `H = int_0^t h`.
pub fn lhs_main(h: &TestFunction, u: &WeightSpec, w: &WeightSpec, q: f64, r: f64, cfg: &QuadConfig) -> Result<f64> {
    if h.is_zero() {
        return Ok(0.0);
    }
    let bp = h.breakpoints();
    let cum = h.cumulative();
    let vals = h.values();
    let n = vals.len();
    let hn = h.total();
    let w_end = w.upper(h.support_end());
    if w_end.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let inner_cfg = cfg.tightened(1e-2);
    let w_breaks = w.breakpoints();
    let u_breaks = u.breakpoints();
    let hq = |i: usize, t: f64| powf0(cum[i] + vals[i] * (t - bp[i]), q);

    // I(t_j) = int_{t_j}^inf H^q w
    let mut inner_at = vec![0.0; n + 1];
    inner_at[n] = mul0(hn.powf(q), w_end);
    for i in (0..n).rev() {
        let part = integrate(|t| hq(i, t) * w.value(t), bp[i], bp[i + 1], &splits_in(&w_breaks, bp[i], bp[i + 1]), &inner_cfg)?;
        inner_at[i] = inner_at[i + 1] + part;
    }
    let e = r / q;
    let mut total = 0.0;
    if bp[0] > 0.0 {
        total += u.integral(0.0, bp[0]) * powf0(inner_at[0], e);
    }
    for i in 0..n {
        let (a, b) = (bp[i], bp[i + 1]);
        let wb = splits_in(&w_breaks, a, b);
        let mut splits = splits_in(&u_breaks, a, b);
        splits.extend(wb.iter().copied());
        let failure = std::cell::RefCell::new(None);
        let val = integrate(
            |x| {
                let part = match integrate(|t| hq(i, t) * w.value(t), x, b, &wb, &inner_cfg) {
                    Ok(v) => v,
                    Err(err) => {
                        *failure.borrow_mut() = Some(err);
                        f64::NAN
                    }
                };
                u.value(x) * powf0(inner_at[i + 1] + part, e)
            },
            a,
            b,
            &splits,
            cfg,
        );
        if let Some(err) = failure.into_inner() {
            return Err(err);
        }
        total += val?;
    }
    total += saturated_tail(h, u, w, q, r, cfg)?;
    Ok(total.powf(1.0 / r))
}

/// Minimum number of sample points per decade used for the inner supremum.
const SUP_NODES_PER_DECADE: f64 = 2048.0;

/// Left side of the supremum inequality,
/// `( int_0^inf u(x) [ sup_{s >= x} W(s)^{1/q} H(s) ]^r dx )^{1/r}`.
pub fn lhs_sup(h: &TestFunction, u: &WeightSpec, w: &WeightSpec, q: f64, r: f64, cfg: &QuadConfig) -> Result<f64> {
    if h.is_zero() {
        return Ok(0.0);
    }
    let t_end = h.support_end();
    let w_end = w.upper(t_end);
    if w_end.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let bp = h.breakpoints();
    // sample nodes from the first breakpoint (or far below it) to t_end
    let mut nodes: Vec<f64> = Vec::new();
    for i in 0..h.cells() {
        let b = bp[i + 1];
        let a = if bp[i] > 0.0 { bp[i] } else { b * 1e-12 };
        let decades = (b / a).log10();
        let m = ((decades * SUP_NODES_PER_DECADE).ceil() as usize).max(2048);
        let (la, lb) = (a.ln(), b.ln());
        let start = if nodes.is_empty() { 0 } else { 1 };
        for k in start..=m {
            let x = if k == m { b } else if k == 0 { a } else { (la + (lb - la) * k as f64 / m as f64).exp() };
            nodes.push(x);
        }
    }
    let n = nodes.len();
    // W at nodes, accumulated from the right
    let mut wv = vec![0.0; n];
    wv[n - 1] = w_end;
    for i in (0..n - 1).rev() {
        wv[i] = wv[i + 1] + w.integral(nodes[i], nodes[i + 1]);
    }
    let inv_q = 1.0 / q;
    let mut s = vec![0.0; n];
    let mut cur = 0.0f64;
    for i in (0..n).rev() {
        let g = mul0(powf0(wv[i], inv_q), h.primitive(nodes[i]));
        cur = cur.max(g);
        s[i] = powf0(cur, r);
    }
    let mut total = u.integral(0.0, nodes[0]) * s[0];
    for i in 0..n - 1 {
        let m = u.integral(nodes[i], nodes[i + 1]);
        total += 0.5 * (s[i] + s[i + 1]) * m;
    }
    total += saturated_tail(h, u, w, q, r, cfg)?;
    Ok(total.powf(1.0 / r))
}

/// Per-block terms `(k, 2^{k/r} ( int_{x_k}^{x_{k+1}} (int_{x_k}^t h)^q w(t) dt )^{1/q})`.
pub fn lhs_discrete_terms(
    h: &TestFunction,
    cs: &CoveringSequence,
    w: &WeightSpec,
    q: f64,
    r: f64,
    cfg: &QuadConfig,
) -> Result<Vec<(i32, f64)>> {
    let mut out = Vec::new();
    for blk in cs.blocks() {
        let j = block_integral(h, w, q, (blk.a, blk.b), cfg)?;
        let term = 2f64.powf(blk.k as f64 / r) * powf0(j, 1.0 / q);
        out.push((blk.k, term));
    }
    Ok(out)
}

/// `int_a^b (int_a^t h)^q w(t) dt`; `b` may be infinite.
fn block_integral(h: &TestFunction, w: &WeightSpec, q: f64, (a, b): (f64, f64), cfg: &QuadConfig) -> Result<f64> {
    let bp = h.breakpoints();
    let cum = h.cumulative();
    let vals = h.values();
    let t_end = h.support_end();
    let h_a = h.primitive(a);
    if a >= t_end || h.primitive(b.min(t_end)) - h_a <= 0.0 {
        return Ok(0.0);
    }
    let w_breaks = w.breakpoints();
    let mut j = 0.0;
    for i in 0..vals.len() {
        let lo = bp[i].max(a);
        let hi = bp[i + 1].min(b);
        if lo >= hi {
            continue;
        }
        let f = |t: f64| powf0(cum[i] + vals[i] * (t - bp[i]) - h_a, q) * w.value(t);
        j += integrate(f, lo, hi, &splits_in(&w_breaks, lo, hi), cfg)?;
    }
    if b > t_end {
        let rest = h.total() - h_a;
        if rest > 0.0 {
            j += mul0(rest.powf(q), w.integral(t_end.max(a), b));
        }
    }
    Ok(j)
}

/// `( int_a^b (int_a^t h)^q w(t) dt )^{1/q}`: the left side of the Hardy
/// inequality restricted to one block.
pub fn lhs_block(h: &TestFunction, w: &WeightSpec, q: f64, interval: (f64, f64), cfg: &QuadConfig) -> Result<f64> {
    Ok(powf0(block_integral(h, w, q, interval, cfg)?, 1.0 / q))
}

/// `|| { 2^{k/r} ( int_{x_k}^{x_{k+1}} (int_{x_k}^t h)^q w )^{1/q} } ||_{l^r}` over stored blocks.
pub fn lhs_discrete_blocks(
    h: &TestFunction,
    cs: &CoveringSequence,
    w: &WeightSpec,
    q: f64,
    r: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    if h.is_zero() {
        return Ok(0.0);
    }
    let terms = lhs_discrete_terms(h, cs, w, q, r, cfg)?;
    let sum: f64 = terms.iter().map(|&(_, t)| powf0(t, r)).sum();
    Ok(sum.powf(1.0 / r))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceBreakdown {
    pub lhs_full: f64,
    pub term_discrete: f64,
    pub term_sup: f64,
    /// `lhs_full / max(term_discrete, term_sup)`.
    pub ratio_lower: f64,
    /// `(term_discrete + term_sup) / lhs_full`.
    pub ratio_upper: f64,
}

/// `a / b` with `0/0 = 1` and `x/0 = inf`.
pub fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        a / b
    }
}

pub fn equivalence_decomposition(
    h: &TestFunction,
    u: &WeightSpec,
    w: &WeightSpec,
    q: f64,
    r: f64,
    cs: &CoveringSequence,
    cfg: &QuadConfig,
) -> Result<EquivalenceBreakdown> {
    let (lhs_full, (term_discrete, term_sup)) = rayon::join(
        || lhs_main(h, u, w, q, r, cfg),
        || rayon::join(|| lhs_discrete_blocks(h, cs, w, q, r, cfg), || lhs_sup(h, u, w, q, r, cfg)),
    );
    let (lhs_full, term_discrete, term_sup) = (lhs_full?, term_discrete?, term_sup?);
    Ok(EquivalenceBreakdown {
        lhs_full,
        term_discrete,
        term_sup,
        ratio_lower: ratio(lhs_full, term_discrete.max(term_sup)),
        ratio_upper: ratio(term_discrete + term_sup, lhs_full),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::build_covering;
    use approx::assert_relative_eq;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    fn e1() -> WeightSpec {
        WeightSpec::exp_scaled(1.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn primitive_examples() {
        let h = TestFunction::indicator(0.0, 1.0, 1.0).unwrap();
        assert_eq!(primitive(&h, 0.5), 0.5);
        assert_eq!(primitive(&h, 3.0), 1.0);
        let h2 = TestFunction::indicator(1.0, 2.0, 2.0).unwrap();
        assert_eq!(primitive(&h2, 1.5), 1.0);
        assert_eq!(primitive(&h2, 0.5), 0.0);
    }

    #[test]
    fn rhs_examples() {
        let one = WeightSpec::constant(1.0).unwrap();
        let h = TestFunction::indicator(0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(rhs_norm(&h, &one, 2.0), 1.0, max_relative = 1e-15);
        let z = TestFunction::indicator(0.0, 1.0, 0.0).unwrap();
        assert_eq!(rhs_norm(&z, &one, 2.0), 0.0);
        let v3 = WeightSpec::exp_scaled(3.0, 0.0, 1.0).unwrap();
        let h3 = TestFunction::indicator(0.0, 3f64.ln(), 1.0).unwrap();
        assert_relative_eq!(rhs_norm(&h3, &v3, 1.0), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn lhs_main_hand_value() {
        let h = TestFunction::indicator(0.0, 1.0, 1.0).unwrap();
        let e = (-1.0f64).exp();
        let expect = 0.75 - e + e * e / 4.0;
        let v = lhs_main(&h, &e1(), &e1(), 1.0, 1.0, &cfg()).unwrap();
        assert_relative_eq!(v, expect, max_relative = 1e-9);
        let w4 = e1().scaled(4.0).unwrap();
        let v4 = lhs_main(&h, &e1(), &w4, 1.0, 1.0, &cfg()).unwrap();
        assert_relative_eq!(v4, 4.0 * expect, max_relative = 1e-9);
    }

    #[test]
    fn lhs_sup_hand_value() {
        let h = TestFunction::indicator(0.0, 1.0, 1.0).unwrap();
        let e = (-1.0f64).exp();
        let v = lhs_sup(&h, &e1(), &e1(), 1.0, 1.0, &cfg()).unwrap();
        assert_relative_eq!(v, e - e * e / 2.0, max_relative = 1e-7);
        let m = lhs_main(&h, &e1(), &e1(), 1.0, 1.0, &cfg()).unwrap();
        assert!(v <= m);
    }

    #[test]
    fn zero_function_gives_zero() {
        let z = TestFunction::indicator(0.0, 1.0, 0.0).unwrap();
        assert_eq!(lhs_main(&z, &e1(), &e1(), 1.0, 1.0, &cfg()).unwrap(), 0.0);
        assert_eq!(lhs_sup(&z, &e1(), &e1(), 1.0, 1.0, &cfg()).unwrap(), 0.0);
        let u3 = WeightSpec::exp_scaled(3.0, 0.0, 1.0).unwrap();
        let cs = build_covering(&u3, -10, 0, false, &cfg()).unwrap();
        let eq = equivalence_decomposition(&z, &u3, &e1(), 1.0, 1.0, &cs, &cfg()).unwrap();
        assert_eq!((eq.lhs_full, eq.term_discrete, eq.term_sup), (0.0, 0.0, 0.0));
        assert_eq!((eq.ratio_lower, eq.ratio_upper), (1.0, 1.0));
    }

    #[test]
    fn discrete_block_example() {
        let one = WeightSpec::constant(1.0).unwrap();
        let cs = build_covering(&one, -4, 4, false, &cfg()).unwrap();
        let h = TestFunction::indicator(1.0, 2.0, 1.0).unwrap();
        let terms = lhs_discrete_terms(&h, &cs, &one, 1.0, 1.0, &cfg()).unwrap();
        for (k, t) in terms {
            if k == 0 {
                assert_relative_eq!(t, 0.5, max_relative = 1e-12);
            } else {
                assert_eq!(t, 0.0);
            }
        }
        assert_relative_eq!(lhs_discrete_blocks(&h, &cs, &one, 1.0, 1.0, &cfg()).unwrap(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn infinite_w_tail_gives_infinity() {
        let one = WeightSpec::constant(1.0).unwrap();
        let h = TestFunction::indicator(0.0, 1.0, 1.0).unwrap();
        assert!(lhs_main(&h, &e1(), &one, 1.0, 1.0, &cfg()).unwrap().is_infinite());
        assert!(lhs_sup(&h, &e1(), &one, 1.0, 1.0, &cfg()).unwrap().is_infinite());
    }

    #[test]
    fn ratio_conventions() {
        assert_eq!(ratio(0.0, 0.0), 1.0);
        assert!(ratio(1.0, 0.0).is_infinite());
        assert_eq!(ratio(1.0, 2.0), 0.5);
    }
}
