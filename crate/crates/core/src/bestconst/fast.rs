//! Approximate left sides on a fixed step-function grid.
//!
//! Everything that does not depend on the step values is precomputed once:
//! a fine partition of every cell, Gauss-Legendre nodes with weight values
//! folded into the quadrature weights, and the masses beyond the grid. One
//! evaluation is then a few thousand multiply-adds and powers.

use crate::error::Result;
use crate::functionals::upper_power_tail;
use crate::grid::{mul0, powf0};
use crate::quad::{gauss_legendre, QuadConfig};
use crate::weights::WeightSpec;

use super::discrete::lrho_norm;

const GL_OUTER: usize = 6;
const GL_INNER: usize = 6;
const MAIN_SPLITS: usize = 4;
const SUP_SPLITS: usize = 24;
const DISCRETE_SPLITS: usize = 4;

/// Cell offsets `t - bp[cell]` and weighted quadrature coefficients.
#[derive(Debug, Clone, Default)]
struct Rule {
    cell: Vec<usize>,
    off: Vec<f64>,
    coef: Vec<f64>,
}

impl Rule {
    fn push(&mut self, cell: usize, off: f64, coef: f64) {
        self.cell.push(cell);
        self.off.push(off);
        self.coef.push(coef);
    }

    /// `sum coef * H^q`.
    fn apply(&self, st: &Steps<'_>, q: f64) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.coef.len() {
            let c = self.coef[j];
            if c != 0.0 {
                acc += c * powf0(st.h_at(self.cell[j], self.off[j]), q);
            }
        }
        acc
    }
}

/// Step values with their primitive at the breakpoints.
pub(crate) struct Steps<'a> {
    vals: &'a [f64],
    cum: Vec<f64>,
}

impl<'a> Steps<'a> {
    pub fn new(bp: &[f64], vals: &'a [f64]) -> Self {
        let mut cum = Vec::with_capacity(bp.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for i in 0..vals.len() {
            acc += vals[i] * (bp[i + 1] - bp[i]);
            cum.push(acc);
        }
        Self { vals, cum }
    }

    #[inline]
    fn h_at(&self, cell: usize, off: f64) -> f64 {
        self.cum[cell] + self.vals[cell] * off
    }

    fn total(&self) -> f64 {
        *self.cum.last().expect("non-empty")
    }
}

/// Fine partition `(cell, a, b)` of `[bp_0, bp_n]`: each cell split
/// geometrically into `splits` parts and further at `extra` points.
fn fine_partition(bp: &[f64], extra: &[f64], splits: usize) -> Vec<(usize, f64, f64)> {
    let mut out = Vec::new();
    for i in 0..bp.len() - 1 {
        let (a, b) = (bp[i], bp[i + 1]);
        let mut pts: Vec<f64> = (0..=splits).map(|j| a * (b / a).powf(j as f64 / splits as f64)).collect();
        pts[0] = a;
        pts[splits] = b;
        pts.extend(extra.iter().copied().filter(|&x| x > a && x < b));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        out.extend(pts.windows(2).map(|w| (i, w[0], w[1])));
    }
    out
}

fn gl_rule(rule: &mut Rule, gl: &(Vec<f64>, Vec<f64>), cell: usize, base: f64, a: f64, b: f64, weight: &WeightSpec) {
    let len = b - a;
    for (x, wt) in gl.0.iter().zip(&gl.1) {
        let t = a + x * len;
        rule.push(cell, t - base, wt * len * weight.value(t));
    }
}

/// `int_{t_max}^inf W^{r/q} u`, with `W = int_t^inf w`.
fn saturated(u: &WeightSpec, w: &WeightSpec, q: f64, r: f64, t_max: f64, cfg: &QuadConfig) -> Result<f64> {
    if !w.tail_finite() {
        return Ok(f64::INFINITY);
    }
    upper_power_tail(u, w, r / q, t_max, cfg)
}

/// Left side of the main inequality.
pub(crate) struct MainEval {
    q: f64,
    r: f64,
    /// Per sub-interval: full rule, outer `u`-coefficients and inner rules.
    subs: Vec<(Rule, Vec<f64>, Vec<Rule>)>,
    head_u: f64,
    w_end: f64,
    tail: f64,
}

impl MainEval {
    pub fn new(bp: &[f64], u: &WeightSpec, w: &WeightSpec, q: f64, r: f64, cfg: &QuadConfig) -> Result<Self> {
        let mut extra = u.breakpoints();
        extra.extend(w.breakpoints());
        let outer = gauss_legendre(GL_OUTER);
        let inner = gauss_legendre(GL_INNER);
        let mut subs = Vec::new();
        for (cell, a, b) in fine_partition(bp, &extra, MAIN_SPLITS) {
            let base = bp[cell];
            let mut full = Rule::default();
            gl_rule(&mut full, &inner, cell, base, a, b, w);
            let mut ucoef = Vec::with_capacity(GL_OUTER);
            let mut rules = Vec::with_capacity(GL_OUTER);
            for (x, wt) in outer.0.iter().zip(&outer.1) {
                let xg = a + x * (b - a);
                ucoef.push(wt * (b - a) * u.value(xg));
                let mut rule = Rule::default();
                gl_rule(&mut rule, &inner, cell, base, xg, b, w);
                rules.push(rule);
            }
            subs.push((full, ucoef, rules));
        }
        let t_max = *bp.last().expect("non-empty");
        Ok(Self {
            q,
            r,
            subs,
            head_u: u.integral(0.0, bp[0]),
            w_end: w.upper(t_max),
            tail: saturated(u, w, q, r, t_max, cfg)?,
        })
    }

    pub fn lhs(&self, st: &Steps<'_>) -> f64 {
        let (q, e) = (self.q, self.r / self.q);
        let hn = st.total();
        let mut big_i = mul0(powf0(hn, q), self.w_end);
        let mut total = mul0(powf0(hn, self.r), self.tail);
        for (full, ucoef, rules) in self.subs.iter().rev() {
            for (c, rule) in ucoef.iter().zip(rules) {
                total += c * powf0(big_i + rule.apply(st, q), e);
            }
            big_i += full.apply(st, q);
        }
        total += mul0(self.head_u, powf0(big_i, e));
        powf0(total, 1.0 / self.r)
    }
}

/// Left side of the supremum inequality.
pub(crate) struct SupEval {
    r: f64,
    cell: Vec<usize>,
    off: Vec<f64>,
    /// `W^{1/q}` at the nodes.
    wq: Vec<f64>,
    /// `u`-mass between consecutive nodes.
    umass: Vec<f64>,
    head_u: f64,
    tail: f64,
}

impl SupEval {
    pub fn new(bp: &[f64], u: &WeightSpec, w: &WeightSpec, q: f64, r: f64, cfg: &QuadConfig) -> Result<Self> {
        let mut extra = u.breakpoints();
        extra.extend(w.breakpoints());
        let parts = fine_partition(bp, &extra, SUP_SPLITS);
        let mut cell = Vec::with_capacity(parts.len() + 1);
        let mut off = Vec::with_capacity(parts.len() + 1);
        let mut nodes = Vec::with_capacity(parts.len() + 1);
        for &(c, a, _) in &parts {
            cell.push(c);
            off.push(a - bp[c]);
            nodes.push(a);
        }
        let n = bp.len() - 1;
        let t_max = bp[n];
        cell.push(n - 1);
        off.push(t_max - bp[n - 1]);
        nodes.push(t_max);
        let mut big_w = vec![0.0; nodes.len()];
        let last = nodes.len() - 1;
        big_w[last] = w.upper(t_max);
        for i in (0..last).rev() {
            big_w[i] = big_w[i + 1] + w.integral(nodes[i], nodes[i + 1]);
        }
        let wq = big_w.iter().map(|&x| powf0(x, 1.0 / q)).collect();
        let umass = nodes.windows(2).map(|p| u.integral(p[0], p[1])).collect();
        Ok(Self {
            r,
            cell,
            off,
            wq,
            umass,
            head_u: u.integral(0.0, bp[0]),
            tail: saturated(u, w, q, r, t_max, cfg)?,
        })
    }

    pub fn lhs(&self, st: &Steps<'_>) -> f64 {
        let r = self.r;
        let n = self.wq.len();
        let mut cur = 0.0f64;
        let mut prev = 0.0;
        let mut total = mul0(powf0(st.total(), r), self.tail);
        for i in (0..n).rev() {
            cur = cur.max(mul0(self.wq[i], st.h_at(self.cell[i], self.off[i])));
            let s = powf0(cur, r);
            if i + 1 < n {
                total += 0.5 * (s + prev) * self.umass[i];
            }
            prev = s;
        }
        total += mul0(self.head_u, prev);
        powf0(total, 1.0 / r)
    }
}

/// `|| { c_k ( int_{a_k}^{b_k} (H(t) - H(a_k))^q w(t) dt )^{1/q} } ||_{l^r}`.
pub(crate) struct DiscreteEval {
    q: f64,
    r: f64,
    blocks: Vec<DiscreteBlock>,
}

struct DiscreteBlock {
    c: f64,
    /// Where `a_k` sits: before the grid, in a cell, or past it.
    start: Anchor,
    rule: Rule,
    /// `int w` over the part of the block past the grid.
    beyond: f64,
}

enum Anchor {
    Before,
    Cell(usize, f64),
    After,
}

impl DiscreteEval {
    /// `blocks` are `(a_k, b_k, c_k)`; `b_k` may be infinite.
    pub fn new(bp: &[f64], blocks: &[(f64, f64, f64)], w: &WeightSpec, q: f64, r: f64) -> Self {
        let n = bp.len() - 1;
        let (t_min, t_max) = (bp[0], bp[n]);
        let mut extra = w.breakpoints();
        extra.extend(blocks.iter().flat_map(|&(a, b, _)| [a, b]));
        let parts = fine_partition(bp, &extra, DISCRETE_SPLITS);
        let gl = gauss_legendre(GL_INNER);
        let blocks = blocks
            .iter()
            .map(|&(a, b, c)| {
                let start = if a < t_min {
                    Anchor::Before
                } else if a >= t_max {
                    Anchor::After
                } else {
                    let i = bp.partition_point(|&x| x <= a) - 1;
                    Anchor::Cell(i, a - bp[i])
                };
                let mut rule = Rule::default();
                for &(cell, lo, hi) in &parts {
                    if lo >= a && hi <= b {
                        gl_rule(&mut rule, &gl, cell, bp[cell], lo, hi, w);
                    }
                }
                let beyond = if b > t_max { w.integral(a.max(t_max), b) } else { 0.0 };
                DiscreteBlock { c, start, rule, beyond }
            })
            .collect();
        Self { q, r, blocks }
    }

    pub fn lhs(&self, st: &Steps<'_>) -> f64 {
        let q = self.q;
        let hn = st.total();
        let terms: Vec<f64> = self
            .blocks
            .iter()
            .map(|blk| {
                let h0 = match blk.start {
                    Anchor::Before => 0.0,
                    Anchor::Cell(i, off) => st.h_at(i, off),
                    Anchor::After => hn,
                };
                let mut j = mul0(powf0((hn - h0).max(0.0), q), blk.beyond);
                for k in 0..blk.rule.coef.len() {
                    let d = st.h_at(blk.rule.cell[k], blk.rule.off[k]) - h0;
                    if d > 0.0 {
                        j += blk.rule.coef[k] * d.powf(q);
                    }
                }
                mul0(blk.c, powf0(j, 1.0 / q))
            })
            .collect();
        lrho_norm(&terms, self.r)
    }
}

pub(crate) enum FastEval {
    Main(MainEval),
    Sup(SupEval),
    Discrete(DiscreteEval),
}

/// Approximate ratio `lhs / rhs` on a fixed grid.
pub(crate) struct FastRatio {
    pub bp: Vec<f64>,
    eval: FastEval,
    vmass: Vec<f64>,
    p: f64,
}

impl FastRatio {
    pub fn new(bp: Vec<f64>, eval: FastEval, v: &WeightSpec, p: f64) -> Self {
        let vmass = bp.windows(2).map(|c| v.integral(c[0], c[1])).collect();
        Self { bp, eval, vmass, p }
    }

    pub fn cells(&self) -> usize {
        self.vmass.len()
    }

    pub fn rhs(&self, vals: &[f64]) -> f64 {
        let s: f64 = vals.iter().zip(&self.vmass).map(|(&h, &m)| mul0(powf0(h, self.p), m)).sum();
        powf0(s, 1.0 / self.p)
    }

    pub fn lhs(&self, vals: &[f64]) -> f64 {
        let st = Steps::new(&self.bp, vals);
        match &self.eval {
            FastEval::Main(e) => e.lhs(&st),
            FastEval::Sup(e) => e.lhs(&st),
            FastEval::Discrete(e) => e.lhs(&st),
        }
    }

    /// `0` for the zero function.
    pub fn ratio(&self, vals: &[f64]) -> f64 {
        let rhs = self.rhs(vals);
        if rhs == 0.0 {
            return 0.0;
        }
        let v = self.lhs(vals) / rhs;
        if v.is_nan() {
            0.0
        } else {
            v
        }
    }
}
