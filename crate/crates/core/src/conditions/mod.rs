//! Characterization constants and regime bookkeeping.
//!
//! All constants are evaluated on one log-uniform grid per problem. Suprema
//! are grid suprema with boundary-growth detection; the integral constants
//! are Stieltjes sums against exact increments of the relevant cumulative
//! integrals, with geometric extrapolation past the truncated ends.

mod block;

use std::collections::BTreeMap;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::covering::CoveringSequence;
use crate::error::Result;
use crate::grid::{increments_down, increments_up, mul0, pow_inc, powf0, right_cumulative, trapezoid, Grid, Tab};
use crate::quad::{grid_sup, QuadConfig};
use crate::weights::{Exponents, Regime, Sigma, WeightSpec};

pub use crate::weights::classify_regime;
pub use block::{compute_a, hardy_block_constant, hardy_block_integral, hardy_block_sup, AReport};

/// A computed constant. `defined` is false when the exponents fall outside
/// the formula's range (for example `r >= p` for an exponent `pr/(p-r)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant {
    pub value: f64,
    pub defined: bool,
}

impl Constant {
    pub fn of(value: f64) -> Self {
        Self { value, defined: true }
    }

    pub fn undefined() -> Self {
        Self { value: f64::NAN, defined: false }
    }

    pub fn finite(&self) -> bool {
        self.defined && self.value.is_finite()
    }

    fn when(cond: bool, f: impl FnOnce() -> f64) -> Self {
        if cond {
            Self::of(f())
        } else {
            Self::undefined()
        }
    }
}

impl Serialize for Constant {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Constant", 3)?;
        st.serialize_field("value", &if self.finite() { Some(self.value) } else { None })?;
        st.serialize_field("finite", &self.finite())?;
        st.serialize_field("defined", &self.defined)?;
        st.end()
    }
}

/// Named constants of one family, e.g. `F1..F6`.
pub type Family = BTreeMap<String, Constant>;

fn family<const N: usize>(prefix: &str, items: [Constant; N]) -> Family {
    items.into_iter().enumerate().map(|(i, c)| (format!("{prefix}{}", i + 1), c)).collect()
}

/// The non-increasing factor in the supremum-operator inequality.
pub enum Factor<'a> {
    /// `(int_y^inf w)^{1/q}`.
    UpperPower { w: &'a WeightSpec, q: f64 },
    /// An arbitrary factor with its discontinuities.
    Function { f: &'a (dyn Fn(f64) -> f64 + Sync), breaks: Vec<f64> },
}

impl Factor<'_> {
    fn breaks(&self) -> Vec<f64> {
        match self {
            Factor::UpperPower { w, .. } => w.breakpoints(),
            Factor::Function { breaks, .. } => breaks.clone(),
        }
    }
}

/// Shared grid, `sigma_p(0, t_i)` and flags for one `(v, p)` pair.
const SIGMA_CAP: f64 = 1e30;

struct Ctx {
    grid: Grid,
    sigma: Vec<f64>,
    sigma_infinite: bool,
}

impl Ctx {
    fn new(weights: &[&WeightSpec], extra_breaks: &[f64], v: &WeightSpec, p: f64, cfg: &QuadConfig) -> Self {
        let mut breaks: Vec<f64> = weights.iter().flat_map(|w| w.breakpoints()).collect();
        breaks.extend_from_slice(extra_breaks);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut grid = Grid::new(0.0, f64::INFINITY, &breaks, cfg, 64);
        let mut sigma = grid.sigma(&Sigma::new(v, p));
        let sigma_infinite = sigma[0].is_infinite();
        // Past SIGMA_CAP the products with sigma lose their scale to
        // overflow; the edge tests and extrapolation take over from there.
        if !sigma_infinite {
            if let Some(j) = sigma.iter().position(|&x| !(x <= SIGMA_CAP)) {
                if grid.s[j - 1] - grid.s[0] >= 4.0 {
                    grid.truncate_right(j);
                    sigma.truncate(j);
                }
            }
        }
        Self { grid, sigma, sigma_infinite }
    }
}

/// `C1..C4` on a prepared grid; `phi` is the factor at the nodes.
fn c_family(ctx: &Ctx, phi: &[f64], wo: &Tab, p: f64, r: f64) -> [Constant; 4] {
    let g = &ctx.grid;
    let sigma = &ctx.sigma;
    let n = g.len();
    let big_phi = cummax_right(phi);
    let wo_low = wo.lower();

    let c1_vals: Vec<f64> = (0..n).map(|i| mul0(mul0(powf0(wo_low[i], 1.0 / r), big_phi[i]), sigma[i])).collect();
    let c1 = g.sup(&c1_vals);

    let phir: Vec<f64> = big_phi.iter().map(|&x| powf0(x, r)).collect();
    let v_contrib = trapezoid(&phir, &wo.cells);
    let v_tail = if g.open_right && wo.tail > 0.0 && phir[n - 1] > 0.0 {
        g.extrapolate_right(&v_contrib).min(phir[n - 1] * wo.tail)
    } else {
        0.0
    };
    let big_v = right_cumulative(&v_contrib, v_tail);
    let c2_vals: Vec<f64> = (0..n).map(|i| mul0(powf0(big_v[i], 1.0 / r), sigma[i])).collect();
    let c2 = g.sup(&c2_vals);

    let defined = r < p;
    let c3 = Constant::when(defined, || {
        let beta = p * r / (p - r);
        let gexp = p / (p - r);
        let c = (p - r) / p;
        let prod: Vec<f64> = (0..n).map(|i| mul0(big_phi[i], sigma[i])).collect();
        if grid_sup(&prod, &g.s, false, g.open_right).is_infinite() {
            return f64::INFINITY;
        }
        let s = cummax_right(&prod);
        let f: Vec<f64> = s.iter().map(|&x| powf0(x, beta)).collect();
        let mu: Vec<f64> = increments_up(&wo_low, &wo.cells, gexp).into_iter().map(|m| c * m).collect();
        let contrib = trapezoid(&f, &mu);
        let head = if g.open_left {
            g.extrapolate_left(&contrib).max(mul0(f[0], c * powf0(wo_low[0], gexp)))
        } else {
            0.0
        };
        let tail = if g.open_right { g.extrapolate_right(&contrib) } else { 0.0 };
        powf0(head + contrib.iter().sum::<f64>() + tail, 1.0 / beta)
    });
    let c4 = Constant::when(defined, || {
        let beta = p * r / (p - r);
        let gexp = p / (p - r);
        let c = (p - r) / p;
        let f: Vec<f64> = sigma.iter().map(|&x| powf0(x, beta)).collect();
        let mu: Vec<f64> = increments_down(&big_v, &v_contrib, gexp).into_iter().map(|m| c * m).collect();
        let contrib = trapezoid(&f, &mu);
        let head = if g.open_left {
            let v_head = mul0(phir[0], wo.head);
            g.extrapolate_left(&contrib).min(mul0(f[0], c * pow_inc(big_v[0], v_head, gexp)))
        } else {
            0.0
        };
        let tail = if g.open_right {
            g.extrapolate_right(&contrib).max(mul0(f[n - 1], c * powf0(big_v[n - 1], gexp)))
        } else {
            0.0
        };
        powf0(head + contrib.iter().sum::<f64>() + tail, 1.0 / beta)
    });
    [Constant::of(c1), Constant::of(c2), c3, c4]
}

fn cummax_right(x: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    for i in (0..out.len().saturating_sub(1)).rev() {
        out[i] = out[i].max(out[i + 1]);
    }
    out
}

fn all_infinite<const N: usize>(defined: [bool; N]) -> [Constant; N] {
    defined.map(|d| if d { Constant::of(f64::INFINITY) } else { Constant::undefined() })
}

fn factor_nodes(factor: &Factor<'_>, ctx: &Ctx) -> Vec<f64> {
    match factor {
        Factor::UpperPower { w, q } => {
            let tab = ctx.grid.tabulate(w.function(), w.tail_finite());
            tab.upper().into_iter().map(|x| powf0(x, 1.0 / q)).collect()
        }
        Factor::Function { f, .. } => ctx.grid.t.iter().map(|&t| f(t)).collect(),
    }
}

fn c_from_ctx(ctx: &Ctx, factor: &Factor<'_>, w_outer: &WeightSpec, p: f64, r: f64) -> [Constant; 4] {
    let defined = [true, true, r < p, r < p];
    if ctx.sigma_infinite {
        return all_infinite(defined);
    }
    if let Factor::UpperPower { w, .. } = factor {
        if !w.tail_finite() {
            return all_infinite(defined);
        }
    }
    let phi = factor_nodes(factor, ctx);
    let wo = ctx.grid.tabulate(w_outer.function(), w_outer.tail_finite());
    c_family(ctx, &phi, &wo, p, r)
}

/// `C1..C4` of the supremum-operator inequality
/// `( int [ sup_{y >= x} phi(y) int_0^y g ]^r w_outer(x) dx )^{1/r} <= C ( int g^p v )^{1/p}`.
pub fn compute_c_sup(
    factor: &Factor<'_>,
    w_outer: &WeightSpec,
    v: &WeightSpec,
    p: f64,
    r: f64,
    cfg: &QuadConfig,
) -> Result<Family> {
    let ctx = Ctx::new(&[w_outer, v], &factor.breaks(), v, p, cfg);
    Ok(family("C", c_from_ctx(&ctx, factor, w_outer, p, r)))
}

/// `D1..D4`: the supremum-operator constants with `phi = W^{1/q}` and `w_outer = u`.
pub fn compute_d(u: &WeightSpec, v: &WeightSpec, w: &WeightSpec, e: &Exponents, cfg: &QuadConfig) -> Result<Family> {
    let ctx = Ctx::new(&[u, v, w], &[], v, e.p, cfg);
    Ok(family("D", d_values(&ctx, u, w, e)))
}

fn d_values(ctx: &Ctx, u: &WeightSpec, w: &WeightSpec, e: &Exponents) -> [Constant; 4] {
    c_from_ctx(ctx, &Factor::UpperPower { w, q: e.q }, u, e.p, e.r)
}

/// `F5`, `F6`.
fn f56(ctx: &Ctx, u: &WeightSpec, w: &WeightSpec, e: &Exponents) -> [Constant; 2] {
    let (p, q, r) = (e.p, e.q, e.r);
    let defined = [q < p, q < p && r < p];
    if ctx.sigma_infinite || !w.tail_finite() {
        return all_infinite(defined);
    }
    if !defined[0] {
        return [Constant::undefined(), Constant::undefined()];
    }
    let g = &ctx.grid;
    let n = g.len();
    let wt = g.tabulate(w.function(), true);
    let ut = g.tabulate(u.function(), u.tail_finite());
    let big_w = wt.upper();
    let big_u = ut.lower();
    let beta = p * q / (p - q);
    let gexp = p / (p - q);
    let c = (p - q) / p;
    let f: Vec<f64> = ctx.sigma.iter().map(|&x| powf0(x, beta)).collect();
    let mu: Vec<f64> = increments_down(&big_w, &wt.cells, gexp).into_iter().map(|m| c * m).collect();
    let contrib = trapezoid(&f, &mu);
    let psi_tail = if g.open_right {
        g.extrapolate_right(&contrib).max(mul0(f[n - 1], c * powf0(big_w[n - 1], gexp)))
    } else {
        0.0
    };
    let psi = right_cumulative(&contrib, psi_tail);
    let f5_vals: Vec<f64> = (0..n).map(|i| mul0(powf0(big_u[i], 1.0 / r), powf0(psi[i], 1.0 / beta))).collect();
    let f5 = Constant::of(g.sup(&f5_vals));
    let f6 = Constant::when(defined[1], || {
        let gamma = r * (p - q) / (q * (p - r));
        let beta_r = p * r / (p - r);
        let g_r = p / (p - r);
        let c_r = (p - r) / p;
        let f: Vec<f64> = psi.iter().map(|&x| powf0(x, gamma)).collect();
        let mu: Vec<f64> = increments_up(&big_u, &ut.cells, g_r).into_iter().map(|m| c_r * m).collect();
        let contrib = trapezoid(&f, &mu);
        let head = if g.open_left {
            g.extrapolate_left(&contrib).max(mul0(f[0], c_r * powf0(big_u[0], g_r)))
        } else {
            0.0
        };
        let tail = if g.open_right { g.extrapolate_right(&contrib) } else { 0.0 };
        powf0(head + contrib.iter().sum::<f64>() + tail, 1.0 / beta_r)
    });
    [f5, f6]
}

fn f_from(d: &[Constant; 4], f56: &[Constant; 2]) -> [Constant; 6] {
    [d[0], d[1], d[2], d[3], f56[0], f56[1]]
}

fn b_from(f: &[Constant; 6]) -> [Constant; 4] {
    // B2 takes the essential supremum over (t, inf) where F3 takes the
    // supremum over [t, inf); on right-continuous samples of piecewise
    // continuous data the two agree node by node.
    [f[0], f[2], f[4], f[5]]
}

/// `F1..F6`.
pub fn compute_f(u: &WeightSpec, v: &WeightSpec, w: &WeightSpec, e: &Exponents, cfg: &QuadConfig) -> Result<Family> {
    let ctx = Ctx::new(&[u, v, w], &[], v, e.p, cfg);
    let (d, f56) = rayon::join(|| d_values(&ctx, u, w, e), || f56(&ctx, u, w, e));
    Ok(family("F", f_from(&d, &f56)))
}

/// `B1..B4`.
pub fn compute_b(u: &WeightSpec, v: &WeightSpec, w: &WeightSpec, e: &Exponents, cfg: &QuadConfig) -> Result<Family> {
    let ctx = Ctx::new(&[u, v, w], &[], v, e.p, cfg);
    let (d, f56) = rayon::join(|| d_values(&ctx, u, w, e), || f56(&ctx, u, w, e));
    Ok(family("B", b_from(&f_from(&d, &f56))))
}

/// Names of the pair whose sum governs the regime.
pub fn combined_pair(regime: Regime) -> [&'static str; 2] {
    match regime {
        Regime::A => ["F1", "F2"],
        Regime::B => ["F3", "F4"],
        Regime::C => ["F2", "F5"],
        Regime::D => ["F4", "F6"],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub exponents: Exponents,
    pub regime: Regime,
    #[serde(rename = "F")]
    pub f: Family,
    #[serde(rename = "D")]
    pub d: Family,
    #[serde(rename = "B")]
    pub b: Family,
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    pub a: Option<Family>,
    #[serde(rename = "C_sup")]
    pub c_sup: Family,
    pub combined_pair: [&'static str; 2],
    pub combined: Constant,
    pub warnings: Vec<String>,
}

/// Sum of the regime's pair; `inf` if either member is infinite.
pub fn combined_constant(report: &ConditionReport) -> f64 {
    let [a, b] = combined_pair(report.regime);
    let x = report.f.get(a).map_or(f64::NAN, |c| c.value);
    let y = report.f.get(b).map_or(f64::NAN, |c| c.value);
    x + y
}

/// Every family at once; `A` only when a covering sequence is given.
pub fn conditions_report(
    u: &WeightSpec,
    v: &WeightSpec,
    w: &WeightSpec,
    e: &Exponents,
    cs: Option<&CoveringSequence>,
    cfg: &QuadConfig,
) -> Result<ConditionReport> {
    let ctx = Ctx::new(&[u, v, w], &[], v, e.p, cfg);
    let ((d, f56), a) = rayon::join(
        || rayon::join(|| d_values(&ctx, u, w, e), || f56(&ctx, u, w, e)),
        || cs.map(|cs| compute_a(cs, v, w, e, cfg)).transpose(),
    );
    let a = a?;
    let f = f_from(&d, &f56);
    let b = b_from(&f);
    let mut warnings = Vec::new();
    if let Some(rep) = &a {
        warnings.extend(rep.warnings.iter().cloned());
    }
    let mut report = ConditionReport {
        exponents: *e,
        regime: e.regime,
        f: family("F", f),
        d: family("D", d),
        b: family("B", b),
        a: a.map(|r| r.family),
        c_sup: family("C", d),
        combined_pair: combined_pair(e.regime),
        combined: Constant::of(f64::NAN),
        warnings,
    };
    report.combined = Constant::of(combined_constant(&report));
    Ok(report)
}

#[cfg(test)]
mod tests;
