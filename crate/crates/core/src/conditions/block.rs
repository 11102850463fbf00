//! Hardy-type constants on single blocks and the discrete `A` family.

use rayon::prelude::*;
use serde::Serialize;

use super::{Constant, Family};
use crate::bestconst::discrete::lrho_norm;
use crate::covering::CoveringSequence;
use crate::error::{Error, Result};
use crate::grid::{increments_down, mul0, powf0, trapezoid, Grid};
use crate::quad::QuadConfig;
use crate::weights::{Exponents, Sigma, WeightSpec};

const BLOCK_NODES: usize = 512;

struct BlockData {
    grid: Grid,
    sigma: Vec<f64>,
    /// `int_{t_i}^b w`.
    upper: Vec<f64>,
    cells: Vec<f64>,
}

fn block_data(v: &WeightSpec, w: &WeightSpec, p: f64, (a, b): (f64, f64), cfg: &QuadConfig) -> Result<BlockData> {
    if !(a >= 0.0 && a < b) {
        return Err(Error::Domain(format!("block ({a}, {b}) is empty")));
    }
    let mut breaks = v.breakpoints();
    breaks.extend(w.breakpoints());
    let grid = Grid::new(a, b, &breaks, cfg, BLOCK_NODES);
    let sigma = grid.sigma(&Sigma::new(v, p));
    let tab = grid.tabulate(w.function(), w.tail_finite());
    let upper = tab.upper();
    Ok(BlockData { grid, sigma, upper, cells: tab.cells })
}

/// `sup_{x in (a,b)} (int_x^b w)^{1/q} sigma_p(a, x)`.
pub fn hardy_block_sup(v: &WeightSpec, w: &WeightSpec, p: f64, q: f64, interval: (f64, f64), cfg: &QuadConfig) -> Result<f64> {
    let d = block_data(v, w, p, interval, cfg)?;
    let vals: Vec<f64> = d.upper.iter().zip(&d.sigma).map(|(&u, &s)| mul0(powf0(u, 1.0 / q), s)).collect();
    Ok(d.grid.sup(&vals))
}

/// `( int_a^b (int_x^b w)^{q/(p-q)} w(x) sigma_p(a,x)^{pq/(p-q)} dx )^{(p-q)/(pq)}`, for `q < p`.
pub fn hardy_block_integral(
    v: &WeightSpec,
    w: &WeightSpec,
    p: f64,
    q: f64,
    interval: (f64, f64),
    cfg: &QuadConfig,
) -> Result<f64> {
    if q >= p {
        return Err(Error::Domain(format!("integral form needs q < p, got p = {p}, q = {q}")));
    }
    let d = block_data(v, w, p, interval, cfg)?;
    let g = &d.grid;
    let n = g.len();
    if d.upper[0].is_infinite() {
        return Ok(f64::INFINITY);
    }
    let beta = p * q / (p - q);
    let gexp = p / (p - q);
    let c = (p - q) / p;
    let f: Vec<f64> = d.sigma.iter().map(|&s| powf0(s, beta)).collect();
    let mu: Vec<f64> = increments_down(&d.upper, &d.cells, gexp).into_iter().map(|m| c * m).collect();
    let contrib = trapezoid(&f, &mu);
    let tail = if g.open_right {
        g.extrapolate_right(&contrib).max(mul0(f[n - 1], c * powf0(d.upper[n - 1], gexp)))
    } else {
        0.0
    };
    Ok(powf0(contrib.iter().sum::<f64>() + tail, 1.0 / beta))
}

/// Sup form for `p <= q`, integral form for `q < p`.
pub fn hardy_block_constant(
    v: &WeightSpec,
    w: &WeightSpec,
    p: f64,
    q: f64,
    interval: (f64, f64),
    cfg: &QuadConfig,
) -> Result<f64> {
    if p <= q {
        hardy_block_sup(v, w, p, q, interval, cfg)
    } else {
        hardy_block_integral(v, w, p, q, interval, cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ATerm {
    pub k: i32,
    /// `2^{k/r}` times the sup-form block constant.
    pub sup: f64,
    /// `2^{k/r}` times the integral-form block constant, when `q < p`.
    pub integral: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AReport {
    pub family: Family,
    pub terms: Vec<ATerm>,
    pub warnings: Vec<String>,
}

/// `A1`, `A2`: `l^rho` norms over the covering blocks of `2^{k/r}` times the
/// block constants on `[x_k, x_{k+1})`.
pub fn compute_a(cs: &CoveringSequence, v: &WeightSpec, w: &WeightSpec, e: &Exponents, cfg: &QuadConfig) -> Result<AReport> {
    let (p, q, r) = (e.p, e.q, e.r);
    let with_integral = q < p;
    let terms = cs
        .blocks()
        .par_iter()
        .map(|blk| {
            let scale = 2f64.powf(blk.k as f64 / r);
            let sup = mul0(scale, hardy_block_sup(v, w, p, q, (blk.a, blk.b), cfg)?);
            let integral = if with_integral {
                Some(mul0(scale, hardy_block_integral(v, w, p, q, (blk.a, blk.b), cfg)?))
            } else {
                None
            };
            Ok(ATerm { k: blk.k, sup, integral })
        })
        .collect::<Result<Vec<_>>>()?;

    let sups: Vec<f64> = terms.iter().map(|t| t.sup).collect();
    let a1 = lrho_norm(&sups, e.rho);
    let a2 = if with_integral {
        let ints: Vec<f64> = terms.iter().filter_map(|t| t.integral).collect();
        Constant::of(lrho_norm(&ints, e.rho))
    } else {
        Constant::undefined()
    };

    let mut warnings = Vec::new();
    let mut edges = vec![cs.k_min];
    if cs.m.is_none() {
        edges.push(terms.last().map_or(cs.k_min, |t| t.k));
    }
    for k in edges {
        let Some(t) = terms.iter().find(|t| t.k == k) else { continue };
        for (name, term, norm) in [("A1", t.sup, a1), ("A2", t.integral.unwrap_or(0.0), a2.value)] {
            if norm.is_finite() && norm > 0.0 && term > 0.01 * norm {
                warnings.push(format!("{name}: boundary block k = {k} carries more than 1% of the norm; widen the index range"));
            }
        }
    }
    let family = [("A1".to_string(), Constant::of(a1)), ("A2".to_string(), a2)].into_iter().collect();
    Ok(AReport { family, terms, warnings })
}
