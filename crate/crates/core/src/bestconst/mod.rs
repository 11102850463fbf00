//! Lower bounds on the best constant by direct ratio maximization.
//!
//! The search space is nonnegative step functions on a log-uniform grid.
//! Both sides are 1-homogeneous in `h`, so the ascent uses multiplicative
//! coordinate moves and never needs a projection. Moves are scored with the
//! fast evaluators of [`fast`]; every reported number is recomputed with the
//! accurate functionals.

pub mod discrete;
mod fast;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covering::{build_covering, CoveringSequence};
use crate::error::{Error, Result};
use crate::functionals::{lhs_block, lhs_discrete_blocks, lhs_main, lhs_sup, log_breakpoints, ratio, rhs_norm, TestFunction};
use crate::quad::QuadConfig;
use crate::weights::{Exponents, WeightSpec};
use fast::{DiscreteEval, FastEval, FastRatio, MainEval, SupEval};

pub use discrete::{discrete_embedding_constant, lrho_norm};

/// Which left side is maximized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    /// The iterated inequality.
    Main,
    /// The supremum form, `( int u [sup_{s >= x} W(s)^{1/q} H(s)]^r )^{1/r}`.
    Sup,
    /// The block-discretized form over a covering sequence of `u`.
    Discrete,
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "main" => Ok(Target::Main),
            "sup" => Ok(Target::Sup),
            "discrete" => Ok(Target::Discrete),
            _ => Err(Error::Parse(format!("unknown target '{s}', expected main|sup|discrete"))),
        }
    }
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Target::Main => "main",
            Target::Sup => "sup",
            Target::Discrete => "discrete",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Number of log-uniform cells.
    pub cells: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub restarts: usize,
    /// Sweeps per step size.
    pub max_iters: usize,
    pub seed: u64,
    /// Multiplicative step sizes, coarse to fine; each is used with its inverse.
    pub steps: Vec<f64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { cells: 32, t_min: 1e-3, t_max: 1e3, restarts: 4, max_iters: 200, seed: 0, steps: vec![2.0, 1.1, 1.01] }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cells < 8 {
            return Err(Error::Config(format!("need at least 8 cells, got {}", self.cells)));
        }
        if !(self.t_min > 0.0 && self.t_max > self.t_min && self.t_max.is_finite()) {
            return Err(Error::Config(format!("need 0 < t_min < t_max < inf, got {} and {}", self.t_min, self.t_max)));
        }
        if self.restarts == 0 {
            return Err(Error::Config("need at least one restart".into()));
        }
        if self.steps.is_empty() || self.steps.iter().any(|&s| !(s > 1.0 && s.is_finite())) {
            return Err(Error::Config("step sizes must be finite and > 1".into()));
        }
        Ok(())
    }

    fn breakpoints(&self) -> Vec<f64> {
        log_breakpoints(self.cells, self.t_min, self.t_max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestConstantEstimate {
    /// Best ratio found; a lower bound on the best constant.
    pub value: f64,
    pub argmax_h: TestFunction,
    /// Accurate ratio reached by each restart, by restart index.
    pub trace: Vec<f64>,
    pub target: Target,
}

/// Relative improvement a move must achieve to be accepted.
const ACCEPT: f64 = 1e-12;
/// Value given to a zero cell when it is switched on, relative to the max.
const ACTIVATE: f64 = 1e-3;

/// Multiplicative coordinate ascent on `vals`; returns the final fast ratio.
fn ascend(fr: &FastRatio, vals: &mut [f64], steps: &[f64], max_iters: usize) -> f64 {
    let mut cur = fr.ratio(vals);
    if cur.is_infinite() {
        return cur;
    }
    for &s in steps {
        for _ in 0..max_iters {
            let mut improved = false;
            for i in 0..vals.len() {
                for f in [s, 1.0 / s] {
                    let old = vals[i];
                    vals[i] = if old == 0.0 {
                        if f < 1.0 {
                            continue;
                        }
                        ACTIVATE * vals.iter().copied().fold(0.0, f64::max)
                    } else {
                        old * f
                    };
                    if vals[i] == 0.0 {
                        vals[i] = old;
                        continue;
                    }
                    let val = fr.ratio(vals);
                    if val > cur * (1.0 + ACCEPT) {
                        cur = val;
                        improved = true;
                        break;
                    }
                    vals[i] = old;
                }
            }
            if !improved {
                break;
            }
        }
    }
    cur
}

/// Values of `h` at the cell midpoints of `bp` (geometric midpoints).
fn project(h: &TestFunction, bp: &[f64]) -> Vec<f64> {
    bp.windows(2).map(|c| h.eval((c[0] * c[1]).sqrt())).collect()
}

/// A covering of `u` whose blocks span `[t_min, t_max]`.
fn covering_for(u: &WeightSpec, t_min: f64, t_max: f64, cfg: &QuadConfig) -> Result<CoveringSequence> {
    let lo = u.integral(0.0, t_min).log2().floor() as i32 - 1;
    let hi = u.integral(0.0, t_max).log2().ceil() as i32 + 1;
    build_covering(u, lo.min(0), hi.max(0), true, cfg)
}

struct Problem<'a> {
    u: &'a WeightSpec,
    v: &'a WeightSpec,
    w: &'a WeightSpec,
    e: Exponents,
    target: Target,
    cs: Option<CoveringSequence>,
    cfg: &'a QuadConfig,
}

impl Problem<'_> {
    fn accurate_lhs(&self, h: &TestFunction) -> Result<f64> {
        let (q, r) = (self.e.q, self.e.r);
        match self.target {
            Target::Main => lhs_main(h, self.u, self.w, q, r, self.cfg),
            Target::Sup => lhs_sup(h, self.u, self.w, q, r, self.cfg),
            Target::Discrete => lhs_discrete_blocks(h, self.cs.as_ref().expect("built"), self.w, q, r, self.cfg),
        }
    }

    fn accurate_ratio(&self, h: &TestFunction) -> Result<f64> {
        let rhs = rhs_norm(h, self.v, self.e.p);
        if rhs == 0.0 {
            return Ok(0.0);
        }
        Ok(ratio(self.accurate_lhs(h)?, rhs))
    }

    fn fast(&self, bp: Vec<f64>) -> Result<FastRatio> {
        let (q, r) = (self.e.q, self.e.r);
        let eval = match self.target {
            Target::Main => FastEval::Main(MainEval::new(&bp, self.u, self.w, q, r, self.cfg)?),
            Target::Sup => FastEval::Sup(SupEval::new(&bp, self.u, self.w, q, r, self.cfg)?),
            Target::Discrete => {
                let blocks: Vec<(f64, f64, f64)> = self
                    .cs
                    .as_ref()
                    .expect("built")
                    .blocks()
                    .iter()
                    .map(|b| (b.a, b.b, 2f64.powf(b.k as f64 / r)))
                    .collect();
                FastEval::Discrete(DiscreteEval::new(&bp, &blocks, self.w, q, r))
            }
        };
        Ok(FastRatio::new(bp, eval, self.v, self.e.p))
    }
}

/// Maximizes `lhs_target(h) / (int h^p v)^{1/p}` over step functions on the
/// configured grid.
///
/// Starting points: the constant profile, every single-cell indicator and,
/// for each block of a covering of `u`, a profile maximizing the block's
/// Hardy ratio. Restart 0 refines the best starting point; restart `i > 0`
/// refines a randomly perturbed copy of the `i`-th best, seeded with
/// `seed + i`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_best_constant(
    u: &WeightSpec,
    v: &WeightSpec,
    w: &WeightSpec,
    e: &Exponents,
    target: Target,
    opt: &OptimizerConfig,
    cfg: &QuadConfig,
) -> Result<BestConstantEstimate> {
    estimate_best_constant_seeded(u, v, w, e, target, opt, cfg, &[])
}

/// As [`estimate_best_constant`], with extra starting points projected onto the grid.
#[allow(clippy::too_many_arguments)]
pub fn estimate_best_constant_seeded(
    u: &WeightSpec,
    v: &WeightSpec,
    w: &WeightSpec,
    e: &Exponents,
    target: Target,
    opt: &OptimizerConfig,
    cfg: &QuadConfig,
    extra: &[TestFunction],
) -> Result<BestConstantEstimate> {
    opt.validate()?;
    cfg.validate()?;
    let bp = opt.breakpoints();
    let n = opt.cells;
    let cs_u = covering_for(u, opt.t_min, opt.t_max, cfg)?;
    let cs = (target == Target::Discrete).then(|| cs_u.clone());
    let prob = Problem { u, v, w, e: *e, target, cs, cfg };
    let fr = prob.fast(bp.clone())?;

    let mut seeds: Vec<Vec<f64>> = vec![vec![1.0; n]];
    for i in 0..n {
        let mut s = vec![0.0; n];
        s[i] = 1.0;
        seeds.push(s);
    }
    seeds.extend(block_seeds(&cs_u, &bp, v, w, e, opt));
    seeds.extend(extra.iter().map(|h| project(h, &bp)));
    seeds.retain(|s| s.iter().any(|&x| x > 0.0));

    let mut scored: Vec<(f64, Vec<f64>)> = seeds.into_par_iter().map(|s| (fr.ratio(&s), s)).collect();
    // stable sort keeps generation order among ties
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    if scored.is_empty() || !(scored[0].0 > 0.0) {
        return Err(Error::DegenerateProblem);
    }

    let results: Vec<Result<(f64, TestFunction)>> = (0..opt.restarts)
        .into_par_iter()
        .map(|idx| {
            let mut vals = scored[idx % scored.len()].1.clone();
            if idx > 0 {
                let mut rng = ChaCha8Rng::seed_from_u64(opt.seed.wrapping_add(idx as u64));
                let top = vals.iter().copied().fold(0.0, f64::max);
                for x in vals.iter_mut() {
                    if *x == 0.0 {
                        if rng.gen_bool(0.25) {
                            *x = ACTIVATE * top * rng.gen_range(0.5..2.0);
                        }
                    } else {
                        *x *= rng.gen_range(-1.0f64..1.0).exp();
                    }
                }
            }
            ascend(&fr, &mut vals, &opt.steps, opt.max_iters);
            let h = TestFunction::new(bp.clone(), vals)?;
            Ok((prob.accurate_ratio(&h)?, h))
        })
        .collect();

    let mut trace = Vec::with_capacity(results.len());
    let mut best: Option<(f64, TestFunction)> = None;
    for res in results {
        let (val, h) = res?;
        trace.push(val);
        if best.as_ref().map_or(true, |(b, _)| val > *b) {
            best = Some((val, h));
        }
    }
    let (value, argmax_h) = best.expect("at least one restart");
    if !(value > 0.0) {
        return Err(Error::DegenerateProblem);
    }
    Ok(BestConstantEstimate { value, argmax_h, trace, target })
}

/// Block-extremal profiles for the covering blocks that meet the grid,
/// restricted to the grid cells inside each block.
fn block_seeds(
    cs: &CoveringSequence,
    bp: &[f64],
    v: &WeightSpec,
    w: &WeightSpec,
    e: &Exponents,
    opt: &OptimizerConfig,
) -> Vec<Vec<f64>> {
    let n = bp.len() - 1;
    let blocks: Vec<(usize, usize, f64, f64)> = cs
        .blocks()
        .iter()
        .filter_map(|b| {
            let lo = bp.partition_point(|&x| x < b.a);
            let hi = bp.partition_point(|&x| x <= b.b);
            // cells [lo, hi - 1) lie inside the block
            (hi >= lo + 2).then(|| (lo, hi - 1, b.a, b.b))
        })
        .collect();
    blocks
        .into_par_iter()
        .map(|(lo, hi, a, b)| {
            let sub = bp[lo..=hi].to_vec();
            let eval = DiscreteEval::new(&sub, &[(a, b, 1.0)], w, e.q, e.q);
            let fr = FastRatio::new(sub, FastEval::Discrete(eval), v, e.p);
            let mut vals = best_start(&fr);
            ascend(&fr, &mut vals, &opt.steps, opt.max_iters);
            let mut full = vec![0.0; n];
            full[lo..hi].copy_from_slice(&vals);
            full
        })
        .collect()
}

/// Best of the constant profile and the single-cell indicators.
fn best_start(fr: &FastRatio) -> Vec<f64> {
    let n = fr.cells();
    let mut best = vec![1.0; n];
    let mut best_val = fr.ratio(&best);
    for i in 0..n {
        let mut s = vec![0.0; n];
        s[i] = 1.0;
        let val = fr.ratio(&s);
        if val > best_val {
            best_val = val;
            best = s;
        }
    }
    best
}

/// `( int_a^b (int_a^t h)^q w )^{1/q} / ( int h^p v )^{1/p}`.
pub fn block_ratio(
    h: &TestFunction,
    v: &WeightSpec,
    w: &WeightSpec,
    p: f64,
    q: f64,
    interval: (f64, f64),
    cfg: &QuadConfig,
) -> Result<f64> {
    Ok(ratio(lhs_block(h, w, q, interval, cfg)?, rhs_norm(h, v, p)))
}

/// A step function supported in `(a, b)` with `int h^p v = 1` that
/// (approximately) maximizes the block Hardy ratio [`block_ratio`].
///
/// Unbounded ends are truncated six decades from the finite end.
pub fn block_extremizer(
    v: &WeightSpec,
    w: &WeightSpec,
    p: f64,
    q: f64,
    (a, b): (f64, f64),
    cells: usize,
) -> Result<TestFunction> {
    if !(a >= 0.0 && a < b) || cells == 0 {
        return Err(Error::Domain(format!("block ({a}, {b}) with {cells} cells")));
    }
    let (lo, hi) = match (a > 0.0, b.is_finite()) {
        (true, true) => (a, b),
        (false, true) => (b * 1e-6, b),
        (true, false) => (a, a * 1e6),
        (false, false) => (1e-3, 1e3),
    };
    let bp = log_breakpoints(cells, lo, hi);
    let mut vals = if w.integral(a, b) == 0.0 {
        vec![1.0; cells]
    } else {
        let eval = DiscreteEval::new(&bp, &[(a, b, 1.0)], w, q, q);
        let fr = FastRatio::new(bp.clone(), FastEval::Discrete(eval), v, p);
        let mut vals = best_start(&fr);
        let steps = [2.0, 1.1, 1.01, 1.001];
        ascend(&fr, &mut vals, &steps, 500);
        vals
    };
    let h = TestFunction::new(bp, vals.clone())?;
    let norm = rhs_norm(&h, v, p);
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::DegenerateProblem);
    }
    vals.iter_mut().for_each(|x| *x /= norm);
    h.with_values(vals)
}

#[cfg(test)]
mod tests;
