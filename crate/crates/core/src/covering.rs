//! Dyadic covering sequences: points with `int_0^{x_k} u = 2^k`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{integrate, solve_monotone, QuadConfig, SolveTol};
use crate::weights::WeightSpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveringSequence {
    pub k_min: i32,
    /// `x_k` for `k = k_min, k_min + 1, ...`.
    pub points: Vec<f64>,
    /// Terminal index when the total mass is finite; then `x_{M+1} = inf`.
    pub m: Option<i32>,
    pub total_mass: f64,
    /// Set when the total mass was exactly `2^M` and index `M` was dropped.
    pub dropped_degenerate: bool,
}

/// A block `[a, b)` with its index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Block {
    pub k: i32,
    pub a: f64,
    pub b: f64,
}

impl CoveringSequence {
    pub fn k_last(&self) -> i32 {
        self.k_min + self.points.len() as i32 - 1
    }

    pub fn point(&self, k: i32) -> Option<f64> {
        if k < self.k_min {
            return None;
        }
        let i = (k - self.k_min) as usize;
        match self.points.get(i) {
            Some(&x) => Some(x),
            None if self.m.is_some() && k == self.k_last() + 1 => Some(f64::INFINITY),
            None => None,
        }
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i32> {
        self.k_min..=self.k_last()
    }

    /// Blocks `[x_k, x_{k+1})`. With finite mass the last block reaches
    /// infinity; otherwise the last stored point only closes a block.
    pub fn blocks(&self) -> Vec<Block> {
        let mut out: Vec<Block> = self
            .points
            .windows(2)
            .enumerate()
            .map(|(i, w)| Block { k: self.k_min + i as i32, a: w[0], b: w[1] })
            .collect();
        if self.m.is_some() {
            out.push(Block { k: self.k_last(), a: *self.points.last().expect("non-empty"), b: f64::INFINITY });
        }
        out
    }
}

/// Relative tolerance for declaring the total mass a power of two.
const DEGENERATE_TOL: f64 = 1e-12;

/// Builds `x_k` for `k = k_min ..= M` (finite mass) or `k_min ..= k_max_hint`.
///
/// A total mass equal to `2^M` is rejected unless `allow_degenerate`, in
/// which case `M` is lowered by one and `x_M` becomes the terminal `inf`.
pub fn build_covering(
    u: &WeightSpec,
    k_min: i32,
    k_max_hint: i32,
    allow_degenerate: bool,
    _cfg: &QuadConfig,
) -> Result<CoveringSequence> {
    if !(k_min <= 0 && 0 <= k_max_hint) {
        return Err(Error::Config(format!("need k_min <= 0 <= k_max, got {k_min}, {k_max_hint}")));
    }
    let total = u.total_mass();
    let mut dropped = false;
    let (k_last, m) = if total.is_finite() {
        let mut m = total.log2().floor() as i32;
        while pow2(m) > total {
            m -= 1;
        }
        while pow2(m + 1) <= total {
            m += 1;
        }
        if (total - pow2(m)).abs() <= DEGENERATE_TOL * total {
            if !allow_degenerate {
                return Err(Error::DegenerateMass { total, m });
            }
            m -= 1;
            dropped = true;
        }
        if m < k_min {
            return Err(Error::Config(format!("total mass {total} is below 2^k_min = 2^{k_min}")));
        }
        (m, Some(m))
    } else {
        (k_max_hint, None)
    };

    let tol = SolveTol { rel: 1e-15, abs: 1e-300, max_iter: 2000 };
    let f = |x: f64| if x <= 0.0 { 0.0 } else { u.integral(0.0, x) };
    let mut points = Vec::with_capacity((k_last - k_min + 1) as usize);
    let mut lo_hint = 0.0;
    for k in k_min..=k_last {
        let target = pow2(k);
        let (lo, hi) = bracket(&f, target, lo_hint)?;
        let x = solve_monotone(&f, target, (lo, hi), tol)?;
        points.push(x);
        lo_hint = x;
    }
    Ok(CoveringSequence { k_min, points, m, total_mass: total, dropped_degenerate: dropped })
}

fn pow2(k: i32) -> f64 {
    2f64.powi(k)
}

fn bracket<F: Fn(f64) -> f64>(f: &F, target: f64, lo_hint: f64) -> Result<(f64, f64)> {
    let t_min = 1e-300;
    let mut lo = if lo_hint > 0.0 { lo_hint } else { 1.0 };
    let mut hi = lo.max(1.0);
    for _ in 0..2100 {
        if f(lo) <= target {
            break;
        }
        hi = lo;
        lo *= 0.5;
        if lo < t_min {
            return Err(Error::Bracket { lo, hi, f_lo: f(lo), f_hi: f(hi), target });
        }
    }
    for _ in 0..2100 {
        if f(hi) >= target {
            return Ok((lo, hi));
        }
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            break;
        }
    }
    Err(Error::Bracket { lo, hi, f_lo: f(lo), f_hi: f(hi), target })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemarkCheck {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockCheck {
    pub k: i32,
    pub a: f64,
    pub b: f64,
    /// `int_{x_{k-1}}^{x_k} u`.
    pub integral: f64,
    /// `integral / 2^{k-1}`.
    pub ratio: f64,
    pub pass: bool,
    pub remark: Option<RemarkCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveringValidation {
    pub blocks: Vec<BlockCheck>,
    pub all_pass: bool,
}

/// Tolerance of the telescoping check.
pub const TELESCOPE_TOL: f64 = 1e-8;

/// Checks `int_{x_{k-1}}^{x_k} u = 2^{k-1}` for every stored `k > k_min`
/// and, when `pr = Some((p, r))` with `r < p`, that
/// `int_{x_{k-1}}^{x_k} (int_0^t u)^{r/(p-r)} u(t) dt` lies in
/// `[(p-r)/p 2^{(k-1)p/(p-r)} (1 - 2^{-p/(p-r)}), (p-r)/p 2^{kp/(p-r)}]`.
pub fn validate_covering(
    cs: &CoveringSequence,
    u: &WeightSpec,
    pr: Option<(f64, f64)>,
    cfg: &QuadConfig,
) -> Result<CoveringValidation> {
    let tight = cfg.tightened(1e-3);
    let breaks = u.breakpoints();
    let mut blocks = Vec::new();
    for k in cs.k_min + 1..=cs.k_last() {
        let a = cs.point(k - 1).expect("stored");
        let b = cs.point(k).expect("stored");
        let integral = u.integral(a, b);
        let expect = pow2(k - 1);
        let ratio = integral / expect;
        let mut pass = (ratio - 1.0).abs() <= TELESCOPE_TOL;
        let remark = match pr {
            Some((p, r)) if r < p => {
                let e = r / (p - r);
                let value = integrate(|t| u.integral(0.0, t).powf(e) * u.value(t), a, b, &breaks, &tight)?;
                let c = (p - r) / p;
                let g = p / (p - r);
                let lower = c * 2f64.powf((k - 1) as f64 * g) * (1.0 - 2f64.powf(-g));
                let upper = c * 2f64.powf(k as f64 * g);
                let slack = 1e-9 * upper;
                let ok = value >= lower - slack && value <= upper + slack;
                pass &= ok;
                Some(RemarkCheck { value, lower, upper, pass: ok })
            }
            _ => None,
        };
        blocks.push(BlockCheck { k, a, b, integral, ratio, pass, remark });
    }
    let all_pass = blocks.iter().all(|b| b.pass);
    Ok(CoveringValidation { blocks, all_pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    #[test]
    fn constant_weight_gives_powers_of_two() {
        let u = WeightSpec::constant(1.0).unwrap();
        let cs = build_covering(&u, -3, 4, false, &cfg()).unwrap();
        assert_eq!(cs.m, None);
        for k in cs.indices() {
            assert_relative_eq!(cs.point(k).unwrap(), 2f64.powi(k), max_relative = 1e-14);
        }
        assert_eq!(cs.blocks().len(), 7);
    }

    #[test]
    fn three_exp_closed_form() {
        let u = WeightSpec::exp_scaled(3.0, 0.0, 1.0).unwrap();
        let cs = build_covering(&u, -20, 0, false, &cfg()).unwrap();
        assert_eq!(cs.m, Some(1));
        assert_relative_eq!(cs.point(1).unwrap(), 3f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(cs.point(0).unwrap(), 1.5f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(cs.point(-1).unwrap(), 1.2f64.ln(), max_relative = 1e-12);
        assert_eq!(cs.point(2), Some(f64::INFINITY));
        assert_eq!(cs.blocks().last().unwrap().b, f64::INFINITY);
    }

    #[test]
    fn unit_mass_is_degenerate() {
        let u = WeightSpec::exp_scaled(1.0, 0.0, 1.0).unwrap();
        let err = build_covering(&u, -5, 0, false, &cfg()).unwrap_err();
        assert!(matches!(err, Error::DegenerateMass { m: 0, .. }));
        let cs = build_covering(&u, -5, 0, true, &cfg()).unwrap();
        assert_eq!(cs.m, Some(-1));
        assert!(cs.dropped_degenerate);
        assert_relative_eq!(cs.point(-1).unwrap(), 2f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn validation_examples() {
        let u = WeightSpec::constant(1.0).unwrap();
        let cs = build_covering(&u, -4, 4, false, &cfg()).unwrap();
        let rep = validate_covering(&cs, &u, Some((2.0, 1.0)), &cfg()).unwrap();
        assert!(rep.all_pass);
        let b0 = rep.blocks.iter().find(|b| b.k == 0).unwrap();
        assert_relative_eq!(b0.integral, 0.5, max_relative = 1e-14);
        assert_relative_eq!(b0.remark.as_ref().unwrap().value, 3.0 / 8.0, max_relative = 1e-10);

        let u3 = WeightSpec::exp_scaled(3.0, 0.0, 1.0).unwrap();
        let cs = build_covering(&u3, -6, 0, false, &cfg()).unwrap();
        let rep = validate_covering(&cs, &u3, None, &cfg()).unwrap();
        let b1 = rep.blocks.iter().find(|b| b.k == 1).unwrap();
        assert_relative_eq!(b1.integral, 1.0, max_relative = 1e-12);
        assert!(rep.all_pass);
    }
}
