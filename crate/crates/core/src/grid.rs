//! Geometric grids with exact cell masses, and Stieltjes sums on them.
//!
//! Condition constants are computed from tabulated cumulative integrals on a
//! log-uniform grid. Integrals against measures of the form `d(G^alpha)` use
//! the exact increments of `G^alpha` over each cell and a trapezoid average
//! of the integrand, so monotone comparisons between constants survive the
//! discretization.

use crate::quad::{grid_sup, QuadConfig};
use crate::weights::{PieceFn, Sigma};

#[derive(Debug, Clone)]
pub(crate) struct Grid {
    pub t: Vec<f64>,
    pub s: Vec<f64>,
    pub open_left: bool,
    pub open_right: bool,
}

/// Relative offset of the extra node placed just left of each breakpoint.
const LEFT_OFFSET: f64 = 1e-10;

impl Grid {
    /// Grid on `(a, b)`; `a = 0` and `b = inf` are truncated at the
    /// configured s-bounds. `breaks` become nodes (with a left neighbour).
    pub fn new(a: f64, b: f64, breaks: &[f64], cfg: &QuadConfig, min_nodes: usize) -> Self {
        debug_assert!(a < b);
        let open_left = a == 0.0;
        let open_right = b.is_infinite();
        let mut sa = if open_left { cfg.s_lo } else { a.ln() };
        let mut sb = if open_right { cfg.s_hi } else { b.ln() };
        if open_left && sb - sa < 4.0 {
            sa = sb - 4.0;
        }
        if open_right && sb - sa < 4.0 {
            sb = sa + 4.0;
        }
        let n = (((sb - sa) / std::f64::consts::LN_10) * cfg.nodes_per_decade as f64).ceil() as usize;
        let n = n.max(min_nodes).max(8);
        let h = (sb - sa) / n as f64;
        let mut t: Vec<f64> = (0..=n).map(|i| (sa + i as f64 * h).exp()).collect();
        let t_lo = if open_left { t[0] } else { a };
        let t_hi = if open_right { t[n] } else { b };
        t[0] = t_lo;
        t[n] = t_hi;
        for &x in breaks {
            if x > t_lo && x < t_hi {
                t.push(x);
                let left = x * (1.0 - LEFT_OFFSET);
                if left > t_lo {
                    t.push(left);
                }
            }
        }
        t.sort_by(f64::total_cmp);
        // drop nodes crowding a breakpoint, keep breakpoints and ends
        let is_break = |x: f64| breaks.iter().any(|&b| b == x || b * (1.0 - LEFT_OFFSET) == x);
        let mut kept: Vec<f64> = Vec::with_capacity(t.len());
        for &x in &t {
            if let Some(&last) = kept.last() {
                if x == last {
                    continue;
                }
                if x - last < 0.05 * LEFT_OFFSET * x && !is_break(x) && x != t_hi {
                    continue;
                }
                if x - last < 0.05 * LEFT_OFFSET * x && !is_break(last) && kept.len() > 1 {
                    kept.pop();
                }
            }
            kept.push(x);
        }
        let s = kept.iter().map(|x| x.ln()).collect();
        Self { t: kept, s, open_left, open_right }
    }

    /// Keeps the first `len` nodes; the right end stays open.
    pub fn truncate_right(&mut self, len: usize) {
        self.t.truncate(len);
        self.s.truncate(len);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn first(&self) -> f64 {
        self.t[0]
    }

    pub fn last(&self) -> f64 {
        *self.t.last().expect("non-empty grid")
    }

    pub fn sup(&self, values: &[f64]) -> f64 {
        grid_sup(values, &self.s, self.open_left, self.open_right)
    }

    pub fn tabulate(&self, f: &PieceFn, tail_finite: bool) -> Tab {
        let head = if self.open_left { f.integral(0.0, self.first()) } else { 0.0 };
        let cells = self.t.windows(2).map(|w| f.integral(w[0], w[1])).collect();
        let tail = if !self.open_right {
            0.0
        } else if tail_finite {
            f.integral(self.last(), f64::INFINITY)
        } else {
            f64::INFINITY
        };
        Tab { head, cells, tail }
    }

    /// `sigma_p(a, t_i)` at every node, `a` the left end of the grid.
    pub fn sigma(&self, sigma: &Sigma) -> Vec<f64> {
        let k = sigma.kernel();
        let mut out = Vec::with_capacity(self.len());
        if sigma.is_sup() {
            let mut cur = if self.open_left { k.sup_open(0.0, self.first()) } else { k.eval(self.first()) };
            out.push(cur);
            for w in self.t.windows(2) {
                cur = cur.max(k.sup_open(w[0], w[1]));
                out.push(cur);
            }
        } else {
            let inv = 1.0 / sigma.p_dual();
            let mut acc = if self.open_left { k.integral(0.0, self.first()) } else { 0.0 };
            out.push(acc.powf(inv));
            for w in self.t.windows(2) {
                acc += k.integral(w[0], w[1]);
                out.push(acc.powf(inv));
            }
        }
        out
    }

    /// Contribution beyond the right end, from the decay of the last two
    /// units of `s`. `+inf` when the contributions do not decay.
    pub fn extrapolate_right(&self, contrib: &[f64]) -> f64 {
        extrapolate(contrib, &self.s, false)
    }

    /// Contribution below the left end, mirrored.
    pub fn extrapolate_left(&self, contrib: &[f64]) -> f64 {
        extrapolate(contrib, &self.s, true)
    }
}

/// Head mass, per-cell masses and tail mass of a function on a grid.
#[derive(Debug, Clone)]
pub(crate) struct Tab {
    pub head: f64,
    pub cells: Vec<f64>,
    pub tail: f64,
}

impl Tab {
    /// `int_a^{t_i}` (including the head).
    pub fn lower(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.cells.len() + 1);
        let mut acc = self.head;
        out.push(acc);
        for &c in &self.cells {
            acc += c;
            out.push(acc);
        }
        out
    }

    /// `int_{t_i}^b` (including the tail).
    pub fn upper(&self) -> Vec<f64> {
        let n = self.cells.len();
        let mut out = vec![0.0; n + 1];
        let mut acc = self.tail;
        out[n] = acc;
        for i in (0..n).rev() {
            acc += self.cells[i];
            out[i] = acc;
        }
        out
    }
}

/// `(base + delta)^alpha - base^alpha` without cancellation, `delta >= 0`.
#[inline]
pub(crate) fn pow_inc(base: f64, delta: f64, alpha: f64) -> f64 {
    if delta == 0.0 {
        return 0.0;
    }
    if base == 0.0 {
        return delta.powf(alpha);
    }
    if base.is_infinite() || delta.is_infinite() {
        return f64::INFINITY;
    }
    base.powf(alpha) * (alpha * (delta / base).ln_1p()).exp_m1()
}

/// Increments of `G^alpha` over cells for a non-decreasing cumulative `G`
/// with `G_{i+1} = G_i + cells_i`.
pub(crate) fn increments_up(g: &[f64], cells: &[f64], alpha: f64) -> Vec<f64> {
    cells.iter().enumerate().map(|(i, &c)| pow_inc(g[i], c, alpha)).collect()
}

/// Increments of `G^alpha` over cells for a non-increasing cumulative `G`
/// with `G_i = G_{i+1} + cells_i`.
pub(crate) fn increments_down(g: &[f64], cells: &[f64], alpha: f64) -> Vec<f64> {
    cells.iter().enumerate().map(|(i, &c)| pow_inc(g[i + 1], c, alpha)).collect()
}

/// Trapezoid contributions `(f_i + f_{i+1})/2 * mu_i`, with `0 * inf = 0`.
pub(crate) fn trapezoid(f: &[f64], mu: &[f64]) -> Vec<f64> {
    mu.iter()
        .enumerate()
        .map(|(i, &m)| if m == 0.0 { 0.0 } else { 0.5 * (f[i] + f[i + 1]) * m })
        .collect()
}

/// `tail + sum_{j >= i} contrib_j` at every node.
pub(crate) fn right_cumulative(contrib: &[f64], tail: f64) -> Vec<f64> {
    let n = contrib.len();
    let mut out = vec![0.0; n + 1];
    let mut acc = tail;
    out[n] = acc;
    for i in (0..n).rev() {
        acc += contrib[i];
        out[i] = acc;
    }
    out
}

/// `x^alpha` with `0^alpha = 0` for `alpha > 0`.
#[inline]
pub(crate) fn powf0(x: f64, alpha: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.powf(alpha)
    }
}

/// Product with the `0 * inf = 0` convention.
#[inline]
pub(crate) fn mul0(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

fn extrapolate(contrib: &[f64], s: &[f64], leftwards: bool) -> f64 {
    let n = contrib.len();
    if n == 0 {
        return 0.0;
    }
    // cell i spans [s_i, s_{i+1}]; measure distance from the relevant end
    let edge = if leftwards { s[0] } else { s[n] };
    let dist = |i: usize| {
        if leftwards {
            s[i + 1] - edge
        } else {
            edge - s[i]
        }
    };
    let (mut j1, mut w1, mut j2, mut w2) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..n {
        let i = if leftwards { k } else { n - 1 - k };
        let d = dist(i);
        let width = s[i + 1] - s[i];
        if d <= 1.0 + 1e-12 {
            j1 += contrib[i];
            w1 += width;
        } else if d <= 2.0 + 1e-12 {
            j2 += contrib[i];
            w2 += width;
        } else {
            break;
        }
    }
    if j1 == 0.0 {
        return 0.0;
    }
    if !j1.is_finite() {
        return f64::INFINITY;
    }
    if !(j2 > 0.0) || w1 == 0.0 || w2 == 0.0 {
        return f64::INFINITY;
    }
    let (d1, d2) = (j1 / w1, j2 / w2);
    let (m1, m2) = (0.5 * w1, w1 + 0.5 * w2);
    let kappa = (d2 / d1).ln() / (m2 - m1);
    if !(kappa > 1e-9) {
        return f64::INFINITY;
    }
    j1 / (kappa * w1).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightSpec;
    use approx::assert_relative_eq;

    #[test]
    fn pow_inc_matches_direct() {
        for &(b, d, a) in &[(1.0, 1e-9, 2.5), (3.0, 2.0, 0.5), (1e-8, 1e-20, 3.0), (2.0, 5.0, -1.0)] {
            let direct: f64 = (b + d as f64).powf(a) - (b as f64).powf(a);
            assert_relative_eq!(pow_inc(b, d, a), direct, max_relative = 1e-6);
        }
        assert_eq!(pow_inc(0.0, 4.0, 0.5), 2.0);
    }

    #[test]
    fn tabulated_masses_add_up() {
        let cfg = QuadConfig { nodes_per_decade: 64, ..QuadConfig::default() };
        let w = WeightSpec::two_piece(0.5, -2.0).unwrap();
        let g = Grid::new(0.0, f64::INFINITY, &w.breakpoints(), &cfg, 8);
        let tab = g.tabulate(w.function(), w.tail_finite());
        let lo = tab.lower();
        let up = tab.upper();
        assert_relative_eq!(lo[g.len() - 1] + tab.tail, 5.0 / 3.0, max_relative = 1e-13);
        assert_relative_eq!(up[0] + tab.head, 5.0 / 3.0, max_relative = 1e-13);
        assert!(g.t.contains(&1.0));
    }

    #[test]
    fn extrapolation_is_exact_for_power_tails() {
        // int_{e^s}^inf t^{-2} dt summed per cell
        let cfg = QuadConfig { nodes_per_decade: 256, s_hi: 10.0, ..QuadConfig::default() };
        let g = Grid::new(1.0, f64::INFINITY, &[], &cfg, 8);
        let f = |t: f64| 1.0 / t;
        let contrib: Vec<f64> = g.t.windows(2).map(|w| f(w[0]) - f(w[1])).collect();
        let tail = g.extrapolate_right(&contrib);
        assert_relative_eq!(tail, 1.0 / g.last(), max_relative = 1e-3);
        let flat: Vec<f64> = g.t.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
        assert!(g.extrapolate_right(&flat).is_infinite());
    }
}
