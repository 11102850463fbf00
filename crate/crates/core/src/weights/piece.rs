//! Piecewise functions built from `c * t^a * exp(-b t)` pieces.

use serde::{Deserialize, Serialize};

use crate::quad::{integrate, QuadConfig};

/// `coef * t^power * exp(-rate * t)` on `[start, next start)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub start: f64,
    pub coef: f64,
    pub power: f64,
    pub rate: f64,
}

impl Piece {
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        if self.rate == 0.0 {
            if self.power == 0.0 {
                self.coef
            } else {
                self.coef * t.powf(self.power)
            }
        } else if self.power == 0.0 {
            self.coef * (-self.rate * t).exp()
        } else {
            (self.coef.ln() + self.power * t.ln() - self.rate * t).exp()
        }
    }

    /// Limit of the piece formula at `t` in `{0, inf}` or its value elsewhere.
    pub fn limit(&self, t: f64) -> f64 {
        if t == 0.0 {
            if self.power > 0.0 {
                0.0
            } else if self.power == 0.0 {
                self.coef
            } else {
                f64::INFINITY
            }
        } else if t.is_infinite() {
            if self.rate > 0.0 {
                0.0
            } else if self.rate < 0.0 || self.power > 0.0 {
                f64::INFINITY
            } else if self.power == 0.0 {
                self.coef
            } else {
                0.0
            }
        } else {
            self.eval(t)
        }
    }

    /// Integral of the piece formula over `(x, y)`, `0 <= x < y <= inf`.
    pub fn integral(&self, x: f64, y: f64) -> f64 {
        if x >= y {
            return 0.0;
        }
        if self.rate == 0.0 {
            return power_integral(self.coef, self.power, x, y);
        }
        if self.power == 0.0 {
            return exp_integral(self.coef, self.rate, x, y);
        }
        if y.is_infinite() && self.rate < 0.0 {
            return f64::INFINITY;
        }
        if x == 0.0 && self.power <= -1.0 {
            return f64::INFINITY;
        }
        if x > 0.0 && y.is_finite() && y / x <= 1.5 && (self.rate * (y - x)).abs() <= 1.0 {
            return gl10_log(|t| self.eval(t), x, y);
        }
        let cfg = QuadConfig { rel_tol: 1e-13, abs_tol: 1e-300, ..QuadConfig::default() };
        integrate(|t| self.eval(t), x, y, &[], &cfg).unwrap_or(f64::NAN)
    }

    /// Supremum of the piece formula over the open interval `(lo, hi)`.
    pub fn sup_open(&self, lo: f64, hi: f64) -> f64 {
        let mut best = self.limit(lo).max(self.limit(hi));
        if self.rate > 0.0 && self.power > 0.0 {
            let crit = self.power / self.rate;
            if crit > lo && crit < hi {
                best = best.max(self.eval(crit));
            }
        }
        best
    }
}

const GL10_X: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL10_W: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982_04,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_14,
];

/// Ten-point Gauss-Legendre rule in `s = ln t` over `[x, y]`, `0 < x < y < inf`.
pub(crate) fn gl10_log<F: Fn(f64) -> f64>(f: F, x: f64, y: f64) -> f64 {
    let (sa, sb) = (x.ln(), y.ln());
    let c = 0.5 * (sa + sb);
    let h = 0.5 * (sb - sa);
    let mut acc = 0.0;
    for k in 0..5 {
        for s in [c - h * GL10_X[k], c + h * GL10_X[k]] {
            let t = s.exp();
            acc += GL10_W[k] * f(t) * t;
        }
    }
    acc * h
}

fn power_integral(c: f64, a: f64, x: f64, y: f64) -> f64 {
    let e = a + 1.0;
    if y.is_infinite() {
        return if e >= 0.0 || x == 0.0 { f64::INFINITY } else { c * x.powf(e) / -e };
    }
    if x == 0.0 {
        return if e <= 0.0 { f64::INFINITY } else { c * y.powf(e) / e };
    }
    let l = (y / x).ln();
    if e == 0.0 {
        c * l
    } else {
        c * x.powf(e) * (e * l).exp_m1() / e
    }
}

fn exp_integral(c: f64, b: f64, x: f64, y: f64) -> f64 {
    if y.is_infinite() {
        return if b <= 0.0 { f64::INFINITY } else { c * (-b * x).exp() / b };
    }
    c * (-b * x).exp() * -(-b * (y - x)).exp_m1() / b
}

/// A function on `(0, inf)` made of [`Piece`]s; the first piece starts at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceFn {
    pieces: Vec<Piece>,
}

impl PieceFn {
    /// Pieces must start at 0 and have strictly increasing starts.
    pub fn new(pieces: Vec<Piece>) -> Option<Self> {
        let first = pieces.first()?;
        if first.start != 0.0 {
            return None;
        }
        if pieces.windows(2).any(|w| !(w[0].start < w[1].start)) {
            return None;
        }
        if pieces.iter().any(|p| !p.start.is_finite()) {
            return None;
        }
        Some(Self { pieces })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    #[inline]
    fn index(&self, t: f64) -> usize {
        self.pieces.partition_point(|p| p.start <= t).saturating_sub(1)
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        self.pieces[self.index(t)].eval(t)
    }

    /// Limit from the left; differs from [`eval`](Self::eval) only at piece starts.
    pub fn left_limit(&self, t: f64) -> f64 {
        let i = self.index(t);
        if i > 0 && self.pieces[i].start == t {
            self.pieces[i - 1].eval(t)
        } else {
            self.pieces[i].eval(t)
        }
    }

    /// Interior piece starts.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().skip(1).map(|p| p.start).collect()
    }

    fn end_of(&self, i: usize) -> f64 {
        self.pieces.get(i + 1).map_or(f64::INFINITY, |p| p.start)
    }

    /// `f^alpha`, piecewise.
    pub fn powf(&self, alpha: f64) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece {
                start: p.start,
                coef: p.coef.powf(alpha),
                power: p.power * alpha,
                rate: p.rate * alpha,
            })
            .collect();
        Self { pieces }
    }

    pub fn scale(&self, lambda: f64) -> Self {
        let pieces = self.pieces.iter().map(|p| Piece { coef: p.coef * lambda, ..*p }).collect();
        Self { pieces }
    }

    /// `int_x^y f`, `0 <= x < y <= inf`; `+inf` on divergence.
    pub fn integral(&self, x: f64, y: f64) -> f64 {
        if !(x < y) {
            return 0.0;
        }
        let mut total = 0.0;
        let mut i = self.index(x);
        loop {
            let lo = x.max(self.pieces[i].start);
            let hi = y.min(self.end_of(i));
            if lo < hi {
                total += self.pieces[i].integral(lo, hi);
            }
            if hi >= y || i + 1 >= self.pieces.len() {
                break;
            }
            i += 1;
        }
        total
    }

    /// Whether `int_x^inf f` is finite, read off the last piece.
    pub fn tail_finite(&self) -> bool {
        let last = self.pieces.last().expect("non-empty");
        last.rate > 0.0 || (last.rate == 0.0 && last.power < -1.0)
    }

    /// Whether `int_0^x f` is finite, read off the first piece.
    pub fn head_finite(&self) -> bool {
        self.pieces[0].power > -1.0
    }

    /// Supremum over the open interval `(x, y)`, including one-sided limits.
    pub fn sup_open(&self, x: f64, y: f64) -> f64 {
        if !(x < y) {
            return 0.0;
        }
        let mut best = 0.0f64;
        let mut i = self.index(x);
        loop {
            let lo = x.max(self.pieces[i].start);
            let hi = y.min(self.end_of(i));
            if lo < hi {
                best = best.max(self.pieces[i].sup_open(lo, hi));
            }
            if hi >= y || i + 1 >= self.pieces.len() {
                break;
            }
            i += 1;
        }
        best
    }
}
