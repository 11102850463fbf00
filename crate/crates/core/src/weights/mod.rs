//! Weights on `(0, inf)`, exponent bookkeeping and the dual kernel `sigma_p`.

mod parse;
mod piece;

use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

pub use parse::parse_spec;
pub use piece::{Piece, PieceFn};

/// How a weight was described.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    Const(f64),
    Pow(f64),
    /// `c * t^a * exp(-b t)`.
    Exp { c: f64, a: f64, b: f64 },
    /// `(start, power, scale)` triples; the first start is 0.
    Pieces(Vec<(f64, f64, f64)>),
    /// Log-log interpolated samples, power-law extrapolation past both ends.
    Table { label: String, points: Vec<(f64, f64)> },
}

/// A validated weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    kind: WeightKind,
    f: PieceFn,
    continuous: bool,
}

const PROBES: [f64; 13] = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0, 1e2, 1e3, 1e4, 1e5, 1e6];

impl WeightSpec {
    pub fn new(kind: WeightKind) -> Result<Self> {
        let f = realize(&kind)?;
        let continuous = f
            .breakpoints()
            .iter()
            .all(|&b| (f.left_limit(b) - f.eval(b)).abs() <= 1e-12 * f.eval(b).abs());
        let spec = Self { kind, f, continuous };
        spec.check_weight_class()?;
        Ok(spec)
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(WeightKind::Const(c))
    }

    pub fn power(a: f64) -> Result<Self> {
        Self::new(WeightKind::Pow(a))
    }

    pub fn exp_scaled(c: f64, a: f64, b: f64) -> Result<Self> {
        Self::new(WeightKind::Exp { c, a, b })
    }

    pub fn pieces(triples: Vec<(f64, f64, f64)>) -> Result<Self> {
        Self::new(WeightKind::Pieces(triples))
    }

    pub fn tabulated(label: impl Into<String>, points: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(WeightKind::Table { label: label.into(), points })
    }

    /// `t^b0` on `(0, 1)` and `t^b1` on `[1, inf)`.
    pub fn two_piece(b0: f64, b1: f64) -> Result<Self> {
        Self::pieces(vec![(0.0, b0, 1.0), (1.0, b1, 1.0)])
    }

    fn check_weight_class(&self) -> Result<()> {
        for p in self.f.pieces() {
            if !(p.coef > 0.0 && p.coef.is_finite() && p.power.is_finite() && p.rate.is_finite()) {
                return Err(Error::WeightClass(format!("{self}: piece {p:?} is not positive and finite")));
            }
        }
        if !self.f.head_finite() {
            return Err(Error::WeightClass(format!("{self}: integral from 0 diverges")));
        }
        for &x in &PROBES {
            let m = self.f.integral(0.0, x);
            if !(m > 0.0 && m.is_finite() && self.f.eval(x).is_finite()) {
                return Err(Error::WeightClass(format!("{self}: int_0^{x} = {m}")));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn function(&self) -> &PieceFn {
        &self.f
    }

    pub fn is_continuous(&self) -> bool {
        self.continuous
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.f.breakpoints()
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || t.is_infinite() {
            return Err(Error::Domain(format!("weight evaluated at t = {t}")));
        }
        Ok(self.f.eval(t))
    }

    /// Unchecked evaluation for `t > 0`.
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        self.f.eval(t)
    }

    pub fn lower_integral(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("lower integral at x = {x}")));
        }
        Ok(self.f.integral(0.0, x))
    }

    pub fn upper_integral(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("upper integral at x = {x}")));
        }
        Ok(self.upper(x))
    }

    /// `int_x^inf`, unchecked.
    #[inline]
    pub fn upper(&self, x: f64) -> f64 {
        if !self.f.tail_finite() {
            return f64::INFINITY;
        }
        self.f.integral(x, f64::INFINITY)
    }

    /// `int_x^y`, `0 <= x <= y <= inf`.
    #[inline]
    pub fn integral(&self, x: f64, y: f64) -> f64 {
        if y.is_infinite() && !self.f.tail_finite() {
            return f64::INFINITY;
        }
        self.f.integral(x, y)
    }

    pub fn total_mass(&self) -> f64 {
        self.upper(0.0)
    }

    pub fn tail_finite(&self) -> bool {
        self.f.tail_finite()
    }

    /// `lambda * self`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        let kind = match &self.kind {
            WeightKind::Const(c) => WeightKind::Const(c * lambda),
            WeightKind::Exp { c, a, b } => WeightKind::Exp { c: c * lambda, a: *a, b: *b },
            _ => WeightKind::Pieces(
                self.f.pieces().iter().map(|p| (p.start, p.power, p.coef * lambda)).collect(),
            ),
        };
        Self::new(kind)
    }
}

fn realize(kind: &WeightKind) -> Result<PieceFn> {
    let single = |coef: f64, power: f64, rate: f64| vec![Piece { start: 0.0, coef, power, rate }];
    let pieces = match kind {
        WeightKind::Const(c) => single(*c, 0.0, 0.0),
        WeightKind::Pow(a) => single(1.0, *a, 0.0),
        WeightKind::Exp { c, a, b } => {
            if !(*b >= 0.0) {
                return Err(Error::WeightClass(format!("exp weight needs b >= 0, got {b}")));
            }
            single(*c, *a, *b)
        }
        WeightKind::Pieces(triples) => {
            if triples.is_empty() {
                return Err(Error::Parse("pieces: need at least one piece".into()));
            }
            if triples[0].0 != 0.0 {
                return Err(Error::Parse("pieces: the first piece must start at 0".into()));
            }
            triples
                .iter()
                .map(|&(start, power, coef)| Piece { start, coef, power, rate: 0.0 })
                .collect()
        }
        WeightKind::Table { points, .. } => table_pieces(points)?,
    };
    PieceFn::new(pieces).ok_or_else(|| Error::Parse("piece starts must be finite, ascending, first 0".into()))
}

fn table_pieces(points: &[(f64, f64)]) -> Result<Vec<Piece>> {
    if points.is_empty() {
        return Err(Error::Parse("table: no rows".into()));
    }
    for &(t, y) in points {
        if !(t > 0.0 && t.is_finite() && y > 0.0 && y.is_finite()) {
            return Err(Error::WeightClass(format!("table row ({t}, {y}) is not positive and finite")));
        }
    }
    if points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        return Err(Error::Parse("table: abscissae must be strictly increasing".into()));
    }
    if points.len() == 1 {
        return Ok(vec![Piece { start: 0.0, coef: points[0].1, power: 0.0, rate: 0.0 }]);
    }
    let n = points.len() - 1;
    let mut pieces = Vec::with_capacity(n);
    for i in 0..n {
        let (t0, y0) = points[i];
        let (t1, y1) = points[i + 1];
        let power = (y1 / y0).ln() / (t1 / t0).ln();
        let coef = y0 * t0.powf(-power);
        let start = if i == 0 { 0.0 } else { t0 };
        pieces.push(Piece { start, coef, power, rate: 0.0 });
    }
    Ok(pieces)
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            WeightKind::Const(c) => write!(f, "const:{}", Num(*c)),
            WeightKind::Pow(a) => write!(f, "pow:{}", Num(*a)),
            WeightKind::Exp { c, a, b } => write!(f, "exp:{},{},{}", Num(*c), Num(*a), Num(*b)),
            WeightKind::Pieces(triples) => {
                write!(f, "pieces:[")?;
                for (i, (x, a, c)) in triples.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "({},{},{})", Num(*x), Num(*a), Num(*c))?;
                }
                write!(f, "]")
            }
            WeightKind::Table { label, .. } => write!(f, "table:{label}"),
        }
    }
}

/// Shortest round-trip form, without a trailing `.0`.
struct Num(f64);

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = format!("{:?}", self.0);
        f.write_str(s.strip_suffix(".0").unwrap_or(&s))
    }
}

impl Serialize for WeightSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Exponent regimes of the inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `p <= min(q, r)`
    A,
    /// `r < p <= q`
    B,
    /// `q < p <= r`
    C,
    /// `max(q, r) < p`
    D,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::A => "a",
            Regime::B => "b",
            Regime::C => "c",
            Regime::D => "d",
        };
        f.write_str(s)
    }
}

pub fn classify_regime(p: f64, q: f64, r: f64) -> Regime {
    match (p <= q, p <= r) {
        (true, true) => Regime::A,
        (true, false) => Regime::B,
        (false, true) => Regime::C,
        (false, false) => Regime::D,
    }
}

/// `p' = p/(p-1)` (inf at `p = 1`) and `1/rho = (1/r - 1/p)_+` (inf when `r >= p`).
pub fn dual_and_rho(p: f64, r: f64) -> (f64, f64) {
    let p_dual = if p == 1.0 { f64::INFINITY } else { p / (p - 1.0) };
    let rho = if r >= p { f64::INFINITY } else { 1.0 / (1.0 / r - 1.0 / p) };
    (p_dual, rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub p_dual: f64,
    pub rho: f64,
    pub regime: Regime,
}

impl Exponents {
    pub fn new(p: f64, q: f64, r: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::Config(format!("p must satisfy 1 <= p < inf, got {p}")));
        }
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::Config(format!("q must satisfy 0 < q < inf, got {q}")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Config(format!("r must satisfy 0 < r < inf, got {r}")));
        }
        let (p_dual, rho) = dual_and_rho(p, r);
        Ok(Self { p, q, r, p_dual, rho, regime: classify_regime(p, q, r) })
    }
}

/// `sigma_p(x, y)` for a fixed `v` and `p`, with `v^(1-p')` (or `1/v`) prepared once.
#[derive(Debug, Clone)]
pub struct Sigma {
    p: f64,
    p_dual: f64,
    /// `v^(1-p')` for `p > 1`, `1/v` for `p = 1`.
    kernel: PieceFn,
}

impl Sigma {
    pub fn new(v: &WeightSpec, p: f64) -> Self {
        let (p_dual, _) = dual_and_rho(p, 1.0);
        let kernel = if p == 1.0 { v.function().powf(-1.0) } else { v.function().powf(1.0 - p_dual) };
        Self { p, p_dual, kernel }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn p_dual(&self) -> f64 {
        self.p_dual
    }

    pub fn kernel(&self) -> &PieceFn {
        &self.kernel
    }

    pub fn is_sup(&self) -> bool {
        self.p == 1.0
    }

    /// `sigma_p(x, y)` for `0 <= x < y <= inf`; `x = y` gives 0 (`p > 1`)
    /// or the right limit of `1/v` at `x` (`p = 1`).
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        if self.is_sup() {
            if x == y {
                return self.kernel.eval(x);
            }
            self.kernel.sup_open(x, y)
        } else {
            if !(x < y) {
                return 0.0;
            }
            self.kernel.integral(x, y).powf(1.0 / self.p_dual)
        }
    }

    /// `sigma_p` raised to the power `p'` for `p > 1`: the raw kernel integral.
    pub fn raw(&self, x: f64, y: f64) -> f64 {
        self.kernel.integral(x, y)
    }
}

/// `sigma_p(x, y)` for the weight `v`.
pub fn sigma_p(v: &WeightSpec, p: f64, x: f64, y: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("sigma_p needs 1 <= p < inf, got {p}")));
    }
    if !(x >= 0.0 && x < y) {
        return Err(Error::Domain(format!("sigma_p needs 0 <= x < y, got ({x}, {y})")));
    }
    Ok(Sigma::new(v, p).eval(x, y))
}
