//! Indemnity functions and their admissible parameter domains.
//!
//! Four parametric families are supported:
//!
//! * layer `g_{a,b}(x) = (x - a)_+ - (x - b)_+`
//! * proportional plus excess `r_{a,b,c}(x) = a·x + c·(x - b)_+`
//! * capped proportional `l_{a,b}(x) = a·min(x, b)`
//! * shifted proportional `h_{a,b}(x) = a·(x - b)_+`
//!
//! plus a general piecewise-linear contract used by oracles and tests. Every
//! contract is nondecreasing, 1-Lipschitz and vanishes at zero.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// One linear piece `x ↦ intercept + slope·x`, valid up to and including `end`
/// and starting just after the previous piece's end (or at `-∞`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearPiece {
    pub end: f64,
    pub intercept: f64,
    pub slope: f64,
}

/// A ceded-loss function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IndemnitySpec", into = "IndemnitySpec")]
pub enum Indemnity {
    LayerGB { a: f64, b: f64 },
    PropExcessR { a: f64, b: f64, c: f64 },
    CappedPropL { a: f64, b: f64 },
    ShiftedPropH { a: f64, b: f64 },
    PiecewiseLinear(PiecewiseLinear),
}

/// Continuous piecewise-linear contract through `(0, 0)` and the given knots,
/// continued beyond the last knot with `tail_slope`. Zero below the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
    tail_slope: f64,
}

impl PiecewiseLinear {
    /// `knots` must start at `(0, 0)`, have strictly increasing abscissae and
    /// slopes in `[0, 1]` between consecutive knots.
    pub fn new(knots: Vec<(f64, f64)>, tail_slope: f64) -> Result<Self> {
        if knots.first() != Some(&(0.0, 0.0)) {
            return domain("piecewise-linear contract must start at (0, 0)");
        }
        if !(0.0..=1.0).contains(&tail_slope) {
            return domain(format!("tail slope {tail_slope} outside [0, 1]"));
        }
        for w in knots.windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            if !(x1 > x0) || !x1.is_finite() || !y1.is_finite() {
                return domain("knot abscissae must be finite and strictly increasing");
            }
            let rise = y1 - y0;
            let run = x1 - x0;
            if rise < -1e-12 * run || rise > run * (1.0 + 1e-12) {
                return domain(format!("slope between knots {x0} and {x1} outside [0, 1]"));
            }
        }
        Ok(Self { knots, tail_slope })
    }

    /// Interpolates `f` at the given sorted nonnegative abscissae; the tail
    /// slope is taken from the last segment.
    pub fn from_samples(f: &Indemnity, xs: &[f64]) -> Result<Self> {
        let mut knots = vec![(0.0, 0.0)];
        for &x in xs {
            if x > knots.last().unwrap().0 {
                knots.push((x, f.evaluate(x)));
            }
        }
        let tail = match knots.len() {
            1 => 0.0,
            n => {
                let (x0, y0) = knots[n - 2];
                let (x1, y1) = knots[n - 1];
                ((y1 - y0) / (x1 - x0)).clamp(0.0, 1.0)
            }
        };
        Self::new(knots, tail)
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn tail_slope(&self) -> f64 {
        self.tail_slope
    }

    fn evaluate(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let k = self.knots.partition_point(|&(kx, _)| kx <= x);
        if k == self.knots.len() {
            let (xl, yl) = self.knots[k - 1];
            return yl + self.tail_slope * (x - xl);
        }
        let (x0, y0) = self.knots[k - 1];
        let (x1, y1) = self.knots[k];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    fn pieces(&self) -> Vec<LinearPiece> {
        let mut out = vec![LinearPiece { end: 0.0, intercept: 0.0, slope: 0.0 }];
        for w in self.knots.windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            let slope = (y1 - y0) / (x1 - x0);
            out.push(LinearPiece { end: x1, intercept: y0 - slope * x0, slope });
        }
        let &(xl, yl) = self.knots.last().unwrap();
        out.push(LinearPiece { end: f64::INFINITY, intercept: yl - self.tail_slope * xl, slope: self.tail_slope });
        out
    }
}

/// Whether a contract, as a function on `[0, ∞)`, is convex and/or concave.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Curvature {
    pub convex: bool,
    pub concave: bool,
}

impl Indemnity {
    pub fn layer(a: f64, b: f64) -> Result<Self> {
        match AdmissibleDomain::A1.check(&[a, b]) {
            Admissibility::Accept => Ok(Self::LayerGB { a, b }),
            Admissibility::Reject(why) => Err(Error::Inadmissible(why)),
        }
    }

    pub fn prop_excess(a: f64, b: f64, c: f64) -> Result<Self> {
        match AdmissibleDomain::A2.check(&[a, b, c]) {
            Admissibility::Accept => Ok(Self::PropExcessR { a, b, c }),
            Admissibility::Reject(why) => Err(Error::Inadmissible(why)),
        }
    }

    pub fn capped_prop(a: f64, b: f64) -> Result<Self> {
        match AdmissibleDomain::A3.check(&[a, b]) {
            Admissibility::Accept => Ok(Self::CappedPropL { a, b }),
            Admissibility::Reject(why) => Err(Error::Inadmissible(why)),
        }
    }

    pub fn shifted_prop(a: f64, b: f64) -> Result<Self> {
        match AdmissibleDomain::A4.check(&[a, b]) {
            Admissibility::Accept => Ok(Self::ShiftedPropH { a, b }),
            Admissibility::Reject(why) => Err(Error::Inadmissible(why)),
        }
    }

    /// Full coverage, `f(x) = x` on the whole line. The layer `g_{0,∞}`
    /// agrees with it on nonnegative losses only.
    pub fn identity() -> Self {
        Self::PropExcessR { a: 1.0, b: 0.0, c: 0.0 }
    }

    /// No coverage, `f(x) = 0`.
    pub fn zero() -> Self {
        Self::LayerGB { a: 0.0, b: 0.0 }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Self::LayerGB { .. } => "g",
            Self::PropExcessR { .. } => "r",
            Self::CappedPropL { .. } => "l",
            Self::ShiftedPropH { .. } => "h",
            Self::PiecewiseLinear(_) => "piecewise",
        }
    }

    /// Ceded amount `f(x)`.
    pub fn evaluate(&self, x: f64) -> f64 {
        match *self {
            Self::LayerGB { a, b } => {
                if x <= a {
                    0.0
                } else {
                    x.min(b) - a
                }
            }
            Self::PropExcessR { a, b, c } => a * x + c * (x - b).max(0.0),
            Self::CappedPropL { a, b } => a * x.min(b),
            Self::ShiftedPropH { a, b } => a * (x - b).max(0.0),
            Self::PiecewiseLinear(ref p) => p.evaluate(x),
        }
    }

    /// Retained amount `x - f(x)`.
    pub fn retained(&self, x: f64) -> f64 {
        x - self.evaluate(x)
    }

    /// The contract as consecutive linear pieces covering the real line.
    pub fn pieces(&self) -> Vec<LinearPiece> {
        let inf = f64::INFINITY;
        let piece = |end, intercept, slope| LinearPiece { end, intercept, slope };
        match *self {
            Self::LayerGB { a, b } if a == b => vec![piece(inf, 0.0, 0.0)],
            Self::LayerGB { a, b } if b == inf => vec![piece(a, 0.0, 0.0), piece(inf, -a, 1.0)],
            Self::LayerGB { a, b } => vec![piece(a, 0.0, 0.0), piece(b, -a, 1.0), piece(inf, b - a, 0.0)],
            Self::PropExcessR { a, c: 0.0, .. } => vec![piece(inf, 0.0, a)],
            Self::PropExcessR { a, b, c } => vec![piece(b, 0.0, a), piece(inf, -c * b, a + c)],
            Self::CappedPropL { a, b } if b == inf || a == 0.0 => vec![piece(inf, 0.0, a)],
            Self::CappedPropL { a, b } => vec![piece(b, 0.0, a), piece(inf, a * b, 0.0)],
            Self::ShiftedPropH { a, b } if b == inf || a == 0.0 => vec![piece(inf, 0.0, 0.0)],
            Self::ShiftedPropH { a, b } => vec![piece(b, 0.0, 0.0), piece(inf, -a * b, a)],
            Self::PiecewiseLinear(ref p) => p.pieces(),
        }
    }

    /// Pieces of the retained function `x - f(x)`.
    pub fn retained_pieces(&self) -> Vec<LinearPiece> {
        self.pieces()
            .into_iter()
            .map(|p| LinearPiece { end: p.end, intercept: -p.intercept, slope: 1.0 - p.slope })
            .collect()
    }

    /// Curvature on `[0, ∞)`, read off the slopes of the pieces there.
    pub fn curvature(&self) -> Curvature {
        let slopes: Vec<f64> = self.pieces().iter().filter(|p| p.end > 0.0).map(|p| p.slope).collect();
        Curvature { convex: slopes.windows(2).all(|w| w[1] >= w[0]), concave: slopes.windows(2).all(|w| w[1] <= w[0]) }
    }

    /// Parameters in family order, `(a, b)` or `(a, b, c)`.
    pub fn params(&self) -> Vec<f64> {
        match *self {
            Self::LayerGB { a, b } | Self::CappedPropL { a, b } | Self::ShiftedPropH { a, b } => vec![a, b],
            Self::PropExcessR { a, b, c } => vec![a, b, c],
            Self::PiecewiseLinear(ref p) => p.knots.iter().flat_map(|&(x, y)| [x, y]).collect(),
        }
    }
}

impl fmt::Display for Indemnity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::LayerGB { a, b } => write!(f, "g(a={a}, b={b})"),
            Self::PropExcessR { a, b, c } => write!(f, "r(a={a}, b={b}, c={c})"),
            Self::CappedPropL { a, b } => write!(f, "l(a={a}, b={b})"),
            Self::ShiftedPropH { a, b } => write!(f, "h(a={a}, b={b})"),
            Self::PiecewiseLinear(ref p) => write!(f, "piecewise({} knots)", p.knots.len()),
        }
    }
}

/// Parameter domains: A1 for layers, A2 for proportional-plus-excess,
/// A3 for capped proportional and A4 for shifted proportional contracts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdmissibleDomain {
    A1,
    A2,
    A3,
    A4,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Admissibility {
    Accept,
    Reject(String),
}

impl Admissibility {
    pub fn is_accept(&self) -> bool {
        matches!(self, Self::Accept)
    }
}

impl AdmissibleDomain {
    /// Number of parameters per contract.
    pub fn arity(self) -> usize {
        match self {
            Self::A2 => 3,
            _ => 2,
        }
    }

    /// Checks one contract's parameters: `(a, b)` or, for A2, `(a, b, c)`.
    pub fn check(self, params: &[f64]) -> Admissibility {
        use Admissibility::Reject;
        if params.len() != self.arity() {
            return Reject(format!("{self:?} expects {} parameters, got {}", self.arity(), params.len()));
        }
        if params.iter().any(|p| p.is_nan()) {
            return Reject("parameter is NaN".into());
        }
        let (a, b) = (params[0], params[1]);
        if !a.is_finite() {
            return Reject(format!("a = {a} must be finite"));
        }
        if a < 0.0 {
            return Reject(format!("a = {a} is negative"));
        }
        if b < 0.0 {
            return Reject(format!("b = {b} is negative"));
        }
        match self {
            Self::A1 if a > b => Reject(format!("a = {a} exceeds b = {b}")),
            Self::A2 => {
                let c = params[2];
                if !b.is_finite() {
                    Reject(format!("b = {b} must be finite"))
                } else if c < 0.0 {
                    Reject(format!("c = {c} is negative"))
                } else if a + c > 1.0 {
                    Reject(format!("a + c = {} exceeds 1", a + c))
                } else {
                    Admissibility::Accept
                }
            }
            Self::A3 | Self::A4 if a > 1.0 => Reject(format!("a = {a} exceeds 1")),
            _ => Admissibility::Accept,
        }
    }

    /// Checks every contract; the first rejection is reported with its index.
    pub fn check_all(self, params: &[Vec<f64>]) -> Admissibility {
        for (i, p) in params.iter().enumerate() {
            if let Admissibility::Reject(why) = self.check(p) {
                return Admissibility::Reject(format!("contract {i}: {why}"));
            }
        }
        Admissibility::Accept
    }

    /// Builds the contract of this domain's family.
    pub fn build(self, params: &[f64]) -> Result<Indemnity> {
        if params.len() != self.arity() {
            return Err(Error::Inadmissible(format!("{self:?} expects {} parameters", self.arity())));
        }
        match self {
            Self::A1 => Indemnity::layer(params[0], params[1]),
            Self::A2 => Indemnity::prop_excess(params[0], params[1], params[2]),
            Self::A3 => Indemnity::capped_prop(params[0], params[1]),
            Self::A4 => Indemnity::shifted_prop(params[0], params[1]),
        }
    }
}

/// Serde helper for values that may be `+∞`, written as the string `"inf"`.
pub mod extended {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) if matches!(t.as_str(), "inf" | "Infinity" | "+inf") => Ok(f64::INFINITY),
            Raw::Text(t) => Err(de::Error::custom(format!("expected a number or \"inf\", got {t:?}"))),
        }
    }
}

/// Wire form of [`Indemnity`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum IndemnitySpec {
    #[serde(rename = "g")]
    Layer {
        a: f64,
        #[serde(with = "extended")]
        b: f64,
    },
    #[serde(rename = "r")]
    PropExcess { a: f64, b: f64, c: f64 },
    #[serde(rename = "l")]
    CappedProp {
        a: f64,
        #[serde(with = "extended")]
        b: f64,
    },
    #[serde(rename = "h")]
    ShiftedProp {
        a: f64,
        #[serde(with = "extended")]
        b: f64,
    },
    #[serde(rename = "piecewise")]
    Piecewise { knots: Vec<(f64, f64)>, tail_slope: f64 },
}

impl TryFrom<IndemnitySpec> for Indemnity {
    type Error = Error;

    fn try_from(spec: IndemnitySpec) -> Result<Self> {
        match spec {
            IndemnitySpec::Layer { a, b } => Self::layer(a, b),
            IndemnitySpec::PropExcess { a, b, c } => Self::prop_excess(a, b, c),
            IndemnitySpec::CappedProp { a, b } => Self::capped_prop(a, b),
            IndemnitySpec::ShiftedProp { a, b } => Self::shifted_prop(a, b),
            IndemnitySpec::Piecewise { knots, tail_slope } => {
                PiecewiseLinear::new(knots, tail_slope).map(Self::PiecewiseLinear)
            }
        }
    }
}

impl From<Indemnity> for IndemnitySpec {
    fn from(f: Indemnity) -> Self {
        match f {
            Indemnity::LayerGB { a, b } => Self::Layer { a, b },
            Indemnity::PropExcessR { a, b, c } => Self::PropExcess { a, b, c },
            Indemnity::CappedPropL { a, b } => Self::CappedProp { a, b },
            Indemnity::ShiftedPropH { a, b } => Self::ShiftedProp { a, b },
            Indemnity::PiecewiseLinear(p) => Self::Piecewise { knots: p.knots, tail_slope: p.tail_slope },
        }
    }
}
