//! Univariate loss laws.
//!
//! Every law exposes its distribution function, left and right quantiles,
//! exact integrals of the quantile function, and the two layer moments used
//! by the contract objectives:
//!
//! * `layer_mean(a, b) = E[g_{a,b}(X)] = ∫_a^b S(x) dx`
//! * `layer_second_moment_part(a, b) = E[g_{a,b}(X)^2] = 2∫_a^b (x - a) S(x) dx`
//!
//! where `g_{a,b}(x) = (x - a)_+ - (x - b)_+` and `S = 1 - F`. An infinite cap
//! is passed as `f64::INFINITY`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::normal;
use crate::quadrature::{adaptive_simpson, SIMPSON_MAX_DEPTH, SIMPSON_TOL};

/// Slack used when comparing cumulative probabilities of discrete laws.
const CUM_EPS: f64 = 1e-12;

/// A univariate loss distribution.
///
/// Build values through the checked constructors ([`Distribution::lomax`] and
/// friends) or through serde, which validates the same invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionSpec", into = "DistributionSpec")]
pub enum Distribution {
    /// `F(x) = 1 - (1 + x/scale)^(-shape)` on `[0, ∞)`.
    Lomax {
        shape: f64,
        scale: f64,
    },
    Exponential {
        rate: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    PointMass {
        c: f64,
    },
    Normal {
        mean: f64,
        sd: f64,
    },
    Discrete(DiscreteLaw),
}

/// Finitely supported law with sorted, distinct, nonnegative atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLaw {
    values: Vec<f64>,
    probs: Vec<f64>,
    cum: Vec<f64>,
}

impl DiscreteLaw {
    /// Atoms may arrive unsorted and with repeated values; repeats are merged.
    /// Probabilities must be positive and sum to one within 1e-9.
    pub fn new(atoms: &[(f64, f64)]) -> Result<Self> {
        if atoms.is_empty() {
            return domain("discrete law needs at least one atom");
        }
        let mut sorted: Vec<(f64, f64)> = atoms.to_vec();
        for &(v, p) in &sorted {
            if !v.is_finite() || v < 0.0 {
                return domain(format!("atom value {v} must be finite and nonnegative"));
            }
            if !(p > 0.0) || !p.is_finite() {
                return domain(format!("atom probability {p} must be positive"));
            }
        }
        sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
        let total: f64 = sorted.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return domain(format!("atom probabilities sum to {total}, not 1"));
        }
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut probs: Vec<f64> = Vec::with_capacity(sorted.len());
        for (v, p) in sorted {
            match values.last() {
                Some(&last) if last == v => *probs.last_mut().unwrap() += p / total,
                _ => {
                    values.push(v);
                    probs.push(p / total);
                }
            }
        }
        let mut cum = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cum.push(acc);
        }
        *cum.last_mut().unwrap() = 1.0;
        Ok(Self { values, probs, cum })
    }

    /// Law placing mass `1/m` on each of the given values.
    pub fn equiprobable(values: &[f64]) -> Result<Self> {
        let p = 1.0 / values.len() as f64;
        let atoms: Vec<(f64, f64)> = values.iter().map(|&v| (v, p)).collect();
        Self::new(&atoms)
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn cdf(&self, x: f64) -> f64 {
        let k = self.values.partition_point(|&v| v <= x);
        if k == 0 {
            0.0
        } else {
            self.cum[k - 1]
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        let k = self.cum.partition_point(|&c| c < u - CUM_EPS);
        self.values[k.min(self.values.len() - 1)]
    }

    fn quantile_right(&self, u: f64) -> f64 {
        let k = self.cum.partition_point(|&c| c <= u + CUM_EPS);
        self.values[k.min(self.values.len() - 1)]
    }

    fn quantile_integral(&self, u1: f64, u2: f64) -> f64 {
        let mut lower = 0.0f64;
        let mut total = 0.0;
        for (&v, &c) in self.values.iter().zip(&self.cum) {
            let overlap = c.min(u2) - lower.max(u1);
            if overlap > 0.0 {
                total += v * overlap;
            }
            lower = c;
        }
        total
    }
}

/// Tail-shape flags of a law at a level `α`: whether `(F(x) - α)_+ / (1 - α)`
/// is concave beyond the right `α`-quantile, or convex up to the right end of
/// the support. Linear tails carry both flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailShape {
    pub convex_beyond: bool,
    pub concave_beyond: bool,
}

impl Distribution {
    pub fn lomax(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) || !(scale > 0.0 && scale.is_finite()) {
            return domain(format!("lomax needs shape > 0 and scale > 0, got ({shape}, {scale})"));
        }
        Ok(Self::Lomax { shape, scale })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return domain(format!("exponential needs rate > 0, got {rate}"));
        }
        Ok(Self::Exponential { rate })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return domain(format!("uniform needs finite lo < hi, got ({lo}, {hi})"));
        }
        Ok(Self::Uniform { lo, hi })
    }

    pub fn point_mass(c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return domain(format!("point mass needs a finite c >= 0, got {c}"));
        }
        Ok(Self::PointMass { c })
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        if !mean.is_finite() || !(sd > 0.0 && sd.is_finite()) {
            return domain(format!("normal needs finite mean and sd > 0, got ({mean}, {sd})"));
        }
        Ok(Self::Normal { mean, sd })
    }

    pub fn discrete(atoms: &[(f64, f64)]) -> Result<Self> {
        DiscreteLaw::new(atoms).map(Self::Discrete)
    }

    /// Short family name as used in scenario files.
    pub fn family(&self) -> &'static str {
        match self {
            Self::Lomax { .. } => "lomax",
            Self::Exponential { .. } => "exponential",
            Self::Uniform { .. } => "uniform",
            Self::PointMass { .. } => "point_mass",
            Self::Normal { .. } => "normal",
            Self::Discrete(_) => "discrete",
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Lomax { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-shape * (x / scale).ln_1p()).exp_m1()
                }
            }
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Self::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Self::PointMass { c } => {
                if x >= c {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Normal { mean, sd } => normal::cdf((x - mean) / sd),
            Self::Discrete(ref law) => law.cdf(x),
        }
    }

    pub fn survival(&self, x: f64) -> f64 {
        match *self {
            Self::Lomax { shape, scale } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-shape * (x / scale).ln_1p()).exp()
                }
            }
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
            Self::Normal { mean, sd } => normal::sf((x - mean) / sd),
            _ => 1.0 - self.cdf(x),
        }
    }

    /// Left quantile `F⁻¹(u) = inf{x : F(x) ≥ u}` for `u ∈ (0, 1]`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u <= 1.0) {
            return domain(format!("quantile level {u} outside (0, 1]"));
        }
        Ok(self.quantile_unchecked(u))
    }

    /// Right quantile `F⁻¹₊(u) = inf{x : F(x) > u}` for `u ∈ [0, 1)`.
    pub fn quantile_right(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return domain(format!("right quantile level {u} outside [0, 1)"));
        }
        Ok(match *self {
            Self::Discrete(ref law) => law.quantile_right(u),
            Self::Lomax { .. } | Self::Exponential { .. } if u == 0.0 => 0.0,
            Self::Uniform { lo, .. } if u == 0.0 => lo,
            Self::Normal { .. } if u == 0.0 => f64::NEG_INFINITY,
            _ => self.quantile_unchecked(u),
        })
    }

    /// Left quantile without range checks; `u = 0` maps to the lower end of
    /// the support.
    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        match *self {
            Self::Lomax { shape, scale } => {
                if u >= 1.0 {
                    f64::INFINITY
                } else {
                    scale * (-(-u).ln_1p() / shape).exp_m1()
                }
            }
            Self::Exponential { rate } => {
                if u >= 1.0 {
                    f64::INFINITY
                } else {
                    -(-u).ln_1p() / rate
                }
            }
            Self::Uniform { lo, hi } => lo + u.clamp(0.0, 1.0) * (hi - lo),
            Self::PointMass { c } => c,
            Self::Normal { mean, sd } => mean + sd * normal::quantile(u),
            Self::Discrete(ref law) => law.quantile(u),
        }
    }

    /// Essential infimum and supremum of the support.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::Lomax { .. } | Self::Exponential { .. } => (0.0, f64::INFINITY),
            Self::Uniform { lo, hi } => (lo, hi),
            Self::PointMass { c } => (c, c),
            Self::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Self::Discrete(ref law) => (law.values[0], *law.values.last().unwrap()),
        }
    }

    /// True when `u ↦ F⁻¹(u)` is continuous on `(0, 1)`.
    pub fn has_continuous_quantile(&self) -> bool {
        match self {
            Self::Discrete(law) => law.len() == 1,
            _ => true,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Lomax { shape, scale } => {
                if shape > 1.0 {
                    scale / (shape - 1.0)
                } else {
                    f64::INFINITY
                }
            }
            Self::Exponential { rate } => 1.0 / rate,
            Self::Uniform { lo, hi } => 0.5 * (lo + hi),
            Self::PointMass { c } => c,
            Self::Normal { mean, .. } => mean,
            Self::Discrete(ref law) => law.atoms().map(|(v, p)| v * p).sum(),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Self::Lomax { shape, scale } => {
                if shape > 2.0 {
                    scale * scale * shape / ((shape - 1.0).powi(2) * (shape - 2.0))
                } else {
                    f64::INFINITY
                }
            }
            Self::Exponential { rate } => 1.0 / (rate * rate),
            Self::Uniform { lo, hi } => (hi - lo).powi(2) / 12.0,
            Self::PointMass { .. } => 0.0,
            Self::Normal { sd, .. } => sd * sd,
            Self::Discrete(ref law) => {
                let m = self.mean();
                law.atoms().map(|(v, p)| p * (v - m).powi(2)).sum()
            }
        }
    }

    /// `∫_{u1}^{u2} F⁻¹(u) du` for `0 ≤ u1 ≤ u2 ≤ 1`, in closed form.
    ///
    /// Returns `Err(Divergent)` when the integral is infinite.
    pub fn quantile_integral(&self, u1: f64, u2: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u1) || !(0.0..=1.0).contains(&u2) || u1 > u2 {
            return domain(format!("quantile integral bounds ({u1}, {u2}) invalid"));
        }
        if u1 == u2 {
            return Ok(0.0);
        }
        let width = u2 - u1;
        let value = match *self {
            Self::Lomax { shape, scale } => {
                let k = 1.0 - 1.0 / shape;
                let tail1 = 1.0 - u1;
                // ln((1 - u2) / (1 - u1))
                let log_ratio = (-width / tail1).ln_1p();
                let power_part = if k == 0.0 { -log_ratio } else { -tail1.powf(k) * (k * log_ratio).exp_m1() / k };
                scale * (power_part - width)
            }
            Self::Exponential { rate } => {
                let x1 = 1.0 - u1;
                let x2 = 1.0 - u2;
                let xlogx = |x: f64| if x == 0.0 { 0.0 } else { x * x.ln() };
                (xlogx(x2) - xlogx(x1) + width) / rate
            }
            Self::Uniform { lo, hi } => width * (lo + (hi - lo) * 0.5 * (u1 + u2)),
            Self::PointMass { c } => c * width,
            Self::Normal { mean, sd } => {
                let d1 = normal::pdf(normal::quantile(u1));
                let d2 = normal::pdf(normal::quantile(u2));
                mean * width + sd * (d1 - d2)
            }
            Self::Discrete(ref law) => law.quantile_integral(u1, u2),
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Divergent(format!("quantile integral of {} over ({u1}, {u2}) is infinite", self.family())))
        }
    }

    /// `E[g_{a,b}(X)] = ∫_a^b S(x) dx` for `0 ≤ a ≤ b ≤ ∞`.
    pub fn layer_mean(&self, a: f64, b: f64) -> Result<f64> {
        check_layer(a, b)?;
        if a == b {
            return Ok(0.0);
        }
        let value = match *self {
            Self::Lomax { shape, scale } => {
                let ya = 1.0 + a / scale;
                let yb = 1.0 + b / scale;
                if shape == 1.0 {
                    scale * (yb / ya).ln()
                } else {
                    scale * power_integral(ya, yb, shape)
                }
            }
            Self::Exponential { rate } => ((-rate * a).exp() - (-rate * b).exp()) / rate,
            Self::Uniform { lo, hi } => {
                let prim = |x: f64| {
                    if x <= lo {
                        x - lo
                    } else if x >= hi {
                        0.5 * (hi - lo)
                    } else {
                        (x - lo) - (x - lo).powi(2) / (2.0 * (hi - lo))
                    }
                };
                prim(b) - prim(a)
            }
            Self::PointMass { c } => layer_payout(c, a, b),
            Self::Normal { mean, sd } => {
                let j = |x: f64| {
                    if x == f64::INFINITY {
                        0.0
                    } else {
                        let z = (x - mean) / sd;
                        z * normal::sf(z) - normal::pdf(z)
                    }
                };
                sd * (j(b) - j(a))
            }
            Self::Discrete(ref law) => law.atoms().map(|(v, p)| p * layer_payout(v, a, b)).sum(),
        };
        finite_or_divergent(value, "layer mean", self)
    }

    /// `E[g_{a,b}(X)^2] = 2∫_a^b (x - a) S(x) dx` for `0 ≤ a ≤ b ≤ ∞`.
    pub fn layer_second_moment_part(&self, a: f64, b: f64) -> Result<f64> {
        check_layer(a, b)?;
        if a == b {
            return Ok(0.0);
        }
        let value = match *self {
            Self::Lomax { shape, scale } => {
                let ya = 1.0 + a / scale;
                let yb = 1.0 + b / scale;
                // 2λ² ∫_{ya}^{yb} (y - ya) y^(-β) dy
                let first = if shape == 2.0 { (yb / ya).ln() } else { power_integral(ya, yb, shape - 1.0) };
                let second = if shape == 1.0 { (yb / ya).ln() } else { power_integral(ya, yb, shape) };
                2.0 * scale * scale * (first - ya * second)
            }
            Self::Exponential { rate } => {
                let len = b - a;
                let x = rate * len;
                let bracket = if len.is_infinite() {
                    1.0
                } else {
                    // 1 - e^{-x}(1 + x)
                    -(-x).exp_m1() - x * (-x).exp()
                };
                2.0 * (-rate * a).exp() * bracket / (rate * rate)
            }
            Self::Uniform { lo, hi } => {
                let integrand = |x: f64| 2.0 * (x - a) * self.survival(x);
                let mut cuts = vec![a];
                for k in [lo, hi] {
                    if k > a && k < b {
                        cuts.push(k);
                    }
                }
                let end = b.min(hi.max(a));
                cuts.push(end);
                // piecewise cubic integrand: Simpson is exact on each piece
                let mut total: f64 = cuts
                    .windows(2)
                    .filter(|w| w[1] > w[0])
                    .map(|w| {
                        let m = 0.5 * (w[0] + w[1]);
                        (w[1] - w[0]) / 6.0 * (integrand(w[0]) + 4.0 * integrand(m) + integrand(w[1]))
                    })
                    .sum();
                if b > end {
                    total += 0.0;
                }
                total
            }
            Self::PointMass { c } => layer_payout(c, a, b).powi(2),
            Self::Normal { mean, sd } => {
                let prim = |x: f64| {
                    if x == f64::INFINITY {
                        (0.0, 0.0)
                    } else {
                        let z = (x - mean) / sd;
                        let s = normal::sf(z);
                        let d = normal::pdf(z);
                        (z * s - d, 0.5 * (z * z - 1.0) * s - 0.5 * z * d)
                    }
                };
                let za = (a - mean) / sd;
                let (ja, ka) = prim(a);
                let (jb, kb) = prim(b);
                2.0 * sd * sd * ((kb - ka) - za * (jb - ja))
            }
            Self::Discrete(ref law) => law.atoms().map(|(v, p)| p * layer_payout(v, a, b).powi(2)).sum(),
        };
        finite_or_divergent(value.max(0.0), "layer second moment", self)
    }

    /// `(E[(-X)_+], E[((-X)_+)^2])`, the moments of the part of the law below zero.
    pub fn lower_partial_moments(&self) -> (f64, f64) {
        match *self {
            Self::Uniform { lo, hi } if lo < 0.0 => {
                let top = -lo;
                let bottom = (-hi).max(0.0);
                let w = hi - lo;
                ((top * top - bottom * bottom) / (2.0 * w), (top.powi(3) - bottom.powi(3)) / (3.0 * w))
            }
            Self::Normal { mean, sd } => {
                let m = -mean;
                let d = m / sd;
                let (cdf, pdf) = (normal::cdf(d), normal::pdf(d));
                (m * cdf + sd * pdf, (m * m + sd * sd) * cdf + m * sd * pdf)
            }
            _ => (0.0, 0.0),
        }
    }

    /// Classifies the tail beyond the level `alpha ∈ (0, 1)`.
    ///
    /// Laws with a nonincreasing density on the tail are concave beyond; a
    /// linear distribution function is both; discrete laws are neither.
    pub fn tail_shape(&self, alpha: f64) -> TailShape {
        match *self {
            Self::Lomax { .. } | Self::Exponential { .. } => TailShape { convex_beyond: false, concave_beyond: true },
            Self::Uniform { .. } | Self::PointMass { .. } => TailShape { convex_beyond: true, concave_beyond: true },
            Self::Normal { .. } => TailShape { convex_beyond: false, concave_beyond: alpha >= 0.5 },
            Self::Discrete(_) => TailShape { convex_beyond: false, concave_beyond: false },
        }
    }

    /// Draws one value by inverse transform.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(rand::distributions::Open01);
        self.quantile_unchecked(u)
    }
}

/// Numerical tail-shape classification by second differences of
/// `(F(x) - α)_+ / (1 - α)` on a grid, with tolerance `1e-9`.
///
/// Used to cross-check [`Distribution::tail_shape`] and for laws without an
/// analytic rule. Discrete laws are always reported as neither.
pub fn tail_shape_numeric(d: &Distribution, alpha: f64) -> TailShape {
    const TOL: f64 = 1e-9;
    const POINTS: usize = 400;
    if matches!(d, Distribution::Discrete(_)) {
        return TailShape { convex_beyond: false, concave_beyond: false };
    }
    let h = |x: f64| (d.cdf(x) - alpha).max(0.0) / (1.0 - alpha);
    let start = d.quantile_right(alpha).unwrap_or(f64::NEG_INFINITY);
    let (_, sup) = d.support();
    let far = d.quantile_unchecked(1.0 - (1.0 - alpha) * 1e-6);
    let end = if sup.is_finite() { sup + (sup - start).abs().max(1.0) * 0.25 } else { far };
    let span = (end - start).max(1e-12);
    let second_diffs = |lo: f64, hi: f64| -> Vec<f64> {
        let step = (hi - lo) / POINTS as f64;
        (1..POINTS)
            .map(|k| {
                let x = lo + step * k as f64;
                h(x - step) - 2.0 * h(x) + h(x + step)
            })
            .collect()
    };
    let concave = second_diffs(start, end).iter().all(|&v| v <= TOL);
    let convex = sup.is_finite() && second_diffs(start - 0.25 * span, sup).iter().all(|&v| v >= -TOL);
    TailShape { convex_beyond: convex, concave_beyond: concave }
}

/// Reference value of `∫_a^b S(x) dx` by adaptive Simpson; finite `b` only.
pub fn layer_mean_by_quadrature(d: &Distribution, a: f64, b: f64) -> f64 {
    adaptive_simpson(&|x| d.survival(x), a, b, SIMPSON_TOL, SIMPSON_MAX_DEPTH)
}

fn check_layer(a: f64, b: f64) -> Result<()> {
    if !(a >= 0.0 && a.is_finite()) {
        return domain(format!("layer retention {a} must be finite and >= 0"));
    }
    if !(b >= a) {
        return domain(format!("layer cap {b} below retention {a}"));
    }
    Ok(())
}

/// `∫_{ya}^{yb} y^(-p) dy` for `p ≠ 1`, with `yb` possibly infinite.
fn power_integral(ya: f64, yb: f64, p: f64) -> f64 {
    let e = 1.0 - p;
    if yb.is_infinite() {
        if p > 1.0 {
            -ya.powf(e) / e
        } else {
            f64::INFINITY
        }
    } else {
        // (yb^e - ya^e)/e = ya^e (exp(e ln(yb/ya)) - 1)/e
        ya.powf(e) * (e * (yb / ya).ln()).exp_m1() / e
    }
}

fn layer_payout(x: f64, a: f64, b: f64) -> f64 {
    if x <= a {
        0.0
    } else {
        x.min(b) - a
    }
}

fn finite_or_divergent(value: f64, what: &str, d: &Distribution) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Divergent(format!("{what} of {} is infinite", d.family())))
    }
}

/// Wire form of [`Distribution`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionSpec {
    Lomax { shape: f64, scale: f64 },
    Exponential { rate: f64 },
    Uniform { lo: f64, hi: f64 },
    PointMass { c: f64 },
    Normal { mean: f64, sd: f64 },
    Discrete { atoms: Vec<(f64, f64)> },
}

impl TryFrom<DistributionSpec> for Distribution {
    type Error = Error;

    fn try_from(spec: DistributionSpec) -> Result<Self> {
        match spec {
            DistributionSpec::Lomax { shape, scale } => Self::lomax(shape, scale),
            DistributionSpec::Exponential { rate } => Self::exponential(rate),
            DistributionSpec::Uniform { lo, hi } => Self::uniform(lo, hi),
            DistributionSpec::PointMass { c } => Self::point_mass(c),
            DistributionSpec::Normal { mean, sd } => Self::normal(mean, sd),
            DistributionSpec::Discrete { atoms } => Self::discrete(&atoms),
        }
    }
}

impl From<Distribution> for DistributionSpec {
    fn from(d: Distribution) -> Self {
        match d {
            Distribution::Lomax { shape, scale } => Self::Lomax { shape, scale },
            Distribution::Exponential { rate } => Self::Exponential { rate },
            Distribution::Uniform { lo, hi } => Self::Uniform { lo, hi },
            Distribution::PointMass { c } => Self::PointMass { c },
            Distribution::Normal { mean, sd } => Self::Normal { mean, sd },
            Distribution::Discrete(law) => Self::Discrete { atoms: law.atoms().collect() },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lomax98() -> Distribution {
        Distribution::lomax(9.0, 8.0).unwrap()
    }

    fn all_parametric() -> Vec<Distribution> {
        vec![
            lomax98(),
            Distribution::lomax(6.0, 5.0).unwrap(),
            Distribution::exponential(1.3).unwrap(),
            Distribution::uniform(0.5, 3.0).unwrap(),
            Distribution::point_mass(2.0).unwrap(),
            Distribution::normal(3.0, 1.5).unwrap(),
        ]
    }

    #[test]
    fn quantile_examples() {
        assert!((lomax98().quantile(0.9).unwrap() - 2.3324).abs() < 1e-4);
        assert_eq!(Distribution::point_mass(5.0).unwrap().quantile(0.42).unwrap(), 5.0);
        assert!((Distribution::uniform(0.0, 1.0).unwrap().quantile(0.3).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(lomax98().quantile(1.0).unwrap(), f64::INFINITY);
        assert!(lomax98().quantile(0.0).is_err());
        assert!(lomax98().quantile(1.5).is_err());
    }

    #[test]
    fn right_quantile_examples() {
        let d = Distribution::discrete(&[(1.0, 0.5), (2.0, 0.5)]).unwrap();
        assert_eq!(d.quantile_right(0.5).unwrap(), 2.0);
        assert_eq!(d.quantile(0.5).unwrap(), 1.0);
        assert!((lomax98().quantile_right(0.9).unwrap() - 2.3324).abs() < 1e-4);
        assert_eq!(Distribution::uniform(0.0, 1.0).unwrap().quantile_right(0.0).unwrap(), 0.0);
        assert!(d.quantile_right(1.0).is_err());
    }

    #[test]
    fn lomax_moments_match_formulas() {
        let d = lomax98();
        assert!((d.mean() - 1.0).abs() < 1e-15);
        assert!((d.variance() - 9.0 / 7.0).abs() < 1e-14);
        assert!((d.layer_mean(0.0, f64::INFINITY).unwrap() - 1.0).abs() < 1e-14);
        let second = d.layer_second_moment_part(0.0, f64::INFINITY).unwrap();
        assert!((second - 1.0 - 9.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn layer_mean_examples() {
        let d = lomax98();
        // (λ/(β-1))(1 - (1 + b/λ)^(1-β)) at b = 2.3324
        let b = 2.3324;
        let oracle = 1.0 - (1.0 + b / 8.0f64).powf(-8.0);
        assert!((d.layer_mean(0.0, b).unwrap() - oracle).abs() < 1e-12);
        assert!((oracle - 0.8708).abs() < 1e-3);
        assert_eq!(d.layer_mean(1.0, 1.0).unwrap(), 0.0);
        let e = Distribution::exponential(1.0).unwrap();
        assert!((e.layer_mean(0.0, f64::INFINITY).unwrap() - 1.0).abs() < 1e-15);
        assert!(d.layer_mean(2.0, 1.0).is_err());
        assert!(d.layer_mean(-1.0, 1.0).is_err());
    }

    #[test]
    fn second_moment_examples() {
        let u = Distribution::uniform(0.0, 1.0).unwrap();
        assert!((u.layer_second_moment_part(0.0, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(lomax98().layer_second_moment_part(0.7, 0.7).unwrap(), 0.0);
        let d = lomax98();
        let oracle = adaptive_simpson(&|x| 2.0 * (x - 0.5) * d.survival(x), 0.5, 2.3324, 1e-12, 50);
        assert!((d.layer_second_moment_part(0.5, 2.3324).unwrap() - oracle).abs() < 1e-6);
    }

    #[test]
    fn heavy_tails_diverge() {
        let d = Distribution::lomax(0.8, 1.0).unwrap();
        assert!(matches!(d.layer_mean(0.0, f64::INFINITY), Err(Error::Divergent(_))));
        assert!(matches!(d.quantile_integral(0.5, 1.0), Err(Error::Divergent(_))));
        let d2 = Distribution::lomax(1.5, 1.0).unwrap();
        assert!(matches!(d2.layer_second_moment_part(0.0, f64::INFINITY), Err(Error::Divergent(_))));
        assert!(d2.layer_second_moment_part(0.0, 10.0).is_ok());
    }

    #[test]
    fn layer_moments_match_quadrature_oracle() {
        let pairs = [(0.0, 0.4), (0.2, 1.7), (1.0, 2.5), (0.3, 6.0), (2.2, 2.9)];
        for d in all_parametric() {
            for &(a, b) in &pairs {
                let m = d.layer_mean(a, b).unwrap();
                let oracle_m = adaptive_simpson(&|x| d.survival(x), a, b, 1e-12, 50);
                assert!((m - oracle_m).abs() <= 1e-6 * oracle_m.abs().max(1e-3), "{d:?} ({a},{b}): {m} vs {oracle_m}");
                let v = d.layer_second_moment_part(a, b).unwrap();
                let oracle_v = adaptive_simpson(&|x| 2.0 * (x - a) * d.survival(x), a, b, 1e-12, 50);
                assert!((v - oracle_v).abs() <= 1e-6 * oracle_v.abs().max(1e-3), "{d:?} ({a},{b}): {v} vs {oracle_v}");
            }
        }
    }

    #[test]
    fn quantile_integral_matches_direct_sum() {
        let law = Distribution::discrete(&[(0.0, 0.2), (1.0, 0.3), (4.0, 0.5)]).unwrap();
        // ∫_{0.1}^{0.9} q = 0*0.1 + 1*0.3 + 4*0.4
        assert!((law.quantile_integral(0.1, 0.9).unwrap() - 1.9).abs() < 1e-14);
        let e = Distribution::exponential(2.0).unwrap();
        assert!((e.quantile_integral(0.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        let n = Distribution::normal(1.0, 2.0).unwrap();
        assert!((n.quantile_integral(0.0, 1.0).unwrap() - 1.0).abs() < 1e-14);
        let l = lomax98();
        assert!((l.quantile_integral(0.0, 1.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tail_shape_examples() {
        assert!(lomax98().tail_shape(0.9).concave_beyond);
        let u = Distribution::uniform(0.0, 1.0).unwrap().tail_shape(0.5);
        assert!(u.concave_beyond && u.convex_beyond);
        assert!(Distribution::normal(0.0, 1.0).unwrap().tail_shape(0.5).concave_beyond);
        let disc = Distribution::discrete(&[(1.0, 0.5), (2.0, 0.5)]).unwrap().tail_shape(0.3);
        assert!(!disc.concave_beyond && !disc.convex_beyond);
    }

    #[test]
    fn numeric_tail_shape_agrees_with_analytic_rules() {
        let cases = [
            (lomax98(), 0.9),
            (Distribution::exponential(2.0).unwrap(), 0.5),
            (Distribution::uniform(0.0, 1.0).unwrap(), 0.5),
            (Distribution::normal(0.0, 1.0).unwrap(), 0.6),
            (Distribution::normal(0.0, 1.0).unwrap(), 0.2),
        ];
        for (d, alpha) in cases {
            assert_eq!(tail_shape_numeric(&d, alpha), d.tail_shape(alpha), "{d:?} at {alpha}");
        }
    }

    #[test]
    fn discrete_merges_ties_and_validates() {
        let d = DiscreteLaw::new(&[(2.0, 0.25), (1.0, 0.5), (2.0, 0.25)]).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.atoms().collect::<Vec<_>>(), vec![(1.0, 0.5), (2.0, 0.5)]);
        assert!(DiscreteLaw::new(&[(1.0, 0.4)]).is_err());
        assert!(DiscreteLaw::new(&[(-1.0, 1.0)]).is_err());
    }

    #[test]
    fn serde_round_trip_validates() {
        let d: Distribution = serde_json::from_str(r#"{"family": "lomax", "shape": 9, "scale": 8}"#).unwrap();
        assert_eq!(d, lomax98());
        let back: Distribution = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(back, d);
        let disc: Distribution =
            serde_json::from_str(r#"{"family": "discrete", "atoms": [[0, 0.5], [3, 0.5]]}"#).unwrap();
        assert_eq!(disc.quantile(0.75).unwrap(), 3.0);
        assert!(serde_json::from_str::<Distribution>(r#"{"family": "lomax", "shape": -1, "scale": 8}"#).is_err());
    }

    #[test]
    fn layer_mean_is_additive() {
        for d in all_parametric() {
            for (a, b, c) in [(0.0, 0.5, 2.0), (0.3, 1.1, 1.2), (1.0, 2.0, f64::INFINITY)] {
                let lhs = d.layer_mean(a, b).unwrap() + d.layer_mean(b, c).unwrap();
                let rhs = d.layer_mean(a, c).unwrap();
                assert!((lhs - rhs).abs() < 1e-9, "{d:?}");
            }
        }
    }

    proptest! {
        #[test]
        fn quantile_cdf_galois_inequalities(u in 1e-9f64..1.0, x in -3.0f64..12.0) {
            for d in all_parametric() {
                let q = d.quantile(u).unwrap();
                prop_assert!(d.cdf(q) >= u - 1e-12, "{:?}: cdf(q({})) = {}", d, u, d.cdf(q));
                let p = d.cdf(x);
                if p > 0.0 && p < 1.0 - 1e-6 {
                    prop_assert!(d.quantile(p).unwrap() <= x + 1e-9);
                }
                prop_assert!((d.survival(x) - (1.0 - d.cdf(x))).abs() < 1e-12);
            }
        }

        #[test]
        fn quantile_is_monotone(u in 1e-6f64..0.999, du in 0.0f64..1e-3) {
            for d in all_parametric() {
                prop_assert!(d.quantile(u).unwrap() <= d.quantile(u + du).unwrap());
            }
        }

        #[test]
        fn layer_additivity(a in 0.0f64..3.0, l1 in 0.0f64..3.0, l2 in 0.0f64..3.0) {
            let (b, c) = (a + l1, a + l1 + l2);
            for d in all_parametric() {
                let lhs = d.layer_mean(a, b).unwrap() + d.layer_mean(b, c).unwrap();
                prop_assert!((lhs - d.layer_mean(a, c).unwrap()).abs() < 1e-9);
            }
        }
    }
}
