//! Value-at-Risk, Range Value-at-Risk and Expected Shortfall.
//!
//! `RVaR_{β,α}(X)` averages the quantile function over `[1 - β - α, 1 - β]`.
//! A window of length zero means `VaR_{1-β}`, and `ES_a = RVaR_{0, 1-a}`.
//! Pushforwards `f(X)` of piecewise-linear nondecreasing `f` are evaluated
//! through `F_{f(X)}⁻¹ = f ∘ F_X⁻¹`, piece by piece.

use serde::{Deserialize, Serialize};

use crate::contracts::{Indemnity, LinearPiece};
use crate::distributions::Distribution;
use crate::error::{domain, Error, Result};
use crate::quadrature::GaussLegendre;

/// Slack allowed in `β + α ≤ 1` to absorb rounding in callers.
const LEVEL_SLACK: f64 = 1e-12;

/// Default Gauss–Legendre size for the quadrature path.
pub const DEFAULT_NODES: usize = 256;

/// Window of an RVaR evaluator: tail offset `beta` and length `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLevels")]
pub struct RiskLevels {
    pub beta: f64,
    pub alpha: f64,
}

#[derive(Deserialize)]
struct RawLevels {
    beta: f64,
    alpha: f64,
}

impl TryFrom<RawLevels> for RiskLevels {
    type Error = Error;

    fn try_from(raw: RawLevels) -> Result<Self> {
        Self::new(raw.beta, raw.alpha)
    }
}

impl RiskLevels {
    pub fn new(beta: f64, alpha: f64) -> Result<Self> {
        if !(beta >= 0.0) || !(alpha >= 0.0) || !(beta + alpha <= 1.0 + LEVEL_SLACK) {
            return domain(format!(
                "risk levels (beta={beta}, alpha={alpha}) need beta, alpha >= 0 and beta + alpha <= 1"
            ));
        }
        if alpha == 0.0 && beta >= 1.0 {
            return domain("a zero window needs beta < 1");
        }
        Ok(Self { beta, alpha: alpha.min(1.0 - beta) })
    }

    /// The window that evaluates `VaR_p`.
    pub fn var(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return domain(format!("VaR level {p} outside (0, 1]"));
        }
        Ok(Self { beta: 1.0 - p, alpha: 0.0 })
    }

    /// The window that evaluates `ES_a`.
    pub fn es(a: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&a) {
            return domain(format!("ES level {a} outside [0, 1)"));
        }
        Ok(Self { beta: 0.0, alpha: 1.0 - a })
    }

    pub fn is_var(&self) -> bool {
        self.alpha == 0.0
    }

    /// Lower end `1 - β - α` of the probability window.
    pub fn lower(&self) -> f64 {
        (1.0 - self.beta - self.alpha).max(0.0)
    }

    /// Upper end `1 - β` of the probability window.
    pub fn upper(&self) -> f64 {
        1.0 - self.beta
    }
}

/// Which side of a contract is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Ceded,
    Retained,
}

/// `VaR_p(X) = F⁻¹(p)`.
pub fn var(d: &Distribution, p: f64) -> Result<f64> {
    d.quantile(p)
}

/// `RVaR_{β,α}(X)` from the closed-form quantile integral.
pub fn rvar(d: &Distribution, levels: RiskLevels) -> Result<f64> {
    let (lo, hi) = (levels.lower(), levels.upper());
    if levels.is_var() || hi <= lo {
        return d.quantile(hi);
    }
    // Dividing by the rounded width keeps constant quantiles exact.
    Ok(d.quantile_integral(lo, hi)? / (hi - lo))
}

/// `RVaR_{β,α}(X)` by Gauss–Legendre quadrature of the quantile function.
///
/// Divergent windows are detected from the closed form and reported as
/// errors rather than as a finite quadrature artefact.
pub fn rvar_quadrature(d: &Distribution, levels: RiskLevels, rule: &GaussLegendre) -> Result<f64> {
    if levels.is_var() || levels.upper() <= levels.lower() {
        return d.quantile(levels.upper());
    }
    d.quantile_integral(levels.lower(), levels.upper())?;
    let identity = [LinearPiece { end: f64::INFINITY, intercept: 0.0, slope: 1.0 }];
    Ok(transform_quadrature(d, &identity, levels, rule))
}

/// `ES_a(X) = RVaR_{0, 1-a}(X)`.
pub fn es(d: &Distribution, a: f64) -> Result<f64> {
    rvar(d, RiskLevels::es(a)?)
}

/// RVaR of the ceded loss `f(X)` or the retained loss `X - f(X)`.
pub fn measure_of_contract(d: &Distribution, f: &Indemnity, levels: RiskLevels, side: Side) -> Result<f64> {
    rvar_of_pieces(d, &side_pieces(f, side), levels)
}

/// Quadrature counterpart of [`measure_of_contract`].
pub fn measure_of_contract_quadrature(
    d: &Distribution,
    f: &Indemnity,
    levels: RiskLevels,
    side: Side,
    rule: &GaussLegendre,
) -> Result<f64> {
    let pieces = side_pieces(f, side);
    if levels.is_var() || levels.upper() <= levels.lower() {
        return rvar_of_pieces(d, &pieces, levels);
    }
    // exact pass first so divergence surfaces as an error
    rvar_of_pieces(d, &pieces, levels)?;
    Ok(transform_quadrature(d, &pieces, levels, rule))
}

fn side_pieces(f: &Indemnity, side: Side) -> Vec<LinearPiece> {
    match side {
        Side::Ceded => f.pieces(),
        Side::Retained => f.retained_pieces(),
    }
}

fn eval_piece(p: &LinearPiece, x: f64) -> f64 {
    if p.slope == 0.0 {
        p.intercept
    } else {
        p.intercept + p.slope * x
    }
}

fn piece_at(pieces: &[LinearPiece], x: f64) -> &LinearPiece {
    pieces.iter().find(|p| x <= p.end).unwrap_or_else(|| pieces.last().unwrap())
}

/// Probability-axis breakpoints: piece `k` of the pushforward lives on
/// `(bounds[k], bounds[k + 1]]`.
fn probability_bounds(d: &Distribution, pieces: &[LinearPiece]) -> Vec<f64> {
    let mut bounds = Vec::with_capacity(pieces.len() + 1);
    bounds.push(0.0);
    for p in &pieces[..pieces.len() - 1] {
        let last = *bounds.last().unwrap();
        bounds.push(d.cdf(p.end).max(last));
    }
    bounds.push(1.0);
    bounds
}

/// RVaR of `φ(X)` for a continuous piecewise-linear nondecreasing `φ`.
pub fn rvar_of_pieces(d: &Distribution, pieces: &[LinearPiece], levels: RiskLevels) -> Result<f64> {
    let (lo, hi) = (levels.lower(), levels.upper());
    if levels.is_var() || hi <= lo {
        let x = d.quantile(hi)?;
        return Ok(eval_piece(piece_at(pieces, x), x));
    }
    let bounds = probability_bounds(d, pieces);
    let mut total = 0.0;
    for (k, p) in pieces.iter().enumerate() {
        let u1 = bounds[k].max(lo);
        let u2 = bounds[k + 1].min(hi);
        if u2 <= u1 {
            continue;
        }
        total += p.intercept * (u2 - u1);
        if p.slope != 0.0 {
            total += p.slope * d.quantile_integral(u1, u2)?;
        }
    }
    Ok(total / (hi - lo))
}

fn transform_quadrature(d: &Distribution, pieces: &[LinearPiece], levels: RiskLevels, rule: &GaussLegendre) -> f64 {
    let (lo, hi) = (levels.lower(), levels.upper());
    let mut cuts = vec![lo];
    let mut bounds = probability_bounds(d, pieces);
    if let Distribution::Discrete(law) = d {
        let mut acc = 0.0;
        for (_, p) in law.atoms() {
            acc += p;
            bounds.push(acc);
        }
    }
    bounds.sort_by(f64::total_cmp);
    cuts.extend(bounds.into_iter().filter(|&u| u > lo && u < hi));
    cuts.push(hi);
    let integrand = |u: f64| {
        let x = d.quantile_unchecked(u);
        eval_piece(piece_at(pieces, x), x)
    };
    let total: f64 =
        cuts.windows(2).filter(|w| w[1] > w[0]).map(|w| rule.integrate_clustered(w[0], w[1], integrand)).sum();
    total / (hi - lo)
}
