//! Finite-dimensional objectives over parametric contract families and their
//! minimizers.
//!
//! Every objective is the sum of the insurers' retained risk and a bound on
//! the reinsurer's risk of the aggregate ceded loss. Depending on the
//! objective that bound is an explicit expression ([`ObjectiveId::G`]), a
//! simplex infimum ([`ObjectiveId::R`], [`ObjectiveId::Gbar`],
//! [`ObjectiveId::L`], [`ObjectiveId::H`]), a split over `t`
//! ([`ObjectiveId::G1bar`]), a regime-dependent value
//! ([`ObjectiveId::K`]) or a normal approximation ([`ObjectiveId::TildeG`]).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotic::{self, contract_moments, CappedLayers};
use crate::contracts::{Admissibility, AdmissibleDomain, Indemnity, LinearPiece};
use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::normal;
use crate::risk_measures::{measure_of_contract, rvar_of_pieces, RiskLevels, Side};
use crate::scenario::{Dependence, Mode, Scenario};
use crate::search::{self, argmin_first, compositions, coordinate_refine, flat_interval, linspace, SearchConfig};
use crate::worst_case::{minimize_over_simplex, shapes_agree, SimplexGrid, SimplexPoint};

/// Parameter ranges for contract searches end at this upper quantile.
const UPPER_QUANTILE: f64 = 1.0 - 1e-4;
/// Gauss–Seidel sweep limit of the per-insurer table search.
const TABLE_SWEEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObjectiveId {
    /// Layers, ES-type reinsurer (`β = 0`), explicit ceded term.
    G,
    /// Proportional-plus-excess contracts under an RVaR reinsurer.
    R,
    /// Layers under a VaR reinsurer.
    Gbar,
    /// Capped proportional contracts under a VaR reinsurer.
    L,
    /// Shifted proportional contracts under a VaR reinsurer.
    H,
    /// Two layers, VaR reinsurer, split parameter `t`.
    G1bar,
    /// Capped layers under a chosen dependence regime.
    K,
    /// Layers under the normal approximation for independent insurers.
    TildeG,
}

impl ObjectiveId {
    pub const ALL: [ObjectiveId; 8] =
        [Self::G, Self::R, Self::Gbar, Self::L, Self::H, Self::G1bar, Self::K, Self::TildeG];

    pub fn domain(self) -> AdmissibleDomain {
        match self {
            Self::R => AdmissibleDomain::A2,
            Self::L => AdmissibleDomain::A3,
            Self::H => AdmissibleDomain::A4,
            _ => AdmissibleDomain::A1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::G => "G",
            Self::R => "R",
            Self::Gbar => "Gbar",
            Self::L => "L",
            Self::H => "H",
            Self::G1bar => "G1bar",
            Self::K => "K",
            Self::TildeG => "TildeG",
        }
    }

    fn uses_simplex(self) -> bool {
        matches!(self, Self::R | Self::Gbar | Self::L | Self::H)
    }
}

impl fmt::Display for ObjectiveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectiveId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown objective {s:?}")))
    }
}

/// Minimizer of the inner problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    None,
    Gamma(SimplexPoint),
    T(f64),
}

impl Witness {
    pub fn t(&self) -> Option<f64> {
        match *self {
            Self::T(t) => Some(t),
            _ => None,
        }
    }
}

/// An objective value with the inner minimizer that attains it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    pub witness: Witness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub objective_id: ObjectiveId,
    /// Contract parameters per insurer in family order.
    #[serde(with = "ext_rows")]
    pub params: Vec<Vec<f64>>,
    pub objective: f64,
    pub witness: Witness,
    /// For each insurer and parameter, the interval over which moving that
    /// parameter alone keeps the objective within the flat tolerance.
    #[serde(with = "ext_intervals")]
    pub flat_intervals: Vec<Vec<[f64; 2]>>,
    /// False when the shape conditions that make the objective exact were
    /// not verified.
    pub assumption_met: bool,
    /// True when the optimum was read off without a search.
    pub fast_path: bool,
    pub notes: Vec<String>,
}

impl OptimizeResult {
    pub fn contracts(&self) -> Result<Vec<Indemnity>> {
        build_contracts(self.objective_id.domain(), &self.params)
    }
}

/// Outcome of [`boundary_t_certificate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub boundary_only: bool,
    pub reason: String,
}

fn build_contracts(domain: AdmissibleDomain, params: &[Vec<f64>]) -> Result<Vec<Indemnity>> {
    params.iter().map(|p| domain.build(p)).collect()
}

fn contract_var(d: &Distribution, pieces: &[LinearPiece], p: f64) -> Result<f64> {
    rvar_of_pieces(d, pieces, RiskLevels::var(p.min(1.0))?)
}

/// `Σ_i ρ_i(X_i - f_i(X_i))` with each insurer's own window.
pub fn retained_total(s: &Scenario, contracts: &[Indemnity]) -> Result<f64> {
    check_count(s, contracts.len())?;
    s.marginals
        .iter()
        .zip(contracts)
        .zip(&s.insurer_levels)
        .map(|((d, f), &l)| measure_of_contract(d, f, l, Side::Retained))
        .sum()
}

fn check_count(s: &Scenario, k: usize) -> Result<()> {
    if k != s.n() {
        return Err(Error::Config(format!("{k} contracts for {} insurers", s.n())));
    }
    Ok(())
}

fn check_gamma(s: &Scenario, gamma: &SimplexPoint) -> Result<()> {
    let total = s.reinsurer_levels.beta + s.reinsurer_levels.alpha;
    let floor = s.reinsurer_levels.alpha;
    if gamma.gamma.len() != s.n() + 1 || (gamma.total - total).abs() > 1e-9 || (gamma.floor - floor).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "simplex point does not match the reinsurer window (total {total}, floor {floor})"
        )));
    }
    gamma.validate()
}

/// `Σ_i RVaR_{γ_i,γ₀}(f_i(X_i))`.
pub fn ceded_at_gamma(s: &Scenario, contracts: &[Indemnity], gamma: &SimplexPoint) -> Result<f64> {
    check_count(s, contracts.len())?;
    check_gamma(s, gamma)?;
    s.marginals
        .iter()
        .zip(contracts)
        .enumerate()
        .map(|(i, (d, f))| measure_of_contract(d, f, gamma.levels(i), Side::Ceded))
        .sum()
}

/// Retained total plus the ceded sum at a fixed simplex point.
pub fn objective_at_gamma(s: &Scenario, contracts: &[Indemnity], gamma: &SimplexPoint) -> Result<f64> {
    Ok(retained_total(s, contracts)? + ceded_at_gamma(s, contracts, gamma)?)
}

fn layers(a: &[f64], b: &[f64]) -> Result<Vec<Indemnity>> {
    if a.len() != b.len() {
        return Err(Error::Config("retention and cap vectors differ in length".into()));
    }
    a.iter().zip(b).map(|(&a, &b)| Indemnity::layer(a, b)).collect()
}

fn family(domain: AdmissibleDomain, columns: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
    let n = columns[0].len();
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::Config("parameter vectors differ in length".into()));
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
    if let Admissibility::Reject(why) = domain.check_all(&rows) {
        return Err(Error::Inadmissible(why));
    }
    Ok(rows)
}

/// Layers under an ES-type reinsurer:
/// `Σ RVaR_{β_i,α_i}(X_i - g_i(X_i)) + RVaR_{0,α}(g_i(X_i))`.
pub fn objective_g(s: &Scenario, a: &[f64], b: &[f64]) -> Result<f64> {
    check_scenario(ObjectiveId::G, s)?;
    let contracts = layers(a, b)?;
    check_count(s, contracts.len())?;
    objective_g_contracts(s, &contracts)
}

fn objective_g_contracts(s: &Scenario, contracts: &[Indemnity]) -> Result<f64> {
    let es_window = RiskLevels { beta: 0.0, alpha: s.reinsurer_levels.alpha };
    let ceded: f64 = s
        .marginals
        .iter()
        .zip(contracts)
        .map(|(d, f)| measure_of_contract(d, f, es_window, Side::Ceded))
        .sum::<Result<f64>>()?;
    Ok(retained_total(s, contracts)? + ceded)
}

/// Proportional-plus-excess contracts at a fixed simplex point.
pub fn objective_r(s: &Scenario, a: &[f64], b: &[f64], c: &[f64], gamma: &SimplexPoint) -> Result<f64> {
    check_scenario(ObjectiveId::R, s)?;
    let params = family(AdmissibleDomain::A2, &[a, b, c])?;
    objective_at_gamma(s, &build_contracts(AdmissibleDomain::A2, &params)?, gamma)
}

/// Layers under a VaR reinsurer at a fixed simplex point.
pub fn objective_gbar(s: &Scenario, a: &[f64], b: &[f64], gamma: &SimplexPoint) -> Result<f64> {
    check_scenario(ObjectiveId::Gbar, s)?;
    objective_at_gamma(s, &layers(a, b)?, gamma)
}

/// Capped proportional contracts at a fixed simplex point.
pub fn objective_l(s: &Scenario, a: &[f64], b: &[f64], gamma: &SimplexPoint) -> Result<f64> {
    check_scenario(ObjectiveId::L, s)?;
    let params = family(AdmissibleDomain::A3, &[a, b])?;
    objective_at_gamma(s, &build_contracts(AdmissibleDomain::A3, &params)?, gamma)
}

/// Shifted proportional contracts at a fixed simplex point.
pub fn objective_h(s: &Scenario, a: &[f64], b: &[f64], gamma: &SimplexPoint) -> Result<f64> {
    check_scenario(ObjectiveId::H, s)?;
    let params = family(AdmissibleDomain::A4, &[a, b])?;
    objective_at_gamma(s, &build_contracts(AdmissibleDomain::A4, &params)?, gamma)
}

/// Two layers under a VaR reinsurer at level `p` with split `t ∈ [0, 1-p]`:
/// retained VaRs plus `VaR_{p+t}(g₁(X₁)) + VaR_{1-t}(g₂(X₂))`.
pub fn objective_g1bar(s: &Scenario, a: &[f64], b: &[f64], t: f64) -> Result<f64> {
    check_scenario(ObjectiveId::G1bar, s)?;
    let contracts = layers(a, b)?;
    check_count(s, contracts.len())?;
    let p = s.reinsurer_prob();
    if !(t >= 0.0 && t <= 1.0 - p + 1e-12) {
        return Err(Error::Domain(format!("split {t} outside [0, {}]", 1.0 - p)));
    }
    Ok(retained_total(s, &contracts)? + split_sum(s, &pieces_of(&contracts), p, t)?)
}

fn pieces_of(contracts: &[Indemnity]) -> Vec<Vec<LinearPiece>> {
    contracts.iter().map(Indemnity::pieces).collect()
}

fn split_sum(s: &Scenario, pieces: &[Vec<LinearPiece>], p: f64, t: f64) -> Result<f64> {
    Ok(contract_var(&s.marginals[0], &pieces[0], p + t)? + contract_var(&s.marginals[1], &pieces[1], 1.0 - t)?)
}

/// `(min_t value, smallest minimizing t)` of the two-risk split.
fn split_search(s: &Scenario, contracts: &[Indemnity], cfg: &SearchConfig) -> Result<(f64, f64)> {
    let retained = retained_total(s, contracts)?;
    let pieces = pieces_of(contracts);
    let p = s.reinsurer_prob();
    let (t, v) =
        search::minimize_1d(|t| split_sum(s, &pieces, p, t).unwrap_or(f64::INFINITY), 0.0, 1.0 - p, cfg.t_points)
            .ok_or_else(|| Error::Divergent("split objective is infinite for every t".into()))?;
    Ok((retained + v, t))
}

/// Capped layers `g_{a_i,b_i}` under the scenario's dependence regime.
///
/// The worst case minimizes the two-risk split over `t`; the comonotonic
/// regime adds the ceded VaRs; the independent regime uses the normal
/// approximation `Σ E g_i + Φ⁻¹(p)·√(Σ Var g_i)` of the ceded sum's VaR.
pub fn objective_k(s: &Scenario, a: &[f64], b: &[f64], cfg: &SearchConfig) -> Result<Evaluation> {
    check_scenario(ObjectiveId::K, s)?;
    let contracts = layers(a, b)?;
    check_count(s, contracts.len())?;
    k_value(s, &contracts, effective_regime(s, s.dependence), cfg)
}

/// With a single insurer every coupling is the same.
fn effective_regime(s: &Scenario, dependence: Dependence) -> Dependence {
    if s.n() == 1 {
        Dependence::Comonotonic
    } else {
        dependence
    }
}

fn k_value(s: &Scenario, contracts: &[Indemnity], regime: Dependence, cfg: &SearchConfig) -> Result<Evaluation> {
    let p = s.reinsurer_prob();
    match regime {
        Dependence::WorstCase => {
            let (value, t) = split_search(s, contracts, cfg)?;
            Ok(Evaluation { value, witness: Witness::T(t) })
        }
        Dependence::Comonotonic => {
            let ceded: f64 =
                s.marginals.iter().zip(contracts).map(|(d, f)| contract_var(d, &f.pieces(), p)).sum::<Result<f64>>()?;
            Ok(Evaluation { value: retained_total(s, contracts)? + ceded, witness: Witness::None })
        }
        Dependence::IID => {
            let (mut mean, mut var) = (0.0, 0.0);
            for (d, f) in s.marginals.iter().zip(contracts) {
                let (m, v) = contract_moments(d, f)?;
                mean += m;
                var += v;
            }
            let value = retained_total(s, contracts)? + mean + normal::quantile(p) * var.sqrt();
            Ok(Evaluation { value, witness: Witness::None })
        }
    }
}

/// Caps `b_i = VaR_{p_i}(X_i)` at which the capped-layer searches fix the
/// layer tops.
pub fn reduce_caps(s: &Scenario) -> Result<Vec<f64>> {
    asymptotic::var_caps(s)
}

/// Whether the two-risk split is known to be minimized at `t = 0` or
/// `t = 1 - p`: either `p ≥ p₁ + p₂ - 1`, or both marginals are convex
/// beyond `p`.
pub fn boundary_t_certificate(s: &Scenario) -> Result<Certificate> {
    s.require_mode(Mode::VaR, "the split certificate")?;
    if s.n() != 2 {
        return Err(Error::Config("the split certificate needs two insurers".into()));
    }
    let (p, p1, p2) = (s.reinsurer_prob(), s.insurer_prob(0), s.insurer_prob(1));
    if p >= p1 + p2 - 1.0 - 1e-12 {
        return Ok(Certificate { boundary_only: true, reason: format!("level {p} >= {p1} + {p2} - 1") });
    }
    let convex = s.marginals.iter().all(|d| d.has_continuous_quantile() && d.tail_shape(p).convex_beyond);
    if convex {
        return Ok(Certificate { boundary_only: true, reason: format!("both marginals convex beyond level {p}") });
    }
    Ok(Certificate { boundary_only: false, reason: "no sufficient condition holds".into() })
}

/// Retained total plus the simplex infimum of the ceded sum for fixed
/// contracts.
pub fn worst_case_objective(s: &Scenario, contracts: &[Indemnity], grid: SimplexGrid) -> Result<(f64, SimplexPoint)> {
    let retained = retained_total(s, contracts)?;
    let pieces = pieces_of(contracts);
    let total = s.reinsurer_levels.beta + s.reinsurer_levels.alpha;
    let (ceded, point) =
        minimize_over_simplex(s.n(), total, s.reinsurer_levels.alpha, grid, |g| gamma_sum(&s.marginals, &pieces, g))?;
    Ok((retained + ceded, point))
}

fn gamma_sum(marginals: &[Distribution], pieces: &[Vec<LinearPiece>], g: &[f64]) -> f64 {
    marginals
        .iter()
        .zip(pieces)
        .enumerate()
        .map(|(i, (d, p))| rvar_of_pieces(d, p, RiskLevels { beta: g[i + 1], alpha: g[0] }).unwrap_or(f64::INFINITY))
        .sum()
}

fn check_scenario(id: ObjectiveId, s: &Scenario) -> Result<()> {
    let what = format!("objective {id}");
    match id {
        ObjectiveId::G => {
            s.require_mode(Mode::RVaR, &what)?;
            if s.reinsurer_levels.beta != 0.0 {
                return Err(Error::Config(format!("{what} needs a reinsurer window with beta = 0")));
            }
        }
        ObjectiveId::R => s.require_mode(Mode::RVaR, &what)?,
        ObjectiveId::Gbar | ObjectiveId::L | ObjectiveId::H => s.require_mode(Mode::VaR, &what)?,
        ObjectiveId::G1bar => {
            s.require_mode(Mode::VaR, &what)?;
            s.require_n(2, &what)?;
        }
        ObjectiveId::K => {
            s.require_mode(Mode::VaR, &what)?;
            if s.dependence == Dependence::WorstCase && s.n() > 2 {
                return Err(Error::Config(format!("{what} under the worst case supports at most two insurers")));
            }
        }
        ObjectiveId::TildeG => {}
    }
    Ok(())
}

fn assumption(id: ObjectiveId, s: &Scenario) -> bool {
    let continuous = s.marginals.iter().all(Distribution::has_continuous_quantile);
    let p = s.reinsurer_prob();
    match id {
        ObjectiveId::R => {
            let level = s.reinsurer_levels.lower().clamp(1e-12, 1.0 - 1e-12);
            continuous && s.marginals.iter().all(|d| d.tail_shape(level).concave_beyond)
        }
        ObjectiveId::Gbar => s.n() <= 2 || shapes_agree(&s.marginals, p),
        ObjectiveId::L => continuous && s.marginals.iter().all(|d| d.tail_shape(p).convex_beyond),
        ObjectiveId::H => continuous && s.marginals.iter().all(|d| d.tail_shape(p).concave_beyond),
        ObjectiveId::G | ObjectiveId::G1bar | ObjectiveId::K | ObjectiveId::TildeG => true,
    }
}

/// Evaluates objective `id` at per-insurer parameters, solving the inner
/// problem (simplex search with the coarse grid plus refinement, or the
/// split search over `t`).
pub fn evaluate(id: ObjectiveId, s: &Scenario, params: &[Vec<f64>], cfg: &SearchConfig) -> Result<Evaluation> {
    check_scenario(id, s)?;
    check_count(s, params.len())?;
    let contracts = build_contracts(id.domain(), params)?;
    match id {
        ObjectiveId::G => Ok(Evaluation { value: objective_g_contracts(s, &contracts)?, witness: Witness::None }),
        ObjectiveId::R | ObjectiveId::Gbar | ObjectiveId::L | ObjectiveId::H => {
            let (value, point) = worst_case_objective(s, &contracts, SimplexGrid::coarse(cfg))?;
            Ok(Evaluation { value, witness: Witness::Gamma(point) })
        }
        ObjectiveId::G1bar => k_value(s, &contracts, Dependence::WorstCase, cfg),
        ObjectiveId::K => k_value(s, &contracts, effective_regime(s, s.dependence), cfg),
        ObjectiveId::TildeG => {
            Ok(Evaluation { value: asymptotic::objective_tilde_v(s, &contracts)?, witness: Witness::None })
        }
    }
}

fn evaluate_value(id: ObjectiveId, s: &Scenario, params: &[Vec<f64>], cfg: &SearchConfig) -> f64 {
    evaluate(id, s, params, cfg).map_or(f64::INFINITY, |e| e.value)
}

/// Minimizes objective `id` over its contract family.
pub fn minimize(id: ObjectiveId, s: &Scenario, cfg: &SearchConfig) -> Result<OptimizeResult> {
    check_scenario(id, s)?;
    let mut notes = Vec::new();
    let assumption_met = assumption(id, s);
    if !assumption_met {
        notes.push("tail-shape condition not verified; the value is an upper bound".to_string());
    }
    let (params, fast_path) = match id {
        ObjectiveId::G => (minimize_g(s, cfg)?, false),
        ObjectiveId::R | ObjectiveId::Gbar | ObjectiveId::L | ObjectiveId::H => {
            (minimize_simplex_family(id, s, cfg)?, false)
        }
        ObjectiveId::G1bar | ObjectiveId::K => minimize_capped(id, s, cfg, &mut notes)?,
        ObjectiveId::TildeG => (minimize_tilde_g(s, cfg)?, false),
    };
    let eval = evaluate(id, s, &params, cfg)?;
    if !eval.value.is_finite() {
        return Err(Error::Solver(format!("objective {id} is not finite at the returned contracts")));
    }
    if let (Some(t), Ok(cert)) = (eval.witness.t(), boundary_t_certificate(s)) {
        let p = s.reinsurer_prob();
        if cert.boundary_only && t != 0.0 && (t - (1.0 - p)).abs() > 1e-12 {
            notes.push(format!("split {t} is interior although {}", cert.reason));
        }
    }
    let flat_intervals = if cfg.flat_intervals {
        flat_intervals(id, s, &params, eval.value, cfg)?
    } else {
        params.iter().map(|p| p.iter().map(|&x| [x, x]).collect()).collect()
    };
    Ok(OptimizeResult {
        objective_id: id,
        params,
        objective: eval.value,
        witness: eval.witness,
        flat_intervals,
        assumption_met,
        fast_path,
        notes,
    })
}

/// Search range of each parameter of one insurer's contract.
fn param_ranges(id: ObjectiveId, d: &Distribution) -> Vec<(f64, f64)> {
    let top = d.quantile_unchecked(UPPER_QUANTILE).max(0.0);
    match id.domain() {
        AdmissibleDomain::A1 => vec![(0.0, top), (0.0, top)],
        AdmissibleDomain::A2 => vec![(0.0, 1.0), (0.0, top), (0.0, 1.0)],
        AdmissibleDomain::A3 | AdmissibleDomain::A4 => vec![(0.0, 1.0), (0.0, top)],
    }
}

/// Grid of admissible parameter tuples in lexicographic order. Layer and
/// capped-proportional caps also take the value `∞`.
fn family_grid(domain: AdmissibleDomain, top: f64, k: usize) -> Vec<Vec<f64>> {
    let unit = linspace(0.0, 1.0, k);
    let money = linspace(0.0, top, k);
    let mut out = Vec::new();
    match domain {
        AdmissibleDomain::A1 => {
            for &a in &money {
                for &b in money.iter().filter(|&&b| b >= a).chain(std::iter::once(&f64::INFINITY)) {
                    out.push(vec![a, b]);
                }
            }
        }
        AdmissibleDomain::A2 => {
            for &a in &unit {
                for &b in &money {
                    for &c in unit.iter().filter(|&&c| a + c <= 1.0 + 1e-12) {
                        out.push(vec![a, b, c.min(1.0 - a)]);
                    }
                }
            }
        }
        AdmissibleDomain::A3 => {
            for &a in &unit {
                for &b in money.iter().chain(std::iter::once(&f64::INFINITY)) {
                    out.push(vec![a, b]);
                }
            }
        }
        AdmissibleDomain::A4 => {
            for &a in &unit {
                for &b in &money {
                    out.push(vec![a, b]);
                }
            }
        }
    }
    out
}

/// Joint coordinate refinement of all insurers' parameters. Infinite
/// parameters stay fixed.
fn refine_params<F>(
    id: ObjectiveId,
    s: &Scenario,
    start: &[Vec<f64>],
    k: usize,
    cfg: &SearchConfig,
    f: F,
) -> Vec<Vec<f64>>
where
    F: Fn(&[Vec<f64>]) -> f64,
{
    let domain = id.domain();
    let arity = domain.arity();
    let (mut lower, mut upper, mut step) = (Vec::new(), Vec::new(), Vec::new());
    for (d, p) in s.marginals.iter().zip(start) {
        for (&x, (lo, hi)) in p.iter().zip(param_ranges(id, d)) {
            if x.is_finite() {
                lower.push(lo);
                upper.push(hi.max(x));
                step.push((hi - lo) / (k.max(2) - 1) as f64);
            } else {
                lower.push(x);
                upper.push(x);
                step.push(0.0);
            }
        }
    }
    let unflatten = |x: &[f64]| -> Vec<Vec<f64>> { x.chunks(arity).map(<[f64]>::to_vec).collect() };
    let objective = |x: &[f64]| {
        let rows = unflatten(x);
        if !domain.check_all(&rows).is_accept() {
            return f64::INFINITY;
        }
        f(&rows)
    };
    let flat: Vec<f64> = start.iter().flatten().copied().collect();
    let (x, _) = coordinate_refine(objective, &flat, &lower, &upper, &step, cfg.refine_rounds, cfg.halvings);
    unflatten(&x)
}

fn minimize_g(s: &Scenario, cfg: &SearchConfig) -> Result<Vec<Vec<f64>>> {
    let es_window = RiskLevels { beta: 0.0, alpha: s.reinsurer_levels.alpha };
    let k = cfg.retention_points.max(2);
    let mut params = Vec::with_capacity(s.n());
    for (i, d) in s.marginals.iter().enumerate() {
        let levels = s.insurer_levels[i];
        let cost = |p: &[f64]| -> f64 {
            let Ok(g) = Indemnity::layer(p[0], p[1]) else { return f64::INFINITY };
            let retained = measure_of_contract(d, &g, levels, Side::Retained);
            let ceded = measure_of_contract(d, &g, es_window, Side::Ceded);
            match (retained, ceded) {
                (Ok(r), Ok(c)) => r + c,
                _ => f64::INFINITY,
            }
        };
        let top = param_ranges(ObjectiveId::G, d)[0].1;
        let grid = family_grid(AdmissibleDomain::A1, top, k);
        let values = search::par_eval(grid.len(), |j| cost(&grid[j]));
        let j = argmin_first(&values).ok_or_else(|| Error::Solver(format!("objective G diverges for insurer {i}")))?;
        params.push(grid[j].clone());
    }
    let single = |i: usize, p: &[f64]| -> Result<f64> {
        let g = Indemnity::layer(p[0], p[1])?;
        Ok(measure_of_contract(&s.marginals[i], &g, s.insurer_levels[i], Side::Retained)?
            + measure_of_contract(&s.marginals[i], &g, es_window, Side::Ceded)?)
    };
    // the objective separates, so refining the sum refines each insurer
    Ok(refine_params(ObjectiveId::G, s, &params, k, cfg, |rows| {
        rows.iter().enumerate().map(|(i, p)| single(i, p).unwrap_or(f64::INFINITY)).sum()
    }))
}

/// Exchanges the contract and simplex infima: per insurer, the best contract
/// on the family grid is tabulated for every coarse-grid pair `(γ_i, γ₀)`,
/// the simplex grid is searched over the tabulated minima, and contracts and
/// simplex point are then refined alternately.
fn minimize_simplex_family(id: ObjectiveId, s: &Scenario, cfg: &SearchConfig) -> Result<Vec<Vec<f64>>> {
    let n = s.n();
    let grid = SimplexGrid::coarse(cfg);
    let total = s.reinsurer_levels.beta + s.reinsurer_levels.alpha;
    let floor = s.reinsurer_levels.alpha;
    let windows = if total > floor { linspace(floor, total, grid.gamma0_points.max(2)) } else { vec![total] };
    let res = grid.resolution.max(1);
    let k = cfg.family_points.max(2);

    let mut tables = Vec::with_capacity(n);
    let mut grids = Vec::with_capacity(n);
    for (i, d) in s.marginals.iter().enumerate() {
        let top = param_ranges(id, d)[1].1;
        let combos = family_grid(id.domain(), top, k);
        let contracts: Vec<Indemnity> = combos.iter().map(|p| id.domain().build(p)).collect::<Result<_>>()?;
        let pieces = pieces_of(&contracts);
        let retained: Vec<f64> = contracts
            .iter()
            .map(|f| measure_of_contract(d, f, s.insurer_levels[i], Side::Retained).unwrap_or(f64::INFINITY))
            .collect();
        let table: Vec<(f64, usize)> = (0..windows.len() * (res + 1))
            .into_par_iter()
            .map(|idx| {
                let g0 = windows[idx / (res + 1)];
                let gi = (total - g0).max(0.0) * (idx % (res + 1)) as f64 / res as f64;
                let levels = RiskLevels { beta: gi, alpha: g0 };
                let values: Vec<f64> = pieces
                    .iter()
                    .zip(&retained)
                    .map(|(p, r)| r + rvar_of_pieces(d, p, levels).unwrap_or(f64::INFINITY))
                    .collect();
                argmin_first(&values).map_or((f64::INFINITY, 0), |j| (values[j], j))
            })
            .collect();
        tables.push(table);
        grids.push(combos);
    }
    let comps = compositions(res, n);
    let sums: Vec<f64> = (0..windows.len() * comps.len())
        .map(|idx| {
            let (k0, comp) = (idx / comps.len(), &comps[idx % comps.len()]);
            (0..n).map(|i| tables[i][k0 * (res + 1) + comp[i]].0).sum()
        })
        .collect();
    let best =
        argmin_first(&sums).ok_or_else(|| Error::Solver(format!("objective {id} diverges on the whole grid")))?;
    let (k0, comp) = (best / comps.len(), &comps[best % comps.len()]);
    let mut params: Vec<Vec<f64>> = (0..n).map(|i| grids[i][tables[i][k0 * (res + 1) + comp[i]].1].clone()).collect();
    let g0 = windows[k0];
    let mut gamma: Vec<f64> =
        std::iter::once(g0).chain(comp.iter().map(|&c| (total - g0).max(0.0) * c as f64 / res as f64)).collect();

    for _ in 0..cfg.refine_rounds.max(1) {
        let at_gamma = |rows: &[Vec<f64>]| -> f64 {
            let Ok(contracts) = build_contracts(id.domain(), rows) else { return f64::INFINITY };
            let retained = retained_total(s, &contracts).unwrap_or(f64::INFINITY);
            retained + gamma_sum(&s.marginals, &pieces_of(&contracts), &gamma)
        };
        params = refine_params(id, s, &params, k, &SearchConfig { refine_rounds: 1, ..cfg.clone() }, at_gamma);
        let contracts = build_contracts(id.domain(), &params)?;
        gamma = worst_case_objective(s, &contracts, grid)?.1.gamma;
    }
    Ok(params)
}

/// Capped-layer searches with tops fixed at `b_i = VaR_{p_i}(X_i)`.
fn minimize_capped(
    id: ObjectiveId,
    s: &Scenario,
    cfg: &SearchConfig,
    notes: &mut Vec<String>,
) -> Result<(Vec<Vec<f64>>, bool)> {
    let caps = reduce_caps(s)?;
    let regime = if id == ObjectiveId::G1bar { Dependence::WorstCase } else { effective_regime(s, s.dependence) };
    let zero_retention: Vec<Vec<f64>> = caps.iter().map(|&c| vec![0.0, c]).collect();
    let p = s.reinsurer_prob();
    let above_all = (0..s.n()).all(|i| p >= s.insurer_prob(i));
    if regime != Dependence::IID && above_all {
        notes.push("reinsurer level at or above every insurer level: reinsurance brings no improvement".into());
        return Ok((zero_retention, true));
    }
    match regime {
        // a zero retention is optimal for every split t, so the t search alone decides the value
        Dependence::WorstCase | Dependence::Comonotonic => {
            if regime == Dependence::WorstCase {
                let cert = boundary_t_certificate(s)?;
                if cert.boundary_only {
                    notes.push(format!("split restricted to the boundary: {}", cert.reason));
                }
            }
            Ok((zero_retention, false))
        }
        Dependence::IID => {
            let layers = CappedLayers::new(s)?;
            let n = s.n();
            let k = cfg.retention_points.max(2);
            let grids: Vec<Vec<f64>> = caps.iter().map(|&c| linspace(0.0, c, k)).collect();
            let mut a = if n <= 2 {
                let moments: Vec<Vec<(f64, f64)>> =
                    (0..n).map(|i| grids[i].iter().map(|&x| layers.moments(i, x)).collect()).collect();
                let count = k.pow(n as u32);
                let values = search::par_eval(count, |idx| {
                    let (mut linear, mut spread) = (0.0, 0.0);
                    let mut rest = idx;
                    for i in (0..n).rev() {
                        let j = rest % k;
                        rest /= k;
                        let (w, v) = moments[i][j];
                        linear += grids[i][j] + w;
                        spread += v - w * w;
                    }
                    linear + normal::quantile(p) * spread.max(0.0).sqrt()
                });
                let mut idx =
                    argmin_first(&values).ok_or_else(|| Error::Solver("capped-layer objective diverges".into()))?;
                let mut point = vec![0.0; n];
                for i in (0..n).rev() {
                    point[i] = grids[i][idx % k];
                    idx /= k;
                }
                point
            } else {
                asymptotic::optimal_a_star(s)?.a
            };
            let steps: Vec<f64> = caps.iter().map(|&c| c / (k - 1) as f64).collect();
            let (refined, value) = coordinate_refine(
                |x| layers.objective(x),
                &a,
                &vec![0.0; n],
                &caps,
                &steps,
                cfg.refine_rounds,
                cfg.halvings,
            );
            a = refined;
            let star = asymptotic::optimal_a_star(s)?;
            if star.objective < value - search::TIE_TOL * value.abs().max(1.0) {
                notes.push("first-order retention solver improved on the grid search".into());
                a = star.a;
            }
            Ok((a.iter().zip(&caps).map(|(&ai, &c)| vec![ai, c]).collect(), false))
        }
    }
}

fn minimize_tilde_g(s: &Scenario, cfg: &SearchConfig) -> Result<Vec<Vec<f64>>> {
    let n = s.n();
    let m = asymptotic::loading_m(s.reinsurer_levels);
    let k = (cfg.retention_points.max(5) - 1) / 4 + 1;
    let mut grids = Vec::with_capacity(n);
    let mut tables: Vec<Vec<(f64, f64, f64)>> = Vec::with_capacity(n);
    for (i, d) in s.marginals.iter().enumerate() {
        let top = param_ranges(ObjectiveId::TildeG, d)[0].1;
        let combos = family_grid(AdmissibleDomain::A1, top, k);
        let table = combos
            .par_iter()
            .map(|p| {
                let g = Indemnity::layer(p[0], p[1]).ok()?;
                let r = measure_of_contract(d, &g, s.insurer_levels[i], Side::Retained).ok()?;
                let (mean, var) = contract_moments(d, &g).ok()?;
                Some((r, mean, var))
            })
            .map(|row| row.unwrap_or((f64::INFINITY, 0.0, 0.0)))
            .collect();
        tables.push(table);
        grids.push(combos);
    }
    // start from no reinsurance: (0, 0) is the first grid entry
    let mut choice = vec![0usize; n];
    for _ in 0..TABLE_SWEEPS {
        let mut changed = false;
        for i in 0..n {
            let others: f64 = (0..n).filter(|&j| j != i).map(|j| tables[j][choice[j]].2).sum();
            let values: Vec<f64> =
                tables[i].iter().map(|&(r, mean, var)| r + mean + m * (others + var).max(0.0).sqrt()).collect();
            if let Some(j) = argmin_first(&values) {
                if j != choice[i] && values[j] < values[choice[i]] - search::TIE_TOL * values[j].abs().max(1.0) {
                    choice[i] = j;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let start: Vec<Vec<f64>> = (0..n).map(|i| grids[i][choice[i]].clone()).collect();
    let mut params =
        refine_params(ObjectiveId::TildeG, s, &start, k, cfg, |rows| evaluate_value(ObjectiveId::TildeG, s, rows, cfg));
    if s.mode == Mode::VaR {
        let star = asymptotic::optimal_a_star(s)?;
        let candidate: Vec<Vec<f64>> = star.a.iter().zip(&star.b).map(|(&a, &b)| vec![a, b]).collect();
        if evaluate_value(ObjectiveId::TildeG, s, &candidate, cfg)
            < evaluate_value(ObjectiveId::TildeG, s, &params, cfg)
        {
            params = candidate;
        }
    }
    Ok(params)
}

fn flat_intervals(
    id: ObjectiveId,
    s: &Scenario,
    params: &[Vec<f64>],
    optimum: f64,
    cfg: &SearchConfig,
) -> Result<Vec<Vec<[f64; 2]>>> {
    let capped = matches!(id, ObjectiveId::G1bar | ObjectiveId::K);
    let points = if id.uses_simplex() { cfg.family_points } else { cfg.retention_points }.max(2);
    let mut out = Vec::with_capacity(params.len());
    for (i, p) in params.iter().enumerate() {
        let ranges = param_ranges(id, &s.marginals[i]);
        let mut row = Vec::with_capacity(p.len());
        for (j, &x) in p.iter().enumerate() {
            // caps of the capped-layer objectives are fixed, not searched
            if !x.is_finite() || (capped && j == 1) {
                row.push([x, x]);
                continue;
            }
            let (lo, hi) = if capped { (0.0, p[1]) } else { (ranges[j].0, ranges[j].1.max(x)) };
            let f = |y: f64| {
                let mut probe = params.to_vec();
                probe[i][j] = y;
                evaluate_value(id, s, &probe, cfg)
            };
            let (a, b) = flat_interval(f, x, lo, hi, optimum, cfg.flat_tol, (hi - lo) / (points - 1) as f64);
            row.push([a, b]);
        }
        out.push(row);
    }
    Ok(out)
}

/// `f64` that may be infinite, written as `"inf"` in JSON.
#[derive(Serialize, Deserialize)]
struct Ext(#[serde(with = "crate::contracts::extended")] f64);

mod ext_rows {
    use super::Ext;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Ext>> = v.iter().map(|r| r.iter().map(|&x| Ext(x)).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        let rows = Vec::<Vec<Ext>>::deserialize(d)?;
        Ok(rows.into_iter().map(|r| r.into_iter().map(|x| x.0).collect()).collect())
    }
}

mod ext_intervals {
    use super::Ext;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vec<[f64; 2]>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[Ext; 2]>> = v.iter().map(|r| r.iter().map(|&[a, b]| [Ext(a), Ext(b)]).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<[f64; 2]>>, D::Error> {
        let rows = Vec::<Vec<[Ext; 2]>>::deserialize(d)?;
        Ok(rows.into_iter().map(|r| r.into_iter().map(|[a, b]| [a.0, b.0]).collect()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::risk_measures::{es, rvar, var};

    fn lomax98() -> Distribution {
        Distribution::lomax(9.0, 8.0).unwrap()
    }

    fn table1(p: f64, p1: f64, p2: f64, dep: Dependence) -> Scenario {
        Scenario::var(vec![lomax98(), lomax98()], &[p1, p2], p, dep).unwrap()
    }

    fn quick() -> SearchConfig {
        SearchConfig {
            retention_points: 101,
            t_points: 401,
            family_points: 9,
            coarse_gamma0_points: 17,
            coarse_simplex_resolution: 16,
            ..SearchConfig::default()
        }
    }

    fn rvar_scenario(beta: f64, alpha: f64) -> Scenario {
        let d = Distribution::exponential(1.0).unwrap();
        Scenario::new(
            vec![d.clone(), d],
            vec![RiskLevels::new(0.0, 0.05).unwrap(); 2],
            RiskLevels::new(beta, alpha).unwrap(),
            Mode::RVaR,
            Dependence::WorstCase,
        )
        .unwrap()
    }

    #[test]
    fn g_examples() {
        let s = rvar_scenario(0.0, 0.1);
        let d = &s.marginals[0];
        let whole = rvar(d, s.insurer_levels[0]).unwrap();
        assert!((objective_g(&s, &[1.0, 2.0], &[1.0, 2.0]).unwrap() - 2.0 * whole).abs() < 1e-12);
        let inf = f64::INFINITY;
        let ident = objective_g(&s, &[0.0, 0.0], &[inf, inf]).unwrap();
        assert!((ident - 2.0 * es(d, 0.9).unwrap()).abs() < 1e-12);
        assert!(objective_g(&rvar_scenario(0.01, 0.1), &[0.0, 0.0], &[1.0, 1.0]).is_err());
        assert!(matches!(objective_g(&s, &[2.0, 0.0], &[1.0, 1.0]), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn r_quota_share_scales() {
        let s = rvar_scenario(0.02, 0.05);
        let gamma = SimplexPoint { gamma: vec![0.05, 0.01, 0.01], total: 0.07, floor: 0.05 };
        let a = [0.3, 0.6];
        let v = objective_r(&s, &a, &[1.0, 1.0], &[0.0, 0.0], &gamma).unwrap();
        let d = &s.marginals[0];
        let whole = rvar(d, s.insurer_levels[0]).unwrap();
        let at = rvar(d, gamma.levels(0)).unwrap();
        let expected: f64 = a.iter().map(|&ai| whole - ai * whole + ai * at).sum();
        assert!((v - expected).abs() < 1e-9);
        let zero = objective_r(&s, &[0.0, 0.0], &[1.0, 1.0], &[0.0, 0.0], &gamma).unwrap();
        assert!((zero - 2.0 * whole).abs() < 1e-12);
    }

    #[test]
    fn var_families_at_trivial_contracts() {
        let s = table1(0.95, 0.9, 0.85, Dependence::WorstCase);
        let gamma = SimplexPoint { gamma: vec![0.0, 0.02, 0.03], total: 0.05, floor: 0.0 };
        let none = var(&s.marginals[0], 0.9).unwrap() + var(&s.marginals[1], 0.85).unwrap();
        assert!((none - 4.2096).abs() < 1e-3);
        assert!((objective_gbar(&s, &[1.0, 1.0], &[1.0, 1.0], &gamma).unwrap() - none).abs() < 1e-12);
        assert!((objective_l(&s, &[0.0, 0.0], &[1.0, 1.0], &gamma).unwrap() - none).abs() < 1e-12);
        assert!((objective_h(&s, &[0.0, 0.0], &[1.0, 1.0], &gamma).unwrap() - none).abs() < 1e-12);
        let inf = f64::INFINITY;
        let ident = objective_gbar(&s, &[0.0, 0.0], &[inf, inf], &gamma).unwrap();
        assert!((objective_l(&s, &[1.0, 1.0], &[inf, inf], &gamma).unwrap() - ident).abs() < 1e-12);
        assert!((objective_h(&s, &[1.0, 1.0], &[0.0, 0.0], &gamma).unwrap() - ident).abs() < 1e-12);
    }

    #[test]
    fn g1bar_zero_contracts_ignore_t() {
        let s = table1(0.9, 0.95, 0.85, Dependence::WorstCase);
        let none = var(&s.marginals[0], 0.95).unwrap() + var(&s.marginals[1], 0.85).unwrap();
        for t in [0.0, 0.03, 0.1] {
            assert!((objective_g1bar(&s, &[1.0, 1.0], &[1.0, 1.0], t).unwrap() - none).abs() < 1e-12);
        }
        assert!(objective_g1bar(&s, &[0.0, 0.0], &[1.0, 1.0], 0.2).is_err());
    }

    #[test]
    fn caps_and_certificate() {
        let s = table1(0.95, 0.9, 0.85, Dependence::WorstCase);
        let caps = reduce_caps(&s).unwrap();
        assert!((caps[0] - 2.3324).abs() < 1e-4 && (caps[1] - 1.8772).abs() < 1e-4);
        assert!(boundary_t_certificate(&s).unwrap().boundary_only);
        let l65 = Distribution::lomax(6.0, 5.0).unwrap();
        let s2 = Scenario::var(vec![lomax98(), l65], &[0.98, 0.99], 0.9, Dependence::WorstCase).unwrap();
        assert!(!boundary_t_certificate(&s2).unwrap().boundary_only);
        let u = Distribution::uniform(0.0, 1.0).unwrap();
        let s3 = Scenario::var(vec![u.clone(), u], &[0.99, 0.99], 0.9, Dependence::WorstCase).unwrap();
        assert!(boundary_t_certificate(&s3).unwrap().boundary_only);
        let pm = Scenario::var(vec![Distribution::point_mass(3.0).unwrap()], &[0.9], 0.9, Dependence::IID).unwrap();
        assert_eq!(reduce_caps(&pm).unwrap(), vec![3.0]);
    }

    #[test]
    fn k_regimes_on_case3() {
        let cfg = quick();
        let worst = minimize(ObjectiveId::K, &table1(0.85, 0.95, 0.9, Dependence::WorstCase), &cfg).unwrap();
        assert!((worst.objective - 4.2096).abs() < 1e-3);
        assert_eq!(worst.witness, Witness::T(0.0));
        assert!((worst.flat_intervals[0][0][1] - 1.8772).abs() < 1e-2);
        assert!((worst.flat_intervals[1][0][1] - 2.3324).abs() < 1e-2);
        let como = minimize(ObjectiveId::K, &table1(0.85, 0.95, 0.9, Dependence::Comonotonic), &cfg).unwrap();
        assert!((como.objective - 3.7545).abs() < 1e-3);
        let iid = minimize(ObjectiveId::K, &table1(0.85, 0.95, 0.9, Dependence::IID), &cfg).unwrap();
        assert!((iid.objective - 2.9832).abs() < 2e-2);
    }

    #[test]
    fn fast_path_for_high_reinsurer_level() {
        let s = table1(0.95, 0.9, 0.85, Dependence::WorstCase);
        let r = minimize(ObjectiveId::K, &s, &quick()).unwrap();
        assert!(r.fast_path);
        assert!((r.objective - 4.2096).abs() < 1e-3);
        let single = Scenario::var(vec![lomax98()], &[0.9], 0.95, Dependence::IID).unwrap();
        let r = minimize(ObjectiveId::K, &single, &quick()).unwrap();
        assert!((r.objective - var(&lomax98(), 0.9).unwrap()).abs() < 1e-9);
        assert_eq!(r.flat_intervals[0][0][0], 0.0);
    }

    #[test]
    fn result_reproduces_and_round_trips() {
        let s = table1(0.9, 0.95, 0.85, Dependence::IID);
        let cfg = quick();
        let r = minimize(ObjectiveId::K, &s, &cfg).unwrap();
        let again = evaluate(ObjectiveId::K, &s, &r.params, &cfg).unwrap();
        assert!((again.value - r.objective).abs() < 1e-9);
        let json = serde_json::to_string(&r).unwrap();
        let back: OptimizeResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn g_minimizer_beats_corners() {
        let s = rvar_scenario(0.0, 0.1);
        let r = minimize(ObjectiveId::G, &s, &SearchConfig { retention_points: 41, ..quick() }).unwrap();
        let inf = f64::INFINITY;
        for (a, b) in [([0.0, 0.0], [0.0, 0.0]), ([0.0, 0.0], [inf, inf]), ([1.0, 1.0], [3.0, 3.0])] {
            assert!(r.objective <= objective_g(&s, &a, &b).unwrap() + 1e-9);
        }
    }

    #[test]
    fn simplex_families_run() {
        let s = table1(0.9, 0.95, 0.85, Dependence::WorstCase);
        let cfg = SearchConfig { flat_intervals: false, ..quick() };
        let none = var(&s.marginals[0], 0.95).unwrap() + var(&s.marginals[1], 0.85).unwrap();
        for id in [ObjectiveId::Gbar, ObjectiveId::L, ObjectiveId::H] {
            let r = minimize(id, &s, &cfg).unwrap();
            assert!(r.objective <= none + 1e-9, "{id}: {}", r.objective);
            assert!(matches!(r.witness, Witness::Gamma(_)));
        }
        let k = minimize(ObjectiveId::K, &s, &cfg).unwrap();
        let gbar = minimize(ObjectiveId::Gbar, &s, &cfg).unwrap();
        assert!((gbar.objective - k.objective).abs() < 1e-2, "{} vs {}", gbar.objective, k.objective);
    }

    #[test]
    fn objective_ids_parse() {
        assert_eq!("gbar".parse::<ObjectiveId>().unwrap(), ObjectiveId::Gbar);
        assert_eq!("TildeG".parse::<ObjectiveId>().unwrap(), ObjectiveId::TildeG);
        assert!("Q".parse::<ObjectiveId>().is_err());
    }
}
