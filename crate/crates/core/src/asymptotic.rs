//! Large-portfolio approximation for independent insurers.
//!
//! When the ceded losses are independent, the reinsurer's RVaR of their sum
//! is replaced by its normal approximation `μ + σ·M`, where `μ` and `σ²` are
//! the summed means and variances of the ceded losses and `M` is the RVaR of
//! a standard normal.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contracts::Indemnity;
use crate::distributions::Distribution;
use crate::error::{domain, Error, Result};
use crate::normal;
use crate::risk_measures::{measure_of_contract, rvar_of_pieces, RiskLevels, Side};
use crate::scenario::{Mode, Scenario};

/// Sweep limit of the Gauss–Seidel retention solver.
const MAX_SWEEPS: usize = 200;
/// Convergence threshold on the largest retention change in a sweep.
const SWEEP_TOL: f64 = 1e-10;
/// Grid points per coordinate of the fallback search.
const FALLBACK_POINTS: usize = 101;
/// Draws per independent random stream in [`clt_check`].
const CHUNK: usize = 4096;

/// RVaR of a standard normal over the window `levels`, in closed form from
/// `∫_p^q Φ⁻¹ = φ(Φ⁻¹(p)) - φ(Φ⁻¹(q))`.
pub fn loading_m(levels: RiskLevels) -> f64 {
    let (lo, hi) = (levels.lower(), levels.upper());
    if levels.is_var() || hi <= lo {
        return normal::quantile(hi);
    }
    let density_at = |p: f64| if p <= 0.0 || p >= 1.0 { 0.0 } else { normal::pdf(normal::quantile(p)) };
    (density_at(lo) - density_at(hi)) / (hi - lo)
}

/// Mean and variance of the ceded loss `f(X)`.
pub fn contract_moments(d: &Distribution, f: &Indemnity) -> Result<(f64, f64)> {
    let pieces = f.pieces();
    let mean = rvar_of_pieces(d, &pieces, RiskLevels::es(0.0)?)?;
    // E f² = ∫ 2 f f' S over [0, ∞) plus the part below zero
    let mut second = 0.0;
    let mut start = 0.0f64;
    for p in &pieces {
        if p.end <= 0.0 {
            continue;
        }
        let (lo, hi) = (start, p.end);
        start = p.end;
        if p.slope == 0.0 || hi <= lo {
            continue;
        }
        let first = d.layer_mean(lo, hi)?;
        let moment = 0.5 * d.layer_second_moment_part(lo, hi)? + lo * first;
        second += 2.0 * p.slope * (p.intercept * first + p.slope * moment);
    }
    let below_slope = pieces.iter().find(|p| p.end > f64::NEG_INFINITY).map_or(0.0, |p| p.slope);
    let (_, below_second) = d.lower_partial_moments();
    second += below_slope * below_slope * below_second;
    Ok((mean, (second - mean * mean).max(0.0)))
}

/// `Σ RVaR_{β_i,α_i}(X_i - f_i(X_i)) + μ(f) + σ(f)·M` with `M` taken from
/// the reinsurer's window.
pub fn objective_tilde_v(s: &Scenario, contracts: &[Indemnity]) -> Result<f64> {
    if contracts.len() != s.n() {
        return Err(Error::Config(format!("{} contracts for {} insurers", contracts.len(), s.n())));
    }
    let mut retained = 0.0;
    let (mut mean, mut var) = (0.0, 0.0);
    for ((d, f), &levels) in s.marginals.iter().zip(contracts).zip(&s.insurer_levels) {
        retained += measure_of_contract(d, f, levels, Side::Retained)?;
        let (m, v) = contract_moments(d, f)?;
        mean += m;
        var += v;
    }
    Ok(retained + mean + var.sqrt() * loading_m(s.reinsurer_levels))
}

/// [`objective_tilde_v`] over layer contracts `g_{a_i,b_i}`.
pub fn objective_tilde_g(s: &Scenario, a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != s.n() || b.len() != s.n() {
        return Err(Error::Config("one retention and one cap per insurer expected".into()));
    }
    let contracts = a.iter().zip(b).map(|(&a, &b)| Indemnity::layer(a, b)).collect::<Result<Vec<_>>>()?;
    objective_tilde_v(s, &contracts)
}

/// Caps `VaR_{p_i}(X_i)` of a VaR-mode scenario.
pub fn var_caps(s: &Scenario) -> Result<Vec<f64>> {
    s.require_mode(Mode::VaR, "capped retention search")?;
    s.marginals.iter().enumerate().map(|(i, d)| d.quantile(s.insurer_prob(i))).collect()
}

/// Per-insurer layer moments `w_i = E g_{a_i,c_i}` and `v_i = E g_{a_i,c_i}²`
/// as functions of the retention, caps fixed.
#[derive(Debug, Clone)]
pub struct CappedLayers<'a> {
    marginals: &'a [Distribution],
    caps: Vec<f64>,
    z: f64,
}

impl<'a> CappedLayers<'a> {
    pub fn new(s: &'a Scenario) -> Result<Self> {
        Ok(Self { caps: var_caps(s)?, marginals: &s.marginals, z: normal::quantile(s.reinsurer_prob()) })
    }

    pub fn caps(&self) -> &[f64] {
        &self.caps
    }

    /// `(w_i(a), v_i(a))`; zero at and beyond the cap.
    pub fn moments(&self, i: usize, a: f64) -> (f64, f64) {
        let c = self.caps[i];
        if a >= c {
            return (0.0, 0.0);
        }
        let d = &self.marginals[i];
        let w = d.layer_mean(a, c).unwrap_or(f64::INFINITY);
        let v = d.layer_second_moment_part(a, c).unwrap_or(f64::INFINITY);
        (w, v)
    }

    /// `F(a) = Σ(a_i + w_i) + Φ⁻¹(p)·√(Σ(v_i - w_i²))`, the capped-layer
    /// objective of a VaR-mode scenario as a function of retentions.
    pub fn objective(&self, a: &[f64]) -> f64 {
        let (mut linear, mut spread) = (0.0, 0.0);
        for (i, &ai) in a.iter().enumerate() {
            let (w, v) = self.moments(i, ai);
            linear += ai + w;
            spread += v - w * w;
        }
        linear + self.z * spread.max(0.0).sqrt()
    }

    /// `1 - z·w_i/√D` at `a`, the sign-determining factor of `∂F/∂a_i`.
    pub fn slope_factor(&self, a: &[f64], i: usize) -> f64 {
        let mut spread = 0.0;
        for (j, &aj) in a.iter().enumerate() {
            let (w, v) = self.moments(j, aj);
            spread += v - w * w;
        }
        if spread <= 0.0 {
            return 1.0;
        }
        1.0 - self.z * self.moments(i, a[i]).0 / spread.sqrt()
    }
}

/// Retentions minimizing the capped-layer objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetentionSolution {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub objective: f64,
    pub sweeps: usize,
    pub converged: bool,
}

/// Solves the coupled first-order conditions
/// `a_i = inf{a : 1 - z·w_i(a)/√Σ_j(v_j - w_j²) ≥ 0}` by Gauss–Seidel sweeps
/// with a bisection per coordinate, falling back to a grid search for up to
/// three insurers if the sweeps do not settle.
pub fn optimal_a_star(s: &Scenario) -> Result<RetentionSolution> {
    let layers = CappedLayers::new(s)?;
    let n = s.n();
    let caps = layers.caps().to_vec();
    let mut a = vec![0.0; n];
    if layers.z <= 0.0 {
        let objective = layers.objective(&a);
        return Ok(RetentionSolution { a, b: caps, objective, sweeps: 0, converged: true });
    }
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut change = 0.0f64;
        for i in 0..n {
            let old = a[i];
            a[i] = first_nonnegative(
                |x| {
                    let mut probe = a.clone();
                    probe[i] = x;
                    layers.slope_factor(&probe, i)
                },
                caps[i],
            );
            change = change.max((a[i] - old).abs());
        }
        if change < SWEEP_TOL {
            converged = true;
            break;
        }
    }
    if !converged && n <= 3 {
        let grids: Vec<Vec<f64>> = caps.iter().map(|&c| crate::search::linspace(0.0, c, FALLBACK_POINTS)).collect();
        let total = FALLBACK_POINTS.pow(n as u32);
        let point = |mut k: usize| -> Vec<f64> {
            let mut x = vec![0.0; n];
            for i in (0..n).rev() {
                x[i] = grids[i][k % FALLBACK_POINTS];
                k /= FALLBACK_POINTS;
            }
            x
        };
        let values = crate::search::par_eval(total, |k| layers.objective(&point(k)));
        if let Some(k) = crate::search::argmin_first(&values) {
            if values[k] < layers.objective(&a) {
                a = point(k);
            }
        }
    }
    let objective = layers.objective(&a);
    if !objective.is_finite() {
        return Err(Error::Solver("capped-layer objective is not finite at the solution".into()));
    }
    Ok(RetentionSolution { a, b: caps, objective, sweeps, converged })
}

/// Smallest `x ∈ [0, hi]` with `g(x) ≥ 0`, assuming `g(hi) ≥ 0` and a single
/// sign change.
fn first_nonnegative<G: Fn(f64) -> f64>(g: G, hi: f64) -> f64 {
    if g(0.0) >= 0.0 {
        return 0.0;
    }
    let (mut bad, mut good) = (0.0, hi);
    for _ in 0..200 {
        if good - bad <= 1e-13 * (1.0 + good) {
            break;
        }
        let mid = 0.5 * (bad + good);
        if g(mid) >= 0.0 {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

/// Kolmogorov–Smirnov distance between the standardized simulated sum
/// `Σ_{j<n} f(X_j)` of `n` independent copies and the standard normal.
///
/// Draws come in chunks of 4096, chunk `k` using stream `k` of a ChaCha8
/// generator seeded with `seed`, so the result does not depend on the
/// number of worker threads.
pub fn clt_check(d: &Distribution, f: &Indemnity, n: usize, sample_size: usize, seed: u64) -> Result<f64> {
    if n == 0 || sample_size == 0 {
        return domain("CLT check needs n > 0 and a positive sample size");
    }
    let (mean, var) = contract_moments(d, f)?;
    if !(var > 0.0) {
        return domain("ceded loss has zero variance");
    }
    let (centre, scale) = (n as f64 * mean, (n as f64 * var).sqrt());
    let chunks = sample_size.div_ceil(CHUNK);
    let mut z: Vec<f64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let len = CHUNK.min(sample_size - k * CHUNK);
            (0..len)
                .map(|_| {
                    let total: f64 = (0..n).map(|_| f.evaluate(d.sample(&mut rng))).sum();
                    (total - centre) / scale
                })
                .collect::<Vec<_>>()
        })
        .collect();
    z.sort_by(f64::total_cmp);
    let m = z.len() as f64;
    Ok(z.iter().enumerate().fold(0.0f64, |acc, (k, &x)| {
        let phi = normal::cdf(x);
        acc.max(((k + 1) as f64 / m - phi).abs()).max((phi - k as f64 / m).abs())
    }))
}
