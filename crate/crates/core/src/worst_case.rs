//! Worst-case aggregation of risks with known marginals and unknown
//! dependence.
//!
//! The central object is the scaled simplex
//! `{γ = (γ₀, γ₁, …, γ_n) ≥ 0 : Σγ = T, γ₀ ≥ floor}` over which sums of
//! marginal RVaRs `Σ RVaR_{γ_i, γ₀}(X_i)` are minimized. With
//! `T = β + α, floor = α` this bounds `RVaR_{β,α}` of the sum; with
//! `T = 1 - p, floor = 0` it bounds `VaR_p`. A zero window `γ₀ = 0` evaluates
//! the VaR limit.

use std::io;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::distributions::Distribution;
use crate::error::{domain, Error, Result};
use crate::risk_measures::{rvar, RiskLevels};
use crate::search::{self, argmin_first, compositions, linspace, par_eval, SearchConfig};

/// Tolerance on `Σγ = T`.
const SUM_TOL: f64 = 1e-12;

/// A point of the scaled simplex, window length first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexPoint {
    pub gamma: Vec<f64>,
    pub total: f64,
    pub floor: f64,
}

impl SimplexPoint {
    /// Window length `γ₀`.
    pub fn window(&self) -> f64 {
        self.gamma[0]
    }

    /// Offsets `γ₁, …, γ_n`.
    pub fn offsets(&self) -> &[f64] {
        &self.gamma[1..]
    }

    /// Evaluator window `(γ_i, γ₀)` for marginal `i` (zero-based).
    pub fn levels(&self, i: usize) -> RiskLevels {
        RiskLevels { beta: self.gamma[i + 1], alpha: self.gamma[0] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma.iter().any(|&g| !(g >= 0.0)) {
            return domain(format!("simplex point {:?} has a negative component", self.gamma));
        }
        let sum: f64 = self.gamma.iter().sum();
        if (sum - self.total).abs() > SUM_TOL {
            return domain(format!("simplex point sums to {sum}, expected {}", self.total));
        }
        if self.gamma[0] < self.floor - SUM_TOL {
            return domain(format!("window {} below floor {}", self.gamma[0], self.floor));
        }
        Ok(())
    }
}

/// A worst-case value with the simplex point attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub value: f64,
    pub witness: SimplexPoint,
    /// False when the tail-shape conditions making the bound sharp were not
    /// verified; the value is then only an upper bound.
    pub assumption_met: bool,
}

/// Grid sizes of a simplex search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexGrid {
    pub gamma0_points: usize,
    pub resolution: usize,
    pub refine_rounds: usize,
}

impl SimplexGrid {
    pub fn fine(cfg: &SearchConfig) -> Self {
        Self {
            gamma0_points: cfg.gamma0_points,
            resolution: cfg.simplex_resolution,
            refine_rounds: cfg.simplex_refine_rounds,
        }
    }

    pub fn coarse(cfg: &SearchConfig) -> Self {
        Self {
            gamma0_points: cfg.coarse_gamma0_points,
            resolution: cfg.coarse_simplex_resolution,
            refine_rounds: cfg.simplex_refine_rounds,
        }
    }
}

/// Minimizes `f(γ)` over `{γ ∈ ℝ^{n+1}_+ : Σγ = total, γ₀ ≥ floor}`.
///
/// A grid over `γ₀` times a composition grid of the remaining mass is
/// evaluated in full, the lexicographically smallest near-minimizer is kept,
/// and pairwise mass transfers with a halving step refine it.
pub fn minimize_over_simplex<F>(
    n: usize,
    total: f64,
    floor: f64,
    grid: SimplexGrid,
    f: F,
) -> Result<(f64, SimplexPoint)>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    if n == 0 {
        return domain("simplex search needs at least one marginal");
    }
    if !(floor >= 0.0) || !(total >= floor) || total > 1.0 + SUM_TOL {
        return domain(format!("simplex total {total} and floor {floor} inconsistent"));
    }
    let windows = if total > floor { linspace(floor, total, grid.gamma0_points.max(2)) } else { vec![total] };
    let res = grid.resolution.max(1);
    let comps = compositions(res, n);
    let point = |idx: usize| -> Vec<f64> {
        let g0 = windows[idx / comps.len()];
        let rest = (total - g0).max(0.0);
        let mut g = Vec::with_capacity(n + 1);
        g.push(g0);
        g.extend(comps[idx % comps.len()].iter().map(|&k| rest * k as f64 / res as f64));
        g
    };
    let values = par_eval(windows.len() * comps.len(), |idx| f(&point(idx)));
    let Some(k) = argmin_first(&values) else {
        return Err(Error::Divergent("objective is infinite on the whole simplex".into()));
    };
    let mut gamma = point(k);
    let mut best = values[k];

    let mut step = (total - floor).max(total) / res as f64;
    for _ in 0..grid.refine_rounds {
        for _pass in 0..64 {
            let mut improved = false;
            for i in 0..=n {
                for j in 0..=n {
                    if i == j {
                        continue;
                    }
                    let base = if i == 0 { floor } else { 0.0 };
                    let avail = gamma[i] - base;
                    if avail <= 0.0 {
                        continue;
                    }
                    let d = step.min(avail);
                    let mut cand = gamma.clone();
                    cand[i] = if d == avail { base } else { gamma[i] - d };
                    cand[j] += d;
                    let v = f(&cand);
                    if v < best - search::TIE_TOL * best.abs().max(1.0) {
                        gamma = cand;
                        best = v;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        step *= 0.5;
    }
    Ok((best, SimplexPoint { gamma, total, floor }))
}

/// Sum of marginal RVaRs at a simplex point; divergent terms give `+∞`.
pub fn simplex_sum(marginals: &[Distribution], gamma: &[f64]) -> f64 {
    marginals
        .iter()
        .enumerate()
        .map(|(i, d)| rvar(d, RiskLevels { beta: gamma[i + 1], alpha: gamma[0] }).unwrap_or(f64::INFINITY))
        .sum()
}

/// Worst-case `RVaR_{β,α}` of the sum over all couplings of the marginals.
pub fn simplex_rvar_bound(marginals: &[Distribution], levels: RiskLevels, cfg: &SearchConfig) -> Result<Bound> {
    let (total, floor) = (levels.beta + levels.alpha, levels.alpha);
    let (value, witness) =
        minimize_over_simplex(marginals.len(), total, floor, SimplexGrid::fine(cfg), |g| simplex_sum(marginals, g))?;
    let level = levels.lower().clamp(1e-12, 1.0 - 1e-12);
    let assumption_met = marginals.iter().all(|d| d.has_continuous_quantile() && d.tail_shape(level).concave_beyond);
    Ok(Bound { value, witness, assumption_met })
}

/// Worst-case `VaR_p` of the sum over all couplings of the marginals.
pub fn simplex_var_bound(marginals: &[Distribution], p: f64, cfg: &SearchConfig) -> Result<Bound> {
    let levels = RiskLevels::var(p)?;
    let (value, witness) = minimize_over_simplex(marginals.len(), levels.beta, 0.0, SimplexGrid::fine(cfg), |g| {
        simplex_sum(marginals, g)
    })?;
    Ok(Bound { value, witness, assumption_met: shapes_agree(marginals, p) })
}

/// True when all marginals are convex beyond `p`, or all concave beyond it,
/// and have continuous quantiles.
pub fn shapes_agree(marginals: &[Distribution], p: f64) -> bool {
    if p <= 0.0 || p >= 1.0 || !marginals.iter().all(Distribution::has_continuous_quantile) {
        return false;
    }
    let shapes: Vec<_> = marginals.iter().map(|d| d.tail_shape(p)).collect();
    shapes.iter().all(|s| s.convex_beyond) || shapes.iter().all(|s| s.concave_beyond)
}

/// Two-risk bound `inf_{t ∈ [0, 1-p]} VaR_{p+t}(X₁) + VaR_{1-t}(X₂)`, with
/// its smallest minimizing `t`.
pub fn makarov_two(d1: &Distribution, d2: &Distribution, p: f64, points: usize) -> Result<(f64, f64)> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("level {p} outside (0, 1)"));
    }
    makarov_two_on(d1, d2, p, 0.0, 1.0 - p, points)
}

/// [`makarov_two`] with `t` restricted to `[lo, hi] ⊆ [0, 1 - p]`.
pub fn makarov_two_on(
    d1: &Distribution,
    d2: &Distribution,
    p: f64,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<(f64, f64)> {
    if !(0.0..=1.0 - p).contains(&lo) || !(lo..=1.0 - p).contains(&hi) {
        return domain(format!("split range [{lo}, {hi}] outside [0, {}]", 1.0 - p));
    }
    let phi = |t: f64| d1.quantile_unchecked((p + t).min(1.0)) + d2.quantile_unchecked((1.0 - t).min(1.0));
    match search::minimize_1d(phi, lo, hi, points) {
        Some((t, v)) if v.is_finite() => Ok((v, t)),
        _ => Err(Error::Divergent("both quantile terms are infinite across the split range".into())),
    }
}

/// `Σ RVaR_{β,α}(X_i)`, the value under comonotonic dependence.
pub fn comonotonic_aggregate(marginals: &[Distribution], levels: RiskLevels) -> Result<f64> {
    marginals.iter().map(|d| rvar(d, levels)).sum()
}

/// Left `p`-quantile of an equiprobable sample.
fn sample_var(sums: &mut [f64], p: f64) -> f64 {
    sums.sort_by(f64::total_cmp);
    let m = sums.len();
    let k = ((p * m as f64) - 1e-9).ceil().clamp(1.0, m as f64) as usize;
    sums[k - 1]
}

/// Exact maximum of `VaR_p` of the sum over every coupling of `n ∈ {2, 3}`
/// equiprobable columns with `m` atoms each (`m ≤ 8` for two columns,
/// `m ≤ 6` for three).
pub fn oracle_max_var_discrete(columns: &[Vec<f64>], p: f64) -> Result<f64> {
    let n = columns.len();
    let m = columns.first().map_or(0, Vec::len);
    let limit = match n {
        2 => 8,
        3 => 6,
        _ => return Err(Error::Size(format!("coupling enumeration supports 2 or 3 columns, got {n}"))),
    };
    if m == 0 || m > limit || columns.iter().any(|c| c.len() != m) {
        return Err(Error::Size(format!("columns need the same length in 1..={limit}")));
    }
    if !(p > 0.0 && p <= 1.0) {
        return domain(format!("level {p} outside (0, 1]"));
    }
    let perms: Vec<Vec<usize>> = (0..m).permutations(m).collect();
    let mut best = f64::NEG_INFINITY;
    let mut sums = vec![0.0; m];
    let mut eval = |order: &[&Vec<usize>]| {
        for (r, s) in sums.iter_mut().enumerate() {
            *s = columns[0][r] + order.iter().enumerate().map(|(c, perm)| columns[c + 1][perm[r]]).sum::<f64>();
        }
        best = best.max(sample_var(&mut sums, p));
    };
    if n == 2 {
        for perm in &perms {
            eval(&[perm]);
        }
    } else {
        for p1 in &perms {
            for p2 in &perms {
                eval(&[p1, p2]);
            }
        }
    }
    Ok(best)
}

/// Matrix of discretized tail quantiles, one column per marginal.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileMatrix {
    columns: Vec<Vec<f64>>,
}

impl QuantileMatrix {
    pub fn new(columns: Vec<Vec<f64>>) -> Result<Self> {
        let m = columns.first().map_or(0, Vec::len);
        if m == 0 || columns.iter().any(|c| c.len() != m) {
            return Err(Error::Size("quantile matrix columns must be nonempty and equally long".into()));
        }
        if columns.iter().flatten().any(|v| !v.is_finite()) {
            return domain("quantile matrix entries must be finite");
        }
        Ok(Self { columns })
    }

    /// Lower discretization `F_i⁻¹(p + (1 - p)j/m)`, `j = 0..m`, of each
    /// marginal's tail beyond `p`.
    pub fn from_marginals(marginals: &[Distribution], p: f64, m: usize) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) || m == 0 {
            return domain("tail discretization needs p in (0, 1) and m > 0");
        }
        let columns = marginals
            .iter()
            .map(|d| (0..m).map(|j| d.quantile_unchecked(p + (1.0 - p) * j as f64 / m as f64)).collect())
            .collect();
        Self::new(columns)
    }

    pub fn rows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// Reads a headed CSV with one column per marginal.
    pub fn from_csv<R: io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let mut columns: Vec<Vec<f64>> = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| Error::Config(format!("quantile CSV: {e}")))?;
            if columns.is_empty() {
                columns = vec![Vec::new(); record.len()];
            }
            if record.len() != columns.len() {
                return Err(Error::Config("quantile CSV rows have different lengths".into()));
            }
            for (c, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| Error::Config(format!("quantile CSV: bad number {field:?}")))?;
                columns[c].push(v);
            }
        }
        Self::new(columns)
    }

    pub fn to_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let io_err = |e: csv::Error| Error::Config(format!("quantile CSV: {e}"));
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record((1..=self.cols()).map(|c| format!("x{c}"))).map_err(io_err)?;
        for r in 0..self.rows() {
            wtr.write_record(self.columns.iter().map(|c| format!("{:e}", c[r]))).map_err(io_err)?;
        }
        wtr.flush().map_err(|e| Error::Config(format!("quantile CSV: {e}")))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rearrangement {
    /// Minimal row sum after the last sweep.
    pub value: f64,
    pub sweeps: usize,
    pub converged: bool,
}

/// Rearranges each column oppositely to the sum of the others until the
/// minimal row sum stops improving. Columns start sorted ascending.
pub fn oracle_rearrangement(matrix: &QuantileMatrix, max_sweeps: usize) -> Rearrangement {
    let mut cols: Vec<Vec<f64>> = matrix.columns.clone();
    for c in &mut cols {
        c.sort_by(f64::total_cmp);
    }
    let m = matrix.rows();
    let row_sums = |cols: &[Vec<f64>]| -> Vec<f64> { (0..m).map(|r| cols.iter().map(|c| c[r]).sum()).collect() };
    let min_of = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let mut best = min_of(&row_sums(&cols));
    if cols.len() == 1 {
        return Rearrangement { value: best, sweeps: 0, converged: true };
    }
    for sweep in 1..=max_sweeps {
        for j in 0..cols.len() {
            let totals = row_sums(&cols);
            let others: Vec<f64> = (0..m).map(|r| totals[r] - cols[j][r]).collect();
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&x, &y| others[x].total_cmp(&others[y]).then(x.cmp(&y)));
            let mut values = cols[j].clone();
            values.sort_by(|x, y| y.total_cmp(x));
            for (rank, &r) in order.iter().enumerate() {
                cols[j][r] = values[rank];
            }
        }
        let current = min_of(&row_sums(&cols));
        if current <= best + 1e-12 * best.abs().max(1.0) {
            return Rearrangement { value: best.max(current), sweeps: sweep, converged: true };
        }
        best = current;
    }
    Rearrangement { value: best, sweeps: max_sweeps, converged: false }
}
