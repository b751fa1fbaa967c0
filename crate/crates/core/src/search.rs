//! Derivative-free search primitives shared by the bound and contract solvers.
//!
//! Grid evaluations fan out over the current rayon pool; every reduction is a
//! sequential pass over the collected values, so results do not depend on the
//! number of workers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Golden-section refinement stops once the bracket is this narrow.
const GOLDEN_TOL: f64 = 1e-12;

/// Relative slack under which two objective values count as a tie.
pub const TIE_TOL: f64 = 1e-12;

/// Tolerance on objective values used to detect flat optimal intervals.
pub const FLAT_TOL: f64 = 1e-6;

/// Search resolution knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Grid points per retention coordinate.
    pub retention_points: usize,
    /// Grid points for the split parameter `t`.
    pub t_points: usize,
    /// Coordinate refinement rounds after the grid.
    pub refine_rounds: usize,
    /// Step halvings per refinement round.
    pub halvings: usize,
    /// Grid points for the window length `γ₀` in simplex searches.
    pub gamma0_points: usize,
    /// Composition-grid resolution of the remaining simplex mass.
    pub simplex_resolution: usize,
    /// Step halvings of the simplex coordinate descent.
    pub simplex_refine_rounds: usize,
    /// Grid points per parameter for the contract families solved jointly
    /// with a simplex inner problem.
    pub family_points: usize,
    /// Simplex grid used inside those joint searches.
    pub coarse_gamma0_points: usize,
    pub coarse_simplex_resolution: usize,
    pub flat_tol: f64,
    /// Whether to scan for flat optimal intervals.
    pub flat_intervals: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            retention_points: 401,
            t_points: 2001,
            refine_rounds: 2,
            halvings: 12,
            gamma0_points: 201,
            simplex_resolution: 200,
            simplex_refine_rounds: 30,
            family_points: 21,
            coarse_gamma0_points: 41,
            coarse_simplex_resolution: 40,
            flat_tol: FLAT_TOL,
            flat_intervals: true,
        }
    }
}

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n).map(|k| if k == n - 1 { hi } else { lo + step * k as f64 }).collect()
        }
    }
}

/// Evaluates `f` at `0..n` in parallel, keeping index order.
pub fn par_eval<F>(n: usize, f: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

fn tie_slack(v: f64) -> f64 {
    TIE_TOL * v.abs().max(1.0)
}

/// Index of the minimum, preferring the smallest index among values within
/// the tie tolerance of the minimum. NaN entries are skipped.
pub fn argmin_first(values: &[f64]) -> Option<usize> {
    let best = values.iter().copied().filter(|v| !v.is_nan()).fold(f64::INFINITY, f64::min);
    if best == f64::INFINITY {
        return None;
    }
    values.iter().position(|&v| v <= best + tie_slack(best))
}

/// Golden-section minimization of a unimodal `f` on `[lo, hi]`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo <= GOLDEN_TOL * (1.0 + lo.abs()) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Grid search on `points` nodes of `[lo, hi]`, then golden-section on the
/// bracket around the best node. The refined point replaces the grid point
/// only if it is better by more than the tie tolerance, so flat stretches
/// resolve to their smallest grid point.
pub fn minimize_1d<F>(f: F, lo: f64, hi: f64, points: usize) -> Option<(f64, f64)>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let grid = linspace(lo, hi, points.max(2));
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let k = argmin_first(&values)?;
    let (mut x, mut v) = (grid[k], values[k]);
    let a = grid[k.saturating_sub(1)];
    let b = grid[(k + 1).min(grid.len() - 1)];
    if b > a {
        let (xr, vr) = golden_section(&f, a, b);
        if vr < v - tie_slack(v) {
            x = xr;
            v = vr;
        }
    }
    Some((x, v))
}

/// Coordinate refinement: for each coordinate try `±step` moves within the
/// box, halving the step `halvings` times per round. Only strict improvements
/// beyond the tie tolerance are accepted.
pub fn coordinate_refine<F>(
    f: F,
    start: &[f64],
    lower: &[f64],
    upper: &[f64],
    initial_step: &[f64],
    rounds: usize,
    halvings: usize,
) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let mut x = start.to_vec();
    let mut best = f(&x);
    for _ in 0..rounds {
        let mut step = initial_step.to_vec();
        for _ in 0..=halvings {
            let mut improved = true;
            let mut passes = 0;
            while improved && passes < 64 {
                improved = false;
                passes += 1;
                for i in 0..x.len() {
                    for dir in [-1.0, 1.0] {
                        let cand = (x[i] + dir * step[i]).clamp(lower[i], upper[i]);
                        if cand == x[i] {
                            continue;
                        }
                        let mut y = x.clone();
                        y[i] = cand;
                        let v = f(&y);
                        if v < best - tie_slack(best) {
                            x = y;
                            best = v;
                            improved = true;
                        }
                    }
                }
            }
            step.iter_mut().for_each(|s| *s *= 0.5);
        }
    }
    (x, best)
}

/// Largest interval `[lo, hi] ∋ x_star` inside `[lower, upper]` on which
/// `f ≤ target + tol`, found by an outward scan with `step` followed by
/// bisection of the first failing bracket on each side.
pub fn flat_interval<F: Fn(f64) -> f64>(
    f: F,
    x_star: f64,
    lower: f64,
    upper: f64,
    target: f64,
    tol: f64,
    step: f64,
) -> (f64, f64) {
    let ok = |x: f64| f(x) <= target + tol;
    let edge = |dir: f64| -> f64 {
        let bound = if dir > 0.0 { upper } else { lower };
        let mut inside = x_star;
        loop {
            let next = if dir > 0.0 { (inside + step).min(bound) } else { (inside - step).max(bound) };
            if next == inside {
                return inside;
            }
            if !ok(next) {
                let (mut good, mut bad) = (inside, next);
                for _ in 0..60 {
                    if (bad - good).abs() <= 1e-12 * (1.0 + good.abs()) {
                        break;
                    }
                    let mid = 0.5 * (good + bad);
                    if ok(mid) {
                        good = mid;
                    } else {
                        bad = mid;
                    }
                }
                return good;
            }
            inside = next;
        }
    };
    if step <= 0.0 || !(upper > lower) {
        return (x_star, x_star);
    }
    (edge(-1.0), edge(1.0))
}

/// All `parts`-tuples of nonnegative integers summing to `total`, in
/// lexicographic order.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=total {
            prefix.push(k);
            rec(total - k, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_hits_endpoints() {
        let g = linspace(0.0, 0.3, 4);
        assert_eq!(g.len(), 4);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[3], 0.3);
        assert_eq!(linspace(2.0, 5.0, 1), vec![2.0]);
    }

    #[test]
    fn argmin_prefers_first_tie() {
        assert_eq!(argmin_first(&[3.0, 1.0, 1.0 + 1e-14, 0.5 + 0.5]), Some(1));
        assert_eq!(argmin_first(&[f64::NAN, 2.0]), Some(1));
        assert_eq!(argmin_first(&[f64::INFINITY]), None);
    }

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, v) = golden_section(|x| (x - 0.3).powi(2) + 1.0, 0.0, 1.0);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn minimize_1d_keeps_smallest_point_on_flat_function() {
        let (x, v) = minimize_1d(|_| 1.9, 0.0, 0.1, 2001).unwrap();
        assert_eq!(x, 0.0);
        assert_eq!(v, 1.9);
        let (x, _) = minimize_1d(|x| (x - 0.0523).abs(), 0.0, 0.1, 2001).unwrap();
        assert!((x - 0.0523).abs() < 1e-9);
    }

    #[test]
    fn coordinate_refine_descends() {
        let f = |x: &[f64]| (x[0] - 0.4).powi(2) + (x[1] - 0.7).powi(2);
        let (x, v) = coordinate_refine(f, &[0.0, 0.0], &[0.0, 0.0], &[1.0, 1.0], &[0.1, 0.1], 2, 30);
        assert!(v < 1e-14, "{x:?}");
    }

    #[test]
    fn flat_interval_finds_plateau_edges() {
        let f = |x: f64| {
            if x < 0.2 {
                0.2 - x
            } else if x > 0.6 {
                x - 0.6
            } else {
                0.0
            }
        };
        let (lo, hi) = flat_interval(f, 0.4, 0.0, 1.0, 0.0, 1e-9, 0.05);
        assert!((lo - 0.2).abs() < 1e-8 && (hi - 0.6).abs() < 1e-8, "({lo}, {hi})");
        let (lo, hi) = flat_interval(|_| 0.0, 0.5, 0.0, 1.0, 0.0, 1e-9, 0.3);
        assert_eq!((lo, hi), (0.0, 1.0));
    }

    #[test]
    fn compositions_are_lexicographic() {
        let c = compositions(2, 2);
        assert_eq!(c, vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(compositions(200, 3).len(), 202 * 201 / 2);
        assert!(compositions(5, 3).windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn par_eval_preserves_order() {
        let v = par_eval(1000, |k| k as f64);
        assert!(v.iter().enumerate().all(|(k, &x)| x == k as f64));
    }
}
