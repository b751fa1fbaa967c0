use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use robust_reinsurance::asymptotic::{clt_check, objective_tilde_g, optimal_a_star, CappedLayers};
use robust_reinsurance::{normal, Dependence, Distribution, Indemnity, Scenario};

fn lomax98() -> Distribution {
    Distribution::lomax(9.0, 8.0).unwrap()
}

/// Common retention of `n` identical insurers at a common level: the first
/// `a` with `1 - z·w(a)/√(n·(v(a) - w(a)²)) ≥ 0`, found by plain bisection.
fn symmetric_retention(d: &Distribution, n: usize, p_insurer: f64, p: f64) -> f64 {
    let cap = d.quantile(p_insurer).unwrap();
    let z = normal::quantile(p);
    let factor = |a: f64| {
        let w = d.layer_mean(a, cap).unwrap();
        let v = d.layer_second_moment_part(a, cap).unwrap();
        1.0 - z * w / (n as f64 * (v - w * w)).sqrt()
    };
    if factor(0.0) >= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, cap);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if factor(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[test]
fn equal_levels_match_the_symmetric_condition() {
    let d = lomax98();
    for n in [1usize, 2, 4, 8, 16, 32] {
        let s = Scenario::var(vec![d.clone(); n], &vec![0.9; n], 0.95, Dependence::IID).unwrap();
        let sol = optimal_a_star(&s).unwrap();
        assert!(sol.converged);
        let oracle = symmetric_retention(&d, n, 0.9, 0.95);
        for &a in &sol.a {
            assert!((a - oracle).abs() < 1e-8, "n = {n}: {a} vs {oracle}");
        }
    }
}

#[test]
fn a_star_beats_random_retentions_with_three_insurers() {
    let marginals = vec![lomax98(), Distribution::lomax(6.0, 5.0).unwrap(), Distribution::exponential(1.0).unwrap()];
    let s = Scenario::var(marginals, &[0.9, 0.95, 0.85], 0.95, Dependence::IID).unwrap();
    let sol = optimal_a_star(&s).unwrap();
    let layers = CappedLayers::new(&s).unwrap();
    assert_eq!(sol.b, layers.caps());
    let best = objective_tilde_g(&s, &sol.a, &sol.b).unwrap();
    assert!((best - sol.objective).abs() < 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..500 {
        let a: Vec<f64> = sol.b.iter().map(|&c| rng.gen_range(0.0..=c)).collect();
        assert!(best <= layers.objective(&a) + 1e-8, "{a:?}");
    }
}

#[test]
fn low_reinsurer_level_keeps_zero_retentions() {
    // a nonpositive normal quantile makes every partial derivative nonnegative
    let s = Scenario::var(vec![lomax98(), lomax98()], &[0.9, 0.9], 0.5, Dependence::IID).unwrap();
    assert_eq!(optimal_a_star(&s).unwrap().a, vec![0.0, 0.0]);
}

#[test]
fn clt_distance_is_reproducible_across_worker_counts() {
    let d = lomax98();
    let f = Indemnity::layer(0.5, 2.3324).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| clt_check(&d, &f, 50, 30_000, 99).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn clt_distance_shrinks_with_more_risks() {
    let d = lomax98();
    let f = Indemnity::layer(0.0, 3.1597).unwrap();
    let ks = |n| clt_check(&d, &f, n, 50_000, 7).unwrap();
    let (few, many) = (ks(2), ks(300));
    assert!(many < few, "{many} vs {few}");
    assert!(many < 0.02);
}
