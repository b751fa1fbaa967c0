use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use robust_reinsurance::asymptotic::{loading_m, objective_tilde_v};
use robust_reinsurance::normal;
use robust_reinsurance::quadrature::adaptive_simpson;
use robust_reinsurance::risk_measures::{measure_of_contract, rvar, var, RiskLevels, Side};
use robust_reinsurance::worst_case::{
    comonotonic_aggregate, makarov_two, oracle_max_var_discrete, simplex_rvar_bound, simplex_sum, simplex_var_bound,
    QuantileMatrix,
};
use robust_reinsurance::{Dependence, Distribution, Indemnity, Mode, Scenario, SearchConfig};

fn lomax98() -> Distribution {
    Distribution::lomax(9.0, 8.0).unwrap()
}

fn fast() -> SearchConfig {
    SearchConfig { gamma0_points: 61, simplex_resolution: 60, ..SearchConfig::default() }
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn layer_mean_matches_monte_carlo() {
    let d = lomax98();
    let f = Indemnity::layer(0.5, 2.3324).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let draws: Vec<f64> = (0..1_000_000).map(|_| f.evaluate(d.sample(&mut rng))).collect();
    let (mean, se) = mean_and_se(&draws);
    let exact = d.layer_mean(0.5, 2.3324).unwrap();
    assert!((mean - exact).abs() < 3.0 * se, "{mean} vs {exact} (se {se})");
}

#[test]
fn normal_loading_matches_tail_integral() {
    for a in [0.01, 0.05, 0.1, 0.3] {
        // ES of N(0,1) over its top `a` mass is E[Z; Z > z_a] / a
        let z = normal::quantile(1.0 - a);
        let tail = adaptive_simpson(&|x| x * normal::pdf(x), z, 40.0, 1e-13, 50);
        let m = loading_m(RiskLevels::new(0.0, a).unwrap());
        assert!((m - tail / a).abs() < 1e-8, "{a}: {m} vs {}", tail / a);
    }
}

#[test]
fn tilde_v_matches_monte_carlo_moments() {
    let d = lomax98();
    let f = Indemnity::layer(0.5, 2.3324).unwrap();
    let s = Scenario::new(
        vec![d.clone()],
        vec![RiskLevels::new(0.0, 0.1).unwrap()],
        RiskLevels::new(0.0, 0.05).unwrap(),
        Mode::RVaR,
        Dependence::IID,
    )
    .unwrap();
    let value = objective_tilde_v(&s, std::slice::from_ref(&f)).unwrap();
    let retained = measure_of_contract(&d, &f, s.insurer_levels[0], Side::Retained).unwrap();
    let m = loading_m(s.reinsurer_levels);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let draws: Vec<f64> = (0..1_000_000).map(|_| f.evaluate(d.sample(&mut rng))).collect();
    let (mean, se_mean) = mean_and_se(&draws);
    let sd = (draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws.len() as f64 - 1.0)).sqrt();
    let estimate = retained + mean + m * sd;
    // the standard deviation estimate has error of order sd / sqrt(2N)
    let se = se_mean + m * sd / (2.0 * draws.len() as f64).sqrt();
    assert!((value - estimate).abs() < 3.0 * se, "{value} vs {estimate} (se {se})");
}

#[test]
fn rvar_matches_simpson_on_quantiles() {
    let cases = [
        (Distribution::exponential(1.0).unwrap(), RiskLevels::new(0.0, 0.05).unwrap()),
        (lomax98(), RiskLevels::new(0.02, 0.1).unwrap()),
        (Distribution::uniform(1.0, 3.0).unwrap(), RiskLevels::new(0.1, 0.5).unwrap()),
        (Distribution::normal(1.0, 2.0).unwrap(), RiskLevels::new(0.05, 0.2).unwrap()),
    ];
    for (d, levels) in cases {
        let (lo, hi) = (levels.lower(), levels.upper());
        let hi_eval = hi.min(1.0 - 1e-12);
        let integral = adaptive_simpson(&|u| d.quantile(u).unwrap(), lo, hi_eval, 1e-12, 50);
        let oracle = integral / (hi - lo);
        let tail_correction = if hi == 1.0 { 1e-6 } else { 1e-9 };
        assert!((rvar(&d, levels).unwrap() - oracle).abs() < tail_correction, "{d:?}");
    }
}

#[test]
fn worst_case_dominates_other_couplings() {
    let pair = [lomax98(), Distribution::exponential(1.0).unwrap()];
    let p = 0.9;
    let bound = simplex_var_bound(&pair, p, &fast()).unwrap();
    let comonotonic = comonotonic_aggregate(&pair, RiskLevels::var(p).unwrap()).unwrap();
    assert!(bound.value >= comonotonic - 1e-9);

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut sums: Vec<f64> = (0..200_000).map(|_| pair[0].sample(&mut rng) + pair[1].sample(&mut rng)).collect();
    sums.sort_by(f64::total_cmp);
    let independent = sums[(p * sums.len() as f64) as usize];
    assert!(bound.value >= independent, "{} vs {independent}", bound.value);
}

#[test]
fn rvar_bound_with_tiny_window_approaches_var_bound() {
    let pair = [lomax98(), lomax98()];
    let b = simplex_rvar_bound(&pair, RiskLevels::new(0.1, 1e-6).unwrap(), &SearchConfig::default()).unwrap();
    assert!((b.value - 6.3194).abs() < 1e-2, "{}", b.value);
    assert!(b.assumption_met);
}

#[test]
fn discrete_oracle_sandwich() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in 0..10 {
        let d1 = Distribution::lomax(rng.gen_range(3.0..10.0), rng.gen_range(1.0..8.0)).unwrap();
        let d2 = if case % 2 == 0 {
            Distribution::exponential(rng.gen_range(0.3..2.0)).unwrap()
        } else {
            Distribution::lomax(rng.gen_range(3.0..10.0), rng.gen_range(1.0..8.0)).unwrap()
        };
        let p = rng.gen_range(0.8..0.95);
        let m = rng.gen_range(4..=8);
        let tail = QuantileMatrix::from_marginals(&[d1.clone(), d2.clone()], p, m).unwrap();
        let exact = oracle_max_var_discrete(tail.columns(), 1.0 / m as f64).unwrap();
        let (makarov, _) = makarov_two(&d1, &d2, p, 2001).unwrap();
        let spacing: f64 = tail.columns().iter().map(|c| c.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)).sum();
        assert!(exact <= makarov + 1e-9, "case {case}: {exact} > {makarov}");
        assert!(makarov - exact <= spacing, "case {case}: gap {} > {spacing}", makarov - exact);
    }
}

fn concave_tail() -> impl Strategy<Value = Distribution> {
    prop_oneof![
        (2.5f64..12.0, 0.5f64..10.0).prop_map(|(a, s)| Distribution::lomax(a, s).unwrap()),
        (0.2f64..3.0).prop_map(|r| Distribution::exponential(r).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn witness_is_feasible_and_reproduces_bound(
        d1 in concave_tail(),
        d2 in concave_tail(),
        beta in 0.01f64..0.1,
        alpha in 0.01f64..0.1,
    ) {
        let pair = [d1, d2];
        let b = simplex_rvar_bound(&pair, RiskLevels::new(beta, alpha).unwrap(), &fast()).unwrap();
        b.witness.validate().unwrap();
        prop_assert!(b.witness.gamma[0] >= alpha - 1e-12);
        prop_assert!((b.witness.gamma.iter().sum::<f64>() - (beta + alpha)).abs() < 1e-12);
        prop_assert!((simplex_sum(&pair, &b.witness.gamma) - b.value).abs() < 1e-10);
        let comonotonic = comonotonic_aggregate(&pair, RiskLevels::new(beta, alpha).unwrap()).unwrap();
        prop_assert!(b.value >= comonotonic - 1e-9);
    }

    #[test]
    fn makarov_bound_dominates_comonotonic_var(d1 in concave_tail(), d2 in concave_tail(), p in 0.5f64..0.99) {
        let (v, t) = makarov_two(&d1, &d2, p, 401).unwrap();
        prop_assert!((0.0..=1.0 - p).contains(&t));
        prop_assert!(v >= var(&d1, p).unwrap() + var(&d2, p).unwrap() - 1e-9);
    }
}
