//! Distributional identities behind the exact laws, checked by sampling.

use std::f64::consts::PI;

use qgelab::ensembles::{sample_spectrum, EnsembleConfig, EnsembleKind};
use qgelab::experiments::highpowers_mc;
use qgelab::laws::{
    beta_sample, gamma_sample, ks_statistic, ks_threshold, ks_two_sample, Thresholds,
};
use qgelab::rng::{stream, trial_rng};

const DRAWS: usize = 100_000;

#[test]
fn product_of_betas_telescopes() {
    let n = 10;
    let mut rng = trial_rng(3, 0, stream::OBSERVED);
    let product: Vec<f64> = (0..DRAWS)
        .map(|_| {
            (2..=n)
                .map(|k| beta_sample(2.0 * k as f64, 2.0, &mut rng))
                .product()
        })
        .collect();
    let mut rng = trial_rng(3, 0, stream::REFERENCE);
    let exact: Vec<f64> = (0..DRAWS)
        .map(|_| beta_sample(4.0, 2.0 * n as f64 - 2.0, &mut rng))
        .collect();
    let shifted: Vec<f64> = (0..DRAWS)
        .map(|_| beta_sample(4.0, 2.0 * n as f64, &mut rng))
        .collect();

    let d = ks_two_sample(&product, &exact).unwrap();
    assert!(d.distance < 0.01, "beta(4, 2N-2): {}", d.distance);
    // one more pair of factors shifts the law visibly
    let d = ks_two_sample(&product, &shifted).unwrap();
    assert!(d.distance > 0.05, "beta(4, 2N): {}", d.distance);
}

#[test]
fn gamma_sums() {
    let mut rng = trial_rng(4, 0, stream::OBSERVED);
    for (a, b) in [(1.0, 1.0), (1.0, 4.0), (2.5, 0.5)] {
        let sum: Vec<f64> = (0..DRAWS)
            .map(|_| gamma_sample(a, &mut rng) + gamma_sample(b, &mut rng))
            .collect();
        let direct: Vec<f64> = (0..DRAWS).map(|_| gamma_sample(a + b, &mut rng)).collect();
        let d = ks_two_sample(&sum, &direct).unwrap();
        assert!(d.distance < 0.01, "({a}, {b}): {}", d.distance);
    }
}

/// `cos(arg λ^M)` for `N = 1`; the angle of `λ` has density `sin²θ · 2/π` on `(0, π)`.
fn power_angle_cosines(m: i32, trials: usize) -> Vec<f64> {
    let cfg = EnsembleConfig::new(EnsembleKind::Ginibre, 1).with_seed(8);
    (0..trials as u64)
        .map(|t| {
            let l = sample_spectrum(&cfg, t).unwrap().lambdas[0];
            (l.arg() * m as f64).cos()
        })
        .collect()
}

fn arcsine_cdf(c: f64) -> f64 {
    1.0 - c.clamp(-1.0, 1.0).acos() / PI
}

#[test]
fn square_of_a_single_eigenvalue_is_not_rotation_invariant() {
    let trials = 20_000;
    let th = ks_threshold(trials as f64, 1e-3);
    let c2 = power_angle_cosines(2, trials);
    // density (1 - cos ψ)/(2π) for ψ = 2θ
    let tilted = ks_statistic(&c2, |c| {
        let a = c.clamp(-1.0, 1.0).acos();
        1.0 - (a - a.sin()) / PI
    })
    .unwrap();
    assert!(tilted.distance < th, "{}", tilted.distance);
    let uniform = ks_statistic(&c2, arcsine_cdf).unwrap();
    assert!(uniform.distance > 5.0 * th, "{}", uniform.distance);

    for m in [3, 4, 7] {
        let c = power_angle_cosines(m, trials);
        let d = ks_statistic(&c, arcsine_cdf).unwrap();
        assert!(d.distance < th, "M={m}: {}", d.distance);
    }
}

#[test]
fn high_powers_battery_needs_m_above_2n() {
    let cfg = EnsembleConfig::new(EnsembleKind::Ginibre, 1).with_seed(9);
    let at = highpowers_mc(&cfg, 2, 10_000, &Thresholds::default()).unwrap();
    assert!(!at.passed());
    let above = highpowers_mc(&cfg, 3, 10_000, &Thresholds::default()).unwrap();
    assert!(above.passed(), "{:?}", above.statistics);
}
