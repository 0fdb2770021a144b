//! Reference distributions and statistical comparison machinery.

mod gamma_v;
mod ks;
mod reference;
mod report;

pub use gamma_v::{
    gamma_v_cdf, gamma_v_pdf, gamma_v_sample, integrate, GammaVLaw, GammaVSpec, Potential,
    GRID_KNOTS,
};
pub use ks::{kolmogorov_sf, ks_statistic, ks_threshold, ks_two_sample, KsResult};
pub use reference::{
    angle_conditioned_cdf, angle_reference, angle_reference_conditioned, highpowers_law,
    highpowers_reference, highpowers_statistics, joint_density_eval, joint_density_log,
    kostlan_reference, kostlan_statistics, log_partition, order_statistic_cdf,
    overlap_conditional_mean, overlap_reference, phi_disk, Generator, LawSpec, OverlapCondition,
};
pub use report::{
    column, compare_one_sample, compare_two_sample, compare_two_sample_at,
    compare_two_sample_default, mean_se, moment_rows, CheckResult, ExperimentReport, MomentRow,
    StatisticResult, Thresholds, Verdict, DEFAULT_ALPHA,
};

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LawError {
    #[error("empty sample")]
    EmptySample,
    #[error("Γ_V integral failed to converge for alpha = {alpha}")]
    Divergent { alpha: f64 },
    #[error("high-power law requires M >= 2N (N = {n}, M = {m})")]
    HypothesisViolated { n: usize, m: u32 },
    #[error("eigenvalue pair is degenerate")]
    DegeneratePair,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Unit-scale gamma variate with shape `k > 0`.
pub fn gamma_sample<R: Rng + ?Sized>(k: f64, rng: &mut R) -> f64 {
    Gamma::new(k, 1.0)
        .expect("gamma shape must be positive")
        .sample(rng)
}

pub fn beta_sample<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    Beta::new(a, b)
        .expect("beta parameters must be positive")
        .sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_rng;

    #[test]
    fn gamma_mean() {
        let mut rng = trial_rng(1, 0, 0);
        let n = 100_000;
        let m = (0..n).map(|_| gamma_sample(2.0, &mut rng)).sum::<f64>() / n as f64;
        assert!((m - 2.0).abs() < 0.02);
    }

    #[test]
    fn beta_support() {
        let mut rng = trial_rng(2, 0, 0);
        for _ in 0..10_000 {
            let x = beta_sample(4.0, 16.0, &mut rng);
            assert!(x > 0.0 && x < 1.0);
        }
    }

    #[test]
    fn gamma_convolution() {
        let mut rng = trial_rng(3, 0, 0);
        let n = 100_000;
        let sums: Vec<f64> = (0..n)
            .map(|_| gamma_sample(2.0, &mut rng) + gamma_sample(4.0, &mut rng))
            .collect();
        let direct: Vec<f64> = (0..n).map(|_| gamma_sample(6.0, &mut rng)).collect();
        assert!(ks_two_sample(&sums, &direct).unwrap().distance < 0.01);
    }
}
