//! Theoretical laws asserted for eigenvalues, overlaps and angles, given as
//! samplers of independent-variable representations.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};
use statrs::function::factorial::ln_factorial;

use super::{beta_sample, gamma_sample, LawError};
use crate::rng::complex_normal;

/// `φ(z, w) = z / sqrt(1 + |z|² + |w|²)`, mapping into the open unit disk.
pub fn phi_disk(z: Complex64, w: Complex64) -> Complex64 {
    z / (1.0 + z.norm_sqr() + w.norm_sqr()).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum Generator {
    /// Sorted `{γ(2i)}`, `i = 1..N` (or `2..N`), plus their sum.
    Kostlan { n: usize, conditioned_zero: bool },
    /// `γ(2i)^(M/2) e^{iθ_i}`; sorted moduli then sorted real parts of `Ψ`.
    HighPowers { n: usize, m: u32 },
    /// `O_11` at fixed unscaled eigenvalues, `λ_1 = lambdas[0]`.
    OverlapAtSpectrum { lambdas: Vec<Complex64> },
    /// `O_11 / divisor` with `λ_1 = 0` and the remaining radii `sqrt(γ(2k))`.
    OverlapConditionedProduct { n: usize, divisor: f64 },
    /// `1 / (scale · β(a, b))`.
    BetaInverse { a: f64, b: f64, scale: f64 },
    /// `1 / (scale · γ(shape))`.
    GammaInverse { shape: f64, scale: f64 },
    /// `φ(X/(λ₁-λ₂), Y/(conj λ₁-λ₂))` at unscaled eigenvalues: `|φ|², Re φ, Im φ`.
    AngleAtPair {
        lambda1: Complex64,
        lambda2: Complex64,
    },
    /// `|arg|² ~ β(1, I+1)`, `I` uniform on `{4, 6, …, 2N}`.
    AngleConditionedZero { n: usize },
}

/// A theoretical law: its sampler and the names of the scalar statistics it emits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawSpec {
    pub name: String,
    pub statistics: Vec<String>,
    pub generator: Generator,
}

fn indexed(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}_{i}")).collect()
}

impl LawSpec {
    /// One draw of every statistic, in `statistics` order.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.generator {
            Generator::Kostlan {
                n,
                conditioned_zero,
            } => {
                let first = if *conditioned_zero { 2 } else { 1 };
                let xs: Vec<f64> = (first..=*n)
                    .map(|i| gamma_sample(2.0 * i as f64, rng))
                    .collect();
                kostlan_statistics(&xs)
            }
            Generator::HighPowers { n, m } => {
                let pts: Vec<Complex64> = (1..=*n)
                    .map(|i| {
                        let r = gamma_sample(2.0 * i as f64, rng).powf(*m as f64 / 2.0);
                        Complex64::from_polar(r, rng.random_range(0.0..2.0 * PI))
                    })
                    .collect();
                highpowers_statistics(&pts)
            }
            Generator::OverlapAtSpectrum { lambdas } => {
                let l1 = lambdas[0];
                let o = lambdas[1..].iter().fold(1.0, |acc, &lk| {
                    let x = complex_normal(rng).norm_sqr();
                    let y = complex_normal(rng).norm_sqr();
                    acc * (1.0 + x / (l1 - lk).norm_sqr() + y / (l1 - lk.conj()).norm_sqr())
                });
                vec![o]
            }
            Generator::OverlapConditionedProduct { n, divisor } => {
                let o = (2..=*n).fold(1.0, |acc, k| {
                    let r2 = gamma_sample(2.0 * k as f64, rng);
                    let x = complex_normal(rng).norm_sqr();
                    let y = complex_normal(rng).norm_sqr();
                    acc * (1.0 + (x + y) / r2)
                });
                vec![o / divisor]
            }
            Generator::BetaInverse { a, b, scale } => {
                vec![1.0 / (scale * beta_sample(*a, *b, rng))]
            }
            Generator::GammaInverse { shape, scale } => {
                vec![1.0 / (scale * gamma_sample(*shape, rng))]
            }
            Generator::AngleAtPair { lambda1, lambda2 } => {
                let x = complex_normal(rng);
                let y = complex_normal(rng);
                let a = phi_disk(x / (lambda1 - lambda2), y / (lambda1.conj() - lambda2));
                vec![a.norm_sqr(), a.re, a.im]
            }
            Generator::AngleConditionedZero { n } => {
                let k = rng.random_range(2..=*n);
                vec![beta_sample(1.0, 2.0 * k as f64 + 1.0, rng)]
            }
        }
    }

    pub fn sample_many<R: Rng + ?Sized>(&self, draws: usize, rng: &mut R) -> Vec<Vec<f64>> {
        (0..draws).map(|_| self.draw(rng)).collect()
    }
}

/// Sorted values followed by their sum.
pub fn kostlan_statistics(squared_radii: &[f64]) -> Vec<f64> {
    let mut v = squared_radii.to_vec();
    v.sort_by(f64::total_cmp);
    let sum = v.iter().sum();
    v.push(sum);
    v
}

/// Sorted moduli and sorted real parts of the representatives (each value of
/// `Ψ` appears twice in the duplicated set, so the representatives suffice).
pub fn highpowers_statistics(points: &[Complex64]) -> Vec<f64> {
    let mut moduli: Vec<f64> = points.iter().map(|z| z.norm()).collect();
    let mut reals: Vec<f64> = points.iter().map(|z| z.re).collect();
    moduli.sort_by(f64::total_cmp);
    reals.sort_by(f64::total_cmp);
    moduli.extend(reals);
    moduli
}

pub fn kostlan_reference(n: usize, conditioned_zero: bool) -> LawSpec {
    let k = if conditioned_zero { n - 1 } else { n };
    let mut statistics = indexed("order", k);
    statistics.push("sum".into());
    LawSpec {
        name: if conditioned_zero {
            "kostlan_conditioned".into()
        } else {
            "kostlan".into()
        },
        statistics,
        generator: Generator::Kostlan {
            n,
            conditioned_zero,
        },
    }
}

pub fn highpowers_reference(n: usize, m: u32) -> Result<LawSpec, LawError> {
    if (m as usize) < 2 * n {
        return Err(LawError::HypothesisViolated { n, m });
    }
    Ok(highpowers_law(n, m))
}

/// Same generator without the `M >= 2N` check, for negative controls.
pub fn highpowers_law(n: usize, m: u32) -> LawSpec {
    let mut statistics = indexed("modulus", n);
    statistics.extend(indexed("real", n));
    LawSpec {
        name: format!("highpowers_m{m}"),
        statistics,
        generator: Generator::HighPowers { n, m },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OverlapCondition {
    /// Fixed unscaled eigenvalues, `λ_1` first.
    Spectrum(Vec<Complex64>),
    /// `λ_1 = 0`: product representation of `O_11/(2N)`.
    ZeroProduct,
    /// `λ_1 = 0`: `(2N β(4, 2N))⁻¹` as stated for `O_11/(2N)`.
    ZeroStatedBeta,
    /// `λ_1 = 0`: `(2N β(4, 2N-2))⁻¹`, the law of `O_11/(2N)` implied by the product.
    ZeroExactBeta,
    /// `λ_1 = 0`: limit law `(γ(4)/2)⁻¹` of `O_11/N`.
    ZeroGammaLimit,
}

pub fn overlap_reference(n: usize, cond: OverlapCondition) -> Result<LawSpec, LawError> {
    if n < 2 {
        return Err(LawError::InvalidParameter(
            "overlap laws need N >= 2".into(),
        ));
    }
    let two_n = 2.0 * n as f64;
    let (name, stat, generator) = match cond {
        OverlapCondition::Spectrum(lambdas) => {
            if lambdas.len() != n {
                return Err(LawError::InvalidParameter("need N eigenvalues".into()));
            }
            (
                "overlap_at_spectrum",
                "o11",
                Generator::OverlapAtSpectrum { lambdas },
            )
        }
        OverlapCondition::ZeroProduct => (
            "overlap_conditioned_product",
            "o11_over_2n",
            Generator::OverlapConditionedProduct { n, divisor: two_n },
        ),
        OverlapCondition::ZeroStatedBeta => (
            "overlap_beta_4_2n",
            "o11_over_2n",
            Generator::BetaInverse {
                a: 4.0,
                b: two_n,
                scale: two_n,
            },
        ),
        OverlapCondition::ZeroExactBeta => (
            "overlap_beta_4_2n_minus_2",
            "o11_over_2n",
            Generator::BetaInverse {
                a: 4.0,
                b: two_n - 2.0,
                scale: two_n,
            },
        ),
        OverlapCondition::ZeroGammaLimit => (
            "overlap_gamma4_limit",
            "o11_over_n",
            Generator::GammaInverse {
                shape: 4.0,
                scale: 0.5,
            },
        ),
    };
    Ok(LawSpec {
        name: name.into(),
        statistics: vec![stat.into()],
        generator,
    })
}

/// `∏_{k≥2} (1 + 1/|λ₁-λ_k|² + 1/|λ₁-conj λ_k|²)` at unscaled eigenvalues.
pub fn overlap_conditional_mean(lambdas: &[Complex64]) -> f64 {
    let l1 = lambdas[0];
    lambdas[1..]
        .iter()
        .map(|&lk| 1.0 + 1.0 / (l1 - lk).norm_sqr() + 1.0 / (l1 - lk.conj()).norm_sqr())
        .product()
}

pub fn angle_reference(lambda1: Complex64, lambda2: Complex64) -> Result<LawSpec, LawError> {
    if lambda1 == lambda2 || lambda1.im == 0.0 || lambda2.im == 0.0 {
        return Err(LawError::DegeneratePair);
    }
    Ok(LawSpec {
        name: "angle_at_pair".into(),
        statistics: vec!["abs2".into(), "re".into(), "im".into()],
        generator: Generator::AngleAtPair { lambda1, lambda2 },
    })
}

pub fn angle_reference_conditioned(n: usize) -> Result<LawSpec, LawError> {
    if n < 2 {
        return Err(LawError::InvalidParameter("angle laws need N >= 2".into()));
    }
    Ok(LawSpec {
        name: "angle_conditioned_zero".into(),
        statistics: vec!["abs2".into()],
        generator: Generator::AngleConditionedZero { n },
    })
}

/// CDF of the `β(1, I+1)` mixture, `I` uniform on `{4, 6, …, 2N}`.
pub fn angle_conditioned_cdf(n: usize, x: f64) -> f64 {
    let parts: Vec<Beta> = (2..=n)
        .map(|k| Beta::new(1.0, 2.0 * k as f64 + 1.0).unwrap())
        .collect();
    parts.iter().map(|b| b.cdf(x.clamp(0.0, 1.0))).sum::<f64>() / parts.len() as f64
}

/// `P(X_(k) <= x)` for independent `X_i` with `P(X_i <= x) = ps[i]`, `k` 1-based.
pub fn order_statistic_cdf(ps: &[f64], k: usize) -> f64 {
    // dist[j] = P(exactly j of the X_i are <= x)
    let mut dist = vec![0.0; ps.len() + 1];
    dist[0] = 1.0;
    for (i, &p) in ps.iter().enumerate() {
        for j in (0..=i + 1).rev() {
            let stay = dist[j] * (1.0 - p);
            let up = if j > 0 { dist[j - 1] * p } else { 0.0 };
            dist[j] = stay + up;
        }
    }
    dist[k..].iter().sum::<f64>().clamp(0.0, 1.0)
}

/// `Z_N = 2^N N! ∏ (2i-1)!`, as a logarithm.
pub fn log_partition(n: usize) -> f64 {
    let n64 = n as u64;
    n as f64 * 2f64.ln()
        + ln_factorial(n64)
        + (1..=n64).map(|i| ln_factorial(2 * i - 1)).sum::<f64>()
}

/// `ln ∏_{i<j} |λ_i-λ_j|² ∏_{i≤j} |λ_i-conj λ_j|²`.
pub fn joint_density_log(lambdas: &[Complex64]) -> f64 {
    let n = lambdas.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in i..n {
            if i < j {
                s += (lambdas[i] - lambdas[j]).norm_sqr().ln();
            }
            s += (lambdas[i] - lambdas[j].conj()).norm_sqr().ln();
        }
    }
    s
}

/// Density of the representatives with respect to `μ^N`, optionally divided by `Z_N`.
pub fn joint_density_eval(lambdas: &[Complex64], normalized: bool) -> f64 {
    let n = lambdas.len();
    if n <= 8 {
        let mut p = 1.0;
        for i in 0..n {
            for j in i..n {
                if i < j {
                    p *= (lambdas[i] - lambdas[j]).norm_sqr();
                }
                p *= (lambdas[i] - lambdas[j].conj()).norm_sqr();
            }
        }
        if normalized {
            p / log_partition(n).exp()
        } else {
            p
        }
    } else {
        let log = joint_density_log(lambdas) - if normalized { log_partition(n) } else { 0.0 };
        log.exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kostlan_shapes() {
        let mut rng = trial_rng(1, 0, 0);
        assert_eq!(kostlan_reference(1, false).draw(&mut rng).len(), 2);
        assert_eq!(kostlan_reference(2, true).draw(&mut rng).len(), 2);
        let law = kostlan_reference(2, false);
        let n = 50_000;
        let mean = (0..n).map(|_| law.draw(&mut rng)[2]).sum::<f64>() / n as f64;
        assert!((mean - 6.0).abs() < 0.06, "{mean}");
    }

    #[test]
    fn highpowers_hypothesis() {
        assert_eq!(
            highpowers_reference(2, 3),
            Err(LawError::HypothesisViolated { n: 2, m: 3 })
        );
        assert!(highpowers_reference(2, 4).is_ok());
    }

    #[test]
    fn highpowers_n1_m2_modulus_is_gamma2() {
        let law = highpowers_reference(1, 2).unwrap();
        let mut rng = trial_rng(2, 0, 0);
        let xs: Vec<f64> = (0..20_000).map(|_| law.draw(&mut rng)[0]).collect();
        let g = statrs::distribution::Gamma::new(2.0, 1.0).unwrap();
        let r = crate::laws::ks_statistic(&xs, |x| g.cdf(x)).unwrap();
        assert!(r.p_value > 1e-3);
    }

    #[test]
    fn angle_law_basics() {
        assert_eq!(phi_disk(c(0.0, 0.0), c(5.0, 1.0)), c(0.0, 0.0));
        assert_eq!(
            angle_reference(c(0.0, 1.0), c(0.0, 1.0)),
            Err(LawError::DegeneratePair)
        );
        let law = angle_reference(c(0.3, 0.5), c(-0.2, 0.9)).unwrap();
        let mut rng = trial_rng(3, 0, 0);
        for _ in 0..1000 {
            assert!(law.draw(&mut rng)[0] < 1.0);
        }
    }

    #[test]
    fn angle_mixture_n2_is_beta_1_5() {
        let b = Beta::new(1.0, 5.0).unwrap();
        for x in [0.01, 0.1, 0.3, 0.7] {
            assert!((angle_conditioned_cdf(2, x) - b.cdf(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn order_statistics_two_uniforms() {
        // min and max of two U(0,1) at x: 1-(1-x)², x²
        let x: f64 = 0.3;
        assert!((order_statistic_cdf(&[x, x], 1) - (1.0 - (1.0 - x).powi(2))).abs() < 1e-15);
        assert!((order_statistic_cdf(&[x, x], 2) - x * x).abs() < 1e-15);
    }

    #[test]
    fn joint_density_examples() {
        assert!((joint_density_eval(&[c(0.0, 1.0)], false) - 4.0).abs() < 1e-15);
        assert!((log_partition(1).exp() - 2.0).abs() < 1e-14);
        assert_eq!(joint_density_eval(&[c(0.5, 1.0), c(0.5, 1.0)], false), 0.0);
        let l = [c(0.3, 0.2), c(-1.0, 0.7), c(0.1, 1.5)];
        let p = joint_density_eval(&l, true);
        let perm = [l[2], l[0], l[1]];
        let conj: Vec<Complex64> = l.iter().map(|z| z.conj()).collect();
        assert!((joint_density_eval(&perm, true) - p).abs() < 1e-14 * p);
        assert!((joint_density_eval(&conj, true) - p).abs() < 1e-14 * p);
        // log path agrees with direct path
        let ten: Vec<Complex64> = (0..10)
            .map(|k| c(0.1 * k as f64, 0.5 + 0.05 * k as f64))
            .collect();
        let direct: f64 = joint_density_log(&ten).exp();
        assert!((joint_density_eval(&ten, false) - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn partition_function_by_monte_carlo() {
        // ∫ |λ - conj λ|² dμ = E[4 (Im z)²] = 2
        let mut rng = trial_rng(4, 0, 0);
        let n = 200_000;
        let m = (0..n)
            .map(|_| joint_density_eval(&[complex_normal(&mut rng)], false))
            .sum::<f64>()
            / n as f64;
        assert!((m - 2.0).abs() < 0.03, "{m}");
    }
}
