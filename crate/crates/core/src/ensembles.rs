//! Samplers for the quaternionic Ginibre ensemble and its radially symmetric
//! relatives, the Schur-form sampler, and spectrum extraction.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, ComplexMatrix, LinalgError};
use crate::quat::{extract_quaternionic, QuatError, Quaternion, QuaternionMatrix};
use crate::rng::{complex_normal, normal, stream, trial_rng};

/// Pairing tolerance factor: a trial fails if `|μ - conj λ| > TAU_PAIR (1 + |λ|)`.
pub const TAU_PAIR: f64 = 1e-6;
/// Redraw budget for rank-deficient or singular draws.
pub const MAX_RETRIES: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnsembleError {
    #[error("invalid ensemble configuration: {0}")]
    InvalidConfig(String),
    #[error("rank-deficient draw persisted after {retries} retries")]
    RankDeficient { retries: u32 },
    #[error("singular draw persisted after {retries} retries")]
    Singular { retries: u32 },
    #[error("conjugate pairing residual {residual:.3e} exceeds tolerance")]
    PairingFailure { residual: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Quat(#[from] QuatError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleKind {
    Ginibre,
    SchurGinibre,
    SchurConditionedZero,
    TruncatedUnitary {
        n: usize,
    },
    Product {
        k: usize,
    },
    Spherical,
    /// Complex Ginibre, for the comparison non-normality CLT.
    ComplexGinibre,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    #[default]
    Unscaled,
    /// Divide by `sqrt(2N)` (complex Ginibre: `sqrt(N)`).
    Circular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub kind: EnsembleKind,
    pub n: usize,
    pub scaling: Scaling,
    pub seed: u64,
}

impl EnsembleConfig {
    pub fn new(kind: EnsembleKind, n: usize) -> Self {
        EnsembleConfig {
            kind,
            n,
            scaling: Scaling::Unscaled,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_scaling(mut self, scaling: Scaling) -> Self {
        self.scaling = scaling;
        self
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        if self.n == 0 {
            return Err(EnsembleError::InvalidConfig("N must be positive".into()));
        }
        match self.kind {
            EnsembleKind::TruncatedUnitary { n: 0 } => Err(EnsembleError::InvalidConfig(
                "truncation needs n >= 1".into(),
            )),
            EnsembleKind::Product { k: 0 } => {
                Err(EnsembleError::InvalidConfig("product needs k >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Factor by which circular scaling divides the eigenvalues.
    pub fn circular_factor(&self) -> f64 {
        let base = (2.0 * self.n as f64).sqrt();
        match self.kind {
            EnsembleKind::Product { k } => base.powi(k as i32),
            EnsembleKind::ComplexGinibre => (self.n as f64).sqrt(),
            EnsembleKind::TruncatedUnitary { .. } | EnsembleKind::Spherical => 1.0,
            _ => base,
        }
    }
}

/// One sampled matrix with the number of redraws it took.
#[derive(Debug, Clone)]
pub struct Draw {
    pub matrix: QuaternionMatrix,
    pub retries: u32,
}

/// Quaternion with i.i.d. `N(0, 1/2)` coordinates: `z`, `w` standard complex Gaussians.
pub fn gaussian_quaternion<R: Rng + ?Sized>(rng: &mut R) -> Quaternion {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Quaternion::new(
        s * normal(rng),
        s * normal(rng),
        s * normal(rng),
        s * normal(rng),
    )
}

pub fn ginibre_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> QuaternionMatrix {
    QuaternionMatrix::from_fn(n, |_, _| gaussian_quaternion(rng))
}

/// Quaternionic Ginibre matrix, divided by `sqrt(2N)` under circular scaling.
pub fn sample_ginibre<R: Rng + ?Sized>(cfg: &EnsembleConfig, rng: &mut R) -> QuaternionMatrix {
    let g = ginibre_matrix(cfg.n, rng);
    match cfg.scaling {
        Scaling::Unscaled => g,
        Scaling::Circular => g.scale(1.0 / (2.0 * cfg.n as f64).sqrt()),
    }
}

/// `N×N` complex matrix of standard complex Gaussians.
pub fn sample_complex_ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| complex_normal(rng))
}

/// Top-left `N×N` minor of a Haar quaternionic unitary matrix of size `N+n`.
pub fn sample_truncated_unitary<R: Rng + ?Sized>(
    big_n: usize,
    n: usize,
    rng: &mut R,
) -> Result<Draw, EnsembleError> {
    for retries in 0..=MAX_RETRIES {
        let g = ginibre_matrix(big_n + n, rng);
        match g.gram_schmidt() {
            Ok(u) => {
                return Ok(Draw {
                    matrix: u.leading_minor(big_n),
                    retries,
                })
            }
            Err(QuatError::RankDeficient) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(EnsembleError::RankDeficient {
        retries: MAX_RETRIES,
    })
}

/// `G_1 G_2 ⋯ G_k`.
pub fn sample_product<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> QuaternionMatrix {
    let mut y = ginibre_matrix(n, rng);
    for _ in 1..k {
        y = y.mul(&ginibre_matrix(n, rng));
    }
    y
}

/// `G_1⁻¹ G_2`, inverting through the complex embedding.
pub fn sample_spherical<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Draw, EnsembleError> {
    for retries in 0..=MAX_RETRIES {
        let g1 = ginibre_matrix(n, rng);
        let g2 = ginibre_matrix(n, rng);
        let inv = match linalg::invert(&g1.embed()) {
            Ok(inv) => inv,
            Err(LinalgError::Singular { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        let prod = inv.matmul(&g2.embed());
        return Ok(Draw {
            matrix: extract_quaternionic(&prod)?,
            retries,
        });
    }
    Err(EnsembleError::Singular {
        retries: MAX_RETRIES,
    })
}

/// Dense matrix sampler for the matrix-valued kinds, unscaled.
pub fn sample_matrix(cfg: &EnsembleConfig, trial: u64) -> Result<Draw, EnsembleError> {
    cfg.validate()?;
    let mut rng = trial_rng(cfg.seed, trial, stream::OBSERVED);
    let plain = |matrix| Ok(Draw { matrix, retries: 0 });
    match cfg.kind {
        EnsembleKind::Ginibre => plain(ginibre_matrix(cfg.n, &mut rng)),
        EnsembleKind::TruncatedUnitary { n } => sample_truncated_unitary(cfg.n, n, &mut rng),
        EnsembleKind::Product { k } => plain(sample_product(cfg.n, k, &mut rng)),
        EnsembleKind::Spherical => sample_spherical(cfg.n, &mut rng),
        other => Err(EnsembleError::InvalidConfig(format!(
            "{other:?} has no quaternionic matrix sampler"
        ))),
    }
}

/// Upper-half-plane representatives of a quaternionic spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPairs {
    pub lambdas: Vec<Complex64>,
    pub pairing_residual: f64,
    pub scaling: Scaling,
}

impl SpectrumPairs {
    pub fn squared_radii(&self) -> Vec<f64> {
        self.lambdas.iter().map(|l| l.norm_sqr()).collect()
    }

    /// The conjugation-closed `2N`-point set.
    pub fn duplicated(&self) -> Vec<Complex64> {
        self.lambdas.iter().flat_map(|&l| [l, l.conj()]).collect()
    }
}

/// Eigenvalues of `embed(M)` paired into conjugates; circular scaling divides
/// them by `sqrt(2N)`. Pass `Unscaled` when `M` is already scaled.
pub fn spectrum(m: &QuaternionMatrix, scaling: Scaling) -> Result<SpectrumPairs, EnsembleError> {
    let n = m.size();
    let (mut lambdas, pairing_residual) = if n == 1 {
        let (hi, _) = m[(0, 0)].complex_eigenvalues();
        (vec![hi], 0.0)
    } else {
        let values = linalg::eigenvalues(&m.embed())?;
        let pairing = linalg::pair_conjugates(&values)?;
        (pairing.upper, pairing.max_residual)
    };
    if !(pairing_residual <= TAU_PAIR) {
        return Err(EnsembleError::PairingFailure {
            residual: pairing_residual,
        });
    }
    if scaling == Scaling::Circular {
        let s = 1.0 / (2.0 * n as f64).sqrt();
        lambdas.iter_mut().for_each(|l| *l *= s);
    }
    Ok(SpectrumPairs {
        lambdas,
        pairing_residual,
        scaling,
    })
}

/// Samples the spectrum of trial `trial`, applying the configured scaling.
pub fn sample_spectrum(cfg: &EnsembleConfig, trial: u64) -> Result<SpectrumPairs, EnsembleError> {
    cfg.validate()?;
    let mut out = match cfg.kind {
        EnsembleKind::SchurGinibre | EnsembleKind::SchurConditionedZero => {
            let mut rng = trial_rng(cfg.seed, trial, stream::OBSERVED);
            SpectrumPairs {
                lambdas: sample_schur(cfg, &mut rng)?.lambdas,
                pairing_residual: 0.0,
                scaling: Scaling::Unscaled,
            }
        }
        EnsembleKind::ComplexGinibre => {
            return Err(EnsembleError::InvalidConfig(
                "complex Ginibre spectra are not conjugation closed".into(),
            ))
        }
        _ => spectrum(&sample_matrix(cfg, trial)?.matrix, Scaling::Unscaled)?,
    };
    if cfg.scaling == Scaling::Circular {
        let s = 1.0 / cfg.circular_factor();
        out.lambdas.iter_mut().for_each(|l| *l *= s);
        out.scaling = Scaling::Circular;
    }
    Ok(out)
}

/// Upper-triangular quaternionic Schur form: diagonal `λ_i` and off-diagonal
/// blocks `[[u, v], [-conj v, conj u]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchurForm {
    pub n: usize,
    pub lambdas: Vec<Complex64>,
    /// `(u_ij, v_ij)` for `i < j`, row by row.
    blocks: Vec<(Complex64, Complex64)>,
}

fn block_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

impl SchurForm {
    pub fn new(lambdas: Vec<Complex64>, blocks: Vec<(Complex64, Complex64)>) -> Self {
        let n = lambdas.len();
        assert_eq!(blocks.len(), n * n.saturating_sub(1) / 2, "block count");
        SchurForm { n, lambdas, blocks }
    }

    /// Diagonal form (all `T` blocks zero).
    pub fn diagonal(lambdas: Vec<Complex64>) -> Self {
        let n = lambdas.len();
        let zero = Complex64::new(0.0, 0.0);
        Self::new(lambdas, vec![(zero, zero); n * n.saturating_sub(1) / 2])
    }

    /// `(u_ij, v_ij)`, `i < j`.
    pub fn block(&self, i: usize, j: usize) -> (Complex64, Complex64) {
        self.blocks[block_index(self.n, i, j)]
    }

    pub fn set_block(&mut self, i: usize, j: usize, uv: (Complex64, Complex64)) {
        let k = block_index(self.n, i, j);
        self.blocks[k] = uv;
    }

    pub fn blocks(&self) -> &[(Complex64, Complex64)] {
        &self.blocks
    }

    pub fn expand(&self) -> ComplexMatrix {
        let n = self.n;
        let mut t = ComplexMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            t[(2 * i, 2 * i)] = self.lambdas[i];
            t[(2 * i + 1, 2 * i + 1)] = self.lambdas[i].conj();
            for j in i + 1..n {
                let (u, v) = self.block(i, j);
                t[(2 * i, 2 * j)] = u;
                t[(2 * i, 2 * j + 1)] = v;
                t[(2 * i + 1, 2 * j)] = -v.conj();
                t[(2 * i + 1, 2 * j + 1)] = u.conj();
            }
        }
        t
    }

    /// Every entry divided by `s`, e.g. `s = sqrt(2N)`.
    pub fn scaled(&self, s: f64) -> SchurForm {
        SchurForm {
            n: self.n,
            lambdas: self.lambdas.iter().map(|l| l / s).collect(),
            blocks: self.blocks.iter().map(|&(u, v)| (u / s, v / s)).collect(),
        }
    }

    /// Same diagonal, fresh standard Gaussian blocks.
    pub fn resample_blocks<R: Rng + ?Sized>(&self, rng: &mut R) -> SchurForm {
        SchurForm {
            n: self.n,
            lambdas: self.lambdas.clone(),
            blocks: gaussian_blocks(self.n, rng),
        }
    }
}

fn gaussian_blocks<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<(Complex64, Complex64)> {
    (0..n * n.saturating_sub(1) / 2)
        .map(|_| (complex_normal(rng), complex_normal(rng)))
        .collect()
}

/// `sqrt(γ(2i)) e^{iθ}` for `i = 2..N`, `θ` uniform on `(0, π)`, shuffled.
pub fn conditioned_zero_lambdas<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    for i in 2..=n {
        let r2 = Gamma::new(2.0 * i as f64, 1.0).unwrap().sample(rng);
        let theta = rng.random_range(0.0..PI);
        out.push(Complex64::from_polar(r2.sqrt(), theta));
    }
    out.shuffle(rng);
    out
}

/// Unscaled Schur form. The diagonal comes from an independent dense draw,
/// in random order; `schur_conditioned_zero` pins `λ_1 = 0`.
pub fn sample_schur<R: Rng + ?Sized>(
    cfg: &EnsembleConfig,
    rng: &mut R,
) -> Result<SchurForm, EnsembleError> {
    cfg.validate()?;
    let lambdas = match cfg.kind {
        EnsembleKind::SchurGinibre => {
            let g = ginibre_matrix(cfg.n, rng);
            let mut l = spectrum(&g, Scaling::Unscaled)?.lambdas;
            l.shuffle(rng);
            l
        }
        EnsembleKind::SchurConditionedZero => {
            let mut l = vec![Complex64::new(0.0, 0.0)];
            l.extend(conditioned_zero_lambdas(cfg.n, rng));
            l
        }
        other => {
            return Err(EnsembleError::InvalidConfig(format!(
                "{other:?} is not a Schur-form ensemble"
            )))
        }
    };
    Ok(SchurForm::new(lambdas, gaussian_blocks(cfg.n, rng)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::is_quaternionic;

    fn cfg(kind: EnsembleKind, n: usize) -> EnsembleConfig {
        EnsembleConfig::new(kind, n).with_seed(11)
    }

    #[test]
    fn ginibre_is_deterministic() {
        let c = cfg(EnsembleKind::Ginibre, 4);
        let a = sample_matrix(&c, 3).unwrap().matrix;
        let b = sample_matrix(&c, 3).unwrap().matrix;
        assert_eq!(a, b);
        assert_ne!(a, sample_matrix(&c, 4).unwrap().matrix);
    }

    #[test]
    fn samplers_preserve_structure() {
        for kind in [
            EnsembleKind::Ginibre,
            EnsembleKind::TruncatedUnitary { n: 2 },
            EnsembleKind::Product { k: 3 },
            EnsembleKind::Spherical,
        ] {
            let m = sample_matrix(&cfg(kind, 3), 0).unwrap().matrix;
            assert!(is_quaternionic(&m.embed()), "{kind:?}");
        }
    }

    #[test]
    fn entry_variance() {
        let mut rng = trial_rng(1, 0, 0);
        let n = 100_000;
        let (mut z2, mut w2) = (0.0, 0.0);
        for _ in 0..n {
            let (z, w) = gaussian_quaternion(&mut rng).complex_pair();
            z2 += z.norm_sqr();
            w2 += w.norm_sqr();
        }
        assert!((z2 / n as f64 - 1.0).abs() < 0.02);
        assert!((w2 / n as f64 - 1.0).abs() < 0.02);
    }

    #[test]
    fn j_has_spectrum_plus_minus_i() {
        let m = QuaternionMatrix::from_rows(1, vec![Quaternion::J]);
        let s = spectrum(&m, Scaling::Unscaled).unwrap();
        assert!((s.lambdas[0] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let m2 = QuaternionMatrix::from_rows(
            2,
            vec![
                Quaternion::J,
                Quaternion::ZERO,
                Quaternion::ZERO,
                Quaternion::K * 2.0,
            ],
        );
        let mut l = spectrum(&m2, Scaling::Unscaled).unwrap().lambdas;
        l.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((l[0] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        assert!((l[1] - Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn representatives_in_upper_half_plane() {
        let c = cfg(EnsembleKind::Ginibre, 1);
        for t in 0..2000 {
            let s = sample_spectrum(&c, t).unwrap();
            assert!(s.lambdas[0].im > 0.0);
        }
    }

    #[test]
    fn truncated_radii_inside_disk() {
        let c = cfg(EnsembleKind::TruncatedUnitary { n: 1 }, 4);
        for t in 0..200 {
            let s = sample_spectrum(&c, t).unwrap();
            assert!(s.lambdas.iter().all(|l| l.norm() < 1.0));
        }
    }

    #[test]
    fn product_pairs_cleanly() {
        let c = cfg(EnsembleKind::Product { k: 3 }, 4);
        for t in 0..100 {
            assert!(sample_spectrum(&c, t).unwrap().pairing_residual < 1e-7);
        }
    }

    #[test]
    fn circular_edge() {
        let c = cfg(EnsembleKind::Ginibre, 32).with_scaling(Scaling::Circular);
        let trials = 40;
        let mean: f64 = (0..trials)
            .map(|t| {
                sample_spectrum(&c, t)
                    .unwrap()
                    .lambdas
                    .iter()
                    .map(|l| l.norm())
                    .fold(0.0, f64::max)
            })
            .sum::<f64>()
            / trials as f64;
        assert!((0.9..=1.1).contains(&mean), "{mean}");
    }

    #[test]
    fn schur_expansion_pattern() {
        let c = cfg(EnsembleKind::SchurGinibre, 3);
        let mut rng = trial_rng(2, 0, 0);
        let s = sample_schur(&c, &mut rng).unwrap();
        let t = s.expand();
        for i in 0..6 {
            for j in 0..i {
                assert_eq!(t[(i, j)], Complex64::new(0.0, 0.0));
            }
        }
        assert!(is_quaternionic(&t));
        let mut diag = t.diagonal();
        let mut expect = s.duplicated_diagonal();
        let key = |z: &Complex64| (z.re, z.im);
        diag.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        expect.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        assert_eq!(diag, expect);
    }

    impl SchurForm {
        fn duplicated_diagonal(&self) -> Vec<Complex64> {
            self.lambdas.iter().flat_map(|&l| [l, l.conj()]).collect()
        }
    }

    #[test]
    fn conditioned_zero_pins_origin() {
        let c = cfg(EnsembleKind::SchurConditionedZero, 4);
        let mut rng = trial_rng(3, 0, 0);
        for _ in 0..50 {
            let s = sample_schur(&c, &mut rng).unwrap();
            assert_eq!(s.lambdas[0], Complex64::new(0.0, 0.0));
            assert!(s.lambdas[1..].iter().all(|l| l.im > 0.0));
        }
    }

    #[test]
    fn invalid_configs() {
        assert!(cfg(EnsembleKind::Product { k: 0 }, 2).validate().is_err());
        assert!(cfg(EnsembleKind::TruncatedUnitary { n: 0 }, 2)
            .validate()
            .is_err());
        assert!(cfg(EnsembleKind::Ginibre, 0).validate().is_err());
    }
}
