//! Real quaternions, quaternionic matrices and their complex 2×2 block embedding.
//!
//! A quaternion `q = a + bi + cj + dk` is represented in the complex form
//!
//! ```text
//!     [  z      w    ]        z = a + bi
//!     [ -conj w conj z ]      w = c + di
//! ```
//!
//! which is a ring homomorphism `H -> M_2(C)`. An `N×N` quaternionic matrix is
//! embedded blockwise into a `2N×2N` complex matrix. Eigenvector equations use
//! right multiplication, `AX = Xλ`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::ComplexMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuatError {
    #[error(
        "matrix is not quaternionic: deviation {deviation:.3e} exceeds tolerance {tolerance:.3e}"
    )]
    StructureViolation { deviation: f64, tolerance: f64 },
    #[error("complex matrix has odd or non-square shape {rows}x{cols}")]
    BadShape { rows: usize, cols: usize },
    #[error("columns are linearly dependent")]
    RankDeficient,
}

/// `q = a + bi + cj + dk`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Quaternion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Quaternion { a, b, c, d }
    }

    pub const fn real(a: f64) -> Self {
        Quaternion::new(a, 0.0, 0.0, 0.0)
    }

    /// Builds `z + w j` from the two complex coordinates of the embedding.
    pub fn from_complex_pair(z: Complex64, w: Complex64) -> Self {
        Quaternion::new(z.re, z.im, w.re, w.im)
    }

    /// `(z, w)` with `z = a + bi`, `w = c + di`.
    pub fn complex_pair(&self) -> (Complex64, Complex64) {
        (
            Complex64::new(self.a, self.b),
            Complex64::new(self.c, self.d),
        )
    }

    pub fn conj(&self) -> Self {
        Quaternion::new(self.a, -self.b, -self.c, -self.d)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 {
            None
        } else {
            Some(self.conj().scale(1.0 / n2))
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Quaternion::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    /// 2×2 complex block `[[z, w], [-conj w, conj z]]`.
    pub fn to_block(&self) -> [[Complex64; 2]; 2] {
        let (z, w) = self.complex_pair();
        [[z, w], [-w.conj(), z.conj()]]
    }

    /// The conjugacy class `{p⁻¹ q p}`: a sphere centered on the real axis.
    pub fn conjugacy_class(&self) -> ConjugacyClass {
        conjugacy_class(self)
    }

    /// The two complex points where the conjugacy class meets the complex plane,
    /// upper representative first.
    pub fn complex_eigenvalues(&self) -> (Complex64, Complex64) {
        let cls = self.conjugacy_class();
        (
            Complex64::new(cls.center, cls.radius),
            Complex64::new(cls.center, -cls.radius),
        )
    }
}

/// Hamilton product.
pub fn quat_mul(p: Quaternion, q: Quaternion) -> Quaternion {
    Quaternion::new(
        p.a * q.a - p.b * q.b - p.c * q.c - p.d * q.d,
        p.a * q.b + p.b * q.a + p.c * q.d - p.d * q.c,
        p.a * q.c - p.b * q.d + p.c * q.a + p.d * q.b,
        p.a * q.d + p.b * q.c - p.c * q.b + p.d * q.a,
    )
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: Quaternion) -> Quaternion {
        quat_mul(self, rhs)
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: f64) -> Quaternion {
        self.scale(rhs)
    }
}

impl Div<f64> for Quaternion {
    type Output = Quaternion;
    fn div(self, rhs: f64) -> Quaternion {
        self.scale(1.0 / rhs)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.a + r.a, self.b + r.b, self.c + r.c, self.d + r.d)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, r: Quaternion) {
        *self = *self + r;
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.a - r.a, self.b - r.b, self.c - r.c, self.d - r.d)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        self.scale(-1.0)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}i + {}j + {}k", self.a, self.b, self.c, self.d)
    }
}

/// Sphere `S(center, radius)` of quaternions conjugate to a given one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugacyClass {
    pub center: f64,
    pub radius: f64,
}

impl ConjugacyClass {
    /// A zero radius class is a single real point.
    pub fn is_real_point(&self) -> bool {
        self.radius == 0.0
    }
}

pub fn conjugacy_class(q: &Quaternion) -> ConjugacyClass {
    ConjugacyClass {
        center: q.a,
        radius: (q.b * q.b + q.c * q.c + q.d * q.d).sqrt(),
    }
}

/// Dense `N×N` quaternionic matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuaternionMatrix {
    n: usize,
    entries: Vec<Quaternion>,
}

impl QuaternionMatrix {
    pub fn zeros(n: usize) -> Self {
        QuaternionMatrix {
            n,
            entries: vec![Quaternion::ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Quaternion::ONE;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        QuaternionMatrix { n, entries }
    }

    pub fn from_rows(n: usize, entries: Vec<Quaternion>) -> Self {
        assert_eq!(entries.len(), n * n, "entry count must be n*n");
        QuaternionMatrix { n, entries }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Quaternion] {
        &self.entries
    }

    pub fn scale(&self, s: f64) -> Self {
        QuaternionMatrix {
            n: self.n,
            entries: self.entries.iter().map(|q| q.scale(s)).collect(),
        }
    }

    pub fn mul(&self, rhs: &QuaternionMatrix) -> QuaternionMatrix {
        assert_eq!(self.n, rhs.n, "size mismatch");
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self[(i, k)];
                for j in 0..n {
                    out.entries[i * n + j] += aik * rhs[(k, j)];
                }
            }
        }
        out
    }

    /// Quaternionic conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    /// Leading `m×m` principal block.
    pub fn leading_minor(&self, m: usize) -> Self {
        assert!(m <= self.n);
        Self::from_fn(m, |i, j| self[(i, j)])
    }

    pub fn max_abs_diff(&self, other: &QuaternionMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(p, q)| (*p - *q).norm())
            .fold(0.0, f64::max)
    }

    /// `2N×2N` complex matrix made of the 2×2 blocks of the entries.
    pub fn embed(&self) -> ComplexMatrix {
        let n = self.n;
        let mut m = ComplexMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let blk = self[(i, j)].to_block();
                m[(2 * i, 2 * j)] = blk[0][0];
                m[(2 * i, 2 * j + 1)] = blk[0][1];
                m[(2 * i + 1, 2 * j)] = blk[1][0];
                m[(2 * i + 1, 2 * j + 1)] = blk[1][1];
            }
        }
        m
    }

    /// Orthonormalizes the columns by Gram–Schmidt in the right `H`-module
    /// `H^N`, returning a quaternionic unitary matrix.
    pub fn gram_schmidt(&self) -> Result<QuaternionMatrix, QuatError> {
        let n = self.n;
        let mut cols: Vec<Vec<Quaternion>> = (0..n)
            .map(|j| (0..n).map(|i| self[(i, j)]).collect())
            .collect();
        for j in 0..n {
            let original = cols[j].iter().map(Quaternion::norm_sqr).sum::<f64>().sqrt();
            // two passes keep the basis orthonormal to working precision
            for _ in 0..2 {
                for k in 0..j {
                    let proj = inner(&cols[k], &cols[j]);
                    let (done, rest) = cols.split_at_mut(j);
                    for (x, q) in rest[0].iter_mut().zip(&done[k]) {
                        *x = *x - *q * proj;
                    }
                }
            }
            let norm = cols[j].iter().map(Quaternion::norm_sqr).sum::<f64>().sqrt();
            if !(norm > 1e-12 * original) {
                return Err(QuatError::RankDeficient);
            }
            for x in cols[j].iter_mut() {
                *x = x.scale(1.0 / norm);
            }
        }
        Ok(Self::from_fn(n, |i, j| cols[j][i]))
    }
}

/// `<x, y> = Σ conj(x_i) y_i`, sesquilinear on the left.
fn inner(x: &[Quaternion], y: &[Quaternion]) -> Quaternion {
    x.iter()
        .zip(y)
        .fold(Quaternion::ZERO, |acc, (p, q)| acc + p.conj() * *q)
}

impl std::ops::Index<(usize, usize)> for QuaternionMatrix {
    type Output = Quaternion;
    fn index(&self, (i, j): (usize, usize)) -> &Quaternion {
        &self.entries[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QuaternionMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Quaternion {
        &mut self.entries[i * self.n + j]
    }
}

/// Structure tolerance `1e-10 · (max|M_ij| + 1)`.
pub fn structure_tolerance(m: &ComplexMatrix) -> f64 {
    1e-10 * (m.max_abs() + 1.0)
}

/// Largest entrywise deviation of `J conj(M) J⁻¹` from `M`, with `J` the
/// block-diagonal matrix of copies of `[[0, 1], [-1, 0]]`.
pub fn structure_deviation(m: &ComplexMatrix) -> Result<f64, QuatError> {
    let (r, c) = (m.rows(), m.cols());
    if r != c || r % 2 != 0 {
        return Err(QuatError::BadShape { rows: r, cols: c });
    }
    let mut dev: f64 = 0.0;
    for bi in 0..r / 2 {
        for bj in 0..c / 2 {
            let p = m[(2 * bi, 2 * bj)];
            let q = m[(2 * bi, 2 * bj + 1)];
            let rr = m[(2 * bi + 1, 2 * bj)];
            let s = m[(2 * bi + 1, 2 * bj + 1)];
            // J conj(B) J^{-1} = [[conj s, -conj r], [-conj q, conj p]]
            dev = dev
                .max((s.conj() - p).norm())
                .max((-rr.conj() - q).norm())
                .max((-q.conj() - rr).norm())
                .max((p.conj() - s).norm());
        }
    }
    Ok(dev)
}

pub fn is_quaternionic(m: &ComplexMatrix) -> bool {
    matches!(structure_deviation(m), Ok(d) if d <= structure_tolerance(m))
}

/// Inverse of [`QuaternionMatrix::embed`] on structured matrices.
pub fn extract_quaternionic(m: &ComplexMatrix) -> Result<QuaternionMatrix, QuatError> {
    let deviation = structure_deviation(m)?;
    let tolerance = structure_tolerance(m);
    if deviation > tolerance {
        return Err(QuatError::StructureViolation {
            deviation,
            tolerance,
        });
    }
    let n = m.rows() / 2;
    Ok(QuaternionMatrix::from_fn(n, |i, j| {
        let p = m[(2 * i, 2 * j)];
        let q = m[(2 * i, 2 * j + 1)];
        let r = m[(2 * i + 1, 2 * j)];
        let s = m[(2 * i + 1, 2 * j + 1)];
        Quaternion::from_complex_pair((p + s.conj()) * 0.5, (q - r.conj()) * 0.5)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_quat(rng: &mut impl Rng) -> Quaternion {
        Quaternion::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
    }

    fn close(p: Quaternion, q: Quaternion, tol: f64) -> bool {
        (p - q).norm() <= tol
    }

    #[test]
    fn relation_table() {
        let (i, j, k) = (Quaternion::I, Quaternion::J, Quaternion::K);
        let m1 = Quaternion::real(-1.0);
        assert_eq!(i * i, m1);
        assert_eq!(j * j, m1);
        assert_eq!(k * k, m1);
        assert_eq!(i * j, k);
        assert_eq!(j * i, -k);
        assert_eq!(j * k, i);
        assert_eq!(k * j, -i);
        assert_eq!(k * i, j);
        assert_eq!(i * k, -j);
    }

    #[test]
    fn identity_and_expansion() {
        let q = Quaternion::new(2.0, 3.0, -1.0, 0.5);
        assert_eq!(q * Quaternion::ONE, q);
        // (1+i)(1+j) = 1 + j + i + ij = 1 + i + j + k
        let p = Quaternion::new(1.0, 1.0, 0.0, 0.0) * Quaternion::new(1.0, 0.0, 1.0, 0.0);
        assert_eq!(p, Quaternion::new(1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn conjugacy_examples() {
        let c = Quaternion::real(3.0).conjugacy_class();
        assert_eq!((c.center, c.radius), (3.0, 0.0));
        assert!(c.is_real_point());
        let c = Quaternion::new(1.0, 2.0, 2.0, 1.0).conjugacy_class();
        assert_eq!((c.center, c.radius), (1.0, 3.0));
        let c = Quaternion::I.conjugacy_class();
        assert_eq!((c.center, c.radius), (0.0, 1.0));
        assert!(!c.is_real_point());
    }

    #[test]
    fn conjugation_preserves_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let lam = rand_quat(&mut rng);
            let q = rand_quat(&mut rng);
            let q = q.scale(1.0 / q.norm());
            let moved = q.inverse().unwrap() * lam * q;
            let (c0, c1) = (lam.conjugacy_class(), moved.conjugacy_class());
            assert!((c0.center - c1.center).abs() < 1e-12);
            assert!((c0.radius - c1.radius).abs() < 1e-12);
        }
    }

    #[test]
    fn embed_scalars() {
        let one = QuaternionMatrix::identity(1).embed();
        assert_eq!(one, ComplexMatrix::identity(2));
        let j = QuaternionMatrix::from_rows(1, vec![Quaternion::J]).embed();
        let c = |x: f64| Complex64::new(x, 0.0);
        assert_eq!(j[(0, 0)], c(0.0));
        assert_eq!(j[(0, 1)], c(1.0));
        assert_eq!(j[(1, 0)], c(-1.0));
        assert_eq!(j[(1, 1)], c(0.0));
    }

    #[test]
    fn embed_is_ring_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &n in &[1usize, 2, 4] {
            for _ in 0..100 {
                let a = QuaternionMatrix::from_fn(n, |_, _| rand_quat(&mut rng));
                let b = QuaternionMatrix::from_fn(n, |_, _| rand_quat(&mut rng));
                let lhs = a.mul(&b).embed();
                let rhs = a.embed().matmul(&b.embed());
                assert!(lhs.max_abs_diff(&rhs) < 1e-13);
                let sum = QuaternionMatrix::from_fn(n, |i, j| a[(i, j)] + b[(i, j)]).embed();
                assert!(sum.max_abs_diff(&a.embed().add(&b.embed())) < 1e-15);
            }
        }
    }

    #[test]
    fn extract_round_trip_and_violation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let q = QuaternionMatrix::from_fn(3, |_, _| rand_quat(&mut rng));
        let back = extract_quaternionic(&q.embed()).unwrap();
        assert!(back.max_abs_diff(&q) < 1e-15);
        let id = extract_quaternionic(&ComplexMatrix::identity(6)).unwrap();
        assert_eq!(id, QuaternionMatrix::identity(3));

        let one = Complex64::new(1.0, 0.0);
        let bad = ComplexMatrix::from_rows(2, 2, vec![one, one, one, one]);
        assert!(matches!(
            extract_quaternionic(&bad),
            Err(QuatError::StructureViolation { .. })
        ));
    }

    #[test]
    fn gram_schmidt_gives_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = QuaternionMatrix::from_fn(4, |_, _| rand_quat(&mut rng));
        let u = g.gram_schmidt().unwrap();
        let prod = u.adjoint().mul(&u);
        assert!(prod.max_abs_diff(&QuaternionMatrix::identity(4)) < 1e-13);
        let e = u.embed();
        let ee = e.adjoint().matmul(&e);
        assert!(ee.max_abs_diff(&ComplexMatrix::identity(8)) < 1e-13);
    }

    #[test]
    fn gram_schmidt_rejects_dependent_columns() {
        let m = QuaternionMatrix::from_rows(
            2,
            vec![
                Quaternion::ONE,
                Quaternion::ONE,
                Quaternion::I,
                Quaternion::I,
            ],
        );
        assert_eq!(m.gram_schmidt(), Err(QuatError::RankDeficient));
    }

    proptest::proptest! {
        #[test]
        fn norm_is_multiplicative(a in -5.0..5.0f64, b in -5.0..5.0f64, c in -5.0..5.0f64, d in -5.0..5.0f64,
                                  e in -5.0..5.0f64, f in -5.0..5.0f64, g in -5.0..5.0f64, h in -5.0..5.0f64) {
            let p = Quaternion::new(a, b, c, d);
            let q = Quaternion::new(e, f, g, h);
            let lhs = (p * q).norm();
            let rhs = p.norm() * q.norm();
            proptest::prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        }

        #[test]
        fn multiplication_is_associative(a in -3.0..3.0f64, b in -3.0..3.0f64, c in -3.0..3.0f64) {
            let p = Quaternion::new(a, b, c, a * b);
            let q = Quaternion::new(b, c, a, -c);
            let r = Quaternion::new(c, -a, b, 1.0);
            proptest::prop_assert!(close((p * q) * r, p * (q * r), 1e-10));
        }
    }
}
