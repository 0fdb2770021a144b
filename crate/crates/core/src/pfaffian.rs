//! Pfaffians, Gaussian moment matrices and the De Bruijn identity.
//!
//! Convention: `Pf A = 1/(2ⁿ n!) Σ_σ sgn σ Π A[σ(2i-1), σ(2i)]`, so that
//! `Pf [[0, a], [-a, 0]] = a`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use statrs::function::factorial::{factorial, ln_factorial};
use thiserror::Error;

use crate::linalg::ComplexMatrix;

/// Skewness tolerance, relative to `max(1, max|a_ij|)`.
pub const TAU_SKEW: f64 = 1e-12;
/// Largest size accepted by the permutation-sum oracles.
pub const NAIVE_MAX: usize = 8;
/// Largest `p` with `p!` finite in double precision.
pub const FACTORIAL_MAX: u32 = 170;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PfaffianError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("odd size {n}")]
    OddSize { n: usize },
    #[error("matrix is not skew-symmetric (deviation {deviation:.3e})")]
    NotSkew { deviation: f64 },
    #[error("size {n} exceeds the brute-force limit {max}")]
    SizeTooLarge { n: usize, max: usize },
    #[error("{p}! overflows double precision")]
    Overflow { p: u32 },
    #[error(
        "g is not conjugation symmetric: coefficients of z^{p} zbar^{q} and z^{q} zbar^{p} differ"
    )]
    AsymmetricG { p: u32, q: u32 },
    #[error("expected {expected} functions, got {got}")]
    BadCount { expected: usize, got: usize },
}

/// Even-size, exactly skew-symmetric complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix(ComplexMatrix);

impl SkewMatrix {
    /// Accepts `a` if it is skew within tolerance, then antisymmetrizes.
    pub fn new(a: ComplexMatrix) -> Result<Self, PfaffianError> {
        check_shape(&a)?;
        let deviation = a.add(&a.transpose()).max_abs();
        let tol = TAU_SKEW * a.max_abs().max(1.0);
        if deviation > tol {
            return Err(PfaffianError::NotSkew { deviation });
        }
        Ok(Self::antisymmetrize(&a)?)
    }

    /// `(A - Aᵀ)/2`, which has the same Pfaffian as `A`.
    pub fn antisymmetrize(a: &ComplexMatrix) -> Result<Self, PfaffianError> {
        check_shape(a)?;
        let n = a.rows();
        Ok(SkewMatrix(ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                ZERO
            } else {
                (a[(i, j)] - a[(j, i)]) * 0.5
            }
        })))
    }

    /// Builds from the strict upper triangle, listed row by row.
    pub fn from_upper(n: usize, upper: &[Complex64]) -> Result<Self, PfaffianError> {
        if n % 2 == 1 {
            return Err(PfaffianError::OddSize { n });
        }
        assert_eq!(
            upper.len(),
            n * (n.saturating_sub(1)) / 2,
            "upper triangle length"
        );
        let mut m = ComplexMatrix::zeros(n, n);
        let mut it = upper.iter();
        for i in 0..n {
            for j in i + 1..n {
                let v = *it.next().unwrap();
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        Ok(SkewMatrix(m))
    }

    pub fn size(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.0
    }
}

fn check_shape(a: &ComplexMatrix) -> Result<(), PfaffianError> {
    if !a.is_square() {
        return Err(PfaffianError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if a.rows() % 2 == 1 {
        return Err(PfaffianError::OddSize { n: a.rows() });
    }
    Ok(())
}

/// Calls `f(perm, sign)` for every permutation of `0..n` (Heap's algorithm).
pub(crate) fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize], f64)) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut sign = 1.0;
    f(&perm, sign);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            sign = -sign;
            f(&perm, sign);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Definition-level permutation sum. Only for sizes up to 8.
pub fn pfaffian_naive(a: &SkewMatrix) -> Result<Complex64, PfaffianError> {
    let n2 = a.size();
    if n2 > NAIVE_MAX {
        return Err(PfaffianError::SizeTooLarge {
            n: n2,
            max: NAIVE_MAX,
        });
    }
    let n = n2 / 2;
    let m = a.as_matrix();
    let mut sum = ZERO;
    for_each_permutation(n2, |perm, sign| {
        let mut prod = Complex64::new(sign, 0.0);
        for i in 0..n {
            prod *= m[(perm[2 * i], perm[2 * i + 1])];
        }
        sum += prod;
    });
    let norm = 2f64.powi(n as i32) * factorial(n as u64);
    Ok(sum / norm)
}

/// Pivots of the skew Gauss elimination. `None` means the Pfaffian is zero.
fn eliminate(a: &SkewMatrix) -> Option<(Vec<Complex64>, f64)> {
    let n = a.size();
    let mut m = a.as_matrix().clone();
    let mut pivots = Vec::with_capacity(n / 2);
    let mut sign = 1.0;
    for k in (0..n).step_by(2) {
        // largest entry in row k to the right of the diagonal
        let (p, best) = (k + 1..n)
            .map(|j| (j, m[(k, j)].norm()))
            .fold((k + 1, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == 0.0 {
            return None;
        }
        if p != k + 1 {
            swap_sym(&mut m, k + 1, p);
            sign = -sign;
        }
        let alpha = m[(k, k + 1)];
        pivots.push(alpha);
        if k + 2 >= n {
            break;
        }
        let tau: Vec<Complex64> = (k + 2..n).map(|j| m[(k, j)] / alpha).collect();
        let row: Vec<Complex64> = (k + 2..n).map(|j| m[(k + 1, j)]).collect();
        // A[i,j] -= t_j A[i,k+1] + t_i A[k+1,j] on the trailing block
        for (ii, i) in (k + 2..n).enumerate() {
            let col_i = m[(i, k + 1)];
            for (jj, j) in (k + 2..n).enumerate() {
                let upd = tau[jj] * col_i + tau[ii] * row[jj];
                m[(i, j)] -= upd;
            }
        }
    }
    Some((pivots, sign))
}

fn swap_sym(m: &mut ComplexMatrix, a: usize, b: usize) {
    let n = m.rows();
    for j in 0..n {
        let t = m[(a, j)];
        m[(a, j)] = m[(b, j)];
        m[(b, j)] = t;
    }
    for i in 0..n {
        let t = m[(i, a)];
        m[(i, a)] = m[(i, b)];
        m[(i, b)] = t;
    }
}

/// Pfaffian by pivoted skew elimination: `O(n³)`.
pub fn pfaffian(a: &SkewMatrix) -> Complex64 {
    match eliminate(a) {
        None => ZERO,
        Some((pivots, sign)) => pivots
            .into_iter()
            .fold(Complex64::new(sign, 0.0), |acc, p| acc * p),
    }
}

/// Convenience wrapper accepting a raw matrix.
pub fn pfaffian_of(a: &ComplexMatrix) -> Result<Complex64, PfaffianError> {
    Ok(pfaffian(&SkewMatrix::new(a.clone())?))
}

/// `phase · exp(log_abs)`; a zero value has `log_abs = -∞` and zero phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogScalar {
    pub log_abs: f64,
    pub phase: Complex64,
}

impl LogScalar {
    pub fn zero() -> Self {
        LogScalar {
            log_abs: f64::NEG_INFINITY,
            phase: ZERO,
        }
    }

    pub fn value(&self) -> Complex64 {
        self.phase * self.log_abs.exp()
    }
}

pub fn log_pfaffian(a: &SkewMatrix) -> LogScalar {
    match eliminate(a) {
        None => LogScalar::zero(),
        Some((pivots, sign)) => {
            let mut log_abs = 0.0;
            let mut phase = Complex64::new(sign, 0.0);
            for p in pivots {
                let r = p.norm();
                log_abs += r.ln();
                phase *= p / r;
            }
            LogScalar { log_abs, phase }
        }
    }
}

/// `∫ z^p conj(z)^q dμ(z) = δ_pq p!` for the standard complex Gaussian `μ`.
pub fn gaussian_mixed_moment(p: u32, q: u32) -> Result<f64, PfaffianError> {
    if p != q {
        return Ok(0.0);
    }
    if p > FACTORIAL_MAX {
        return Err(PfaffianError::Overflow { p });
    }
    Ok(factorial(p as u64))
}

/// Polynomial `Σ c_pq z^p conj(z)^q`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ZZbarPoly {
    terms: BTreeMap<(u32, u32), Complex64>,
}

impl ZZbarPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, 0, ONE)
    }

    pub fn monomial(p: u32, q: u32, coef: Complex64) -> Self {
        let mut poly = Self::zero();
        poly.add_term(p, q, coef);
        poly
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (u32, u32, Complex64)>) -> Self {
        let mut poly = Self::zero();
        for (p, q, c) in terms {
            poly.add_term(p, q, c);
        }
        poly
    }

    /// `Σ c_k t^k` in the radial variable `t = |z|²`.
    pub fn radial(coeffs: &[f64]) -> Self {
        Self::from_terms(
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| (k as u32, k as u32, Complex64::new(c, 0.0))),
        )
    }

    pub fn z() -> Self {
        Self::monomial(1, 0, ONE)
    }

    pub fn zbar() -> Self {
        Self::monomial(0, 1, ONE)
    }

    fn add_term(&mut self, p: u32, q: u32, c: Complex64) {
        if c == ZERO {
            return;
        }
        let e = self.terms.entry((p, q)).or_insert(ZERO);
        *e += c;
        if *e == ZERO {
            self.terms.remove(&(p, q));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, Complex64)> + '_ {
        self.terms.iter().map(|(&(p, q), &c)| (p, q, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest `max(p, q)` over the terms.
    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|&(p, q)| p.max(q)).max().unwrap_or(0)
    }

    pub fn add(&self, other: &ZZbarPoly) -> ZZbarPoly {
        let mut out = self.clone();
        for (p, q, c) in other.terms() {
            out.add_term(p, q, c);
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> ZZbarPoly {
        Self::from_terms(self.terms().map(|(p, q, c)| (p, q, c * s)))
    }

    pub fn mul(&self, other: &ZZbarPoly) -> ZZbarPoly {
        let mut out = Self::zero();
        for (p1, q1, c1) in self.terms() {
            for (p2, q2, c2) in other.terms() {
                out.add_term(p1 + p2, q1 + q2, c1 * c2);
            }
        }
        out
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.terms()
            .map(|(p, q, c)| c * z.powu(p) * z.conj().powu(q))
            .sum()
    }

    /// `∫ self dμ` against the standard complex Gaussian.
    pub fn integrate_gaussian(&self) -> Result<Complex64, PfaffianError> {
        let mut s = ZERO;
        for (p, q, c) in self.terms() {
            s += c * gaussian_mixed_moment(p, q)?;
        }
        Ok(s)
    }

    /// `g(conj z) = g(z)` identically, i.e. `c_pq = c_qp`.
    pub fn check_conjugation_symmetric(&self) -> Result<(), PfaffianError> {
        for (p, q, c) in self.terms() {
            let other = self.terms.get(&(q, p)).copied().unwrap_or(ZERO);
            if (c - other).norm() > 1e-12 * (1.0 + c.norm()) {
                return Err(PfaffianError::AsymmetricG { p, q });
            }
        }
        Ok(())
    }
}

/// `f_ij = ∫ (z^i conj(z)^(j-1) - z^(i-1) conj(z)^j) g dμ`, `i, j = 1..2N`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrix {
    pub n: usize,
    pub f: SkewMatrix,
}

fn check_moment_input(g: &ZZbarPoly, n: usize) -> Result<(), PfaffianError> {
    g.check_conjugation_symmetric()?;
    if n == 0 {
        return Err(PfaffianError::BadCount {
            expected: 1,
            got: 0,
        });
    }
    Ok(())
}

pub fn moment_matrix(g: &ZZbarPoly, n: usize) -> Result<MomentMatrix, PfaffianError> {
    check_moment_input(g, n)?;
    let top = 2 * n as u32 + g.max_degree();
    if top > FACTORIAL_MAX {
        return Err(PfaffianError::Overflow { p: top });
    }
    let size = 2 * n;
    let mut m = ComplexMatrix::zeros(size, size);
    for i in 1..=size as u32 {
        for j in 1..=size as u32 {
            let mut s = ZERO;
            for (p, q, c) in g.terms() {
                let plus = gaussian_mixed_moment(i + p, j - 1 + q)?;
                let minus = gaussian_mixed_moment(i - 1 + p, j + q)?;
                s += c * (plus - minus);
            }
            m[(i as usize - 1, j as usize - 1)] = s;
        }
    }
    Ok(MomentMatrix {
        n,
        f: SkewMatrix::new(m)?,
    })
}

/// The moment matrix rescaled as `f_ij / (s_i s_j)` with `s_i = sqrt((i+d)!)`,
/// returned together with `Σ ln s_i`. Entries stay O(1) for any `N`.
pub fn scaled_moment_matrix(g: &ZZbarPoly, n: usize) -> Result<(SkewMatrix, f64), PfaffianError> {
    check_moment_input(g, n)?;
    let d = g.max_degree() as u64;
    let size = 2 * n;
    let ln_s: Vec<f64> = (1..=size as u64)
        .map(|i| 0.5 * ln_factorial(i + d))
        .collect();
    let mut m = ComplexMatrix::zeros(size, size);
    for i in 1..=size as u64 {
        for j in 1..=size as u64 {
            let scale = ln_s[i as usize - 1] + ln_s[j as usize - 1];
            let mut s = ZERO;
            for (p, q, c) in g.terms() {
                let (p, q) = (p as u64, q as u64);
                if i + p == j - 1 + q {
                    s += c * (ln_factorial(i + p) - scale).exp();
                }
                if i - 1 + p == j + q {
                    s -= c * (ln_factorial(i - 1 + p) - scale).exp();
                }
            }
            m[(i as usize - 1, j as usize - 1)] = s;
        }
    }
    Ok((SkewMatrix::antisymmetrize(&m)?, ln_s.iter().sum()))
}

/// `ln Π_{i=1}^N (2i-1)!`.
fn ln_odd_factorials(n: usize) -> f64 {
    (1..=n as u64).map(|i| ln_factorial(2 * i - 1)).sum()
}

/// `E Π g(λ_k) = Pf(f) / Π (2i-1)!` over unscaled quaternionic Ginibre eigenvalues.
pub fn product_statistic(g: &ZZbarPoly, n: usize) -> Result<Complex64, PfaffianError> {
    if 2 * n as u32 + g.max_degree() <= FACTORIAL_MAX {
        let m = moment_matrix(g, n)?;
        let pf = pfaffian(&m.f);
        let denom: f64 = (1..=n as u64).map(|i| factorial(2 * i - 1)).product();
        let v = pf / denom;
        if v.re.is_finite() && v.im.is_finite() && denom.is_finite() {
            return Ok(v);
        }
    }
    Ok(product_statistic_log(g, n)?.value())
}

/// Log-scale variant of [`product_statistic`] for large `N`.
pub fn product_statistic_log(g: &ZZbarPoly, n: usize) -> Result<LogScalar, PfaffianError> {
    let (scaled, ln_scale) = scaled_moment_matrix(g, n)?;
    let lp = log_pfaffian(&scaled);
    if lp.phase == ZERO {
        return Ok(lp);
    }
    Ok(LogScalar {
        log_abs: lp.log_abs + ln_scale - ln_odd_factorials(n),
        phase: lp.phase,
    })
}

/// `F_ij = ∫ φ_i ψ_j w dμ`.
pub fn pair_integral_matrix(
    phis: &[ZZbarPoly],
    psis: &[ZZbarPoly],
    weight: &ZZbarPoly,
) -> Result<ComplexMatrix, PfaffianError> {
    check_system(phis, psis)?;
    let n = phis.len();
    let mut f = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let pw = phis[i].mul(weight);
        for j in 0..n {
            f[(i, j)] = pw.mul(&psis[j]).integrate_gaussian()?;
        }
    }
    Ok(f)
}

fn check_system(phis: &[ZZbarPoly], psis: &[ZZbarPoly]) -> Result<(), PfaffianError> {
    if phis.len() != psis.len() {
        return Err(PfaffianError::BadCount {
            expected: phis.len(),
            got: psis.len(),
        });
    }
    if phis.len() % 2 == 1 {
        return Err(PfaffianError::OddSize { n: phis.len() });
    }
    Ok(())
}

/// Right side of the De Bruijn identity: `N! 2^N Pf(F)`, with `Pf(F)` taken
/// as `Pf((F - Fᵀ)/2)` since `F` need not be skew.
pub fn debruijn_rhs(
    phis: &[ZZbarPoly],
    psis: &[ZZbarPoly],
    weight: &ZZbarPoly,
) -> Result<Complex64, PfaffianError> {
    let f = pair_integral_matrix(phis, psis, weight)?;
    let n = phis.len() / 2;
    let pf = pfaffian(&SkewMatrix::antisymmetrize(&f)?);
    Ok(pf * factorial(n as u64) * 2f64.powi(n as i32))
}

/// Left side of the De Bruijn identity, `∫ det(...) dν^N`, by expanding the
/// `2N×2N` determinant over all permutations and integrating each product of
/// polynomials exactly. Columns are ordered `φ(λ_1), ψ(λ_1), φ(λ_2), ψ(λ_2), …`.
pub fn debruijn_lhs_bruteforce(
    phis: &[ZZbarPoly],
    psis: &[ZZbarPoly],
    weight: &ZZbarPoly,
) -> Result<Complex64, PfaffianError> {
    check_system(phis, psis)?;
    let n2 = phis.len();
    if n2 > 6 {
        return Err(PfaffianError::SizeTooLarge { n: n2, max: 6 });
    }
    let n = n2 / 2;
    let mut total = ZERO;
    let mut err = None;
    for_each_permutation(n2, |perm, sign| {
        if err.is_some() {
            return;
        }
        // perm[c] is the row placed in column c
        let mut term = Complex64::new(sign, 0.0);
        for j in 0..n {
            let integrand = phis[perm[2 * j]].mul(&psis[perm[2 * j + 1]]).mul(weight);
            match integrand.integrate_gaussian() {
                Ok(v) => term *= v,
                Err(e) => err = Some(e),
            }
        }
        total += term;
    });
    match err {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::determinant;
    use crate::rng::{complex_normal, trial_rng};
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_skew(n: usize, seed: u64) -> SkewMatrix {
        let mut rng = trial_rng(seed, 0, 0);
        let upper: Vec<Complex64> = (0..n * (n - 1) / 2)
            .map(|_| complex_normal(&mut rng))
            .collect();
        SkewMatrix::from_upper(n, &upper).unwrap()
    }

    #[test]
    fn two_by_two() {
        let a = SkewMatrix::from_upper(2, &[Complex64::new(3.0, -1.0)]).unwrap();
        assert_eq!(pfaffian_naive(&a).unwrap(), Complex64::new(3.0, -1.0));
        assert_eq!(pfaffian(&a), Complex64::new(3.0, -1.0));
    }

    #[test]
    fn four_by_four_expansion() {
        let v = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0];
        let a = SkewMatrix::from_upper(4, &v.map(c)).unwrap();
        // a12 a34 - a13 a24 + a14 a23
        let expect = 2.0 * 13.0 - 3.0 * 11.0 + 5.0 * 7.0;
        assert!((pfaffian_naive(&a).unwrap().re - expect).abs() < 1e-12);
        assert!((pfaffian(&a).re - expect).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix() {
        let z = SkewMatrix::new(ComplexMatrix::zeros(6, 6)).unwrap();
        assert_eq!(pfaffian(&z), ZERO);
        assert_eq!(pfaffian_naive(&z).unwrap(), ZERO);
    }

    #[test]
    fn tridiagonal() {
        let b = [2.0, 3.0, 5.0, 7.0, 11.0];
        let mut m = ComplexMatrix::zeros(6, 6);
        for (i, &x) in b.iter().enumerate() {
            m[(i, i + 1)] = c(x);
            m[(i + 1, i)] = c(-x);
        }
        let pf = pfaffian_of(&m).unwrap();
        assert!((pf.re - 2.0 * 5.0 * 11.0).abs() < 1e-12);
    }

    #[test]
    fn block_form() {
        let mut rng = trial_rng(5, 0, 0);
        for n in 1..=4 {
            let mm = ComplexMatrix::from_fn(n, n, |_, _| complex_normal(&mut rng));
            let a = ComplexMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
                (true, false) => mm[(i, j - n)],
                (false, true) => -mm[(j, i - n)],
                _ => ZERO,
            });
            let sign = if (n * (n - 1) / 2) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            let expect = determinant(&mm).unwrap() * sign;
            assert!((pfaffian_of(&a).unwrap() - expect).norm() < 1e-12 * (1.0 + expect.norm()));
        }
    }

    #[test]
    fn elimination_matches_naive() {
        for n in [2, 4, 6, 8] {
            for seed in 0..20 {
                let a = random_skew(n, seed);
                let naive = pfaffian_naive(&a).unwrap();
                let fast = pfaffian(&a);
                assert!((naive - fast).norm() <= 1e-11 * naive.norm(), "n={n}");
            }
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(
            SkewMatrix::new(ComplexMatrix::zeros(3, 3)),
            Err(PfaffianError::OddSize { n: 3 })
        ));
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0);
        assert!(matches!(
            SkewMatrix::new(m),
            Err(PfaffianError::NotSkew { .. })
        ));
        assert!(matches!(
            pfaffian_naive(&random_skew(10, 1)),
            Err(PfaffianError::SizeTooLarge { .. })
        ));
        assert!(matches!(
            gaussian_mixed_moment(171, 171),
            Err(PfaffianError::Overflow { p: 171 })
        ));
        let g = ZZbarPoly::monomial(2, 1, ONE);
        assert!(matches!(
            moment_matrix(&g, 2),
            Err(PfaffianError::AsymmetricG { .. })
        ));
    }

    #[test]
    fn mixed_moments() {
        assert_eq!(gaussian_mixed_moment(0, 0).unwrap(), 1.0);
        assert_eq!(gaussian_mixed_moment(3, 3).unwrap(), 6.0);
        assert_eq!(gaussian_mixed_moment(2, 5).unwrap(), 0.0);
    }

    #[test]
    fn moment_matrix_examples() {
        let m = moment_matrix(&ZZbarPoly::one(), 1).unwrap();
        assert_eq!(m.f.as_matrix()[(0, 1)], ONE);
        assert!((product_statistic(&ZZbarPoly::one(), 1).unwrap() - ONE).norm() < 1e-15);
        let t = ZZbarPoly::radial(&[0.0, 1.0]);
        assert!((product_statistic(&t, 1).unwrap().re - 2.0).abs() < 1e-14);
        for n in 1..=3 {
            assert!((product_statistic(&ZZbarPoly::one(), n).unwrap() - ONE).norm() < 1e-12);
        }
        assert!((product_statistic(&t, 2).unwrap().re - 8.0).abs() < 1e-12);
        let g = ZZbarPoly::radial(&[1.0, 1.0]);
        assert!((product_statistic(&g, 2).unwrap().re - 15.0).abs() < 1e-12);
    }

    #[test]
    fn log_space_agrees_and_extends() {
        let g = ZZbarPoly::radial(&[1.0, 0.5, 0.25]);
        for n in 1..=6 {
            let direct = product_statistic(&g, n).unwrap();
            let logged = product_statistic_log(&g, n).unwrap().value();
            assert!((direct - logged).norm() < 1e-11 * direct.norm());
        }
        // E Π (1 + γ_2i) grows like Π (2i+1); still representable in log space at N = 40
        let big = product_statistic_log(&ZZbarPoly::radial(&[1.0, 1.0]), 40).unwrap();
        let expect: f64 = (1..=40).map(|i| ((2 * i + 1) as f64).ln()).sum();
        assert!((big.log_abs - expect).abs() < 1e-9 * expect);
        assert!((big.phase - ONE).norm() < 1e-12);
    }

    #[test]
    fn debruijn_small() {
        // N = 1, φ = (1, z), ψ = (1, conj z)
        let phis = [ZZbarPoly::one(), ZZbarPoly::z()];
        let psis = [ZZbarPoly::one(), ZZbarPoly::zbar()];
        let w = ZZbarPoly::one();
        let lhs = debruijn_lhs_bruteforce(&phis, &psis, &w).unwrap();
        let rhs = debruijn_rhs(&phis, &psis, &w).unwrap();
        assert!((lhs - rhs).norm() < 1e-14);
        assert_eq!(lhs, ZERO);
        // det [[1, |z|²], [|z|², 1]] = 1 - |z|⁴ integrates to -1
        let t = ZZbarPoly::radial(&[0.0, 1.0]);
        let phis = [ZZbarPoly::one(), t.clone()];
        let psis2 = [t, ZZbarPoly::one()];
        let lhs = debruijn_lhs_bruteforce(&phis, &psis2, &w).unwrap();
        assert!((lhs - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        assert!((debruijn_rhs(&phis, &psis2, &w).unwrap() - lhs).norm() < 1e-14);
        let zeros = [ZZbarPoly::zero(), ZZbarPoly::zero()];
        assert_eq!(debruijn_lhs_bruteforce(&zeros, &psis, &w).unwrap(), ZERO);
    }

    #[test]
    fn permutation_count_and_sign() {
        let mut count = 0;
        let mut sum = 0.0;
        for_each_permutation(5, |_, s| {
            count += 1;
            sum += s;
        });
        assert_eq!(count, 120);
        assert_eq!(sum, 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn square_is_determinant(half in 1usize..=6, seed in any::<u64>()) {
            let a = random_skew(2 * half, seed);
            let pf = pfaffian(&a);
            let det = determinant(a.as_matrix()).unwrap();
            prop_assert!((pf * pf - det).norm() <= 1e-10 * det.norm().max(1e-300));
        }

        #[test]
        fn congruence(half in 1usize..=4, seed in any::<u64>()) {
            let n = 2 * half;
            let a = random_skew(n, seed);
            let mut rng = trial_rng(seed, 1, 0);
            let b = ComplexMatrix::from_fn(n, n, |_, _| complex_normal(&mut rng));
            let bab = b.matmul(a.as_matrix()).matmul(&b.transpose());
            let lhs = pfaffian(&SkewMatrix::antisymmetrize(&bab).unwrap());
            let rhs = determinant(&b).unwrap() * pfaffian(&a);
            prop_assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
        }
    }
}
