//! Eigenvector-level quantities: Schur-form coefficient chains, angles
//! between eigenvectors, overlap matrices and lack of normality.
//!
//! Eigenvectors of the expanded Schur form `T` are normalized so that the
//! vector attached to diagonal position `p` has entry `p` equal to one. Then
//! the left vector `L_p` is supported on positions `>= p` and the right vector
//! `R_p` on positions `<= p`, and `L_p R_p = 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ensembles::SchurForm;
use crate::linalg::{self, ComplexMatrix, LinalgError};

/// Minimal eigenvalue separation for chains and overlaps.
pub const DELTA_GAP: f64 = 1e-8;
pub const TAU_HERM: f64 = 1e-8;
pub const TAU_ROW: f64 = 1e-8;
pub const TAU_MINSPEC: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("vector length {len} is odd")]
    OddLength { len: usize },
    #[error("eigenvalues closer than the gap threshold ({gap:.3e})")]
    DegenerateSpectrum { gap: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `(u_1, u_2, …) ↦ (-conj u_2, conj u_1, …)` pairwise.
pub fn phi_map(u: &[Complex64]) -> Result<Vec<Complex64>, SpectraError> {
    if u.len() % 2 == 1 {
        return Err(SpectraError::OddLength { len: u.len() });
    }
    Ok(u.chunks(2)
        .flat_map(|p| [-p[1].conj(), p[0].conj()])
        .collect())
}

/// Bilinear product `Σ u_k v_k`.
pub fn dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Smallest `|λ_i - λ_j|`, `|λ_i - conj λ_j|` over `i ≠ j`.
pub fn spectral_gap(lambdas: &[Complex64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..lambdas.len() {
        for j in 0..lambdas.len() {
            if i != j {
                gap = gap
                    .min((lambdas[i] - lambdas[j]).norm())
                    .min((lambdas[i] - lambdas[j].conj()).norm());
            }
        }
    }
    gap
}

fn check_gap(s: &SchurForm) -> Result<(), SpectraError> {
    let gap = spectral_gap(&s.lambdas);
    if gap < DELTA_GAP {
        return Err(SpectraError::DegenerateSpectrum { gap });
    }
    Ok(())
}

/// Diagonal entry `p` of the expanded form.
fn diag_value(s: &SchurForm, p: usize) -> Complex64 {
    let l = s.lambdas[p / 2];
    if p % 2 == 0 {
        l
    } else {
        l.conj()
    }
}

/// Left eigenvector chain for diagonal position `p`, full length `2N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientChain {
    pub start: usize,
    pub coefficients: Vec<Complex64>,
}

/// Left eigenvector of the expanded form for position `p`, by the two-term
/// recursion over the following blocks: with `ℓ` the entries before block `d`
/// and `t` the part of column `2d` above it,
/// `ℓ_{2d} = ℓ·t / (μ - λ_d)` and `ℓ_{2d+1} = ℓ·Φ(t) / (μ - conj λ_d)`.
pub fn left_chain(s: &SchurForm, p: usize) -> CoefficientChain {
    let n = s.n;
    let mu = diag_value(s, p);
    let mut l = vec![ZERO; 2 * n];
    l[p] = ONE;
    for d in p / 2 + 1..n {
        let col: Vec<Complex64> = (0..d)
            .flat_map(|i| {
                let (u, v) = s.block(i, d);
                [u, -v.conj()]
            })
            .collect();
        // Φ(col) is column 2d+1 of the same rows
        let phi_col = phi_map(&col).unwrap();
        let head = &l[..2 * d];
        let a = dot(head, &col) / (mu - s.lambdas[d]);
        let b = dot(head, &phi_col) / (mu - s.lambdas[d].conj());
        l[2 * d] = a;
        l[2 * d + 1] = b;
    }
    CoefficientChain {
        start: p,
        coefficients: l,
    }
}

/// Right eigenvector for position `p` by back substitution.
pub fn right_vector(s: &SchurForm, p: usize) -> Vec<Complex64> {
    let t = s.expand();
    let mu = diag_value(s, p);
    let mut r = vec![ZERO; 2 * s.n];
    r[p] = ONE;
    for m in (0..p).rev() {
        if m / 2 == p / 2 {
            // partner inside the diagonal block: T[m, p] = 0
            continue;
        }
        let acc: Complex64 = (m + 1..=p).map(|k| t[(m, k)] * r[k]).sum();
        r[m] = -acc / (t[(m, m)] - mu);
    }
    r
}

/// The `b`, `c`, `d`, `e` chains: left vectors of `λ_1`, `conj λ_1`, `λ_2`, `conj λ_2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSet {
    pub b: CoefficientChain,
    pub c: CoefficientChain,
    pub d: Option<CoefficientChain>,
    pub e: Option<CoefficientChain>,
}

pub fn coefficient_chains(s: &SchurForm) -> Result<ChainSet, SpectraError> {
    check_gap(s)?;
    let (d, e) = if s.n >= 2 {
        (Some(left_chain(s, 2)), Some(left_chain(s, 3)))
    } else {
        (None, None)
    };
    Ok(ChainSet {
        b: left_chain(s, 0),
        c: left_chain(s, 1),
        d,
        e,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnglePair {
    /// `(λ_1, λ_2)`
    L1L2,
    /// `(λ_1, conj λ_2)`
    L1L2Bar,
    /// `(conj λ_1, λ_2)`
    L1BarL2,
    /// `(conj λ_1, conj λ_2)`
    L1BarL2Bar,
    /// `(λ_1, conj λ_1)`
    L1L1Bar,
}

impl AnglePair {
    pub const ALL: [AnglePair; 5] = [
        AnglePair::L1L2,
        AnglePair::L1L2Bar,
        AnglePair::L1BarL2,
        AnglePair::L1BarL2Bar,
        AnglePair::L1L1Bar,
    ];

    /// Diagonal positions in the expanded form.
    pub fn positions(self) -> (usize, usize) {
        match self {
            AnglePair::L1L2 => (0, 2),
            AnglePair::L1L2Bar => (0, 3),
            AnglePair::L1BarL2 => (1, 2),
            AnglePair::L1BarL2Bar => (1, 3),
            AnglePair::L1L1Bar => (0, 1),
        }
    }
}

/// `⟨x|y⟩ / (‖x‖ ‖y‖)` with `⟨x|y⟩ = Σ x_k conj(y_k)`.
pub fn normalized_inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    let xy: Complex64 = x.iter().zip(y).map(|(a, b)| a * b.conj()).sum();
    let nx = x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let ny = y.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    xy / (nx * ny)
}

/// Angle between right eigenvectors, from the chains:
/// `arg(λ_1, λ_2) = -conj(b_3) / sqrt(1 + |b_3|² + |c_3|²)` and its analogues.
pub fn angle(s: &SchurForm, which: AnglePair) -> Result<Complex64, SpectraError> {
    if which == AnglePair::L1L1Bar {
        return Ok(ZERO);
    }
    if s.n < 2 {
        return Err(SpectraError::DegenerateSpectrum { gap: 0.0 });
    }
    let chains = coefficient_chains(s)?;
    // entries 2, 3 of the b and c chains
    let (b3, b4) = (chains.b.coefficients[2], chains.b.coefficients[3]);
    let (c3, c4) = (chains.c.coefficients[2], chains.c.coefficients[3]);
    let norm = |x: Complex64, y: Complex64| (1.0 + x.norm_sqr() + y.norm_sqr()).sqrt();
    Ok(match which {
        AnglePair::L1L2 => -b3.conj() / norm(b3, c3),
        AnglePair::L1L2Bar => -b4.conj() / norm(b4, c4),
        AnglePair::L1BarL2 => -c3.conj() / norm(b3, c3),
        AnglePair::L1BarL2Bar => -c4.conj() / norm(b4, c4),
        AnglePair::L1L1Bar => unreachable!(),
    })
}

/// Same angle from explicitly back-substituted right vectors.
pub fn angle_direct(s: &SchurForm, which: AnglePair) -> Complex64 {
    let (i, j) = which.positions();
    normalized_inner(&right_vector(s, i), &right_vector(s, j))
}

fn nearest(values: &[Complex64], target: Complex64) -> usize {
    (0..values.len())
        .min_by(|&a, &b| {
            (values[a] - target)
                .norm()
                .total_cmp(&(values[b] - target).norm())
        })
        .unwrap_or(0)
}

/// Right and left eigenvectors of the dense expanded form for position `p`,
/// rescaled to the chain normalization (entry `p` of each equal to one).
pub fn dense_eigenvectors(
    s: &SchurForm,
    p: usize,
) -> Result<(Vec<Complex64>, Vec<Complex64>), SpectraError> {
    let sys = linalg::eigen_full(&s.expand(), true)?;
    let k = nearest(&sys.values, diag_value(s, p));
    let (r, l) = (sys.right(k), sys.left(k));
    let (rp, lp) = (r[p], l[p]);
    Ok((
        r.iter().map(|x| x / rp).collect(),
        l.iter().map(|x| x / lp).collect(),
    ))
}

/// Angle from the dense eigenvectors of the expanded matrix.
pub fn angle_dense(s: &SchurForm, which: AnglePair) -> Result<Complex64, SpectraError> {
    let (i, j) = which.positions();
    let (ri, _) = dense_eigenvectors(s, i)?;
    let (rj, _) = dense_eigenvectors(s, j)?;
    Ok(normalized_inner(&ri, &rj))
}

/// `O_11` from the dense overlap matrix of the expanded form.
pub fn dense_diagonal_overlap(s: &SchurForm) -> Result<f64, SpectraError> {
    let o = overlap_matrix(&s.expand())?;
    let k = nearest(&o.eigenvalues, s.lambdas[0]);
    Ok(o.matrix[(k, k)].re)
}

/// `O_11 = ‖L_1‖²` from the `b` chain (`R_1 = e_1`). With `scaled`, the form
/// is first divided by `sqrt(2N)`; the value is scale invariant.
pub fn diagonal_overlap_recurrence(s: &SchurForm, scaled: bool) -> Result<f64, SpectraError> {
    let form;
    let s = if scaled {
        form = s.scaled((2.0 * s.n as f64).sqrt());
        &form
    } else {
        s
    };
    check_gap(s)?;
    Ok(left_chain(s, 0)
        .coefficients
        .iter()
        .map(|b| b.norm_sqr())
        .sum())
}

/// `O_ij = ⟨R_i|R_j⟩⟨L_j|L_i⟩` for a diagonalizable matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    pub matrix: ComplexMatrix,
    pub eigenvalues: Vec<Complex64>,
}

pub fn overlap_matrix(a: &ComplexMatrix) -> Result<OverlapMatrix, SpectraError> {
    let sys = linalg::eigen_full(a, true)?;
    let gram = sys.right_vectors.adjoint().matmul(&sys.right_vectors);
    let inv_gram = sys.left_vectors.matmul(&sys.left_vectors.adjoint());
    let n = a.rows();
    let matrix = ComplexMatrix::from_fn(n, n, |i, j| gram[(i, j)] * inv_gram[(j, i)]);
    Ok(OverlapMatrix {
        matrix,
        eigenvalues: sys.values,
    })
}

impl OverlapMatrix {
    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    /// `max_i |Σ_j O_ij - 1|`.
    pub fn row_sum_defect(&self) -> f64 {
        (0..self.size())
            .map(|i| (self.matrix.row(i).iter().sum::<Complex64>() - ONE).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.matrix.max_abs_diff(&self.matrix.adjoint())
    }

    pub fn min_eigenvalue(&self) -> Result<f64, SpectraError> {
        let herm = self.matrix.add(&self.matrix.adjoint()).scale_real(0.5);
        Ok(linalg::eigenvalues(&herm)?
            .iter()
            .map(|z| z.re)
            .fold(f64::INFINITY, f64::min))
    }

    /// `max |O(λ, conj λ)|` and `max |O(λ,λ) - O(conj λ, conj λ)|` over conjugate pairs.
    pub fn conjugate_pair_defects(&self) -> Result<(f64, f64), SpectraError> {
        let pairing = linalg::pair_conjugates(&self.eigenvalues)?;
        let mut cross: f64 = 0.0;
        let mut diag: f64 = 0.0;
        for &(i, j) in &pairing.pairs {
            cross = cross
                .max(self.matrix[(i, j)].norm())
                .max(self.matrix[(j, i)].norm());
            diag = diag.max((self.matrix[(i, i)] - self.matrix[(j, j)]).norm());
        }
        Ok((cross, diag))
    }
}

/// `Λ(A) = ‖A‖_F² - Σ |λ_i|²`.
pub fn lack_of_normality(a: &ComplexMatrix) -> Result<f64, SpectraError> {
    let values = linalg::eigenvalues(a)?;
    let f = a.frobenius_norm();
    Ok(f * f - values.iter().map(|l| l.norm_sqr()).sum::<f64>())
}

/// Polynomial in one complex variable, coefficients in increasing degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<Complex64>);

impl Poly {
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![ZERO; k + 1];
        c[k] = ONE;
        Poly(c)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.0.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFormCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub gap: f64,
}

/// `tr(f(A)^* g(A))` against `Σ_ij O_ij conj(f(λ_i)) g(λ_j)`, where
/// `f(A) = P f(Δ) P⁻¹`.
pub fn quadratic_form_check(
    a: &ComplexMatrix,
    f: &Poly,
    g: &Poly,
) -> Result<QuadraticFormCheck, SpectraError> {
    let sys = linalg::eigen_full(a, true)?;
    let n = a.rows();
    let apply = |p: &Poly| {
        let fd: Vec<Complex64> = sys.values.iter().map(|&l| p.eval(l)).collect();
        let pf = ComplexMatrix::from_fn(n, n, |i, j| sys.right_vectors[(i, j)] * fd[j]);
        pf.matmul(&sys.left_vectors)
    };
    let (fa, ga) = (apply(f), apply(g));
    let lhs = fa.adjoint().matmul(&ga).trace();
    let gram = sys.right_vectors.adjoint().matmul(&sys.right_vectors);
    let inv_gram = sys.left_vectors.matmul(&sys.left_vectors.adjoint());
    let mut rhs = ZERO;
    for i in 0..n {
        let fi = f.eval(sys.values[i]).conj();
        for j in 0..n {
            rhs += gram[(i, j)] * inv_gram[(j, i)] * fi * g.eval(sys.values[j]);
        }
    }
    Ok(QuadraticFormCheck {
        lhs,
        rhs,
        gap: (lhs - rhs).norm() / (1.0 + lhs.norm()),
    })
}
