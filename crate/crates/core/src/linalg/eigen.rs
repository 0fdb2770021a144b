//! Dense non-Hermitian eigensolver: Householder reduction to Hessenberg form,
//! then implicitly shifted single-shift complex QR with Wilkinson shifts.
//!
//! Right eigenvectors are obtained by back substitution on the triangular
//! Schur factor and transformed back with the accumulated unitary. Left
//! eigenvectors are the rows of the inverse of the right-eigenvector matrix,
//! so `L R = I` holds up to the error of one linear solve.

use num_complex::Complex64;

use super::lu::{condition_estimate, invert};
use super::{ComplexMatrix, LinalgError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// QR sweeps allowed per eigenvalue before giving up.
pub const MAX_QR_ITERS: usize = 40;
/// Condition estimate above which the eigenvector basis is rejected.
pub const KAPPA_MAX: f64 = 1e12;
/// Biorthogonality tolerance for `L R = I`.
pub const TAU_BIO: f64 = 1e-8;
/// Relative backward-error tolerance per eigenpair.
pub const TAU_EIG: f64 = 1e-9;
/// Relative deflation threshold for subdiagonal entries.
const DEFLATION: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<Complex64>,
    /// Unit-norm right eigenvectors as columns; empty when not requested.
    pub right_vectors: ComplexMatrix,
    /// Left eigenvectors as rows, `left · right = I`.
    pub left_vectors: ComplexMatrix,
    /// `‖A R_i − λ_i R_i‖ / ‖A‖_F` per eigenpair.
    pub residuals: Vec<f64>,
    /// `‖R‖₁ ‖R⁻¹‖₁`; zero when vectors were not requested.
    pub condition: f64,
}

impl EigenSystem {
    pub fn has_vectors(&self) -> bool {
        self.right_vectors.rows() > 0
    }

    pub fn right(&self, i: usize) -> Vec<Complex64> {
        self.right_vectors.column(i)
    }

    pub fn left(&self, i: usize) -> Vec<Complex64> {
        self.left_vectors.row(i).to_vec()
    }

    /// `max |⟨L_i|R_j⟩ − δ_ij|`, with the bilinear pairing `L_i · R_j`.
    pub fn biorthogonality_defect(&self) -> f64 {
        let prod = self.left_vectors.matmul(&self.right_vectors);
        prod.max_abs_diff(&ComplexMatrix::identity(prod.rows()))
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }
}

/// Unitary `Z` and upper-triangular `T` with `A = Z T Z^*`.
#[derive(Debug, Clone)]
pub struct Schur {
    pub t: ComplexMatrix,
    pub z: ComplexMatrix,
}

fn check_input(a: &ComplexMatrix) -> Result<(), LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    Ok(())
}

/// Eigenvalues only.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>, LinalgError> {
    check_input(a)?;
    let mut h = a.clone();
    hessenberg_in_place(&mut h, None);
    qr_iterate(&mut h, None, false, MAX_QR_ITERS)
}

/// Complex Schur decomposition.
pub fn schur(a: &ComplexMatrix) -> Result<Schur, LinalgError> {
    check_input(a)?;
    let n = a.rows();
    let mut h = a.clone();
    let mut z = ComplexMatrix::identity(n);
    hessenberg_in_place(&mut h, Some(&mut z));
    qr_iterate(&mut h, Some(&mut z), true, MAX_QR_ITERS)?;
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Ok(Schur { t: h, z })
}

pub fn eigen_full(a: &ComplexMatrix, want_vectors: bool) -> Result<EigenSystem, LinalgError> {
    if !want_vectors {
        let values = eigenvalues(a)?;
        return Ok(EigenSystem {
            values,
            right_vectors: ComplexMatrix::zeros(0, 0),
            left_vectors: ComplexMatrix::zeros(0, 0),
            residuals: Vec::new(),
            condition: 0.0,
        });
    }
    let n = a.rows();
    let Schur { t, z } = schur(a)?;
    let values = t.diagonal();
    let y = triangular_eigenvectors(&t);
    let mut right = z.matmul(&y);
    for j in 0..n {
        let norm = (0..n).map(|i| right[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            right[(i, j)] /= norm;
        }
    }
    let condition = condition_estimate(&right);
    if !(condition <= KAPPA_MAX) {
        return Err(LinalgError::NearDefective { condition });
    }
    let left = invert(&right).map_err(|_| LinalgError::NearDefective {
        condition: f64::INFINITY,
    })?;
    let anorm = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let ar = a.matmul(&right);
    let residuals = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| (ar[(i, j)] - right[(i, j)] * values[j]).norm_sqr())
                .sum::<f64>()
                .sqrt()
                / anorm
        })
        .collect();
    Ok(EigenSystem {
        values,
        right_vectors: right,
        left_vectors: left,
        residuals,
        condition,
    })
}

/// Columns `y_k` with `T y_k = t_kk y_k`, `y_k[k] = 1`, `y_k[j] = 0` for `j > k`.
pub fn triangular_eigenvectors(t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.rows();
    let tnorm = t.max_abs();
    let smin = (f64::EPSILON * tnorm).max(f64::MIN_POSITIVE * n as f64);
    let mut y = ComplexMatrix::zeros(n, n);
    let mut col = vec![ZERO; n];
    for k in 0..n {
        let lam = t[(k, k)];
        col.iter_mut().for_each(|c| *c = ZERO);
        col[k] = ONE;
        for i in (0..k).rev() {
            let mut s = ZERO;
            for j in i + 1..=k {
                s += t[(i, j)] * col[j];
            }
            let mut d = t[(i, i)] - lam;
            if d.norm() < smin {
                d = Complex64::new(smin, 0.0);
            }
            col[i] = -s / d;
        }
        for i in 0..=k {
            y[(i, k)] = col[i];
        }
    }
    y
}

/// Householder reduction `A = Q H Q^*`; `Q` is accumulated into `q` when given.
pub fn hessenberg_in_place(h: &mut ComplexMatrix, mut q: Option<&mut ComplexMatrix>) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    let mut v = vec![ZERO; n];
    let mut w = vec![ZERO; n];
    for k in 0..n - 2 {
        let m = n - k - 1;
        let xnorm = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            ONE
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;
        for r in 0..m {
            v[r] = h[(k + 1 + r, k)];
        }
        v[0] -= alpha;
        let vnorm2: f64 = v[..m].iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm2;

        // left: rows k+1.., columns k..
        w[k..n].iter_mut().for_each(|x| *x = ZERO);
        for r in 0..m {
            let vr = v[r].conj();
            let row = &h.row(k + 1 + r)[k..n];
            for (wj, hj) in w[k..n].iter_mut().zip(row) {
                *wj += vr * hj;
            }
        }
        {
            let cols = h.cols();
            let data = h.as_mut_slice();
            for r in 0..m {
                let f = v[r] * tau;
                let row = &mut data[(k + 1 + r) * cols + k..(k + 1 + r) * cols + n];
                for (hj, wj) in row.iter_mut().zip(&w[k..n]) {
                    *hj -= f * wj;
                }
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }

        apply_reflector_right(h, &v[..m], tau, k + 1);
        if let Some(q) = q.as_deref_mut() {
            apply_reflector_right(q, &v[..m], tau, k + 1);
        }
    }
}

/// `M ← M (I − τ v v^*)` acting on columns `offset..offset+len(v)`.
fn apply_reflector_right(mat: &mut ComplexMatrix, v: &[Complex64], tau: f64, offset: usize) {
    let cols = mat.cols();
    let rows = mat.rows();
    let data = mat.as_mut_slice();
    for i in 0..rows {
        let row = &mut data[i * cols + offset..i * cols + offset + v.len()];
        let s: Complex64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
        let f = s * tau;
        for (x, vc) in row.iter_mut().zip(v) {
            *x -= f * vc.conj();
        }
    }
}

/// Rotation `[[c, s], [−conj s, c]]` (real `c`) mapping `(x, y)` to `(r, 0)`.
#[inline]
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64, Complex64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, ZERO, x);
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay, Complex64::new(ay, 0.0));
    }
    let norm = ax.hypot(ay);
    let phase = x / ax;
    (ax / norm, phase * y.conj() / norm, phase * norm)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let p = (a - d) * 0.5;
    let disc = (p * p + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let l1 = mid + disc;
    let l2 = mid - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Shifted QR on an upper Hessenberg matrix. With `want_t` the full Schur
/// factor is produced in `h`; rotations are accumulated into `z` when given.
fn qr_iterate(
    h: &mut ComplexMatrix,
    mut z: Option<&mut ComplexMatrix>,
    want_t: bool,
    max_iters: usize,
) -> Result<Vec<Complex64>, LinalgError> {
    let n = h.rows();
    let mut w = vec![ZERO; n];
    if n == 0 {
        return Ok(w);
    }
    let hnorm = h.max_abs().max(f64::MIN_POSITIVE);
    let cols = h.cols();
    let mut ihi = n - 1;
    let mut its = 0usize;
    loop {
        // locate the active block [l, ihi]
        let mut l = ihi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let mut tst = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if tst == 0.0 {
                if l >= 2 {
                    tst += h[(l - 1, l - 2)].norm();
                }
                if l < ihi {
                    tst += h[(l + 1, l)].norm();
                }
                if tst == 0.0 {
                    tst = hnorm;
                }
            }
            if sub <= DEFLATION * tst || sub <= f64::MIN_POSITIVE {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == ihi {
            w[ihi] = h[(ihi, ihi)];
            its = 0;
            if ihi == 0 {
                break;
            }
            ihi -= 1;
            continue;
        }
        its += 1;
        if its > max_iters {
            return Err(LinalgError::NoConvergence { index: ihi });
        }
        let shift = match its {
            10 => h[(l, l)] + h[(l + 1, l)].re.abs() * 0.75,
            20 => h[(ihi, ihi)] + h[(ihi, ihi - 1)].re.abs() * 0.75,
            _ => wilkinson_shift(
                h[(ihi - 1, ihi - 1)],
                h[(ihi - 1, ihi)],
                h[(ihi, ihi - 1)],
                h[(ihi, ihi)],
            ),
        };
        let (row_lo, col_hi) = if want_t { (0, n - 1) } else { (l, ihi) };
        for k in l..ihi {
            let (x, y) = if k == l {
                (h[(l, l)] - shift, h[(l + 1, l)])
            } else {
                (h[(k, k - 1)], h[(k + 1, k - 1)])
            };
            let (c, s, r) = givens(x, y);
            if k > l {
                h[(k, k - 1)] = r;
                h[(k + 1, k - 1)] = ZERO;
            }
            let sc = s.conj();
            {
                let data = h.as_mut_slice();
                let (top, bottom) = data.split_at_mut((k + 1) * cols);
                let rk = &mut top[k * cols + k..k * cols + col_hi + 1];
                let rk1 = &mut bottom[k..col_hi + 1];
                for (a, b) in rk.iter_mut().zip(rk1.iter_mut()) {
                    let (av, bv) = (*a, *b);
                    *a = av * c + s * bv;
                    *b = bv * c - sc * av;
                }
            }
            let row_hi = (k + 2).min(ihi);
            {
                let data = h.as_mut_slice();
                for i in row_lo..=row_hi {
                    let base = i * cols + k;
                    let (av, bv) = (data[base], data[base + 1]);
                    data[base] = av * c + bv * sc;
                    data[base + 1] = bv * c - av * s;
                }
            }
            if let Some(z) = z.as_deref_mut() {
                let zc = z.cols();
                let data = z.as_mut_slice();
                for i in 0..n {
                    let base = i * zc + k;
                    let (av, bv) = (data[base], data[base + 1]);
                    data[base] = av * c + bv * sc;
                    data[base + 1] = bv * c - av * s;
                }
            }
        }
    }
    Ok(w)
}

/// Result of matching a conjugation-closed multiset into conjugate pairs.
#[derive(Debug, Clone)]
pub struct ConjugatePairing {
    /// Upper-half-plane representative of each pair (average of the pair).
    pub upper: Vec<Complex64>,
    /// `(index of upper member, index of lower member)` into the input.
    pub pairs: Vec<(usize, usize)>,
    /// `max |μ − conj λ| / (1 + |λ|)` over matched pairs.
    pub max_residual: f64,
}

/// Sorts by real part, then greedily matches each value with the nearest
/// unmatched conjugate.
pub fn pair_conjugates(values: &[Complex64]) -> Result<ConjugatePairing, LinalgError> {
    if values.len() % 2 != 0 {
        return Err(LinalgError::OddCount { len: values.len() });
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .re
            .total_cmp(&values[b].re)
            .then(values[b].im.total_cmp(&values[a].im))
    });
    let mut used = vec![false; values.len()];
    let mut upper = Vec::with_capacity(values.len() / 2);
    let mut pairs = Vec::with_capacity(values.len() / 2);
    let mut max_residual: f64 = 0.0;
    for (pos, &i) in order.iter().enumerate() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let target = values[i].conj();
        let j = order[pos + 1..]
            .iter()
            .copied()
            .filter(|&j| !used[j])
            .min_by(|&a, &b| {
                (values[a] - target)
                    .norm()
                    .total_cmp(&(values[b] - target).norm())
            })
            .ok_or(LinalgError::OddCount { len: values.len() })?;
        used[j] = true;
        let resid = (values[j] - target).norm() / (1.0 + values[i].norm());
        max_residual = max_residual.max(resid);
        let (hi, lo) = if values[i].im >= values[j].im {
            (i, j)
        } else {
            (j, i)
        };
        let mut rep = (values[hi] + values[lo].conj()) * 0.5;
        rep.im = rep.im.abs();
        upper.push(rep);
        pairs.push((hi, lo));
    }
    Ok(ConjugatePairing {
        upper,
        pairs,
        max_residual,
    })
}
