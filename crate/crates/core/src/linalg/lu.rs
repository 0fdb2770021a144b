use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError};

/// Partial-pivoting LU factorization `P A = L U`, stored packed.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    swaps: usize,
}

/// Pivots below `n · ε · max|a_ij|` are treated as zero.
fn pivot_floor(a: &ComplexMatrix) -> f64 {
    a.rows() as f64 * f64::EPSILON * a.max_abs()
}

impl Lu {
    pub fn factor(a: &ComplexMatrix) -> Result<Lu, LinalgError> {
        let lu = Self::factor_unchecked(a)?;
        let floor = pivot_floor(a);
        if let Some(k) = (0..a.rows()).find(|&k| !(lu.lu[(k, k)].norm() > floor)) {
            return Err(LinalgError::Singular { pivot: k });
        }
        Ok(lu)
    }

    /// Factorization that tolerates zero pivots (used for determinants).
    pub fn factor_unchecked(a: &ComplexMatrix) -> Result<Lu, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
                swaps += 1;
            }
            if best == 0.0 {
                continue;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= factor * u;
                }
            }
        }
        Ok(Lu { lu, perm, swaps })
    }

    pub fn det(&self) -> Complex64 {
        let n = self.lu.rows();
        let mut d = if self.swaps % 2 == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        };
        for k in 0..n {
            d *= self.lu[(k, k)];
        }
        d
    }

    pub fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.rows();
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.lu[(i, k)] * x[k];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.lu[(i, k)] * x[k];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    pub fn solve(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let n = self.lu.rows();
        assert_eq!(b.rows(), n);
        let mut out = ComplexMatrix::zeros(n, b.cols());
        for j in 0..b.cols() {
            let x = self.solve_vec(&b.column(j));
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        out
    }

    pub fn inverse(&self) -> ComplexMatrix {
        self.solve(&ComplexMatrix::identity(self.lu.rows()))
    }
}

pub fn invert(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    Ok(Lu::factor(a)?.inverse())
}

pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    Ok(Lu::factor(a)?.solve(b))
}

/// Determinant; zero for exactly singular input.
pub fn determinant(a: &ComplexMatrix) -> Result<Complex64, LinalgError> {
    Ok(Lu::factor_unchecked(a)?.det())
}

/// `‖A‖₁ ‖A⁻¹‖₁`, infinite when `A` is numerically singular.
pub fn condition_estimate(a: &ComplexMatrix) -> f64 {
    match invert(a) {
        Ok(inv) => a.norm_one() * inv.norm_one(),
        Err(_) => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::{is_quaternionic, Quaternion, QuaternionMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_inverse() {
        let id = ComplexMatrix::identity(5);
        assert_eq!(invert(&id).unwrap(), id);
    }

    #[test]
    fn diagonal_inverse() {
        let a = ComplexMatrix::from_diagonal(&[c(2.0, 0.0), c(0.0, 4.0)]);
        let inv = invert(&a).unwrap();
        assert!((inv[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((inv[(1, 1)] - c(0.0, -0.25)).norm() < 1e-15);
        assert_eq!(inv[(0, 1)], c(0.0, 0.0));
    }

    #[test]
    fn singular_is_reported() {
        let a = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(invert(&a), Err(LinalgError::Singular { .. })));
        assert_eq!(determinant(&a).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn determinant_small() {
        let a = ComplexMatrix::from_rows(
            2,
            2,
            vec![c(1.0, 1.0), c(2.0, 0.0), c(0.0, 3.0), c(4.0, 0.0)],
        );
        // (1+i)*4 - 2*3i = 4 - 2i
        assert!((determinant(&a).unwrap() - c(4.0, -2.0)).norm() < 1e-14);
    }

    #[test]
    fn inverse_of_structured_is_structured() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let q = QuaternionMatrix::from_fn(3, |_, _| {
                Quaternion::new(rng.random(), rng.random(), rng.random(), rng.random())
            });
            let e = q.embed();
            let inv = invert(&e).unwrap();
            assert!(is_quaternionic(&inv));
            let kappa = condition_estimate(&e);
            let resid = e
                .matmul(&inv)
                .sub(&ComplexMatrix::identity(6))
                .frobenius_norm();
            assert!(resid <= 1e-14 * kappa.max(1.0) * 10.0);
        }
    }
}
