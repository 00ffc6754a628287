//! Right-looking blocked LU inversion with partial pivoting.
//!
//! Panel factorization and triangular solves run in native FP64; the
//! trailing-submatrix update of every block step goes through the supplied
//! complex GEMM.

use num_complex::Complex64;

use crate::error::{EmuError, Result};
use crate::matrix::ComplexMatrix;

#[derive(Clone, Debug)]
pub struct LuInverse {
    pub inverse: ComplexMatrix,
    /// `max |M X - I|`.
    pub residual: f64,
    pub trailing_updates: usize,
}

/// Trailing updates performed for an `n x n` matrix with block size `nb`.
pub fn trailing_update_count(n: usize, nb: usize) -> usize {
    n.div_ceil(nb).saturating_sub(1)
}

#[inline]
fn pivot_size(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

fn submatrix(a: &ComplexMatrix, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows.start + i, cols.start + j)])
}

/// `max |a x - I|` with a plain complex triple loop.
pub fn inverse_residual(a: &ComplexMatrix, x: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut r = 0.0f64;
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        col.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        for p in 0..n {
            let xpj = x[(p, j)];
            for (i, c) in col.iter_mut().enumerate() {
                *c += a[(i, p)] * xpj;
            }
        }
        for (i, c) in col.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            r = r.max((c - target).norm());
        }
    }
    r
}

/// Inverse of `m` through a blocked LU factorization.
pub fn blocked_lu_invert<F>(m: &ComplexMatrix, nb: usize, mut gemm: F) -> Result<LuInverse>
where
    F: FnMut(&ComplexMatrix, &ComplexMatrix) -> Result<ComplexMatrix>,
{
    let n = m.rows();
    if m.cols() != n {
        return Err(EmuError::DimensionMismatch(format!("cannot invert a {}x{} matrix", n, m.cols())));
    }
    if nb == 0 {
        return Err(EmuError::InvalidParameter("block size 0".into()));
    }
    if !m.is_finite() {
        return Err(EmuError::NonFiniteInput);
    }
    let mut a = m.clone();
    let mut ipiv = vec![0usize; n];
    let mut updates = 0;

    for k0 in (0..n).step_by(nb) {
        let k1 = (k0 + nb).min(n);

        // Unblocked panel factorization of columns k0..k1.
        for j in k0..k1 {
            let (mut p, mut best) = (j, pivot_size(a[(j, j)]));
            for i in j + 1..n {
                let s = pivot_size(a[(i, j)]);
                if s > best {
                    (p, best) = (i, s);
                }
            }
            if best == 0.0 {
                return Err(EmuError::SingularMatrix { column: j });
            }
            ipiv[j] = p;
            if p != j {
                for c in 0..n {
                    let t = a[(j, c)];
                    a[(j, c)] = a[(p, c)];
                    a[(p, c)] = t;
                }
            }
            let d = a[(j, j)];
            for i in j + 1..n {
                a[(i, j)] /= d;
            }
            for c in j + 1..k1 {
                let u = a[(j, c)];
                if u == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for i in j + 1..n {
                    let l = a[(i, j)];
                    a[(i, c)] -= l * u;
                }
            }
        }
        if k1 == n {
            break;
        }

        // U12 = L11^{-1} A12.
        for c in k1..n {
            for j in k0..k1 {
                let u = a[(j, c)];
                for i in j + 1..k1 {
                    let l = a[(i, j)];
                    a[(i, c)] -= l * u;
                }
            }
        }

        // A22 -= L21 U12.
        let l21 = submatrix(&a, k1..n, k0..k1);
        let u12 = submatrix(&a, k0..k1, k1..n);
        let prod = gemm(&l21, &u12)?;
        if (prod.rows(), prod.cols()) != (n - k1, n - k1) {
            return Err(EmuError::DimensionMismatch("trailing update has the wrong shape".into()));
        }
        for c in k1..n {
            for i in k1..n {
                a[(i, c)] -= prod[(i - k1, c - k1)];
            }
        }
        updates += 1;
    }

    // Solve L U X = P.
    let mut x = ComplexMatrix::identity(n);
    for (j, &p) in ipiv.iter().enumerate() {
        if p != j {
            for c in 0..n {
                let t = x[(j, c)];
                x[(j, c)] = x[(p, c)];
                x[(p, c)] = t;
            }
        }
    }
    for c in 0..n {
        for j in 0..n {
            let y = x[(j, c)];
            if y == Complex64::new(0.0, 0.0) {
                continue;
            }
            for i in j + 1..n {
                let l = a[(i, j)];
                x[(i, c)] -= l * y;
            }
        }
        for j in (0..n).rev() {
            let y = x[(j, c)] / a[(j, j)];
            x[(j, c)] = y;
            for i in 0..j {
                let u = a[(i, j)];
                x[(i, c)] -= u * y;
            }
        }
    }

    let residual = inverse_residual(m, &x);
    Ok(LuInverse { inverse: x, residual, trailing_updates: updates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispatch::Dispatcher;
    use crate::dispatch::EmulationMode;

    #[test]
    fn identity_inverts_to_identity() {
        let d = Dispatcher::new(EmulationMode::Native).unwrap();
        let r = blocked_lu_invert(&ComplexMatrix::identity(5), 2, |a, b| d.zgemm(a, b)).unwrap();
        assert_eq!(r.inverse, ComplexMatrix::identity(5));
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.trailing_updates, 2);
    }

    #[test]
    fn update_count_closed_form() {
        assert_eq!(trailing_update_count(200, 64), 3);
        assert_eq!(trailing_update_count(64, 64), 0);
        assert_eq!(trailing_update_count(65, 64), 1);
        assert_eq!(trailing_update_count(0, 64), 0);
    }

    #[test]
    fn singular_matrix_detected() {
        let mut m = ComplexMatrix::identity(4);
        m[(2, 2)] = Complex64::new(0.0, 0.0);
        let err = blocked_lu_invert(&m, 2, |a, b| Dispatcher::new(EmulationMode::Native)?.zgemm(a, b)).unwrap_err();
        assert_eq!(err, EmuError::SingularMatrix { column: 2 });
    }

    #[test]
    fn pivoting_required() {
        let m = ComplexMatrix::from_fn(3, 3, |i, j| {
            Complex64::new([[0.0, 1.0, 2.0], [1.0, 0.0, 3.0], [4.0, -3.0, 8.0]][i][j], 0.0)
        });
        let d = Dispatcher::new(EmulationMode::Native).unwrap();
        let r = blocked_lu_invert(&m, 1, |a, b| d.zgemm(a, b)).unwrap();
        assert!(r.residual < 1e-14, "residual {}", r.residual);
    }
}
