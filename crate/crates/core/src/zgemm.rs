//! Complex GEMM as four real GEMMs.

use crate::error::{EmuError, Result};
use crate::matrix::{ComplexMatrix, Matrix};

/// `a * b` with `C_re = Ar Br - Ai Bi` and `C_im = Ar Bi + Ai Br`, each real
/// product computed by `real_gemm` (called exactly four times).
pub fn complex_gemm<F>(a: &ComplexMatrix, b: &ComplexMatrix, mut real_gemm: F) -> Result<ComplexMatrix>
where
    F: FnMut(&Matrix, &Matrix) -> Result<Matrix>,
{
    if a.cols() != b.rows() {
        return Err(EmuError::DimensionMismatch(format!(
            "zgemm {}x{} times {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let (ar, ai, br, bi) = (a.re(), a.im(), b.re(), b.im());
    let rr = real_gemm(&ar, &br)?;
    let ii = real_gemm(&ai, &bi)?;
    let ri = real_gemm(&ar, &bi)?;
    let ir = real_gemm(&ai, &br)?;
    let mut re = rr;
    for (x, &y) in re.as_mut_slice().iter_mut().zip(ii.as_slice()) {
        *x -= y;
    }
    let mut im = ri;
    for (x, &y) in im.as_mut_slice().iter_mut().zip(ir.as_slice()) {
        *x += y;
    }
    ComplexMatrix::from_parts(&re, &im)
}
