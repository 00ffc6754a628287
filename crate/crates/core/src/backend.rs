//! Exact signed 8-bit integer matrix multiplication.
//!
//! Every emulation scheme in this crate reduces an FP64 product to a set of
//! int8 x int8 -> int32 products. The backend is required to return those
//! products *exactly*; all emulation error is then attributable to the
//! decomposition of the FP64 operands.

use crate::error::{EmuError, Result};

/// Longest reduction a single int32-accumulating call may perform.
///
/// Each product satisfies `|a*b| <= 128^2 = 2^14`. `2^17` products of
/// `(-128)*(-128)` would reach exactly `2^31`, one past `i32::MAX`, so the
/// bound is one short of `2^17`.
pub const MAX_BLOCK_K: usize = (1 << 17) - 1;

/// Default k-block for [`int8_gemm`].
pub const DEFAULT_BLOCK_K: usize = 1 << 16;

/// Column-major signed 8-bit matrix with an explicit leading dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Int8Matrix {
    rows: usize,
    cols: usize,
    ld: usize,
    data: Vec<i8>,
}

impl Int8Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, ld: rows, data: vec![0; rows * cols] }
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<i8>) -> Result<Self> {
        Self::with_ld(rows, cols, rows, data)
    }

    pub fn with_ld(rows: usize, cols: usize, ld: usize, data: Vec<i8>) -> Result<Self> {
        if ld < rows.max(1) && rows > 0 {
            return Err(EmuError::DimensionMismatch(format!("leading dimension {ld} < rows {rows}")));
        }
        if data.len() != ld * cols {
            return Err(EmuError::DimensionMismatch(format!("{} values for ld {ld} and {cols} columns", data.len())));
        }
        Ok(Self { rows, cols, ld, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> i8) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.data[i + j * rows] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn ld(&self) -> usize {
        self.ld
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.data[i + j * self.ld]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: i8) {
        self.data[i + j * self.ld] = v;
    }

    pub fn is_zero(&self) -> bool {
        (0..self.cols).all(|j| (0..self.rows).all(|i| self.get(i, j) == 0))
    }

    /// Copy of columns `range` (a k-block of a left operand).
    pub fn column_block(&self, range: std::ops::Range<usize>) -> Self {
        Self::from_fn(self.rows, range.len(), |i, j| self.get(i, range.start + j))
    }

    /// Copy of rows `range` (a k-block of a right operand).
    pub fn row_block(&self, range: std::ops::Range<usize>) -> Self {
        Self::from_fn(range.len(), self.cols, |i, j| self.get(range.start + i, j))
    }

    pub fn widen(&self) -> Int32Matrix {
        Int32Matrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) as i32)
    }
}

/// Column-major 32-bit integer matrix (leading dimension = rows).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Int32Matrix {
    rows: usize,
    cols: usize,
    data: Vec<i32>,
}

impl Int32Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> i32) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.data[i + j * rows] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i32 {
        self.data[i + j * self.rows]
    }

    pub fn as_slice(&self) -> &[i32] {
        &self.data
    }
}

/// Column-major 64-bit integer matrix, the exact result of a k-blocked product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Int64Matrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl Int64Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i + j * self.rows]
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [i64] {
        &mut self.data
    }

    pub fn add_assign(&mut self, other: &Int32Matrix) {
        debug_assert_eq!((self.rows, self.cols), (other.rows(), other.cols()));
        for (acc, &v) in self.data.iter_mut().zip(other.as_slice()) {
            *acc += v as i64;
        }
    }
}

/// Work performed by one emulated FP64 GEMM.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EmulationCost {
    /// Logical low-precision GEMMs (one per slice pair or per modulus),
    /// independent of how many k-blocks each one needed.
    pub backend_gemms: u64,
    /// Operand entries that went through decomposition.
    pub elements_quantized: u64,
    /// Nonzero entries that became zero after alignment to their line's
    /// largest exponent.
    pub elements_flushed: u64,
}

/// An exact int8 matmul engine.
///
/// Implementations must return the mathematically exact product whenever the
/// reduction length is at most [`IntegerBackend::max_reduction`].
pub trait IntegerBackend: Send + Sync {
    fn max_reduction(&self) -> usize;

    fn gemm_block(&self, a: &Int8Matrix, b: &Int8Matrix) -> Result<Int32Matrix>;
}

/// Portable cache-blocked reference kernel.
#[derive(Clone, Copy, Debug, Default)]
pub struct ReferenceBackend;

const COL_TILE: usize = 32;

fn check_block(a: &Int8Matrix, b: &Int8Matrix, max_k: usize) -> Result<()> {
    if a.cols() != b.rows() {
        return Err(EmuError::DimensionMismatch(format!(
            "int8 gemm {}x{} times {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if a.cols() > max_k {
        return Err(EmuError::ContractViolation(format!(
            "reduction length {} exceeds the exact int32 bound {max_k}",
            a.cols()
        )));
    }
    Ok(())
}

#[inline]
fn dot_i8(x: &[i8], y: &[i8]) -> i32 {
    // Wrapping ops never wrap here (k < 2^17); they only keep the loop free of
    // overflow checks so it vectorizes.
    x.iter().zip(y).fold(0i32, |acc, (&p, &q)| acc.wrapping_add((p as i32).wrapping_mul(q as i32)))
}

impl IntegerBackend for ReferenceBackend {
    fn max_reduction(&self) -> usize {
        MAX_BLOCK_K
    }

    fn gemm_block(&self, a: &Int8Matrix, b: &Int8Matrix) -> Result<Int32Matrix> {
        check_block(a, b, MAX_BLOCK_K)?;
        let (m, k, n) = (a.rows(), a.cols(), b.cols());
        let mut out = Int32Matrix::zeros(m, n);
        if m == 0 || n == 0 || k == 0 {
            return Ok(out);
        }

        // Pack A by rows so both dot-product operands are contiguous in k.
        let mut a_rows = vec![0i8; m * k];
        for p in 0..k {
            for i in 0..m {
                a_rows[i * k + p] = a.get(i, p);
            }
        }
        let mut b_cols = vec![0i8; k * n];
        for j in 0..n {
            for p in 0..k {
                b_cols[j * k + p] = b.get(p, j);
            }
        }

        for j0 in (0..n).step_by(COL_TILE) {
            let j1 = (j0 + COL_TILE).min(n);
            for i in 0..m {
                let row = &a_rows[i * k..(i + 1) * k];
                for j in j0..j1 {
                    out.data[i + j * m] = dot_i8(row, &b_cols[j * k..(j + 1) * k]);
                }
            }
        }
        Ok(out)
    }
}

/// Exact `a * b` for a single reduction block using the reference kernel.
pub fn int8_gemm_block(a: &Int8Matrix, b: &Int8Matrix) -> Result<Int32Matrix> {
    ReferenceBackend.gemm_block(a, b)
}

/// Exact `a * b` for any reduction length, splitting k into blocks of at
/// most `block` and accumulating the block products in 64-bit integers.
pub fn int8_gemm<B: IntegerBackend + ?Sized>(
    backend: &B,
    a: &Int8Matrix,
    b: &Int8Matrix,
    block: usize,
) -> Result<Int64Matrix> {
    if block == 0 || block > backend.max_reduction() {
        return Err(EmuError::ContractViolation(format!("k-block {block} outside 1..={}", backend.max_reduction())));
    }
    check_block(a, b, usize::MAX)?;
    let k = a.cols();
    let mut acc = Int64Matrix::zeros(a.rows(), b.cols());
    if k <= block {
        acc.add_assign(&backend.gemm_block(a, b)?);
        return Ok(acc);
    }
    for start in (0..k).step_by(block) {
        let range = start..(start + block).min(k);
        let part = backend.gemm_block(&a.column_block(range.clone()), &b.row_block(range))?;
        acc.add_assign(&part);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &Int8Matrix, b: &Int8Matrix) -> Vec<i64> {
        let mut out = vec![0i64; a.rows() * b.cols()];
        for j in 0..b.cols() {
            for i in 0..a.rows() {
                out[i + j * a.rows()] = (0..a.cols()).map(|p| a.get(i, p) as i64 * b.get(p, j) as i64).sum();
            }
        }
        out
    }

    #[test]
    fn two_by_two_hand_product() {
        let a = Int8Matrix::from_fn(2, 2, |i, j| [[1, 2], [3, 4]][i][j]);
        let b = Int8Matrix::from_fn(2, 2, |i, j| [[5, 6], [7, 8]][i][j]);
        let c = int8_gemm_block(&a, &b).unwrap();
        assert_eq!([c.get(0, 0), c.get(0, 1), c.get(1, 0), c.get(1, 1)], [19, 22, 43, 50]);
    }

    #[test]
    fn identity_widens_right_operand() {
        let id = Int8Matrix::from_fn(2, 2, |i, j| (i == j) as i8);
        let b = Int8Matrix::from_fn(2, 5, |i, j| (i as i8 * 50 - j as i8 * 17).wrapping_mul(3));
        assert_eq!(int8_gemm_block(&id, &b).unwrap(), b.widen());
    }

    #[test]
    fn worst_case_reduction_does_not_overflow() {
        let k = MAX_BLOCK_K;
        let a = Int8Matrix::from_fn(1, k, |_, _| -128);
        let b = Int8Matrix::from_fn(k, 1, |_, _| -128);
        let c = int8_gemm_block(&a, &b).unwrap();
        assert_eq!(c.get(0, 0) as i64, (k as i64) << 14);
        assert_eq!(c.get(0, 0), i32::MAX - (1 << 14) + 1);
        let mixed = int8_gemm_block(&Int8Matrix::from_fn(1, k, |_, _| 127), &b).unwrap();
        assert_eq!(mixed.get(0, 0) as i64, -(k as i64) * 127 * 128);

        // A full 2^17 reduction of -128s needs 2^31 and must be split.
        let a = Int8Matrix::from_fn(1, 1 << 17, |_, _| -128);
        let b = Int8Matrix::from_fn(1 << 17, 1, |_, _| -128);
        assert!(int8_gemm_block(&a, &b).is_err());
        let wide = int8_gemm(&ReferenceBackend, &a, &b, DEFAULT_BLOCK_K).unwrap();
        assert_eq!(wide.get(0, 0), 1i64 << 31);
    }

    #[test]
    fn rejects_bad_shapes_and_long_reductions() {
        let a = Int8Matrix::zeros(2, 3);
        let b = Int8Matrix::zeros(2, 2);
        assert!(matches!(int8_gemm_block(&a, &b), Err(EmuError::DimensionMismatch(_))));
        let long_a = Int8Matrix::zeros(1, MAX_BLOCK_K + 1);
        let long_b = Int8Matrix::zeros(MAX_BLOCK_K + 1, 1);
        assert!(matches!(int8_gemm_block(&long_a, &long_b), Err(EmuError::ContractViolation(_))));
        assert!(int8_gemm(&ReferenceBackend, &long_a, &long_b, MAX_BLOCK_K + 1).is_err());
        assert!(int8_gemm(&ReferenceBackend, &long_a, &long_b, DEFAULT_BLOCK_K).is_ok());
    }

    #[test]
    fn single_block_matches_blocked_call() {
        let a = Int8Matrix::from_fn(3, 10, |i, j| (i * 31 + j * 7) as i8);
        let b = Int8Matrix::from_fn(10, 4, |i, j| (i * 13) as i8 - (j * 29) as i8);
        let single = int8_gemm_block(&a, &b).unwrap();
        let blocked = int8_gemm(&ReferenceBackend, &a, &b, DEFAULT_BLOCK_K).unwrap();
        let tiny_blocks = int8_gemm(&ReferenceBackend, &a, &b, 3).unwrap();
        let expect = naive(&a, &b);
        assert_eq!(blocked.as_slice(), expect.as_slice());
        assert_eq!(tiny_blocks.as_slice(), expect.as_slice());
        assert!(single.as_slice().iter().zip(&expect).all(|(&x, &y)| x as i64 == y));
    }

    #[test]
    fn all_ones_over_three_blocks() {
        let k = 3 << 16;
        let a = Int8Matrix::from_fn(2, k, |_, _| 1);
        let b = Int8Matrix::from_fn(k, 2, |_, _| 1);
        let c = int8_gemm(&ReferenceBackend, &a, &b, DEFAULT_BLOCK_K).unwrap();
        assert!(c.as_slice().iter().all(|&v| v == k as i64));
    }

    #[test]
    fn zero_and_empty_products() {
        let c = int8_gemm(&ReferenceBackend, &Int8Matrix::zeros(4, 6), &Int8Matrix::zeros(6, 3), 1 << 16).unwrap();
        assert!(c.as_slice().iter().all(|&v| v == 0));
        let e = int8_gemm_block(&Int8Matrix::zeros(4, 0), &Int8Matrix::zeros(0, 3)).unwrap();
        assert_eq!((e.rows(), e.cols()), (4, 3));
    }

    #[test]
    fn leading_dimension_is_respected() {
        // 2x2 matrix stored with ld = 3; the padding rows hold garbage.
        let a = Int8Matrix::with_ld(2, 2, 3, vec![1, 2, 99, 3, 4, 99]).unwrap();
        let id = Int8Matrix::from_fn(2, 2, |i, j| (i == j) as i8);
        let c = int8_gemm_block(&a, &id).unwrap();
        assert_eq!([c.get(0, 0), c.get(1, 0), c.get(0, 1), c.get(1, 1)], [1, 2, 3, 4]);
        assert!(Int8Matrix::with_ld(3, 2, 2, vec![0; 4]).is_err());
    }
}
