//! Independent high-precision references: exact big-integer matmul and a
//! double-word floating matmul built on error-free transformations.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{EmuError, Result};
use crate::matrix::Matrix;

/// Column-major matrix of arbitrary-precision integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WideIntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl WideIntMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| BigInt::from((i == j) as i32))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i + j * self.rows]
    }

    /// Correctly rounded FP64 image of every entry.
    pub fn to_f64(&self) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| bigint_to_f64(self.get(i, j)))
    }
}

/// Exact integer product.
pub fn exact_int_gemm(a: &WideIntMatrix, b: &WideIntMatrix) -> Result<WideIntMatrix> {
    if a.cols != b.rows {
        return Err(EmuError::DimensionMismatch(format!(
            "oracle gemm {}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(WideIntMatrix::from_fn(a.rows, b.cols, |i, j| {
        let mut acc = BigInt::zero();
        for p in 0..a.cols {
            acc += a.get(i, p) * b.get(p, j);
        }
        acc
    }))
}

/// Round-to-nearest-even conversion, independent of the CRT path.
pub fn bigint_to_f64(x: &BigInt) -> f64 {
    let mag = x.abs().to_biguint().expect("non-negative");
    let bits = mag.bits();
    let v = if bits <= 53 {
        mag.to_u64().expect("fits") as f64
    } else {
        let shift = bits - 53;
        let mut top = (&mag >> shift).to_u64().expect("53 bits");
        let rest = &mag - (num_bigint::BigUint::from(top) << shift);
        let half = num_bigint::BigUint::from(1u8) << (shift - 1);
        if rest > half || (rest == half && top & 1 == 1) {
            top += 1;
        }
        libm::ldexp(top as f64, shift as i32)
    };
    if x.is_negative() {
        -v
    } else {
        v
    }
}

/// Exact FP64 value as a big integer times `2^exp`; returns `(mantissa, exp)`.
pub fn f64_to_scaled_bigint(x: f64) -> (BigInt, i32) {
    if x == 0.0 {
        return (BigInt::zero(), 0);
    }
    let (f, e) = libm::frexp(x);
    (BigInt::from(libm::ldexp(f, 53) as i64), e - 53)
}

/// `a + b = s + err` exactly.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// `a * b = p + err` exactly (barring underflow).
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Nonoverlapping floating-point expansion (increasing magnitude).
#[derive(Clone, Debug, Default)]
struct Expansion(Vec<f64>);

impl Expansion {
    /// Adds `x` exactly (grow-expansion).
    fn add(&mut self, mut x: f64) {
        let mut out = Vec::with_capacity(self.0.len() + 1);
        for &e in &self.0 {
            let (s, err) = two_sum(x, e);
            if err != 0.0 {
                out.push(err);
            }
            x = s;
        }
        if x != 0.0 {
            out.push(x);
        }
        self.0 = out;
        if self.0.len() > 32 {
            self.compress();
        }
    }

    fn compress(&mut self) {
        let e = &self.0;
        if e.is_empty() {
            return;
        }
        let mut g = Vec::with_capacity(e.len());
        let mut q = e[e.len() - 1];
        for &x in e[..e.len() - 1].iter().rev() {
            let (s, small) = two_sum(q, x);
            if small != 0.0 {
                g.push(s);
                q = small;
            } else {
                q = s;
            }
        }
        g.push(q);
        let mut out = Vec::with_capacity(g.len());
        let mut q = g[g.len() - 1];
        for &x in g[..g.len() - 1].iter().rev() {
            let (s, small) = two_sum(x, q);
            if small != 0.0 {
                out.push(small);
            }
            q = s;
        }
        out.push(q);
        self.0 = out;
    }

    /// Leading double-word approximation `(hi, lo)`.
    fn double_word(mut self) -> (f64, f64) {
        self.compress();
        let mut hi = 0.0;
        let mut lo = 0.0;
        for &x in &self.0 {
            let (s, e) = two_sum(hi, x);
            hi = s;
            lo += e;
        }
        two_sum(hi, lo)
    }
}

/// Product with double-word entries.
#[derive(Clone, Debug)]
pub struct DoubleWordMatrix {
    pub hi: Matrix,
    pub lo: Matrix,
}

impl DoubleWordMatrix {
    /// Entries rounded to FP64.
    pub fn rounded(&self) -> Matrix {
        Matrix::from_fn(self.hi.rows(), self.hi.cols(), |i, j| self.hi[(i, j)] + self.lo[(i, j)])
    }
}

/// Every dot product accumulated exactly as an expansion, then rounded to a
/// double-word pair.
pub fn extended_gemm(a: &Matrix, b: &Matrix) -> Result<DoubleWordMatrix> {
    if a.cols() != b.rows() {
        return Err(EmuError::DimensionMismatch(format!(
            "oracle gemm {}x{} times {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(EmuError::NonFiniteInput);
    }
    let mut hi = Matrix::zeros(a.rows(), b.cols());
    let mut lo = Matrix::zeros(a.rows(), b.cols());
    for j in 0..b.cols() {
        for i in 0..a.rows() {
            let mut acc = Expansion::default();
            for p in 0..a.cols() {
                let (x, err) = two_prod(a[(i, p)], b[(p, j)]);
                acc.add(err);
                acc.add(x);
            }
            let (h, l) = acc.double_word();
            hi[(i, j)] = h;
            lo[(i, j)] = l;
        }
    }
    Ok(DoubleWordMatrix { hi, lo })
}

/// Exact product of FP64 matrices as big integers over a common power of two:
/// `a * b = result * 2^exp`.
pub fn exact_f64_gemm(a: &Matrix, b: &Matrix) -> Result<(WideIntMatrix, i32)> {
    let min_exp =
        |m: &Matrix| m.as_slice().iter().filter(|x| **x != 0.0).map(|&x| f64_to_scaled_bigint(x).1).min().unwrap_or(0);
    let (ea, eb) = (min_exp(a), min_exp(b));
    let lift = |m: &Matrix, base: i32| {
        WideIntMatrix::from_fn(m.rows(), m.cols(), |i, j| {
            let (v, e) = f64_to_scaled_bigint(m[(i, j)]);
            v << (e - base).max(0) as usize
        })
    };
    let c = exact_int_gemm(&lift(a, ea), &lift(b, eb))?;
    Ok((c, ea + eb))
}

/// The exact product of FP64 matrices, correctly rounded entry by entry.
pub fn exact_gemm_rounded(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let (c, e) = exact_f64_gemm(a, b)?;
    Ok(Matrix::from_fn(c.rows(), c.cols(), |i, j| libm::ldexp(bigint_to_f64(c.get(i, j)), e)))
}
