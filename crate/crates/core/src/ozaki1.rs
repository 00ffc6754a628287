//! Slice-based emulation (Ozaki scheme I).
//!
//! Each row of the left operand (column of the right operand) is aligned to a
//! shared power-of-two exponent `e` and its entries are rounded to integers
//! `N = round(x * 2^(8s - e))`. `N` is then written as `s` balanced base-256
//! digits in `[-128, 127]`, most significant first, so that
//!
//! ```text
//! x ~= sum_{t=1..s} d_t * 2^(e - 8t),    |error| <= 2^(e - 8s - 1)
//! ```
//!
//! The exponent is chosen so the row maximum sits just below `2^(e-1)`, which
//! leaves `8s - 1` magnitude bits: seven in the leading digit and eight in
//! each following one. Slice products are exact int8 GEMMs; products of equal
//! weight `t + u` are summed in 64-bit integers and the weight groups are then
//! accumulated in FP64 from least to most significant.

use crate::backend::{int8_gemm, EmulationCost, Int64Matrix, Int8Matrix, IntegerBackend, DEFAULT_BLOCK_K};
use crate::error::{EmuError, Result};
use crate::matrix::{Matrix, Orientation};

pub const MAX_SLICES: usize = 8;

/// Stored bits per slice.
pub const SLICE_BITS: u32 = 8;

/// Exponent recorded for an all-zero line. Its slices are all zero.
pub const ZERO_LINE_EXPONENT: i32 = i32::MIN;

/// Which slice pairs `(t, u)` (1-based, most significant first) are multiplied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ProductStrategy {
    /// Pairs with `t + u <= s + 1`; drops the terms below the slicing noise floor.
    #[default]
    Eager,
    /// All `s^2` pairs.
    Full,
}

impl ProductStrategy {
    pub fn pairs(self, slices: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for t in 1..=slices {
            for u in 1..=slices {
                if self == ProductStrategy::Full || t + u <= slices + 1 {
                    out.push((t, u));
                }
            }
        }
        out
    }

    pub fn pair_count(self, slices: usize) -> usize {
        match self {
            ProductStrategy::Eager => slices * (slices + 1) / 2,
            ProductStrategy::Full => slices * slices,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ProductStrategy::Eager => "eager",
            ProductStrategy::Full => "full",
        }
    }
}

impl std::str::FromStr for ProductStrategy {
    type Err = EmuError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "eager" => Ok(ProductStrategy::Eager),
            "full" => Ok(ProductStrategy::Full),
            other => Err(EmuError::InvalidParameter(format!("unknown slice strategy {other:?}"))),
        }
    }
}

/// The slice decomposition of one GEMM operand.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceSet {
    orientation: Orientation,
    rows: usize,
    cols: usize,
    exponents: Vec<i32>,
    slices: Vec<Int8Matrix>,
}

impl SliceSet {
    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Per-line alignment exponents (`ZERO_LINE_EXPONENT` for zero lines).
    pub fn exponents(&self) -> &[i32] {
        &self.exponents
    }

    /// Slices, most significant first.
    pub fn slices(&self) -> &[Int8Matrix] {
        &self.slices
    }

    pub fn slice_count(&self) -> usize {
        self.slices.len()
    }

    pub fn slice_width_bits(&self) -> u32 {
        SLICE_BITS
    }

    pub fn mantissa_bits(&self) -> u32 {
        mantissa_bits(self.slices.len())
    }

    pub fn exponent_of(&self, i: usize, j: usize) -> i32 {
        self.exponents[self.orientation.line_of(i, j)]
    }

    /// The integer `N = sum_t d_t 256^(s-t)` carried by entry `(i, j)`.
    pub fn digits_value(&self, i: usize, j: usize) -> i128 {
        self.slices.iter().fold(0i128, |acc, s| acc * 256 + s.get(i, j) as i128)
    }

    /// Entry `(i, j)` rebuilt from its slices, rounded once to FP64.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        let e = self.exponent_of(i, j);
        if e == ZERO_LINE_EXPONENT {
            return 0.0;
        }
        let s = self.slices.len() as i32;
        libm::ldexp(self.digits_value(i, j) as f64, e - SLICE_BITS as i32 * s)
    }

    pub fn reconstruct(&self) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| self.value(i, j))
    }
}

/// Advertised significand width of an `s`-slice decomposition.
pub fn mantissa_bits(slices: usize) -> u32 {
    SLICE_BITS * slices as u32 - 1
}

/// Largest integer expressible with `s` balanced base-256 digits in `[-128, 127]`.
fn digit_limit(slices: usize) -> i128 {
    127 * ((1i128 << (8 * slices)) - 1) / 255
}

fn check_slices(slices: usize) -> Result<()> {
    if !(1..=MAX_SLICES).contains(&slices) {
        return Err(EmuError::InvalidParameter(format!("slice count {slices} outside 1..={MAX_SLICES}")));
    }
    Ok(())
}

#[inline]
fn scaled_integer(x: f64, shift: i32) -> i128 {
    libm::ldexp(x, shift).round() as i128
}

fn line_exponent(max: f64, slices: usize) -> i32 {
    if max == 0.0 {
        return ZERO_LINE_EXPONENT;
    }
    // max < 2^e2, so with e = e2 + 1 the scaled maximum is below 2^(8s-1).
    let (_, e2) = libm::frexp(max);
    let mut e = e2 + 1;
    let bits = (SLICE_BITS as usize * slices) as i32;
    if scaled_integer(max, bits - e) > digit_limit(slices) {
        e += 1;
    }
    e
}

fn write_digits(mut n: i128, slices: &mut [Int8Matrix], i: usize, j: usize) {
    for slice in slices.iter_mut().rev() {
        let d = (n + 128).rem_euclid(256) - 128;
        slice.set(i, j, d as i8);
        n = (n - d) / 256;
    }
    debug_assert_eq!(n, 0, "digit expansion overflowed");
}

/// Splits `m` into `slices` int8 slices with per-line exponent alignment.
pub fn slice_decompose(m: &Matrix, slices: usize, orientation: Orientation) -> Result<SliceSet> {
    check_slices(slices)?;
    if !m.is_finite() {
        return Err(EmuError::NonFiniteInput);
    }
    let (rows, cols) = (m.rows(), m.cols());
    let exponents: Vec<i32> = m.line_max_abs(orientation).into_iter().map(|mx| line_exponent(mx, slices)).collect();
    let mut out: Vec<Int8Matrix> = (0..slices).map(|_| Int8Matrix::zeros(rows, cols)).collect();
    let bits = (SLICE_BITS as usize * slices) as i32;
    for j in 0..cols {
        for i in 0..rows {
            let e = exponents[orientation.line_of(i, j)];
            let x = m[(i, j)];
            if e == ZERO_LINE_EXPONENT || x == 0.0 {
                continue;
            }
            write_digits(scaled_integer(x, bits - e), &mut out, i, j);
        }
    }
    Ok(SliceSet { orientation, rows, cols, exponents, slices: out })
}

/// Emulated `a * b` through `slices`-way slicing.
pub fn ozaki1_gemm<B: IntegerBackend + ?Sized>(
    a: &Matrix,
    b: &Matrix,
    slices: usize,
    strategy: ProductStrategy,
    backend: &B,
) -> Result<(Matrix, EmulationCost)> {
    if a.cols() != b.rows() {
        return Err(EmuError::DimensionMismatch(format!(
            "gemm {}x{} times {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let sa = slice_decompose(a, slices, Orientation::Rows)?;
    let sb = slice_decompose(b, slices, Orientation::Columns)?;
    let (m, n) = (a.rows(), b.cols());
    let block = DEFAULT_BLOCK_K.min(backend.max_reduction());

    // Pairs sharing t + u have the same weight and are summed exactly.
    let max_group = 2 * slices;
    let mut groups: Vec<Option<Int64Matrix>> = vec![None; max_group + 1];
    let pairs = strategy.pairs(slices);
    for &(t, u) in &pairs {
        let part = int8_gemm(backend, &sa.slices()[t - 1], &sb.slices()[u - 1], block)?;
        match &mut groups[t + u] {
            Some(acc) => {
                for (x, &y) in acc.as_mut_slice().iter_mut().zip(part.as_slice()) {
                    *x += y;
                }
            }
            slot @ None => *slot = Some(part),
        }
    }

    let mut c = Matrix::zeros(m, n);
    for (g, group) in groups.iter().enumerate().rev() {
        let Some(w) = group else { continue };
        let weight = SLICE_BITS as i32 * g as i32;
        for j in 0..n {
            let eb = sb.exponents()[j];
            if eb == ZERO_LINE_EXPONENT {
                continue;
            }
            for i in 0..m {
                let ea = sa.exponents()[i];
                let v = w.get(i, j);
                if ea == ZERO_LINE_EXPONENT || v == 0 {
                    continue;
                }
                c[(i, j)] += libm::ldexp(v as f64, ea + eb - weight);
            }
        }
    }

    let flushed = |x: &Matrix, s: &SliceSet| {
        (0..x.cols())
            .flat_map(|j| (0..x.rows()).map(move |i| (i, j)))
            .filter(|&(i, j)| x[(i, j)] != 0.0 && s.digits_value(i, j) == 0)
            .count() as u64
    };
    let cost = EmulationCost {
        backend_gemms: pairs.len() as u64,
        elements_quantized: (a.len() + b.len()) as u64,
        elements_flushed: flushed(a, &sa) + flushed(b, &sb),
    };
    Ok((c, cost))
}
