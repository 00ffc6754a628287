//! CRT-based emulation (Ozaki scheme II).
//!
//! Rows of the left operand and columns of the right operand are scaled by a
//! power of two and rounded to integers of at most `nu` bits. The integer
//! product is computed exactly as one int8 GEMM per modulus on the residues,
//! then recovered with the Chinese remainder theorem and scaled back.
//!
//! `nu` is the largest value with `k * 2^(2 nu) < M / 2`, where `M` is the
//! product of the moduli, so the integer product always lies inside the
//! symmetric range that CRT reconstructs uniquely.

use std::sync::{Arc, OnceLock};

use crate::backend::{EmulationCost, Int8Matrix, IntegerBackend, DEFAULT_BLOCK_K};
use crate::error::{EmuError, Result};
use crate::matrix::{Matrix, Orientation};
use crate::wide::{WideInt, WideUint};

pub const MAX_MODULI: usize = 24;

/// Largest admissible modulus; residues must fit in int8.
pub const MAX_MODULUS: u32 = 256;

/// Exponent recorded for an all-zero line.
pub const ZERO_LINE_EXPONENT: i32 = i32::MIN;

const POW2_TABLE: usize = 128;

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn mod_inverse(a: u32, m: u32) -> u32 {
    let (mut r0, mut r1) = (m as i64, (a % m) as i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1);
    t0.rem_euclid(m as i64) as u32
}

/// Maps `r` in `[0, m)` to the centered representative.
///
/// Odd moduli give `[-(m-1)/2, (m-1)/2]`; even moduli give `[-m/2, m/2 - 1]`
/// so that residues modulo 256 fit in an `i8`.
#[inline]
pub fn center(r: u32, m: u32) -> i32 {
    let upper = if m % 2 == 1 { (m - 1) / 2 } else { m / 2 - 1 };
    if r > upper {
        r as i32 - m as i32
    } else {
        r as i32
    }
}

/// A validated set of pairwise-coprime moduli with reconstruction tables.
#[derive(Clone, Debug)]
pub struct ModuliSet {
    moduli: Vec<u32>,
    product: WideUint,
    /// `garner[i][j][x] = x * m_j^{-1} mod m_i` for `j < i`.
    garner: Vec<Vec<Vec<u8>>>,
    /// `reduce[i][x] = x mod m_i` for `x < 256`.
    reduce: Vec<[u8; 256]>,
    /// `pow2[i][s] = 2^s mod m_i`.
    pow2: Vec<[u32; POW2_TABLE]>,
}

impl ModuliSet {
    pub fn new(moduli: Vec<u32>) -> Result<Self> {
        if moduli.is_empty() || moduli.len() > MAX_MODULI {
            return Err(EmuError::InconsistentModuli(format!("need 1..={MAX_MODULI} moduli, got {}", moduli.len())));
        }
        for (i, &m) in moduli.iter().enumerate() {
            if !(2..=MAX_MODULUS).contains(&m) {
                return Err(EmuError::InconsistentModuli(format!("modulus {m} outside 2..={MAX_MODULUS}")));
            }
            if let Some(&p) = moduli[..i].iter().find(|&&p| gcd(p, m) != 1) {
                return Err(EmuError::InconsistentModuli(format!("moduli {p} and {m} are not coprime")));
            }
        }

        let mut product = WideUint::from_u64(1);
        for &m in &moduli {
            product.mul_add_small(m as u64, 0);
        }
        let garner = moduli
            .iter()
            .enumerate()
            .map(|(i, &mi)| {
                moduli[..i]
                    .iter()
                    .map(|&mj| {
                        let inv = mod_inverse(mj, mi);
                        (0..mi).map(|x| (x * inv % mi) as u8).collect()
                    })
                    .collect()
            })
            .collect();
        let reduce = moduli
            .iter()
            .map(|&m| {
                let mut t = [0u8; 256];
                for (x, v) in t.iter_mut().enumerate() {
                    *v = (x as u32 % m) as u8;
                }
                t
            })
            .collect();
        let pow2 = moduli
            .iter()
            .map(|&m| {
                let mut t = [0u32; POW2_TABLE];
                let mut p = 1 % m;
                for v in t.iter_mut() {
                    *v = p;
                    p = p * 2 % m;
                }
                t
            })
            .collect();
        Ok(Self { moduli, product, garner, reduce, pow2 })
    }

    pub fn moduli(&self) -> &[u32] {
        &self.moduli
    }

    pub fn len(&self) -> usize {
        self.moduli.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moduli.is_empty()
    }

    pub fn product(&self) -> &WideUint {
        &self.product
    }

    pub fn product_bits(&self) -> f64 {
        self.product.log2()
    }

    /// Residue of `mant * 2^shift` modulo `m_idx`, centered.
    #[inline]
    fn residue(&self, idx: usize, mant: i64, shift: u32) -> i8 {
        let m = self.moduli[idx];
        let r = (mant.rem_euclid(m as i64) as u32) * self.pow2[idx][shift as usize] % m;
        center(r, m) as i8
    }

    /// Mixed-radix (Garner) digits of the value with the given residues,
    /// each residue already reduced into `[0, m_i)`.
    #[inline]
    fn garner_digits(&self, residues: &[u32], digits: &mut [u32]) {
        for i in 0..self.moduli.len() {
            let mi = self.moduli[i];
            let mut t = residues[i];
            for j in 0..i {
                let vj = self.reduce[i][digits[j] as usize] as u32;
                t = if t >= vj { t - vj } else { t + mi - vj };
                t = self.garner[i][j][t as usize] as u32;
            }
            digits[i] = t;
        }
    }

    /// Unique value in the symmetric range congruent to the reduced residues.
    fn reconstruct_reduced(&self, residues: &[u32]) -> WideInt {
        let n = self.moduli.len();
        let mut digits = [0u32; MAX_MODULI];
        self.garner_digits(residues, &mut digits[..n]);
        let mut acc = WideUint::from_u64(digits[n - 1] as u64);
        for i in (0..n - 1).rev() {
            acc.mul_add_small(self.moduli[i] as u64, digits[i] as u64);
        }
        let complement = self.product.sub(&acc);
        if acc > complement {
            WideInt::new(true, complement)
        } else {
            WideInt::new(false, acc)
        }
    }
}

/// The greedy set of `count` pairwise-coprime moduli, largest first, from 256 down.
pub fn choose_moduli(count: usize) -> Result<ModuliSet> {
    if !(1..=MAX_MODULI).contains(&count) {
        return Err(EmuError::InvalidParameter(format!("moduli count {count} outside 1..={MAX_MODULI}")));
    }
    let mut moduli = Vec::with_capacity(count);
    let mut candidate = MAX_MODULUS;
    while moduli.len() < count {
        if moduli.iter().all(|&p| gcd(p, candidate) == 1) {
            moduli.push(candidate);
        }
        candidate -= 1;
    }
    ModuliSet::new(moduli)
}

/// Shared greedy moduli sets; building the tables costs more than small GEMMs.
pub fn cached_moduli(count: usize) -> Result<Arc<ModuliSet>> {
    static CACHE: [OnceLock<Arc<ModuliSet>>; MAX_MODULI] = [const { OnceLock::new() }; MAX_MODULI];
    if !(1..=MAX_MODULI).contains(&count) {
        return Err(EmuError::InvalidParameter(format!("moduli count {count} outside 1..={MAX_MODULI}")));
    }
    let slot = &CACHE[count - 1];
    if let Some(set) = slot.get() {
        return Ok(set.clone());
    }
    let set = Arc::new(choose_moduli(count)?);
    Ok(slot.get_or_init(|| set).clone())
}

fn ceil_log2(k: usize) -> i64 {
    if k <= 1 {
        0
    } else {
        (usize::BITS - (k - 1).leading_zeros()) as i64
    }
}

/// Bits per quantized operand entry for reduction length `k`.
pub fn quantization_bits(moduli: &ModuliSet, k: usize) -> Result<i32> {
    let c = ceil_log2(k);
    let mut nu = ((moduli.product_bits() - c as f64 - 1.0) / 2.0).floor() as i64;
    // Enforce 2^(c + 2nu + 1) < M exactly; only a power-of-two M can sit on the boundary.
    let mbits = moduli.product().bits() as i64;
    let pow2_product = moduli.product().limbs().iter().map(|l| l.count_ones()).sum::<u32>() == 1;
    let limit = if pow2_product { mbits - 1 } else { mbits };
    while nu > 0 && c + 2 * nu + 1 >= limit {
        nu -= 1;
    }
    if nu <= 0 {
        return Err(EmuError::ModuliBudgetTooSmall { moduli: moduli.len(), k, nu });
    }
    Ok(nu as i32)
}

/// A quantized integer `mant * 2^shift`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QuantizedInt {
    pub mant: i64,
    pub shift: u32,
}

impl QuantizedInt {
    pub fn to_i128(self) -> i128 {
        (self.mant as i128) << self.shift
    }
}

/// An operand scaled line by line to integers of at most `nu` bits.
#[derive(Clone, Debug)]
pub struct QuantizedMatrix {
    orientation: Orientation,
    rows: usize,
    cols: usize,
    nu: i32,
    exponents: Vec<i32>,
    values: Vec<QuantizedInt>,
    flushed: usize,
}

impl QuantizedMatrix {
    /// Nonzero entries that rounded to the integer zero.
    pub fn flushed(&self) -> usize {
        self.flushed
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nu(&self) -> i32 {
        self.nu
    }

    /// Smallest `e` with `max|line| <= 2^e`, or [`ZERO_LINE_EXPONENT`].
    pub fn exponents(&self) -> &[i32] {
        &self.exponents
    }

    pub fn integer(&self, i: usize, j: usize) -> QuantizedInt {
        self.values[i + j * self.rows]
    }

    /// The represented value `integer * 2^(e - nu)`.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        let e = self.exponents[self.orientation.line_of(i, j)];
        if e == ZERO_LINE_EXPONENT {
            return 0.0;
        }
        let q = self.integer(i, j);
        libm::ldexp(q.mant as f64, e - self.nu + q.shift as i32)
    }

    pub fn dequantize(&self) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| self.value(i, j))
    }

    pub fn residues(&self, moduli: &ModuliSet) -> ResidueSet {
        let residues = (0..moduli.len())
            .map(|idx| {
                Int8Matrix::from_fn(self.rows, self.cols, |i, j| {
                    let q = self.integer(i, j);
                    moduli.residue(idx, q.mant, q.shift)
                })
            })
            .collect();
        ResidueSet { moduli: moduli.moduli().to_vec(), residues }
    }
}

fn line_exponent(max: f64) -> i32 {
    if max == 0.0 {
        return ZERO_LINE_EXPONENT;
    }
    let (f, e) = libm::frexp(max);
    if f == 0.5 {
        e - 1
    } else {
        e
    }
}

/// Scales each line of `m` by `2^(nu - e)` and rounds to integers.
pub fn quantize(m: &Matrix, moduli: &ModuliSet, k: usize, orientation: Orientation) -> Result<QuantizedMatrix> {
    if !m.is_finite() {
        return Err(EmuError::NonFiniteInput);
    }
    let nu = quantization_bits(moduli, k)?;
    let exponents: Vec<i32> = m.line_max_abs(orientation).into_iter().map(line_exponent).collect();
    let mut values = Vec::with_capacity(m.len());
    let mut flushed = 0;
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            let e = exponents[orientation.line_of(i, j)];
            let x = m[(i, j)];
            if e == ZERO_LINE_EXPONENT || x == 0.0 {
                values.push(QuantizedInt::default());
                continue;
            }
            let y = libm::ldexp(x, nu - e);
            if y.abs() < 0.5 {
                flushed += 1;
            }
            let q = if y.abs() < 4_611_686_018_427_387_904.0 {
                QuantizedInt { mant: y.round() as i64, shift: 0 }
            } else {
                // Already an integer: |y| >= 2^62 exceeds the 53-bit mantissa.
                let (f, ex) = libm::frexp(y);
                QuantizedInt { mant: libm::ldexp(f, 53) as i64, shift: (ex - 53) as u32 }
            };
            values.push(q);
        }
    }
    Ok(QuantizedMatrix { orientation, rows: m.rows(), cols: m.cols(), nu, exponents, values, flushed })
}

/// Centered int8 residues of an integer matrix, one matrix per modulus.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidueSet {
    pub moduli: Vec<u32>,
    pub residues: Vec<Int8Matrix>,
}

/// Residues of the exact integer product, one int8 GEMM per modulus.
pub fn residue_gemm<B: IntegerBackend + ?Sized>(a: &ResidueSet, b: &ResidueSet, backend: &B) -> Result<ResidueSet> {
    if a.moduli != b.moduli || a.residues.len() != a.moduli.len() || b.residues.len() != b.moduli.len() {
        return Err(EmuError::InconsistentModuli("operands carry different moduli".into()));
    }
    let block = DEFAULT_BLOCK_K.min(backend.max_reduction());
    let mut out = Vec::with_capacity(a.moduli.len());
    for ((&m, ra), rb) in a.moduli.iter().zip(&a.residues).zip(&b.residues) {
        if ra.cols() != rb.rows() {
            return Err(EmuError::DimensionMismatch(format!(
                "residue gemm {}x{} times {}x{}",
                ra.rows(),
                ra.cols(),
                rb.rows(),
                rb.cols()
            )));
        }
        let (rows, cols, k) = (ra.rows(), rb.cols(), ra.cols());
        let m = m as i64;
        let mut acc = vec![0i64; rows * cols];
        let mut start = 0;
        while start < k || (k == 0 && start == 0) {
            let range = start..(start + block).min(k);
            let part = if range.len() == k {
                backend.gemm_block(ra, rb)?
            } else {
                backend.gemm_block(&ra.column_block(range.clone()), &rb.row_block(range.clone()))?
            };
            for (x, &p) in acc.iter_mut().zip(part.as_slice()) {
                *x = (*x + p as i64).rem_euclid(m);
            }
            if k == 0 {
                break;
            }
            start = range.end;
        }
        let data = acc.into_iter().map(|r| center(r as u32, m as u32) as i8).collect();
        out.push(Int8Matrix::from_col_major(rows, cols, data)?);
    }
    Ok(ResidueSet { moduli: a.moduli.clone(), residues: out })
}

/// Recovers the integer in the symmetric range with the given residues.
pub fn crt_reconstruct(residues: &[i64], moduli: &ModuliSet) -> Result<WideInt> {
    if residues.len() != moduli.len() {
        return Err(EmuError::InconsistentModuli(format!("{} residues for {} moduli", residues.len(), moduli.len())));
    }
    let reduced: Vec<u32> =
        residues.iter().zip(moduli.moduli()).map(|(&r, &m)| r.rem_euclid(m as i64) as u32).collect();
    Ok(moduli.reconstruct_reduced(&reduced))
}

/// Emulated `a * b` through `moduli_count` greedy moduli.
pub fn ozaki2_gemm<B: IntegerBackend + ?Sized>(
    a: &Matrix,
    b: &Matrix,
    moduli_count: usize,
    backend: &B,
) -> Result<(Matrix, EmulationCost)> {
    let moduli = cached_moduli(moduli_count)?;
    ozaki2_gemm_with(a, b, &moduli, backend)
}

/// Emulated `a * b` with an explicit moduli set.
pub fn ozaki2_gemm_with<B: IntegerBackend + ?Sized>(
    a: &Matrix,
    b: &Matrix,
    moduli: &ModuliSet,
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
    let k = a.cols();
    let qa = quantize(a, moduli, k, Orientation::Rows)?;
    let qb = quantize(b, moduli, k, Orientation::Columns)?;
    let rc = residue_gemm(&qa.residues(moduli), &qb.residues(moduli), backend)?;

    let (m, n) = (a.rows(), b.cols());
    let nu = qa.nu();
    let mut c = Matrix::zeros(m, n);
    let mut reduced = vec![0u32; moduli.len()];
    for j in 0..n {
        let eb = qb.exponents()[j];
        if eb == ZERO_LINE_EXPONENT {
            continue;
        }
        for i in 0..m {
            let ea = qa.exponents()[i];
            if ea == ZERO_LINE_EXPONENT {
                continue;
            }
            for ((r, res), &md) in reduced.iter_mut().zip(&rc.residues).zip(moduli.moduli()) {
                *r = (res.get(i, j) as i32).rem_euclid(md as i32) as u32;
            }
            c[(i, j)] = moduli.reconstruct_reduced(&reduced).to_f64_scaled(ea + eb - 2 * nu);
        }
    }

    let cost = EmulationCost {
        backend_gemms: moduli.len() as u64,
        elements_quantized: (a.len() + b.len()) as u64,
        elements_flushed: (qa.flushed() + qb.flushed()) as u64,
    };
    Ok((c, cost))
}
