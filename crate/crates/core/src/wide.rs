//! Fixed-width 256-bit integers for CRT reconstruction.
//!
//! The moduli product for 24 moduli of at most 256 is below `2^192`, so four
//! 64-bit limbs are enough for every value the reconstruction produces.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};

const LIMBS: usize = 4;

/// Unsigned 256-bit integer, little-endian limbs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct WideUint([u64; LIMBS]);

impl WideUint {
    pub const ZERO: Self = Self([0; LIMBS]);

    pub fn from_u64(v: u64) -> Self {
        Self([v, 0, 0, 0])
    }

    pub fn limbs(&self) -> [u64; LIMBS] {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&l| l == 0)
    }

    /// `self = self * mul + add`. Panics if the result does not fit in 256 bits.
    #[inline]
    pub fn mul_add_small(&mut self, mul: u64, add: u64) {
        let mut carry = add as u128;
        for limb in self.0.iter_mut() {
            let t = (*limb as u128) * (mul as u128) + carry;
            *limb = t as u64;
            carry = t >> 64;
        }
        assert!(carry == 0, "256-bit overflow");
    }

    /// `self - other`; requires `self >= other`.
    pub fn sub(&self, other: &Self) -> Self {
        let mut out = [0u64; LIMBS];
        let mut borrow = false;
        for i in 0..LIMBS {
            let (d1, b1) = self.0[i].overflowing_sub(other.0[i]);
            let (d2, b2) = d1.overflowing_sub(borrow as u64);
            out[i] = d2;
            borrow = b1 || b2;
        }
        debug_assert!(!borrow, "negative result in WideUint::sub");
        Self(out)
    }

    /// Number of significant bits (0 for zero).
    pub fn bits(&self) -> u32 {
        for i in (0..LIMBS).rev() {
            if self.0[i] != 0 {
                return 64 * i as u32 + (64 - self.0[i].leading_zeros());
            }
        }
        0
    }

    #[inline]
    fn bit(&self, k: u32) -> bool {
        let (limb, off) = ((k / 64) as usize, k % 64);
        limb < LIMBS && (self.0[limb] >> off) & 1 == 1
    }

    fn any_below(&self, k: u32) -> bool {
        let (limb, off) = ((k / 64) as usize, k % 64);
        if self.0[..limb.min(LIMBS)].iter().any(|&l| l != 0) {
            return true;
        }
        limb < LIMBS && off > 0 && self.0[limb] & ((1u64 << off) - 1) != 0
    }

    /// Bits `[shift, shift + 64)` as a `u64`.
    fn window(&self, shift: u32) -> u64 {
        let (limb, off) = ((shift / 64) as usize, shift % 64);
        let lo = if limb < LIMBS { self.0[limb] >> off } else { 0 };
        let hi = if off > 0 && limb + 1 < LIMBS { self.0[limb + 1] << (64 - off) } else { 0 };
        lo | hi
    }

    /// `self * 2^exp` rounded to nearest-even FP64 (one rounding unless the
    /// result is subnormal).
    pub fn to_f64_scaled(&self, exp: i32) -> f64 {
        let bits = self.bits();
        if bits == 0 {
            return 0.0;
        }
        if bits <= 53 {
            return libm::ldexp(self.0[0] as f64, exp);
        }
        let shift = bits - 53;
        let mut top = self.window(shift) & ((1u64 << 53) - 1);
        if self.bit(shift - 1) && (self.any_below(shift - 1) || top & 1 == 1) {
            top += 1;
        }
        libm::ldexp(top as f64, exp.saturating_add(shift as i32))
    }

    pub fn log2(&self) -> f64 {
        let bits = self.bits();
        if bits <= 64 {
            return (self.0[0] as f64).log2();
        }
        let shift = bits - 64;
        (self.window(shift) as f64).log2() + shift as f64
    }

    pub fn to_biguint(&self) -> BigUint {
        let words: Vec<u32> = self.0.iter().flat_map(|&l| [l as u32, (l >> 32) as u32]).collect();
        BigUint::new(words)
    }
}

impl Ord for WideUint {
    fn cmp(&self, other: &Self) -> Ordering {
        for i in (0..LIMBS).rev() {
            match self.0[i].cmp(&other.0[i]) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for WideUint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Signed 256-bit integer in sign-magnitude form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct WideInt {
    negative: bool,
    magnitude: WideUint,
}

impl WideInt {
    pub fn new(negative: bool, magnitude: WideUint) -> Self {
        Self { negative: negative && !magnitude.is_zero(), magnitude }
    }

    pub fn from_i64(v: i64) -> Self {
        Self::new(v < 0, WideUint::from_u64(v.unsigned_abs()))
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn magnitude(&self) -> &WideUint {
        &self.magnitude
    }

    pub fn to_f64_scaled(&self, exp: i32) -> f64 {
        let v = self.magnitude.to_f64_scaled(exp);
        if self.negative {
            -v
        } else {
            v
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_f64_scaled(0)
    }

    pub fn to_bigint(&self) -> BigInt {
        let sign = if self.negative { Sign::Minus } else { Sign::Plus };
        BigInt::from_biguint(sign, self.magnitude.to_biguint())
    }
}

impl fmt::Display for WideInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_bigint())
    }
}
