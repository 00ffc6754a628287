#![allow(dead_code)]

use num_bigint::BigInt;
use ozgemm::oracle::{extended_gemm, WideIntMatrix};
use ozgemm::{Int8Matrix, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut r = rng(seed);
    Matrix::random_uniform(rows, cols, -1.0, 1.0, &mut r)
}

pub fn random_int8(rows: usize, cols: usize, r: &mut ChaCha8Rng) -> Int8Matrix {
    Int8Matrix::from_fn(rows, cols, |_, _| r.random_range(-128..=127i32) as i8)
}

pub fn int8_to_wide(m: &Int8Matrix) -> WideIntMatrix {
    WideIntMatrix::from_fn(m.rows(), m.cols(), |i, j| BigInt::from(m.get(i, j)))
}

pub fn integer_matrix(rows: usize, cols: usize, bits: u32, r: &mut ChaCha8Rng) -> Matrix {
    let lim = (1i64 << bits) - 1;
    Matrix::from_fn(rows, cols, |_, _| r.random_range(-lim..=lim) as f64)
}

/// Normwise error of `c` against the double-word oracle product.
pub fn oracle_error(c: &Matrix, a: &Matrix, b: &Matrix) -> f64 {
    let ext = extended_gemm(a, b).unwrap();
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    for j in 0..c.cols() {
        for i in 0..c.rows() {
            diff = diff.max(((c[(i, j)] - ext.hi[(i, j)]) - ext.lo[(i, j)]).abs());
            scale = scale.max(ext.hi[(i, j)].abs());
        }
    }
    diff / scale
}

pub fn bits(m: &Matrix) -> Vec<u64> {
    m.as_slice().iter().map(|x| x.to_bits()).collect()
}
