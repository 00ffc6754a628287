#![allow(dead_code)]
// Fortran BLAS entry points resolved at load time; shared by the driver binaries.

use std::os::raw::{c_char, c_int};

use ozgemm::Complex64;

extern "C" {
    pub fn dgemm_(
        transa: *const c_char,
        transb: *const c_char,
        m: *const c_int,
        n: *const c_int,
        k: *const c_int,
        alpha: *const f64,
        a: *const f64,
        lda: *const c_int,
        b: *const f64,
        ldb: *const c_int,
        beta: *const f64,
        c: *mut f64,
        ldc: *const c_int,
    );
    pub fn zgemm_(
        transa: *const c_char,
        transb: *const c_char,
        m: *const c_int,
        n: *const c_int,
        k: *const c_int,
        alpha: *const Complex64,
        a: *const Complex64,
        lda: *const c_int,
        b: *const Complex64,
        ldb: *const c_int,
        beta: *const Complex64,
        c: *mut Complex64,
        ldc: *const c_int,
    );
}

#[allow(clippy::too_many_arguments)]
pub fn dgemm(
    ta: u8,
    tb: u8,
    m: usize,
    n: usize,
    k: usize,
    alpha: f64,
    a: &[f64],
    lda: usize,
    b: &[f64],
    ldb: usize,
    beta: f64,
    c: &mut [f64],
    ldc: usize,
) {
    let (ta, tb) = (ta as c_char, tb as c_char);
    let dims = [m as c_int, n as c_int, k as c_int, lda as c_int, ldb as c_int, ldc as c_int];
    unsafe {
        dgemm_(
            &ta,
            &tb,
            &dims[0],
            &dims[1],
            &dims[2],
            &alpha,
            a.as_ptr(),
            &dims[3],
            b.as_ptr(),
            &dims[4],
            &beta,
            c.as_mut_ptr(),
            &dims[5],
        );
    }
}

#[allow(clippy::too_many_arguments)]
pub fn zgemm(
    ta: u8,
    tb: u8,
    m: usize,
    n: usize,
    k: usize,
    alpha: Complex64,
    a: &[Complex64],
    lda: usize,
    b: &[Complex64],
    ldb: usize,
    beta: Complex64,
    c: &mut [Complex64],
    ldc: usize,
) {
    let (ta, tb) = (ta as c_char, tb as c_char);
    let dims = [m as c_int, n as c_int, k as c_int, lda as c_int, ldb as c_int, ldc as c_int];
    unsafe {
        zgemm_(
            &ta,
            &tb,
            &dims[0],
            &dims[1],
            &dims[2],
            &alpha,
            a.as_ptr(),
            &dims[3],
            b.as_ptr(),
            &dims[4],
            &beta,
            c.as_mut_ptr(),
            &dims[5],
        );
    }
}
