//! Drop-in `dgemm_`/`zgemm_` (and unsuffixed aliases) for dynamically linked
//! Fortran-convention BLAS callers.
//!
//! Load it ahead of the system BLAS with `LD_PRELOAD`; every call is routed
//! through the `GEMM_EMU_*`-configured dispatcher of `ozgemm`.

use std::os::raw::{c_char, c_int};

use ozgemm::{Complex64, ComplexMatrix, Dispatcher, EmulationMode, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Op {
    None,
    Transpose,
    ConjTranspose,
}

fn parse_op(flag: c_char) -> Option<Op> {
    match (flag as u8).to_ascii_uppercase() {
        b'N' => Some(Op::None),
        b'T' => Some(Op::Transpose),
        b'C' => Some(Op::ConjTranspose),
        _ => None,
    }
}

/// Arguments of one GEMM call after dereferencing.
#[derive(Clone, Copy, Debug)]
struct Call {
    transa: c_char,
    transb: c_char,
    m: c_int,
    n: c_int,
    k: c_int,
    lda: c_int,
    ldb: c_int,
    ldc: c_int,
}

/// Index of the first invalid argument, numbered as in reference BLAS.
fn check(call: &Call) -> Result<(Op, Op), c_int> {
    let ta = parse_op(call.transa).ok_or(1)?;
    let tb = parse_op(call.transb).ok_or(2)?;
    if call.m < 0 {
        return Err(3);
    }
    if call.n < 0 {
        return Err(4);
    }
    if call.k < 0 {
        return Err(5);
    }
    let nrowa = if ta == Op::None { call.m } else { call.k };
    let nrowb = if tb == Op::None { call.k } else { call.n };
    if call.lda < nrowa.max(1) {
        return Err(8);
    }
    if call.ldb < nrowb.max(1) {
        return Err(10);
    }
    if call.ldc < call.m.max(1) {
        return Err(13);
    }
    Ok((ta, tb))
}

fn xerbla(name: &str, info: c_int) {
    eprintln!(" ** On entry to {name:<6} parameter number {info:>2} had an illegal value");
}

/// `op(X)` as a `rows x cols` matrix read from column-major storage with leading dimension `ld`.
unsafe fn load<T: Copy>(ptr: *const T, ld: usize, rows: usize, cols: usize, op: Op, conj: impl Fn(T) -> T) -> Vec<T> {
    let mut out = Vec::with_capacity(rows * cols);
    for j in 0..cols {
        for i in 0..rows {
            out.push(match op {
                Op::None => *ptr.add(i + j * ld),
                Op::Transpose => *ptr.add(j + i * ld),
                Op::ConjTranspose => conj(*ptr.add(j + i * ld)),
            });
        }
    }
    out
}

unsafe fn load_c<T: Copy>(ptr: *const T, ld: usize, rows: usize, cols: usize, zero: T, read: bool) -> Vec<T> {
    if !read {
        return vec![zero; rows * cols];
    }
    load(ptr, ld, rows, cols, Op::None, |x| x)
}

unsafe fn store<T: Copy>(ptr: *mut T, ld: usize, rows: usize, values: &[T]) {
    for (idx, &v) in values.iter().enumerate() {
        let (i, j) = (idx % rows, idx / rows);
        *ptr.add(i + j * ld) = v;
    }
}

fn native_dispatcher() -> Dispatcher {
    Dispatcher::new(EmulationMode::Native).expect("native mode is valid")
}

#[allow(clippy::too_many_arguments)]
unsafe fn dgemm_impl(
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
) {
    let call = Call { transa: *transa, transb: *transb, m: *m, n: *n, k: *k, lda: *lda, ldb: *ldb, ldc: *ldc };
    let (ta, tb) = match check(&call) {
        Ok(ops) => ops,
        Err(info) => return xerbla("DGEMM", info),
    };
    let (alpha, beta) = (*alpha, *beta);
    let (m, n, k) = (call.m as usize, call.n as usize, call.k as usize);
    if m == 0 || n == 0 || ((alpha == 0.0 || k == 0) && beta == 1.0) {
        return;
    }
    let read_ab = alpha != 0.0 && k > 0;
    let (am, bm) = if read_ab {
        (load(a, call.lda as usize, m, k, ta, |x| x), load(b, call.ldb as usize, k, n, tb, |x| x))
    } else {
        (vec![0.0; m * k], vec![0.0; k * n])
    };
    let am = Matrix::from_col_major(m, k, am).expect("shape");
    let bm = Matrix::from_col_major(k, n, bm).expect("shape");
    let mut cm = Matrix::from_col_major(m, n, load_c(c, call.ldc as usize, m, n, 0.0, beta != 0.0)).expect("shape");
    let dispatcher = ozgemm::dispatch::global_dispatcher();
    if let Err(e) = dispatcher.gemm_update(alpha, &am, &bm, beta, &mut cm) {
        eprintln!("ozgemm: DGEMM emulation failed ({e}); computing natively");
        native_dispatcher().gemm_update(alpha, &am, &bm, beta, &mut cm).expect("native gemm");
    }
    store(c, call.ldc as usize, m, cm.as_slice());
}

#[allow(clippy::too_many_arguments)]
unsafe fn zgemm_impl(
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
) {
    let call = Call { transa: *transa, transb: *transb, m: *m, n: *n, k: *k, lda: *lda, ldb: *ldb, ldc: *ldc };
    let (ta, tb) = match check(&call) {
        Ok(ops) => ops,
        Err(info) => return xerbla("ZGEMM", info),
    };
    let (alpha, beta) = (*alpha, *beta);
    let (zero, one) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    let (m, n, k) = (call.m as usize, call.n as usize, call.k as usize);
    if m == 0 || n == 0 || ((alpha == zero || k == 0) && beta == one) {
        return;
    }
    let read_ab = alpha != zero && k > 0;
    let (am, bm) = if read_ab {
        (
            load(a, call.lda as usize, m, k, ta, |x: Complex64| x.conj()),
            load(b, call.ldb as usize, k, n, tb, |x: Complex64| x.conj()),
        )
    } else {
        (vec![zero; m * k], vec![zero; k * n])
    };
    let am = ComplexMatrix::from_col_major(m, k, am).expect("shape");
    let bm = ComplexMatrix::from_col_major(k, n, bm).expect("shape");
    let mut cm =
        ComplexMatrix::from_col_major(m, n, load_c(c, call.ldc as usize, m, n, zero, beta != zero)).expect("shape");
    let dispatcher = ozgemm::dispatch::global_dispatcher();
    if let Err(e) = dispatcher.zgemm_update(alpha, &am, &bm, beta, &mut cm) {
        eprintln!("ozgemm: ZGEMM emulation failed ({e}); computing natively");
        native_dispatcher().zgemm_update(alpha, &am, &bm, beta, &mut cm).expect("native zgemm");
    }
    store(c, call.ldc as usize, m, cm.as_slice());
}

/// Fortran BLAS `DGEMM`. Hidden character-length arguments are ignored.
///
/// # Safety
/// All pointers must be valid for the extents the BLAS contract implies.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn dgemm_(
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
) {
    dgemm_impl(transa, transb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc)
}

/// Alias of [`dgemm_`].
///
/// # Safety
/// As for [`dgemm_`].
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn dgemm(
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
) {
    dgemm_impl(transa, transb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc)
}

/// Fortran BLAS `ZGEMM` on interleaved `COMPLEX*16` data.
///
/// # Safety
/// All pointers must be valid for the extents the BLAS contract implies.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn zgemm_(
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
) {
    zgemm_impl(transa, transb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc)
}

/// Alias of [`zgemm_`].
///
/// # Safety
/// As for [`zgemm_`].
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn zgemm(
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
) {
    zgemm_impl(transa, transb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc)
}
