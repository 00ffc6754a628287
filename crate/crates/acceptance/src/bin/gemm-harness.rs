//! Calls `dgemm_` and `zgemm_` through the dynamic linker on a fixed set of
//! shapes, transposes, strides and scalars, and writes every result.
//!
//! Usage: `gemm-harness OUTPUT`. Prints `dgemm=<calls> zgemm=<calls>`.

#[cfg(system_blas)]
#[path = "../blas.rs"]
mod blas;

#[cfg(system_blas)]
fn main() {
    use ozgemm::Complex64;
    use ozgemm_acceptance::RecordWriter;
    use rand::{Rng, SeedableRng};

    let path = std::env::args().nth(1).expect("usage: gemm-harness OUTPUT");
    let mut out = RecordWriter::create(&path).expect("output file");
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    // (transa, transb, m, n, k, pad, alpha, beta)
    type Case = (u8, u8, usize, usize, usize, usize, f64, f64);
    let cases: [Case; 8] = [
        (b'N', b'N', 64, 64, 64, 0, 1.0, 0.0),
        (b'T', b'N', 37, 53, 91, 3, 1.0, 0.0),
        (b'N', b'T', 96, 17, 40, 0, -0.5, 1.0),
        (b'T', b'T', 8, 120, 33, 5, 2.0, 0.25),
        (b'C', b'N', 50, 50, 128, 1, 1.0, -1.0),
        (b'N', b'N', 1, 77, 200, 0, 1.0, 0.0),
        (b'N', b'N', 77, 1, 200, 2, 0.75, 0.0),
        (b'n', b't', 45, 45, 1, 0, 1.0, 1.0),
    ];
    let rows_of = |op: u8, r: usize, c: usize| if op.eq_ignore_ascii_case(&b'N') { (r, c) } else { (c, r) };

    for &(ta, tb, m, n, k, pad, alpha, beta) in &cases {
        let (ar, ac) = rows_of(ta, m, k);
        let (br, bc) = rows_of(tb, k, n);
        let (lda, ldb, ldc) = (ar + pad, br + pad, m + pad);
        let a: Vec<f64> = (0..lda * ac).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..ldb * bc).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut c: Vec<f64> = (0..ldc * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        blas::dgemm(ta, tb, m, n, k, alpha, &a, lda, &b, ldb, beta, &mut c, ldc);
        let packed: Vec<f64> = (0..n).flat_map(|j| c[j * ldc..j * ldc + m].to_vec()).collect();
        out.write(&packed).expect("write");
    }

    let z =
        |rng: &mut rand_chacha::ChaCha8Rng| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    for &(ta, tb, m, n, k, pad, alpha, beta) in &cases {
        let (ar, ac) = rows_of(ta, m, k);
        let (br, bc) = rows_of(tb, k, n);
        let (lda, ldb, ldc) = (ar + pad, br + pad, m + pad);
        let a: Vec<Complex64> = (0..lda * ac).map(|_| z(&mut rng)).collect();
        let b: Vec<Complex64> = (0..ldb * bc).map(|_| z(&mut rng)).collect();
        let mut c: Vec<Complex64> = (0..ldc * n).map(|_| z(&mut rng)).collect();
        let (alpha, beta) = (Complex64::new(alpha, 0.5 * alpha), Complex64::new(beta, -0.25 * beta));
        blas::zgemm(ta, tb, m, n, k, alpha, &a, lda, &b, ldb, beta, &mut c, ldc);
        let packed: Vec<f64> = (0..n).flat_map(|j| c[j * ldc..j * ldc + m].iter().flat_map(|x| [x.re, x.im])).collect();
        out.write(&packed).expect("write");
    }
    out.finish().expect("flush");
    println!("dgemm={} zgemm={}", cases.len(), cases.len());
}

#[cfg(not(system_blas))]
fn main() {
    eprintln!("gemm-harness: built without a system BLAS to link against");
    std::process::exit(2);
}
