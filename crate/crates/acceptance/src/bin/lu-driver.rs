//! Inverts `zI - H` at contour nodes with the trailing updates sent through
//! `zgemm_`, and writes every inverse.
//!
//! Usage: `lu-driver OUTPUT N BLOCK NODES`. Prints `inversions=<count> updates=<count>`.

#[cfg(system_blas)]
#[path = "../blas.rs"]
mod blas;

#[cfg(system_blas)]
fn main() {
    use ozgemm::workload::{blocked_lu_invert, GreenConfig};
    use ozgemm::{Complex64, ComplexMatrix};
    use ozgemm_acceptance::RecordWriter;

    let args: Vec<String> = std::env::args().collect();
    if args.len() != 5 {
        eprintln!("usage: lu-driver OUTPUT N BLOCK NODES");
        std::process::exit(2);
    }
    let num = |s: &str| s.parse::<usize>().expect("positive integer");
    let (n, nb, nodes) = (num(&args[2]), num(&args[3]), num(&args[4]));
    let mut cfg = GreenConfig::with_window(n, nodes, -1.1, 0.2, 1);
    cfg.block = nb;
    let h = cfg.hamiltonian().expect("hamiltonian");
    let contour = cfg.contour().expect("contour");
    let mut out = RecordWriter::create(&args[1]).expect("output file");
    let mut updates = 0;
    for &z in &contour.nodes {
        let m = ComplexMatrix::from_fn(n, n, |i, j| if i == j { z - h.h[(i, j)] } else { -h.h[(i, j)] });
        let inv = blocked_lu_invert(&m, nb, |a, b| {
            let (rows, k, cols) = (a.rows(), a.cols(), b.cols());
            let mut c = vec![Complex64::new(0.0, 0.0); rows * cols];
            let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
            blas::zgemm(b'N', b'N', rows, cols, k, one, a.as_slice(), rows, b.as_slice(), k, zero, &mut c, rows);
            ComplexMatrix::from_col_major(rows, cols, c)
        })
        .expect("inversion");
        updates += inv.trailing_updates;
        let flat: Vec<f64> = inv.inverse.as_slice().iter().flat_map(|x| [x.re, x.im]).collect();
        out.write(&flat).expect("write");
    }
    out.finish().expect("flush");
    println!("inversions={} updates={updates}", contour.len());
}

#[cfg(not(system_blas))]
fn main() {
    eprintln!("lu-driver: built without a system BLAS to link against");
    std::process::exit(2);
}
