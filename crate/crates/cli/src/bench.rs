//! `bench-gemm`: accuracy against the double-word oracle and backend op counts.

use std::path::Path;
use std::time::Instant;

use ozgemm::oracle::{extended_gemm, DoubleWordMatrix};
use ozgemm::{ComplexMatrix, Dispatcher, EmulationMode, Matrix, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::modes::{environment, parse_mode, parse_modes};
use crate::BenchArgs;

pub const BENCH_HEADER: [&str; 8] =
    ["mode", "param", "n", "max_rel_err", "median_rel_err", "backend_gemms", "wall_ns", "seed"];

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub mode: EmulationMode,
    pub n: usize,
    pub max_rel_err: f64,
    pub median_rel_err: f64,
    pub backend_gemms: u64,
    pub wall_ns: u64,
    pub seed: u64,
}

impl BenchRecord {
    fn fields(&self) -> [String; 8] {
        [
            self.mode.label().to_string(),
            self.mode.param().to_string(),
            self.n.to_string(),
            format!("{:e}", self.max_rel_err),
            format!("{:e}", self.median_rel_err),
            self.backend_gemms.to_string(),
            self.wall_ns.to_string(),
            self.seed.to_string(),
        ]
    }
}

/// Entrywise `|c - exact| / |exact|`; entries whose exact value is zero use
/// the absolute error.
fn entry_errors(c: &Matrix, exact: &DoubleWordMatrix, out: &mut Vec<f64>) {
    for j in 0..c.cols() {
        for i in 0..c.rows() {
            let (hi, lo) = (exact.hi[(i, j)], exact.lo[(i, j)]);
            let diff = ((c[(i, j)] - hi) - lo).abs();
            out.push(if hi == 0.0 { diff } else { diff / hi.abs() });
        }
    }
}

fn hcat(x: &Matrix, y: &Matrix) -> Matrix {
    Matrix::from_fn(x.rows(), x.cols() + y.cols(), |i, j| if j < x.cols() { x[(i, j)] } else { y[(i, j - x.cols())] })
}

fn vcat(x: &Matrix, y: &Matrix) -> Matrix {
    Matrix::from_fn(x.rows() + y.rows(), x.cols(), |i, j| if i < x.rows() { x[(i, j)] } else { y[(i - x.rows(), j)] })
}

/// Real and imaginary parts of a complex product, each as one real product
/// over the doubled inner dimension so the oracle rounds it once.
fn complex_oracle(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<(DoubleWordMatrix, DoubleWordMatrix)> {
    let (ar, ai, br, bi) = (a.re(), a.im(), b.re(), b.im());
    let re = extended_gemm(&hcat(&ar, &ai.map(|x| -x)), &vcat(&br, &bi))?;
    let im = extended_gemm(&hcat(&ar, &ai), &vcat(&bi, &br))?;
    Ok((re, im))
}

fn summarize(mut errs: Vec<f64>) -> (f64, f64) {
    errs.sort_by(f64::total_cmp);
    let max = errs.last().copied().unwrap_or(0.0);
    let median = match errs.len() {
        0 => 0.0,
        l if l % 2 == 1 => errs[l / 2],
        l => 0.5 * (errs[l / 2 - 1] + errs[l / 2]),
    };
    (max, median)
}

/// One record per `(mode, size, seed)`, in that nesting order: sizes outer,
/// seeds, then modes.
pub fn bench_records(
    sizes: &[usize],
    modes: &[EmulationMode],
    seeds: &[u64],
    complex: bool,
) -> Result<Vec<BenchRecord>> {
    let mut records = Vec::new();
    for &n in sizes {
        for &seed in seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            if complex {
                let a = ComplexMatrix::random_uniform(n, n, -1.0, 1.0, &mut rng);
                let b = ComplexMatrix::random_uniform(n, n, -1.0, 1.0, &mut rng);
                let (re, im) = complex_oracle(&a, &b)?;
                for &mode in modes {
                    let d = Dispatcher::new(mode)?;
                    let t = Instant::now();
                    let c = d.zgemm(&a, &b)?;
                    let wall_ns = t.elapsed().as_nanos() as u64;
                    let mut errs = Vec::with_capacity(2 * n * n);
                    entry_errors(&c.re(), &re, &mut errs);
                    entry_errors(&c.im(), &im, &mut errs);
                    let (max_rel_err, median_rel_err) = summarize(errs);
                    let backend_gemms = d.stats().backend_gemms;
                    records.push(BenchRecord { mode, n, max_rel_err, median_rel_err, backend_gemms, wall_ns, seed });
                }
            } else {
                let a = Matrix::random_uniform(n, n, -1.0, 1.0, &mut rng);
                let b = Matrix::random_uniform(n, n, -1.0, 1.0, &mut rng);
                let exact = extended_gemm(&a, &b)?;
                for &mode in modes {
                    let d = Dispatcher::new(mode)?;
                    let t = Instant::now();
                    let c = d.gemm(&a, &b)?;
                    let wall_ns = t.elapsed().as_nanos() as u64;
                    let mut errs = Vec::with_capacity(n * n);
                    entry_errors(&c, &exact, &mut errs);
                    let (max_rel_err, median_rel_err) = summarize(errs);
                    let backend_gemms = d.stats().backend_gemms;
                    records.push(BenchRecord { mode, n, max_rel_err, median_rel_err, backend_gemms, wall_ns, seed });
                }
            }
        }
    }
    Ok(records)
}

pub fn write_bench_csv(path: &Path, records: &[BenchRecord]) -> std::result::Result<(), Box<dyn std::error::Error>> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(BENCH_HEADER)?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn run_bench_gemm(args: &BenchArgs) -> std::result::Result<(), Box<dyn std::error::Error>> {
    let env = environment();
    let modes = if args.modes.is_empty() {
        vec![parse_mode(env.get(ozgemm::dispatch::ENV_MODE).map(String::as_str).unwrap_or("native"), &env)?]
    } else {
        parse_modes(&args.modes, &env)?
    };
    if args.sizes.contains(&0) {
        return Err("matrix size must be positive".into());
    }
    let mut records = bench_records(&args.sizes, &modes, &args.seeds, args.complex)?;
    if args.omit_wall_time {
        records.iter_mut().for_each(|r| r.wall_ns = 0);
    }
    write_bench_csv(&args.output, &records)
}
