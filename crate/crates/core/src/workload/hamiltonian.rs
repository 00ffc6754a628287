//! Seeded synthetic Hermitian operators with a prescribed spectrum.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{EmuError, Result};
use crate::matrix::ComplexMatrix;

/// How the eigenvalues of a test operator are chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum SpectrumSpec {
    /// Uniform in `[lo, hi]`, rejecting values within `halfwidth` of any
    /// `(center, halfwidth)` exclusion.
    Uniform {
        lo: f64,
        hi: f64,
        exclusions: Vec<(f64, f64)>,
    },
    Explicit(Vec<f64>),
}

impl SpectrumSpec {
    pub fn uniform(lo: f64, hi: f64) -> Self {
        SpectrumSpec::Uniform { lo, hi, exclusions: Vec::new() }
    }
}

#[derive(Clone, Debug)]
pub struct TestHamiltonian {
    pub h: ComplexMatrix,
    /// Sorted ascending.
    pub eigenvalues: Vec<f64>,
}

impl TestHamiltonian {
    pub fn n(&self) -> usize {
        self.h.rows()
    }

    /// Eigenvalues strictly inside `(lo, hi)`.
    pub fn count_in(&self, lo: f64, hi: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > lo && l < hi).count()
    }

    /// `max |H - H^dagger|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.n();
        let mut r = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                r = r.max((self.h[(i, j)] - self.h[(j, i)].conj()).norm());
            }
        }
        r
    }
}

fn sample_spectrum(n: usize, spec: &SpectrumSpec, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let mut values = match spec {
        SpectrumSpec::Explicit(v) => {
            if v.len() != n || v.iter().any(|x| !x.is_finite()) {
                return Err(EmuError::InvalidParameter(format!(
                    "explicit spectrum has {} finite values, need {n}",
                    v.len()
                )));
            }
            v.clone()
        }
        SpectrumSpec::Uniform { lo, hi, exclusions } => {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(EmuError::InvalidParameter(format!("empty spectrum interval [{lo}, {hi}]")));
            }
            let mut out = Vec::with_capacity(n);
            let mut tries = 0usize;
            while out.len() < n {
                tries += 1;
                if tries > 1000 * n + 1000 {
                    return Err(EmuError::InvalidParameter("exclusions cover the spectrum interval".into()));
                }
                let x: f64 = rng.random_range(*lo..=*hi);
                if exclusions.iter().all(|&(c, w)| (x - c).abs() > w) {
                    out.push(x);
                }
            }
            out
        }
    };
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Haar-like random unitary: modified Gram-Schmidt on a complex Gaussian matrix.
fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let mut q = ComplexMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    for j in 0..n {
        for p in 0..j {
            let mut dot = Complex64::new(0.0, 0.0);
            for i in 0..n {
                dot += q[(i, p)].conj() * q[(i, j)];
            }
            for i in 0..n {
                let v = q[(i, p)];
                q[(i, j)] -= dot * v;
            }
        }
        let norm = (0..n).map(|i| q[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            q[(i, j)] /= norm;
        }
    }
    q
}

/// `H = Q diag(lambda) Q^dagger` with a seeded random unitary `Q`, made
/// exactly Hermitian by mirroring the upper triangle.
pub fn build_test_hamiltonian(n: usize, spec: &SpectrumSpec, seed: u64) -> Result<TestHamiltonian> {
    if n < 2 {
        return Err(EmuError::InvalidParameter(format!("hamiltonian dimension {n} < 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eigenvalues = sample_spectrum(n, spec, &mut rng)?;
    let q = random_unitary(n, &mut rng);
    let mut h = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let mut s = Complex64::new(0.0, 0.0);
            for (k, &l) in eigenvalues.iter().enumerate() {
                s += q[(i, k)] * l * q[(j, k)].conj();
            }
            if i == j {
                h[(i, i)] = Complex64::new(s.re, 0.0);
            } else {
                h[(i, j)] = s;
                h[(j, i)] = s.conj();
            }
        }
    }
    Ok(TestHamiltonian { h, eigenvalues })
}
