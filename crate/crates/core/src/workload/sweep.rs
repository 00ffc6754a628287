//! Resolvent traces along the contour under several GEMM modes.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dispatch::{Dispatcher, EmulationMode, GemmStats};
use crate::error::Result;
use crate::matrix::{max_rel_diff_complex, ComplexMatrix};
use crate::workload::hamiltonian::{build_test_hamiltonian, SpectrumSpec, TestHamiltonian};
use crate::workload::lu::blocked_lu_invert;
use crate::workload::quadrature::{contour_nodes, ContourSpec};

/// The shipped Green-function configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct GreenConfig {
    pub n: usize,
    pub nodes: usize,
    pub e_bottom: f64,
    pub e_fermi: f64,
    pub spectrum: SpectrumSpec,
    pub block: usize,
    pub seed: u64,
}

pub const DEFAULT_N: usize = 200;
pub const DEFAULT_NODES: usize = 30;
pub const DEFAULT_E_BOTTOM: f64 = -1.1;
pub const DEFAULT_E_FERMI: f64 = 0.2;
pub const DEFAULT_BLOCK: usize = 64;
pub const DEFAULT_SEED: u64 = 1;
/// Eigenvalues are kept at least this far from both contour endpoints.
pub const DEFAULT_GUARD: f64 = 0.05;

impl Default for GreenConfig {
    fn default() -> Self {
        Self::with_window(DEFAULT_N, DEFAULT_NODES, DEFAULT_E_BOTTOM, DEFAULT_E_FERMI, DEFAULT_SEED)
    }
}

impl GreenConfig {
    /// Spectrum uniform in `[-1, 1]` with guard bands around both endpoints.
    pub fn with_window(n: usize, nodes: usize, e_bottom: f64, e_fermi: f64, seed: u64) -> Self {
        Self {
            n,
            nodes,
            e_bottom,
            e_fermi,
            spectrum: SpectrumSpec::Uniform {
                lo: -1.0,
                hi: 1.0,
                exclusions: vec![(e_bottom, DEFAULT_GUARD), (e_fermi, DEFAULT_GUARD)],
            },
            block: DEFAULT_BLOCK,
            seed,
        }
    }

    pub fn hamiltonian(&self) -> Result<TestHamiltonian> {
        build_test_hamiltonian(self.n, &self.spectrum, self.seed)
    }

    pub fn contour(&self) -> Result<ContourSpec> {
        contour_nodes(self.e_bottom, self.e_fermi, self.nodes)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeResult {
    pub index: usize,
    pub z: Complex64,
    /// `Tr G(z)` under the mode.
    pub g: Complex64,
    /// `Tr G(z)` under native FP64.
    pub g_ref: Complex64,
    /// `100 |g - g_ref| / |g_ref|`.
    pub pct_err: f64,
    /// Normwise relative difference of the whole resolvent against native.
    pub matrix_rel_err: f64,
    /// `max |(zI - H) G - I|`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeReport {
    pub mode: EmulationMode,
    pub nodes: Vec<NodeResult>,
    pub stats: GemmStats,
}

impl ModeReport {
    pub fn max_pct_err(&self) -> f64 {
        self.nodes.iter().fold(0.0, |m, r| m.max(r.pct_err))
    }

    /// `-(1/pi) Im sum_j w_j Tr G(z_j)`.
    pub fn integrated_density(&self, contour: &ContourSpec) -> f64 {
        let traces: Vec<Complex64> = self.nodes.iter().map(|r| r.g).collect();
        -contour.integrate(&traces).im / PI
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub contour: ContourSpec,
    pub block: usize,
    pub modes: Vec<ModeReport>,
}

impl SweepReport {
    pub fn mode(&self, mode: EmulationMode) -> Option<&ModeReport> {
        self.modes.iter().find(|r| r.mode == mode)
    }
}

/// `N_est` for `mode`, if the sweep ran it.
pub fn integrated_density(report: &SweepReport, mode: EmulationMode) -> Option<f64> {
    report.mode(mode).map(|r| r.integrated_density(&report.contour))
}

fn shifted(h: &ComplexMatrix, z: Complex64) -> ComplexMatrix {
    ComplexMatrix::from_fn(h.rows(), h.cols(), |i, j| if i == j { z - h[(i, j)] } else { -h[(i, j)] })
}

struct NodeSolve {
    inverse: ComplexMatrix,
    residual: f64,
}

fn solve_nodes(
    h: &ComplexMatrix,
    contour: &ContourSpec,
    block: usize,
    dispatcher: &Dispatcher,
) -> Result<Vec<NodeSolve>> {
    contour
        .nodes
        .par_iter()
        .map(|&z| {
            let r = blocked_lu_invert(&shifted(h, z), block, |a, b| dispatcher.zgemm(a, b))?;
            Ok(NodeSolve { inverse: r.inverse, residual: r.residual })
        })
        .collect()
}

/// Inverts `zI - H` at every contour node under each mode. The native
/// baseline is always computed; it appears in the report only if listed.
pub fn green_function_sweep(
    h: &TestHamiltonian,
    contour: &ContourSpec,
    modes: &[EmulationMode],
    block: usize,
) -> Result<SweepReport> {
    let native = Dispatcher::new(EmulationMode::Native)?;
    let baseline = solve_nodes(&h.h, contour, block, &native)?;
    let native_stats = native.stats();

    let mut reports = Vec::with_capacity(modes.len());
    for &mode in modes {
        let (solves, stats) = if mode == EmulationMode::Native {
            (None, native_stats)
        } else {
            let d = Dispatcher::new(mode)?;
            let s = solve_nodes(&h.h, contour, block, &d)?;
            (Some(s), d.stats())
        };
        let nodes = baseline
            .iter()
            .enumerate()
            .map(|(index, base)| {
                let g_ref = base.inverse.trace();
                let (g, matrix_rel_err, residual) = match &solves {
                    None => (g_ref, 0.0, base.residual),
                    Some(s) => {
                        let r = &s[index];
                        (r.inverse.trace(), max_rel_diff_complex(&r.inverse, &base.inverse), r.residual)
                    }
                };
                NodeResult {
                    index,
                    z: contour.nodes[index],
                    g,
                    g_ref,
                    pct_err: 100.0 * (g - g_ref).norm() / g_ref.norm(),
                    matrix_rel_err,
                    residual,
                }
            })
            .collect();
        reports.push(ModeReport { mode, nodes, stats });
    }
    Ok(SweepReport { contour: contour.clone(), block, modes: reports })
}
