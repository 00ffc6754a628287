//! FP64 and complex FP64 GEMM emulation on an exact int8 matrix-multiply
//! backend.
//!
//! Two schemes are provided: [`ozaki1`] splits mantissas into int8 slices,
//! [`ozaki2`] multiplies quantized integers modulo coprime moduli and
//! reconstructs with the CRT. [`dispatch`] selects a scheme (from code or the
//! `GEMM_EMU_*` environment variables) and counts the work done.

pub mod backend;
pub mod dispatch;
pub mod error;
pub mod matrix;
pub mod oracle;
pub mod ozaki1;
pub mod ozaki2;
pub mod wide;
pub mod workload;
pub mod zgemm;

pub use backend::{int8_gemm, int8_gemm_block, EmulationCost, Int8Matrix, IntegerBackend, ReferenceBackend};
pub use dispatch::{
    gemm_dispatch, native_gemm, parse_mode_config, stats_snapshot, zgemm_dispatch, Dispatcher, EmulationMode, GemmStats,
};
pub use error::{EmuError, Result};
pub use matrix::{max_rel_diff, max_rel_diff_complex, ComplexMatrix, Matrix, Orientation};
pub use ozaki1::{ozaki1_gemm, slice_decompose, ProductStrategy, SliceSet};
pub use ozaki2::{choose_moduli, crt_reconstruct, ozaki2_gemm, quantize, residue_gemm, ModuliSet, ResidueSet};
pub use zgemm::complex_gemm;

pub use num_complex::Complex64;
