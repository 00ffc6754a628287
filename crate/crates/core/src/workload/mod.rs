//! Resolvent contour-integration workload: blocked LU inversion of `zI - H`
//! along a semicircular contour, with the trailing GEMM updates emulated.

pub mod hamiltonian;
pub mod lu;
pub mod quadrature;
pub mod sweep;

pub use hamiltonian::{build_test_hamiltonian, SpectrumSpec, TestHamiltonian};
pub use lu::{blocked_lu_invert, inverse_residual, trailing_update_count, LuInverse};
pub use quadrature::{contour_nodes, gauss_legendre, ContourSpec};
pub use sweep::{green_function_sweep, integrated_density, GreenConfig, ModeReport, NodeResult, SweepReport};
