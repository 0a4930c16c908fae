//! Krylov approximations of `e^{hH} b` and `φ(hH) b` for sparse Hamiltonian
//! `H`, including bases that keep the projected matrix Hamiltonian.
#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod approx;
pub mod dense;
pub mod error;
pub mod factor;
pub mod hamiltonian;
pub mod krylov;
pub mod matfun;
pub mod problems;
pub mod sparse;
#[cfg(test)]
pub(crate) mod testutil;

pub use approx::{
    adaptive_run, approximate_action, error_estimate_arnoldi, error_estimate_hl, AdaptiveResult, FunctionId,
};
pub use dense::{qr_orthonormalize, solve_linear, DenseMatrix, Vector};
pub use error::{Error, Result};
pub use hamiltonian::{
    apply_j, ham_matvec, ham_solve, structure_report, HamiltonianOperator, JOperator, StructureReport,
};
pub use krylov::{
    build_decomposition, BreakdownPolicy, KrylovDecomposition, KrylovOptions, LeftInverse, MethodId, OpCounts,
};
pub use matfun::{expm, expm_hamiltonian, phi_explicit, phi_implicit, PhiMode};
pub use problems::{build_problem, laplacian_dirichlet, laplacian_periodic, random_b, ProblemId, ProblemInstance};
pub use sparse::CsrMatrix;
