//! Krylov basis construction.
//!
//! Every builder returns a [`KrylovDecomposition`]: a basis `S`, the projected
//! matrix `H̃` with `Wᵀ H S = H̃`, and the left inverse `Wᵀ` (either `Sᵀ` or
//! `J_kᵀ Sᵀ J_n`). Structure-preserving methods keep `Sᵀ J S = J_k` and an
//! exactly Hamiltonian `H̃`.

mod arnoldi;
mod block;
mod heks;
mod lanczos;
mod symplectic;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use arnoldi::{arnoldi, ArnoldiBuilder};
pub use block::block_j_orthogonal;
pub use heks::heks;
pub use lanczos::{hamiltonian_lanczos, LanczosBuilder};
pub use symplectic::{isotropic_arnoldi, symplectic_arnoldi};

use crate::dense::{DenseMatrix, Vector};
use crate::error::{check_len, Error, Result};
use crate::hamiltonian::{j_inner, j_left, structure_report, HamiltonianOperator, StructureReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodId {
    Arnoldi,
    HamiltonianLanczos,
    SymplecticArnoldi,
    IsotropicArnoldi,
    Heks,
    BlockJ,
}

impl MethodId {
    pub const ALL: [MethodId; 6] = [
        MethodId::Arnoldi,
        MethodId::HamiltonianLanczos,
        MethodId::SymplecticArnoldi,
        MethodId::IsotropicArnoldi,
        MethodId::Heks,
        MethodId::BlockJ,
    ];

    pub fn abbrev(self) -> &'static str {
        match self {
            MethodId::Arnoldi => "A",
            MethodId::HamiltonianLanczos => "HL",
            MethodId::SymplecticArnoldi => "SA",
            MethodId::IsotropicArnoldi => "IA",
            MethodId::Heks => "HEKS",
            MethodId::BlockJ => "BJ",
        }
    }

    pub fn is_structure_preserving(self) -> bool {
        self != MethodId::Arnoldi
    }

    /// Steps, pairs or blocks run internally for a target dimension `2r`.
    pub fn steps_for_dim(self, dim: usize) -> usize {
        let r = dim / 2;
        match self {
            MethodId::Arnoldi | MethodId::BlockJ => 2 * r,
            MethodId::HamiltonianLanczos | MethodId::SymplecticArnoldi | MethodId::IsotropicArnoldi => r,
            // r/2 for even r, (r-1)/2 for odd r
            MethodId::Heks => r / 2,
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.abbrev())
    }
}

impl FromStr for MethodId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MethodId::ALL
            .into_iter()
            .find(|m| m.abbrev().eq_ignore_ascii_case(s))
            .ok_or(Error::InvalidArgument("unknown method (expected A, HL, SA, IA, HEKS or BJ)"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeftInverse {
    /// `Wᵀ = Sᵀ`
    Transpose,
    /// `Wᵀ = J_kᵀ Sᵀ J_n`
    JSymplectic,
}

/// Coupling term `u_{k+1} · scalar · e_indexᵀ` of the Arnoldi or Lanczos recursion.
#[derive(Clone, Debug, PartialEq)]
pub struct Remainder {
    pub scalar: f64,
    /// zero-based column of the coupling coordinate
    pub index: usize,
    pub vector: Vector,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Breakdown {
    /// one-based step (or pair/block) at which the recurrence stopped
    pub step: usize,
    pub quantity: &'static str,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    /// products with `H` that expand the Krylov space
    pub matvecs: usize,
    /// products with `H` only used to project (SA, IA, BJ)
    pub projection_matvecs: usize,
    pub solves: usize,
    /// inner products (or `J`-inner products) of the recurrence itself
    pub inner_products: usize,
    /// inner products spent on reorthogonalization and re-J-orthogonalization
    pub reorth_inner_products: usize,
    pub norms: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BreakdownPolicy {
    tol: f64,
}

impl BreakdownPolicy {
    pub fn new(tol: f64) -> Result<Self> {
        if tol > 0.0 {
            Ok(Self { tol })
        } else {
            Err(Error::InvalidArgument("breakdown tolerance must be positive"))
        }
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }
}

impl Default for BreakdownPolicy {
    fn default() -> Self {
        Self { tol: 1e-14 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovOptions {
    pub policy: BreakdownPolicy,
    /// second Gram–Schmidt pass in the Arnoldi-type builders
    pub reorthogonalize: bool,
    /// project new pairs against earlier ones in HL, SA, IA, HEKS
    pub re_j_orthogonalize: bool,
    /// relative column cutoff for the QR in BJ
    pub rank_tol: f64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { policy: BreakdownPolicy::default(), reorthogonalize: true, re_j_orthogonalize: true, rank_tol: 1e-12 }
    }
}

#[derive(Clone, Debug)]
pub struct KrylovDecomposition {
    pub method: MethodId,
    pub basis: DenseMatrix,
    pub projected: DenseMatrix,
    pub left_inverse: LeftInverse,
    pub start_coord: Vector,
    pub remainder: Option<Remainder>,
    pub breakdown: Option<Breakdown>,
    pub counts: OpCounts,
}

impl KrylovDecomposition {
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    /// `Wᵀ x`
    pub fn apply_left_inverse(&self, x: &[f64]) -> Result<Vector> {
        check_len(self.basis.rows(), x.len())?;
        match self.left_inverse {
            LeftInverse::Transpose => self.basis.tr_matvec(x),
            LeftInverse::JSymplectic => {
                let jx = crate::hamiltonian::apply_j(x)?;
                let y = self.basis.tr_matvec(&jx)?;
                Ok(apply_jk_transpose(&y))
            }
        }
    }

    pub fn structure_report(&self) -> Result<StructureReport> {
        structure_report(&self.basis, &self.projected)
    }
}

/// `J_kᵀ y` for `y` of length `2k`.
pub(crate) fn apply_jk_transpose(y: &[f64]) -> Vector {
    let k = y.len() / 2;
    let mut out = vec![0.0; y.len()];
    for i in 0..k {
        out[i] = -y[k + i];
        out[k + i] = y[i];
    }
    out
}

/// Builds a decomposition for the target dimension `dim = 2r`.
///
/// A and BJ run `2r` Arnoldi steps, HL, SA and IA run `r` pairs and HEKS runs
/// `⌊r/2⌋` blocks (dimension `2r − 2` when `r` is odd).
pub fn build_decomposition(
    method: MethodId,
    op: &HamiltonianOperator,
    b: &[f64],
    dim: usize,
    opts: &KrylovOptions,
) -> Result<KrylovDecomposition> {
    if dim < 2 || !dim.is_multiple_of(2) {
        return Err(Error::InvalidArgument("target dimension must be even and at least 2"));
    }
    let k = method.steps_for_dim(dim);
    match method {
        MethodId::Arnoldi => arnoldi(op, b, k, opts),
        MethodId::HamiltonianLanczos => hamiltonian_lanczos(op, b, k, opts),
        MethodId::SymplecticArnoldi => symplectic_arnoldi(op, b, k, opts),
        MethodId::IsotropicArnoldi => isotropic_arnoldi(op, b, k, opts),
        MethodId::Heks => {
            if k == 0 {
                return Err(Error::InvalidArgument("HEKS needs target dimension at least 4"));
            }
            heks(op, b, k, opts)
        }
        MethodId::BlockJ => block_j_orthogonal(op, b, k, opts),
    }
}

pub(crate) fn unit_start(op: &HamiltonianOperator, b: &[f64]) -> Result<(Vector, f64)> {
    check_len(op.dim(), b.len())?;
    let nb = crate::dense::norm2(b);
    if nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    if !nb.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok((b.iter().map(|v| v / nb).collect(), nb))
}

/// Column pairs `(m_i, n_i)` with `m_iᵀ J n_i = 1`, used to re-J-orthogonalize
/// new vectors against everything generated so far.
#[derive(Clone, Debug, Default)]
pub(crate) struct JBasis {
    m: Vec<Vector>,
    n: Vec<Vector>,
}

impl JBasis {
    pub fn push(&mut self, m: Vector, n: Vector) {
        self.m.push(m);
        self.n.push(n);
    }

    /// `x ← x − S J_kᵀ Sᵀ J x`, one pair at a time. Returns the number of
    /// `J`-inner products spent.
    pub fn project(&self, x: &mut [f64]) -> usize {
        for (m, n) in self.m.iter().zip(&self.n) {
            let a = j_inner(m, x);
            let c = j_inner(n, x);
            for ((xi, mi), ni) in x.iter_mut().zip(m).zip(n) {
                *xi += c * mi - a * ni;
            }
        }
        2 * self.m.len()
    }
}

/// One sweep of re-J-orthogonalization of `S = [M, N]` (`2r` columns).
///
/// Pair `j` is projected against the already cleaned pairs `1..j−1`, then
/// `n_j` is rescaled so that `m_jᵀ J n_j = 1`; projection alone cannot repair
/// a drifted pair normalization. An exactly J-orthogonal `S` is returned
/// unchanged up to rounding.
pub fn re_j_orthogonalize(s: &DenseMatrix) -> Result<DenseMatrix> {
    if !s.cols().is_multiple_of(2) {
        return Err(Error::InvalidArgument("expected [M, N] column pairing"));
    }
    let r = s.cols() / 2;
    let mut basis = JBasis::default();
    let mut out = s.clone();
    for j in 0..r {
        let mut m = s.col(j).to_vec();
        let mut n = s.col(r + j).to_vec();
        basis.project(&mut m);
        basis.project(&mut n);
        let d = j_inner(&m, &n);
        if d != 0.0 && d.is_finite() {
            for v in &mut n {
                *v /= d;
            }
        }
        out.set_col(j, &m);
        out.set_col(r + j, &n);
        basis.push(m, n);
    }
    Ok(out)
}

/// Replaces `J H̃` by its symmetric part, making `H̃` exactly Hamiltonian.
pub fn hamiltonian_symmetrize(ht: &DenseMatrix) -> Result<DenseMatrix> {
    let k = j_left(ht)?;
    let mut sym = DenseMatrix::zeros(k.rows(), k.cols());
    for i in 0..k.rows() {
        for j in 0..k.cols() {
            sym[(i, j)] = 0.5 * (k[(i, j)] + k[(j, i)]);
        }
    }
    // H̃ = J⁻¹ K = −J K
    Ok(j_left(&sym)?.scaled(-1.0))
}

/// `J_kᵀ Sᵀ J_n (H S)` given `HS`.
pub(crate) fn j_projection(s: &DenseMatrix, hs: &DenseMatrix) -> Result<DenseMatrix> {
    let p = s.tr_matmul(&j_left(hs)?)?;
    Ok(j_left(&p)?.scaled(-1.0))
}
