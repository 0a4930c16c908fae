use alloc::vec::Vec;

use super::{ArnoldiBuilder, KrylovDecomposition, KrylovOptions, LeftInverse, MethodId};
use crate::dense::{qr_orthonormalize, DenseMatrix};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianOperator;
use crate::sparse::CsrMatrix;

/// Block J-orthogonal basis.
///
/// Runs `k` Arnoldi steps, puts the top and bottom halves of `U_k` side by
/// side, orthonormalizes them into `W` (`n × 2p`, rank-revealing) and uses
/// `S = blkdiag(W, W)`, which is orthonormal and J-orthogonal at once. The
/// projected matrix is `[[WᵀEW, WᵀBW], [WᵀCW, −(WᵀEW)ᵀ]]` with the two
/// off-diagonal blocks symmetrized.
pub fn block_j_orthogonal(
    op: &HamiltonianOperator,
    b: &[f64],
    k: usize,
    opts: &KrylovOptions,
) -> Result<KrylovDecomposition> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1"));
    }
    let mut arn = ArnoldiBuilder::new(op, b, opts)?;
    for _ in 0..k {
        if !arn.step()? {
            break;
        }
    }
    let u = arn.basis();
    let n = op.n();
    let m = u.cols();
    let mut v = DenseMatrix::zeros(n, 2 * m);
    v.set_block(0, 0, &u.block(0, 0, n, m));
    v.set_block(0, m, &u.block(n, 0, n, m));
    let w = qr_orthonormalize(&v, opts.rank_tol)?;
    let q = w.cols();

    let mut counts = arn.decomposition().counts;
    counts.projection_matvecs += q;
    let a = congruence(op.e(), &w)?;
    let bw = symmetric_part(&congruence(op.b(), &w)?);
    let cw = symmetric_part(&congruence(op.c(), &w)?);

    let mut ht = DenseMatrix::zeros(2 * q, 2 * q);
    ht.set_block(0, 0, &a);
    ht.set_block(0, q, &bw);
    ht.set_block(q, 0, &cw);
    ht.set_block(q, q, &a.transpose().scaled(-1.0));

    let mut s = DenseMatrix::zeros(2 * n, 2 * q);
    s.set_block(0, 0, &w);
    s.set_block(n, q, &w);
    let start = s.tr_matvec(b)?;
    Ok(KrylovDecomposition {
        method: MethodId::BlockJ,
        basis: s,
        projected: ht,
        left_inverse: LeftInverse::Transpose,
        start_coord: start,
        remainder: None,
        breakdown: arn.breakdown(),
        counts,
    })
}

/// `Wᵀ X W`
fn congruence(x: &CsrMatrix, w: &DenseMatrix) -> Result<DenseMatrix> {
    let cols: Vec<_> = (0..w.cols()).map(|j| x.matvec(w.col(j))).collect::<Result<_>>()?;
    let xw = DenseMatrix::from_columns(w.rows(), &cols)?;
    w.tr_matmul(&xw)
}

fn symmetric_part(m: &DenseMatrix) -> DenseMatrix {
    let mut s = m.clone();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            s[(i, j)] = 0.5 * (m[(i, j)] + m[(j, i)]);
        }
    }
    s
}
