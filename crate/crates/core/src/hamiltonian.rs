//! The symplectic unit `J`, sparse Hamiltonian operators and structure diagnostics.

use alloc::vec;
use alloc::vec::Vec;

use crate::dense::{DenseMatrix, Vector};
use crate::error::{check_len, Error, Result};
use crate::factor::BandedLu;
use crate::sparse::CsrMatrix;

/// `J_n = [[0, I_n], [−I_n, 0]]`, applied without forming the matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JOperator {
    n: usize,
}

impl JOperator {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vector> {
        check_len(2 * self.n, x.len())?;
        let mut y = vec![0.0; x.len()];
        apply_j_into(x, &mut y);
        Ok(y)
    }

    /// `Jᵀ x = −J x`
    pub fn apply_transpose(&self, x: &[f64]) -> Result<Vector> {
        let mut y = self.apply(x)?;
        for v in &mut y {
            *v = -*v;
        }
        Ok(y)
    }

    pub fn dense(&self) -> DenseMatrix {
        j_dense(self.n)
    }
}

/// `J x` for a vector of even length `2n`.
pub fn apply_j(x: &[f64]) -> Result<Vector> {
    if !x.len().is_multiple_of(2) {
        return Err(Error::InvalidArgument("J acts on vectors of even length"));
    }
    JOperator::new(x.len() / 2).apply(x)
}

pub(crate) fn apply_j_into(x: &[f64], y: &mut [f64]) {
    let n = x.len() / 2;
    for i in 0..n {
        y[i] = x[n + i];
        y[n + i] = -x[i];
    }
}

/// `xᵀ J y`
pub fn j_inner(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let n = x.len() / 2;
    let mut s = 0.0;
    for i in 0..n {
        s += x[i] * y[n + i] - x[n + i] * y[i];
    }
    s
}

pub fn j_dense(k: usize) -> DenseMatrix {
    let mut j = DenseMatrix::zeros(2 * k, 2 * k);
    for i in 0..k {
        j[(i, k + i)] = 1.0;
        j[(k + i, i)] = -1.0;
    }
    j
}

/// `J M` (row permutation with sign).
pub fn j_left(m: &DenseMatrix) -> Result<DenseMatrix> {
    if !m.rows().is_multiple_of(2) {
        return Err(Error::InvalidArgument("J needs an even row count"));
    }
    let mut out = DenseMatrix::zeros(m.rows(), m.cols());
    for c in 0..m.cols() {
        apply_j_into(m.col(c), out.col_mut(c));
    }
    Ok(out)
}

/// `M J` (column permutation with sign).
pub fn j_right(m: &DenseMatrix) -> Result<DenseMatrix> {
    if !m.cols().is_multiple_of(2) {
        return Err(Error::InvalidArgument("J needs an even column count"));
    }
    let k = m.cols() / 2;
    let mut out = DenseMatrix::zeros(m.rows(), m.cols());
    for c in 0..k {
        let neg: Vec<f64> = m.col(k + c).iter().map(|v| -v).collect();
        out.set_col(c, &neg);
        out.set_col(k + c, m.col(c));
    }
    Ok(out)
}

/// `M ← M − J` for square `M` of even order.
pub(crate) fn sub_j(m: &mut DenseMatrix) {
    let k = m.rows() / 2;
    for i in 0..k {
        m[(i, k + i)] -= 1.0;
        m[(k + i, i)] += 1.0;
    }
}

/// `‖J M − (J M)ᵀ‖_F`; zero exactly when `M` is Hamiltonian.
pub fn hamiltonian_residual(m: &DenseMatrix) -> Result<f64> {
    let jm = j_left(m)?;
    let d = jm.lin_comb(1.0, &jm.transpose(), -1.0)?;
    Ok(d.frobenius_norm())
}

/// `‖Sᵀ J S − J_k‖_F` for `S` with `2k` columns.
pub fn j_orthogonality_residual(s: &DenseMatrix) -> Result<f64> {
    if !s.cols().is_multiple_of(2) {
        return Err(Error::InvalidArgument("J-orthogonal bases have an even number of columns"));
    }
    let mut g = s.tr_matmul(&j_left(s)?)?;
    sub_j(&mut g);
    Ok(g.frobenius_norm())
}

/// `‖Sᵀ S − I‖_F`
pub fn orthogonality_residual(s: &DenseMatrix) -> Result<f64> {
    let mut g = s.tr_matmul(s)?;
    g.add_diag(-1.0);
    Ok(g.frobenius_norm())
}

/// `‖Xᵀ J X − J‖_F` for square `X`; zero for symplectic `X`.
pub fn symplecticity_residual(x: &DenseMatrix) -> Result<f64> {
    j_orthogonality_residual(x)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructureReport {
    pub hamiltonian_residual: f64,
    pub j_orthogonality_residual: f64,
    pub orthogonality_residual: f64,
}

pub fn structure_report(s: &DenseMatrix, htilde: &DenseMatrix) -> Result<StructureReport> {
    check_len(s.cols(), htilde.rows())?;
    check_len(htilde.rows(), htilde.cols())?;
    Ok(StructureReport {
        hamiltonian_residual: hamiltonian_residual(htilde)?,
        j_orthogonality_residual: j_orthogonality_residual(s)?,
        orthogonality_residual: orthogonality_residual(s)?,
    })
}

/// Sparse Hamiltonian `H = [[E, B], [C, −Eᵀ]]` with `B`, `C` symmetric.
///
/// `B` and `C` are symmetrized on construction, so `JH` is symmetric to the
/// last bit no matter what the caller passed in. A factorization of `JH` can
/// be attached once with [`HamiltonianOperator::with_solver`]; afterwards the
/// operator is immutable and can be shared between threads.
#[derive(Clone, Debug)]
pub struct HamiltonianOperator {
    n: usize,
    e: CsrMatrix,
    et: CsrMatrix,
    b: CsrMatrix,
    c: CsrMatrix,
    solver: Option<BandedLu>,
}

impl HamiltonianOperator {
    pub fn new(e: CsrMatrix, b: CsrMatrix, c: CsrMatrix) -> Result<Self> {
        let n = e.nrows();
        for m in [&e, &b, &c] {
            check_len(n, m.nrows())?;
            check_len(n, m.ncols())?;
        }
        Ok(Self { n, et: e.transpose(), e, b: b.symmetrized()?, c: c.symmetrized()?, solver: None })
    }

    /// Reads `E`, `B`, `C` from the blocks of a dense `2n × 2n` matrix; the
    /// lower-right block is implied by `−Eᵀ` and ignored.
    pub fn from_dense(h: &DenseMatrix) -> Result<Self> {
        if !h.is_square() || !h.rows().is_multiple_of(2) {
            return Err(Error::InvalidArgument("Hamiltonian matrices are square of even order"));
        }
        let n = h.rows() / 2;
        Self::new(
            CsrMatrix::from_dense(&h.block(0, 0, n, n)),
            CsrMatrix::from_dense(&h.block(0, n, n, n)),
            CsrMatrix::from_dense(&h.block(n, 0, n, n)),
        )
    }

    /// Factors `JH = [[C, −Eᵀ], [−E, −B]]` so that [`Self::solve`] is available.
    pub fn with_solver(mut self) -> Result<Self> {
        self.solver = Some(BandedLu::factor(&self.jh())?);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn e(&self) -> &CsrMatrix {
        &self.e
    }

    pub fn b(&self) -> &CsrMatrix {
        &self.b
    }

    pub fn c(&self) -> &CsrMatrix {
        &self.c
    }

    pub fn is_solve_capable(&self) -> bool {
        self.solver.is_some()
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vector> {
        let mut y = vec![0.0; self.dim()];
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_len(self.dim(), x.len())?;
        check_len(self.dim(), y.len())?;
        let n = self.n;
        let (x1, x2) = x.split_at(n);
        let (y1, y2) = y.split_at_mut(n);
        y1.fill(0.0);
        y2.fill(0.0);
        self.e.matvec_add(1.0, x1, y1)?;
        self.b.matvec_add(1.0, x2, y1)?;
        self.c.matvec_add(1.0, x1, y2)?;
        self.et.matvec_add(-1.0, x2, y2)?;
        Ok(())
    }

    /// `x = H⁻¹ b` through the symmetric system `(JH) x = J b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vector> {
        let lu = self.solver.as_ref().ok_or(Error::NotSolveCapable)?;
        check_len(self.dim(), b.len())?;
        let mut jb = vec![0.0; b.len()];
        apply_j_into(b, &mut jb);
        lu.solve(&jb)
    }

    /// The full `2n × 2n` matrix in sparse form.
    pub fn to_csr(&self) -> CsrMatrix {
        let n = self.n;
        let mut t: Vec<(usize, usize, f64)> = Vec::new();
        t.extend(self.e.triplets());
        t.extend(self.b.triplets().map(|(i, j, v)| (i, n + j, v)));
        t.extend(self.c.triplets().map(|(i, j, v)| (n + i, j, v)));
        t.extend(self.et.triplets().map(|(i, j, v)| (n + i, n + j, -v)));
        CsrMatrix::from_triplets(2 * n, 2 * n, &t).unwrap_or_else(|_| CsrMatrix::zeros(2 * n, 2 * n))
    }

    /// `JH = [[C, −Eᵀ], [−E, −B]]`, symmetric.
    pub fn jh(&self) -> CsrMatrix {
        let n = self.n;
        let mut t: Vec<(usize, usize, f64)> = Vec::new();
        t.extend(self.c.triplets());
        t.extend(self.et.triplets().map(|(i, j, v)| (i, n + j, -v)));
        t.extend(self.e.triplets().map(|(i, j, v)| (n + i, j, -v)));
        t.extend(self.b.triplets().map(|(i, j, v)| (n + i, n + j, -v)));
        CsrMatrix::from_triplets(2 * n, 2 * n, &t).unwrap_or_else(|_| CsrMatrix::zeros(2 * n, 2 * n))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        self.to_csr().to_dense()
    }

    pub fn norm_one(&self) -> f64 {
        self.to_csr().norm_one()
    }

    /// The operator `a·H` (still Hamiltonian); any factorization is dropped.
    pub fn scaled(&self, a: f64) -> Self {
        Self {
            n: self.n,
            e: self.e.scaled(a),
            et: self.et.scaled(a),
            b: self.b.scaled(a),
            c: self.c.scaled(a),
            solver: None,
        }
    }
}

pub fn ham_matvec(h: &HamiltonianOperator, x: &[f64]) -> Result<Vector> {
    h.matvec(x)
}

pub fn ham_solve(h: &HamiltonianOperator, b: &[f64]) -> Result<Vector> {
    h.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_examples() {
        let j = JOperator::new(2);
        assert_eq!(j.apply(&[1.0, 0.0, 0.0, 0.0]).unwrap(), vec![0.0, 0.0, -1.0, 0.0]);
        assert_eq!(apply_j(&[2.0, 5.0]).unwrap(), vec![5.0, -2.0]);
        let x = [1.0, 2.0, 3.0, 4.0];
        let jj = j.apply(&j.apply(&x).unwrap()).unwrap();
        assert_eq!(jj, vec![-1.0, -2.0, -3.0, -4.0]);
        assert!(apply_j(&[1.0]).is_err());
        assert_eq!(j.dense().matvec(&x).unwrap(), j.apply(&x).unwrap());
    }

    #[test]
    fn j_inner_matches_dense() {
        let x = [1.0, -2.0, 0.5, 3.0];
        let y = [0.3, 1.0, -1.0, 2.0];
        let jy = j_dense(2).matvec(&y).unwrap();
        assert_eq!(j_inner(&x, &y), crate::dense::dot(&x, &jy));
    }

    #[test]
    fn j_left_right() {
        let m = DenseMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let j = j_dense(1);
        assert_eq!(j_left(&m).unwrap(), j.matmul(&m).unwrap());
        assert_eq!(j_right(&m).unwrap(), m.matmul(&j).unwrap());
    }

    #[test]
    fn canonical_columns_are_j_orthogonal() {
        let (n, k) = (4, 2);
        let mut s = DenseMatrix::zeros(2 * n, 2 * k);
        for i in 0..k {
            s[(i, i)] = 1.0;
            s[(n + i, k + i)] = 1.0;
        }
        let r = structure_report(&s, &j_dense(k)).unwrap();
        assert_eq!(r.j_orthogonality_residual, 0.0);
        assert_eq!(r.hamiltonian_residual, 0.0);
        assert_eq!(r.orthogonality_residual, 0.0);
    }

    #[test]
    fn solve_with_j_as_operator() {
        let n = 3;
        let h = HamiltonianOperator::new(
            CsrMatrix::zeros(n, n),
            CsrMatrix::identity(n),
            CsrMatrix::identity(n).scaled(-1.0),
        )
        .unwrap()
        .with_solver()
        .unwrap();
        assert_eq!(h.to_dense(), j_dense(n));
        let b = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let x = h.solve(&b).unwrap();
        let want: Vec<f64> = apply_j(&b).unwrap().iter().map(|v| -v).collect();
        assert_eq!(x, want);
    }

    #[test]
    fn solve_block_diagonal() {
        let n = 2;
        let h = HamiltonianOperator::new(CsrMatrix::identity(n), CsrMatrix::zeros(n, n), CsrMatrix::zeros(n, n))
            .unwrap()
            .with_solver()
            .unwrap();
        assert_eq!(h.solve(&[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![1.0, 2.0, -3.0, -4.0]);
    }

    #[test]
    fn unfactored_solve_fails() {
        let h =
            HamiltonianOperator::new(CsrMatrix::identity(1), CsrMatrix::zeros(1, 1), CsrMatrix::zeros(1, 1)).unwrap();
        assert_eq!(h.solve(&[1.0, 1.0]), Err(Error::NotSolveCapable));
    }

    #[test]
    fn asymmetric_blocks_are_symmetrized() {
        let b = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0)]).unwrap();
        let h = HamiltonianOperator::new(CsrMatrix::identity(2), b, CsrMatrix::zeros(2, 2)).unwrap();
        assert_eq!(hamiltonian_residual(&h.to_dense()).unwrap(), 0.0);
        assert_eq!(h.b().get(1, 0), 0.5);
    }
}
