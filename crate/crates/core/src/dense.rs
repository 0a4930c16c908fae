//! Small dense linear algebra: column-major matrices, vector helpers,
//! Householder QR with column pivoting and LU with partial pivoting.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{check_len, Error, Result};

/// Plain vectors are `Vec<f64>`; the helpers below take slices.
pub type Vector = Vec<f64>;

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    // Scaled to avoid overflow on huge entries; Krylov vectors can grow fast.
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = x.iter().map(|v| (v / scale) * (v / scale)).sum();
    scale * libm::sqrt(s)
}

/// y += a * x
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn scale(a: f64, x: &mut [f64]) {
    for v in x {
        *v *= a;
    }
}

pub fn sub(x: &[f64], y: &[f64]) -> Vector {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn all_finite(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i + i * n] = 1.0;
        }
        m
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_len(rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    /// Row-major literal, handy in tests: `from_rows(&[&[1.0, 2.0], &[3.0, 4.0]])`.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            check_len(c, row.len())?;
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        Ok(m)
    }

    pub fn from_columns(rows: usize, columns: &[Vector]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            check_len(rows, c.len())?;
            data.extend_from_slice(c);
        }
        Ok(Self { rows, cols: columns.len(), data })
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Column-major storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn set_col(&mut self, j: usize, v: &[f64]) {
        self.col_mut(j).copy_from_slice(v);
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.data)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t.data[j + i * self.cols] = self.data[i + j * self.rows];
            }
        }
        t
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vector> {
        check_len(self.cols, x.len())?;
        let mut y = vec![0.0; self.rows];
        for (j, xj) in x.iter().enumerate() {
            if *xj != 0.0 {
                axpy(*xj, self.col(j), &mut y);
            }
        }
        Ok(y)
    }

    /// `selfᵀ x`
    pub fn tr_matvec(&self, x: &[f64]) -> Result<Vector> {
        check_len(self.rows, x.len())?;
        Ok((0..self.cols).map(|j| dot(self.col(j), x)).collect())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        gemm(self, false, other, false)
    }

    /// `selfᵀ other` without forming the transpose.
    pub fn tr_matmul(&self, other: &Self) -> Result<Self> {
        gemm(self, true, other, false)
    }

    /// `self otherᵀ`
    pub fn matmul_tr(&self, other: &Self) -> Result<Self> {
        gemm(self, false, other, true)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| a * v).collect() }
    }

    /// `a·self + b·other`
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        check_len(self.rows, other.rows)?;
        check_len(self.cols, other.cols)?;
        let data = self.data.iter().zip(&other.data).map(|(x, y)| a * x + b * y).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn add_diag(&mut self, a: f64) {
        for i in 0..self.rows.min(self.cols) {
            self.data[i + i * self.rows] += a;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols).map(|j| self.col(j).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Copy of rows `r0..r0+nr`, columns `c0..c0+nc`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        let mut b = Self::zeros(nr, nc);
        for j in 0..nc {
            b.col_mut(j).copy_from_slice(&self.col(c0 + j)[r0..r0 + nr]);
        }
        b
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for j in 0..b.cols {
            let rows = self.rows;
            self.data[(c0 + j) * rows + r0..(c0 + j) * rows + r0 + b.rows].copy_from_slice(b.col(j));
        }
    }

    /// First `k` columns.
    pub fn leading_cols(&self, k: usize) -> Self {
        Self { rows: self.rows, cols: k, data: self.data[..k * self.rows].to_vec() }
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i + j * self.rows]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i + j * self.rows]
    }
}

fn gemm(a: &DenseMatrix, ta: bool, b: &DenseMatrix, tb: bool) -> Result<DenseMatrix> {
    // strides of op(A), op(B) in (row, col) terms
    let (m, k, rsa, csa) = if ta { (a.cols, a.rows, a.rows, 1) } else { (a.rows, a.cols, 1, a.rows) };
    let (kb, n, rsb, csb) = if tb { (b.cols, b.rows, b.rows, 1) } else { (b.rows, b.cols, 1, b.rows) };
    check_len(k, kb)?;
    let mut c = DenseMatrix::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return Ok(c);
    }
    // SAFETY: the strides describe exactly the column-major buffers of `a`, `b` and `c`,
    // whose lengths are rows*cols, and `c` does not alias the inputs.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.data.as_ptr(),
            rsa as isize,
            csa as isize,
            b.data.as_ptr(),
            rsb as isize,
            csb as isize,
            0.0,
            c.data.as_mut_ptr(),
            1,
            m as isize,
        );
    }
    Ok(c)
}

/// Orthonormal basis of `range(m)` by Householder QR with column pivoting.
///
/// Stops once the largest remaining column norm drops below `rank_tol·‖m‖_F`,
/// so the result can have fewer columns than `m` (possibly none).
pub fn qr_orthonormalize(m: &DenseMatrix, rank_tol: f64) -> Result<DenseMatrix> {
    if !(rank_tol > 0.0) {
        return Err(Error::InvalidArgument("rank_tol must be positive"));
    }
    let rows = m.rows;
    let mut a = m.clone();
    let cutoff = rank_tol * m.frobenius_norm();
    let kmax = rows.min(m.cols);
    let mut reflectors: Vec<(Vector, f64)> = Vec::with_capacity(kmax);
    let mut rank = 0;
    for k in 0..kmax {
        // pivot: remaining column with largest trailing norm (recomputed, sizes are small)
        let mut best = k;
        let mut best_norm = -1.0;
        for j in k..a.cols {
            let nj = norm2(&a.col(j)[k..]);
            if nj > best_norm {
                best_norm = nj;
                best = j;
            }
        }
        if best_norm <= cutoff || best_norm == 0.0 {
            break;
        }
        if best != k {
            for i in 0..rows {
                a.data.swap(i + k * rows, i + best * rows);
            }
        }
        let x = &a.col(k)[k..];
        let alpha = if x[0] >= 0.0 { -best_norm } else { best_norm };
        let mut v: Vector = x.to_vec();
        v[0] -= alpha;
        let vnorm2 = dot(&v, &v);
        let tau = if vnorm2 == 0.0 { 0.0 } else { 2.0 / vnorm2 };
        for j in k..a.cols {
            let col = &mut a.data[j * rows + k..(j + 1) * rows];
            let s = tau * dot(&v, col);
            axpy(-s, &v, col);
        }
        reflectors.push((v, tau));
        rank += 1;
    }
    // Q = H_0 H_1 ... H_{rank-1} applied to the first `rank` unit vectors
    let mut q = DenseMatrix::zeros(rows, rank);
    for j in 0..rank {
        q[(j, j)] = 1.0;
    }
    for (k, (v, tau)) in reflectors.iter().enumerate().rev() {
        for j in 0..rank {
            let col = &mut q.data[j * rows + k..(j + 1) * rows];
            let s = tau * dot(v, col);
            axpy(-s, v, col);
        }
    }
    Ok(q)
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: DenseMatrix,
    piv: Vec<usize>,
}

impl Lu {
    /// Right-looking blocked factorization; trailing updates go through `dgemm`.
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch { expected: a.rows, found: a.cols });
        }
        if !a.is_finite() {
            return Err(Error::NonFinite);
        }
        let n = a.rows;
        let mut lu = a.clone();
        let mut piv = vec![0; n];
        let small = f64::EPSILON * a.max_abs();
        let data = &mut lu.data;
        for k0 in (0..n).step_by(LU_BLOCK) {
            let k1 = (k0 + LU_BLOCK).min(n);
            for k in k0..k1 {
                let (p, pval) =
                    (k..n).map(|i| (i, data[i + k * n].abs())).fold(
                        (k, -1.0),
                        |best, c| {
                            if c.1 > best.1 {
                                c
                            } else {
                                best
                            }
                        },
                    );
                if pval <= small || pval == 0.0 {
                    return Err(Error::Singular { pivot: k });
                }
                piv[k] = p;
                if p != k {
                    for j in 0..n {
                        data.swap(k + j * n, p + j * n);
                    }
                }
                let d = data[k + k * n];
                for i in k + 1..n {
                    data[i + k * n] /= d;
                }
                for j in k + 1..k1 {
                    let f = data[k + j * n];
                    if f != 0.0 {
                        let (left, right) = data.split_at_mut(j * n);
                        axpy(-f, &left[k * n + k + 1..k * n + n], &mut right[k + 1..n]);
                    }
                }
            }
            // U12 = L11⁻¹ A12
            for j in k1..n {
                for k in k0..k1 {
                    let f = data[k + j * n];
                    if f != 0.0 {
                        let (left, right) = data.split_at_mut(j * n);
                        axpy(-f, &left[k * n + k + 1..k * n + k1], &mut right[k + 1..k1]);
                    }
                }
            }
            // A22 −= L21 U12; the three blocks are disjoint
            let m = n - k1;
            let base = data.as_mut_ptr();
            // SAFETY: L21 = rows k1.., cols k0..k1; U12 = rows k0..k1, cols k1..;
            // A22 = rows k1.., cols k1..; all inside the n×n buffer and pairwise disjoint.
            unsafe {
                gemm_minus(m, k1 - k0, m, base.add(k1 + k0 * n), n, base.add(k0 + k1 * n), n, base.add(k1 + k1 * n), n);
            }
        }
        Ok(Self { lu, piv })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    pub fn solve_in_place(&self, b: &mut [f64]) -> Result<()> {
        let n = self.dim();
        check_len(n, b.len())?;
        for k in 0..n {
            b.swap(k, self.piv[k]);
        }
        for k in 0..n {
            let bk = b[k];
            if bk != 0.0 {
                axpy(-bk, &self.lu.col(k)[k + 1..], &mut b[k + 1..]);
            }
        }
        for k in (0..n).rev() {
            b[k] /= self.lu.data[k + k * n];
            let bk = b[k];
            if bk != 0.0 {
                axpy(-bk, &self.lu.col(k)[..k], &mut b[..k]);
            }
        }
        Ok(())
    }

    /// Blocked forward and back substitution for many right-hand sides.
    pub fn solve_matrix(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.dim();
        check_len(n, b.rows)?;
        let mut x = b.clone();
        let m = x.cols;
        let lu = &self.lu.data;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                for j in 0..m {
                    x.data.swap(k + j * n, p + j * n);
                }
            }
        }
        for k0 in (0..n).step_by(LU_BLOCK) {
            let k1 = (k0 + LU_BLOCK).min(n);
            for j in 0..m {
                let xc = &mut x.data[j * n..(j + 1) * n];
                for k in k0..k1 {
                    let f = xc[k];
                    if f != 0.0 {
                        axpy(-f, &lu[k * n + k + 1..k * n + k1], &mut xc[k + 1..k1]);
                    }
                }
            }
            // SAFETY: L block rows k1.., cols k0..k1 of the factor; X rows k0..k1 and
            // rows k1.. of the separate right-hand-side buffer, disjoint row ranges.
            unsafe {
                let xp = x.data.as_mut_ptr();
                gemm_minus(n - k1, k1 - k0, m, lu.as_ptr().add(k1 + k0 * n), n, xp.add(k0), n, xp.add(k1), n);
            }
        }
        let starts: Vec<usize> = (0..n).step_by(LU_BLOCK).collect();
        for &k0 in starts.iter().rev() {
            let k1 = (k0 + LU_BLOCK).min(n);
            for j in 0..m {
                let xc = &mut x.data[j * n..(j + 1) * n];
                for k in (k0..k1).rev() {
                    xc[k] /= lu[k + k * n];
                    let f = xc[k];
                    if f != 0.0 {
                        axpy(-f, &lu[k * n + k0..k * n + k], &mut xc[k0..k]);
                    }
                }
            }
            // SAFETY: U block rows ..k0, cols k0..k1; X rows k0..k1 and rows ..k0, disjoint.
            unsafe {
                let xp = x.data.as_mut_ptr();
                gemm_minus(k0, k1 - k0, m, lu.as_ptr().add(k0 * n), n, xp.add(k0), n, xp, n);
            }
        }
        Ok(x)
    }
}

const LU_BLOCK: usize = 64;

/// `C ← C − A B` on column-major blocks (`A` is `m × k`, `B` is `k × p`).
///
/// # Safety
/// Each pointer must address a block of the given shape and leading dimension
/// inside a live allocation, and `C` must not overlap `A` or `B`.
#[allow(clippy::too_many_arguments)]
unsafe fn gemm_minus(
    m: usize,
    k: usize,
    p: usize,
    a: *const f64,
    lda: usize,
    b: *const f64,
    ldb: usize,
    c: *mut f64,
    ldc: usize,
) {
    if m == 0 || k == 0 || p == 0 {
        return;
    }
    matrixmultiply::dgemm(m, k, p, -1.0, a, 1, lda as isize, b, 1, ldb as isize, 1.0, c, 1, ldc as isize);
}

/// Solves `A x = b` by LU with partial pivoting.
pub fn solve_linear(a: &DenseMatrix, b: &[f64]) -> Result<Vector> {
    let lu = Lu::factor(a)?;
    let mut x = b.to_vec();
    lu.solve_in_place(&mut x)?;
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocked_lu_matches_single_rhs() {
        // larger than one block, with pivoting forced by a small leading entry
        let n = 150;
        let mut rng = crate::testutil::Uniform::new(3);
        let mut a = DenseMatrix::zeros(n, n);
        for x in a.as_mut_slice() {
            *x = rng.next();
        }
        a[(0, 0)] = 1e-9;
        let b = DenseMatrix::from_col_major(n, 3, rng.vector(3 * n)).unwrap();
        let lu = Lu::factor(&a).unwrap();
        let x = lu.solve_matrix(&b).unwrap();
        for j in 0..3 {
            let mut y = b.col(j).to_vec();
            lu.solve_in_place(&mut y).unwrap();
            let d: f64 = y.iter().zip(x.col(j)).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            assert!(d < 1e-10, "{d:e}");
        }
        let r = a.matmul(&x).unwrap().lin_comb(1.0, &b, -1.0).unwrap();
        assert!(r.frobenius_norm() < 1e-10 * a.frobenius_norm() * x.frobenius_norm());
    }

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn matvec_examples() {
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(a.matvec(&[1.0, 1.0]).unwrap(), vec![3.0, 7.0]);
        assert_eq!(DenseMatrix::identity(3).matvec(&[1.0, -2.0, 5.0]).unwrap(), vec![1.0, -2.0, 5.0]);
        assert_eq!(DenseMatrix::zeros(2, 3).matvec(&[1.0, 2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(a.matvec(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn solve_examples() {
        assert_eq!(solve_linear(&DenseMatrix::identity(2), &[3.0, -1.0]).unwrap(), vec![3.0, -1.0]);
        assert_eq!(solve_linear(&DenseMatrix::diagonal(&[2.0, 4.0]), &[2.0, 4.0]).unwrap(), vec![1.0, 1.0]);
        let rot = m(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        assert_eq!(solve_linear(&rot, &[1.0, 0.0]).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn singular_is_reported() {
        let a = m(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(solve_linear(&a, &[1.0, 1.0]), Err(Error::Singular { .. })));
    }

    #[test]
    fn matmul_matches_naive() {
        let a = m(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
        let b = m(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        assert_eq!(a.matmul(&b).unwrap(), m(&[&[4.0, 5.0], &[10.0, 11.0]]));
        assert_eq!(a.transpose().tr_matmul(&b).unwrap(), a.matmul(&b).unwrap());
        assert_eq!(a.matmul_tr(&b.transpose()).unwrap(), a.matmul(&b).unwrap());
    }

    #[test]
    fn qr_identity_and_rank_one() {
        let q = qr_orthonormalize(&DenseMatrix::identity(3), 1e-12).unwrap();
        assert_eq!(q.cols(), 3);
        for j in 0..3 {
            assert_eq!(q.col(j)[j].abs(), 1.0);
        }
        let c = [1.0, -2.0, 2.0];
        let a = DenseMatrix::from_columns(3, &[c.to_vec(), c.iter().map(|v| 2.0 * v).collect()]).unwrap();
        let q = qr_orthonormalize(&a, 1e-12).unwrap();
        assert_eq!(q.cols(), 1);
        let s = q.col(0)[0].signum();
        for i in 0..3 {
            assert!((s * q.col(0)[i] - c[i] / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn qr_all_zero_gives_empty() {
        let q = qr_orthonormalize(&DenseMatrix::zeros(4, 2), 1e-12).unwrap();
        assert_eq!((q.rows(), q.cols()), (4, 0));
    }

    #[test]
    fn block_roundtrip() {
        let a = m(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &[7.0, 8.0, 9.0]]);
        let b = a.block(1, 1, 2, 2);
        assert_eq!(b, m(&[&[5.0, 6.0], &[8.0, 9.0]]));
        let mut z = DenseMatrix::zeros(3, 3);
        z.set_block(1, 1, &b);
        assert_eq!(z[(2, 2)], 9.0);
        assert_eq!(z[(0, 0)], 0.0);
    }

    #[test]
    fn norm2_survives_large_entries() {
        assert!((norm2(&[3e200, 4e200]) / 5e200 - 1.0).abs() < 1e-15);
        assert_eq!(norm2(&[]), 0.0);
    }
}
