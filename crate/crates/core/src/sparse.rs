use alloc::vec;
use alloc::vec::Vec;

use crate::dense::DenseMatrix;
use crate::error::{check_len, Error, Result};

/// Compressed sparse row matrix. Column indices are sorted within each row
/// and duplicates are summed at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut t: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            if i >= nrows || j >= ncols {
                return Err(Error::InvalidArgument("triplet index out of range"));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite);
            }
            t.push((i, j, v));
        }
        // stable sort keeps the summation order of duplicates deterministic
        t.sort_by_key(|a| (a.0, a.1));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(t.len());
        let mut values: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in t {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self { nrows, ncols, row_ptr, col_idx, values })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self { nrows: n, ncols: n, row_ptr: (0..=n).collect(), col_idx: (0..n).collect(), values: d.to_vec() }
    }

    pub fn from_dense(m: &DenseMatrix) -> Self {
        let mut t = Vec::new();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if m[(i, j)] != 0.0 {
                    t.push((i, j, m[(i, j)]));
                }
            }
        }
        // entries are finite and in range by construction
        Self::from_triplets(m.rows(), m.cols(), &t).unwrap_or_else(|_| Self::zeros(m.rows(), m.cols()))
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.find(i, j).unwrap_or(0.0)
    }

    /// Stored value at `(i, j)`, if the entry is part of the pattern.
    pub fn find(&self, i: usize, j: usize) -> Option<f64> {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].binary_search(&j).ok().map(|k| self.values[r.start + k])
    }

    /// `y += alpha · A x`
    pub fn matvec_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_len(self.ncols, x.len())?;
        check_len(self.nrows, y.len())?;
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi += alpha * s;
        }
        Ok(())
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_add(1.0, x, &mut y)?;
        Ok(y)
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &t).unwrap_or_else(|_| Self::zeros(self.ncols, self.nrows))
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut s = self.clone();
        for v in &mut s.values {
            *v *= a;
        }
        s
    }

    /// `a·self + b·other`
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        check_len(self.nrows, other.nrows)?;
        check_len(self.ncols, other.ncols)?;
        let t: Vec<_> = self
            .triplets()
            .map(|(i, j, v)| (i, j, a * v))
            .chain(other.triplets().map(|(i, j, v)| (i, j, b * v)))
            .collect();
        Self::from_triplets(self.nrows, self.ncols, &t)
    }

    /// `(A + Aᵀ)/2`, bit-exactly symmetric.
    pub fn symmetrized(&self) -> Result<Self> {
        if self.nrows != self.ncols {
            return Err(Error::DimensionMismatch { expected: self.nrows, found: self.ncols });
        }
        let mut t = Vec::with_capacity(2 * self.nnz());
        for (i, j, v) in self.triplets() {
            // both (i,j) and (j,i) evaluate the same commutative expression
            match self.find(j, i) {
                Some(w) => t.push((i, j, 0.5 * (v + w))),
                None => {
                    t.push((i, j, 0.5 * v));
                    t.push((j, i, 0.5 * v));
                }
            }
        }
        Self::from_triplets(self.nrows, self.ncols, &t)
    }

    pub fn is_symmetric(&self) -> bool {
        self.nrows == self.ncols && self.triplets().all(|(i, j, v)| self.get(j, i) == v)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn norm_one(&self) -> f64 {
        let mut colsum = vec![0.0f64; self.ncols];
        for (_, j, v) in self.triplets() {
            colsum[j] += v.abs();
        }
        colsum.into_iter().fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 2.0), (0, 1, 3.0)]).unwrap();
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.get(0, 1), 4.0);
        assert_eq!(a.matvec(&[1.0, 1.0]).unwrap(), vec![4.0, 2.0]);
    }

    #[test]
    fn symmetrize_is_exact() {
        let a = CsrMatrix::from_triplets(3, 3, &[(0, 1, 0.1), (1, 0, 0.3), (2, 0, 1.0), (1, 1, 2.0)]).unwrap();
        let s = a.symmetrized().unwrap();
        assert!(s.is_symmetric());
        assert_eq!(s.get(0, 2), 0.5);
        assert_eq!(s.get(1, 0), 0.5 * (0.1 + 0.3));
    }

    #[test]
    fn transpose_and_lin_comb() {
        let a = CsrMatrix::from_triplets(2, 3, &[(0, 2, 5.0), (1, 0, -1.0)]).unwrap();
        let t = a.transpose();
        assert_eq!((t.nrows(), t.ncols()), (3, 2));
        assert_eq!(t.get(2, 0), 5.0);
        let z = a.lin_comb(1.0, &a, -1.0).unwrap();
        assert!(z.triplets().all(|(_, _, v)| v == 0.0));
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(CsrMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
    }
}
