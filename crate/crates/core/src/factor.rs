//! Banded LU with partial pivoting after a reverse Cuthill–McKee reordering.
//!
//! The Hamiltonian test matrices are (periodic) tridiagonal blocks, so `JH`
//! reorders to a narrow band and the band factorization is cheap. For an
//! unstructured pattern the band grows and this degrades to dense LU.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<f64>,
    piv: Vec<usize>,
    /// perm[new] = old
    perm: Vec<usize>,
}

/// Reverse Cuthill–McKee ordering of the symmetrized pattern; `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in a.triplets() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }
    let deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (deg[i], i));
    for &start in &by_degree {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&w| !seen[w]).collect();
            nb.sort_by_key(|&w| (deg[w], w));
            for w in nb {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

impl BandedLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        check_len(n, a.ncols())?;
        let perm = reverse_cuthill_mckee(a);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let (mut kl, mut ku) = (0usize, 0usize);
        let mut max_abs = 0.0f64;
        for (i, j, v) in a.triplets() {
            let (pi, pj) = (inv[i], inv[j]);
            if pi > pj {
                kl = kl.max(pi - pj);
            } else {
                ku = ku.max(pj - pi);
            }
            max_abs = max_abs.max(v.abs());
        }
        let ldab = 2 * kl + ku + 1;
        let mut f = Self { n, kl, ku, ldab, ab: vec![0.0; ldab * n], piv: vec![0; n], perm };
        for (i, j, v) in a.triplets() {
            *f.at(inv[i], inv[j]) += v;
        }
        f.eliminate(f64::EPSILON * max_abs)?;
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Lower and upper bandwidth of the reordered matrix.
    pub fn bandwidth(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        // valid for j - (kl + ku) <= i <= j + kl
        (self.kl + self.ku + i - j) + j * self.ldab
    }

    #[inline]
    fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        let k = self.idx(i, j);
        &mut self.ab[k]
    }

    fn eliminate(&mut self, small: f64) -> Result<()> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut p = j;
            let mut best = -1.0;
            for i in j..=j + km {
                let v = self.ab[self.idx(i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= small || best == 0.0 {
                return Err(Error::Singular { pivot: j });
            }
            self.piv[j] = p;
            let last = (n - 1).min(j + ku + kl);
            if p != j {
                for c in j..=last {
                    let (a, b) = (self.idx(j, c), self.idx(p, c));
                    self.ab.swap(a, b);
                }
            }
            let d = self.ab[self.idx(j, j)];
            for i in j + 1..=j + km {
                let k = self.idx(i, j);
                self.ab[k] /= d;
            }
            for c in j + 1..=last {
                let f = self.ab[self.idx(j, c)];
                if f == 0.0 {
                    continue;
                }
                for i in j + 1..=j + km {
                    let l = self.ab[self.idx(i, j)];
                    let k = self.idx(i, c);
                    self.ab[k] -= l * f;
                }
            }
        }
        Ok(())
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        check_len(n, b.len())?;
        let mut x: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for j in 0..n {
            x.swap(j, self.piv[j]);
            let xj = x[j];
            if xj != 0.0 {
                for i in j + 1..=j + self.kl.min(n - 1 - j) {
                    x[i] -= self.ab[self.idx(i, j)] * xj;
                }
            }
        }
        let uw = self.kl + self.ku;
        for j in (0..n).rev() {
            x[j] /= self.ab[self.idx(j, j)];
            let xj = x[j];
            if xj != 0.0 {
                for i in j.saturating_sub(uw)..j {
                    x[i] -= self.ab[self.idx(i, j)] * xj;
                }
            }
        }
        let mut out = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_permuted_tridiagonal() {
        // periodic tridiagonal plus identity shift, nonsingular
        let n = 9;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 3.0));
            t.push((i, (i + 1) % n, -1.0));
            t.push(((i + 1) % n, i, -1.0));
        }
        let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let lu = BandedLu::factor(&a).unwrap();
        let b: Vec<f64> = (0..n).map(|i| i as f64 - 4.0).collect();
        let x = lu.solve(&b).unwrap();
        let r = a.matvec(&x).unwrap();
        for i in 0..n {
            assert!((r[i] - b[i]).abs() < 1e-13);
        }
        let (kl, ku) = lu.bandwidth();
        assert!(kl <= 2 && ku <= 2);
    }

    #[test]
    fn needs_pivoting() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let x = BandedLu::factor(&a).unwrap().solve(&[2.0, 3.0]).unwrap();
        assert_eq!(x, vec![3.0, 2.0]);
    }

    #[test]
    fn singular_detected() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]).unwrap();
        assert!(matches!(BandedLu::factor(&a), Err(Error::Singular { .. })));
    }
}
