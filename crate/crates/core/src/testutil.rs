use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::dense::{DenseMatrix, Vector};
use crate::hamiltonian::HamiltonianOperator;

pub struct Uniform(ChaCha8Rng);

impl Uniform {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// uniform on [-1, 1)
    pub fn next(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }

    pub fn vector(&mut self, len: usize) -> Vector {
        (0..len).map(|_| self.next()).collect()
    }
}

/// Dense random Hamiltonian of order `2n` with solver attached.
pub fn random_hamiltonian(n: usize, seed: u64) -> (HamiltonianOperator, DenseMatrix) {
    let mut rng = Uniform::new(seed);
    let mut h = DenseMatrix::zeros(2 * n, 2 * n);
    let e: Vec<f64> = rng.vector(n * n);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] = e[i + n * j];
            h[(n + j, n + i)] = -e[i + n * j];
        }
        for j in i..n {
            let b = rng.next();
            let c = rng.next();
            h[(i, n + j)] = b;
            h[(j, n + i)] = b;
            h[(n + i, j)] = c;
            h[(n + j, i)] = c;
        }
    }
    let op = HamiltonianOperator::from_dense(&h).unwrap().with_solver().unwrap();
    (op, h)
}

pub fn rotation() -> HamiltonianOperator {
    HamiltonianOperator::from_dense(&DenseMatrix::from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]).unwrap()).unwrap()
}

pub fn assert_close(a: &DenseMatrix, b: &DenseMatrix, tol: f64) {
    let d = a.lin_comb(1.0, b, -1.0).unwrap().frobenius_norm();
    assert!(d <= tol * b.frobenius_norm().max(1.0), "difference {d:e}");
}
