use alloc::vec;
use alloc::vec::Vec;

use super::{unit_start, Breakdown, KrylovDecomposition, KrylovOptions, LeftInverse, MethodId, OpCounts, Remainder};
use crate::dense::{axpy, dot, norm2, DenseMatrix, Vector};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianOperator;

/// Incremental Arnoldi process (modified Gram–Schmidt, optional second pass).
///
/// `step` extends the basis by one vector; `decomposition` snapshots the
/// current state. The adaptive loop uses this to avoid restarting.
pub struct ArnoldiBuilder<'a> {
    op: &'a HamiltonianOperator,
    opts: KrylovOptions,
    b_norm: f64,
    // u_1 .. u_{j+1}
    u: Vec<Vector>,
    // column j holds h_{1..j+1, j}
    h: Vec<Vector>,
    breakdown: Option<Breakdown>,
    counts: OpCounts,
}

impl<'a> ArnoldiBuilder<'a> {
    pub fn new(op: &'a HamiltonianOperator, b: &[f64], opts: &KrylovOptions) -> Result<Self> {
        let (u1, b_norm) = unit_start(op, b)?;
        Ok(Self {
            op,
            opts: *opts,
            b_norm,
            u: vec![u1],
            h: Vec::new(),
            breakdown: None,
            counts: OpCounts { norms: 1, ..OpCounts::default() },
        })
    }

    pub fn steps(&self) -> usize {
        self.h.len()
    }

    pub fn breakdown(&self) -> Option<Breakdown> {
        self.breakdown
    }

    pub fn b_norm(&self) -> f64 {
        self.b_norm
    }

    /// One Arnoldi step. Returns `false` (and does nothing) once broken down.
    pub fn step(&mut self) -> Result<bool> {
        if self.breakdown.is_some() {
            return Ok(false);
        }
        let j = self.h.len();
        let mut z = self.op.matvec(&self.u[j])?;
        self.counts.matvecs += 1;
        let mut col = vec![0.0; j + 2];
        for (i, ui) in self.u.iter().enumerate() {
            let c = dot(ui, &z);
            axpy(-c, ui, &mut z);
            col[i] = c;
        }
        self.counts.inner_products += j + 1;
        if self.opts.reorthogonalize {
            for (i, ui) in self.u.iter().enumerate() {
                let c = dot(ui, &z);
                axpy(-c, ui, &mut z);
                col[i] += c;
            }
            self.counts.reorth_inner_products += j + 1;
        }
        let beta = norm2(&z);
        self.counts.norms += 1;
        if beta < self.opts.policy.tol() {
            col[j + 1] = 0.0;
            self.h.push(col);
            self.u.push(vec![0.0; z.len()]);
            self.breakdown = Some(Breakdown { step: j + 1, quantity: "h_{j+1,j}", value: beta });
            return Ok(true);
        }
        col[j + 1] = beta;
        for v in &mut z {
            *v /= beta;
        }
        self.h.push(col);
        self.u.push(z);
        Ok(true)
    }

    /// `Ĥ_k`, the leading `k × k` block of the Hessenberg matrix.
    pub fn hessenberg(&self) -> DenseMatrix {
        let k = self.h.len();
        let mut hk = DenseMatrix::zeros(k, k);
        for (j, col) in self.h.iter().enumerate() {
            for i in 0..(j + 2).min(k) {
                hk[(i, j)] = col[i];
            }
        }
        hk
    }

    /// `ĥ_{k+1,k}` (zero after breakdown).
    pub fn remainder_scalar(&self) -> f64 {
        self.h.last().map_or(0.0, |c| c[c.len() - 1])
    }

    /// The orthonormal basis `U_k` (without `u_{k+1}`).
    pub fn basis(&self) -> DenseMatrix {
        let k = self.h.len();
        DenseMatrix::from_columns(self.op.dim(), &self.u[..k]).unwrap_or_else(|_| DenseMatrix::zeros(self.op.dim(), 0))
    }

    pub fn decomposition(&self) -> KrylovDecomposition {
        let k = self.h.len();
        let mut start = vec![0.0; k];
        if k > 0 {
            start[0] = self.b_norm;
        }
        KrylovDecomposition {
            method: MethodId::Arnoldi,
            basis: self.basis(),
            projected: self.hessenberg(),
            left_inverse: LeftInverse::Transpose,
            start_coord: start,
            remainder: (k > 0).then(|| Remainder {
                scalar: self.remainder_scalar(),
                index: k - 1,
                vector: self.u[k].clone(),
            }),
            breakdown: self.breakdown,
            counts: self.counts,
        }
    }
}

/// `k` steps of the Arnoldi process on `H` started at `b`.
pub fn arnoldi(op: &HamiltonianOperator, b: &[f64], k: usize, opts: &KrylovOptions) -> Result<KrylovDecomposition> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1"));
    }
    let mut builder = ArnoldiBuilder::new(op, b, opts)?;
    for _ in 0..k {
        if !builder.step()? {
            break;
        }
    }
    Ok(builder.decomposition())
}
