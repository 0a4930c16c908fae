use alloc::vec;
use alloc::vec::Vec;

use super::{
    unit_start, Breakdown, JBasis, KrylovDecomposition, KrylovOptions, LeftInverse, MethodId, OpCounts, Remainder,
};
use crate::dense::{axpy, dot, norm2, DenseMatrix, Vector};
use crate::error::{Error, Result};
use crate::hamiltonian::{j_inner, HamiltonianOperator};

/// Incremental Hamiltonian Lanczos process.
///
/// Produces `S = [U V]` with `Sᵀ J S = J_k` and
/// `H S = S [[G, T], [D, −G]] + β_k u_{k+1} e_{2k}ᵀ`, where `G = diag(γ)`,
/// `D = diag(δ)` and `T` is symmetric tridiagonal with diagonal `α` and
/// off-diagonal `β`. Coefficients:
///
/// ```text
/// γ_j = u_jᵀ H u_j       δ_j = u_jᵀ J H u_j      v_j = (H u_j − γ_j u_j) / δ_j
/// α_j = −v_jᵀ J H v_j    u_{j+1} β_j = H v_j − β_{j−1} u_{j−1} − α_j u_j + γ_j v_j
/// ```
///
/// The sign of `δ_j` is chosen so that `u_jᵀ J v_j = +1`.
pub struct LanczosBuilder<'a> {
    op: &'a HamiltonianOperator,
    opts: KrylovOptions,
    b_norm: f64,
    u: Vec<Vector>,
    v: Vec<Vector>,
    next: Vector,
    gamma: Vec<f64>,
    delta: Vec<f64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    pairs: JBasis,
    breakdown: Option<Breakdown>,
    counts: OpCounts,
}

impl<'a> LanczosBuilder<'a> {
    pub fn new(op: &'a HamiltonianOperator, b: &[f64], opts: &KrylovOptions) -> Result<Self> {
        let (u1, b_norm) = unit_start(op, b)?;
        Ok(Self {
            op,
            opts: *opts,
            b_norm,
            u: Vec::new(),
            v: Vec::new(),
            next: u1,
            gamma: Vec::new(),
            delta: Vec::new(),
            alpha: Vec::new(),
            beta: Vec::new(),
            pairs: JBasis::default(),
            breakdown: None,
            counts: OpCounts { norms: 1, ..OpCounts::default() },
        })
    }

    pub fn pairs(&self) -> usize {
        self.u.len()
    }

    pub fn breakdown(&self) -> Option<Breakdown> {
        self.breakdown
    }

    pub fn b_norm(&self) -> f64 {
        self.b_norm
    }

    /// Adds one pair `(u_j, v_j)`. Returns `false` once broken down.
    pub fn step(&mut self) -> Result<bool> {
        if self.breakdown.is_some() {
            return Ok(false);
        }
        let j = self.u.len();
        let tol = self.opts.policy.tol();
        let u = core::mem::take(&mut self.next);
        let hu = self.op.matvec(&u)?;
        let gamma = dot(&u, &hu);
        let delta = j_inner(&u, &hu);
        self.counts.matvecs += 1;
        self.counts.inner_products += 2;
        if delta.abs() < tol {
            self.next = u;
            self.breakdown = Some(Breakdown { step: j + 1, quantity: "delta_j", value: delta });
            return Ok(false);
        }
        let mut v = hu;
        axpy(-gamma, &u, &mut v);
        for x in &mut v {
            *x /= delta;
        }
        if self.opts.re_j_orthogonalize {
            self.counts.reorth_inner_products += self.pairs.project(&mut v);
        }
        let hv = self.op.matvec(&v)?;
        let alpha = -j_inner(&v, &hv);
        self.counts.matvecs += 1;
        self.counts.inner_products += 1;

        let mut w = hv;
        if j > 0 {
            axpy(-self.beta[j - 1], &self.u[j - 1], &mut w);
        }
        axpy(-alpha, &u, &mut w);
        axpy(gamma, &v, &mut w);

        self.u.push(u);
        self.v.push(v);
        self.gamma.push(gamma);
        self.delta.push(delta);
        self.alpha.push(alpha);
        if self.opts.re_j_orthogonalize {
            self.pairs.push(self.u[j].clone(), self.v[j].clone());
            self.counts.reorth_inner_products += self.pairs.project(&mut w);
        }
        let beta = norm2(&w);
        self.counts.norms += 1;
        if beta < tol {
            self.beta.push(0.0);
            self.next = vec![0.0; w.len()];
            self.breakdown = Some(Breakdown { step: j + 1, quantity: "beta_j", value: beta });
            return Ok(true);
        }
        for x in &mut w {
            *x /= beta;
        }
        self.beta.push(beta);
        self.next = w;
        Ok(true)
    }

    /// `H_{2k} = [[G, T], [D, −G]]`, assembled from the coefficients.
    pub fn projected(&self) -> DenseMatrix {
        let k = self.u.len();
        let mut ht = DenseMatrix::zeros(2 * k, 2 * k);
        for j in 0..k {
            ht[(j, j)] = self.gamma[j];
            ht[(k + j, k + j)] = -self.gamma[j];
            ht[(k + j, j)] = self.delta[j];
            ht[(j, k + j)] = self.alpha[j];
            if j + 1 < k {
                ht[(j, k + j + 1)] = self.beta[j];
                ht[(j + 1, k + j)] = self.beta[j];
            }
        }
        ht
    }

    /// `β_k` (zero after an invariant-subspace breakdown).
    pub fn remainder_scalar(&self) -> f64 {
        self.beta.last().copied().unwrap_or(0.0)
    }

    pub fn coefficients(&self) -> (&[f64], &[f64], &[f64], &[f64]) {
        (&self.gamma, &self.delta, &self.alpha, &self.beta)
    }

    pub fn decomposition(&self) -> KrylovDecomposition {
        let k = self.u.len();
        let dim = self.op.dim();
        let cols: Vec<Vector> = self.u.iter().chain(&self.v).cloned().collect();
        let mut start = vec![0.0; 2 * k];
        if k > 0 {
            start[0] = self.b_norm;
        }
        KrylovDecomposition {
            method: MethodId::HamiltonianLanczos,
            basis: DenseMatrix::from_columns(dim, &cols).unwrap_or_else(|_| DenseMatrix::zeros(dim, 0)),
            projected: self.projected(),
            left_inverse: LeftInverse::JSymplectic,
            start_coord: start,
            remainder: (k > 0).then(|| Remainder {
                scalar: self.remainder_scalar(),
                index: 2 * k - 1,
                vector: self.next.clone(),
            }),
            breakdown: self.breakdown,
            counts: self.counts,
        }
    }
}

/// `k` pairs of the Hamiltonian Lanczos process.
pub fn hamiltonian_lanczos(
    op: &HamiltonianOperator,
    b: &[f64],
    k: usize,
    opts: &KrylovOptions,
) -> Result<KrylovDecomposition> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1"));
    }
    let mut builder = LanczosBuilder::new(op, b, opts)?;
    for _ in 0..k {
        if !builder.step()? {
            break;
        }
    }
    Ok(builder.decomposition())
}
