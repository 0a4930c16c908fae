//! Hamiltonian extended Krylov subspace method (HEKS), `t = s = ℓ` variant.
//!
//! Alternates a forward pair `(u_j, v_j)` (products with `H`) and an inverse
//! pair `(y_j, x_j)` (solves with `H`) and orders the basis as
//!
//! ```text
//! S = [y_ℓ … y_1, u_1 … u_ℓ, x_ℓ … x_1, v_1 … v_ℓ],   Sᵀ J S = J_{2ℓ}.
//! ```
//!
//! The projected matrix is assembled from the recurrence coefficients only;
//! every entry outside its block pattern is zero by construction.

use alloc::vec;
use alloc::vec::Vec;

use super::{Breakdown, JBasis, KrylovDecomposition, KrylovOptions, LeftInverse, MethodId, OpCounts};
use crate::dense::{axpy, norm2, DenseMatrix, Vector};
use crate::error::{Error, Result};
use crate::hamiltonian::{j_inner, HamiltonianOperator};

struct Stop(Breakdown);

struct State<'a> {
    op: &'a HamiltonianOperator,
    tol: f64,
    rejorth: bool,
    pairs: JBasis,
    counts: OpCounts,
    u: Vec<Vector>,
    v: Vec<Vector>,
    x: Vec<Vector>,
    y: Vec<Vector>,
    hv: Vec<Vector>,
    hiu: Vec<Vector>,
    theta: Vec<f64>,
    lambda: Vec<f64>,
    delta: Vec<f64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    gamma: Vec<f64>,
    mu: Vec<f64>,
}

impl State<'_> {
    fn mv(&mut self, x: &[f64]) -> Result<Vector> {
        self.counts.matvecs += 1;
        self.op.matvec(x)
    }

    fn sv(&mut self, x: &[f64]) -> Result<Vector> {
        self.counts.solves += 1;
        self.op.solve(x)
    }

    fn jd(&mut self, a: &[f64], b: &[f64]) -> f64 {
        self.counts.inner_products += 1;
        j_inner(a, b)
    }

    fn rj(&mut self, w: &mut Vector) {
        if self.rejorth {
            self.counts.reorth_inner_products += self.pairs.project(w);
        }
    }

    fn normalize(&mut self, mut w: Vector, step: usize, what: &'static str) -> core::result::Result<Vector, Stop> {
        let nw = norm2(&w);
        self.counts.norms += 1;
        if nw < self.tol {
            return Err(Stop(Breakdown { step, quantity: what, value: nw }));
        }
        for x in &mut w {
            *x /= nw;
        }
        Ok(w)
    }

    /// u_j from `w`, then `v_j = H u_j / θ_j`.
    fn new_u(&mut self, mut w: Vector, step: usize) -> Result<core::result::Result<(), Stop>> {
        self.rj(&mut w);
        let u = match self.normalize(w, step, "||w_u||") {
            Ok(u) => u,
            Err(s) => return Ok(Err(s)),
        };
        let hu = self.mv(&u)?;
        let theta = self.jd(&u, &hu);
        if theta.abs() < self.tol {
            return Ok(Err(Stop(Breakdown { step, quantity: "theta_j", value: theta })));
        }
        let mut v: Vector = hu.iter().map(|e| e / theta).collect();
        self.rj(&mut v);
        if self.rejorth {
            self.pairs.push(u.clone(), v.clone());
        }
        self.u.push(u);
        self.v.push(v);
        self.theta.push(theta);
        Ok(Ok(()))
    }

    /// x_j from `w`, then `y_j = H⁻¹ x_j / ((H⁻¹x_j)ᵀ J x_j)`.
    fn new_x(&mut self, mut w: Vector, step: usize) -> Result<core::result::Result<(), Stop>> {
        self.rj(&mut w);
        let x = match self.normalize(w, step, "||w_x||") {
            Ok(x) => x,
            Err(s) => return Ok(Err(s)),
        };
        let hix = self.sv(&x)?;
        let c = self.jd(&hix, &x);
        if c.abs() < self.tol {
            return Ok(Err(Stop(Breakdown { step, quantity: "(H^-1 x_j)^T J x_j", value: c })));
        }
        let mut y: Vector = hix.iter().map(|e| e / c).collect();
        self.rj(&mut y);
        if self.rejorth {
            self.pairs.push(y.clone(), x.clone());
        }
        let hx = self.mv(&x)?;
        let hy = self.mv(&y)?;
        let lambda = -self.jd(&x, &hx);
        let delta = self.jd(&y, &hy);
        self.x.push(x);
        self.y.push(y);
        self.lambda.push(lambda);
        self.delta.push(delta);
        Ok(Ok(()))
    }

    /// `H v_j` and the coefficients α_j, β_j, γ_j, μ_j closing block `j` (0-based).
    fn close_block(&mut self, j: usize) -> Result<()> {
        let vj = self.v[j].clone();
        let hv = self.mv(&vj)?;
        let alpha = -self.jd(&vj, &hv);
        let xj = self.x[j].clone();
        let gamma = -self.jd(&xj, &hv);
        let (beta, mu) = if j > 0 {
            let hvp = self.hv[j - 1].clone();
            let xp = self.x[j - 1].clone();
            (-self.jd(&vj, &hvp), -self.jd(&xp, &hv))
        } else {
            (0.0, 0.0)
        };
        self.hv.push(hv);
        self.alpha.push(alpha);
        self.beta.push(beta);
        self.gamma.push(gamma);
        self.mu.push(mu);
        Ok(())
    }

    fn run(&mut self, b: &[f64], l: usize) -> Result<Option<Breakdown>> {
        macro_rules! attempt {
            ($e:expr) => {
                if let Err(Stop(bd)) = $e? {
                    return Ok(Some(bd));
                }
            };
        }
        let nb = norm2(b);
        self.counts.norms += 1;
        attempt!(self.new_u(b.iter().map(|e| e / nb).collect(), 1));
        let u0 = self.u[0].clone();
        let hiu0 = self.sv(&u0)?;
        let f11 = self.jd(&u0, &hiu0);
        self.hiu.push(hiu0.clone());
        let mut w = hiu0;
        axpy(-f11, &self.v[0], &mut w);
        attempt!(self.new_x(w, 1));
        self.close_block(0)?;

        for j in 1..l {
            let mut w = self.hv[j - 1].clone();
            axpy(-self.gamma[j - 1], &self.y[j - 1], &mut w);
            axpy(-self.alpha[j - 1], &self.u[j - 1], &mut w);
            if j >= 2 {
                axpy(-self.mu[j - 1], &self.y[j - 2], &mut w);
                axpy(-self.beta[j - 1], &self.u[j - 2], &mut w);
            }
            attempt!(self.new_u(w, j + 1));

            let yp = self.y[j - 1].clone();
            let hiy = self.sv(&yp)?;
            let uj = self.u[j].clone();
            let hiu = self.sv(&uj)?;
            let e1 = self.jd(&yp, &hiy);
            let g1 = self.jd(&yp, &self.hiu[j - 1].clone());
            let g2 = self.jd(&yp, &hiu);
            self.hiu.push(hiu);
            let mut w = hiy.clone();
            axpy(-e1, &self.x[j - 1], &mut w);
            axpy(-g1, &self.v[j - 1], &mut w);
            axpy(-g2, &self.v[j], &mut w);
            if j >= 2 {
                let ypp = self.y[j - 2].clone();
                let e2 = self.jd(&ypp, &hiy);
                axpy(-e2, &self.x[j - 2], &mut w);
            }
            attempt!(self.new_x(w, j + 1));
            self.close_block(j)?;
        }
        Ok(None)
    }
}

/// HEKS with `ℓ` blocks (basis dimension `4ℓ`); needs a solve-capable operator.
///
/// On breakdown the decomposition is truncated to the last complete block.
pub fn heks(op: &HamiltonianOperator, b: &[f64], l: usize, opts: &KrylovOptions) -> Result<KrylovDecomposition> {
    if l == 0 {
        return Err(Error::InvalidArgument("HEKS needs at least one block"));
    }
    if !op.is_solve_capable() {
        return Err(Error::NotSolveCapable);
    }
    super::unit_start(op, b)?;
    let mut st = State {
        op,
        tol: opts.policy.tol(),
        rejorth: opts.re_j_orthogonalize,
        pairs: JBasis::default(),
        counts: OpCounts::default(),
        u: Vec::new(),
        v: Vec::new(),
        x: Vec::new(),
        y: Vec::new(),
        hv: Vec::new(),
        hiu: Vec::new(),
        theta: Vec::new(),
        lambda: Vec::new(),
        delta: Vec::new(),
        alpha: Vec::new(),
        beta: Vec::new(),
        gamma: Vec::new(),
        mu: Vec::new(),
    };
    let breakdown = st.run(b, l)?;
    // blocks whose closing coefficients exist
    let l = st.alpha.len();
    let k = 2 * l;
    let mut cols: Vec<Vector> = Vec::with_capacity(2 * k);
    cols.extend(st.y[..l].iter().rev().cloned());
    cols.extend(st.u[..l].iter().cloned());
    cols.extend(st.x[..l].iter().rev().cloned());
    cols.extend(st.v[..l].iter().cloned());
    let basis = DenseMatrix::from_columns(op.dim(), &cols)?;

    let mut ht = DenseMatrix::zeros(2 * k, 2 * k);
    for i in 0..l {
        let ri = l - 1 - i; // y_i, x_i
        let ui = l + i; // u_i, v_i
        ht[(k + ri, ri)] = st.delta[i];
        ht[(k + ui, ui)] = st.theta[i];
        ht[(ri, k + ri)] = st.lambda[i];
        ht[(ui, k + ui)] = st.alpha[i];
        ht[(ri, k + ui)] = st.gamma[i];
        ht[(ui, k + ri)] = st.gamma[i];
        if i >= 1 {
            ht[(ui, k + ui - 1)] = st.beta[i];
            ht[(ui - 1, k + ui)] = st.beta[i];
            let rp = l - i; // y_{i-1}, x_{i-1}
            ht[(rp, k + ui)] = st.mu[i];
            ht[(ui, k + rp)] = st.mu[i];
        }
    }
    let mut d = KrylovDecomposition {
        method: MethodId::Heks,
        basis,
        projected: ht,
        left_inverse: LeftInverse::JSymplectic,
        start_coord: vec![],
        remainder: None,
        breakdown,
        counts: st.counts,
    };
    d.start_coord = d.apply_left_inverse(b)?;
    Ok(d)
}
