//! Symplectic Arnoldi (SA) and isotropic Arnoldi (IA). Both produce an
//! orthonormal and J-orthogonal basis `S = [V, −J V]`.

use alloc::vec;
use alloc::vec::Vec;

use super::{
    hamiltonian_symmetrize, j_projection, unit_start, Breakdown, KrylovDecomposition, KrylovOptions, LeftInverse,
    MethodId, OpCounts,
};
use crate::dense::{axpy, dot, norm2, DenseMatrix, Vector};
use crate::error::{Error, Result};
use crate::hamiltonian::{apply_j, HamiltonianOperator};

fn neg_j(v: &[f64]) -> Result<Vector> {
    let mut w = apply_j(v)?;
    for x in &mut w {
        *x = -*x;
    }
    Ok(w)
}

fn symplectic_basis(dim: usize, v: &[Vector]) -> Result<DenseMatrix> {
    let mut cols: Vec<Vector> = v.to_vec();
    for vi in v {
        cols.push(neg_j(vi)?);
    }
    DenseMatrix::from_columns(dim, &cols)
}

/// Symplectic Arnoldi with `k` pairs.
///
/// The Arnoldi vectors `u_j` of `K_k(H, b)` are orthogonalized against
/// `v_i` and `J v_i` to give `v_j`. `H̃ = J_kᵀ Sᵀ J H S` is formed by explicit
/// projection and then Hamiltonian-symmetrized.
pub fn symplectic_arnoldi(
    op: &HamiltonianOperator,
    b: &[f64],
    k: usize,
    opts: &KrylovOptions,
) -> Result<KrylovDecomposition> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1"));
    }
    let (u1, _) = unit_start(op, b)?;
    let tol = opts.policy.tol();
    let mut counts = OpCounts { norms: 1, ..OpCounts::default() };
    let mut breakdown = None;
    let mut u: Vec<Vector> = vec![u1.clone()];
    let mut v: Vec<Vector> = vec![u1];
    let mut jv: Vec<Vector> = vec![apply_j(&v[0])?];

    for j in 0..k {
        let mut z = op.matvec(&u[j])?;
        counts.matvecs += 1;
        let passes = if opts.reorthogonalize { 2 } else { 1 };
        for pass in 0..passes {
            for ui in &u {
                let c = dot(ui, &z);
                axpy(-c, ui, &mut z);
            }
            if pass == 0 {
                counts.inner_products += u.len();
            } else {
                counts.reorth_inner_products += u.len();
            }
        }
        let nz = norm2(&z);
        counts.norms += 1;
        if nz < tol {
            breakdown = Some(Breakdown { step: j + 1, quantity: "||z||", value: nz });
            break;
        }
        for x in &mut z {
            *x /= nz;
        }
        u.push(z);
        if v.len() == k {
            continue;
        }
        let mut w = u[j + 1].clone();
        let passes = if opts.re_j_orthogonalize { 2 } else { 1 };
        for pass in 0..passes {
            for (vi, jvi) in v.iter().zip(&jv) {
                let a = dot(vi, &w);
                axpy(-a, vi, &mut w);
                let c = dot(jvi, &w);
                axpy(-c, jvi, &mut w);
            }
            if pass == 0 {
                counts.inner_products += 2 * v.len();
            } else {
                counts.reorth_inner_products += 2 * v.len();
            }
        }
        let nw = norm2(&w);
        counts.norms += 1;
        if nw < tol {
            breakdown = Some(Breakdown { step: j + 1, quantity: "||v||", value: nw });
            break;
        }
        for x in &mut w {
            *x /= nw;
        }
        jv.push(apply_j(&w)?);
        v.push(w);
    }

    let p = v.len().min(k.max(1));
    let s = symplectic_basis(op.dim(), &v[..p])?;
    let mut hs = DenseMatrix::zeros(op.dim(), 2 * p);
    for c in 0..2 * p {
        let y = op.matvec(s.col(c))?;
        hs.set_col(c, &y);
    }
    counts.projection_matvecs += 2 * p;
    let projected = hamiltonian_symmetrize(&j_projection(&s, &hs)?)?;
    finish(MethodId::SymplecticArnoldi, s, projected, b, breakdown, counts)
}

/// Isotropic Arnoldi with `k` pairs.
///
/// Each `H u_j` is orthogonalized against `u_1..u_j` (coefficients `t_ij`)
/// and against `J u_j` (coefficient `d_jj`), which keeps `U` isotropic.
/// `H̃ = [[T, N], [−D, −Tᵀ]]` with `n_ij = −u_iᵀ H J u_j`.
pub fn isotropic_arnoldi(
    op: &HamiltonianOperator,
    b: &[f64],
    k: usize,
    opts: &KrylovOptions,
) -> Result<KrylovDecomposition> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1"));
    }
    let (u1, _) = unit_start(op, b)?;
    let tol = opts.policy.tol();
    let mut counts = OpCounts { norms: 1, ..OpCounts::default() };
    let mut breakdown = None;
    let mut u: Vec<Vector> = vec![u1];
    let mut ju: Vec<Vector> = vec![apply_j(&u[0])?];
    let mut t = DenseMatrix::zeros(k + 1, k);
    let mut d = vec![0.0; k];
    let mut nmat = DenseMatrix::zeros(k, k);
    let mut pairs = 0;

    for j in 0..k {
        let mut z = op.matvec(&u[j])?;
        counts.matvecs += 1;
        for (i, ui) in u.iter().enumerate() {
            let c = dot(ui, &z);
            axpy(-c, ui, &mut z);
            t[(i, j)] += c;
        }
        let c = dot(&ju[j], &z);
        axpy(-c, &ju[j], &mut z);
        d[j] = c;
        counts.inner_products += u.len() + 1;
        if opts.re_j_orthogonalize {
            for (i, (ui, jui)) in u.iter().zip(&ju).enumerate() {
                let c = dot(ui, &z);
                axpy(-c, ui, &mut z);
                t[(i, j)] += c;
                let c = dot(jui, &z);
                axpy(-c, jui, &mut z);
                if i == j {
                    d[j] += c;
                }
            }
            counts.reorth_inner_products += 2 * u.len();
        }
        let tn = norm2(&z);
        counts.norms += 1;
        t[(j + 1, j)] = tn;

        // column j of N, needed even when stopping here
        let y = op.matvec(&ju[j])?;
        counts.projection_matvecs += 1;
        for i in 0..=j {
            let val = -dot(&u[i], &y);
            nmat[(i, j)] = val;
            nmat[(j, i)] = val;
        }
        pairs = j + 1;
        if tn < tol {
            breakdown = Some(Breakdown { step: j + 1, quantity: "t_{j+1,j}", value: tn });
            break;
        }
        for x in &mut z {
            *x /= tn;
        }
        ju.push(apply_j(&z)?);
        u.push(z);
    }

    let p = pairs;
    let s = symplectic_basis(op.dim(), &u[..p])?;
    let mut ht = DenseMatrix::zeros(2 * p, 2 * p);
    for i in 0..p {
        for j in 0..p {
            ht[(i, j)] = t[(i, j)];
            ht[(p + j, p + i)] = -t[(i, j)];
            ht[(i, p + j)] = nmat[(i, j)];
        }
        ht[(p + i, i)] = -d[i];
    }
    finish(MethodId::IsotropicArnoldi, s, ht, b, breakdown, counts)
}

fn finish(
    method: MethodId,
    s: DenseMatrix,
    projected: DenseMatrix,
    b: &[f64],
    breakdown: Option<Breakdown>,
    counts: OpCounts,
) -> Result<KrylovDecomposition> {
    let mut d = KrylovDecomposition {
        method,
        basis: s,
        projected,
        left_inverse: LeftInverse::JSymplectic,
        start_coord: Vec::new(),
        remainder: None,
        breakdown,
        counts,
    };
    d.start_coord = d.apply_left_inverse(b)?;
    Ok(d)
}
