//! Dense matrix exponential and phi-function actions.
//!
//! `expm` is the degree-13 scaling-and-squaring scheme with the usual
//! lower-degree shortcuts for small norms. No balancing is done.

use alloc::vec::Vec;

use crate::dense::{axpy, solve_linear, DenseMatrix, Lu, Vector};
use crate::error::{check_len, Error, Result};
use crate::hamiltonian::{j_left, sub_j};

const THETA: [(usize, f64); 4] =
    [(3, 1.495585217958292e-2), (5, 2.53939833006323e-1), (7, 9.504178996162932e-1), (9, 2.097847961257068e0)];
const THETA_13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] =
    [17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0, 110880.0, 3960.0, 90.0, 1.0];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PhiMode {
    /// `(e^A − I) A⁻¹ b`
    Explicit,
    /// top-right column of `exp([[A, b], [0, 0]])`
    Implicit,
}

/// `e^A` by scaling and squaring with a diagonal Padé approximant.
pub fn expm(a: &DenseMatrix) -> Result<DenseMatrix> {
    expm_impl(a, false)
}

/// `e^A` for Hamiltonian `A` (even order, `J A` symmetric).
///
/// Squaring amplifies the small symplecticity defect of the Padé step by the
/// norm of the result. After the Padé step and after every squaring the
/// iterate is pulled back towards the symplectic group with the first-order
/// correction `X ← X (I + ½ J (XᵀJX − J))`, which leaves the accuracy of the
/// approximation untouched.
pub fn expm_hamiltonian(a: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.rows().is_multiple_of(2) {
        return Err(Error::InvalidArgument("Hamiltonian matrices have even order"));
    }
    expm_impl(a, true)
}

fn expm_impl(a: &DenseMatrix, symplectic: bool) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.rows(), found: a.cols() });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = a.rows();
    if n == 0 {
        return Ok(DenseMatrix::zeros(0, 0));
    }
    let norm = a.norm_one();
    let fix = |x: DenseMatrix| if symplectic { symplectic_correction(&x) } else { Ok(x) };

    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            let x = pade_low(a, coeffs)?;
            return finish(fix(x)?, norm);
        }
    }

    let s = if norm > THETA_13 { libm::ceil(libm::log2(norm / THETA_13)) as i32 } else { 0 };
    if s > 1000 {
        return Err(Error::Overflow { norm });
    }
    let a = a.scaled(libm::pow(2.0, -(s as f64)));
    let mut x = fix(pade_13(&a)?)?;
    for _ in 0..s {
        flush_negligible(&mut x);
        x = fix(x.matmul(&x)?)?;
        if !x.is_finite() {
            return Err(Error::Overflow { norm });
        }
    }
    finish(x, norm)
}

/// Zeroes entries 150 orders of magnitude below the largest one. Exponentials
/// of banded matrices decay super-exponentially off the diagonal, and further
/// squarings would otherwise run on subnormal numbers at a fraction of the
/// usual speed.
fn flush_negligible(x: &mut DenseMatrix) {
    let cut = 1e-150 * x.max_abs();
    for v in x.as_mut_slice() {
        if v.abs() < cut {
            *v = 0.0;
        }
    }
}

fn finish(x: DenseMatrix, norm: f64) -> Result<DenseMatrix> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Overflow { norm })
    }
}

fn pade_low(a: &DenseMatrix, b: &[f64]) -> Result<DenseMatrix> {
    let n = a.rows();
    let a2 = a.matmul(a)?;
    // powers A^0, A^2, A^4, ...
    let mut even: Vec<DenseMatrix> = Vec::new();
    even.push(DenseMatrix::identity(n));
    even.push(a2);
    while even.len() < b.len() / 2 {
        let last = even.last().unwrap().matmul(&even[1])?;
        even.push(last);
    }
    let mut u = DenseMatrix::zeros(n, n);
    let mut v = DenseMatrix::zeros(n, n);
    for (i, p) in even.iter().enumerate() {
        axpy(b[2 * i + 1], p.as_slice(), u.as_mut_slice());
        axpy(b[2 * i], p.as_slice(), v.as_mut_slice());
    }
    let u = a.matmul(&u)?;
    pade_solve(&u, &v)
}

fn pade_13(a: &DenseMatrix) -> Result<DenseMatrix> {
    let b = &B13;
    let n = a.rows();
    let a2 = a.matmul(a)?;
    let a4 = a2.matmul(&a2)?;
    let a6 = a4.matmul(&a2)?;
    let ident = DenseMatrix::identity(n);

    let comb = |c6: f64, c4: f64, c2: f64| -> DenseMatrix {
        let mut t = a6.scaled(c6);
        axpy(c4, a4.as_slice(), t.as_mut_slice());
        axpy(c2, a2.as_slice(), t.as_mut_slice());
        t
    };
    let mut u_inner = a6.matmul(&comb(b[13], b[11], b[9]))?;
    let low = comb(b[7], b[5], b[3]);
    axpy(1.0, low.as_slice(), u_inner.as_mut_slice());
    axpy(b[1], ident.as_slice(), u_inner.as_mut_slice());
    let u = a.matmul(&u_inner)?;

    let mut v = a6.matmul(&comb(b[12], b[10], b[8]))?;
    let low = comb(b[6], b[4], b[2]);
    axpy(1.0, low.as_slice(), v.as_mut_slice());
    axpy(b[0], ident.as_slice(), v.as_mut_slice());
    pade_solve(&u, &v)
}

/// Solves `(V − U) X = V + U`.
fn pade_solve(u: &DenseMatrix, v: &DenseMatrix) -> Result<DenseMatrix> {
    let p = v.lin_comb(1.0, u, 1.0)?;
    let q = v.lin_comb(1.0, u, -1.0)?;
    Lu::factor(&q)?.solve_matrix(&p)
}

fn symplectic_correction(x: &DenseMatrix) -> Result<DenseMatrix> {
    // R = XᵀJX − J is skew; X ← X + ½ X (J R)
    let mut r = x.tr_matmul(&j_left(x)?)?;
    sub_j(&mut r);
    let corr = x.matmul(&j_left(&r)?)?;
    x.lin_comb(1.0, &corr, 0.5)
}

/// `φ(A) b = (e^A − I) A⁻¹ b`; fails on singular `A`.
pub fn phi_explicit(a: &DenseMatrix, b: &[f64]) -> Result<Vector> {
    check_len(a.rows(), b.len())?;
    let e = expm(a)?;
    phi_explicit_from_exp(a, &e, b)
}

/// Explicit φ when `e^A` is already at hand.
pub fn phi_explicit_from_exp(a: &DenseMatrix, exp_a: &DenseMatrix, b: &[f64]) -> Result<Vector> {
    check_len(a.rows(), b.len())?;
    check_len(a.rows(), exp_a.rows())?;
    let x = solve_linear(a, b)?;
    let mut y = exp_a.matvec(&x)?;
    axpy(-1.0, &x, &mut y);
    Ok(y)
}

/// `φ(A) b` read off the exponential of the augmented matrix `[[A, b], [0, 0]]`.
pub fn phi_implicit(a: &DenseMatrix, b: &[f64]) -> Result<Vector> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.rows(), found: a.cols() });
    }
    let m = a.rows();
    check_len(m, b.len())?;
    let mut aug = DenseMatrix::zeros(m + 1, m + 1);
    aug.set_block(0, 0, a);
    aug.col_mut(m)[..m].copy_from_slice(b);
    let e = expm(&aug)?;
    Ok(e.col(m)[..m].to_vec())
}

pub fn phi(a: &DenseMatrix, b: &[f64], mode: PhiMode) -> Result<Vector> {
    match mode {
        PhiMode::Explicit => phi_explicit(a, b),
        PhiMode::Implicit => phi_implicit(a, b),
    }
}
