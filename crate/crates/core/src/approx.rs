//! `f(hH) b ≈ S f(h H̃) Wᵀ b`, the a-posteriori estimators for A and HL and
//! the adaptive loop built on them.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::dense::{DenseMatrix, Vector};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianOperator;
use crate::krylov::{ArnoldiBuilder, KrylovDecomposition, KrylovOptions, LanczosBuilder, MethodId};
use crate::matfun::{expm, expm_hamiltonian, phi_explicit, phi_implicit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionId {
    Exp,
    PhiExplicit,
    PhiImplicit,
}

impl FunctionId {
    pub const ALL: [FunctionId; 3] = [FunctionId::Exp, FunctionId::PhiExplicit, FunctionId::PhiImplicit];

    pub fn name(self) -> &'static str {
        match self {
            FunctionId::Exp => "exp",
            FunctionId::PhiExplicit => "phi_expl",
            FunctionId::PhiImplicit => "phi_impl",
        }
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FunctionId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exp" => Ok(FunctionId::Exp),
            "phi_expl" | "phi_explicit" | "phi-expl" => Ok(FunctionId::PhiExplicit),
            "phi_impl" | "phi_implicit" | "phi-impl" => Ok(FunctionId::PhiImplicit),
            _ => Err(Error::InvalidArgument("unknown function (expected exp, phi_expl or phi_impl)")),
        }
    }
}

/// `e^{h H̃}`; uses the structure-preserving exponential whenever `H̃` is Hamiltonian.
pub fn reduced_propagator(d: &KrylovDecomposition, h: f64) -> Result<DenseMatrix> {
    let a = d.projected.scaled(h);
    if d.method.is_structure_preserving() {
        expm_hamiltonian(&a)
    } else {
        expm(&a)
    }
}

/// `S f(h H̃) Wᵀ b`, with `Wᵀ b` taken from `d.start_coord`.
pub fn approximate_action(d: &KrylovDecomposition, f: FunctionId, h: f64) -> Result<Vector> {
    if d.dim() == 0 {
        return Ok(vec![0.0; d.basis.rows()]);
    }
    let coords = match f {
        FunctionId::Exp => reduced_propagator(d, h)?.matvec(&d.start_coord)?,
        FunctionId::PhiExplicit => phi_explicit(&d.projected.scaled(h), &d.start_coord)?,
        FunctionId::PhiImplicit => phi_implicit(&d.projected.scaled(h), &d.start_coord)?,
    };
    d.basis.matvec(&coords)
}

/// `‖b‖ |h ρ [φ(h M) e₁]_index|`, the first term of the error expansion.
pub fn first_term_estimate(projected: &DenseMatrix, rho: f64, index: usize, h: f64, b_norm: f64) -> Result<f64> {
    if rho == 0.0 {
        return Ok(0.0);
    }
    let m = projected.rows();
    if index >= m {
        return Err(Error::DimensionMismatch { expected: m, found: index + 1 });
    }
    let mut e1 = vec![0.0; m];
    e1[0] = 1.0;
    let p = phi_implicit(&projected.scaled(h), &e1)?;
    Ok(b_norm * (h * rho * p[index]).abs())
}

fn estimate_for(d: &KrylovDecomposition, method: MethodId, h: f64, b_norm: f64) -> Result<f64> {
    if d.method != method {
        return Err(Error::InvalidArgument("estimator applied to a decomposition of the wrong method"));
    }
    match &d.remainder {
        Some(rem) => first_term_estimate(&d.projected, rem.scalar, rem.index, h, b_norm),
        None => Ok(0.0),
    }
}

/// `ε_k = ‖b‖ |h ĥ_{k+1,k} e_kᵀ φ(h Ĥ_k) e₁|`
pub fn error_estimate_arnoldi(d: &KrylovDecomposition, h: f64, b_norm: f64) -> Result<f64> {
    estimate_for(d, MethodId::Arnoldi, h, b_norm)
}

/// `ε_k = ‖b‖ |h β_k e_{2k}ᵀ φ(h H_{2k}) e₁|`
pub fn error_estimate_hl(d: &KrylovDecomposition, h: f64, b_norm: f64) -> Result<f64> {
    estimate_for(d, MethodId::HamiltonianLanczos, h, b_norm)
}

#[derive(Clone, Debug)]
pub struct AdaptiveResult {
    pub approximation: Vector,
    /// Arnoldi steps or Lanczos pairs
    pub steps_used: usize,
    pub basis_dim: usize,
    pub estimate_history: Vec<(usize, f64)>,
    /// filled in by callers that own a reference solution
    pub actual_error: Option<f64>,
    pub converged: bool,
}

enum Builder<'a> {
    A(ArnoldiBuilder<'a>),
    Hl(LanczosBuilder<'a>),
}

impl Builder<'_> {
    fn step(&mut self) -> Result<bool> {
        match self {
            Builder::A(b) => b.step(),
            Builder::Hl(b) => b.step(),
        }
    }

    fn decomposition(&self) -> KrylovDecomposition {
        match self {
            Builder::A(b) => b.decomposition(),
            Builder::Hl(b) => b.decomposition(),
        }
    }
}

/// Grows an A or HL basis one step (pair) at a time until the first-term
/// estimate drops to `tol` or `k_max` is reached.
///
/// A breakdown makes the projection exact, so it counts as converged with
/// estimate 0.
#[allow(clippy::too_many_arguments)]
pub fn adaptive_run(
    op: &HamiltonianOperator,
    b: &[f64],
    f: FunctionId,
    h: f64,
    tol: f64,
    k_max: usize,
    method: MethodId,
    opts: &KrylovOptions,
) -> Result<AdaptiveResult> {
    if f != FunctionId::Exp {
        return Err(Error::InvalidArgument("the adaptive loop estimates the exponential only"));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive"));
    }
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1"));
    }
    let mut builder = match method {
        MethodId::Arnoldi => Builder::A(ArnoldiBuilder::new(op, b, opts)?),
        MethodId::HamiltonianLanczos => Builder::Hl(LanczosBuilder::new(op, b, opts)?),
        _ => return Err(Error::InvalidArgument("adaptive_run supports A and HL only")),
    };
    let b_norm = crate::dense::norm2(b);
    let mut history = Vec::new();
    let mut converged = false;
    let mut steps = 0;
    for k in 1..=k_max {
        let advanced = builder.step()?;
        let d = builder.decomposition();
        if !advanced {
            // HL broke down before producing pair k; the previous pairs span
            // an invariant subspace
            converged = true;
            break;
        }
        steps = k;
        let est = if d.breakdown.is_some() { 0.0 } else { estimate_for(&d, method, h, b_norm)? };
        history.push((k, est));
        if est <= tol {
            converged = true;
            break;
        }
    }
    let d = builder.decomposition();
    let approximation = if d.dim() == 0 { vec![0.0; op.dim()] } else { approximate_action(&d, FunctionId::Exp, h)? };
    Ok(AdaptiveResult {
        approximation,
        steps_used: steps,
        basis_dim: d.dim(),
        estimate_history: history,
        actual_error: None,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{norm2, sub};
    use crate::hamiltonian::symplecticity_residual;
    use crate::krylov::{arnoldi, build_decomposition, hamiltonian_lanczos};
    use crate::testutil::{random_hamiltonian, rotation, Uniform};

    fn rel(a: &[f64], b: &[f64]) -> f64 {
        norm2(&sub(a, b)) / norm2(b)
    }

    #[test]
    fn names() {
        for f in FunctionId::ALL {
            assert_eq!(f.name().parse::<FunctionId>().unwrap(), f);
        }
        assert!("cos".parse::<FunctionId>().is_err());
    }

    #[test]
    fn zero_step_reconstructs_b() {
        let (op, _) = random_hamiltonian(6, 1);
        let b = Uniform::new(2).vector(12);
        for m in [MethodId::Arnoldi, MethodId::HamiltonianLanczos] {
            let d = build_decomposition(m, &op, &b, 4, &KrylovOptions::default()).unwrap();
            let y = approximate_action(&d, FunctionId::Exp, 0.0).unwrap();
            assert!(rel(&y, &b) < 1e-14, "{m}");
        }
    }

    #[test]
    fn full_dimension_matches_dense() {
        let (op, h) = random_hamiltonian(10, 3);
        let b = Uniform::new(4).vector(20);
        let t = 0.3;
        let ht = h.scaled(t);
        let exact = expm(&ht).unwrap().matvec(&b).unwrap();
        let phi = phi_implicit(&ht, &b).unwrap();
        for m in MethodId::ALL {
            let d = build_decomposition(m, &op, &b, 20, &KrylovOptions::default()).unwrap();
            assert_eq!(d.dim(), 20, "{m}");
            let y = approximate_action(&d, FunctionId::Exp, t).unwrap();
            assert!(rel(&y, &exact) < 1e-10, "{m} exp {:e}", rel(&y, &exact));
            let p = approximate_action(&d, FunctionId::PhiImplicit, t).unwrap();
            assert!(rel(&p, &phi) < 1e-10, "{m} phi {:e}", rel(&p, &phi));
        }
    }

    #[test]
    fn phi_modes_agree() {
        let (op, _) = random_hamiltonian(8, 5);
        let b = Uniform::new(6).vector(16);
        let d = build_decomposition(MethodId::HamiltonianLanczos, &op, &b, 8, &KrylovOptions::default()).unwrap();
        let e = approximate_action(&d, FunctionId::PhiExplicit, 0.5).unwrap();
        let i = approximate_action(&d, FunctionId::PhiImplicit, 0.5).unwrap();
        assert!(rel(&e, &i) < 1e-9);
    }

    #[test]
    fn reduced_propagator_is_symplectic() {
        let (op, _) = random_hamiltonian(10, 7);
        let b = Uniform::new(8).vector(20);
        for m in MethodId::ALL.into_iter().filter(|m| m.is_structure_preserving()) {
            let d = build_decomposition(m, &op, &b, 8, &KrylovOptions::default()).unwrap();
            let p = reduced_propagator(&d, 1.0).unwrap();
            assert!(symplecticity_residual(&p).unwrap() < 1e-10, "{m}");
        }
    }

    #[test]
    fn estimators_vanish_at_breakdown() {
        let op = rotation();
        let d = hamiltonian_lanczos(&op, &[1.0, 0.0], 1, &KrylovOptions::default()).unwrap();
        assert_eq!(error_estimate_hl(&d, 1.0, 1.0).unwrap(), 0.0);
        let d = arnoldi(&op, &[1.0, 0.0], 2, &KrylovOptions::default()).unwrap();
        assert_eq!(error_estimate_arnoldi(&d, 1.0, 1.0).unwrap(), 0.0);
        assert!(error_estimate_hl(&d, 1.0, 1.0).is_err());
    }

    #[test]
    fn estimators_track_actual_error() {
        let (op, h) = random_hamiltonian(20, 9);
        let b = Uniform::new(10).vector(40);
        let t = 0.1;
        let exact = expm(&h.scaled(t)).unwrap().matvec(&b).unwrap();
        let nb = norm2(&b);
        let floor = 1e-12 * norm2(&exact);
        for k in 3..8 {
            let d = arnoldi(&op, &b, k, &KrylovOptions::default()).unwrap();
            let act = norm2(&sub(&approximate_action(&d, FunctionId::Exp, t).unwrap(), &exact));
            let est = error_estimate_arnoldi(&d, t, nb).unwrap();
            assert!(act < floor || est / act > 1e-2 && est / act < 1e2, "A k={k}: {est:e} vs {act:e}");
            let d = hamiltonian_lanczos(&op, &b, k, &KrylovOptions::default()).unwrap();
            let act = norm2(&sub(&approximate_action(&d, FunctionId::Exp, t).unwrap(), &exact));
            let est = error_estimate_hl(&d, t, nb).unwrap();
            assert!(act < floor || est / act > 1e-2 && est / act < 1e2, "HL k={k}: {est:e} vs {act:e}");
        }
    }

    #[test]
    fn adaptive_loop() {
        let (op, h) = random_hamiltonian(20, 11);
        let b = Uniform::new(12).vector(40);
        let t = 0.1;
        let exact = expm(&h.scaled(t)).unwrap().matvec(&b).unwrap();
        for m in [MethodId::Arnoldi, MethodId::HamiltonianLanczos] {
            let opts = KrylovOptions::default();
            let res = adaptive_run(&op, &b, FunctionId::Exp, t, 1e-10, 40, m, &opts).unwrap();
            assert!(res.converged, "{m}");
            assert!(norm2(&sub(&res.approximation, &exact)) < 1e-9, "{m}");
            assert!(res.estimate_history.windows(2).all(|w| w[0].0 < w[1].0));
            assert_eq!(res.estimate_history.last().unwrap().0, res.steps_used);

            let loose = adaptive_run(&op, &b, FunctionId::Exp, t, 1e6, 40, m, &opts).unwrap();
            assert_eq!(loose.steps_used, 1);
            let capped = adaptive_run(&op, &b, FunctionId::Exp, t, 1e-30, 2, m, &opts).unwrap();
            assert!(!capped.converged);
            assert_eq!(capped.steps_used, 2);
        }
        assert!(
            adaptive_run(&op, &b, FunctionId::Exp, t, 1e-10, 5, MethodId::BlockJ, &KrylovOptions::default()).is_err()
        );
    }

    #[test]
    fn adaptive_breakdown_converges() {
        let op = rotation();
        for m in [MethodId::Arnoldi, MethodId::HamiltonianLanczos] {
            let res =
                adaptive_run(&op, &[1.0, 0.0], FunctionId::Exp, 0.5, 1e-30, 10, m, &KrylovOptions::default()).unwrap();
            assert!(res.converged, "{m}");
            assert_eq!(res.estimate_history.last().unwrap().1, 0.0);
            let exact = expm(&op.to_dense().scaled(0.5)).unwrap().matvec(&[1.0, 0.0]).unwrap();
            assert!(rel(&res.approximation, &exact) < 1e-14);
        }
    }
}
