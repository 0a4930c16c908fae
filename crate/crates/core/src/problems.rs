//! Benchmark Hamiltonians from finite-difference discretizations of the
//! linear wave, sine-Gordon, Klein–Gordon and nonlinear Schrödinger
//! equations, plus the seeded Gaussian start vector.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::dense::Vector;
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianOperator;
use crate::sparse::CsrMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProblemId {
    Lw,
    Sg,
    Kg1,
    Kg2,
    Ns1,
    Ns2,
}

impl ProblemId {
    pub const ALL: [ProblemId; 6] =
        [ProblemId::Lw, ProblemId::Sg, ProblemId::Kg1, ProblemId::Kg2, ProblemId::Ns1, ProblemId::Ns2];

    pub fn name(self) -> &'static str {
        match self {
            ProblemId::Lw => "lw",
            ProblemId::Sg => "sg",
            ProblemId::Kg1 => "kg1",
            ProblemId::Kg2 => "kg2",
            ProblemId::Ns1 => "ns1",
            ProblemId::Ns2 => "ns2",
        }
    }

    /// Half-dimension `n`; the operator is `2n × 2n`.
    pub fn n(self) -> usize {
        match self {
            ProblemId::Lw | ProblemId::Kg1 => 400,
            ProblemId::Ns1 => 500,
            ProblemId::Sg | ProblemId::Kg2 | ProblemId::Ns2 => 512,
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ProblemId::Lw => "linear wave equation, Dirichlet boundary",
            ProblemId::Sg => "sine-Gordon equation, periodic boundary",
            ProblemId::Kg1 => "cubic Klein-Gordon equation, first parameter set",
            ProblemId::Kg2 => "cubic Klein-Gordon equation, second parameter set",
            ProblemId::Ns1 => "nonlinear Schroedinger equation with sin^2 potential",
            ProblemId::Ns2 => "nonlinear Schroedinger equation, sech soliton data",
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ProblemId::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or(Error::InvalidArgument("unknown problem (expected lw, sg, kg1, kg2, ns1 or ns2)"))
    }
}

#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub id: ProblemId,
    pub operator: HamiltonianOperator,
    pub n: usize,
    pub delta_x: f64,
    pub h_default: f64,
    pub description: &'static str,
    /// Set when `JH` could not be factored; HEKS is unavailable then.
    pub solver_note: Option<String>,
}

/// Second-difference matrix with homogeneous Dirichlet boundary.
pub fn laplacian_dirichlet(n: usize, delta_x: f64) -> Result<CsrMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument("Dirichlet Laplacian needs n >= 2"));
    }
    if !(delta_x > 0.0) {
        return Err(Error::InvalidArgument("grid spacing must be positive"));
    }
    let s = 1.0 / (delta_x * delta_x);
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        t.push((i, i, -2.0 * s));
        if i + 1 < n {
            t.push((i, i + 1, s));
            t.push((i + 1, i, s));
        }
    }
    CsrMatrix::from_triplets(n, n, &t)
}

/// Second-difference matrix with periodic boundary (corner couplings).
pub fn laplacian_periodic(n: usize, delta_x: f64) -> Result<CsrMatrix> {
    if n < 3 {
        return Err(Error::InvalidArgument("periodic Laplacian needs n >= 3"));
    }
    let mut t: Vec<_> = laplacian_dirichlet(n, delta_x)?.triplets().collect();
    let s = 1.0 / (delta_x * delta_x);
    t.push((0, n - 1, s));
    t.push((n - 1, 0, s));
    CsrMatrix::from_triplets(n, n, &t)
}

/// Standard normal entries: ChaCha20 seeded with `seed`, then Box–Muller on
/// pairs of 53-bit uniforms in (0, 1].
pub fn random_b(dim: usize, seed: u64) -> Result<Vector> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut unit = || ((rng.next_u64() >> 11) as f64 + 1.0) / (1u64 << 53) as f64;
    let mut out = Vec::with_capacity(dim + 1);
    while out.len() < dim {
        let r = libm::sqrt(-2.0 * libm::log(unit()));
        let t = 2.0 * PI * unit();
        out.push(r * libm::cos(t));
        out.push(r * libm::sin(t));
    }
    out.truncate(dim);
    Ok(out)
}

/// Grid `x_j = −L/2 + (j−1)δx` and the initial profile `(q̂₀, p̂₀)` for ns1.
pub fn ns1_initial(n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let dx = 8.0 * PI / n as f64;
    let x: Vec<f64> = (0..n).map(|j| -4.0 * PI + j as f64 * dx).collect();
    let (mut q, mut p) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for &xj in &x {
        let s = libm::sin(xj);
        // θ with tan θ = √2 tan x, continued through the poles of tan
        let theta = libm::atan2(libm::sqrt(2.0) * s, libm::cos(xj));
        let r = libm::sqrt(s * s + 1.0);
        q.push(r * libm::cos(theta));
        p.push(r * libm::sin(theta));
    }
    (x, q, p)
}

/// `2 e^{−i(2x + 1 + π/2)} sech(2x)` on `x_j = −10 + (j−1)δx`.
pub fn ns2_initial(n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let dx = 20.0 / n as f64;
    let x: Vec<f64> = (0..n).map(|j| -10.0 + j as f64 * dx).collect();
    let (mut q, mut p) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for &xj in &x {
        let amp = 2.0 / libm::cosh(2.0 * xj);
        let phase = -(2.0 * xj + 1.0 + PI / 2.0);
        q.push(amp * libm::cos(phase));
        p.push(amp * libm::sin(phase));
    }
    (x, q, p)
}

fn diag(v: impl IntoIterator<Item = f64>) -> CsrMatrix {
    let v: Vec<f64> = v.into_iter().collect();
    CsrMatrix::diagonal(&v)
}

/// `[[0, I], [C, 0]]`
fn second_order(c: CsrMatrix) -> Result<HamiltonianOperator> {
    let n = c.nrows();
    HamiltonianOperator::new(CsrMatrix::zeros(n, n), CsrMatrix::identity(n), c)
}

fn klein_gordon(n: usize, delta_x: f64, shift: f64, b: impl Fn(f64) -> f64) -> Result<HamiltonianOperator> {
    let lap = laplacian_periodic(n, delta_x)?;
    let bl = diag((1..=n).map(|j| shift + 3.0 * b(j as f64)));
    second_order(lap.lin_comb(1.0, &bl, -1.0)?)
}

/// `[[D₂, −aΔ − V + D₃], [aΔ + V − D₁, −D₂]]` with
/// `D₁ = s q² + t p²`, `D₂ = c q p`, `D₃ = s p² + t q²` and `w = (s, t, c)`.
fn schroedinger(
    lap: &CsrMatrix,
    a: f64,
    potential: &[f64],
    q: &[f64],
    p: &[f64],
    w: (f64, f64, f64),
) -> Result<HamiltonianOperator> {
    let (s, t, c) = w;
    let d1 = diag(q.iter().zip(p).map(|(q, p)| s * q * q + t * p * p));
    let d2 = diag(q.iter().zip(p).map(|(q, p)| c * q * p));
    let d3 = diag(q.iter().zip(p).map(|(q, p)| s * p * p + t * q * q));
    let lin = lap.lin_comb(a, &CsrMatrix::diagonal(potential), 1.0)?;
    let b = lin.lin_comb(-1.0, &d3, 1.0)?;
    let cm = lin.lin_comb(1.0, &d1, -1.0)?;
    HamiltonianOperator::new(d2, b, cm)
}

/// Builds one of the six benchmark operators, attaching the `JH` factorization
/// when it succeeds.
pub fn build_problem(id: ProblemId) -> Result<ProblemInstance> {
    let n = id.n();
    let (op, delta_x) = match id {
        ProblemId::Lw => {
            let dx = 2.0 / (n as f64 + 1.0);
            (second_order(laplacian_dirichlet(n, dx)?)?, dx)
        }
        ProblemId::Sg => {
            let dx = 10.0 / n as f64;
            let c = laplacian_periodic(n, dx)?.lin_comb(1.0, &CsrMatrix::identity(n), 1.0)?;
            (second_order(c)?, dx)
        }
        ProblemId::Kg1 => {
            let dx = 1.0 / n as f64;
            let op = klein_gordon(n, dx, 0.25, |j| {
                let c = 1.0 + libm::cos(2.0 * j * PI * dx);
                c * c
            })?;
            (op, dx)
        }
        ProblemId::Kg2 => {
            let dx = 1.28 / n as f64;
            let op = klein_gordon(n, dx, 1.0, |j| {
                let c = 20.0 * (1.0 + libm::cos(2.0 * j * PI * dx / 1.28));
                c * c
            })?;
            (op, dx)
        }
        ProblemId::Ns1 => {
            let dx = 8.0 * PI / n as f64;
            let (x, q, p) = ns1_initial(n);
            let pot: Vec<f64> = x.iter().map(|&x| libm::sin(x) * libm::sin(x)).collect();
            (schroedinger(&laplacian_periodic(n, dx)?, 0.5, &pot, &q, &p, (3.0, 1.0, 2.0))?, dx)
        }
        ProblemId::Ns2 => {
            let dx = 20.0 / n as f64;
            let (_, q, p) = ns2_initial(n);
            let zero = alloc::vec![0.0; n];
            (schroedinger(&laplacian_periodic(n, dx)?, 1.0, &zero, &q, &p, (6.0, 2.0, 8.0))?, dx)
        }
    };
    let (operator, solver_note) = match op.clone().with_solver() {
        Ok(op) => (op, None),
        Err(e) => (op, Some(alloc::format!("JH not factorizable ({e}); HEKS unavailable"))),
    };
    Ok(ProblemInstance { id, operator, n, delta_x, h_default: 0.01, description: id.description(), solver_note })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::hamiltonian_residual;

    #[test]
    fn laplacian_stencils() {
        let d = laplacian_dirichlet(2, 1.0).unwrap().to_dense();
        assert_eq!(d.as_slice(), &[-2.0, 1.0, 1.0, -2.0]);
        let d = laplacian_dirichlet(3, 0.5).unwrap();
        assert_eq!((d.get(1, 1), d.get(0, 1), d.get(0, 2)), (-8.0, 4.0, 0.0));
        assert!(d.is_symmetric());
        let p = laplacian_periodic(3, 1.0).unwrap().to_dense();
        assert_eq!(p.as_slice(), &[-2.0, 1.0, 1.0, 1.0, -2.0, 1.0, 1.0, 1.0, -2.0]);
        let p = laplacian_periodic(7, 0.3).unwrap();
        let ones = [1.0; 7];
        assert!(p.matvec(&ones).unwrap().iter().all(|v| v.abs() < 1e-12));
        assert!(laplacian_dirichlet(1, 1.0).is_err());
        assert!(laplacian_periodic(2, 1.0).is_err());
        assert!(laplacian_dirichlet(4, 0.0).is_err());
    }

    #[test]
    fn random_b_is_deterministic_and_normal() {
        assert_eq!(random_b(1024, 42).unwrap(), random_b(1024, 42).unwrap());
        assert_ne!(random_b(16, 42).unwrap(), random_b(16, 43).unwrap());
        assert_eq!(random_b(7, 1).unwrap().len(), 7);
        assert!(random_b(0, 1).is_err());
        let v = random_b(1_000_000, 7).unwrap();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / v.len() as f64;
        assert!(mean.abs() < 0.01, "{mean}");
        assert!((var - 1.0).abs() < 0.01, "{var}");
    }

    #[test]
    fn problem_names() {
        for p in ProblemId::ALL {
            assert_eq!(p.name().parse::<ProblemId>().unwrap(), p);
        }
        assert!("kg3".parse::<ProblemId>().is_err());
    }

    #[test]
    fn all_problems_are_hamiltonian() {
        for id in ProblemId::ALL {
            let p = build_problem(id).unwrap();
            assert_eq!(p.operator.dim(), 2 * id.n(), "{id}");
            assert_eq!(p.h_default, 0.01);
            assert!(p.operator.b().is_symmetric() && p.operator.c().is_symmetric(), "{id}");
            let h = p.operator.to_dense();
            assert_eq!(hamiltonian_residual(&h).unwrap(), 0.0, "{id}");
            assert!(p.solver_note.is_none(), "{id}: {:?}", p.solver_note);
        }
        assert_eq!(build_problem(ProblemId::Lw).unwrap().operator.dim(), 800);
    }

    #[test]
    fn wave_blocks() {
        let p = build_problem(ProblemId::Lw).unwrap();
        let s = 1.0 / (p.delta_x * p.delta_x);
        assert_eq!(p.operator.e().nnz(), 0);
        assert_eq!(p.operator.b().get(3, 3), 1.0);
        assert_eq!(p.operator.c().get(0, 0), -2.0 * s);
        assert_eq!(p.operator.c().get(0, 399), 0.0);
        let kg = build_problem(ProblemId::Kg2).unwrap();
        let dx = 1.28 / 512.0;
        let j = 5.0;
        let bj = libm::pow(20.0 * (1.0 + libm::cos(2.0 * j * PI * dx / 1.28)), 2.0);
        let expect = -2.0 / (dx * dx) - (1.0 + 3.0 * bj);
        assert!((kg.operator.c().get(4, 4) - expect).abs() < 1e-12 * expect.abs());
        assert_eq!(kg.operator.c().get(0, 511), 1.0 / (dx * dx));
    }

    #[test]
    fn schroedinger_diagonals() {
        // independent recomputation from the complex initial value
        let (x, q, p) = ns2_initial(512);
        for j in [0, 100, 256, 511] {
            let z = 2.0 / libm::cosh(2.0 * x[j]);
            let ph = -(2.0 * x[j] + 1.0 + PI / 2.0);
            assert!((q[j] - z * libm::cos(ph)).abs() < 1e-14);
            assert!((p[j] - z * libm::sin(ph)).abs() < 1e-14);
        }
        let ns2 = build_problem(ProblemId::Ns2).unwrap();
        let dx = 20.0 / 512.0;
        let j = 256;
        assert!((ns2.operator.e().get(j, j) - 8.0 * q[j] * p[j]).abs() < 1e-14);
        let d3 = 6.0 * p[j] * p[j] + 2.0 * q[j] * q[j];
        assert!((ns2.operator.b().get(j, j) - (2.0 / (dx * dx) + d3)).abs() < 1e-10);
        let d1 = 6.0 * q[j] * q[j] + 2.0 * p[j] * p[j];
        assert!((ns2.operator.c().get(j, j) - (-2.0 / (dx * dx) - d1)).abs() < 1e-10);

        let (x, q, p) = ns1_initial(500);
        for j in [0, 60, 125, 250, 499] {
            // |z|² = sin² x + 1 and tan θ = √2 tan x
            assert!((q[j] * q[j] + p[j] * p[j] - (libm::sin(x[j]).powi(2) + 1.0)).abs() < 1e-14);
            let c = libm::cos(x[j]);
            if c.abs() > 1e-3 {
                assert!((p[j] / q[j] - libm::sqrt(2.0) * libm::tan(x[j])).abs() < 1e-10);
            }
        }
        let ns1 = build_problem(ProblemId::Ns1).unwrap();
        let j = 125;
        let s2 = libm::sin(x[j]).powi(2);
        let dx = 8.0 * PI / 500.0;
        let d3 = 3.0 * p[j] * p[j] + q[j] * q[j];
        let lap = -2.0 / (dx * dx);
        assert!((ns1.operator.b().get(j, j) - (-0.5 * lap - s2 + d3)).abs() < 1e-12);
        assert!((ns1.operator.e().get(j, j) - 2.0 * q[j] * p[j]).abs() < 1e-14);
    }
}
