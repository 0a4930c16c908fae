//! The four experiment families: convergence curves, φ-consistency at full
//! dimension, the estimator table and basis-generation timings.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use hamkrylov::dense::{norm2, sub};
use hamkrylov::krylov::{ArnoldiBuilder, LanczosBuilder};
use hamkrylov::{
    adaptive_run, approximate_action, build_decomposition, build_problem, error_estimate_arnoldi, error_estimate_hl,
    random_b, AdaptiveResult, Error, FunctionId, KrylovDecomposition, KrylovOptions, MethodId, ProblemId,
    ProblemInstance, Vector,
};

use crate::config::RunConfig;
use crate::oracle::{self, Reference};

pub const CONVERGENCE_HEADER: [&str; 10] = [
    "problem",
    "method",
    "function",
    "r",
    "basis_dim",
    "rel_error",
    "wall_time_ns",
    "matvecs",
    "solves",
    "inner_products",
];
pub const PHI_HEADER: [&str; 4] = ["problem", "n", "rel_difference", "status"];
pub const ADAPTIVE_HEADER: [&str; 6] = ["problem", "method", "k", "basis_dim", "actual_error", "estimate"];

/// A problem with its start vector.
pub struct Setup {
    pub instance: ProblemInstance,
    pub b: Vector,
    pub seed: u64,
}

impl Setup {
    pub fn new(problem: ProblemId, seed: u64) -> Result<Self> {
        let instance = build_problem(problem)?;
        let b = random_b(instance.operator.dim(), seed)?;
        Ok(Self { instance, b, seed })
    }

    pub fn id(&self) -> ProblemId {
        self.instance.id
    }

    pub fn reference(&self, cache_dir: Option<&Path>, h: f64) -> Result<Reference> {
        oracle::reference(cache_dir, self.id(), &self.instance.operator, &self.b, h, self.seed)
            .with_context(|| format!("dense reference for {}", self.id()))
    }

    /// HEKS needs `ℓ ≥ 1` and a factored `JH`.
    pub fn supports(&self, method: MethodId, r: usize) -> bool {
        method != MethodId::Heks || (method.steps_for_dim(2 * r) > 0 && self.instance.operator.is_solve_capable())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRecord {
    pub problem: ProblemId,
    pub method: MethodId,
    /// `None` for timing rows
    pub function: Option<FunctionId>,
    pub r: usize,
    pub basis_dim: usize,
    pub rel_error: Option<f64>,
    pub wall_time_ns: u128,
    pub matvecs: usize,
    pub solves: usize,
    pub inner_products: usize,
}

impl ConvergenceRecord {
    fn from_decomposition(problem: ProblemId, d: &KrylovDecomposition, r: usize) -> Self {
        Self {
            problem,
            method: d.method,
            function: None,
            r,
            basis_dim: d.dim(),
            rel_error: None,
            wall_time_ns: 0,
            matvecs: d.counts.matvecs,
            solves: d.counts.solves,
            inner_products: d.counts.inner_products,
        }
    }

    pub fn fields(&self) -> [String; 10] {
        [
            self.problem.to_string(),
            self.method.to_string(),
            self.function.map_or_else(|| "basis".to_string(), |f| f.to_string()),
            self.r.to_string(),
            self.basis_dim.to_string(),
            self.rel_error.map_or_else(String::new, |e| format!("{e:e}")),
            self.wall_time_ns.to_string(),
            self.matvecs.to_string(),
            self.solves.to_string(),
            self.inner_products.to_string(),
        ]
    }
}

pub fn relative_error(approx: &[f64], exact: &[f64]) -> f64 {
    norm2(&sub(approx, exact)) / norm2(exact)
}

/// One `(method, function, r)` cell. `rel_error` stays empty when the reduced
/// matrix is singular and the function is the explicit φ.
pub fn convergence_cell(
    setup: &Setup,
    reference: &Reference,
    method: MethodId,
    function: FunctionId,
    r: usize,
    h: f64,
    opts: &KrylovOptions,
) -> Result<ConvergenceRecord> {
    let op = &setup.instance.operator;
    let t0 = Instant::now();
    let d = build_decomposition(method, op, &setup.b, 2 * r, opts)?;
    let y = match approximate_action(&d, function, h) {
        Ok(y) => Some(y),
        Err(Error::Singular { .. }) if function == FunctionId::PhiExplicit => None,
        Err(e) => return Err(e.into()),
    };
    let elapsed = t0.elapsed().as_nanos();
    let mut rec = ConvergenceRecord::from_decomposition(setup.id(), &d, r);
    rec.function = Some(function);
    rec.wall_time_ns = elapsed;
    rec.rel_error = match (y, reference.get(function)) {
        (Some(y), Some(exact)) => Some(relative_error(&y, exact)),
        _ => None,
    };
    Ok(rec)
}

fn writer(path: &Path, header: &[&str]) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut wr = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    wr.write_record(header)?;
    Ok(wr)
}

fn cache_dir(cfg: &RunConfig) -> Option<&Path> {
    cfg.use_cache.then_some(cfg.output_dir.as_path())
}

pub fn convergence_path(dir: &Path, problem: ProblemId, function: FunctionId) -> PathBuf {
    dir.join(format!("convergence_{problem}_{function}.csv"))
}

/// Writes `convergence_{problem}_{function}.csv` for every configured pair.
pub fn run_convergence(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let opts = cfg.krylov_options();
    let mut written = Vec::new();
    for &problem in &cfg.problems {
        let setup = Setup::new(problem, cfg.seed)?;
        if let Some(note) = &setup.instance.solver_note {
            eprintln!("{problem}: {note}");
        }
        let reference = setup.reference(cache_dir(cfg), cfg.h)?;
        for &function in &cfg.functions {
            let path = convergence_path(&cfg.output_dir, problem, function);
            let mut wr = writer(&path, &CONVERGENCE_HEADER)?;
            for &method in &cfg.methods {
                for &r in &cfg.r_values {
                    if !setup.supports(method, r) {
                        continue;
                    }
                    let rec = convergence_cell(&setup, &reference, method, function, r, cfg.h, &opts)
                        .with_context(|| format!("cell {problem}/{method}/{function}/r={r}"))?;
                    wr.write_record(rec.fields())?;
                }
            }
            wr.flush()?;
            written.push(path);
        }
    }
    Ok(written)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhiConsistencyRow {
    pub problem: ProblemId,
    pub n: usize,
    pub rel_difference: Option<f64>,
    pub status: &'static str,
}

pub fn phi_consistency(setup: &Setup, reference: &Reference) -> PhiConsistencyRow {
    let (rel_difference, status) = match &reference.phi_expl {
        Some(e) => (Some(relative_error(e, &reference.phi_impl)), "ok"),
        None => (None, "skipped: singular hH"),
    };
    PhiConsistencyRow { problem: setup.id(), n: setup.instance.n, rel_difference, status }
}

/// `‖φ_expl(hH)b − φ_impl(hH)b‖ / ‖φ_impl(hH)b‖` per problem, at full size.
pub fn run_phi_consistency(cfg: &RunConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let path = cfg.output_dir.join("phi_consistency.csv");
    let mut wr = writer(&path, &PHI_HEADER)?;
    for &problem in &cfg.problems {
        let setup = Setup::new(problem, cfg.seed)?;
        let row = phi_consistency(&setup, &setup.reference(cache_dir(cfg), cfg.h)?);
        wr.write_record([
            row.problem.to_string(),
            row.n.to_string(),
            row.rel_difference.map_or_else(String::new, |e| format!("{e:e}")),
            row.status.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(path)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveRow {
    pub problem: ProblemId,
    pub method: MethodId,
    pub k: usize,
    pub basis_dim: usize,
    /// absolute 2-norm error, the quantity the estimators approximate
    pub actual_error: f64,
    pub estimate: f64,
}

/// Actual error and estimate for `k = 1..=k_max`: Arnoldi at dimension `2k`,
/// Lanczos with `k` pairs. Rows stop early at a breakdown.
pub fn adaptive_table(
    setup: &Setup,
    exact: &[f64],
    method: MethodId,
    k_max: usize,
    h: f64,
    opts: &KrylovOptions,
) -> Result<Vec<AdaptiveRow>> {
    let op = &setup.instance.operator;
    let nb = norm2(&setup.b);
    let mut rows = Vec::new();
    let mut push = |k: usize, d: &KrylovDecomposition, est: f64| -> Result<()> {
        let y = approximate_action(d, FunctionId::Exp, h)?;
        rows.push(AdaptiveRow {
            problem: setup.id(),
            method,
            k,
            basis_dim: d.dim(),
            actual_error: norm2(&sub(&y, exact)),
            estimate: est,
        });
        Ok(())
    };
    match method {
        MethodId::Arnoldi => {
            let mut ab = ArnoldiBuilder::new(op, &setup.b, opts)?;
            for k in 1..=k_max {
                let grew = ab.step()? && ab.step()?;
                let d = ab.decomposition();
                push(k, &d, error_estimate_arnoldi(&d, h, nb)?)?;
                if !grew || d.breakdown.is_some() {
                    break;
                }
            }
        }
        MethodId::HamiltonianLanczos => {
            let mut lb = LanczosBuilder::new(op, &setup.b, opts)?;
            for k in 1..=k_max {
                if !lb.step()? {
                    break;
                }
                let d = lb.decomposition();
                push(k, &d, error_estimate_hl(&d, h, nb)?)?;
                if d.breakdown.is_some() {
                    break;
                }
            }
        }
        _ => anyhow::bail!("the estimator table covers A and HL only, not {method}"),
    }
    Ok(rows)
}

/// [`adaptive_run`] with the actual error filled in from the dense reference.
pub fn adaptive_with_error(
    setup: &Setup,
    exact: &[f64],
    method: MethodId,
    tol: f64,
    k_max: usize,
    h: f64,
    opts: &KrylovOptions,
) -> Result<AdaptiveResult> {
    let mut res = adaptive_run(&setup.instance.operator, &setup.b, FunctionId::Exp, h, tol, k_max, method, opts)?;
    res.actual_error = Some(norm2(&sub(&res.approximation, exact)));
    Ok(res)
}

/// Rows of one method's table on which the estimator is expected to be sharp:
/// `k ≥ 3` while the relative error is above both `1e-13` and ten times the
/// smallest relative error the table reaches. The second bound is the
/// measured rounding floor; past it the actual error stagnates while the
/// estimate keeps falling.
pub fn sharpness_window(rows: &[AdaptiveRow], exact_norm: f64) -> Vec<&AdaptiveRow> {
    let rel = |r: &AdaptiveRow| r.actual_error / exact_norm;
    let floor = rows.iter().map(rel).fold(f64::INFINITY, f64::min);
    let cut = (10.0 * floor).max(1e-13);
    rows.iter().filter(|r| r.k >= 3).take_while(|r| rel(r) > cut).collect()
}

/// Writes `adaptive_{problem}.csv` for every problem, with the A and HL rows
/// of the configured methods.
pub fn run_adaptive_table(cfg: &RunConfig, k_max: usize) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let opts = cfg.krylov_options();
    let methods: Vec<MethodId> =
        cfg.methods.iter().copied().filter(|m| matches!(m, MethodId::Arnoldi | MethodId::HamiltonianLanczos)).collect();
    let mut written = Vec::new();
    for &problem in &cfg.problems {
        let setup = Setup::new(problem, cfg.seed)?;
        let reference = setup.reference(cache_dir(cfg), cfg.h)?;
        let path = cfg.output_dir.join(format!("adaptive_{problem}.csv"));
        let mut wr = writer(&path, &ADAPTIVE_HEADER)?;
        for &method in &methods {
            for row in adaptive_table(&setup, &reference.exp, method, k_max, cfg.h, &opts)? {
                wr.write_record([
                    row.problem.to_string(),
                    row.method.to_string(),
                    row.k.to_string(),
                    row.basis_dim.to_string(),
                    format!("{:e}", row.actual_error),
                    format!("{:e}", row.estimate),
                ])?;
            }
        }
        wr.flush()?;
        written.push(path);
    }
    Ok(written)
}

fn median(mut v: Vec<u128>) -> u128 {
    v.sort_unstable();
    v[v.len() / 2]
}

/// Median of `reps` basis constructions after one discarded warm-up run.
pub fn time_basis(
    setup: &Setup,
    method: MethodId,
    r: usize,
    reps: usize,
    opts: &KrylovOptions,
) -> Result<ConvergenceRecord> {
    let op = &setup.instance.operator;
    let d = build_decomposition(method, op, &setup.b, 2 * r, opts)?;
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps.max(1) {
        let t0 = Instant::now();
        let d = build_decomposition(method, op, &setup.b, 2 * r, opts)?;
        times.push(t0.elapsed().as_nanos());
        std::hint::black_box(d);
    }
    let mut rec = ConvergenceRecord::from_decomposition(setup.id(), &d, r);
    rec.wall_time_ns = median(times);
    Ok(rec)
}

/// Writes `timings.csv` in the convergence schema with function `basis`.
pub fn run_timings(cfg: &RunConfig, reps: usize) -> Result<PathBuf> {
    cfg.validate()?;
    let opts = cfg.krylov_options();
    let path = cfg.output_dir.join("timings.csv");
    let mut wr = writer(&path, &CONVERGENCE_HEADER)?;
    for &problem in &cfg.problems {
        let setup = Setup::new(problem, cfg.seed)?;
        for &method in &cfg.methods {
            for &r in &cfg.r_values {
                if setup.supports(method, r) {
                    wr.write_record(time_basis(&setup, method, r, reps, &opts)?.fields())?;
                }
            }
        }
    }
    wr.flush()?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(k: usize, actual_error: f64) -> AdaptiveRow {
        AdaptiveRow {
            problem: ProblemId::Kg1,
            method: MethodId::Arnoldi,
            k,
            basis_dim: 2 * k,
            actual_error,
            estimate: actual_error,
        }
    }

    #[test]
    fn window_stops_at_measured_floor() {
        let errs = [1.0, 1e-1, 1e-3, 1e-6, 1e-9, 4e-12, 4e-12, 4.1e-12];
        let rows: Vec<_> = errs.iter().enumerate().map(|(i, &e)| row(i + 1, e)).collect();
        let ks: Vec<usize> = sharpness_window(&rows, 10.0).iter().map(|r| r.k).collect();
        assert_eq!(ks, [3, 4, 5]);
    }

    #[test]
    fn window_uses_absolute_cut_below_floor() {
        let errs = [1.0, 1.0, 1e-5, 1e-12, 1e-14, 1e-17];
        let rows: Vec<_> = errs.iter().enumerate().map(|(i, &e)| row(i + 1, e)).collect();
        let ks: Vec<usize> = sharpness_window(&rows, 1.0).iter().map(|r| r.k).collect();
        assert_eq!(ks, [3, 4]);
    }

    #[test]
    fn convergence_fields_format() {
        let rec = ConvergenceRecord {
            problem: ProblemId::Lw,
            method: MethodId::HamiltonianLanczos,
            function: Some(FunctionId::Exp),
            r: 3,
            basis_dim: 6,
            rel_error: Some(1.5e-7),
            wall_time_ns: 12,
            matvecs: 6,
            solves: 0,
            inner_products: 9,
        };
        assert_eq!(rec.fields().join(","), "lw,HL,exp,3,6,1.5e-7,12,6,0,9");
    }
}
