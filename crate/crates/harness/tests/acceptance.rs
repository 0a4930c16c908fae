//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Runs without the libtest harness so the lines land
//! in the test log uncaptured.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{ensure, Result};
use hamkrylov::approx::reduced_propagator;
use hamkrylov::dense::{norm2, sub};
use hamkrylov::hamiltonian::{hamiltonian_residual, j_orthogonality_residual, symplecticity_residual};
use hamkrylov::krylov::{ArnoldiBuilder, LanczosBuilder};
use hamkrylov::{
    approximate_action, build_decomposition, expm, random_b, DenseMatrix, FunctionId, HamiltonianOperator,
    KrylovDecomposition, KrylovOptions, MethodId, ProblemId,
};
use hamkrylov_harness::experiments::{
    self, adaptive_table, adaptive_with_error, convergence_path, sharpness_window, Setup,
};
use hamkrylov_harness::RunConfig;

const H: f64 = 0.01;
const SEED: u64 = 42;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name);
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn config(out: &Path) -> RunConfig {
    RunConfig { output_dir: out.to_path_buf(), ..RunConfig::default() }
}

const STRUCTURED: [MethodId; 5] = [
    MethodId::HamiltonianLanczos,
    MethodId::SymplecticArnoldi,
    MethodId::IsotropicArnoldi,
    MethodId::Heks,
    MethodId::BlockJ,
];

fn structure(setups: &[Setup]) -> Result<Outcome> {
    let t0 = Instant::now();
    let opts = KrylovOptions::default();
    let (mut jo, mut ham, mut symp) = (0.0f64, 0.0f64, 0.0f64);
    for s in setups {
        for m in STRUCTURED {
            let d = build_decomposition(m, &s.instance.operator, &s.b, 50, &opts)?;
            jo = jo.max(j_orthogonality_residual(&d.basis)?);
            ham = ham.max(hamiltonian_residual(&d.projected)?);
            symp = symp.max(symplecticity_residual(&reduced_propagator(&d, H)?)?);
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        jo <= 1e-8 && ham <= 1e-10 && symp <= 1e-8 && secs < 60.0,
        format!("max ||S^T J S - J|| {jo:.1e}, Hamiltonian residual {ham:.1e}, symplecticity {symp:.1e}, {secs:.1}s"),
    )
}

/// `(method, function, r) -> rel_error` from one convergence CSV.
fn read_errors(path: &Path) -> Result<Vec<(String, usize, Option<f64>)>> {
    let mut rows = Vec::new();
    for rec in csv::Reader::from_path(path)?.records() {
        let rec = rec?;
        let err = if rec[5].is_empty() { None } else { Some(rec[5].parse()?) };
        rows.push((rec[1].to_string(), rec[3].parse()?, err));
    }
    Ok(rows)
}

fn convergence(dir: &Path) -> Result<Outcome> {
    let mut worst_final = 0.0f64;
    let mut failures = Vec::new();
    for p in ProblemId::ALL {
        for f in FunctionId::ALL {
            let rows = read_errors(&convergence_path(dir, p, f))?;
            let at = |m: &str, r: usize| rows.iter().find(|x| x.0 == m && x.1 == r).and_then(|x| x.2);
            for m in MethodId::ALL {
                let name = m.abbrev();
                let (Some(e5), Some(e25)) = (at(name, 5), at(name, 25)) else {
                    if f != FunctionId::PhiExplicit {
                        failures.push(format!("{p}/{f}/{name} missing"));
                    }
                    continue;
                };
                if e25 > e5 {
                    failures.push(format!("{p}/{f}/{name} not decreasing"));
                }
                let gated = matches!(m, MethodId::Arnoldi | MethodId::HamiltonianLanczos | MethodId::BlockJ);
                if gated && f != FunctionId::PhiExplicit {
                    worst_final = worst_final.max(e25);
                    if e25 > 1e-9 {
                        failures.push(format!("{p}/{f}/{name} {e25:.1e} at dimension 50"));
                    }
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            format!("A/HL/BJ worst error at dimension 50 {worst_final:.1e}; all methods decrease from 10 to 50")
        } else {
            failures.join("; ")
        },
    )
}

fn phi_consistency(setups: &[Setup], cache: &Path) -> Result<Outcome> {
    let t0 = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for s in setups {
        let row = experiments::phi_consistency(s, &s.reference(Some(cache), H)?);
        match row.rel_difference {
            Some(d) => {
                pass &= d <= 1e-9;
                parts.push(format!("{} {d:.1e}", row.problem));
            }
            None => {
                pass = false;
                parts.push(format!("{} singular", row.problem));
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    pass &= secs < 120.0;
    outcome(pass, format!("{}, {secs:.1}s", parts.join(", ")))
}

fn estimators(setups: &[Setup], cache: &Path) -> Result<Outcome> {
    let opts = KrylovOptions::default();
    let mut parts = Vec::new();
    let mut pass = true;
    for s in setups.iter().filter(|s| matches!(s.id(), ProblemId::Kg1 | ProblemId::Ns2)) {
        let exact = s.reference(Some(cache), H)?.exp;
        let nx = norm2(&exact);
        for m in [MethodId::Arnoldi, MethodId::HamiltonianLanczos] {
            let rows = adaptive_table(s, &exact, m, 30, H, &opts)?;
            let window = sharpness_window(&rows, nx);
            let (lo, hi) = window.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), r| {
                let q = r.estimate / r.actual_error;
                (lo.min(q), hi.max(q))
            });
            let run = adaptive_with_error(s, &exact, m, 1e-10, 100, H, &opts)?;
            let err = run.actual_error.unwrap_or(f64::INFINITY) / nx;
            let ok = window.len() >= 3 && lo >= 1e-3 && hi <= 1e3 && run.converged && err <= 1e-9;
            pass &= ok;
            parts.push(format!(
                "{}/{m} ratio [{lo:.1e}, {hi:.1e}] over k={}..{}, adaptive {} steps error {err:.1e}",
                s.id(),
                window.first().map_or(0, |r| r.k),
                window.last().map_or(0, |r| r.k),
                run.steps_used
            ));
        }
    }
    outcome(pass, parts.join("; "))
}

fn random_hamiltonian(n: usize, seed: u64) -> Result<(HamiltonianOperator, DenseMatrix)> {
    let g = random_b(3 * n * n, seed)?;
    let mut h = DenseMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let e = g[i * n + j];
            h[(i, j)] = e;
            h[(n + j, n + i)] = -e;
            let (lo, hi) = (i.min(j), i.max(j));
            h[(i, n + j)] = g[n * n + lo * n + hi];
            h[(n + i, j)] = g[2 * n * n + lo * n + hi];
        }
    }
    Ok((HamiltonianOperator::from_dense(&h)?.with_solver()?, h))
}

fn recursion_residual(d: &KrylovDecomposition, h: &DenseMatrix) -> Result<f64> {
    let mut r = h.matmul(&d.basis)?.lin_comb(1.0, &d.basis.matmul(&d.projected)?, -1.0)?;
    if let Some(rem) = &d.remainder {
        for (c, v) in r.col_mut(rem.index).iter_mut().zip(&rem.vector) {
            *c -= rem.scalar * v;
        }
    }
    Ok(r.frobenius_norm())
}

fn oracle_exactness() -> Result<Outcome> {
    let (op, h) = random_hamiltonian(10, 7)?;
    let b = random_b(20, 8)?;
    let opts = KrylovOptions::default();
    let mut worst = 0.0f64;
    for step in [H, 1.0] {
        let exact = expm(&h.scaled(step))?.matvec(&b)?;
        for m in MethodId::ALL {
            let d = build_decomposition(m, &op, &b, 20, &opts)?;
            ensure!(d.dim() == 20, "{m} stopped at dimension {}", d.dim());
            let y = approximate_action(&d, FunctionId::Exp, step)?;
            worst = worst.max(norm2(&sub(&y, &exact)) / norm2(&exact));
        }
    }
    let scale = op.norm_one();
    let mut rec = 0.0f64;
    let mut ab = ArnoldiBuilder::new(&op, &b, &opts)?;
    while ab.step()? {
        rec = rec.max(recursion_residual(&ab.decomposition(), &h)? / scale);
    }
    let mut lb = LanczosBuilder::new(&op, &b, &opts)?;
    while lb.pairs() < 10 && lb.step()? {
        rec = rec.max(recursion_residual(&lb.decomposition(), &h)? / scale);
    }
    outcome(
        worst <= 1e-10 && rec <= 1e-10,
        format!("worst relative error at full dimension {worst:.1e} (h = 0.01 and 1), worst recursion residual {rec:.1e} ||H||"),
    )
}

fn counters(setups: &[Setup]) -> Result<Outcome> {
    let (op, _) = random_hamiltonian(10, 9)?;
    let b = random_b(20, 10)?;
    let mut ops: Vec<(&HamiltonianOperator, &[f64], &[usize])> = vec![(&op, &b, &[2, 4, 6, 8, 10])];
    for s in setups {
        ops.push((&s.instance.operator, &s.b, &[2, 10, 24]));
    }
    let opts = KrylovOptions::default();
    let mut mismatches = Vec::new();
    let mut cells = 0;
    for (op, b, rs) in ops {
        for &r in rs {
            for m in MethodId::ALL {
                let c = build_decomposition(m, op, b, 2 * r, &opts)?.counts;
                let (mv, ip, sv) = (c.matvecs, c.inner_products, c.solves);
                let ok = match m {
                    MethodId::Arnoldi | MethodId::BlockJ => mv == 2 * r,
                    MethodId::HamiltonianLanczos => mv == 2 * r && ip == 3 * r,
                    MethodId::SymplecticArnoldi | MethodId::IsotropicArnoldi => mv == r,
                    MethodId::Heks => mv == 2 * r && sv == 3 * r / 2 - 1,
                };
                cells += 1;
                if !ok {
                    mismatches.push(format!("{m} r={r}: {mv} matvecs, {ip} inner products, {sv} solves"));
                }
            }
        }
    }
    outcome(
        mismatches.is_empty(),
        if mismatches.is_empty() { format!("{cells} method/size cells exact") } else { mismatches.join("; ") },
    )
}

/// CSV text with the `wall_time_ns` column removed.
fn without_timing(path: &Path) -> Result<String> {
    let mut out = String::new();
    for line in fs::read_to_string(path)?.lines() {
        let mut f: Vec<&str> = line.split(',').collect();
        ensure!(f.len() == 10, "{} has a row with {} fields", path.display(), f.len());
        f.remove(6);
        out.push_str(&f.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn determinism(first: &Path, second: &Path) -> Result<Outcome> {
    let t0 = Instant::now();
    let written = experiments::run_convergence(&config(second))?;
    let secs = t0.elapsed().as_secs_f64();
    let mut differing = Vec::new();
    for path in &written {
        let name = path.file_name().unwrap_or_default();
        if without_timing(path)? != without_timing(&first.join(name))? {
            differing.push(name.to_string_lossy().into_owned());
        }
    }
    for p in ProblemId::ALL {
        let name = hamkrylov_harness::oracle::cache_path(Path::new(""), p, H, SEED);
        if fs::read(first.join(&name))? != fs::read(second.join(&name))? {
            differing.push(name.to_string_lossy().into_owned());
        }
    }
    outcome(
        differing.is_empty(),
        if differing.is_empty() {
            format!(
                "{} convergence CSVs and the dense references identical across two fresh runs ({secs:.1}s)",
                written.len()
            )
        } else {
            format!("differ: {}", differing.join(", "))
        },
    )
}

fn report(n: usize, title: &str, res: Result<Outcome>) -> bool {
    match res {
        Ok(o) => {
            println!("{} criterion {n} ({title}): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
            o.pass
        }
        Err(e) => {
            println!("FAIL criterion {n} ({title}): error: {e:#}");
            false
        }
    }
}

fn main() -> ExitCode {
    // libtest arguments such as --nocapture or a filter are accepted and ignored
    let first = scratch("run1");
    let second = scratch("run2");
    let setups: Vec<Setup> = match ProblemId::ALL.iter().map(|&p| Setup::new(p, SEED)).collect() {
        Ok(s) => s,
        Err(e) => {
            println!("FAIL problem setup: {e:#}");
            return ExitCode::FAILURE;
        }
    };

    let mut ok = true;
    ok &= report(1, "structure preservation", structure(&setups));
    // computes the dense references fresh and leaves them in the first run directory
    let c3 = phi_consistency(&setups, &first);
    let run1 = experiments::run_convergence(&config(&first));
    let c2 = run1.and_then(|_| convergence(&first));
    ok &= report(2, "convergence", c2);
    ok &= report(3, "phi consistency", c3);
    ok &= report(4, "estimator sharpness", estimators(&setups, &first));
    ok &= report(5, "oracle exactness", oracle_exactness());
    ok &= report(6, "operation counters", counters(&setups));
    ok &= report(7, "determinism", determinism(&first, &second));
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
