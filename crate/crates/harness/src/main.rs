use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hamkrylov::{FunctionId, MethodId, ProblemId};
use hamkrylov_harness::experiments::{self, Setup};
use hamkrylov_harness::{export, RunConfig, OUT_ENV};

#[derive(Parser)]
#[command(name = "hamkrylov", version, about = "Structure-preserving Krylov experiments for exp(hH)b and phi(hH)b")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Relative error against the dense reference for r = 1..=rmax
    Convergence(Common),
    /// Explicit vs implicit phi at full dimension
    PhiConsistency(Common),
    /// Actual error and a-posteriori estimate per step for A and HL
    Adaptive {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        kmax: usize,
        /// tolerance for the adaptive loop summary
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// step (pair) limit of the adaptive loop
        #[arg(long, default_value_t = 100)]
        loop_kmax: usize,
    },
    /// Median basis-generation time with operation counts
    Timings {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5)]
        reps: usize,
    },
    /// Write H and b in Matrix Market format
    ExportMatrix(Common),
}

#[derive(Args)]
struct Common {
    /// lw, sg, kg1, kg2, ns1, ns2 (repeatable or comma separated; default all)
    #[arg(long, value_delimiter = ',')]
    problem: Vec<ProblemId>,
    /// A, HL, SA, IA, HEKS, BJ (default all)
    #[arg(long, value_delimiter = ',')]
    method: Vec<MethodId>,
    /// largest half-dimension r; bases of dimension 2, 4, ..., 2*rmax are built
    #[arg(long, default_value_t = 25)]
    rmax: usize,
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    h: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, env = OUT_ENV, default_value = "results")]
    out: PathBuf,
    /// disable re-J-orthogonalization in HL, SA, IA and HEKS
    #[arg(long)]
    no_rejorth: bool,
    /// exp, phi_expl, phi_impl (default all)
    #[arg(long, value_delimiter = ',')]
    function: Vec<FunctionId>,
    /// recompute dense references instead of reading them from --out
    #[arg(long)]
    no_cache: bool,
}

impl Common {
    fn config(&self) -> RunConfig {
        let d = RunConfig::default();
        RunConfig {
            problems: if self.problem.is_empty() { d.problems } else { self.problem.clone() },
            methods: if self.method.is_empty() { d.methods } else { self.method.clone() },
            r_values: (1..=self.rmax).collect(),
            h: self.h,
            seed: self.seed,
            functions: if self.function.is_empty() { d.functions } else { self.function.clone() },
            output_dir: self.out.clone(),
            re_j_orthogonalize: !self.no_rejorth,
            use_cache: !self.no_cache,
        }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.cmd {
        Command::Convergence(c) => {
            for p in experiments::run_convergence(&c.config())? {
                println!("{}", p.display());
            }
        }
        Command::PhiConsistency(c) => {
            println!("{}", experiments::run_phi_consistency(&c.config())?.display());
        }
        Command::Adaptive { common, kmax, tol, loop_kmax } => {
            let cfg = common.config();
            for p in experiments::run_adaptive_table(&cfg, kmax)? {
                println!("{}", p.display());
            }
            let opts = cfg.krylov_options();
            for &problem in &cfg.problems {
                let setup = Setup::new(problem, cfg.seed)?;
                let exact = setup.reference(cfg.use_cache.then_some(cfg.output_dir.as_path()), cfg.h)?.exp;
                for method in [MethodId::Arnoldi, MethodId::HamiltonianLanczos] {
                    if !cfg.methods.contains(&method) {
                        continue;
                    }
                    let res = experiments::adaptive_with_error(&setup, &exact, method, tol, loop_kmax, cfg.h, &opts)
                        .with_context(|| format!("adaptive run {problem}/{method}"))?;
                    println!(
                        "{problem} {method}: steps {} dim {} converged {} error {:e}",
                        res.steps_used,
                        res.basis_dim,
                        res.converged,
                        res.actual_error.unwrap_or(f64::NAN)
                    );
                }
            }
        }
        Command::Timings { common, reps } => {
            println!("{}", experiments::run_timings(&common.config(), reps)?.display());
        }
        Command::ExportMatrix(c) => {
            let cfg = c.config();
            for &problem in &cfg.problems {
                let (h, b) = export::export_problem(&cfg.output_dir, problem, cfg.seed)?;
                println!("{}\n{}", h.display(), b.display());
            }
        }
    }
    Ok(())
}
