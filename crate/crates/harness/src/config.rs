use std::path::PathBuf;

use anyhow::{bail, Result};
use hamkrylov::{FunctionId, KrylovOptions, MethodId, ProblemId};

/// Environment variable that overrides the output directory.
pub const OUT_ENV: &str = "HAMKRYLOV_OUT";

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub problems: Vec<ProblemId>,
    pub methods: Vec<MethodId>,
    /// half-dimensions; the basis targets dimension `2r`
    pub r_values: Vec<usize>,
    pub h: f64,
    pub seed: u64,
    pub functions: Vec<FunctionId>,
    pub output_dir: PathBuf,
    pub re_j_orthogonalize: bool,
    /// reuse dense references stored in `output_dir`
    pub use_cache: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problems: ProblemId::ALL.to_vec(),
            methods: MethodId::ALL.to_vec(),
            r_values: (1..=25).collect(),
            h: 0.01,
            seed: 42,
            functions: FunctionId::ALL.to_vec(),
            output_dir: PathBuf::from("results"),
            re_j_orthogonalize: true,
            use_cache: true,
        }
    }
}

impl RunConfig {
    pub fn krylov_options(&self) -> KrylovOptions {
        KrylovOptions { re_j_orthogonalize: self.re_j_orthogonalize, ..KrylovOptions::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h.is_finite() && self.h != 0.0) {
            bail!("h must be finite and nonzero, got {}", self.h);
        }
        if self.r_values.contains(&0) {
            bail!("r values must be positive");
        }
        Ok(())
    }
}
