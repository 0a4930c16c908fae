//! Dense reference solutions `e^{hH} b` and `φ(hH) b`, cached on disk.
//!
//! The cache stores every entry with shortest round-trip formatting, so a
//! reloaded reference is bit-identical to a freshly computed one.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use hamkrylov::matfun::phi_explicit_from_exp;
use hamkrylov::{expm, phi_implicit, Error, FunctionId, HamiltonianOperator, ProblemId, Vector};

#[derive(Clone, Debug, PartialEq)]
pub struct Reference {
    pub exp: Vector,
    /// `None` when `hH` is singular
    pub phi_expl: Option<Vector>,
    pub phi_impl: Vector,
}

impl Reference {
    pub fn get(&self, f: FunctionId) -> Option<&[f64]> {
        match f {
            FunctionId::Exp => Some(&self.exp),
            FunctionId::PhiExplicit => self.phi_expl.as_deref(),
            FunctionId::PhiImplicit => Some(&self.phi_impl),
        }
    }
}

/// Full-size dense evaluation. `e^{hH}` is formed once and reused for the
/// explicit φ.
pub fn compute_reference(op: &HamiltonianOperator, b: &[f64], h: f64) -> Result<Reference> {
    let a = op.to_dense().scaled(h);
    let e = expm(&a)?;
    let exp = e.matvec(b)?;
    let phi_expl = match phi_explicit_from_exp(&a, &e, b) {
        Ok(v) => Some(v),
        Err(Error::Singular { .. }) => None,
        Err(err) => return Err(err.into()),
    };
    drop(e);
    let phi_impl = phi_implicit(&a, b)?;
    Ok(Reference { exp, phi_expl, phi_impl })
}

pub fn cache_path(dir: &Path, problem: ProblemId, h: f64, seed: u64) -> PathBuf {
    dir.join(format!("oracle_{problem}_h{h}_seed{seed}.csv"))
}

fn parse_field(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        Ok(Some(s.parse().with_context(|| format!("bad number {s:?}"))?))
    }
}

pub fn load(path: &Path, dim: usize) -> Result<Option<Reference>> {
    if !path.exists() {
        return Ok(None);
    }
    let mut rd = csv::Reader::from_path(path)?;
    let (mut exp, mut expl, mut imp) = (Vec::new(), Vec::new(), Vec::new());
    let mut expl_missing = false;
    for rec in rd.records() {
        let rec = rec?;
        if rec.len() != 3 {
            return Ok(None);
        }
        let (Some(e), Some(i)) = (parse_field(&rec[0])?, parse_field(&rec[2])?) else {
            return Ok(None);
        };
        exp.push(e);
        imp.push(i);
        match parse_field(&rec[1])? {
            Some(x) => expl.push(x),
            None => expl_missing = true,
        }
    }
    if exp.len() != dim {
        return Ok(None);
    }
    Ok(Some(Reference { exp, phi_expl: (!expl_missing).then_some(expl), phi_impl: imp }))
}

pub fn store(path: &Path, r: &Reference) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut wr = csv::Writer::from_path(path)?;
    wr.write_record(["exp", "phi_expl", "phi_impl"])?;
    for i in 0..r.exp.len() {
        let expl = r.phi_expl.as_ref().map_or(String::new(), |v| v[i].to_string());
        wr.write_record([r.exp[i].to_string(), expl, r.phi_impl[i].to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

/// Reference for `(problem, h, seed)`, read from `cache_dir` when present.
pub fn reference(
    cache_dir: Option<&Path>,
    problem: ProblemId,
    op: &HamiltonianOperator,
    b: &[f64],
    h: f64,
    seed: u64,
) -> Result<Reference> {
    let Some(dir) = cache_dir else {
        return compute_reference(op, b, h);
    };
    let path = cache_path(dir, problem, h, seed);
    if let Some(r) = load(&path, op.dim())? {
        return Ok(r);
    }
    let r = compute_reference(op, b, h)?;
    store(&path, &r).with_context(|| format!("writing {}", path.display()))?;
    Ok(r)
}
