use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Result;
use hamkrylov::{build_problem, random_b, CsrMatrix, ProblemId};

pub fn write_matrix_market(w: &mut impl Write, m: &CsrMatrix) -> std::io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", m.nrows(), m.ncols(), m.nnz())?;
    for (i, j, v) in m.triplets() {
        writeln!(w, "{} {} {}", i + 1, j + 1, v)?;
    }
    Ok(())
}

pub fn write_vector_market(w: &mut impl Write, v: &[f64]) -> std::io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} 1", v.len())?;
    for x in v {
        writeln!(w, "{x}")?;
    }
    Ok(())
}

/// Writes `{problem}.mtx` (the unscaled `H`) and `{problem}_b.mtx`.
pub fn export_problem(dir: &Path, problem: ProblemId, seed: u64) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let inst = build_problem(problem)?;
    let hp = dir.join(format!("{problem}.mtx"));
    let mut w = BufWriter::new(fs::File::create(&hp)?);
    write_matrix_market(&mut w, &inst.operator.to_csr())?;
    w.flush()?;
    let bp = dir.join(format!("{problem}_b.mtx"));
    let mut w = BufWriter::new(fs::File::create(&bp)?);
    write_vector_market(&mut w, &random_b(inst.operator.dim(), seed)?)?;
    w.flush()?;
    Ok((hp, bp))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_format() {
        let m = CsrMatrix::from_triplets(2, 3, &[(0, 0, 1.5), (1, 2, -2.0)]).unwrap();
        let mut out = Vec::new();
        write_matrix_market(&mut out, &m).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "%%MatrixMarket matrix coordinate real general\n2 3 2\n1 1 1.5\n2 3 -2\n"
        );
    }
}
