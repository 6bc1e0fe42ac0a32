//! Headerless numeric CSV, one matrix row per line.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use gasmor_core::DMatrix;

pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_path(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    for row in m.row_iter() {
        w.write_record(row.iter().map(|v| super::number(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut data = Vec::new();
    let mut ncols = None;
    let mut nrows = 0;
    for row in super::rows(&text) {
        let vals = row
            .fields
            .iter()
            .map(|f| f.number("a matrix entry"))
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| path.display().to_string())?;
        match ncols {
            None => ncols = Some(vals.len()),
            Some(c) if c != vals.len() => bail!("{}: line {} has {} entries, expected {c}", path.display(), row.line, vals.len()),
            _ => {}
        }
        data.extend(vals);
        nrows += 1;
    }
    Ok(DMatrix::from_row_slice(nrows, ncols.unwrap_or(0), &data))
}
