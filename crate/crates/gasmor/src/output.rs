//! Result files: trajectories, sweep reports, summaries, plot data and
//! persisted reduced models. Every writer overwrites its target, so reruns
//! into the same directory are deterministic.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use gasmor_core::evaluation::Comparison;
use gasmor_core::{DVector, EvaluationReport, ReductorId, Trajectory};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::experiment::RomBlocks;
use crate::formats::write_matrix;

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// `t,<ports>` with absolute outputs (supply fluxes in kg/s, demand
/// pressures in Pa).
pub fn write_trajectory<'a>(
    path: &Path,
    trajectory: &Trajectory,
    steady_output: &DVector<f64>,
    ports: impl Iterator<Item = &'a str>,
) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["t".to_string()];
    header.extend(ports.map(String::from));
    w.write_record(&header)?;
    let y = trajectory.absolute_outputs(steady_output);
    for (k, t) in trajectory.times.iter().enumerate() {
        let mut row = vec![num(*t)];
        row.extend(y.column(k).iter().map(|v| num(*v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `reductor,r,error,gain_error`, one row per evaluated order.
pub fn write_report(path: &Path, reports: &[EvaluationReport]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["reductor", "r", "error", "gain_error"])?;
    for rep in reports {
        for ((r, e), g) in rep.curve.orders.iter().zip(&rep.curve.errors).zip(&rep.gain_errors) {
            w.write_record([rep.reductor.id().to_string(), r.to_string(), num(*e), num(*g)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `reductor,morscore,avg_gain_error,train_s,sim_s`.
pub fn write_summary(path: &Path, reports: &[EvaluationReport]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["reductor", "morscore", "avg_gain_error", "train_s", "sim_s"])?;
    for rep in reports {
        w.write_record([
            rep.reductor.id().to_string(),
            num(rep.morscore),
            num(rep.mean_gain_error),
            format!("{:.6}", rep.train_seconds),
            format!("{:.6}", rep.simulate_seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Error-vs-order series in wide form: `r,<reductor...>`, ranked best first.
pub fn write_plot_data(path: &Path, comparison: &Comparison) -> Result<()> {
    let mut w = writer(path)?;
    let ranked: Vec<&(ReductorId, Vec<(usize, f64)>)> =
        comparison.ranking.iter().map(|&i| &comparison.series[i]).collect();
    let mut header = vec!["r".to_string()];
    header.extend(ranked.iter().map(|(id, _)| id.id().to_string()));
    w.write_record(&header)?;
    let mut orders: Vec<usize> = ranked.iter().flat_map(|(_, s)| s.iter().map(|p| p.0)).collect();
    orders.sort_unstable();
    orders.dedup();
    for r in orders {
        let mut row = vec![r.to_string()];
        for (_, s) in &ranked {
            row.push(s.iter().find(|p| p.0 == r).map(|p| num(p.1)).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Ranking table: `rank,reductor,morscore,avg_gain_error`.
pub fn write_ranking(path: &Path, comparison: &Comparison, reports: &[EvaluationReport]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["rank", "reductor", "morscore", "avg_gain_error"])?;
    for (rank, &i) in comparison.ranking.iter().enumerate() {
        let rep = &reports[i];
        w.write_record([
            (rank + 1).to_string(),
            rep.reductor.id().to_string(),
            num(rep.morscore),
            num(rep.mean_gain_error),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row of a report file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ReportRow {
    pub reductor: String,
    pub r: usize,
    pub error: f64,
    pub gain_error: f64,
}

/// One row of a summary file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SummaryRow {
    pub reductor: String,
    pub morscore: f64,
    pub avg_gain_error: f64,
    pub train_s: f64,
    pub sim_s: f64,
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    r.deserialize()
        .enumerate()
        .map(|(i, row)| row.with_context(|| format!("{}: record {}", path.display(), i + 1)))
        .collect()
}

/// Report rows grouped by reductor, in file order.
pub fn read_report(path: &Path) -> Result<Vec<(ReductorId, Vec<ReportRow>)>> {
    let mut out: Vec<(ReductorId, Vec<ReportRow>)> = Vec::new();
    for row in read_rows::<ReportRow>(path)? {
        let id: ReductorId = row.reductor.parse().map_err(|e: String| anyhow::anyhow!("{}: {e}", path.display()))?;
        match out.iter_mut().find(|(i, _)| *i == id) {
            Some((_, rows)) => rows.push(row),
            None => out.push((id, vec![row])),
        }
    }
    if out.is_empty() {
        bail!("{}: no report rows", path.display());
    }
    Ok(out)
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    read_rows(path)
}

/// Provenance of a persisted reduced model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub reductor: String,
    pub order: usize,
    pub requested_order: usize,
    pub model: String,
    pub gravity: String,
    pub solver: String,
    pub gain_matching: bool,
    pub network: String,
    pub scenario: String,
    /// SHA-256 of the bound scenario samples.
    pub scenario_fingerprint: String,
    /// SHA-256 over all matrix files (name and content, in `files` order).
    pub hash: String,
    pub files: BTreeMap<String, String>,
}

const ROM_FILES: [&str; 6] = ["V.csv", "E.csv", "A.csv", "B.csv", "C.csv", "D.csv"];

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes the matrices and `manifest.toml` (with `hash` and `files` filled
/// in) into `dir`, creating it if needed.
pub fn write_rom(dir: &Path, blocks: &RomBlocks, mut manifest: Manifest) -> Result<Manifest> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mats = [&blocks.v, &blocks.e, &blocks.a, &blocks.b, &blocks.c, &blocks.d];
    let mut total = Sha256::new();
    manifest.files.clear();
    for (name, m) in ROM_FILES.iter().zip(mats) {
        let path = dir.join(name);
        write_matrix(&path, m)?;
        let bytes = fs::read(&path)?;
        total.update(name.as_bytes());
        total.update(&bytes);
        manifest.files.insert(name.to_string(), hex(&Sha256::digest(&bytes)));
    }
    manifest.hash = hex(&total.finalize());
    let text = toml::to_string(&manifest).context("manifest serialization")?;
    fs::write(dir.join("manifest.toml"), text).with_context(|| format!("cannot write {}", dir.display()))?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join("manifest.toml");
    let text = fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
    toml::from_str(&text).with_context(|| path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use gasmor_core::evaluation::{assemble_report, compare, OrderResult};
    use gasmor_core::DMatrix;

    fn report(id: ReductorId, errors: &[f64]) -> EvaluationReport {
        let results = errors
            .iter()
            .enumerate()
            .map(|(i, e)| OrderResult {
                r: i + 1,
                error: *e,
                gain_error: 0.5 * e,
                failure: None,
                simulate_seconds: 0.01,
            })
            .collect();
        assemble_report(id, results, errors.len(), 1e-16, 0.25)
    }

    #[test]
    fn report_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let reps = [report(ReductorId::PodR, &[1e-2, 1e-4]), report(ReductorId::DmdR, &[1e-1, f64::INFINITY])];
        let path = dir.path().join("report.csv");
        write_report(&path, &reps).unwrap();
        let back = read_report(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].0, ReductorId::DmdR);
        assert_eq!(back[1].1[1].error, f64::INFINITY);
        assert_eq!(back[0].1[1].gain_error, 0.5e-4);

        let sum = dir.path().join("summary.csv");
        write_summary(&sum, &reps).unwrap();
        let rows = read_summary(&sum).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].morscore, reps[0].morscore);
    }

    #[test]
    fn plot_data_is_ranked() {
        let dir = tempfile::tempdir().unwrap();
        let reps = [report(ReductorId::PodR, &[1e-1, 1e-2]), report(ReductorId::EdsRoL, &[1e-3, 1e-6])];
        let cmp = compare(&reps).unwrap();
        let path = dir.path().join("errors.csv");
        write_plot_data(&path, &cmp).unwrap();
        let text = fs::read_to_string(path).unwrap();
        assert_eq!(text.lines().next(), Some("r,eds_ro_l,pod_r"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn rom_manifest_hash_is_stable() {
        let m = DMatrix::from_fn(3, 2, |i, j| (i + 2 * j) as f64 / 7.0);
        let blocks = RomBlocks {
            v: m.clone(),
            e: DMatrix::identity(2, 2),
            a: -DMatrix::identity(2, 2),
            b: m.transpose(),
            c: m.clone(),
            d: DMatrix::zeros(3, 3),
        };
        let manifest = Manifest {
            reductor: "pod_r".into(),
            order: 2,
            requested_order: 2,
            model: "ode_end".into(),
            gravity: "static".into(),
            solver: "imex1".into(),
            gain_matching: false,
            network: "n".into(),
            scenario: "s".into(),
            scenario_fingerprint: "f".into(),
            hash: String::new(),
            files: BTreeMap::new(),
        };
        let dir = tempfile::tempdir().unwrap();
        let a = write_rom(dir.path(), &blocks, manifest.clone()).unwrap();
        let b = write_rom(dir.path(), &blocks, manifest).unwrap();
        assert_eq!(a.hash, b.hash);
        assert_eq!(read_manifest(dir.path()).unwrap(), a);
        assert_eq!(a.files.len(), 6);
    }
}
