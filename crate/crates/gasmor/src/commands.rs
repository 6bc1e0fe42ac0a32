//! Command implementations behind the `gasmor` binary. Each returns the
//! lines to print on success; warnings go to `warn`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use gasmor_core::evaluation::{assemble_report, compare, Clock, OrderResult};
use gasmor_core::network::validate;
use gasmor_core::{EvaluationReport, InputSignal, System};

use crate::config::RunConfig;
use crate::error::RunError;
use crate::experiment::{load_network, load_scenario, prepare, Prepared};
use crate::output::{
    read_report, read_summary, write_plot_data, write_ranking, write_report, write_rom, write_summary,
    write_trajectory, Manifest,
};
use crate::parallel::WallClock;
use crate::plot::{LineChart, Series};

fn io(e: anyhow::Error) -> RunError {
    RunError::Usage(e)
}

fn out_dir(cfg: &RunConfig) -> Result<&Path, RunError> {
    fs::create_dir_all(&cfg.out)
        .map_err(|e| RunError::usage(format!("cannot create output directory {}: {e}", cfg.out.display())))?;
    Ok(&cfg.out)
}

fn write_text(path: &Path, text: &str) -> Result<(), RunError> {
    fs::write(path, text).map_err(|e| RunError::usage(format!("cannot write {}: {e}", path.display())))
}

/// Boundary inputs in percent of their initial values.
fn scenario_chart(p: &Prepared) -> LineChart {
    let samples = 240;
    let steady = p.scenario.steady_input();
    let times: Vec<f64> = (0..=samples).map(|k| p.horizon() * k as f64 / samples as f64).collect();
    let series = p
        .scenario
        .port_ids()
        .enumerate()
        .map(|(j, port)| Series {
            name: port.to_string(),
            points: times
                .iter()
                .map(|&t| {
                    let u = p.scenario.at(t)[j];
                    let base = steady[j];
                    (t / 3600.0, if base != 0.0 { 100.0 * u / base.abs() } else { u })
                })
                .collect(),
        })
        .collect();
    LineChart {
        title: "Boundary scenario".into(),
        x_label: "time [h]".into(),
        y_label: "deviation from t = 0 [%]".into(),
        log_y: false,
        series,
    }
}

fn clipped_order(p: &Prepared, cfg: &RunConfig, warn: &mut dyn FnMut(String)) -> usize {
    let (r, clipped) = p.clip_order(cfg.r_max);
    if clipped {
        warn(format!(
            "--rmax {} exceeds the state dimension {}; clipped to {r}",
            cfg.r_max,
            p.model.state_dim()
        ));
    }
    r
}

/// Full-model run: `trajectory.csv` and `scenario.svg`.
pub fn simulate(cfg: &RunConfig) -> Result<Vec<String>, RunError> {
    let p = prepare(cfg)?;
    let clock = WallClock::start();
    let traj = p.simulate(cfg)?;
    let dir = out_dir(cfg)?;
    let path = dir.join("trajectory.csv");
    write_trajectory(&path, &traj, &p.steady_output(), p.model.port_ids()).map_err(io)?;
    write_text(&dir.join("scenario.svg"), &scenario_chart(&p).to_svg())?;
    Ok(vec![
        format!(
            "{} {} / {}: {} states, {} samples in {:.3} s",
            cfg.network.label(),
            cfg.model,
            cfg.solver,
            p.model.state_dim(),
            traj.samples(),
            clock.seconds()
        ),
        format!("wrote {}", path.display()),
    ])
}

/// Trains each configured reductor at width `r_max` and persists it under
/// `<out>/<reductor>/`.
pub fn reduce(cfg: &RunConfig, warn: &mut dyn FnMut(String)) -> Result<Vec<String>, RunError> {
    let p = prepare(cfg)?;
    let r = clipped_order(&p, cfg, warn);
    let clock = WallClock::start();
    let bases = p.train(cfg, r, &clock)?;
    let dir = out_dir(cfg)?.to_path_buf();
    let mut lines = Vec::new();
    for (basis, secs) in &bases {
        if basis.width() < r {
            warn(format!(
                "{}: snapshots have numerical rank {}; basis truncated from {r}",
                basis.reductor,
                basis.width()
            ));
        }
        let blocks = p.reduced_blocks(basis, basis.width(), cfg.gain_matching)?;
        let manifest = Manifest {
            reductor: basis.reductor.id().into(),
            order: basis.width(),
            requested_order: r,
            model: cfg.model.id().into(),
            gravity: cfg.gravity.id().into(),
            solver: cfg.solver.id().into(),
            gain_matching: cfg.gain_matching,
            network: cfg.network.label(),
            scenario: cfg.scenario.label(),
            scenario_fingerprint: p.scenario.fingerprint(),
            hash: String::new(),
            files: BTreeMap::new(),
        };
        let rom_dir = dir.join(basis.reductor.id());
        let manifest = write_rom(&rom_dir, &blocks, manifest).map_err(io)?;
        lines.push(format!(
            "{}: r = {} in {:.3} s -> {} (hash {})",
            basis.reductor,
            basis.width(),
            secs,
            rom_dir.display(),
            &manifest.hash[..16]
        ));
    }
    Ok(lines)
}

fn error_chart(title: &str, reports: &[EvaluationReport], ranking: &[usize]) -> LineChart {
    LineChart {
        title: title.into(),
        x_label: "reduced order r".into(),
        y_label: "relative L2⊗L2 output error".into(),
        log_y: true,
        series: ranking
            .iter()
            .map(|&i| {
                let rep = &reports[i];
                Series {
                    name: format!("{} (μ = {:.2})", rep.reductor, rep.morscore),
                    points: rep.curve.orders.iter().map(|r| *r as f64).zip(rep.curve.errors.iter().copied()).collect(),
                }
            })
            .collect(),
    }
}

fn table(reports: &[EvaluationReport], ranking: &[usize]) -> Vec<String> {
    let mut lines = vec![format!("{:<10} {:>9} {:>14}", "reductor", "MORscore", "avg gain err")];
    for &i in ranking {
        let r = &reports[i];
        lines.push(format!("{:<10} {:>9.4} {:>14.3e}", r.reductor.id(), r.morscore, r.mean_gain_error));
    }
    lines
}

/// Emits `report.csv`, `summary.csv`, `errors.csv` and `errors.svg`.
fn emit_reports(dir: &Path, title: &str, reports: &[EvaluationReport]) -> Result<Vec<String>, RunError> {
    let cmp = compare(reports).map_err(|e| RunError::usage(format!("cannot compare reports: {e}")))?;
    write_report(&dir.join("report.csv"), reports).map_err(io)?;
    write_summary(&dir.join("summary.csv"), reports).map_err(io)?;
    write_plot_data(&dir.join("errors.csv"), &cmp).map_err(io)?;
    write_ranking(&dir.join("ranking.csv"), &cmp, reports).map_err(io)?;
    write_text(&dir.join("errors.svg"), &error_chart(title, reports, &cmp.ranking).to_svg())?;
    Ok(table(reports, &cmp.ranking))
}

/// Runs the full experiment and returns the reports alongside the printed
/// lines.
pub fn sweep_reports(
    cfg: &RunConfig,
    warn: &mut dyn FnMut(String),
) -> Result<(Vec<EvaluationReport>, Vec<String>), RunError> {
    let p = prepare(cfg)?;
    let r = clipped_order(&p, cfg, warn);
    let clock = WallClock::start();
    let fom = p.simulate(cfg)?;
    let fom_s = clock.seconds();
    let bases = p.train(cfg, r, &clock)?;
    let reports = p.sweep(cfg, &fom, &bases, &clock);
    for rep in &reports {
        let failed = rep.curve.failures.iter().filter(|f| f.is_some()).count();
        if failed > 0 {
            warn(format!("{}: {failed} of {} reduced models failed to simulate", rep.reductor, rep.curve.orders.len()));
        }
    }
    let dir = out_dir(cfg)?;
    let title = format!("{} / {} / {}", cfg.network.label(), cfg.model, cfg.solver);
    let mut lines = vec![format!(
        "{title}: n = {}, r_max = {r}, full model {fom_s:.3} s, total {:.3} s",
        p.model.state_dim(),
        clock.seconds()
    )];
    lines.extend(emit_reports(dir, &title, &reports)?);
    Ok((reports, lines))
}

pub fn sweep(cfg: &RunConfig, warn: &mut dyn FnMut(String)) -> Result<Vec<String>, RunError> {
    sweep_reports(cfg, warn).map(|(_, lines)| lines)
}

/// Rebuilds reports from sweep output directories and ranks them together.
pub fn compare_dirs(cfg: &RunConfig, dirs: &[PathBuf]) -> Result<Vec<String>, RunError> {
    let mut reports = Vec::new();
    for dir in dirs {
        let groups = read_report(&dir.join("report.csv")).map_err(io)?;
        let summary = read_summary(&dir.join("summary.csv")).map_err(io)?;
        for (id, rows) in groups {
            let r_max = rows.iter().map(|row| row.r).max().unwrap_or(0);
            let s = summary.iter().find(|s| s.reductor == id.id());
            let results = rows
                .iter()
                .map(|row| OrderResult {
                    r: row.r,
                    error: row.error,
                    gain_error: row.gain_error,
                    failure: (!row.error.is_finite()).then(|| "failed in the original sweep".into()),
                    simulate_seconds: 0.0,
                })
                .collect();
            let mut rep = assemble_report(id, results, r_max, cfg.eps(), s.map(|s| s.train_s).unwrap_or(0.0));
            rep.simulate_seconds = s.map(|s| s.sim_s).unwrap_or(0.0);
            reports.push(rep);
        }
    }
    let dir = out_dir(cfg)?;
    let cmp = compare(&reports).map_err(|e| RunError::usage(format!("cannot compare reports: {e}")))?;
    write_plot_data(&dir.join("comparison.csv"), &cmp).map_err(io)?;
    write_ranking(&dir.join("ranking.csv"), &cmp, &reports).map_err(io)?;
    write_text(&dir.join("comparison.svg"), &error_chart("Comparison", &reports, &cmp.ranking).to_svg())?;
    Ok(table(&reports, &cmp.ranking))
}

/// Structural checks, scenario binding and steady state; writes
/// `model_summary.csv`.
pub fn validate_inputs(cfg: &RunConfig) -> Result<Vec<String>, RunError> {
    let network = load_network(cfg)?;
    let diag = validate(&network);
    let mut lines = vec![format!(
        "{}: {} nodes, {} pipes, {} supply, {} demand",
        cfg.network.label(),
        diag.node_count,
        diag.pipe_count,
        diag.supply_count,
        diag.demand_count
    )];
    for c in &diag.checks {
        lines.push(format!("  [{}] {}: {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail));
    }
    if !diag.passed() {
        let why: Vec<String> = diag.failures().map(|c| c.detail.clone()).collect();
        return Err(RunError::usage(format!("network failed validation: {}", why.join("; "))));
    }
    load_scenario(cfg, &network)?;
    lines.push(format!("  [ok] scenario: {}", cfg.scenario.label()));
    let p = prepare(cfg)?;
    lines.push(format!(
        "  [ok] steady state: residual {:.2e} after {} Newton steps",
        p.steady.residual, p.steady.iterations
    ));
    let spectrum = p
        .model
        .linear_spectrum()
        .map_err(|e| RunError::numerical(format!("linearization: {e}")))?;
    let abscissa = spectrum.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let max_freq = spectrum.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let rows = [
        ("state_dim", p.model.state_dim() as f64),
        ("pressure_dim", p.model.pressure_dim() as f64),
        ("flux_dim", p.model.flux_dim() as f64),
        ("supply_ports", p.model.supply_count() as f64),
        ("demand_ports", p.model.demand_count() as f64),
        ("steady_iterations", p.steady.iterations as f64),
        ("steady_residual", p.steady.residual),
        ("spectral_abscissa", abscissa),
        ("max_frequency_rad_s", max_freq),
    ];
    let mut text = String::from("quantity,value\n");
    for (k, v) in rows {
        text.push_str(&format!("{k},{v}\n"));
    }
    let reference = p.model.reference().expect("prepared models are centered");
    let names = p.model.state_nodes().iter().map(|n| format!("p_{n}")).chain(p.model.pipe_ids().iter().map(|q| format!("q_{q}")));
    for (name, v) in names.zip(reference.state.iter()) {
        text.push_str(&format!("steady_{name},{v}\n"));
    }
    let path = out_dir(cfg)?.join("model_summary.csv");
    write_text(&path, &text)?;
    lines.push(format!("  spectral abscissa {abscissa:.3e} 1/s, max frequency {max_freq:.3e} rad/s"));
    lines.push(format!("wrote {}", path.display()));
    Ok(lines)
}
