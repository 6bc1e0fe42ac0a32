//! Acceptance run over the eight criteria; prints one PASS/FAIL line each
//! and exits nonzero when any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use gasmor::config::{resolve, Layer, OneOrMany};
use gasmor::experiment::{prepare, Prepared};
use gasmor::parallel::WallClock;
use gasmor_core::model::ModelOptions;
use gasmor_core::reductors::{apply_gain_matching, galerkin_project, gain_mismatch};
use gasmor_core::solvers::ButcherTableau;
use gasmor_core::{morscore, Basis, Discretization, ErrorCurve, EvaluationReport, GravityMode, ReductorId, SolverId};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

// ---- 1 ----

/// Coefficients exactly as printed.
const RK4HYP_C: [&str; 5] = ["0.16791846623918", "0.48298439719700", "0.70546072965982", "0.09295870406537", "0.76210081248836"];
const RK4HYP_B: [&str; 6] = ["-0.15108370762927", "0.75384683913851", "-0.36016595357907", "0.52696773139913", "0", "0.23043509067071"];

fn nested_matches(t: &ButcherTableau, sub: &[f64], weights: &[f64]) -> bool {
    let s = weights.len();
    t.stages() == s
        && t.nodes[0] == 0.0
        && t.nodes[1..] == *sub
        && t.weights == weights
        && (0..s).all(|i| (0..i).all(|j| t.a(i, j) == if j + 1 == i { sub[i - 1] } else { 0.0 }))
}

fn tableau_fidelity() -> Outcome {
    let parse = |v: &[&str]| v.iter().map(|s| s.parse::<f64>().unwrap()).collect::<Vec<_>>();
    let rk2 = ButcherTableau::rk2hyp();
    let rk4 = ButcherTableau::rk4hyp();
    let exact = nested_matches(&rk2, &[1.0 / 4.0, 1.0 / 6.0, 3.0 / 8.0, 1.0 / 2.0], &[0.0, 0.0, 0.0, 0.0, 1.0])
        && nested_matches(&rk4, &parse(&RK4HYP_C), &parse(&RK4HYP_B));
    let mut pass = exact;
    let mut parts = vec![format!("coefficients as printed: {exact}")];
    for t in [&rk2, &rk4] {
        let sum_b = (t.weights.iter().sum::<f64>() - 1.0).abs();
        let sum_bc = (t.moment(1) - 0.5).abs();
        pass &= sum_b <= 1e-12 && sum_bc <= 1e-12;
        parts.push(format!("{}: |Σb−1| = {sum_b:.1e}, |Σbc−½| = {sum_bc:.1e}", t.name));
    }
    outcome(pass, parts.join("; "))
}

// ---- 2 ----

fn convergence_orders() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (solver, lo, hi) in [
        (SolverId::Imex1, 0.8, 1.2),
        (SolverId::Imex2, 1.8, 2.2),
        (SolverId::Rk2Hyp, 1.8, 2.2),
        (SolverId::Rk4, 3.8, 4.2),
        (SolverId::Rk4Hyp, 3.8, 4.2),
    ] {
        let (p, _) = common::richardson_order(solver, 0.04, 3);
        pass &= (lo..=hi).contains(&p);
        parts.push(format!("{solver} {p:.3}"));
    }
    outcome(pass, parts.join(", "))
}

// ---- 3 ----

fn stability_claim() -> Outcome {
    let [rk4, rk2hyp, rk4hyp] = common::hyperbolic_limits();
    let (f2, f4) = (rk2hyp / rk4, rk4hyp / rk4);
    outcome(
        f2 >= 1.2 && f4 >= 1.2,
        format!("max stable dt: rk4 {rk4:.1} s, rk2hyp {rk2hyp:.1} s (×{f2:.2}), rk4hyp {rk4hyp:.1} s (×{f4:.2})"),
    )
}

// ---- 4 ----

fn model_correctness() -> Outcome {
    let schemes = [Discretization::Midpoint, Discretization::Endpoint];
    let mut jac = 0.0f64;
    let mut res = 0.0f64;
    for scheme in schemes {
        for gravity in [GravityMode::Off, GravityMode::Static, GravityMode::Dynamic] {
            let model = common::meshed(scheme, gravity, ModelOptions::default());
            jac = jac.max(common::jacobian_fd_error(&model, 100, 7));
            res = res.max(common::scaled_steady_residual(&model, 40.0, 6.0e6));
        }
    }
    let mut drop = 0.0f64;
    for scheme in schemes {
        let (got, want) = common::single_pipe_drop(scheme, 0.0, GravityMode::Off);
        drop = drop.max(((got - want) / want).abs());
    }
    outcome(
        jac <= 1e-5 && res <= 1e-10 && drop <= 1e-8,
        format!("Jacobian vs FD {jac:.1e}, steady residual {res:.1e}, single-pipe drop {drop:.1e}"),
    )
}

// ---- 5 ----

fn reductor_math() -> Outcome {
    let gap = common::pod_tail_gap(3, 200, 2000, &[1, 10, 50, 120, 199]);
    let angle = common::eds_ro_pod_angle(5, &[1, 5, 12]);
    let mismatched = common::identity_projection_mismatches();
    outcome(
        gap <= 1e-8 && angle <= 1e-8 && mismatched.is_empty(),
        format!("POD tail gap {gap:.1e}, eds_ro vs pod angle {angle:.1e}, identity projection mismatches {mismatched:?}"),
    )
}

// ---- 6 & 7: the fixture sweep ----

struct FixtureRun {
    name: &'static str,
    prepared: Prepared,
    bases: Vec<(Basis, f64)>,
    reports: Vec<EvaluationReport>,
}

struct Sweeps {
    runs: Vec<FixtureRun>,
    seconds: f64,
}

fn sweeps() -> &'static Sweeps {
    static CELL: OnceLock<Sweeps> = OnceLock::new();
    CELL.get_or_init(|| {
        let start = Instant::now();
        let runs = ["hypothetical", "actual"]
            .into_iter()
            .map(|name| {
                let cfg = resolve(
                    Layer {
                        network: Some(format!("builtin:{name}")),
                        model: Some("ode_end".into()),
                        solver: Some("imex1".into()),
                        reductor: Some(OneOrMany::One("all".into())),
                        rmax: Some(100),
                        ..Layer::default()
                    },
                    None,
                )
                .unwrap();
                let prepared = prepare(&cfg).unwrap();
                let clock = WallClock::start();
                let fom = prepared.simulate(&cfg).unwrap();
                let (r, _) = prepared.clip_order(cfg.r_max);
                let bases = prepared.train(&cfg, r, &clock).unwrap();
                let reports = prepared.sweep(&cfg, &fom, &bases, &clock);
                FixtureRun {
                    name,
                    prepared,
                    bases,
                    reports,
                }
            })
            .collect();
        Sweeps {
            runs,
            seconds: start.elapsed().as_secs_f64(),
        }
    })
}

fn gain_matching() -> Outcome {
    let mut corrected = 0.0f64;
    let mut in_band = true;
    let mut parts = Vec::new();
    for run in &sweeps().runs {
        let model = &run.prepared.model;
        for (basis, _) in &run.bases {
            for r in 1..=basis.width() {
                let rom = galerkin_project(model, &basis.leading(r)).unwrap();
                let d = gain_mismatch(model, &rom).unwrap().matrix;
                let rom = apply_gain_matching(rom, &d);
                corrected = corrected.max(gain_mismatch(model, &rom).unwrap().matrix.amax());
            }
        }
        let means: Vec<f64> = run.reports.iter().map(|rep| rep.mean_gain_error).collect();
        in_band &= means.iter().all(|g| (1e-6..=1e-4).contains(g));
        let (lo, hi) = means.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), g| (lo.min(*g), hi.max(*g)));
        parts.push(format!("{} mean gain errors {lo:.2e}..{hi:.2e}", run.name));
    }
    outcome(
        corrected <= 1e-12 && in_band,
        format!("post-correction max |ΔS| {corrected:.1e}; {} (band 1e-6..1e-4)", parts.join(", ")),
    )
}

fn experiment_shape() -> Outcome {
    let sweeps = sweeps();
    let mut pass = sweeps.seconds < 600.0;
    let mut parts = vec![format!("sweeps took {:.1} s", sweeps.seconds)];
    for run in &sweeps.runs {
        let best = run
            .reports
            .iter()
            .max_by(|a, b| a.morscore.total_cmp(&b.morscore))
            .unwrap();
        pass &= best.reductor == ReductorId::EdsRoL;
        for rep in &run.reports {
            let reached = rep
                .curve
                .orders
                .iter()
                .zip(&rep.curve.errors)
                .filter(|(r, _)| **r <= 50)
                .map(|(_, e)| *e)
                .fold(f64::INFINITY, f64::min);
            pass &= reached <= 1e-3 && rep.morscore > 0.0 && rep.morscore <= 1.0;
        }
        let scores: Vec<String> = run.reports.iter().map(|r| format!("{} {:.3}", r.reductor, r.morscore)).collect();
        parts.push(format!("{}: best {} [{}]", run.name, best.reductor, scores.join(", ")));
    }
    outcome(pass, parts.join("; "))
}

// ---- 8 ----

fn morscore_convention() -> Outcome {
    let mut worst = 0.0f64;
    for eps in [1e-16f64, 1e-8] {
        for r_max in [1usize, 5, 100, 200] {
            let errors: Vec<f64> = (1..=r_max).map(|r| eps.powf(r as f64 / r_max as f64)).collect();
            let mu = morscore(&ErrorCurve::from_errors(&errors), eps, r_max);
            worst = worst.max((mu - (r_max as f64 + 1.0) / (2.0 * r_max as f64)).abs());
        }
    }
    outcome(worst <= 1e-12, format!("max deviation from (r_max+1)/(2 r_max): {worst:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, f64, fn() -> Outcome); 8] = [
        ("tableau fidelity", 1.0, tableau_fidelity),
        ("convergence orders", 30.0, convergence_orders),
        ("stability claim", 120.0, stability_claim),
        ("model correctness", f64::INFINITY, model_correctness),
        ("reductor math", f64::INFINITY, reductor_math),
        ("gain matching", f64::INFINITY, gain_matching),
        ("experiment shape", 600.0, experiment_shape),
        ("MORscore convention", f64::INFINITY, morscore_convention),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let secs = start.elapsed().as_secs_f64();
        let pass = out.pass && secs < *limit;
        if !pass {
            failed += 1;
        }
        let budget = if limit.is_finite() { format!(" / {limit} s") } else { String::new() };
        println!(
            "{} {}. {name} ({secs:.2} s{budget}): {}",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
