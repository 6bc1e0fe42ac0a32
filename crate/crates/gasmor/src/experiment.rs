//! The command pipeline: load inputs, center the model, simulate, train and
//! sweep. Parallel stages run on the caller's rayon pool.

use std::fs;

use gasmor_core::evaluation::{Clock, SweepOptions};
use gasmor_core::model::{ModelError, SteadyDiagnostics};
use gasmor_core::network::BoundScenario;
use gasmor_core::reductors::{galerkin_project, gain_mismatch, apply_gain_matching, TrainingSpec, TRAINING_SCALE};
use gasmor_core::solvers::{integrate, make_stepper, IntegrateOptions, DEFAULT_ATOL};
use gasmor_core::{
    Basis, DMatrix, DVector, EvaluationReport, GasConstants, Network, SemiDiscreteModel, Stepper, System,
    Trajectory,
};

use crate::config::{RunConfig, Source};
use crate::error::RunError;
use crate::formats::{parse_network, parse_profiles, parse_scenario};
use crate::parallel::{self, SharedReference, WallClock};

/// Centered model together with the inputs it was built from.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub network: Network,
    pub scenario: BoundScenario,
    pub model: SemiDiscreteModel,
    pub steady: SteadyDiagnostics,
    /// Output step (the scenario's unless overridden).
    pub dt: f64,
}

fn read(source: &Source, pick: fn(&crate::fixtures::Fixture) -> &'static str) -> Result<String, RunError> {
    match source {
        Source::Builtin(f) => Ok(pick(f).to_string()),
        Source::File(path) => {
            fs::read_to_string(path).map_err(|e| RunError::usage(format!("cannot read {}: {e}", path.display())))
        }
    }
}

/// Network with height profiles expanded, without a scenario.
pub fn load_network(cfg: &RunConfig) -> Result<Network, RunError> {
    let text = read(&cfg.network, |f| f.network)?;
    let network = parse_network(&text).map_err(|e| RunError::usage(format!("{}: {e}", cfg.network.label())))?;
    match &cfg.profile {
        None => Ok(network),
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| RunError::usage(format!("cannot read {}: {e}", path.display())))?;
            let profiles = parse_profiles(&text).map_err(|e| RunError::usage(format!("{}: {e}", path.display())))?;
            network
                .expand_profiles(&profiles)
                .map_err(|e| RunError::usage(format!("{}: {e}", path.display())))
        }
    }
}

pub fn load_scenario(cfg: &RunConfig, network: &Network) -> Result<BoundScenario, RunError> {
    let text = read(&cfg.scenario, |f| f.scenario)?;
    let label = cfg.scenario.label();
    let scenario = parse_scenario(&text).map_err(|e| RunError::usage(format!("{label}: {e}")))?;
    scenario.bind(network).map_err(|e| RunError::usage(format!("{label}: {e}")))
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared, RunError> {
    let network = load_network(cfg)?;
    let scenario = load_scenario(cfg, &network)?;
    let mut model = SemiDiscreteModel::assemble(&network, GasConstants::default(), cfg.model, cfg.gravity)
        .map_err(|e| RunError::usage(format!("cannot assemble model: {e}")))?;
    let steady = model
        .steady_state(&scenario.steady_supply(), &scenario.steady_demand())
        .map_err(|e: ModelError| RunError::numerical(format!("steady state: {e}")))?;
    let dt = cfg.dt.unwrap_or(scenario.dt);
    if dt > scenario.horizon {
        return Err(RunError::usage(format!("--dt {dt} exceeds the horizon {} s", scenario.horizon)));
    }
    Ok(Prepared {
        network,
        scenario,
        model,
        steady,
        dt,
    })
}

/// Fresh stepper for `solver`, with the configured tolerance when adaptive.
pub fn stepper(cfg: &RunConfig) -> Stepper {
    match make_stepper(cfg.solver) {
        Stepper::Rosenbrock { atol, .. } => Stepper::Rosenbrock { rtol: cfg.rtol, atol },
        s => s,
    }
}

impl Prepared {
    pub fn horizon(&self) -> f64 {
        self.scenario.horizon
    }

    pub fn steady_output(&self) -> DVector<f64> {
        self.model.steady_output().expect("prepared models are centered").clone()
    }

    /// Full-model trajectory under the scenario.
    pub fn simulate(&self, cfg: &RunConfig) -> Result<Trajectory, RunError> {
        integrate(
            &self.model,
            &mut stepper(cfg),
            &self.scenario,
            &DVector::zeros(self.model.state_dim()),
            self.horizon(),
            self.dt,
            IntegrateOptions::default(),
        )
        .map_err(|e| RunError::numerical(format!("simulation with {}: {e}", cfg.solver)))
    }

    /// 1% step training on the scenario horizon with the configured solver.
    pub fn training_spec(&self, cfg: &RunConfig) -> TrainingSpec {
        let mut spec = TrainingSpec::for_model(&self.model, TRAINING_SCALE, self.horizon(), self.dt, cfg.solver)
            .expect("prepared models are centered");
        spec.rtol = cfg.rtol;
        spec.atol = DEFAULT_ATOL;
        spec
    }

    /// Caps `r_max` at the state dimension, reporting whether it was cut.
    pub fn clip_order(&self, r_max: usize) -> (usize, bool) {
        let n = self.model.state_dim();
        (r_max.min(n), r_max > n)
    }

    /// Trains every configured reductor at width `r` (in parallel).
    pub fn train(&self, cfg: &RunConfig, r: usize, clock: &WallClock) -> Result<Vec<(Basis, f64)>, RunError> {
        let spec = self.training_spec(cfg);
        let start = clock.seconds();
        let aggregate = cfg.reductors.iter().any(|id| id.needs_aggregate());
        let snapshots = parallel::collect_snapshots(&self.model, &spec, aggregate)
            .map_err(|e| RunError::numerical(format!("training: {e}")))?;
        let collect = clock.seconds() - start;
        parallel::train_all(&cfg.reductors, &snapshots, self.model.output_map(), r, clock)
            .into_iter()
            .zip(&cfg.reductors)
            .map(|(res, id)| {
                res.map(|(b, secs)| (b, secs + collect))
                    .map_err(|e| RunError::numerical(format!("{id}: {e}")))
            })
            .collect()
    }

    /// Sweeps each trained basis against the full-model reference.
    pub fn sweep(
        &self,
        cfg: &RunConfig,
        reference: &Trajectory,
        bases: &[(Basis, f64)],
        clock: &WallClock,
    ) -> Vec<EvaluationReport> {
        let shared = SharedReference {
            input: &self.scenario,
            horizon: self.horizon(),
            dt: self.dt,
            outputs: reference.absolute_outputs(&self.steady_output()),
            steady_output: self.steady_output(),
        };
        let options = SweepOptions {
            r_max: cfg.r_max,
            stride: 1,
            gain_matching: cfg.gain_matching,
            eps: cfg.eps(),
        };
        let template = stepper(cfg);
        bases
            .iter()
            .map(|(basis, train_s)| parallel::sweep(&self.model, basis, &template, &shared, options, *train_s, clock))
            .collect()
    }

    /// Reduced matrices `(E_r, A_r, B_r, C_r, D)` of the leading `r` columns;
    /// `D` is the gain-matching feedthrough when `gain_matching` is set and
    /// zero otherwise.
    pub fn reduced_blocks(&self, basis: &Basis, r: usize, gain_matching: bool) -> Result<RomBlocks, RunError> {
        let v = basis.leading(r);
        let rom = galerkin_project(&self.model, &v).map_err(|e| RunError::numerical(format!("projection: {e}")))?;
        let d = if gain_matching {
            gain_mismatch(&self.model, &rom)
                .map_err(|e| RunError::numerical(format!("gain mismatch: {e}")))?
                .matrix
        } else {
            DMatrix::zeros(self.model.output_dim(), self.model.input_dim())
        };
        let rom = apply_gain_matching(rom, &d);
        Ok(RomBlocks {
            v,
            e: rom.mass().to_dense(),
            a: rom.linear().clone(),
            b: rom.input_map().clone(),
            c: rom.output_map().clone(),
            d,
        })
    }
}

/// Matrices of a persisted reduced model.
#[derive(Debug, Clone, PartialEq)]
pub struct RomBlocks {
    pub v: DMatrix<f64>,
    pub e: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{resolve, Layer};

    fn cfg(layer: Layer) -> RunConfig {
        resolve(layer, None).unwrap()
    }

    #[test]
    fn default_fixture_simulates() {
        let c = cfg(Layer::default());
        let p = prepare(&c).unwrap();
        assert!(p.steady.residual <= 1e-10);
        let t = p.simulate(&c).unwrap();
        assert_eq!(t.samples(), 1441);
        assert!(t.outputs.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn missing_file_names_path() {
        let c = cfg(Layer {
            network: Some("/nonexistent/west.net.csv".into()),
            scenario: Some("/nonexistent/west.scn.csv".into()),
            ..Layer::default()
        });
        let e = prepare(&c).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("/nonexistent/west.net.csv"));
    }

    #[test]
    fn explicit_solver_too_coarse_is_numerical() {
        let c = cfg(Layer {
            network: Some("builtin:actual".into()),
            solver: Some("rk4".into()),
            ..Layer::default()
        });
        let e = prepare(&c).unwrap().simulate(&c).unwrap_err();
        assert_eq!(e.exit_code(), 3, "{e}");
    }

    #[test]
    fn gain_matched_blocks_close_the_gap() {
        let c = cfg(Layer {
            reductor: Some(crate::config::OneOrMany::One("pod_r".into())),
            ..Layer::default()
        });
        let p = prepare(&c).unwrap();
        let bases = p.train(&c, 4, &WallClock::start()).unwrap();
        let blocks = p.reduced_blocks(&bases[0].0, 3, true).unwrap();
        let rom_gain = &blocks.c * blocks.e.clone().lu().solve(&blocks.b).unwrap() + &blocks.d;
        let full = p.model.static_gain();
        assert!((rom_gain - &full).abs().max() <= 1e-12 * full.abs().max());
    }
}
