use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
// float math without std; unused when a dependency links std
#[allow(unused_imports)]
use num_traits::Float;

use super::ReductorError;
use crate::model::SemiDiscreteModel;
use crate::solvers::{integrate, make_stepper, sample_times, IntegrateOptions, IntegrationError, SolverId, Stepper};
use crate::system::{ConstantInput, LinearSystem, System};

/// Shape of the per-port primal training signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrainingInput {
    /// Constant perturbation switched on at `t = 0`.
    #[default]
    Step,
    /// Unit impulse: start from `x(0) = E⁻¹ B e_j` with zero input.
    Impulse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSpec {
    pub horizon: f64,
    pub dt: f64,
    pub solver: SolverId,
    pub rtol: f64,
    pub atol: f64,
    pub input: TrainingInput,
    /// Perturbation amplitude per input port.
    pub amplitudes: DVector<f64>,
    /// Port labels used in error messages.
    pub port_ids: Vec<String>,
}

/// Relative size of the training perturbations.
pub const TRAINING_SCALE: f64 = 0.01;

impl TrainingSpec {
    /// Same amplitude on every port.
    pub fn uniform(ports: usize, amplitude: f64, horizon: f64, dt: f64, solver: SolverId) -> Self {
        TrainingSpec {
            horizon,
            dt,
            solver,
            rtol: crate::solvers::DEFAULT_RTOL,
            atol: crate::solvers::DEFAULT_ATOL,
            input: TrainingInput::Step,
            amplitudes: DVector::from_element(ports, amplitude),
            port_ids: (0..ports).map(|j| format!("#{j}")).collect(),
        }
    }

    /// Steps of `scale` times each port's steady boundary value. Ports at
    /// zero (e.g. an idle demand) use the largest steady value of their kind.
    pub fn for_model(model: &SemiDiscreteModel, scale: f64, horizon: f64, dt: f64, solver: SolverId) -> Result<Self, ReductorError> {
        let reference = model.reference().ok_or(ReductorError::NotCentered)?;
        let ns = model.supply_count();
        let u = &reference.input;
        let kind_max = |range: core::ops::Range<usize>| range.map(|j| u[j].abs()).fold(0.0, f64::max);
        let (smax, dmax) = (kind_max(0..ns), kind_max(ns..u.len()));
        let amplitudes = DVector::from_fn(u.len(), |j, _| {
            let base = if u[j] != 0.0 {
                u[j].abs()
            } else if j < ns {
                smax
            } else {
                dmax
            };
            scale * base
        });
        Ok(TrainingSpec {
            amplitudes,
            port_ids: model.port_ids().map(String::from).collect(),
            ..Self::uniform(u.len(), 0.0, horizon, dt, solver)
        })
    }

    pub fn stepper(&self) -> Stepper {
        match make_stepper(self.solver) {
            Stepper::Rosenbrock { .. } => Stepper::Rosenbrock {
                rtol: self.rtol,
                atol: self.atol,
            },
            s => s,
        }
    }

    fn port(&self, j: usize) -> String {
        self.port_ids.get(j).cloned().unwrap_or_else(|| format!("#{j}"))
    }

    fn run<S: System + ?Sized>(&self, sys: &S, input: &ConstantInput, x0: &DVector<f64>) -> Result<DMatrix<f64>, IntegrationError> {
        let traj = integrate(
            sys,
            &mut self.stepper(),
            input,
            x0,
            self.horizon,
            self.dt,
            IntegrateOptions { snapshots: true },
        )?;
        Ok(traj.states.expect("snapshots requested"))
    }
}

/// Trapezoidal quadrature weights on the training sample grid.
pub fn quadrature_weights(horizon: f64, dt: f64) -> Vec<f64> {
    let t = sample_times(horizon, dt);
    let mut w = alloc::vec![0.0; t.len()];
    for k in 1..t.len() {
        let h = t[k] - t[k - 1];
        w[k - 1] += 0.5 * h;
        w[k] += 0.5 * h;
    }
    w
}

fn primal_run<S: System + ?Sized>(sys: &S, spec: &TrainingSpec, amplitude: &DVector<f64>) -> Result<DMatrix<f64>, IntegrationError> {
    let n = sys.state_dim();
    match spec.input {
        TrainingInput::Step => spec.run(sys, &ConstantInput(amplitude.clone()), &DVector::zeros(n)),
        TrainingInput::Impulse => {
            let x0 = sys.mass().solve(&(sys.input_map() * amplitude));
            spec.run(sys, &ConstantInput::zero(sys.input_dim()), &x0)
        }
    }
}

fn dual_run<S: System + ?Sized>(sys: &S, spec: &TrainingSpec, weights: &DVector<f64>) -> Result<DMatrix<f64>, IntegrationError> {
    let j0 = sys.jacobian(&DVector::zeros(sys.state_dim())).map_err(|e| IntegrationError {
        time: 0.0,
        source: e.into(),
    })?;
    let adjoint = LinearSystem::adjoint(sys.mass().clone(), &j0);
    let z0 = sys.mass().solve(&(sys.output_map().transpose() * weights));
    spec.run(&adjoint, &ConstantInput::zero(0), &z0)
}

/// Deviation states under a perturbation of input port `port`.
pub fn primal_block<S: System + ?Sized>(sys: &S, spec: &TrainingSpec, port: usize) -> Result<DMatrix<f64>, ReductorError> {
    let mut amp = DVector::zeros(sys.input_dim());
    amp[port] = spec.amplitudes[port];
    primal_run(sys, spec, &amp).map_err(|source| ReductorError::Training {
        port: spec.port(port),
        source,
    })
}

/// Adjoint linearized states from `z(0) = E⁻ᵀ Cᵀ e_port`.
pub fn dual_block<S: System + ?Sized>(sys: &S, spec: &TrainingSpec, port: usize) -> Result<DMatrix<f64>, ReductorError> {
    let mut e = DVector::zeros(sys.output_dim());
    e[port] = 1.0;
    dual_run(sys, spec, &e).map_err(|source| ReductorError::Training {
        port: spec.port(port),
        source,
    })
}

/// Primal states with all port perturbations applied together.
pub fn aggregate_primal_block<S: System + ?Sized>(sys: &S, spec: &TrainingSpec) -> Result<DMatrix<f64>, ReductorError> {
    primal_run(sys, spec, &spec.amplitudes).map_err(|source| ReductorError::Training {
        port: String::from("(all)"),
        source,
    })
}

/// Adjoint states from the summed output functional `z(0) = E⁻ᵀ Cᵀ 1`.
pub fn aggregate_dual_block<S: System + ?Sized>(sys: &S, spec: &TrainingSpec) -> Result<DMatrix<f64>, ReductorError> {
    dual_run(sys, spec, &DVector::from_element(sys.output_dim(), 1.0)).map_err(|source| ReductorError::Training {
        port: String::from("(all)"),
        source,
    })
}

/// Primal (`X_C`) and dual (`X_O`) snapshots in per-port blocks that share
/// one sample grid, plus the aggregated-system pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    pub primal: Vec<DMatrix<f64>>,
    pub dual: Vec<DMatrix<f64>>,
    pub aggregate_primal: Option<DMatrix<f64>>,
    pub aggregate_dual: Option<DMatrix<f64>>,
    /// Quadrature weight of each column within a block.
    pub weights: Vec<f64>,
}

impl SnapshotSet {
    pub fn new(
        primal: Vec<DMatrix<f64>>,
        dual: Vec<DMatrix<f64>>,
        aggregate_primal: Option<DMatrix<f64>>,
        aggregate_dual: Option<DMatrix<f64>>,
        weights: Vec<f64>,
    ) -> Result<Self, ReductorError> {
        let n = primal
            .first()
            .map(|b| b.nrows())
            .ok_or(ReductorError::Inconsistent("no primal blocks"))?;
        let blocks = primal
            .iter()
            .chain(dual.iter())
            .chain(aggregate_primal.iter())
            .chain(aggregate_dual.iter());
        for b in blocks {
            if b.nrows() != n {
                return Err(ReductorError::Dimension { expected: n, found: b.nrows() });
            }
            if b.ncols() != weights.len() {
                return Err(ReductorError::Inconsistent("block width differs from the weight count"));
            }
            if b.iter().any(|v| !v.is_finite()) {
                return Err(ReductorError::Inconsistent("non-finite snapshot entry"));
            }
        }
        if primal.iter().all(|b| b.iter().all(|&v| v == 0.0)) {
            return Err(ReductorError::DegenerateTraining);
        }
        Ok(SnapshotSet {
            primal,
            dual,
            aggregate_primal,
            aggregate_dual,
            weights,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.primal[0].nrows()
    }

    /// Blocks concatenated with columns scaled by `√w`.
    pub fn weighted(&self, blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
        let k = self.weights.len();
        let mut out = DMatrix::zeros(self.state_dim(), k * blocks.len());
        for (b, block) in blocks.iter().enumerate() {
            for j in 0..k {
                out.column_mut(b * k + j).copy_from(&(block.column(j) * Float::sqrt(self.weights[j])));
            }
        }
        out
    }

    pub fn weighted_primal(&self) -> DMatrix<f64> {
        self.weighted(&self.primal)
    }

    pub fn weighted_dual(&self) -> DMatrix<f64> {
        self.weighted(&self.dual)
    }

    /// `θ_C`, the Frobenius norm of the weighted primal snapshots.
    pub fn theta_c(&self) -> f64 {
        self.weighted_primal().norm()
    }

    /// `θ_O`, the Frobenius norm of the weighted dual snapshots.
    pub fn theta_o(&self) -> f64 {
        self.weighted_dual().norm()
    }
}

/// Runs every training simulation sequentially: one primal block per input
/// port, one dual block per output port, and the aggregated pair.
pub fn collect_snapshots<S: System + ?Sized>(sys: &S, spec: &TrainingSpec) -> Result<SnapshotSet, ReductorError> {
    if spec.amplitudes.len() != sys.input_dim() {
        return Err(ReductorError::Dimension {
            expected: sys.input_dim(),
            found: spec.amplitudes.len(),
        });
    }
    let primal = (0..sys.input_dim())
        .map(|j| primal_block(sys, spec, j))
        .collect::<Result<Vec<_>, _>>()?;
    let dual = (0..sys.output_dim())
        .map(|i| dual_block(sys, spec, i))
        .collect::<Result<Vec<_>, _>>()?;
    let agg_p = aggregate_primal_block(sys, spec)?;
    let agg_d = aggregate_dual_block(sys, spec)?;
    SnapshotSet::new(primal, dual, Some(agg_p), Some(agg_d), quadrature_weights(spec.horizon, spec.dt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::MassMatrix;

    fn toy() -> LinearSystem {
        LinearSystem::new(
            MassMatrix::from_diagonal(DVector::from_element(3, 1.0)).unwrap(),
            DMatrix::from_row_slice(3, 3, &[-1.0, 0.5, 0.0, -0.5, -2.0, 0.3, 0.0, -0.3, -3.0]),
            DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
            DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
        )
        .unwrap()
    }

    #[test]
    fn block_bookkeeping() {
        let spec = TrainingSpec::uniform(2, 1.0, 2.0, 0.1, SolverId::Imex1);
        let s = collect_snapshots(&toy(), &spec).unwrap();
        assert_eq!(s.primal.len(), 2);
        assert_eq!(s.dual.len(), 2);
        assert!(s.primal.iter().all(|b| b.ncols() == 21));
        assert_eq!(s.weighted_primal().ncols(), 2 * 21);
        assert!(s.theta_c() > 0.0 && s.theta_o() > 0.0);
    }

    #[test]
    fn zero_amplitude_is_degenerate() {
        let spec = TrainingSpec::uniform(2, 0.0, 2.0, 0.1, SolverId::Imex1);
        assert_eq!(collect_snapshots(&toy(), &spec).unwrap_err(), ReductorError::DegenerateTraining);
    }

    #[test]
    fn trapezoid_weights_sum_to_horizon() {
        let w = quadrature_weights(1.0, 0.3);
        assert_eq!(w.len(), 5);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
