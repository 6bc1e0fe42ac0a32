//! Shared fixtures for the integration tests and the acceptance harness.
#![allow(dead_code)]

use gasmor_core::linalg::{max_principal_angle, MassMatrix};
use gasmor_core::model::{friction_factor, ModelOptions};
use gasmor_core::reductors::{eds, galerkin_project, pod, EdsVariant};
use gasmor_core::solvers::{integrate, make_stepper, max_stable_dt, IntegrateOptions};
use gasmor_core::system::{EvalError, FnInput, InputSignal};
use gasmor_core::{
    DMatrix, DVector, Discretization, GasConstants, GravityMode, Network, PipeSpec, SemiDiscreteModel, SnapshotSet, SolverId,
    System,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn pipe(id: &str, from: &str, to: &str, length: f64, diameter: f64, dh: f64) -> PipeSpec {
    PipeSpec {
        id: id.into(),
        from: from.into(),
        to: to.into(),
        length,
        diameter,
        height_delta: dh,
        roughness: 1.2e-5,
    }
}

/// Supply `S` feeding demand `D` through one pipe.
pub fn single_pipe_network(length: f64, diameter: f64, dh: f64) -> Network {
    Network::new(vec![pipe("P", "S", "D", length, diameter, dh)], vec!["S".into()], vec!["D".into()]).unwrap()
}

/// Centered single-pipe model (20 km, 0.6 m) at 60 bar supply.
pub fn single_pipe(scheme: Discretization, gravity: GravityMode, demand: f64) -> SemiDiscreteModel {
    let net = single_pipe_network(20_000.0, 0.6, 0.0);
    let mut m = SemiDiscreteModel::assemble(&net, GasConstants::default(), scheme, gravity).unwrap();
    m.steady_state(&DVector::from_element(1, 6e6), &DVector::from_element(1, demand)).unwrap();
    m
}

/// Meshed five-node network with two supplies, a loop and height changes.
pub fn meshed(scheme: Discretization, gravity: GravityMode, options: ModelOptions) -> SemiDiscreteModel {
    let net = Network::new(
        vec![
            pipe("a", "S1", "N1", 30_000.0, 0.8, 12.0),
            pipe("b", "N1", "N2", 20_000.0, 0.7, -8.0),
            pipe("c", "N2", "N3", 15_000.0, 0.6, 5.0),
            pipe("d", "N3", "N1", 25_000.0, 0.6, -9.0),
            pipe("e", "S2", "N3", 18_000.0, 0.7, 3.0),
            pipe("f", "N2", "D", 10_000.0, 0.5, -2.0),
        ],
        vec!["S1".into(), "S2".into()],
        vec!["N1".into(), "D".into()],
    )
    .unwrap();
    let mut m = SemiDiscreteModel::assemble_with(&net, GasConstants::default(), scheme, gravity, options).unwrap();
    m.steady_state(&DVector::from_vec(vec![6.0e6, 5.9e6]), &DVector::from_vec(vec![25.0, 40.0]))
        .unwrap();
    m
}

/// Smooth, moderately stiff nonlinear system
/// `E ẋ = A x + B u(t) + f(x)` with `f(x)_i = −0.1 x_i³ + 0.05 x_{i+1}²`.
pub struct StiffTest {
    mass: MassMatrix,
    linear: DMatrix<f64>,
    input: DMatrix<f64>,
    output: DMatrix<f64>,
}

impl StiffTest {
    pub fn new() -> Self {
        StiffTest {
            mass: MassMatrix::from_diagonal(DVector::from_vec(vec![1.0, 2.0, 1.0, 0.5])).unwrap(),
            linear: DMatrix::from_row_slice(
                4,
                4,
                &[-40.0, 1.0, 0.0, 0.0, -1.0, -1.0, 2.0, 0.0, 0.0, -2.0, -0.5, 1.0, 0.0, 0.0, -1.0, -2.0],
            ),
            input: DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.3, 1.0]),
            output: DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0]),
        }
    }

    pub fn input() -> FnInput {
        FnInput::new(2, |t| DVector::from_vec(vec![t.sin(), (2.0 * t).cos()]))
    }

    pub fn x0() -> DVector<f64> {
        DVector::from_vec(vec![1.0, 0.5, -0.3, 0.2])
    }
}

impl Default for StiffTest {
    fn default() -> Self {
        Self::new()
    }
}

impl System for StiffTest {
    fn mass(&self) -> &MassMatrix {
        &self.mass
    }
    fn energy(&self) -> &MassMatrix {
        &self.mass
    }
    fn linear(&self) -> &DMatrix<f64> {
        &self.linear
    }
    fn input_map(&self) -> &DMatrix<f64> {
        &self.input
    }
    fn output_map(&self) -> &DMatrix<f64> {
        &self.output
    }
    fn nonlinear(&self, x: &DVector<f64>) -> Result<DVector<f64>, EvalError> {
        let n = x.len();
        Ok(DVector::from_fn(n, |i, _| {
            let next = if i + 1 < n { x[i + 1] } else { 0.0 };
            -0.1 * x[i].powi(3) + 0.05 * next * next
        }))
    }
    fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>, EvalError> {
        let n = x.len();
        let mut j = self.linear.clone();
        for i in 0..n {
            j[(i, i)] += -0.3 * x[i] * x[i];
            if i + 1 < n {
                j[(i, i + 1)] += 0.1 * x[i + 1];
            }
        }
        Ok(j)
    }
}

/// Final state of a fixed-step run.
pub fn final_state<S: System>(sys: &S, solver: SolverId, input: &dyn InputSignal, x0: &DVector<f64>, horizon: f64, dt: f64) -> DVector<f64> {
    let traj = integrate(sys, &mut make_stepper(solver), input, x0, horizon, dt, IntegrateOptions { snapshots: true }).unwrap();
    let states = traj.states.unwrap();
    states.column(states.ncols() - 1).into_owned()
}

/// Least-squares slope of `log e` over `log h`.
pub fn loglog_slope(h: &[f64], e: &[f64]) -> f64 {
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

/// Richardson estimate of the convergence order of `solver` on
/// [`StiffTest`]: the slope of `‖x_h − x_{h/2}‖` over `h` for the halving
/// sequence starting at `h0`.
pub fn richardson_order(solver: SolverId, h0: f64, levels: usize) -> (f64, Vec<f64>) {
    let sys = StiffTest::new();
    let input = StiffTest::input();
    let steps: Vec<f64> = (0..=levels).map(|k| h0 / 2f64.powi(k as i32)).collect();
    let finals: Vec<DVector<f64>> = steps
        .iter()
        .map(|&h| final_state(&sys, solver, &input, &StiffTest::x0(), 1.0, h))
        .collect();
    let diffs: Vec<f64> = finals.windows(2).map(|w| (&w[0] - &w[1]).norm()).collect();
    (loglog_slope(&steps[..levels], &diffs), diffs)
}

// ---- oracles shared with the acceptance harness ----

/// Random deviation with every absolute pressure within ±5 % of steady and
/// fluxes within ±20 kg/s of steady.
pub fn admissible(model: &SemiDiscreteModel, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let xbar = &model.reference().unwrap().state;
    let n_p = model.pressure_dim();
    DVector::from_fn(model.state_dim(), |i, _| {
        if i < n_p {
            xbar[i] * rng.random_range(-0.05..0.05)
        } else {
            rng.random_range(-20.0..20.0)
        }
    })
}

pub fn rhs0(model: &SemiDiscreteModel, x: &DVector<f64>) -> DVector<f64> {
    model.rhs(x, &DVector::zeros(model.input_dim())).unwrap()
}

/// Worst column-relative deviation of the analytic Jacobian from central
/// differences over `samples` random admissible states.
pub fn jacobian_fd_error(model: &SemiDiscreteModel, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xbar = model.reference().unwrap().state.clone();
    let n_p = model.pressure_dim();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x = admissible(model, &mut rng);
        let jac = model.jacobian(&x).unwrap();
        for j in 0..model.state_dim() {
            let h = if j < n_p { 1e-6 * xbar[j] } else { 1e-4 };
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let fd = (rhs0(model, &xp) - rhs0(model, &xm)) / (2.0 * h);
            let col = jac.column(j);
            worst = worst.max((&fd - col).norm() / col.norm());
        }
    }
    worst
}

/// Steady residual with mass balance in units of `flux_scale` and momentum
/// in units of `pressure_scale`.
pub fn scaled_steady_residual(model: &SemiDiscreteModel, flux_scale: f64, pressure_scale: f64) -> f64 {
    let reference = model.reference().unwrap();
    let res = model.steady_residual(&reference.state, &reference.input).unwrap();
    let n_p = model.pressure_dim();
    res.iter()
        .enumerate()
        .map(|(i, v)| if i < n_p { v.abs() / flux_scale } else { v.abs() / pressure_scale })
        .fold(0.0, f64::max)
}

/// Pressure drop of a 35 km, 0.7 m pipe at 55 bar and 60 kg/s: `(Newton,
/// closed form)`.
pub fn single_pipe_drop(scheme: Discretization, dh: f64, gravity: GravityMode) -> (f64, f64) {
    let (length, diameter, p_in, demand) = (35_000.0, 0.7, 5.5e6, 60.0);
    let net = single_pipe_network(length, diameter, dh);
    let constants = GasConstants::default();
    let mut model = SemiDiscreteModel::assemble(&net, constants, scheme, gravity).unwrap();
    model
        .steady_state(&DVector::from_element(1, p_in), &DVector::from_element(1, demand))
        .unwrap();
    let x = &model.reference().unwrap().state;
    assert!((x[1] - demand).abs() < 1e-9 * demand);

    let gamma = constants.gamma();
    let area = core::f64::consts::PI * diameter * diameter / 4.0;
    let lambda = friction_factor(diameter, 1.2e-5);
    let k = gamma * lambda * length / (2.0 * diameter * area * area);
    let g = if gravity == GravityMode::Off { 0.0 } else { constants.gravity * dh / gamma };
    let fq = k * demand * demand;
    let p_out = match scheme {
        // p_in − p_out = 2F q²/(p_in + p_out) + g (p_in + p_out)/2, times
        // (p_in + p_out): a quadratic in p_out
        Discretization::Midpoint => {
            let (a, b, c) = (1.0 + 0.5 * g, g * p_in, (0.5 * g - 1.0) * p_in * p_in + 2.0 * fq);
            (-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a)
        }
        // p_in − p_out = F q²/p_out + g p_out
        Discretization::Endpoint => {
            let a = 1.0 + g;
            (p_in + (p_in * p_in - 4.0 * a * fq).sqrt()) / (2.0 * a)
        }
    };
    (p_in - x[0], p_in - p_out)
}

/// Worst relative gap between the POD projection error² and the tail
/// eigenvalue energy of `X Xᵀ` on a random graded `rows × cols` matrix.
pub fn pod_tail_gap(seed: u64, rows: usize, cols: usize, orders: &[usize]) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // graded rows so the spectrum is spread out
    let x = DMatrix::from_fn(rows, cols, |i, _| 0.97f64.powi(i as i32) * rng.random_range(-1.0..1.0));
    let mut energy: Vec<f64> = (&x * x.transpose()).symmetric_eigen().eigenvalues.iter().copied().collect();
    energy.sort_by(|a, b| b.total_cmp(a));
    let set = SnapshotSet::new(vec![x.clone()], vec![], None, None, vec![1.0; cols]).unwrap();
    let mut worst = 0.0f64;
    for &r in orders {
        let v = pod(&set, r).unwrap().matrix;
        let residual = &x - &v * (v.transpose() * &x);
        let tail: f64 = energy[r..].iter().sum();
        worst = worst.max((residual.norm_squared() - tail).abs() / tail);
    }
    worst
}

/// Largest principal angle between `eds_ro_l` and `pod_r` when the dual
/// snapshots are a copy of the primal ones.
pub fn eds_ro_pod_angle(seed: u64, orders: &[usize]) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks: Vec<DMatrix<f64>> = (0..3)
        .map(|_| DMatrix::from_fn(30, 40, |i, _| 0.8f64.powi(i as i32) * rng.random_range(-1.0..1.0)))
        .collect();
    let set = SnapshotSet::new(blocks.clone(), blocks, None, None, vec![1.0; 40]).unwrap();
    orders
        .iter()
        .map(|&r| {
            let p = pod(&set, r).unwrap();
            let e = eds(&set, EdsVariant::Ro, r).unwrap();
            max_principal_angle(&p.matrix, &e.matrix)
        })
        .fold(0.0, f64::max)
}

pub const FIXED_STEP: [SolverId; 5] = [SolverId::Imex1, SolverId::Imex2, SolverId::Rk4, SolverId::Rk2Hyp, SolverId::Rk4Hyp];

/// Fixed-step solvers whose `V = I` projection of the meshed network model
/// does not reproduce the full trajectory bit for bit.
pub fn identity_projection_mismatches() -> Vec<SolverId> {
    let model = meshed(Discretization::Endpoint, GravityMode::Static, ModelOptions::default());
    let n = model.state_dim();
    let rom = galerkin_project(&model, &DMatrix::identity(n, n)).unwrap();
    let input = FnInput::new(model.input_dim(), |t| {
        DVector::from_vec(vec![2e4 * (t / 900.0).sin(), 0.0, 3.0 * (t / 1200.0).cos() - 3.0, 1.5])
    });
    FIXED_STEP
        .into_iter()
        .filter(|&solver| {
            let run = |sys: &dyn System| {
                integrate(sys, &mut make_stepper(solver), &input, &DVector::zeros(n), 3600.0, 10.0, IntegrateOptions { snapshots: true })
                    .unwrap()
            };
            let (full, reduced) = (run(&model), run(&rom));
            full.outputs != reduced.outputs || full.states != reduced.states
        })
        .collect()
}

/// `max_stable_dt` of rk4, rk2hyp and rk4hyp on the zero-flow single-pipe
/// `ode_end` model from a small (linear regime) perturbation.
pub fn hyperbolic_limits() -> [f64; 3] {
    let model = single_pipe(Discretization::Endpoint, GravityMode::Off, 0.0);
    let x0 = DVector::from_vec(vec![100.0, 0.01]);
    [SolverId::Rk4, SolverId::Rk2Hyp, SolverId::Rk4Hyp].map(|id| max_stable_dt(&model, id, &x0, 36_000.0, 1.0, 3600.0).unwrap())
}
