use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
// float math without std; unused when a dependency links std
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use super::{make_stepper, rosenbrock_adaptive, SolverId, StepError, Stepper};
use crate::system::{ConstantInput, InputSignal, System};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("at t = {time} s: {source}")]
pub struct IntegrationError {
    pub time: f64,
    #[source]
    pub source: StepError,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error("search range must satisfy 0 < lo < hi < inf (got [{lo}, {hi}])")]
    BadRange { lo: f64, hi: f64 },
    #[error("initial state must be nonzero")]
    ZeroInitialState,
    #[error("{solver} is adaptive; stability limits are defined for fixed-step solvers")]
    Adaptive { solver: SolverId },
    #[error("no stable step size in [{lo}, {hi}]")]
    EntireRangeUnstable { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IntegrateOptions {
    /// Record the deviation state at every sample.
    pub snapshots: bool,
}

/// Sampled output trajectory in deviation coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `outputs × samples`.
    pub outputs: DMatrix<f64>,
    /// `states × samples`, when requested.
    pub states: Option<DMatrix<f64>>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn samples(&self) -> usize {
        self.times.len()
    }

    /// Outputs shifted by the steady output `ȳ`.
    pub fn absolute_outputs(&self, steady: &DVector<f64>) -> DMatrix<f64> {
        let mut y = self.outputs.clone();
        for mut col in y.column_iter_mut() {
            col += steady;
        }
        y
    }
}

/// Sample grid `0, Δt, 2Δt, …, T` with `⌈T/Δt⌉ + 1` points; the last step
/// is shortened to land on `T`.
pub fn sample_times(horizon: f64, dt: f64) -> Vec<f64> {
    let ratio = horizon / dt;
    // tolerate round-off when T is a multiple of Δt
    let mut steps = Float::ceil(ratio) as usize;
    if steps > 0 && (ratio - (steps - 1) as f64) < 1e-9 {
        steps -= 1;
    }
    let steps = steps.max(1);
    (0..=steps)
        .map(|k| if k == steps { horizon } else { k as f64 * dt })
        .collect()
}

struct Recorder {
    times: Vec<f64>,
    outputs: Vec<f64>,
    states: Option<Vec<f64>>,
}

impl Recorder {
    fn push<S: System + ?Sized>(&mut self, sys: &S, t: f64, x: &DVector<f64>, input: &dyn InputSignal) {
        self.times.push(t);
        let y = sys.output(x, &input.at(t));
        self.outputs.extend_from_slice(y.as_slice());
        if let Some(s) = self.states.as_mut() {
            s.extend_from_slice(x.as_slice());
        }
    }
}

/// Integrates `E ẋ = A x + B u(t) + f(x)` from `x(0) = x0` over `[0, T]`,
/// recording outputs on the grid of [`sample_times`]. The adaptive solver
/// chooses its own steps but is clipped to hit every sample time.
pub fn integrate<S: System + ?Sized>(
    sys: &S,
    stepper: &mut Stepper,
    input: &dyn InputSignal,
    x0: &DVector<f64>,
    horizon: f64,
    dt: f64,
    opts: IntegrateOptions,
) -> Result<Trajectory, IntegrationError> {
    let fail = |time: f64| move |source: StepError| IntegrationError { time, source };
    if !(dt > 0.0 && dt.is_finite() && horizon > 0.0 && horizon.is_finite()) {
        return Err(fail(0.0)(StepError::BadStep { dt }));
    }
    if x0.len() != sys.state_dim() {
        return Err(fail(0.0)(StepError::Eval(crate::system::EvalError::Dimension {
            expected: sys.state_dim(),
            found: x0.len(),
        })));
    }
    let grid = sample_times(horizon, dt);
    let mut rec = Recorder {
        times: Vec::with_capacity(grid.len()),
        outputs: Vec::with_capacity(grid.len() * sys.output_dim()),
        states: opts.snapshots.then(|| Vec::with_capacity(grid.len() * x0.len())),
    };
    let mut x = x0.clone();
    rec.push(sys, 0.0, &x, input);
    let (mut accepted, mut rejected) = (0usize, 0usize);

    match stepper {
        Stepper::Rosenbrock { rtol, atol } => {
            let (rtol, atol) = (*rtol, *atol);
            let mut t = 0.0;
            let mut h = dt;
            for &target in &grid[1..] {
                while t < target {
                    let remaining = target - t;
                    // absorb a sliver instead of taking a tiny final step
                    let last = h >= remaining * (1.0 - 1e-12);
                    let h_try = if last { remaining } else { h };
                    let step = rosenbrock_adaptive(sys, &x, t, h_try, input, rtol, atol).map_err(fail(t))?;
                    if step.accepted {
                        accepted += 1;
                        x = step.state;
                        t = if last { target } else { t + h_try };
                        // keep the controller's proposal unless the clip was binding
                        h = if last { step.dt_next.max(h) } else { step.dt_next };
                    } else {
                        rejected += 1;
                        h = step.dt_next;
                    }
                }
                rec.push(sys, target, &x, input);
            }
        }
        _ => {
            for k in 1..grid.len() {
                let t = grid[k - 1];
                x = stepper.step(sys, &x, t, grid[k] - t, input).map_err(fail(t))?;
                if x.iter().any(|v| !v.is_finite()) {
                    return Err(fail(grid[k])(StepError::Eval(crate::system::EvalError::NonFinite)));
                }
                accepted += 1;
                rec.push(sys, grid[k], &x, input);
            }
        }
    }

    let samples = rec.times.len();
    let n = x0.len();
    Ok(Trajectory {
        times: rec.times,
        outputs: DMatrix::from_vec(sys.output_dim(), samples, rec.outputs),
        states: rec.states.map(|s| DMatrix::from_vec(n, samples, s)),
        accepted_steps: accepted,
        rejected_steps: rejected,
    })
}

/// Largest step in `[lo, hi]` for which the unforced trajectory from `x0`
/// stays finite and within `10³ ‖x0‖` over `[0, T]`, found by 20 bisection
/// steps.
pub fn max_stable_dt<S: System + ?Sized>(
    sys: &S,
    solver: SolverId,
    x0: &DVector<f64>,
    horizon: f64,
    lo: f64,
    hi: f64,
) -> Result<f64, StabilityError> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(StabilityError::BadRange { lo, hi });
    }
    if solver.is_adaptive() {
        return Err(StabilityError::Adaptive { solver });
    }
    let norm0 = x0.norm();
    if norm0 == 0.0 {
        return Err(StabilityError::ZeroInitialState);
    }
    if !is_stable(sys, solver, x0, norm0, horizon, lo) {
        return Err(StabilityError::EntireRangeUnstable { lo, hi });
    }
    if is_stable(sys, solver, x0, norm0, horizon, hi) {
        return Ok(hi);
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..20 {
        let mid = 0.5 * (a + b);
        if is_stable(sys, solver, x0, norm0, horizon, mid) {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(a)
}

fn is_stable<S: System + ?Sized>(sys: &S, solver: SolverId, x0: &DVector<f64>, norm0: f64, horizon: f64, dt: f64) -> bool {
    let input = ConstantInput::zero(sys.input_dim());
    let mut stepper = make_stepper(solver);
    let bound = 1e3 * norm0;
    let mut x = x0.clone();
    let mut t = 0.0;
    while t < horizon {
        match stepper.step(sys, &x, t, dt, &input) {
            Ok(next) => x = next,
            Err(_) => return false,
        }
        let norm = x.norm();
        if !(norm.is_finite() && norm <= bound) {
            return false;
        }
        t += dt;
    }
    true
}
