//! Time steppers for `E ẋ = A x + B u(t) + f(x)` and the trajectory driver.
//!
//! | id        | scheme                                                  |
//! |-----------|---------------------------------------------------------|
//! | `generic` | adaptive 2-stage Rosenbrock pair, `d = 1/(2+√2)`        |
//! | `imex1`   | implicit Euler on `A`, explicit Euler on `f`            |
//! | `imex2`   | implicit midpoint on `A`, explicit midpoint on `f`      |
//! | `rk4`     | classical explicit Runge-Kutta                          |
//! | `rk2hyp`  | 5-stage, 2nd order, enlarged hyperbolic stability       |
//! | `rk4hyp`  | 6-stage, 4th order, enlarged hyperbolic stability       |

mod integrate;
mod rosenbrock;
mod tableau;

pub use integrate::{integrate, max_stable_dt, sample_times, IntegrateOptions, IntegrationError, StabilityError, Trajectory};
pub use rosenbrock::{rosenbrock_adaptive, RosenbrockStep, DT_MIN};
pub use tableau::{ButcherTableau, RK4HYP_NODES, RK4HYP_WEIGHTS};

use alloc::vec::Vec;

use nalgebra::{DVector, Dyn, LU};
use thiserror::Error;

use crate::model::id_enum;
use crate::system::{EvalError, InputSignal, System};

/// Default relative tolerance of the adaptive solver.
pub const DEFAULT_RTOL: f64 = 1e-3;
/// Default absolute tolerance of the adaptive solver.
pub const DEFAULT_ATOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverId {
    Generic,
    Imex1,
    Imex2,
    Rk4,
    Rk2Hyp,
    Rk4Hyp,
}

id_enum!(SolverId, "solver", {
    Generic => "generic",
    Imex1 => "imex1",
    Imex2 => "imex2",
    Rk4 => "rk4",
    Rk2Hyp => "rk2hyp",
    Rk4Hyp => "rk4hyp",
});

impl SolverId {
    pub fn is_adaptive(self) -> bool {
        matches!(self, SolverId::Generic)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("singular implicit system matrix for dt = {dt}")]
    Singular { dt: f64 },
    #[error("step size {dt} fell below the minimum {min}")]
    StepUnderflow { dt: f64, min: f64 },
    #[error("{solver} is adaptive; use rosenbrock_adaptive")]
    NotFixedStep { solver: SolverId },
    #[error("step size must be non-negative and finite (dt = {dt})")]
    BadStep { dt: f64 },
}

/// LU of `E − θ Δt A`, refactorized only when `Δt` changes.
#[derive(Debug, Clone, Default)]
pub struct ImplicitCache {
    key: Option<(u64, u64)>,
    lu: Option<LU<f64, Dyn, Dyn>>,
    factorizations: usize,
}

impl ImplicitCache {
    fn get<S: System + ?Sized>(&mut self, sys: &S, theta_dt: f64) -> Result<&LU<f64, Dyn, Dyn>, StepError> {
        let key = (theta_dt.to_bits(), sys.state_dim() as u64);
        if self.key != Some(key) {
            let m = sys.mass().minus_scaled(theta_dt, sys.linear());
            let lu = m.lu();
            if !lu.is_invertible() {
                self.key = None;
                return Err(StepError::Singular { dt: theta_dt });
            }
            self.lu = Some(lu);
            self.key = Some(key);
            self.factorizations += 1;
        }
        Ok(self.lu.as_ref().expect("factorization cached above"))
    }

    /// Number of factorizations performed so far.
    pub fn factorizations(&self) -> usize {
        self.factorizations
    }
}

/// A time stepper with its per-integration state.
#[derive(Debug, Clone)]
pub enum Stepper {
    Explicit(ButcherTableau),
    Imex1(ImplicitCache),
    Imex2(ImplicitCache),
    Rosenbrock { rtol: f64, atol: f64 },
}

pub fn make_stepper(id: SolverId) -> Stepper {
    match id {
        SolverId::Generic => Stepper::Rosenbrock {
            rtol: DEFAULT_RTOL,
            atol: DEFAULT_ATOL,
        },
        SolverId::Imex1 => Stepper::Imex1(ImplicitCache::default()),
        SolverId::Imex2 => Stepper::Imex2(ImplicitCache::default()),
        SolverId::Rk4 => Stepper::Explicit(ButcherTableau::rk4()),
        SolverId::Rk2Hyp => Stepper::Explicit(ButcherTableau::rk2hyp()),
        SolverId::Rk4Hyp => Stepper::Explicit(ButcherTableau::rk4hyp()),
    }
}

impl Stepper {
    pub fn is_adaptive(&self) -> bool {
        matches!(self, Stepper::Rosenbrock { .. })
    }

    /// One fixed step of size `dt` from `(t, x)`.
    pub fn step<S: System + ?Sized>(
        &mut self,
        sys: &S,
        x: &DVector<f64>,
        t: f64,
        dt: f64,
        input: &dyn InputSignal,
    ) -> Result<DVector<f64>, StepError> {
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(StepError::BadStep { dt });
        }
        match self {
            Stepper::Explicit(tableau) => explicit_rk_step(tableau, sys, x, t, dt, input),
            Stepper::Imex1(cache) => imex1_step(cache, sys, x, t, dt, input),
            Stepper::Imex2(cache) => imex2_step(cache, sys, x, t, dt, input),
            Stepper::Rosenbrock { .. } => Err(StepError::NotFixedStep {
                solver: SolverId::Generic,
            }),
        }
    }
}

fn forcing<S: System + ?Sized>(sys: &S, u: &DVector<f64>, out: &mut DVector<f64>) {
    if sys.input_dim() > 0 {
        out.gemv(1.0, sys.input_map(), u, 1.0);
    }
}

/// Explicit Runge-Kutta step with stage inputs sampled at `t + c_i Δt`.
pub fn explicit_rk_step<S: System + ?Sized>(
    tableau: &ButcherTableau,
    sys: &S,
    x: &DVector<f64>,
    t: f64,
    dt: f64,
    input: &dyn InputSignal,
) -> Result<DVector<f64>, StepError> {
    let s = tableau.stages();
    let mut k: Vec<DVector<f64>> = Vec::with_capacity(s);
    for i in 0..s {
        let mut stage = x.clone();
        for (j, kj) in k.iter().enumerate() {
            let a = tableau.a(i, j);
            if a != 0.0 {
                stage.axpy(dt * a, kj, 1.0);
            }
        }
        let u = input.at(t + tableau.nodes[i] * dt);
        let rhs = sys.rhs(&stage, &u)?;
        k.push(sys.mass().solve(&rhs));
    }
    let mut next = x.clone();
    for (b, kj) in tableau.weights.iter().zip(&k) {
        if *b != 0.0 {
            next.axpy(dt * b, kj, 1.0);
        }
    }
    Ok(next)
}

/// `(E − Δt A) x⁺ = E x + Δt (B u(t+Δt) + f(x))`.
pub fn imex1_step<S: System + ?Sized>(
    cache: &mut ImplicitCache,
    sys: &S,
    x: &DVector<f64>,
    t: f64,
    dt: f64,
    input: &dyn InputSignal,
) -> Result<DVector<f64>, StepError> {
    let mut explicit = if sys.is_linear() {
        DVector::zeros(x.len())
    } else {
        sys.nonlinear(x)?
    };
    forcing(sys, &input.at(t + dt), &mut explicit);
    let rhs = sys.mass().mul(x) + explicit * dt;
    let lu = cache.get(sys, dt)?;
    lu.solve(&rhs).ok_or(StepError::Singular { dt })
}

/// Stage `(E − Δt/2 A) x* = E x + Δt/2 (B u(t) + f(x))`, then
/// `E x⁺ = E x + Δt (A x* + B u(t+Δt/2) + f(x*))`.
pub fn imex2_step<S: System + ?Sized>(
    cache: &mut ImplicitCache,
    sys: &S,
    x: &DVector<f64>,
    t: f64,
    dt: f64,
    input: &dyn InputSignal,
) -> Result<DVector<f64>, StepError> {
    let ex = sys.mass().mul(x);
    let mut explicit = if sys.is_linear() {
        DVector::zeros(x.len())
    } else {
        sys.nonlinear(x)?
    };
    forcing(sys, &input.at(t), &mut explicit);
    let rhs = &ex + explicit * (0.5 * dt);
    let lu = cache.get(sys, 0.5 * dt)?;
    let stage = lu.solve(&rhs).ok_or(StepError::Singular { dt })?;

    let mut slope = sys.linear() * &stage;
    if !sys.is_linear() {
        slope += sys.nonlinear(&stage)?;
    }
    forcing(sys, &input.at(t + 0.5 * dt), &mut slope);
    Ok(sys.mass().solve(&(ex + slope * dt)))
}

/// Dense helper: `E⁻¹ (A x + B u + f(x))`.
pub fn state_derivative<S: System + ?Sized>(sys: &S, x: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>, EvalError> {
    Ok(sys.mass().solve(&sys.rhs(x, u)?))
}
