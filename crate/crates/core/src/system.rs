//! The structured first-order system contract shared by full and reduced
//! models:
//!
//! ```text
//! E ẋ = A x + B u + f(x),    y = C x + D u
//! ```
//!
//! in deviation coordinates around a reference (steady) state. `Q` is the
//! energy matrix used for the static gain `C Q⁻¹ B`.

use alloc::boxed::Box;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg::{LinalgError, MassMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("pressure underflow at state node {node} (absolute pressure {pressure} Pa)")]
    PressureUnderflow { node: usize, pressure: f64 },
    #[error("model has no reference state; compute the steady state first")]
    NotCentered,
    #[error("non-finite value encountered in right-hand side")]
    NonFinite,
    #[error("state has dimension {found}, expected {expected}")]
    Dimension { expected: usize, found: usize },
}

/// Time-dependent input `u(t)` in deviation coordinates.
pub trait InputSignal {
    fn dim(&self) -> usize;
    fn at(&self, t: f64) -> DVector<f64>;
}

/// Constant input (a step switched on at `t = 0`).
#[derive(Debug, Clone)]
pub struct ConstantInput(pub DVector<f64>);

impl ConstantInput {
    pub fn zero(dim: usize) -> Self {
        ConstantInput(DVector::zeros(dim))
    }
}

impl InputSignal for ConstantInput {
    fn dim(&self) -> usize {
        self.0.len()
    }
    fn at(&self, _t: f64) -> DVector<f64> {
        self.0.clone()
    }
}

/// Input given by a closure.
pub struct FnInput {
    dim: usize,
    f: Box<dyn Fn(f64) -> DVector<f64> + Send + Sync>,
}

impl FnInput {
    pub fn new(dim: usize, f: impl Fn(f64) -> DVector<f64> + Send + Sync + 'static) -> Self {
        FnInput { dim, f: Box::new(f) }
    }
}

impl InputSignal for FnInput {
    fn dim(&self) -> usize {
        self.dim
    }
    fn at(&self, t: f64) -> DVector<f64> {
        (self.f)(t)
    }
}

/// Structured input-output system in deviation coordinates.
pub trait System {
    fn mass(&self) -> &MassMatrix;
    fn energy(&self) -> &MassMatrix;
    fn linear(&self) -> &DMatrix<f64>;
    fn input_map(&self) -> &DMatrix<f64>;
    fn output_map(&self) -> &DMatrix<f64>;

    fn feedthrough(&self) -> Option<&DMatrix<f64>> {
        None
    }

    /// Nonlinear part `f(x)`, zero at `x = 0`.
    fn nonlinear(&self, x: &DVector<f64>) -> Result<DVector<f64>, EvalError>;

    /// Jacobian of the full right-hand side `A x + f(x)` with respect to `x`.
    fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>, EvalError>;

    /// `true` when `f ≡ 0`; steppers skip the nonlinear evaluation then.
    fn is_linear(&self) -> bool {
        false
    }

    fn state_dim(&self) -> usize {
        self.linear().nrows()
    }
    fn input_dim(&self) -> usize {
        self.input_map().ncols()
    }
    fn output_dim(&self) -> usize {
        self.output_map().nrows()
    }

    /// `A x + B u + f(x)`.
    fn rhs(&self, x: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>, EvalError> {
        let mut out = self.linear() * x;
        if self.input_dim() > 0 {
            out.gemv(1.0, self.input_map(), u, 1.0);
        }
        if !self.is_linear() {
            out += self.nonlinear(x)?;
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(EvalError::NonFinite);
        }
        Ok(out)
    }

    fn output(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let mut y = self.output_map() * x;
        if let Some(d) = self.feedthrough() {
            y.gemv(1.0, d, u, 1.0);
        }
        y
    }

    /// Static gain approximation `C Q⁻¹ B (+ D)`.
    fn static_gain(&self) -> DMatrix<f64> {
        let mut s = self.output_map() * self.energy().solve_matrix(self.input_map());
        if let Some(d) = self.feedthrough() {
            s += d;
        }
        s
    }
}

/// Linear system `E ẋ = A x + B u`, `y = C x`, with `Q := E`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    mass: MassMatrix,
    linear: DMatrix<f64>,
    input: DMatrix<f64>,
    output: DMatrix<f64>,
}

impl LinearSystem {
    pub fn new(
        mass: MassMatrix,
        linear: DMatrix<f64>,
        input: DMatrix<f64>,
        output: DMatrix<f64>,
    ) -> Result<Self, LinalgError> {
        let n = mass.dim();
        for found in [linear.nrows(), linear.ncols(), input.nrows(), output.ncols()] {
            if found != n {
                return Err(LinalgError::Dimension { expected: n, found });
            }
        }
        Ok(LinearSystem {
            mass,
            linear,
            input,
            output,
        })
    }

    /// The adjoint system `Eᵀ ż = Aᵀ z` with no inputs or outputs.
    pub fn adjoint(mass: MassMatrix, linear: &DMatrix<f64>) -> Self {
        let n = mass.dim();
        LinearSystem {
            mass,
            linear: linear.transpose(),
            input: DMatrix::zeros(n, 0),
            output: DMatrix::zeros(0, n),
        }
    }
}

impl System for LinearSystem {
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
        Ok(DVector::zeros(x.len()))
    }
    fn jacobian(&self, _x: &DVector<f64>) -> Result<DMatrix<f64>, EvalError> {
        Ok(self.linear.clone())
    }
    fn is_linear(&self) -> bool {
        true
    }
}
