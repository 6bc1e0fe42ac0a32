//! Numerical core for transient gas network simulation and projection-based
//! model order reduction.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. It covers:
//!
//! - [`network`]: pipe networks, port sets, incidence matrices, height
//!   profile expansion and boundary scenarios,
//! - [`model`]: assembly of the semi-discrete isothermal Euler network model
//!   (`ode_mid`, `ode_end`) with friction and configurable gravity, plus the
//!   steady-state solve,
//! - [`solvers`]: the six time steppers (`generic`, `imex1`, `imex2`, `rk4`,
//!   `rk2hyp`, `rk4hyp`) and the trajectory driver,
//! - [`reductors`]: snapshot collection, the Galerkin reductors (`pod_r`,
//!   `gopod_r`, `dmd_r`, `eds_ro_l`, `eds_wx_l`, `eds_wz_l`), projection and
//!   steady-state gain matching,
//! - [`evaluation`]: relative L2⊗L2 output errors, MORscores and reductor
//!   sweeps.
//!
//! File formats, plotting, wall-clock timing and the command line live in the
//! `gasmor` companion crate.

#![no_std]

extern crate alloc;

pub mod evaluation;
pub mod linalg;
pub mod model;
pub mod network;
pub mod reductors;
pub mod solvers;
pub mod system;

pub use evaluation::{morscore, ErrorCurve, EvaluationReport};
pub use model::{Discretization, GasConstants, GravityMode, SemiDiscreteModel};
pub use network::{Network, PipeSpec, Scenario};
pub use reductors::{Basis, ReducedModel, ReductorId, SnapshotSet};
pub use solvers::{SolverId, Stepper, Trajectory};
pub use system::{InputSignal, System};

pub use nalgebra::{DMatrix, DVector};
