//! Semi-discrete isothermal Euler model of a pipe network.
//!
//! State `x = (p, q)`: pressures at non-supply nodes and mass fluxes per pipe.
//! Per non-supply node `i` and pipe `k = (i → j)`:
//!
//! ```text
//! E_p,ii ṗ_i = Σ_k ±q_k − d_i(t),                    E_p,ii = Σ_k S_k L_k / (2γ)
//! E_q,kk q̇_k = p_i − p_j − γ λ_k L_k |q_k| q_k / (2 d_k S_k² p_*) − (g Δh_k / γ) p_g
//! ```
//!
//! with `E_q,kk = L_k / S_k`. The friction pressure `p_*` is the pipe mean
//! pressure for `ode_mid` and the downstream pressure for `ode_end`. Supply
//! pressures enter the momentum balance through `B`; inside the friction and
//! gravity terms they are frozen at their steady values. After
//! [`SemiDiscreteModel::steady_state`] the model works in deviation
//! coordinates around the steady state.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Complex, DMatrix, DVector};
// float math without std; unused when a dependency links std
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::linalg::MassMatrix;
use crate::network::{incidence, Network, PortKind};
use crate::system::{EvalError, System};

/// Newton iteration cap for the steady-state solve.
pub const STEADY_MAX_ITERATIONS: usize = 50;
/// Scaled infinity-norm residual accepted as converged.
pub const STEADY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("gas constants must be positive and finite")]
    BadConstants,
    #[error("friction factor override must be non-negative and finite")]
    BadFriction,
    #[error("steady input has dimension {found}, expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("supply pressure must be positive (port {port})")]
    NonPositiveSupply { port: usize },
    #[error("steady-state Newton did not converge after {iterations} iterations (scaled residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("steady-state Newton: singular Jacobian at iteration {iteration}")]
    SingularJacobian { iteration: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasConstants {
    /// Specific gas constant R_s [J/(kg K)].
    pub specific_gas_constant: f64,
    /// Reference temperature T_0 [K].
    pub temperature: f64,
    /// Reference compressibility z_0.
    pub compressibility: f64,
    /// Gravitational acceleration g [m/s²].
    pub gravity: f64,
}

impl Default for GasConstants {
    fn default() -> Self {
        GasConstants {
            specific_gas_constant: 530.0,
            temperature: 283.15,
            compressibility: 0.8,
            gravity: 9.80665,
        }
    }
}

impl GasConstants {
    /// γ = R_s T_0 z_0, the squared isothermal speed of sound [m²/s²].
    pub fn gamma(&self) -> f64 {
        self.specific_gas_constant * self.temperature * self.compressibility
    }

    pub fn check(&self) -> Result<(), ModelError> {
        let all = [
            self.specific_gas_constant,
            self.temperature,
            self.compressibility,
            self.gravity,
        ];
        if all.iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(ModelError::BadConstants)
        }
    }
}

macro_rules! id_enum {
    ($name:ident, $err:literal, { $($variant:ident => $id:literal),+ $(,)? }) => {
        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn id(self) -> &'static str {
                match self {
                    $($name::$variant => $id),+
                }
            }
        }

        impl core::fmt::Display for $name {
            fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
                f.write_str(self.id())
            }
        }

        impl core::str::FromStr for $name {
            type Err = alloc::string::String;
            fn from_str(s: &str) -> Result<Self, alloc::string::String> {
                match s {
                    $($id => Ok($name::$variant),)+
                    other => {
                        let valid: alloc::vec::Vec<&str> = $name::ALL.iter().map(|v| v.id()).collect();
                        Err(alloc::format!("unknown {} '{}' (valid: {})", $err, other, valid.join(", ")))
                    }
                }
            }
        }
    };
}
pub(crate) use id_enum;

/// Spatial discretization variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Discretization {
    Midpoint,
    Endpoint,
}

id_enum!(Discretization, "model", { Midpoint => "ode_mid", Endpoint => "ode_end" });

impl Discretization {
    pub fn is_port_hamiltonian(self) -> bool {
        matches!(self, Discretization::Endpoint)
    }
}

/// How the gravity term's pressure argument is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GravityMode {
    Off,
    /// Pressure frozen at the steady state.
    Static,
    /// Pressure follows the state.
    Dynamic,
}

id_enum!(GravityMode, "gravity mode", { Off => "none", Static => "static", Dynamic => "dynamic" });

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModelOptions {
    /// Replaces the per-pipe friction factor when set (0 gives a frictionless
    /// model).
    pub friction_override: Option<f64>,
}

/// Nikuradse fully turbulent friction factor.
pub fn friction_factor(diameter: f64, roughness: f64) -> f64 {
    let t = 2.0 * (diameter / roughness).log10() + 1.138;
    1.0 / (t * t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Terminal {
    State(usize),
    Supply(usize),
}

#[derive(Debug, Clone, Copy)]
struct PipeTerms {
    from: Terminal,
    to: Terminal,
    /// γ λ L / (2 d S²)
    friction: f64,
    /// g Δh / γ
    gravity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum GravityEval {
    Off,
    Frozen,
    Dynamic,
}

/// Steady state the model is centered on.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    /// Absolute state x̄.
    pub state: DVector<f64>,
    /// Absolute input ū = (s̄, d̄).
    pub input: DVector<f64>,
    /// Absolute output ȳ = C x̄.
    pub output: DVector<f64>,
    /// Friction pressure p̄_* per pipe.
    pub friction_pressure: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyDiagnostics {
    pub iterations: usize,
    pub residual: f64,
}

/// Linear and nonlinear right-hand side contributions, evaluated separately.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsParts {
    /// `A x + B u`
    pub linear: DVector<f64>,
    /// `f(x)`
    pub nonlinear: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct SemiDiscreteModel {
    scheme: Discretization,
    gravity: GravityMode,
    constants: GasConstants,
    state_nodes: Vec<String>,
    supply_ports: Vec<String>,
    demand_ports: Vec<String>,
    pipe_ids: Vec<String>,
    demand_rows: Vec<usize>,
    pipes: Vec<PipeTerms>,
    friction_factors: Vec<f64>,
    mass: MassMatrix,
    linear: DMatrix<f64>,
    input: DMatrix<f64>,
    output: DMatrix<f64>,
    reference: Option<Reference>,
}

impl SemiDiscreteModel {
    pub fn assemble(
        network: &Network,
        constants: GasConstants,
        scheme: Discretization,
        gravity: GravityMode,
    ) -> Result<Self, ModelError> {
        Self::assemble_with(network, constants, scheme, gravity, ModelOptions::default())
    }

    pub fn assemble_with(
        network: &Network,
        constants: GasConstants,
        scheme: Discretization,
        gravity: GravityMode,
        options: ModelOptions,
    ) -> Result<Self, ModelError> {
        constants.check()?;
        if let Some(l) = options.friction_override {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(ModelError::BadFriction);
            }
        }
        let gamma = constants.gamma();
        let inc = incidence(network);
        let n_p = inc.interior_nodes.len();
        let n_q = network.pipes().len();
        let n_s = inc.supply_nodes.len();
        let demand_nodes = network.demand_nodes();
        let n_d = demand_nodes.len();
        let n = n_p + n_q;

        let mut terminal = vec![Terminal::State(0); network.nodes().len()];
        for (r, &i) in inc.interior_nodes.iter().enumerate() {
            terminal[i] = Terminal::State(r);
        }
        for (r, &i) in inc.supply_nodes.iter().enumerate() {
            terminal[i] = Terminal::Supply(r);
        }

        let mut mass = DVector::zeros(n);
        let mut pipes = Vec::with_capacity(n_q);
        let mut friction_factors = Vec::with_capacity(n_q);
        for (k, pipe) in network.pipes().iter().enumerate() {
            let area = pipe.cross_section();
            let (from, to) = network.pipe_endpoints(k);
            for node in [from, to] {
                if let Terminal::State(r) = terminal[node] {
                    mass[r] += area * pipe.length / (2.0 * gamma);
                }
            }
            mass[n_p + k] = pipe.length / area;
            let lambda = options
                .friction_override
                .unwrap_or_else(|| friction_factor(pipe.diameter, pipe.roughness));
            friction_factors.push(lambda);
            pipes.push(PipeTerms {
                from: terminal[from],
                to: terminal[to],
                friction: gamma * lambda * pipe.length / (2.0 * pipe.diameter * area * area),
                gravity: constants.gravity * pipe.height_delta / gamma,
            });
        }

        let mut linear = DMatrix::zeros(n, n);
        linear.view_mut((0, n_p), (n_p, n_q)).copy_from(&inc.interior);
        linear
            .view_mut((n_p, 0), (n_q, n_p))
            .copy_from(&(-inc.interior.transpose()));

        let mut input = DMatrix::zeros(n, n_s + n_d);
        let mut output = DMatrix::zeros(n_s + n_d, n);
        for j in 0..n_s {
            for k in 0..n_q {
                let a = inc.supply[(j, k)];
                if a != 0.0 {
                    input[(n_p + k, j)] = -a;
                    output[(j, n_p + k)] = -a;
                }
            }
        }
        let mut demand_rows = Vec::with_capacity(n_d);
        for (l, &node) in demand_nodes.iter().enumerate() {
            let Terminal::State(r) = terminal[node] else {
                unreachable!("demand nodes are never supply nodes");
            };
            demand_rows.push(r);
            input[(r, n_s + l)] = -1.0;
            output[(n_s + l, r)] = 1.0;
        }

        let name = |i: &usize| network.nodes()[*i].clone();
        debug_assert!(demand_nodes
            .iter()
            .all(|&i| network.port_kind(&network.nodes()[i]) == Some(PortKind::Demand)));
        Ok(SemiDiscreteModel {
            scheme,
            gravity,
            constants,
            state_nodes: inc.interior_nodes.iter().map(name).collect(),
            supply_ports: inc.supply_nodes.iter().map(name).collect(),
            demand_ports: demand_nodes.iter().map(name).collect(),
            pipe_ids: network.pipes().iter().map(|p| p.id.clone()).collect(),
            demand_rows,
            pipes,
            friction_factors,
            mass: MassMatrix::from_diagonal(mass).expect("positive pipe geometry gives a positive mass"),
            linear,
            input,
            output,
            reference: None,
        })
    }

    pub fn scheme(&self) -> Discretization {
        self.scheme
    }
    pub fn gravity_mode(&self) -> GravityMode {
        self.gravity
    }
    pub fn constants(&self) -> &GasConstants {
        &self.constants
    }
    pub fn pressure_dim(&self) -> usize {
        self.state_nodes.len()
    }
    pub fn flux_dim(&self) -> usize {
        self.pipes.len()
    }
    pub fn supply_count(&self) -> usize {
        self.supply_ports.len()
    }
    pub fn demand_count(&self) -> usize {
        self.demand_ports.len()
    }
    /// Node ids of the pressure states.
    pub fn state_nodes(&self) -> &[String] {
        &self.state_nodes
    }
    pub fn pipe_ids(&self) -> &[String] {
        &self.pipe_ids
    }
    /// Port ids in input/output order: supply ports, then demand ports.
    pub fn port_ids(&self) -> impl Iterator<Item = &str> {
        self.supply_ports
            .iter()
            .chain(self.demand_ports.iter())
            .map(|s| s.as_str())
    }
    pub fn friction_factors(&self) -> &[f64] {
        &self.friction_factors
    }
    pub fn reference(&self) -> Option<&Reference> {
        self.reference.as_ref()
    }

    /// Absolute steady output ȳ.
    pub fn steady_output(&self) -> Option<&DVector<f64>> {
        self.reference.as_ref().map(|r| &r.output)
    }

    fn reference_or_err(&self) -> Result<&Reference, EvalError> {
        self.reference.as_ref().ok_or(EvalError::NotCentered)
    }

    fn pressure_at(x_abs: &DVector<f64>, supply: &DVector<f64>, t: Terminal) -> f64 {
        match t {
            Terminal::State(i) => x_abs[i],
            Terminal::Supply(j) => supply[j],
        }
    }

    /// Friction pressure and its weights on the (from, to) terminals.
    fn friction_pressure(&self, pipe: &PipeTerms, x_abs: &DVector<f64>, supply: &DVector<f64>) -> (f64, f64, f64) {
        let to = Self::pressure_at(x_abs, supply, pipe.to);
        match self.scheme {
            Discretization::Midpoint => {
                let from = Self::pressure_at(x_abs, supply, pipe.from);
                (0.5 * (from + to), 0.5, 0.5)
            }
            Discretization::Endpoint => (to, 0.0, 1.0),
        }
    }

    fn check_pressures(&self, x_abs: &DVector<f64>) -> Result<(), EvalError> {
        for i in 0..self.pressure_dim() {
            let p = x_abs[i];
            if !(p > 0.0) {
                return Err(EvalError::PressureUnderflow { node: i, pressure: p });
            }
        }
        Ok(())
    }

    /// Absolute friction + gravity term on the flux rows.
    fn forces(&self, x_abs: &DVector<f64>, supply: &DVector<f64>, gravity: GravityEval) -> Result<DVector<f64>, EvalError> {
        self.check_pressures(x_abs)?;
        let n_p = self.pressure_dim();
        let mut out = DVector::zeros(x_abs.len());
        for (k, pipe) in self.pipes.iter().enumerate() {
            let q = x_abs[n_p + k];
            let (pstar, _, _) = self.friction_pressure(pipe, x_abs, supply);
            let mut v = -pipe.friction * q.abs() * q / pstar;
            if gravity == GravityEval::Dynamic {
                v -= pipe.gravity * pstar;
            }
            out[n_p + k] = v;
        }
        Ok(out)
    }

    /// ∂(forces)/∂x at an absolute state.
    fn forces_jacobian(&self, x_abs: &DVector<f64>, supply: &DVector<f64>, gravity: GravityEval) -> Result<DMatrix<f64>, EvalError> {
        self.check_pressures(x_abs)?;
        let n_p = self.pressure_dim();
        let n = x_abs.len();
        let mut jac = DMatrix::zeros(n, n);
        for (k, pipe) in self.pipes.iter().enumerate() {
            let row = n_p + k;
            let q = x_abs[row];
            let (pstar, w_from, w_to) = self.friction_pressure(pipe, x_abs, supply);
            jac[(row, row)] = -2.0 * pipe.friction * q.abs() / pstar;
            let mut d_pstar = pipe.friction * q.abs() * q / (pstar * pstar);
            if gravity == GravityEval::Dynamic {
                d_pstar -= pipe.gravity;
            }
            for (terminal, w) in [(pipe.from, w_from), (pipe.to, w_to)] {
                if let (Terminal::State(i), true) = (terminal, w != 0.0) {
                    jac[(row, i)] += w * d_pstar;
                }
            }
        }
        Ok(jac)
    }

    fn dynamic_gravity(&self) -> GravityEval {
        match self.gravity {
            GravityMode::Off => GravityEval::Off,
            GravityMode::Static => GravityEval::Frozen,
            GravityMode::Dynamic => GravityEval::Dynamic,
        }
    }

    fn steady_gravity(&self) -> GravityEval {
        match self.gravity {
            GravityMode::Off => GravityEval::Off,
            GravityMode::Static | GravityMode::Dynamic => GravityEval::Dynamic,
        }
    }

    /// Returns `(A x + B u, f(x))` in deviation coordinates.
    pub fn eval_rhs(&self, x: &DVector<f64>, u: &DVector<f64>) -> Result<RhsParts, EvalError> {
        let mut linear = &self.linear * x;
        linear.gemv(1.0, &self.input, u, 1.0);
        Ok(RhsParts {
            linear,
            nonlinear: self.nonlinear_deviation(x)?,
        })
    }

    fn nonlinear_deviation(&self, x: &DVector<f64>) -> Result<DVector<f64>, EvalError> {
        let r = self.reference_or_err()?;
        if x.len() != r.state.len() {
            return Err(EvalError::Dimension {
                expected: r.state.len(),
                found: x.len(),
            });
        }
        let x_abs = &r.state + x;
        self.check_pressures(&x_abs)?;
        let supply = r.input.rows(0, self.supply_count()).into_owned();
        let n_p = self.pressure_dim();
        let dynamic = self.dynamic_gravity() == GravityEval::Dynamic;
        let mut out = DVector::zeros(x.len());
        for (k, pipe) in self.pipes.iter().enumerate() {
            let q_bar = r.state[n_p + k];
            let q = x_abs[n_p + k];
            let pstar_bar = r.friction_pressure[k];
            let (pstar, _, _) = self.friction_pressure(pipe, &x_abs, &supply);
            let fric = -pipe.friction * q.abs() * q / pstar;
            let fric_bar = -pipe.friction * q_bar.abs() * q_bar / pstar_bar;
            let mut v = fric - fric_bar;
            if dynamic {
                v -= pipe.gravity * (pstar - pstar_bar);
            }
            out[n_p + k] = v;
        }
        Ok(out)
    }

    /// Exact Jacobian of `A x + f(x)` in deviation coordinates.
    pub fn eval_jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>, EvalError> {
        let r = self.reference_or_err()?;
        let x_abs = &r.state + x;
        let supply = r.input.rows(0, self.supply_count()).into_owned();
        Ok(&self.linear + self.forces_jacobian(&x_abs, &supply, self.dynamic_gravity())?)
    }

    /// Absolute steady residual `A x + B ū + f(x)`.
    pub fn steady_residual(&self, x_abs: &DVector<f64>, u_abs: &DVector<f64>) -> Result<DVector<f64>, EvalError> {
        let supply = u_abs.rows(0, self.supply_count()).into_owned();
        let mut res = &self.linear * x_abs;
        res.gemv(1.0, &self.input, u_abs, 1.0);
        res += self.forces(x_abs, &supply, self.steady_gravity())?;
        Ok(res)
    }

    fn scaled_residual(&self, res: &DVector<f64>, flux_scale: f64, pressure_scale: f64) -> DVector<f64> {
        let n_p = self.pressure_dim();
        DVector::from_iterator(
            res.len(),
            res.iter()
                .enumerate()
                .map(|(i, v)| if i < n_p { v / flux_scale } else { v / pressure_scale }),
        )
    }

    /// Solves `0 = A x̄ + B ū + f(x̄)` by damped Newton and centers the model
    /// on the solution.
    pub fn steady_state(&mut self, supply: &DVector<f64>, demand: &DVector<f64>) -> Result<SteadyDiagnostics, ModelError> {
        let (n_s, n_d) = (self.supply_count(), self.demand_count());
        if supply.len() != n_s {
            return Err(ModelError::Dimension {
                expected: n_s,
                found: supply.len(),
            });
        }
        if demand.len() != n_d {
            return Err(ModelError::Dimension {
                expected: n_d,
                found: demand.len(),
            });
        }
        if let Some(port) = supply.iter().position(|&s| !(s > 0.0)) {
            return Err(ModelError::NonPositiveSupply { port });
        }
        let mut u_abs = DVector::zeros(n_s + n_d);
        u_abs.rows_mut(0, n_s).copy_from(supply);
        u_abs.rows_mut(n_s, n_d).copy_from(demand);

        let flux_scale = demand.iter().fold(1.0f64, |m, d| m.max(d.abs()));
        let pressure_scale = supply.iter().fold(0.0f64, |m, s| m.max(*s));

        let mut x = self.initial_guess(supply, demand);
        let mut res = self.steady_residual(&x, &u_abs)?;
        let mut scaled = self.scaled_residual(&res, flux_scale, pressure_scale);
        let mut iterations = 0;
        while scaled.amax() > STEADY_TOLERANCE {
            if iterations == STEADY_MAX_ITERATIONS {
                return Err(ModelError::NoConvergence {
                    iterations,
                    residual: scaled.amax(),
                });
            }
            iterations += 1;
            let jac = &self.linear + self.forces_jacobian(&x, supply, self.steady_gravity())?;
            let step = jac
                .lu()
                .solve(&(-&res))
                .ok_or(ModelError::SingularJacobian { iteration: iterations })?;
            let merit = scaled.norm();
            let mut alpha = 1.0;
            let mut accepted = false;
            while alpha > 1e-10 {
                let trial = &x + &step * alpha;
                if let Ok(trial_res) = self.steady_residual(&trial, &u_abs) {
                    let trial_scaled = self.scaled_residual(&trial_res, flux_scale, pressure_scale);
                    if trial_scaled.norm() <= (1.0 - 1e-4 * alpha) * merit {
                        x = trial;
                        res = trial_res;
                        scaled = trial_scaled;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                return Err(ModelError::NoConvergence {
                    iterations,
                    residual: scaled.amax(),
                });
            }
        }

        let friction_pressure = self
            .pipes
            .iter()
            .map(|p| self.friction_pressure(p, &x, supply).0)
            .collect();
        let output = &self.output * &x;
        self.reference = Some(Reference {
            state: x,
            input: u_abs,
            output,
            friction_pressure,
        });
        Ok(SteadyDiagnostics {
            iterations,
            residual: scaled.amax(),
        })
    }

    /// Uniform mean supply pressure; fluxes routed along a spanning forest
    /// rooted at the supply nodes (exact on trees).
    fn initial_guess(&self, supply: &DVector<f64>, demand: &DVector<f64>) -> DVector<f64> {
        let n_p = self.pressure_dim();
        let n_q = self.flux_dim();
        let n_s = self.supply_count();
        let mut x = DVector::zeros(n_p + n_q);
        let mean = supply.sum() / n_s as f64;
        x.rows_mut(0, n_p).fill(mean);

        // graph nodes: states 0..n_p, supplies n_p..n_p+n_s
        let node = |t: Terminal| match t {
            Terminal::State(i) => i,
            Terminal::Supply(j) => n_p + j,
        };
        let total = n_p + n_s;
        let mut adj = vec![Vec::new(); total];
        for (k, p) in self.pipes.iter().enumerate() {
            let (a, b) = (node(p.from), node(p.to));
            adj[a].push((k, b));
            adj[b].push((k, a));
        }
        let mut parent: Vec<Option<usize>> = vec![None; total];
        let mut visited = vec![false; total];
        let mut order = Vec::with_capacity(total);
        let mut queue: VecDeque<usize> = (n_p..total).collect();
        for v in n_p..total {
            visited[v] = true;
        }
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(k, w) in &adj[v] {
                if !visited[w] {
                    visited[w] = true;
                    parent[w] = Some(k);
                    queue.push_back(w);
                }
            }
        }
        let mut load = vec![0.0; total];
        for (l, &r) in self.demand_rows.iter().enumerate() {
            load[r] = demand[l];
        }
        for &v in order.iter().rev() {
            if let Some(k) = parent[v] {
                let pipe = &self.pipes[k];
                let flow_into_v = load[v];
                x[n_p + k] = if node(pipe.to) == v { flow_into_v } else { -flow_into_v };
                let other = if node(pipe.to) == v { node(pipe.from) } else { node(pipe.to) };
                load[other] += flow_into_v;
            }
        }
        x
    }

    /// Eigenvalues of `E⁻¹ J(0)`, the linearization at the steady state.
    pub fn linear_spectrum(&self) -> Result<Vec<Complex<f64>>, EvalError> {
        let jac = self.eval_jacobian(&DVector::zeros(self.state_dim()))?;
        let m = self.mass.solve_matrix(&jac);
        Ok(m.schur().complex_eigenvalues().iter().copied().collect())
    }
}

impl System for SemiDiscreteModel {
    fn mass(&self) -> &MassMatrix {
        &self.mass
    }
    /// Q := E.
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
        self.nonlinear_deviation(x)
    }
    fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>, EvalError> {
        self.eval_jacobian(x)
    }
}
