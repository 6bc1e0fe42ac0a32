use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DVector;
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{Network, PortKind};
use crate::system::InputSignal;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("series {port}: time not increasing at sample {index}")]
    TimeNotIncreasing { port: String, index: usize },
    #[error("series {port}: missing t=0 row")]
    MissingInitialRow { port: String },
    #[error("series {port}: time and value sample counts differ")]
    LengthMismatch { port: String },
    #[error("unknown port id {port}")]
    UnknownPort { port: String },
    #[error("port {port} has no series in the scenario")]
    MissingPort { port: String },
    #[error("port {port} appears twice in the scenario")]
    DuplicatePort { port: String },
    #[error("supply {port}: pressure must be positive (found {value} Pa at t={time} s)")]
    NonPositivePressure { port: String, value: f64, time: f64 },
    #[error("horizon and step must be positive and finite (T={horizon}, dt={dt})")]
    BadTiming { horizon: f64, dt: f64 },
    #[error("series {port}: non-finite sample")]
    NonFinite { port: String },
}

/// Piecewise-linear time series, held constant outside its sample range.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(port: &str, times: Vec<f64>, values: Vec<f64>) -> Result<Self, ScenarioError> {
        let port = || String::from(port);
        if times.len() != values.len() || times.is_empty() {
            return Err(ScenarioError::LengthMismatch { port: port() });
        }
        if times.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(ScenarioError::NonFinite { port: port() });
        }
        if times[0] != 0.0 {
            return Err(ScenarioError::MissingInitialRow { port: port() });
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(ScenarioError::TimeNotIncreasing { port: port(), index: i + 1 });
        }
        Ok(TimeSeries { times, values })
    }

    pub fn constant(value: f64) -> Self {
        TimeSeries {
            times: alloc::vec![0.0],
            values: alloc::vec![value],
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn initial(&self) -> f64 {
        self.values[0]
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.values[0];
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1];
        }
        // first index with times[i] > t
        let i = self.times.partition_point(|&s| s <= t);
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }
}

/// Boundary scenario: horizon, step hint and one series per port id.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub horizon: f64,
    pub dt: f64,
    pub series: Vec<(String, TimeSeries)>,
}

impl Scenario {
    pub fn new(horizon: f64, dt: f64, series: Vec<(String, TimeSeries)>) -> Result<Self, ScenarioError> {
        if !(horizon > 0.0 && dt > 0.0 && horizon.is_finite() && dt.is_finite()) {
            return Err(ScenarioError::BadTiming { horizon, dt });
        }
        for (i, (port, _)) in series.iter().enumerate() {
            if series[..i].iter().any(|(p, _)| p == port) {
                return Err(ScenarioError::DuplicatePort { port: port.clone() });
            }
        }
        Ok(Scenario { horizon, dt, series })
    }

    pub fn get(&self, port: &str) -> Option<&TimeSeries> {
        self.series.iter().find(|(p, _)| p == port).map(|(_, s)| s)
    }

    /// Orders the series by the network's port layout (supply nodes, then
    /// demand nodes, each in node order) and checks port ids and pressures.
    pub fn bind(&self, network: &Network) -> Result<BoundScenario, ScenarioError> {
        for (port, _) in &self.series {
            if network.port_kind(port).is_none() {
                return Err(ScenarioError::UnknownPort { port: port.clone() });
            }
        }
        let lookup = |node: usize| -> Result<(String, TimeSeries), ScenarioError> {
            let id = &network.nodes()[node];
            self.get(id)
                .cloned()
                .map(|s| (id.clone(), s))
                .ok_or_else(|| ScenarioError::MissingPort { port: id.clone() })
        };
        let supply = network
            .supply_nodes()
            .into_iter()
            .map(lookup)
            .collect::<Result<Vec<_>, _>>()?;
        let demand = network
            .demand_nodes()
            .into_iter()
            .map(lookup)
            .collect::<Result<Vec<_>, _>>()?;
        for (port, s) in &supply {
            if let Some((time, value)) = s.times.iter().zip(&s.values).find(|(_, &v)| !(v > 0.0)) {
                return Err(ScenarioError::NonPositivePressure {
                    port: port.clone(),
                    value: *value,
                    time: *time,
                });
            }
        }
        debug_assert!(supply.iter().all(|(p, _)| network.port_kind(p) == Some(PortKind::Supply)));
        Ok(BoundScenario::from_parts(self.horizon, self.dt, supply, demand))
    }
}

/// Scenario laid out in model port order. As an [`InputSignal`] it yields
/// the deviation `u(t) = (s(t) − s̄, d(t) − d̄)` from the `t = 0` values.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundScenario {
    pub horizon: f64,
    pub dt: f64,
    supply: Vec<(String, TimeSeries)>,
    demand: Vec<(String, TimeSeries)>,
    steady: DVector<f64>,
}

impl BoundScenario {
    pub fn from_parts(
        horizon: f64,
        dt: f64,
        supply: Vec<(String, TimeSeries)>,
        demand: Vec<(String, TimeSeries)>,
    ) -> Self {
        let steady = DVector::from_iterator(
            supply.len() + demand.len(),
            supply.iter().chain(demand.iter()).map(|(_, s)| s.initial()),
        );
        BoundScenario {
            horizon,
            dt,
            supply,
            demand,
            steady,
        }
    }

    pub fn supply_count(&self) -> usize {
        self.supply.len()
    }

    pub fn port_ids(&self) -> impl Iterator<Item = &str> {
        self.supply.iter().chain(self.demand.iter()).map(|(p, _)| p.as_str())
    }

    /// Steady inputs `ū = (s̄, d̄)`.
    pub fn steady_input(&self) -> &DVector<f64> {
        &self.steady
    }

    pub fn steady_supply(&self) -> DVector<f64> {
        self.steady.rows(0, self.supply.len()).into_owned()
    }

    pub fn steady_demand(&self) -> DVector<f64> {
        self.steady.rows(self.supply.len(), self.demand.len()).into_owned()
    }

    pub fn absolute_at(&self, t: f64) -> DVector<f64> {
        DVector::from_iterator(
            self.steady.len(),
            self.supply.iter().chain(self.demand.iter()).map(|(_, s)| s.eval(t)),
        )
    }

    /// Hex SHA-256 over horizon, step and all samples.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.horizon.to_le_bytes());
        h.update(self.dt.to_le_bytes());
        for (port, s) in self.supply.iter().chain(self.demand.iter()) {
            h.update(port.as_bytes());
            for (t, v) in s.times.iter().zip(&s.values) {
                h.update(t.to_le_bytes());
                h.update(v.to_le_bytes());
            }
        }
        let digest = h.finalize();
        let mut out = String::with_capacity(64);
        for b in digest.iter() {
            let _ = core::fmt::Write::write_fmt(&mut out, format_args!("{b:02x}"));
        }
        out
    }
}

impl InputSignal for BoundScenario {
    fn dim(&self) -> usize {
        self.steady.len()
    }
    fn at(&self, t: f64) -> DVector<f64> {
        self.absolute_at(t) - &self.steady
    }
}
