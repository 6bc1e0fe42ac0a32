//! Pipe network topology, port sets and graph-theoretic preprocessing.

mod profile;
mod scenario;

pub use profile::{expand_height_profile, ProfileError};
pub use scenario::{BoundScenario, Scenario, ScenarioError, TimeSeries};

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("pipe {pipe}: length must be positive")]
    NonPositiveLength { pipe: String },
    #[error("pipe {pipe}: diameter must be positive")]
    NonPositiveDiameter { pipe: String },
    #[error("pipe {pipe}: roughness must be non-negative")]
    NegativeRoughness { pipe: String },
    #[error("pipe {pipe}: non-finite geometry value")]
    NonFinite { pipe: String },
    #[error("pipe {pipe}: from and to node are both {node}")]
    SelfLoop { pipe: String, node: String },
    #[error("duplicate pipe id {pipe}")]
    DuplicatePipe { pipe: String },
    #[error("network has no pipes")]
    NoPipes,
    #[error("network has no supply node")]
    NoSupply,
    #[error("node {node} is declared both supply and demand")]
    OverlappingPorts { node: String },
    #[error("node {node} declared twice as a port")]
    DuplicatePort { node: String },
    #[error("network is disconnected: node {node} is unreachable from {root}")]
    Disconnected { node: String, root: String },
}

/// A single pipe. `height_delta` is the to-node elevation minus the from-node
/// elevation.
#[derive(Debug, Clone, PartialEq)]
pub struct PipeSpec {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length: f64,
    pub diameter: f64,
    pub height_delta: f64,
    pub roughness: f64,
}

impl PipeSpec {
    pub fn check(&self) -> Result<(), NetworkError> {
        let pipe = || self.id.clone();
        if ![self.length, self.diameter, self.height_delta, self.roughness]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(NetworkError::NonFinite { pipe: pipe() });
        }
        if !(self.length > 0.0) {
            return Err(NetworkError::NonPositiveLength { pipe: pipe() });
        }
        if !(self.diameter > 0.0) {
            return Err(NetworkError::NonPositiveDiameter { pipe: pipe() });
        }
        if self.roughness < 0.0 {
            return Err(NetworkError::NegativeRoughness { pipe: pipe() });
        }
        if self.from == self.to {
            return Err(NetworkError::SelfLoop {
                pipe: pipe(),
                node: self.from.clone(),
            });
        }
        Ok(())
    }

    pub fn cross_section(&self) -> f64 {
        core::f64::consts::PI * self.diameter * self.diameter / 4.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortKind {
    Supply,
    Demand,
}

/// Pipe network with pressure-prescribed supply nodes and flux-prescribed
/// demand nodes. Nodes are ordered by first appearance: pipe endpoints in
/// declaration order, then port declarations.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    nodes: Vec<String>,
    pipes: Vec<PipeSpec>,
    supply: Vec<String>,
    demand: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl Network {
    /// Builds and fully validates a network.
    pub fn new(pipes: Vec<PipeSpec>, supply: Vec<String>, demand: Vec<String>) -> Result<Self, NetworkError> {
        let net = Self::new_unchecked(pipes, supply, demand)?;
        if let Some((node, root)) = net.unreachable_node() {
            return Err(NetworkError::Disconnected { node, root });
        }
        Ok(net)
    }

    /// Builds a network checking per-pipe and port invariants only; the graph
    /// may be disconnected. Use [`validate`] for the full report.
    pub fn new_unchecked(pipes: Vec<PipeSpec>, supply: Vec<String>, demand: Vec<String>) -> Result<Self, NetworkError> {
        if pipes.is_empty() {
            return Err(NetworkError::NoPipes);
        }
        let mut seen = BTreeMap::new();
        for p in &pipes {
            p.check()?;
            if seen.insert(p.id.clone(), ()).is_some() {
                return Err(NetworkError::DuplicatePipe { pipe: p.id.clone() });
            }
        }
        if supply.is_empty() {
            return Err(NetworkError::NoSupply);
        }
        let mut ports = BTreeMap::new();
        for (node, kind) in supply
            .iter()
            .map(|n| (n, PortKind::Supply))
            .chain(demand.iter().map(|n| (n, PortKind::Demand)))
        {
            match ports.insert(node.clone(), kind) {
                Some(prev) if prev != kind => return Err(NetworkError::OverlappingPorts { node: node.clone() }),
                Some(_) => return Err(NetworkError::DuplicatePort { node: node.clone() }),
                None => {}
            }
        }
        let mut nodes = Vec::new();
        let mut index = BTreeMap::new();
        let names = pipes
            .iter()
            .flat_map(|p| [&p.from, &p.to])
            .chain(supply.iter())
            .chain(demand.iter());
        for name in names {
            if !index.contains_key(name) {
                index.insert(name.clone(), nodes.len());
                nodes.push(name.clone());
            }
        }
        Ok(Network {
            nodes,
            pipes,
            supply,
            demand,
            index,
        })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }
    pub fn pipes(&self) -> &[PipeSpec] {
        &self.pipes
    }
    /// Supply ports in declaration order.
    pub fn supply_ports(&self) -> &[String] {
        &self.supply
    }
    /// Demand ports in declaration order.
    pub fn demand_ports(&self) -> &[String] {
        &self.demand
    }
    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn port_kind(&self, node: &str) -> Option<PortKind> {
        if self.supply.iter().any(|s| s == node) {
            Some(PortKind::Supply)
        } else if self.demand.iter().any(|d| d == node) {
            Some(PortKind::Demand)
        } else {
            None
        }
    }

    pub fn is_supply(&self, node: usize) -> bool {
        self.port_kind(&self.nodes[node]) == Some(PortKind::Supply)
    }

    /// Supply node indices in node order.
    pub fn supply_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.is_supply(i)).collect()
    }

    /// Non-supply node indices in node order.
    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| !self.is_supply(i)).collect()
    }

    /// Demand node indices in node order.
    pub fn demand_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| self.port_kind(&self.nodes[i]) == Some(PortKind::Demand))
            .collect()
    }

    pub(crate) fn pipe_endpoints(&self, k: usize) -> (usize, usize) {
        let p = &self.pipes[k];
        (self.index[&p.from], self.index[&p.to])
    }

    /// Undirected adjacency: per node, the list of `(pipe, neighbour)`.
    pub(crate) fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for k in 0..self.pipes.len() {
            let (i, j) = self.pipe_endpoints(k);
            adj[i].push((k, j));
            adj[j].push((k, i));
        }
        adj
    }

    fn unreachable_node(&self) -> Option<(String, String)> {
        let adj = self.adjacency();
        let mut visited = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([0usize]);
        visited[0] = true;
        while let Some(i) = queue.pop_front() {
            for &(_, j) in &adj[i] {
                if !visited[j] {
                    visited[j] = true;
                    queue.push_back(j);
                }
            }
        }
        visited
            .iter()
            .position(|v| !v)
            .map(|i| (self.nodes[i].clone(), self.nodes[0].clone()))
    }

    /// Replaces pipes that have a height profile by their virtual pipe
    /// sequence, keeping declaration order.
    pub fn expand_profiles(&self, profiles: &BTreeMap<String, Vec<(f64, f64)>>) -> Result<Network, ProfileError> {
        let mut pipes = Vec::with_capacity(self.pipes.len());
        for pipe in &self.pipes {
            match profiles.get(&pipe.id) {
                Some(profile) => pipes.extend(expand_height_profile(pipe, profile)?),
                None => pipes.push(pipe.clone()),
            }
        }
        for id in profiles.keys() {
            if !self.pipes.iter().any(|p| &p.id == id) {
                return Err(ProfileError::UnknownPipe { pipe: id.clone() });
            }
        }
        Network::new(pipes, self.supply.clone(), self.demand.clone()).map_err(ProfileError::Network)
    }
}

/// One entry of a [`Diagnostics`] report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Structural report on a network.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub connected: bool,
    pub is_tree: bool,
    pub node_count: usize,
    pub pipe_count: usize,
    pub supply_count: usize,
    pub demand_count: usize,
    pub checks: Vec<Check>,
}

impl Diagnostics {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Connectivity, tree/cycle classification and port bookkeeping.
pub fn validate(network: &Network) -> Diagnostics {
    let mut checks = Vec::new();
    let disconnected = network.unreachable_node();
    let connected = disconnected.is_none();
    checks.push(Check {
        name: "connectivity",
        passed: connected,
        detail: match &disconnected {
            None => "connected".into(),
            Some((node, root)) => format!("disconnected: node {node} unreachable from {root}"),
        },
    });

    // a connected graph is a tree iff it has n - 1 edges; otherwise look for a
    // cycle directly so that the flag is meaningful per component
    let n = network.nodes.len();
    let m = network.pipes.len();
    let is_tree = connected && m + 1 == n && !has_cycle(network);
    checks.push(Check {
        name: "topology",
        passed: true,
        detail: if is_tree {
            "tree".into()
        } else if has_cycle(network) {
            "cycle detected".into()
        } else {
            "forest".into()
        },
    });

    let pipes_ok = network.pipes.iter().try_for_each(PipeSpec::check);
    checks.push(Check {
        name: "pipes",
        passed: pipes_ok.is_ok(),
        detail: match pipes_ok {
            Ok(()) => format!("{m} pipes"),
            Err(e) => format!("{e}"),
        },
    });
    let overlap = network.supply.iter().find(|s| network.demand.contains(s));
    checks.push(Check {
        name: "ports",
        passed: !network.supply.is_empty() && overlap.is_none(),
        detail: match overlap {
            Some(node) => format!("node {node} is declared both supply and demand"),
            None if network.supply.is_empty() => "no supply node".into(),
            None => format!("{} supply, {} demand", network.supply.len(), network.demand.len()),
        },
    });

    Diagnostics {
        connected,
        is_tree,
        node_count: n,
        pipe_count: m,
        supply_count: network.supply.len(),
        demand_count: network.demand.len(),
        checks,
    }
}

fn has_cycle(network: &Network) -> bool {
    // union-find over undirected edges; parallel pipes count as a cycle
    let mut parent: Vec<usize> = (0..network.nodes.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for k in 0..network.pipes.len() {
        let (i, j) = network.pipe_endpoints(k);
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri == rj {
            return true;
        }
        parent[ri] = rj;
    }
    false
}

/// Signed node-pipe incidence split into non-supply rows (`interior`, A0)
/// and supply rows (`supply`, AS). Entries are −1 at the from-node and +1 at
/// the to-node.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceDecomposition {
    pub interior: DMatrix<f64>,
    pub supply: DMatrix<f64>,
    pub interior_nodes: Vec<usize>,
    pub supply_nodes: Vec<usize>,
}

impl IncidenceDecomposition {
    /// `[A0; AS]`.
    pub fn stacked(&self) -> DMatrix<f64> {
        let (n0, ns, m) = (self.interior.nrows(), self.supply.nrows(), self.interior.ncols());
        let mut out = DMatrix::zeros(n0 + ns, m);
        out.rows_mut(0, n0).copy_from(&self.interior);
        out.rows_mut(n0, ns).copy_from(&self.supply);
        out
    }
}

pub fn incidence(network: &Network) -> IncidenceDecomposition {
    let interior_nodes = network.interior_nodes();
    let supply_nodes = network.supply_nodes();
    let mut row_of = vec![(false, 0usize); network.nodes.len()];
    for (r, &i) in interior_nodes.iter().enumerate() {
        row_of[i] = (false, r);
    }
    for (r, &i) in supply_nodes.iter().enumerate() {
        row_of[i] = (true, r);
    }
    let m = network.pipes.len();
    let mut interior = DMatrix::zeros(interior_nodes.len(), m);
    let mut supply = DMatrix::zeros(supply_nodes.len(), m);
    for k in 0..m {
        let (from, to) = network.pipe_endpoints(k);
        for (node, sign) in [(from, -1.0), (to, 1.0)] {
            match row_of[node] {
                (false, r) => interior[(r, k)] = sign,
                (true, r) => supply[(r, k)] = sign,
            }
        }
    }
    IncidenceDecomposition {
        interior,
        supply,
        interior_nodes,
        supply_nodes,
    }
}
