//! Run configuration. Every setting can come from a command-line flag, a
//! TOML config file or the built-in defaults, in that order of precedence.
//!
//! ```toml
//! network = "nets/west.net.csv"   # relative to the config file
//! scenario = "nets/west.scn.csv"
//! model = "ode_end"
//! solver = "imex1"
//! reductor = ["pod_r", "eds_ro_l"]
//! rmax = 40
//! gain-matching = true
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use gasmor_core::solvers::DEFAULT_RTOL;
use gasmor_core::{Discretization, GravityMode, ReductorId, SolverId};
use serde::Deserialize;

use crate::error::RunError;
use crate::fixtures::{fixture, Fixture, BUILTIN_PREFIX, FIXTURES};

/// Where a network or scenario comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Builtin(&'static Fixture),
    File(PathBuf),
}

impl Source {
    pub fn parse(spec: &str, base: Option<&Path>) -> Result<Source, RunError> {
        if let Some(name) = spec.strip_prefix(BUILTIN_PREFIX) {
            return fixture(name).map(Source::Builtin).ok_or_else(|| {
                let valid: Vec<String> = FIXTURES.iter().map(|f| format!("{BUILTIN_PREFIX}{}", f.name)).collect();
                RunError::usage(format!("unknown bundled fixture '{spec}' (valid: {})", valid.join(", ")))
            });
        }
        let path = match base {
            Some(dir) if Path::new(spec).is_relative() => dir.join(spec),
            _ => PathBuf::from(spec),
        };
        Ok(Source::File(path))
    }

    pub fn label(&self) -> String {
        match self {
            Source::Builtin(f) => format!("{BUILTIN_PREFIX}{}", f.name),
            Source::File(p) => p.display().to_string(),
        }
    }
}

/// Either one id or a list, as accepted in config files.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

/// Settings as given on the command line or in a config file; unset fields
/// fall through to the next layer.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Layer {
    pub network: Option<String>,
    pub scenario: Option<String>,
    pub profile: Option<String>,
    pub model: Option<String>,
    pub solver: Option<String>,
    pub reductor: Option<OneOrMany>,
    pub gravity: Option<String>,
    pub dt: Option<f64>,
    pub rtol: Option<f64>,
    pub rmax: Option<usize>,
    pub eps_digits: Option<u32>,
    pub gain_matching: Option<bool>,
    pub jobs: Option<usize>,
    pub out: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub network: Source,
    pub scenario: Source,
    pub profile: Option<PathBuf>,
    pub model: Discretization,
    pub solver: SolverId,
    pub reductors: Vec<ReductorId>,
    pub gravity: GravityMode,
    /// Overrides the scenario's step.
    pub dt: Option<f64>,
    pub rtol: f64,
    pub r_max: usize,
    pub eps_digits: u32,
    pub gain_matching: bool,
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
    pub out: PathBuf,
}

pub const DEFAULT_NETWORK: &str = "builtin:hypothetical";
pub const DEFAULT_MODEL: Discretization = Discretization::Endpoint;
pub const DEFAULT_SOLVER: SolverId = SolverId::Imex1;
pub const DEFAULT_REDUCTOR: ReductorId = ReductorId::EdsRoL;
pub const DEFAULT_GRAVITY: GravityMode = GravityMode::Static;
pub const DEFAULT_RMAX: usize = 100;
pub const DEFAULT_EPS_DIGITS: u32 = 16;

fn parse_id<T: std::str::FromStr<Err = String>>(s: &str) -> Result<T, RunError> {
    s.parse::<T>().map_err(RunError::usage)
}

/// `all`, or a comma-separated list of reductor ids.
pub fn parse_reductors(items: &[String]) -> Result<Vec<ReductorId>, RunError> {
    let mut out = Vec::new();
    for item in items.iter().flat_map(|s| s.split(',')).map(str::trim).filter(|s| !s.is_empty()) {
        if item == "all" {
            out.extend_from_slice(ReductorId::ALL);
        } else {
            out.push(parse_id::<ReductorId>(item)?);
        }
    }
    let mut seen = Vec::new();
    out.retain(|id| {
        let fresh = !seen.contains(id);
        seen.push(*id);
        fresh
    });
    Ok(out)
}

impl Layer {
    pub fn from_file(path: &Path) -> Result<Layer, RunError> {
        let text = fs::read_to_string(path)
            .map_err(|e| RunError::usage(format!("cannot read config file {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| RunError::usage(format!("config file {}: {e}", path.display())))
    }

    /// Fills unset fields from `lower`.
    pub fn over(self, lower: Layer) -> Layer {
        Layer {
            network: self.network.or(lower.network),
            scenario: self.scenario.or(lower.scenario),
            profile: self.profile.or(lower.profile),
            model: self.model.or(lower.model),
            solver: self.solver.or(lower.solver),
            reductor: self.reductor.or(lower.reductor),
            gravity: self.gravity.or(lower.gravity),
            dt: self.dt.or(lower.dt),
            rtol: self.rtol.or(lower.rtol),
            rmax: self.rmax.or(lower.rmax),
            eps_digits: self.eps_digits.or(lower.eps_digits),
            gain_matching: self.gain_matching.or(lower.gain_matching),
            jobs: self.jobs.or(lower.jobs),
            out: self.out.or(lower.out),
        }
    }
}

/// Resolves `cli` over the optional config file (whose relative paths are
/// taken relative to its directory) over the defaults.
pub fn resolve(cli: Layer, config_file: Option<&Path>) -> Result<RunConfig, RunError> {
    let (file, base) = match config_file {
        Some(p) => (Layer::from_file(p)?, p.parent().map(Path::to_path_buf)),
        None => (Layer::default(), None),
    };
    // CLI paths are relative to the working directory, file paths to the file
    let pick = |cli: Option<String>, file: Option<String>| match (cli, file) {
        (Some(c), _) => Some((c, None)),
        (None, Some(f)) => Some((f, base.clone())),
        (None, None) => None,
    };
    let network = pick(cli.network.clone(), file.network.clone());
    let scenario = pick(cli.scenario.clone(), file.scenario.clone());
    let profile = pick(cli.profile.clone(), file.profile.clone());
    let out = pick(cli.out.clone(), file.out.clone());
    let merged = cli.over(file);

    let network = match network {
        Some((s, b)) => Source::parse(&s, b.as_deref())?,
        None => Source::parse(DEFAULT_NETWORK, None)?,
    };
    let scenario = match (scenario, &network) {
        (Some((s, b)), _) => Source::parse(&s, b.as_deref())?,
        (None, Source::Builtin(f)) => Source::Builtin(f),
        (None, Source::File(p)) => {
            return Err(RunError::usage(format!(
                "--scenario is required with network file {}",
                p.display()
            )))
        }
    };
    let profile = profile.map(|(s, b)| match b {
        Some(dir) if Path::new(&s).is_relative() => dir.join(s),
        _ => PathBuf::from(s),
    });
    let out = match out {
        Some((s, Some(dir))) if Path::new(&s).is_relative() => dir.join(s),
        Some((s, _)) => PathBuf::from(s),
        None => PathBuf::from("gasmor-out"),
    };
    let reductors = match merged.reductor {
        Some(OneOrMany::One(s)) => parse_reductors(&[s])?,
        Some(OneOrMany::Many(v)) => parse_reductors(&v)?,
        None => vec![DEFAULT_REDUCTOR],
    };
    if reductors.is_empty() {
        return Err(RunError::usage("no reductor given"));
    }
    let positive = |name: &str, v: Option<f64>| -> Result<Option<f64>, RunError> {
        match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(RunError::usage(format!("--{name} must be positive, got {x}"))),
            other => Ok(other),
        }
    };
    let rmax = merged.rmax.unwrap_or(DEFAULT_RMAX);
    if rmax == 0 {
        return Err(RunError::usage("--rmax must be at least 1"));
    }
    let eps_digits = merged.eps_digits.unwrap_or(DEFAULT_EPS_DIGITS);
    if !(1..=300).contains(&eps_digits) {
        return Err(RunError::usage(format!("--eps-digits must be in 1..=300, got {eps_digits}")));
    }
    Ok(RunConfig {
        network,
        scenario,
        profile,
        model: merged.model.as_deref().map(parse_id).transpose()?.unwrap_or(DEFAULT_MODEL),
        solver: merged.solver.as_deref().map(parse_id).transpose()?.unwrap_or(DEFAULT_SOLVER),
        reductors,
        gravity: merged.gravity.as_deref().map(parse_id).transpose()?.unwrap_or(DEFAULT_GRAVITY),
        dt: positive("dt", merged.dt)?,
        rtol: positive("rtol", merged.rtol)?.unwrap_or(DEFAULT_RTOL),
        r_max: rmax,
        eps_digits,
        gain_matching: merged.gain_matching.unwrap_or(false),
        jobs: merged.jobs.unwrap_or(0),
        out,
    })
}

impl RunConfig {
    /// The precision `ε = 10^(−digits)` of the MORscore normalization.
    pub fn eps(&self) -> f64 {
        10f64.powi(-(self.eps_digits as i32))
    }
}
