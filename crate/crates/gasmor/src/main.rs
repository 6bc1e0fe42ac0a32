use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::PossibleValuesParser;
use clap::{Args, Parser, Subcommand};
use gasmor::commands;
use gasmor::config::{resolve, Layer, OneOrMany};
use gasmor::error::RunError;
use gasmor_core::{Discretization, GravityMode, ReductorId, SolverId};

fn ids<T: Copy + 'static>(all: &'static [T], id: fn(T) -> &'static str) -> Vec<&'static str> {
    all.iter().map(|v| id(*v)).collect()
}

/// Gas network simulation and model order reduction.
#[derive(Parser)]
#[command(name = "gasmor", version, after_help = "Networks and scenarios default to the bundled fixture \
builtin:hypothetical (also available: builtin:actual).\nExit codes: 0 ok, 2 usage or input error, 3 numerical failure.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the full model: trajectory.csv, scenario.svg.
    Simulate,
    /// Train reductors at width --rmax and persist each reduced model.
    Reduce,
    /// Train, reduce at every order up to --rmax and score against the full model.
    Sweep,
    /// Rank the reports of earlier sweeps together.
    Compare {
        /// Sweep output directories (containing report.csv and summary.csv).
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
    },
    /// Check network, scenario and steady state; write model_summary.csv.
    Validate,
}

#[derive(Args)]
struct Flags {
    /// Network file (.net.csv) or builtin:<name>.
    #[arg(long, global = true, value_name = "PATH")]
    network: Option<String>,
    /// Scenario file (.scn.csv) or builtin:<name>.
    #[arg(long, global = true, value_name = "PATH")]
    scenario: Option<String>,
    /// Height profile file (.prof.csv).
    #[arg(long, global = true, value_name = "PATH")]
    profile: Option<String>,
    /// Spatial discretization [default: ode_end].
    #[arg(long, global = true, value_parser = PossibleValuesParser::new(ids(Discretization::ALL, Discretization::id)))]
    model: Option<String>,
    /// Time stepper [default: imex1].
    #[arg(long, global = true, value_parser = PossibleValuesParser::new(ids(SolverId::ALL, SolverId::id)))]
    solver: Option<String>,
    /// Reductor ids, comma separated or repeated, or `all` [default: eds_ro_l].
    #[arg(long, global = true, value_delimiter = ',', value_parser = reductor_values())]
    reductor: Vec<String>,
    /// Gravity treatment [default: static].
    #[arg(long, global = true, value_parser = PossibleValuesParser::new(ids(GravityMode::ALL, GravityMode::id)))]
    gravity: Option<String>,
    /// Output step in s [default: the scenario's].
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Relative tolerance of the adaptive solver [default: 1e-3].
    #[arg(long, global = true)]
    rtol: Option<f64>,
    /// Largest reduced order [default: 100, clipped to the state dimension].
    #[arg(long, global = true)]
    rmax: Option<usize>,
    /// Decimal digits of the MORscore precision ε = 10^-digits [default: 16].
    #[arg(long, global = true)]
    eps_digits: Option<u32>,
    /// Add the steady-state gain mismatch as feedthrough [default: off].
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "on", value_parser = ["on", "off"])]
    gain_matching: Option<String>,
    /// Worker threads [default: all cores].
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory [default: gasmor-out].
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<String>,
    /// TOML config file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
}

fn reductor_values() -> PossibleValuesParser {
    let mut v = ids(ReductorId::ALL, ReductorId::id);
    v.push("all");
    PossibleValuesParser::new(v)
}

impl Flags {
    fn layer(&self) -> Layer {
        Layer {
            network: self.network.clone(),
            scenario: self.scenario.clone(),
            profile: self.profile.clone(),
            model: self.model.clone(),
            solver: self.solver.clone(),
            reductor: (!self.reductor.is_empty()).then(|| OneOrMany::Many(self.reductor.clone())),
            gravity: self.gravity.clone(),
            dt: self.dt,
            rtol: self.rtol,
            rmax: self.rmax,
            eps_digits: self.eps_digits,
            gain_matching: self.gain_matching.as_deref().map(|v| v == "on"),
            jobs: self.jobs,
            out: self.out.clone(),
        }
    }
}

fn run(cli: Cli) -> Result<Vec<String>, RunError> {
    let cfg = resolve(cli.flags.layer(), cli.flags.config.as_deref())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| RunError::usage(format!("cannot start {} workers: {e}", cfg.jobs)))?;
    let mut warn = |msg: String| eprintln!("warning: {msg}");
    pool.install(|| match &cli.command {
        Command::Simulate => commands::simulate(&cfg),
        Command::Reduce => commands::reduce(&cfg, &mut warn),
        Command::Sweep => commands::sweep(&cfg, &mut warn),
        Command::Compare { dirs } => commands::compare_dirs(&cfg, dirs),
        Command::Validate => commands::validate_inputs(&cfg),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
