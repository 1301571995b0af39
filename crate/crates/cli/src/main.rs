//! `flapwing`: evolve, express, simulate, analyze and manufacture wings.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum Failure {
    /// exit 1
    Internal(String),
    /// exit 2
    Usage(String),
    /// exit 3
    Io(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Internal(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Internal(m) | Failure::Usage(m) | Failure::Io(m) => m,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "flapwing", version, about = "Evolve, simulate and analyze flexible flapping wings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// JSON config file; missing keys keep their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dotted-key override, e.g. `--set sim.dt=5e-5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
}

#[derive(Debug, Args)]
pub struct FlapArgs {
    /// Flapping frequency (Hz).
    #[arg(long, default_value_t = 5.0)]
    pub frequency: f64,
    /// Stroke amplitude (degrees).
    #[arg(long, default_value_t = 40.0, allow_hyphen_values = true)]
    pub amplitude: f64,
    /// Simulated time per evaluation (s).
    #[arg(long, default_value_t = 2.0)]
    pub duration: f64,
    /// Integration step (s).
    #[arg(long, default_value_t = 1e-4)]
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CostArg {
    Power,
    Torque,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the multi-objective search and write a run directory.
    Evolve {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Population size.
        #[arg(long, default_value_t = 100)]
        pop: usize,
        /// Number of generations.
        #[arg(long, default_value_t = 200)]
        gens: usize,
        /// Random seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Crossover probability.
        #[arg(long, default_value_t = 0.2)]
        p_crossover: f64,
        /// Mutation probability.
        #[arg(long, default_value_t = 0.8)]
        p_mutation: f64,
        /// Drive-cost objective.
        #[arg(long, value_enum, default_value_t = CostArg::Power)]
        drive_cost: CostArg,
        /// Lower lift clamp (mN).
        #[arg(long, default_value_t = 10.0)]
        lift_min_mn: f64,
        /// Upper lift clamp (mN).
        #[arg(long, default_value_t = 200.0)]
        lift_max_mn: f64,
        /// Write a population snapshot every N generations.
        #[arg(long, default_value_t = 10)]
        snapshot_interval: usize,
        #[command(flatten)]
        flap: FlapArgs,
        /// Run directory [default: $FLAPWING_OUT/run-seed<SEED>, else ./run-seed<SEED>].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the merged configuration as JSON and exit without running.
        #[arg(long)]
        print_config: bool,
    },
    /// Simulate one design (genotype or phenotype JSON) and print its metrics.
    Simulate {
        design: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        flap: FlapArgs,
        /// Write the time series to this CSV.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Express a genotype into a phenotype file and print a summary.
    Express {
        genotype: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Phenotype output [default: <GENOTYPE stem>.wing.json beside the input].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Blade-count maximum for C_MS.
        #[arg(long)]
        bmax: Option<usize>,
        /// Span maximum for C_MS (mm).
        #[arg(long)]
        smax: Option<f64>,
    },
    /// Fit the reality gap of a transfers CSV and write plot files.
    Analyze {
        transfers: PathBuf,
        /// Override L_max (gf).
        #[arg(long)]
        lmax: Option<f64>,
        /// Override B_max.
        #[arg(long)]
        bmax: Option<usize>,
        /// Override S_max (mm).
        #[arg(long)]
        smax: Option<f64>,
        /// Highest polynomial degree tried.
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
        /// Plot directory [default: $FLAPWING_OUT/analysis, else ./analysis].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the rib-by-rib build sheet for a feasible design.
    Manufacture {
        design: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Document output [default: <DESIGN stem>.manufacture.json beside the input].
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// True when `id` was given on the command line rather than defaulted.
pub fn given(m: &ArgMatches, id: &str) -> bool {
    matches!(m.value_source(id), Some(ValueSource::CommandLine | ValueSource::EnvVariable))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let matches = Cli::command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let sub = matches.subcommand().map(|(_, m)| m).expect("subcommand required");
    match commands::run(cli.command, sub) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
