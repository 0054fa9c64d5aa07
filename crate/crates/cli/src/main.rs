//! `evoter`: run, sweep, observe and probe the evolving voter model.
//!
//! Exit codes: 0 success, 1 runtime failure or failed self-test,
//! 2 invalid configuration, 3 censored run under `--require-absorption`.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
    Censored(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
            CliError::Censored(m) => write!(f, "censored: {m}"),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Config(_) => 2,
            CliError::Censored(_) => 3,
        }
    }
}

impl From<evoter::Error> for CliError {
    fn from(e: evoter::Error) -> Self {
        match e {
            evoter::Error::InvalidParameter { .. } | evoter::Error::Snapshot { .. } => CliError::Config(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn keys_help() -> String {
    let mut s = String::from("Config keys (TOML sections; override with --set section.key=value):\n");
    for (key, doc) in config::CONFIG_KEYS {
        s.push_str(&format!("  {key:<28} {doc}\n"));
    }
    s.push_str("\nExit codes: 0 ok, 1 failure, 2 invalid config, 3 censored with --require-absorption");
    s
}

#[derive(Parser, Debug)]
#[command(name = "evoter", version, about = "Evolving voter model simulator", after_help = keys_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// TOML config file.
    #[arg(short, long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override a config key, e.g. `--set model.n=200`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Shorthand for model.n.
    #[arg(long)]
    pub n: Option<String>,
    /// Shorthand for model.beta.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<String>,
    /// Shorthand for model.variant.
    #[arg(long)]
    pub variant: Option<String>,
    /// Shorthand for run.seed.
    #[arg(long)]
    pub seed: Option<String>,
    /// Shorthand for output.dir.
    #[arg(short, long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// More progress output on stderr.
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

impl Common {
    /// `--set` overrides followed by the shorthand flags.
    pub fn overrides(&self) -> Vec<String> {
        let mut out = self.set.clone();
        let quoted = |s: &str| format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""));
        if let Some(v) = &self.n {
            out.push(format!("model.n={v}"));
        }
        if let Some(v) = &self.beta {
            out.push(format!("model.beta={v}"));
        }
        if let Some(v) = &self.variant {
            out.push(format!("model.variant={}", quoted(v)));
        }
        if let Some(v) = &self.seed {
            out.push(format!("run.seed={v}"));
        }
        if let Some(v) = &self.out {
            out.push(format!("output.dir={}", quoted(&v.to_string_lossy())));
        }
        out
    }

    pub fn load(&self) -> Result<config::Config, CliError> {
        config::Config::load(self.config.as_deref(), &self.overrides())
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one chain to absorption or the step cap; prints a JSON summary.
    Run {
        #[command(flatten)]
        common: Common,
        /// Exit with code 3 if the run is censored.
        #[arg(long)]
        require_absorption: bool,
    },
    /// Run the (n, beta, variant) grid in [sweep]; writes runs.jsonl and summary.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Run one chain under the stopping-time monitor; emits a diagnostics CSV.
    Observe {
        #[command(flatten)]
        common: Common,
    },
    /// Random-walk mixing, collision and disagreement-fraction diagnostics.
    Duality {
        #[command(flatten)]
        common: Common,
    },
    /// Fast consistency checks of the simulator.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Runs per engine in the engine-equivalence KS test.
        #[arg(long, default_value_t = 500)]
        ks_runs: usize,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Print the effective configuration as TOML.
    Config {
        #[command(flatten)]
        common: Common,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            common,
            require_absorption,
        } => {
            let mut cfg = common.load()?;
            cfg.run.require_absorption |= require_absorption;
            commands::run(&cfg, common.verbose)
        }
        Command::Sweep { common } => commands::sweep(&common.load()?, common.verbose),
        Command::Observe { common } => commands::observe(&common.load()?),
        Command::Duality { common } => commands::duality(&common.load()?),
        Command::Selftest {
            seed,
            ks_runs,
            inject_fault,
        } => commands::selftest(seed, ks_runs, inject_fault),
        Command::Config { common } => {
            commands::emit(&common.load()?.to_toml())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
