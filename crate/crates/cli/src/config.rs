use std::path::{Path, PathBuf};

use evoter::dynamics::{Clock, ModelVariant, RunConfig};
use evoter::harness::SweepConfig;
use evoter::observables::StoppingConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Every config key with a one-line description, shown by `--help`.
pub const CONFIG_KEYS: &[(&str, &str)] = &[
    ("model.n", "number of vertices [100]"),
    ("model.beta", "relabelling rate; each update relabels with probability beta/n [1.0]"),
    ("model.variant", "rewire-random|rewire-same, optionally /direct|/starred|/continuous [rewire-random/direct]"),
    ("run.seed", "master seed [0]"),
    ("run.engine", "step|counter; the counter engine supports rewire-random/direct only [step]"),
    ("run.max_steps", "absolute step cap (default: max_steps_per_n3 * n^3)"),
    ("run.max_steps_per_n3", "step cap as a multiple of n^3 [20]"),
    ("run.halt_at_tau_star", "stop once the minority fraction is at most this value"),
    ("run.trajectory_stride", "steps between trajectory rows; 0 disables (default: n^2/100)"),
    ("run.require_absorption", "exit with code 3 when a run is censored [false]"),
    ("run.snapshot", "initial state file instead of a fresh G(n, 1/2) sample"),
    ("stop.eps", "strong minority threshold [0.05]"),
    ("stop.eps_prime", "weak minority threshold [0.1]"),
    ("stop.eps2", "smallest cut side as a fraction of n [2e-6]"),
    ("stop.eps3", "cut deviation scale [3e-15]"),
    ("stop.eps4", "multiplicity scale [0.1]"),
    ("stop.eps7", "disagreement slack [8e-33]"),
    ("stop.eps14", "spectral gap floor relative to beta [4e-6]"),
    ("stop.c1", "balancedness constant [100]"),
    ("stop.c2", "weak maximum-degree factor [2]"),
    ("stop.delta", "[1e-19]"),
    ("stop.c", "horizon multiplier of the duality tests [10]"),
    ("stop.cut_sample_count", "random cuts per sampled cut estimate [200]"),
    ("monitor.stride", "steps between monitor rows (default: n^2/50)"),
    ("monitor.max_steps", "observation horizon (default: 2 n^2)"),
    ("sweep.n_list", "vertex counts [[100]]"),
    ("sweep.beta_list", "relabelling rates [[1.0]]"),
    ("sweep.variants", "model variants [[\"rewire-random/direct\"]]"),
    ("sweep.seeds", "replications per cell [10]"),
    ("duality.tv_c", "TV is evaluated at times c/beta for each c [[1, 4, 16, 64]]"),
    ("duality.tv_mode", "exact|empirical [exact]"),
    ("duality.empirical_walkers", "walkers per empirical TV estimate [100000]"),
    ("duality.collision_walkers", "walkers in the collision audit [20]"),
    ("duality.collision_horizon", "collision horizon (default: 10 stop.c / beta)"),
    ("duality.disagreement", "run the disagreement-fraction test [true]"),
    ("output.dir", "directory for output files (default: stdout only)"),
    ("output.write_trajectories", "write per-run trajectory CSVs in sweeps [false]"),
];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub model: ModelSection,
    pub run: RunSection,
    pub stop: StoppingConfig,
    pub monitor: MonitorSection,
    pub sweep: SweepSection,
    pub duality: DualitySection,
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub n: usize,
    pub beta: f64,
    pub variant: ModelVariant,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            n: 100,
            beta: 1.0,
            variant: ModelVariant::random_direct(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    #[default]
    Step,
    Counter,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub seed: u64,
    pub engine: Engine,
    pub max_steps: Option<u64>,
    pub max_steps_per_n3: f64,
    pub halt_at_tau_star: Option<f64>,
    pub trajectory_stride: Option<u64>,
    pub require_absorption: bool,
    pub snapshot: Option<PathBuf>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: 0,
            engine: Engine::Step,
            max_steps: None,
            max_steps_per_n3: 20.0,
            halt_at_tau_star: None,
            trajectory_stride: None,
            require_absorption: false,
            snapshot: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonitorSection {
    pub stride: Option<u64>,
    pub max_steps: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub n_list: Vec<usize>,
    pub beta_list: Vec<f64>,
    pub variants: Vec<ModelVariant>,
    pub seeds: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            n_list: vec![100],
            beta_list: vec![1.0],
            variants: vec![ModelVariant::random_direct()],
            seeds: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TvModeName {
    #[default]
    Exact,
    Empirical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DualitySection {
    pub tv_c: Vec<f64>,
    pub tv_mode: TvModeName,
    pub empirical_walkers: usize,
    pub collision_walkers: usize,
    pub collision_horizon: Option<f64>,
    pub disagreement: bool,
}

impl Default for DualitySection {
    fn default() -> Self {
        DualitySection {
            tv_c: vec![1.0, 4.0, 16.0, 64.0],
            tv_mode: TvModeName::Exact,
            empirical_walkers: 100_000,
            collision_walkers: 20,
            collision_horizon: None,
            disagreement: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub write_trajectories: bool,
}

/// Parses an override value as a TOML value, falling back to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key v present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{spec}` is not of the form key=value")))?;
    let key = key.trim();
    let path: Vec<&str> = key.split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("malformed key `{key}`")));
    }
    let mut node = table;
    for part in &path[..path.len() - 1] {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("`{part}` in `{key}` is not a section")))?;
    }
    node.insert(path[path.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

impl Config {
    /// Reads `path` (if any), applies `key=value` overrides in order, and
    /// validates the result.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Config, CliError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let config: Config = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string().trim().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let prefixed = |section: &str, e: evoter::Error| match e {
            evoter::Error::InvalidParameter { name, reason } => {
                CliError::Config(format!("invalid `{section}.{name}`: {reason}"))
            }
            other => CliError::Config(other.to_string()),
        };
        if self.model.n < 2 {
            return Err(CliError::Config(format!("invalid `model.n`: need n >= 2, got {}", self.model.n)));
        }
        evoter::dynamics::Model::new(self.model.variant, self.model.beta, self.model.n)
            .map_err(|e| prefixed("model", e))?;
        self.stop.validate().map_err(|e| prefixed("stop", e))?;
        if !(self.run.max_steps_per_n3.is_finite() && self.run.max_steps_per_n3 > 0.0) {
            return Err(CliError::Config("invalid `run.max_steps_per_n3`: must be positive".into()));
        }
        if self.monitor.stride == Some(0) {
            return Err(CliError::Config("invalid `monitor.stride`: must be positive".into()));
        }
        if self.run.engine == Engine::Counter && self.model.variant != ModelVariant::random_direct() {
            return Err(CliError::Config(
                "invalid `run.engine`: the counter engine supports rewire-random/direct only".into(),
            ));
        }
        self.run_config().validate().map_err(|e| prefixed("run", e))?;
        Ok(())
    }

    pub fn run_config(&self) -> RunConfig {
        let n = self.model.n;
        let mut rc = RunConfig::for_n(n);
        rc.max_steps = self
            .run
            .max_steps
            .unwrap_or((self.run.max_steps_per_n3 * (n as f64).powi(3)).ceil() as u64);
        rc.tau_star_eps = vec![self.stop.eps, self.stop.eps_prime];
        rc.halt_at_tau_star = self.run.halt_at_tau_star;
        if let Some(s) = self.run.trajectory_stride {
            rc.trajectory_stride = s;
        }
        rc
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            n_list: self.sweep.n_list.clone(),
            beta_list: self.sweep.beta_list.clone(),
            variants: self.sweep.variants.clone(),
            seeds: self.sweep.seeds,
            master_seed: self.run.seed,
            eps: self.stop.eps,
            eps_prime: self.stop.eps_prime,
            max_steps_per_n3: self.run.max_steps_per_n3,
            max_steps: self.run.max_steps,
            halt_at_tau_star: self.run.halt_at_tau_star,
            trajectory_stride: self.run.trajectory_stride,
            monitor_stride: self.monitor.stride,
            output_dir: self.output.dir.clone(),
            write_trajectories: self.output.write_trajectories,
        }
    }

    /// The model variant with its clock forced to starred unless already
    /// starred or continuous.
    pub fn starred_variant(&self) -> ModelVariant {
        match self.model.variant.clock {
            Clock::Direct => ModelVariant::new(self.model.variant.rewiring, Clock::Starred),
            _ => self.model.variant,
        }
    }
}
