//! Experiment driver: parameter grids, replicated runs, persistence.
//!
//! Every run of a sweep is seeded by [`derive_seed`] from the master seed and
//! the run's coordinates, so results do not depend on scheduling. A run with
//! seed `s` samples its initial state with `NetState::sample_initial` from
//! `ChaCha8Rng::seed_from_u64(s)` and continues with the same generator.

mod gstar;
mod scaling;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{run_until, Model, ModelVariant, RunConfig, RunSummary};
use crate::error::{Error, Result};
use crate::graph::NetState;
use crate::stats::median;

pub use gstar::{make_gstar, split_experiment, split_experiment_with, GStarState, SplitReport, SplitRun};
pub use scaling::{scaling_exponent, ScalingFit, ScalingPoint, BOOTSTRAP_RESAMPLES};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub n_list: Vec<usize>,
    pub beta_list: Vec<f64>,
    pub variants: Vec<ModelVariant>,
    /// Replications per cell.
    pub seeds: usize,
    pub master_seed: u64,
    /// Strong minority threshold, recorded as a first-passage time.
    pub eps: f64,
    /// Weak minority threshold.
    pub eps_prime: f64,
    /// Step cap as a multiple of `n^3`.
    pub max_steps_per_n3: f64,
    /// Absolute step cap; overrides `max_steps_per_n3` when set.
    pub max_steps: Option<u64>,
    /// Stop runs at the first time the minority is at most this fraction.
    pub halt_at_tau_star: Option<f64>,
    /// Trajectory stride in steps; `None` uses `n^2 / 100`, 0 disables.
    pub trajectory_stride: Option<u64>,
    pub monitor_stride: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub write_trajectories: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n_list: vec![100],
            beta_list: vec![1.0],
            variants: vec![ModelVariant::random_direct()],
            seeds: 10,
            master_seed: 0,
            eps: 0.05,
            eps_prime: 0.1,
            max_steps_per_n3: 20.0,
            max_steps: None,
            halt_at_tau_star: None,
            trajectory_stride: None,
            monitor_stride: None,
            output_dir: None,
            write_trajectories: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::invalid("n_list", "must be nonempty"));
        }
        if self.beta_list.is_empty() {
            return Err(Error::invalid("beta_list", "must be nonempty"));
        }
        if self.variants.is_empty() {
            return Err(Error::invalid("variants", "must be nonempty"));
        }
        if self.seeds == 0 {
            return Err(Error::invalid("seeds", "must be at least 1"));
        }
        if !(0.0 < self.eps && self.eps < self.eps_prime && self.eps_prime < 0.5) {
            return Err(Error::invalid("eps_prime", "need 0 < eps < eps_prime < 1/2"));
        }
        if !(self.max_steps_per_n3.is_finite() && self.max_steps_per_n3 > 0.0) {
            return Err(Error::invalid("max_steps_per_n3", "must be positive"));
        }
        for &n in &self.n_list {
            if n < 2 {
                return Err(Error::invalid("n_list", format!("n must be at least 2, got {n}")));
            }
            for &beta in &self.beta_list {
                Model::new(ModelVariant::random_direct(), beta, n)?;
            }
        }
        self.run_config(self.n_list[0]).validate()
    }

    /// Per-run configuration for `n`-vertex cells.
    pub fn run_config(&self, n: usize) -> RunConfig {
        let mut rc = RunConfig::for_n(n);
        let n3 = (n as f64).powi(3);
        rc.max_steps = self.max_steps.unwrap_or((self.max_steps_per_n3 * n3).ceil() as u64);
        rc.tau_star_eps = vec![self.eps, self.eps_prime];
        rc.halt_at_tau_star = self.halt_at_tau_star;
        if let Some(s) = self.trajectory_stride {
            rc.trajectory_stride = s;
        }
        if let Some(s) = self.monitor_stride {
            rc.monitor_stride = s;
        }
        rc
    }

    fn variant_index(v: ModelVariant) -> u64 {
        ModelVariant::ALL.iter().position(|&w| w == v).expect("variant listed in ALL") as u64
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one run: SplitMix64 folded over the master seed, `n`, the bits
/// of `beta`, the variant's index in [`ModelVariant::ALL`], and the
/// replication index.
pub fn derive_seed(master: u64, n: usize, beta: f64, variant_index: u64, seed_index: u64) -> u64 {
    [n as u64, beta.to_bits(), variant_index, seed_index]
        .iter()
        .fold(splitmix64(master), |h, &x| splitmix64(h ^ x))
}

/// One cell of the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellKey {
    pub n: usize,
    pub beta: f64,
    pub variant: ModelVariant,
}

impl CellKey {
    fn sort_key(&self) -> (usize, u64, u64) {
        (self.n, self.beta.to_bits(), SweepConfig::variant_index(self.variant))
    }

    /// File-name stem, e.g. `n100_b0.002_rewire-random-direct`.
    pub fn stem(&self) -> String {
        format!("n{}_b{}_{}-{}", self.n, self.beta, self.variant.rewiring, self.variant.clock)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub key: CellKey,
    pub runs: usize,
    pub uncensored: usize,
    pub censored: usize,
    pub median_tau: f64,
    pub median_minority_at_stop: f64,
    pub frac_tau_star_eps: f64,
    pub frac_tau_star_eps_prime: f64,
}

impl CellSummary {
    pub const CSV_HEADER: &'static str = "n,beta,variant,runs,uncensored,censored,median_tau,median_minority_at_stop,frac_tau_star_eps,frac_tau_star_eps_prime";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.key.n,
            self.key.beta,
            self.key.variant,
            self.runs,
            self.uncensored,
            self.censored,
            self.median_tau,
            self.median_minority_at_stop,
            self.frac_tau_star_eps,
            self.frac_tau_star_eps_prime
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Sorted by cell (n, beta, variant) then replication index.
    pub runs: Vec<RunSummary>,
    pub cells: Vec<CellSummary>,
    /// Per-cell I/O failures; they do not abort the sweep.
    pub errors: Vec<String>,
}

impl SweepResult {
    pub fn cell_runs(&self, n: usize, beta: f64, variant: ModelVariant) -> impl Iterator<Item = &RunSummary> {
        self.runs
            .iter()
            .filter(move |r| r.n == n && r.beta == beta && r.variant == variant)
    }
}

/// One run with an explicit seed, as performed inside a sweep.
pub fn seeded_run(n: usize, beta: f64, variant: ModelVariant, seed: u64, config: &RunConfig) -> Result<RunSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = NetState::sample_initial(n, &mut rng)?;
    let model = Model::new(variant, beta, n)?;
    let mut summary = run_until(&mut state, &model, config, &mut rng)?;
    summary.seed = Some(seed);
    Ok(summary)
}

pub fn sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let mut jobs = Vec::new();
    for &n in &config.n_list {
        for &beta in &config.beta_list {
            for &variant in &config.variants {
                let key = CellKey { n, beta, variant };
                for i in 0..config.seeds as u64 {
                    jobs.push((key, i));
                }
            }
        }
    }
    jobs.sort_by_key(|(k, i)| (k.sort_key(), *i));
    jobs.dedup_by_key(|(k, i)| (k.sort_key(), *i));

    let runs: Vec<RunSummary> = jobs
        .par_iter()
        .map(|&(k, i)| {
            let seed = derive_seed(
                config.master_seed,
                k.n,
                k.beta,
                SweepConfig::variant_index(k.variant),
                i,
            );
            seeded_run(k.n, k.beta, k.variant, seed, &config.run_config(k.n))
        })
        .collect::<Result<_>>()?;

    let mut result = SweepResult {
        cells: summarize(&runs, config.eps, config.eps_prime),
        runs,
        errors: Vec::new(),
    };
    if let Some(dir) = &config.output_dir {
        result.errors = write_outputs(dir, &result, &jobs, config.write_trajectories)?;
    }
    Ok(result)
}

/// Per-cell statistics, in first-appearance order of `runs`.
pub fn summarize(runs: &[RunSummary], eps: f64, eps_prime: f64) -> Vec<CellSummary> {
    let mut keys: Vec<CellKey> = Vec::new();
    for r in runs {
        let k = CellKey {
            n: r.n,
            beta: r.beta,
            variant: r.variant,
        };
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|key| {
            let rs: Vec<&RunSummary> = runs
                .iter()
                .filter(|r| r.n == key.n && r.beta == key.beta && r.variant == key.variant)
                .collect();
            let taus: Vec<f64> = rs.iter().map(|r| r.tau as f64).collect();
            let mins: Vec<f64> = rs.iter().map(|r| r.minority_at_stop).collect();
            let frac = |eps: f64| rs.iter().filter(|r| r.tau_star(eps).is_some()).count() as f64 / rs.len() as f64;
            let censored = rs.iter().filter(|r| r.censored).count();
            CellSummary {
                key,
                runs: rs.len(),
                uncensored: rs.len() - censored,
                censored,
                median_tau: median(&taus),
                median_minority_at_stop: median(&mins),
                frac_tau_star_eps: frac(eps),
                frac_tau_star_eps_prime: frac(eps_prime),
            }
        })
        .collect()
}

/// Writes `runs.jsonl`, `summary.csv` and optionally `trajectories/*.csv`.
/// Returns the trajectory files that could not be written.
fn write_outputs(dir: &Path, result: &SweepResult, jobs: &[(CellKey, u64)], trajectories: bool) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut runs = BufWriter::new(fs::File::create(dir.join("runs.jsonl"))?);
    for r in &result.runs {
        writeln!(runs, "{}", r.to_json_line()?)?;
    }
    runs.flush()?;

    let mut summary = BufWriter::new(fs::File::create(dir.join("summary.csv"))?);
    writeln!(summary, "{}", CellSummary::CSV_HEADER)?;
    for c in &result.cells {
        writeln!(summary, "{}", c.csv_row())?;
    }
    summary.flush()?;

    let mut errors = Vec::new();
    if trajectories {
        let tdir = dir.join("trajectories");
        fs::create_dir_all(&tdir)?;
        for ((key, i), run) in jobs.iter().zip(&result.runs) {
            let path = tdir.join(format!("{}_s{i}.csv", key.stem()));
            let written = fs::File::create(&path)
                .map_err(Error::from)
                .and_then(|f| run.write_trajectory_csv(BufWriter::new(f)));
            if let Err(e) = written {
                errors.push(format!("{}: {e}", path.display()));
            }
        }
    }
    Ok(errors)
}
