use std::fs;
use std::io::Write;

use evoter::duality::{collision_stats, disagreement_fraction_test, simulate_walks, tv_to_uniform, TvMode};
use evoter::dynamics::{counter_engine_run, run_until, run_until_monitored, Model, RunSummary};
use evoter::harness;
use evoter::observables::{diagnostics, spectral_gap, Diagnostics, Monitor};
use evoter::selftest::{run_selftest, SelftestOptions};
use evoter::{NetState, VertexId};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{Config, Engine, TvModeName};
use crate::CliError;

fn initial_state(cfg: &Config, rng: &mut ChaCha8Rng) -> Result<NetState, CliError> {
    match &cfg.run.snapshot {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read run.snapshot {}: {e}", path.display())))?;
            let state = NetState::from_snapshot(&text)?;
            if state.n() != cfg.model.n {
                return Err(CliError::Config(format!(
                    "run.snapshot has n = {} but model.n = {}",
                    state.n(),
                    cfg.model.n
                )));
            }
            Ok(state)
        }
        None => Ok(NetState::sample_initial(cfg.model.n, rng)?),
    }
}

/// Writes to stdout; a closed pipe is not an error.
pub fn emit(text: &str) -> Result<(), CliError> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn output_dir(cfg: &Config) -> Result<Option<&std::path::Path>, CliError> {
    match &cfg.output.dir {
        Some(d) => {
            fs::create_dir_all(d)?;
            Ok(Some(d.as_path()))
        }
        None => Ok(None),
    }
}

pub fn run(cfg: &Config, verbose: u8) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
    let mut state = initial_state(cfg, &mut rng)?;
    let rc = cfg.run_config();
    let (mut summary, counters): (RunSummary, _) = match cfg.run.engine {
        Engine::Step => {
            let model = Model::new(cfg.model.variant, cfg.model.beta, cfg.model.n)?;
            (run_until(&mut state, &model, &rc, &mut rng)?, None)
        }
        Engine::Counter => {
            let (s, c) = counter_engine_run(&mut state, cfg.model.beta, &rc, &mut rng)?;
            (s, Some(c))
        }
    };
    summary.seed = Some(cfg.run.seed);
    if verbose > 0 {
        eprintln!("stopped after {} steps: {:?}", summary.tau, summary.stop);
    }
    let mut value = serde_json::to_value(&summary).map_err(|e| CliError::Runtime(e.to_string()))?;
    if let Some(c) = counters {
        value["counter_stats"] = serde_json::to_value(c).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Runtime(e.to_string()))?;
    match output_dir(cfg)? {
        Some(dir) => {
            fs::write(dir.join("run.json"), format!("{text}\n"))?;
            summary.write_trajectory_csv(fs::File::create(dir.join("trajectory.csv"))?)?;
            fs::write(dir.join("final.snap"), state.to_snapshot())?;
        }
        None => emit(&format!("{text}\n"))?,
    }
    if cfg.run.require_absorption && summary.censored {
        return Err(CliError::Censored(format!("no absorption within {} steps", summary.tau)));
    }
    Ok(())
}

pub fn sweep(cfg: &Config, verbose: u8) -> Result<(), CliError> {
    let sc = cfg.sweep_config();
    if verbose > 0 {
        eprintln!(
            "sweeping {} cells x {} seeds",
            sc.n_list.len() * sc.beta_list.len() * sc.variants.len(),
            sc.seeds
        );
    }
    let result = harness::sweep(&sc)?;
    for e in &result.errors {
        eprintln!("warning: {e}");
    }
    let mut out = format!("{}\n", harness::CellSummary::CSV_HEADER);
    for c in &result.cells {
        out.push_str(&c.csv_row());
        out.push('\n');
    }
    emit(&out)
}

pub fn observe(cfg: &Config) -> Result<(), CliError> {
    let n = cfg.model.n as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
    let mut state = initial_state(cfg, &mut rng)?;
    let model = Model::new(cfg.model.variant, cfg.model.beta, cfg.model.n)?;
    let mut rc = cfg.run_config();
    rc.monitor_stride = cfg.monitor.stride.unwrap_or((n * n / 50).max(1));
    rc.max_steps = cfg.monitor.max_steps.unwrap_or(2 * n * n);
    rc.trajectory_stride = 0;

    let mut monitor = Monitor::new(cfg.stop.clone(), cfg.run.seed)?;
    let mut rows: Vec<Diagnostics> = Vec::new();
    let summary = run_until_monitored(&mut state, &model, &rc, &mut rng, |s| {
        monitor.observe(s);
        rows.push(diagnostics(s, cfg.model.beta, &cfg.stop, cfg.run.seed ^ s.t()));
        false
    })?;

    let mut csv = String::from(Diagnostics::CSV_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    let report = json!({ "monitor": monitor.report(), "run": summary });
    let report = serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
    match output_dir(cfg)? {
        Some(dir) => {
            fs::write(dir.join("observe.csv"), csv)?;
            fs::write(dir.join("monitor.json"), format!("{report}\n"))?;
        }
        None => {
            emit(&csv)?;
            eprintln!("{report}");
        }
    }
    Ok(())
}

pub fn duality(cfg: &Config) -> Result<(), CliError> {
    let beta = cfg.model.beta;
    if beta <= 0.0 {
        return Err(CliError::Config("invalid `model.beta`: duality diagnostics need beta > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
    let state = initial_state(cfg, &mut rng)?;
    let n = state.n();

    let mode = match cfg.duality.tv_mode {
        TvModeName::Exact => TvMode::Exact,
        TvModeName::Empirical => TvMode::Empirical {
            walkers: cfg.duality.empirical_walkers,
        },
    };
    let gap = spectral_gap(&state, beta);
    let mut csv = String::from("time,tv\n");
    let mut tv = Vec::new();
    for &c in &cfg.duality.tv_c {
        let time = c / beta;
        let d = tv_to_uniform(&state, VertexId(0), beta, time, mode, &mut rng)?;
        let l2_bound = 0.5 * (n as f64).sqrt() * (-gap.lambda * time).exp();
        csv.push_str(&format!("{time},{d}\n"));
        tv.push(json!({ "c": c, "time": time, "tv": d, "l2_bound": l2_bound }));
    }

    let walkers = cfg.duality.collision_walkers.min(n);
    let mut starts: Vec<u32> = (0..n as u32).collect();
    for i in 0..walkers {
        let j = i + (rng.next_u64() % (n - i) as u64) as usize;
        starts.swap(i, j);
    }
    let starts: Vec<VertexId> = starts[..walkers].iter().map(|&v| VertexId(v)).collect();
    let horizon = cfg.duality.collision_horizon.unwrap_or(10.0 * cfg.stop.c / beta);
    let ensemble = simulate_walks(&state, &starts, beta, horizon, &mut rng)?;
    let collisions = collision_stats(&ensemble);

    let disagreement = if cfg.duality.disagreement {
        let mut s = state.clone();
        Some(disagreement_fraction_test(
            &mut s,
            cfg.starred_variant(),
            beta,
            cfg.stop.c,
            None,
            &mut rng,
        )?)
    } else {
        None
    };

    let report = json!({
        "n": n,
        "beta": beta,
        "spectral_gap": gap,
        "tv": tv,
        "collisions": collisions,
        "collision_horizon": horizon,
        "disagreement": disagreement,
    });
    let report = serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
    match output_dir(cfg)? {
        Some(dir) => {
            fs::write(dir.join("tv.csv"), csv)?;
            fs::write(dir.join("duality.json"), format!("{report}\n"))?;
        }
        None => emit(&format!("{report}\n"))?,
    }
    Ok(())
}

pub fn selftest(seed: u64, ks_runs: usize, inject_fault: bool) -> Result<(), CliError> {
    let results = run_selftest(&SelftestOptions {
        seed,
        ks_runs,
        inject_fault,
    });
    let mut failed = Vec::new();
    for r in &results {
        emit(&format!("{} {}: {}\n", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail))?;
        if !r.passed {
            failed.push(r.name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Runtime(format!("failed checks: {}", failed.join(", "))))
    }
}
