//! Fast end-to-end checks, runnable from the command line.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{
    counter_engine_run, one_step_kernel, run_until, state_key, Clock, Model, ModelVariant, RunConfig, Rewiring,
};
use crate::graph::{Bond, EdgeId, NetState, VertexId};
use crate::observables::spectral_gap;
use crate::stats::{ks_critical, ks_statistic, mean};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct SelftestOptions {
    pub seed: u64,
    /// Runs per engine in the KS comparison.
    pub ks_runs: usize,
    /// Corrupts the disagreeing-edge index before auditing.
    pub inject_fault: bool,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions {
            seed: 0,
            ks_runs: 500,
            inject_fault: false,
        }
    }
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

fn audit_fuzz(rng: &mut ChaCha8Rng, inject_fault: bool) -> CheckResult {
    for variant in ModelVariant::ALL {
        let mut s = NetState::sample_initial(30, rng).expect("n = 30 is valid");
        let n_edges = s.edge_count();
        let model = Model::new(variant, 3.0, 30).expect("beta < n");
        if inject_fault {
            let e = (0..n_edges as u32).map(EdgeId).find(|&e| !s.is_disagreeing(e)).unwrap_or(EdgeId(0));
            s.inject_disagree_fault(e);
        }
        for step in 0..3000 {
            let v = s.audit();
            if !v.is_empty() || s.edge_count() != n_edges {
                let first = v.first().map(|x| x.to_string()).unwrap_or_else(|| "edge count changed".into());
                return check("audit", false, format!("{variant} step {step}: {first}"));
            }
            if model.absorb_reason(&s).is_some() {
                break;
            }
            model.step(&mut s, rng);
        }
    }
    check("audit", true, "6 variants x 3000 steps at n = 30".into())
}

fn kernel_match(rng: &mut ChaCha8Rng) -> CheckResult {
    const TRIALS: usize = 20_000;
    const TOL: f64 = 0.02;
    let b = |u, v| Bond::new(VertexId(u), VertexId(v)).expect("distinct");
    let start = NetState::from_parts(vec![0, 0, 1, 1], vec![b(0, 2), b(1, 2), b(0, 1), b(2, 3)]).expect("valid");
    let mut worst = 0.0f64;
    for rewiring in [Rewiring::RewireToRandom, Rewiring::RewireToSame] {
        for clock in [Clock::Direct, Clock::Starred] {
            let model = Model::new(ModelVariant::new(rewiring, clock), 1.2, 4).expect("valid");
            let exact = one_step_kernel(&start, &model).expect("non-absorbed");
            let mut counts: BTreeMap<String, usize> = BTreeMap::new();
            for _ in 0..TRIALS {
                let mut s = start.clone();
                model.step(&mut s, rng);
                *counts.entry(state_key(&s)).or_insert(0) += 1;
            }
            for key in exact.keys().chain(counts.keys()) {
                let p = exact.get(key).copied().unwrap_or(0.0);
                let f = counts.get(key).copied().unwrap_or(0) as f64 / TRIALS as f64;
                worst = worst.max((p - f).abs());
            }
        }
    }
    check("kernel", worst <= TOL, format!("max |empirical - exact| = {worst:.4} (tol {TOL})"))
}

fn complete_graph_gap() -> CheckResult {
    let n = 10u32;
    let bonds = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| Bond::new(VertexId(u), VertexId(v)).expect("distinct")))
        .collect();
    let s = NetState::from_parts(vec![0; n as usize], bonds).expect("valid");
    let lambda = spectral_gap(&s, 2.0).lambda;
    check("spectral", (lambda - 1.0).abs() < 1e-9, format!("gap(K_10, beta = 2) = {lambda}"))
}

fn two_vertex_mean(rng: &mut ChaCha8Rng) -> CheckResult {
    const RUNS: usize = 4000;
    let model = Model::new(ModelVariant::random_direct(), 1.0, 2).expect("valid");
    let config = RunConfig::for_n(2);
    let taus: Vec<f64> = (0..RUNS)
        .map(|_| {
            let mut s = NetState::from_parts(vec![0, 1], vec![Bond::new(VertexId(0), VertexId(1)).expect("distinct")])
                .expect("valid");
            let summary = run_until(&mut s, &model, &config, rng).expect("valid config");
            summary.tau as f64
        })
        .collect();
    let m = mean(&taus);
    check("closed-form", (m - 2.0).abs() <= 0.1, format!("n = 2, beta = 1: mean tau = {m:.3} (expected 2)"))
}

fn engine_ks(seed: u64, runs: usize) -> CheckResult {
    const N: usize = 40;
    const BETA: f64 = 2.0;
    let config = RunConfig {
        trajectory_stride: 0,
        ..RunConfig::for_n(N)
    };
    let model = Model::new(ModelVariant::random_direct(), BETA, N).expect("valid");
    let sample = |engine: u64| -> Vec<f64> {
        (0..runs as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (engine << 32) ^ i);
                let mut s = NetState::sample_initial(N, &mut rng).expect("valid");
                let tau = if engine == 0 {
                    run_until(&mut s, &model, &config, &mut rng).expect("valid").tau
                } else {
                    counter_engine_run(&mut s, BETA, &config, &mut rng).expect("valid").0.tau
                };
                tau as f64
            })
            .collect()
    };
    let (a, b) = (sample(0), sample(1));
    let d = ks_statistic(&a, &b);
    let crit = ks_critical(0.001, a.len(), b.len());
    check("engine-ks", d <= crit, format!("D = {d:.4}, critical {crit:.4} at 0.1%, {runs} vs {runs}"))
}

pub fn run_selftest(options: &SelftestOptions) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut sub = || ChaCha8Rng::seed_from_u64(rng.random());
    let (mut r1, mut r2, mut r3) = (sub(), sub(), sub());
    vec![
        audit_fuzz(&mut r1, options.inject_fault),
        kernel_match(&mut r2),
        complete_graph_gap(),
        two_vertex_mean(&mut r3),
        engine_ks(options.seed, options.ks_runs),
    ]
}
