use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{run_until, Model, ModelVariant, RunConfig, StopReason};
use crate::error::{Error, Result};
use crate::graph::{Bond, NetState, VertexId};
use crate::observables::random_subset;

const GSTAR_RETRIES: usize = 1000;

/// A state with exactly `floor(p n)` opinion-1 vertices and between
/// `12 n^2 / 50` and `13 n^2 / 50` edges.
#[derive(Clone, Debug, PartialEq)]
pub struct GStarState {
    pub state: NetState,
    pub p: f64,
}

impl GStarState {
    /// Inclusive edge-count window for `n` vertices.
    pub fn edge_window(n: usize) -> (usize, usize) {
        let sq = (n * n) as f64;
        ((12.0 * sq / 50.0).ceil() as usize, (13.0 * sq / 50.0).floor() as usize)
    }

    pub fn is_member(state: &NetState, p: f64) -> bool {
        let n = state.n();
        let (lo, hi) = Self::edge_window(n);
        state.n1() == (p * n as f64).floor() as usize && (lo..=hi).contains(&state.edge_count())
    }
}

/// Rejection-samples `G(n, 1/2)` until the edge count lands in the window,
/// then labels a uniform `floor(p n)`-subset with opinion 1.
pub fn make_gstar<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<GStarState> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::invalid("p", format!("must lie in (0, 1/2), got {p}")));
    }
    let ones = (p * n as f64).floor() as usize;
    if ones == 0 {
        return Err(Error::invalid("p", format!("floor(p n) = 0 for p = {p}, n = {n}")));
    }
    let (lo, hi) = GStarState::edge_window(n);
    if lo > hi || hi > n * (n - 1) / 2 {
        return Err(Error::invalid("n", format!("no simple graph on {n} vertices fits the edge window")));
    }
    for _ in 0..GSTAR_RETRIES {
        let mut bonds = Vec::with_capacity(n * n / 4);
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                if rng.random::<bool>() {
                    bonds.push(Bond::new(VertexId(u), VertexId(v))?);
                }
            }
        }
        if !(lo..=hi).contains(&bonds.len()) {
            continue;
        }
        let opinions = random_subset(n, ones, rng).into_iter().map(u8::from).collect();
        let state = NetState::from_parts(opinions, bonds)?;
        return Ok(GStarState { state, p });
    }
    Err(Error::invalid(
        "n",
        format!("edge window [{lo}, {hi}] not hit in {GSTAR_RETRIES} samples at n = {n}"),
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitRun {
    pub seed: u64,
    pub tau: u64,
    pub absorbed: bool,
    /// The minority reached `p n / 2` before (or at) absorption.
    pub hit_tau_star: bool,
    /// `N_*(tau) / n` at the stopping step.
    pub minority_at_stop: f64,
}

impl SplitRun {
    pub fn success(&self) -> bool {
        self.absorbed && !self.hit_tau_star
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub n: usize,
    pub beta: f64,
    pub p: f64,
    pub runs: Vec<SplitRun>,
    pub successes: usize,
    pub success_fraction: f64,
    pub min_minority_at_stop: f64,
}

/// Rewire-to-random (direct clock) from `make_gstar(n, p)` states, each run
/// halted at `tau_*(p/2)`; success means absorption came first.
pub fn split_experiment<R: Rng + ?Sized>(n: usize, beta: f64, p: f64, seeds: usize, rng: &mut R) -> Result<SplitReport> {
    split_experiment_with(n, beta, p, seeds, RunConfig::for_n(n).max_steps, rng)
}

pub fn split_experiment_with<R: Rng + ?Sized>(
    n: usize,
    beta: f64,
    p: f64,
    seeds: usize,
    max_steps: u64,
    rng: &mut R,
) -> Result<SplitReport> {
    let model = Model::new(ModelVariant::random_direct(), beta, n)?;
    let config = RunConfig {
        max_steps,
        tau_star_eps: vec![p / 2.0],
        halt_at_tau_star: Some(p / 2.0),
        trajectory_stride: 0,
        monitor_stride: u64::MAX,
    };
    let seed_list: Vec<u64> = (0..seeds).map(|_| rng.random()).collect();
    let runs = seed_list
        .into_par_iter()
        .map(|seed| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let mut g = make_gstar(n, p, &mut r)?.state;
            let s = run_until(&mut g, &model, &config, &mut r)?;
            Ok(SplitRun {
                seed,
                tau: s.tau,
                absorbed: s.absorbed(),
                hit_tau_star: matches!(s.stop, StopReason::TauStar { .. }) || s.tau_star(p / 2.0).is_some(),
                minority_at_stop: s.minority_at_stop,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let successes = runs.iter().filter(|r| r.success()).count();
    Ok(SplitReport {
        n,
        beta,
        p,
        successes,
        success_fraction: successes as f64 / seeds.max(1) as f64,
        min_minority_at_stop: runs.iter().map(|r| r.minority_at_stop).fold(f64::INFINITY, f64::min),
        runs,
    })
}
