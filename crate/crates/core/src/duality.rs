//! Random walks on a frozen snapshot and the diagnostics built on them.
//!
//! A walker at `v` waits an exponential time of rate `beta * deg(v) / 2n`,
//! then crosses a uniformly chosen incident edge, so neighbours are weighted
//! by multiplicity. The generator is `-(beta / 2n) L`, symmetric, with the
//! uniform law stationary.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Clock, Model, ModelVariant};
use crate::error::{Error, Result};
use crate::graph::{NetState, VertexId};
use crate::observables::{laplacian, DENSE_MAX_N};

/// Walkers used by empirical mode unless told otherwise.
pub const DEFAULT_EMPIRICAL_WALKERS: usize = 100_000;

#[derive(Clone, Debug)]
pub struct WalkEnsemble {
    pub frozen: NetState,
    pub starts: Vec<VertexId>,
    pub rate_per_directed_edge: f64,
    pub horizon: f64,
    /// Per walker: `(jump time, vertex)`, starting with `(0, start)`.
    pub paths: Vec<Vec<(f64, VertexId)>>,
}

impl WalkEnsemble {
    pub fn position(&self, walker: usize) -> VertexId {
        self.paths[walker].last().expect("paths are never empty").1
    }
}

fn check_walk_args(beta: f64, horizon: f64) -> Result<()> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::invalid("beta", format!("must be finite and >= 0, got {beta}")));
    }
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::invalid("horizon", format!("must be finite and >= 0, got {horizon}")));
    }
    Ok(())
}

/// Runs one walker, calling `visit` on every arrival (including the start).
fn walk<R: Rng + ?Sized>(
    state: &NetState,
    rate: f64,
    start: VertexId,
    horizon: f64,
    rng: &mut R,
    mut visit: impl FnMut(f64, VertexId),
) -> VertexId {
    let mut at = start;
    let mut t = 0.0;
    visit(t, at);
    loop {
        let edges = state.incident(at);
        let total = rate * edges.len() as f64;
        if total <= 0.0 {
            return at;
        }
        let hold: f64 = Exp1.sample(rng);
        t += hold / total;
        if t > horizon {
            return at;
        }
        let e = edges[rng.random_range(0..edges.len())];
        at = state.placement(e).other(at);
        visit(t, at);
    }
}

fn walker_seeds<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<u64> {
    (0..count).map(|_| rng.random()).collect()
}

/// Independent walkers from `starts`, each on its own stream seeded from `rng`.
pub fn simulate_walks<R: Rng + ?Sized>(
    frozen: &NetState,
    starts: &[VertexId],
    beta: f64,
    horizon: f64,
    rng: &mut R,
) -> Result<WalkEnsemble> {
    check_walk_args(beta, horizon)?;
    if let Some(v) = starts.iter().find(|v| v.index() >= frozen.n()) {
        return Err(Error::invalid("starts", format!("vertex {v} out of range")));
    }
    let rate = beta / (2.0 * frozen.n() as f64);
    let seeds = walker_seeds(rng, starts.len());
    let paths = starts
        .par_iter()
        .zip(seeds)
        .map(|(&s, seed)| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let mut path = Vec::new();
            walk(frozen, rate, s, horizon, &mut r, |t, v| path.push((t, v)));
            path
        })
        .collect();
    Ok(WalkEnsemble {
        frozen: frozen.clone(),
        starts: starts.to_vec(),
        rate_per_directed_edge: rate,
        horizon,
        paths,
    })
}

/// Exact transition law via the eigendecomposition of the generator.
#[derive(Clone, Debug)]
pub struct HeatKernel {
    n: usize,
    vectors: DMatrix<f64>,
    /// Eigenvalues of `(beta / 2n) L`, all `>= 0` up to rounding.
    rates: DVector<f64>,
}

impl HeatKernel {
    pub fn new(frozen: &NetState, beta: f64) -> Result<HeatKernel> {
        check_walk_args(beta, 0.0)?;
        let n = frozen.n();
        if n > DENSE_MAX_N {
            return Err(Error::TooLarge { n, max: DENSE_MAX_N });
        }
        let eig = SymmetricEigen::new(laplacian(frozen));
        let scale = beta / (2.0 * n as f64);
        Ok(HeatKernel {
            n,
            vectors: eig.eigenvectors,
            rates: eig.eigenvalues.map(|x| (x * scale).max(0.0)),
        })
    }

    /// Law at time `t` of a walker started at `v`.
    pub fn row(&self, v: VertexId, t: f64) -> DVector<f64> {
        let weights = DVector::from_fn(self.n, |k, _| (-self.rates[k] * t).exp() * self.vectors[(v.index(), k)]);
        &self.vectors * weights
    }

    /// Full transition matrix `P_t`.
    pub fn transition(&self, t: f64) -> DMatrix<f64> {
        let decay = DMatrix::from_diagonal(&self.rates.map(|r| (-r * t).exp()));
        &self.vectors * decay * self.vectors.transpose()
    }

    pub fn tv_to_uniform(&self, v: VertexId, t: f64) -> f64 {
        let u = 1.0 / self.n as f64;
        0.5 * self.row(v, t).iter().map(|p| (p - u).abs()).sum::<f64>()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum TvMode {
    Exact,
    Empirical { walkers: usize },
}

impl TvMode {
    pub fn empirical() -> TvMode {
        TvMode::Empirical {
            walkers: DEFAULT_EMPIRICAL_WALKERS,
        }
    }
}

/// Total-variation distance between the time-`time` law from `v` and uniform.
pub fn tv_to_uniform<R: Rng + ?Sized>(
    frozen: &NetState,
    v: VertexId,
    beta: f64,
    time: f64,
    mode: TvMode,
    rng: &mut R,
) -> Result<f64> {
    check_walk_args(beta, time)?;
    if v.index() >= frozen.n() {
        return Err(Error::invalid("v", format!("vertex {v} out of range")));
    }
    match mode {
        TvMode::Exact => Ok(HeatKernel::new(frozen, beta)?.tv_to_uniform(v, time)),
        TvMode::Empirical { walkers } => {
            if walkers == 0 {
                return Err(Error::invalid("walkers", "must be at least 1"));
            }
            let occupancy = empirical_occupancy(frozen, v, beta, time, walkers, rng);
            let u = 1.0 / frozen.n() as f64;
            Ok(0.5 * occupancy.iter().map(|p| (p - u).abs()).sum::<f64>())
        }
    }
}

/// Fraction of `walkers` walks from `v` found at each vertex at `time`.
pub fn empirical_occupancy<R: Rng + ?Sized>(
    frozen: &NetState,
    v: VertexId,
    beta: f64,
    time: f64,
    walkers: usize,
    rng: &mut R,
) -> Vec<f64> {
    const CHUNK: usize = 4096;
    let n = frozen.n();
    let rate = beta / (2.0 * n as f64);
    let chunks = walkers.div_ceil(CHUNK);
    let seeds = walker_seeds(rng, chunks);
    let counts = seeds
        .into_par_iter()
        .enumerate()
        .map(|(i, seed)| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let mut counts = vec![0u64; n];
            let size = CHUNK.min(walkers - i * CHUNK);
            for _ in 0..size {
                counts[walk(frozen, rate, v, time, &mut r, |_, _| {}).index()] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; n],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    counts.into_iter().map(|c| c as f64 / walkers as f64).collect()
}

/// Writes `time,tv` rows for the exact curve from `v`.
pub fn write_tv_curve<W: Write>(kernel: &HeatKernel, v: VertexId, times: &[f64], mut out: W) -> Result<()> {
    writeln!(out, "time,tv")?;
    for &t in times {
        writeln!(out, "{t},{}", kernel.tv_to_uniform(v, t))?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionStats {
    pub walkers: usize,
    pub intersecting: usize,
    pub fraction: f64,
}

/// Walkers whose visited-vertex set meets some other walker's.
pub fn collision_stats(ensemble: &WalkEnsemble) -> CollisionStats {
    let walkers = ensemble.paths.len();
    if walkers == 0 {
        return CollisionStats {
            walkers,
            intersecting: 0,
            fraction: 0.0,
        };
    }
    // visitor count per vertex, each walker counted once per vertex
    let n = ensemble.frozen.n();
    let mut owner = vec![usize::MAX; n];
    let mut visitors = vec![0u32; n];
    let mut visited: Vec<Vec<usize>> = Vec::with_capacity(walkers);
    for (i, path) in ensemble.paths.iter().enumerate() {
        let mut mine = Vec::new();
        for &(_, v) in path {
            let v = v.index();
            if owner[v] != i {
                owner[v] = i;
                visitors[v] += 1;
                mine.push(v);
            }
        }
        visited.push(mine);
    }
    let intersecting = visited.iter().filter(|vs| vs.iter().any(|&v| visitors[v] >= 2)).count();
    CollisionStats {
        walkers,
        intersecting,
        fraction: intersecting as f64 / walkers as f64,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisagreementReport {
    pub n: usize,
    pub beta: f64,
    pub c: f64,
    pub steps: u64,
    /// Minority fraction when the test starts.
    pub p_start: f64,
    /// Minority fraction at measurement time.
    pub p_hat: f64,
    pub cut_edges: usize,
    pub cut_disagreeing: usize,
    pub cut_fraction: f64,
    pub global_fraction: f64,
    /// `2 p_hat (1 - p_hat)`.
    pub predicted: f64,
    /// `2 p_start (1 - p_start)`.
    pub predicted_start: f64,
    /// The chain absorbed before the horizon.
    pub censored: bool,
}

/// Advances `state` by `ceil(c n^2 / beta)` steps and compares disagreeing
/// fractions with `2p(1-p)`.
///
/// The cut defaults to a uniformly random balanced cut drawn before the
/// chain moves.
pub fn disagreement_fraction_test<R: Rng + ?Sized>(
    state: &mut NetState,
    variant: ModelVariant,
    beta: f64,
    c: f64,
    cut: Option<Vec<bool>>,
    rng: &mut R,
) -> Result<DisagreementReport> {
    if variant.clock == Clock::Direct {
        return Err(Error::invalid("variant", "needs the starred or continuous clock"));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::invalid("c", format!("must be positive, got {c}")));
    }
    let n = state.n();
    let model = Model::new(variant, beta, n)?;
    if beta == 0.0 {
        return Err(Error::invalid("beta", "must be positive for a finite horizon"));
    }
    let cut = match cut {
        Some(cut) if cut.len() == n => cut,
        Some(cut) => return Err(Error::invalid("cut", format!("mask length {} != n = {n}", cut.len()))),
        None => crate::observables::random_subset(n, n / 2, rng),
    };
    let p_start = state.minority() as f64 / n as f64;
    let steps = (c * (n * n) as f64 / beta).ceil() as u64;
    let mut censored = false;
    for _ in 0..steps {
        if model.absorb_reason(state).is_some() {
            censored = true;
            break;
        }
        model.step(state, rng);
    }
    let p_hat = state.minority() as f64 / n as f64;
    let (mut cut_edges, mut cut_disagreeing) = (0, 0);
    for (i, b) in state.placements().iter().enumerate() {
        if cut[b.u().index()] != cut[b.v().index()] {
            cut_edges += 1;
            if state.is_disagreeing(crate::graph::EdgeId(i as u32)) {
                cut_disagreeing += 1;
            }
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(DisagreementReport {
        n,
        beta,
        c,
        steps,
        p_start,
        p_hat,
        cut_edges,
        cut_disagreeing,
        cut_fraction: ratio(cut_disagreeing, cut_edges),
        global_fraction: ratio(state.disagreeing_count(), state.edge_count()),
        predicted: 2.0 * p_hat * (1.0 - p_hat),
        predicted_start: 2.0 * p_start * (1.0 - p_start),
        censored,
    })
}
