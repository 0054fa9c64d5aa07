//! Counter-based construction of the rewire-to-random chain.
//!
//! Each vertex carries a countdown of rewiring updates it still has to root
//! before its next relabel. Counters are refilled with Geometric(beta / n)
//! values (failures before the first success) drawn from two independent
//! streams: `X` when the root lies in `S` and holds opinion 0, `X'`
//! otherwise. `S` is the set of vertices whose initial degree is at most
//! `10 n`. Rewiring targets come from an i.i.d. uniform vertex list that is
//! scanned past entries equal to the root. Counters start from the first
//! `n` elements of `X'`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use super::list_sampler::{uniform_vertex_list, ListDraw, ListSampler};
use super::run::{Recorder, RunConfig, RunSummary, StopReason};
use super::{Model, ModelVariant, StepKind};
use crate::error::{Error, Result};
use crate::graph::{Bond, NetState, VertexId};

/// Bookkeeping of the counter construction.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterStats {
    /// Size of the low-initial-degree set `S`.
    pub s_size: usize,
    /// Elements of `X` consumed.
    pub x_used: u64,
    /// Elements of `X'` consumed, including the `n` initial counters.
    pub x_prime_used: u64,
    /// Consumed `X` elements that were at least `25 n`.
    pub stubborn_used: u64,
    /// Relabels performed while the picked edge had both endpoints in `S`.
    pub relabel_ss: u64,
    /// Disagreeing-edge picks by endpoint membership in `S`.
    pub picks_ss: u64,
    pub picks_st: u64,
    pub picks_tt: u64,
    /// Vertex-list entries inspected.
    pub list_consumed: u64,
}

// Geometric counter stream; `None` encodes an infinite counter (beta = 0).
struct CounterStream {
    rng: ChaCha8Rng,
    dist: Option<Geometric>,
}

impl CounterStream {
    fn new(seed: u64, q: f64) -> Result<Self> {
        let dist = if q > 0.0 {
            Some(Geometric::new(q).map_err(|e| Error::invalid("beta", e.to_string()))?)
        } else {
            None
        };
        Ok(CounterStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            dist,
        })
    }

    fn next(&mut self) -> u64 {
        match &self.dist {
            Some(d) => d.sample(&mut self.rng),
            None => u64::MAX,
        }
    }
}

/// Runs the rewire-to-random chain (disagreeing-edge clock) through the
/// counter construction. Distributionally identical to
/// [`run_until`](super::run_until) with the same model.
pub fn counter_engine_run<R: Rng + ?Sized>(
    state: &mut NetState,
    beta: f64,
    config: &RunConfig,
    rng: &mut R,
) -> Result<(RunSummary, CounterStats)> {
    config.validate()?;
    let n = state.n();
    let model = Model::new(ModelVariant::random_direct(), beta, n)?;
    let q = model.relabel_prob();
    let stubborn = 25 * n as u64;

    let mut x = CounterStream::new(rng.random(), q)?;
    let mut x_prime = CounterStream::new(rng.random(), q)?;
    let mut z_rng = ChaCha8Rng::seed_from_u64(rng.random());
    let mut select_rng = ChaCha8Rng::seed_from_u64(rng.random());
    let mut list = ListSampler::new(uniform_vertex_list(ChaCha8Rng::seed_from_u64(rng.random()), n));

    let in_s: Vec<bool> = (0..n).map(|v| state.degree(VertexId(v as u32)) <= 10 * n).collect();
    let mut stats = CounterStats {
        s_size: in_s.iter().filter(|&&b| b).count(),
        ..CounterStats::default()
    };
    let mut counters: Vec<u64> = (0..n).map(|_| x_prime.next()).collect();
    stats.x_prime_used = n as u64;

    let mut rec = Recorder::new(state, &model, config);
    if let Some(stop) = rec.halted() {
        return Ok((rec.finish(state, stop), stats));
    }
    loop {
        if let Some(cause) = model.absorb_reason(state) {
            stats.list_consumed = list.consumed();
            return Ok((rec.finish(state, StopReason::Absorbed { cause }), stats));
        }
        if rec.steps_taken(state) >= config.max_steps {
            stats.list_consumed = list.consumed();
            return Ok((rec.finish(state, StopReason::MaxSteps), stats));
        }
        let edge = state
            .sample_disagreeing_edge(&mut select_rng)
            .expect("non-absorbed state has a disagreeing edge");
        let bond = state.placement(edge);
        // z = 1 designates the opinion-1 endpoint as root
        let z: bool = z_rng.random();
        let one_end = if state.opinion(bond.u()) == 1 { bond.u() } else { bond.v() };
        let root = if z { one_end } else { bond.other(one_end) };
        let (su, sv) = (in_s[bond.u().index()], in_s[bond.v().index()]);
        let both_s = su && sv;
        match (su, sv) {
            (true, true) => stats.picks_ss += 1,
            (false, false) => stats.picks_tt += 1,
            _ => stats.picks_st += 1,
        }
        let uses_x = in_s[root.index()] && state.opinion(root) == 0;
        let k = &mut counters[root.index()];
        let kind = if *k > 0 {
            if *k != u64::MAX {
                *k -= 1;
            }
            let target = match list.draw_random(root) {
                ListDraw::Target { vertex, .. } => vertex,
                _ => unreachable!("the uniform list is endless and n >= 2"),
            };
            let to = Bond::ordered(root, target);
            let from = state.move_unchecked(edge, to);
            StepKind::Rewire { edge, from, to }
        } else {
            let adopted = state.opinion(bond.other(root));
            state.flip_unchecked(root);
            if both_s {
                stats.relabel_ss += 1;
            }
            *k = if uses_x {
                stats.x_used += 1;
                let v = x.next();
                if v >= stubborn {
                    stats.stubborn_used += 1;
                }
                v
            } else {
                stats.x_prime_used += 1;
                x_prime.next()
            };
            StepKind::Relabel { edge, root, adopted }
        };
        state.tick();
        if rec.after_step(state, &kind, 1.0) {
            stats.list_consumed = list.consumed();
            let stop = rec.halted().expect("halt recorded");
            return Ok((rec.finish(state, stop), stats));
        }
    }
}
