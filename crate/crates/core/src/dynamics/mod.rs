//! Transition kernels and run drivers.
//!
//! One update of the chain: select an edge according to the clock, pick one
//! of its endpoints as the root with probability 1/2 each, then with
//! probability `beta / n` the root adopts the other endpoint's opinion;
//! otherwise the edge leaves its bond and is re-attached between the root
//! and a freshly drawn vertex.
//!
//! Randomness inside [`Model::apply`] is consumed in a fixed order: root
//! (one `bool`), relabel coin (one `f64`), then the rewiring target.

mod counter;
mod kernel;
mod list_sampler;
mod run;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Bond, EdgeId, NetState, Opinion, VertexId};

pub use counter::{counter_engine_run, CounterStats};
pub use kernel::{one_step_kernel, state_key};
pub use list_sampler::{uniform_vertex_list, ListDraw, ListSampler};
pub use run::{run_until, run_until_monitored, RunConfig, RunSummary, StopReason, TauStarHit, TrajectoryPoint};

/// Where a rewired edge is re-attached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rewiring {
    /// Uniform over all vertices other than the root.
    #[serde(rename = "rewire-random")]
    RewireToRandom,
    /// Uniform over the root's opinion class, excluding the root.
    #[serde(rename = "rewire-same")]
    RewireToSame,
}

/// How the next edge is chosen and how much time a step takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clock {
    /// Uniform disagreeing edge, unit time.
    Direct,
    /// Uniform edge, unit time; agreeing picks are no-ops.
    Starred,
    /// Starred jump chain with Exponential(2N) holding times.
    Continuous,
}

/// Serialized as `rewiring/clock`, e.g. `rewire-random/starred`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct ModelVariant {
    pub rewiring: Rewiring,
    pub clock: Clock,
}

impl ModelVariant {
    pub const fn new(rewiring: Rewiring, clock: Clock) -> Self {
        ModelVariant { rewiring, clock }
    }

    pub const fn random_direct() -> Self {
        ModelVariant::new(Rewiring::RewireToRandom, Clock::Direct)
    }

    pub const ALL: [ModelVariant; 6] = [
        ModelVariant::new(Rewiring::RewireToRandom, Clock::Direct),
        ModelVariant::new(Rewiring::RewireToRandom, Clock::Starred),
        ModelVariant::new(Rewiring::RewireToRandom, Clock::Continuous),
        ModelVariant::new(Rewiring::RewireToSame, Clock::Direct),
        ModelVariant::new(Rewiring::RewireToSame, Clock::Starred),
        ModelVariant::new(Rewiring::RewireToSame, Clock::Continuous),
    ];
}

impl fmt::Display for Rewiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rewiring::RewireToRandom => "rewire-random",
            Rewiring::RewireToSame => "rewire-same",
        })
    }
}

impl FromStr for Rewiring {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rewire-random" | "random" => Ok(Rewiring::RewireToRandom),
            "rewire-same" | "same" => Ok(Rewiring::RewireToSame),
            _ => Err(Error::invalid("variant", format!("unknown rewiring rule `{s}`"))),
        }
    }
}

impl fmt::Display for Clock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clock::Direct => "direct",
            Clock::Starred => "starred",
            Clock::Continuous => "continuous",
        })
    }
}

impl FromStr for Clock {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Clock::Direct),
            "starred" => Ok(Clock::Starred),
            "continuous" => Ok(Clock::Continuous),
            _ => Err(Error::invalid("clock", format!("unknown clock `{s}`"))),
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.rewiring, self.clock)
    }
}

/// Accepts `rewiring/clock`, or a bare rewiring rule meaning the direct clock.
impl FromStr for ModelVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('/') {
            Some((r, c)) => Ok(ModelVariant::new(r.parse()?, c.parse()?)),
            None => Ok(ModelVariant::new(s.parse()?, Clock::Direct)),
        }
    }
}

impl From<ModelVariant> for String {
    fn from(v: ModelVariant) -> String {
        v.to_string()
    }
}

impl TryFrom<String> for ModelVariant {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbsorbReason {
    NoDisagreeingEdges,
    /// Rewire-to-same only: an opinion is held by at most one vertex.
    SingletonOpinion,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepKind {
    Relabel {
        edge: EdgeId,
        root: VertexId,
        adopted: Opinion,
    },
    Rewire {
        edge: EdgeId,
        from: Bond,
        to: Bond,
    },
    AgreeingNoOp {
        edge: EdgeId,
    },
    Absorbed(AbsorbReason),
}

/// What one call to [`Model::step`] did.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub kind: StepKind,
    /// The relabel coin; only drawn once a disagreeing edge is selected.
    pub coin_z: bool,
    /// Time increment: 1 for discrete clocks, the holding time otherwise.
    pub elapsed: f64,
}

impl StepOutcome {
    fn absorbed(reason: AbsorbReason) -> Self {
        StepOutcome {
            kind: StepKind::Absorbed(reason),
            coin_z: false,
            elapsed: 0.0,
        }
    }
}

/// Result of the clock's edge selection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Selection {
    Disagreeing { edge: EdgeId, elapsed: f64 },
    Agreeing { edge: EdgeId, elapsed: f64 },
    Absorbed(AbsorbReason),
}

/// Whether `state` is absorbing for the given rewiring rule.
pub fn is_absorbed(state: &NetState, variant: ModelVariant) -> bool {
    absorb_reason(state, variant.rewiring).is_some()
}

pub fn absorb_reason(state: &NetState, rewiring: Rewiring) -> Option<AbsorbReason> {
    if state.disagreeing_count() == 0 {
        Some(AbsorbReason::NoDisagreeingEdges)
    } else if rewiring == Rewiring::RewireToSame && state.minority() <= 1 {
        Some(AbsorbReason::SingletonOpinion)
    } else {
        None
    }
}

/// A validated (variant, beta, n) triple.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Model {
    variant: ModelVariant,
    beta: f64,
    n: usize,
    relabel_prob: f64,
}

impl Model {
    /// `beta` is the relabelling rate; the per-update relabel probability is
    /// `beta / n` and must not exceed 1.
    pub fn new(variant: ModelVariant, beta: f64, n: usize) -> Result<Model> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::invalid("beta", format!("must be finite and >= 0, got {beta}")));
        }
        if n < 2 {
            return Err(Error::invalid("n", format!("need at least 2 vertices, got {n}")));
        }
        if beta > n as f64 {
            return Err(Error::invalid("beta", format!("beta / n = {} exceeds 1", beta / n as f64)));
        }
        Ok(Model {
            variant,
            beta,
            n,
            relabel_prob: beta / n as f64,
        })
    }

    pub fn variant(&self) -> ModelVariant {
        self.variant
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn relabel_prob(&self) -> f64 {
        self.relabel_prob
    }

    pub fn absorb_reason(&self, state: &NetState) -> Option<AbsorbReason> {
        absorb_reason(state, self.variant.rewiring)
    }

    /// Performs one transition.
    #[inline]
    pub fn step<R: Rng + ?Sized>(&self, state: &mut NetState, rng: &mut R) -> StepOutcome {
        match self.select(state, rng) {
            Selection::Absorbed(r) => StepOutcome::absorbed(r),
            Selection::Agreeing { edge, elapsed } => {
                state.tick();
                StepOutcome {
                    kind: StepKind::AgreeingNoOp { edge },
                    coin_z: false,
                    elapsed,
                }
            }
            Selection::Disagreeing { edge, elapsed } => {
                let mut out = self.apply(state, edge, rng);
                out.elapsed = elapsed;
                out
            }
        }
    }

    /// Like [`step`](Self::step), but edge selection and holding times use
    /// `select_rng` while the root, coin and target use `decide_rng`.
    pub fn step_split<S, D>(&self, state: &mut NetState, select_rng: &mut S, decide_rng: &mut D) -> StepOutcome
    where
        S: Rng + ?Sized,
        D: Rng + ?Sized,
    {
        match self.select(state, select_rng) {
            Selection::Absorbed(r) => StepOutcome::absorbed(r),
            Selection::Agreeing { edge, elapsed } => {
                state.tick();
                StepOutcome {
                    kind: StepKind::AgreeingNoOp { edge },
                    coin_z: false,
                    elapsed,
                }
            }
            Selection::Disagreeing { edge, elapsed } => {
                let mut out = self.apply(state, edge, decide_rng);
                out.elapsed = elapsed;
                out
            }
        }
    }

    /// Chooses the edge to update according to the clock. Does not mutate.
    #[inline]
    pub fn select<R: Rng + ?Sized>(&self, state: &NetState, rng: &mut R) -> Selection {
        if let Some(r) = self.absorb_reason(state) {
            return Selection::Absorbed(r);
        }
        match self.variant.clock {
            Clock::Direct => {
                let edge = state
                    .sample_disagreeing_edge(rng)
                    .expect("non-absorbed state has a disagreeing edge");
                Selection::Disagreeing { edge, elapsed: 1.0 }
            }
            Clock::Starred | Clock::Continuous => {
                let elapsed = if self.variant.clock == Clock::Continuous {
                    let x: f64 = rng.sample(Exp1);
                    x / (2.0 * state.edge_count() as f64)
                } else {
                    1.0
                };
                let edge = EdgeId(rng.random_range(0..state.edge_count() as u32));
                if state.is_disagreeing(edge) {
                    Selection::Disagreeing { edge, elapsed }
                } else {
                    Selection::Agreeing { edge, elapsed }
                }
            }
        }
    }

    /// Applies the update to a selected disagreeing edge and advances `t`.
    #[inline]
    pub fn apply<R: Rng + ?Sized>(&self, state: &mut NetState, edge: EdgeId, rng: &mut R) -> StepOutcome {
        debug_assert!(state.is_disagreeing(edge));
        let bond = state.placement(edge);
        let root = if rng.random::<bool>() { bond.u() } else { bond.v() };
        let other = bond.other(root);
        let coin_z = rng.random::<f64>() < self.relabel_prob;
        let kind = if coin_z {
            let adopted = state.opinion(other);
            state.flip_unchecked(root);
            StepKind::Relabel { edge, root, adopted }
        } else {
            let target = match self.variant.rewiring {
                Rewiring::RewireToRandom => {
                    let w = rng.random_range(0..state.n() as u32 - 1);
                    VertexId(if w >= root.0 { w + 1 } else { w })
                }
                Rewiring::RewireToSame => match state.sample_same_opinion(root, rng) {
                    Some(w) => w,
                    None => return StepOutcome::absorbed(AbsorbReason::SingletonOpinion),
                },
            };
            let to = Bond::ordered(root, target);
            let from = state.move_unchecked(edge, to);
            StepKind::Rewire { edge, from, to }
        };
        state.tick();
        StepOutcome {
            kind,
            coin_z,
            elapsed: 1.0,
        }
    }
}

/// One transition with on-the-fly validation of `beta`.
pub fn step<R: Rng + ?Sized>(
    state: &mut NetState,
    variant: ModelVariant,
    beta: f64,
    rng: &mut R,
) -> Result<StepOutcome> {
    Ok(Model::new(variant, beta, state.n())?.step(state, rng))
}
