use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AbsorbReason, Model, ModelVariant, StepKind};
use crate::error::{Error, Result};
use crate::graph::NetState;

/// Stopping predicates and recording strides for a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub max_steps: u64,
    /// Thresholds whose first passage times are recorded.
    pub tau_star_eps: Vec<f64>,
    /// Stop as soon as the minority drops to `eps * n` or below.
    pub halt_at_tau_star: Option<f64>,
    /// Steps between trajectory records; 0 disables the trajectory.
    pub trajectory_stride: u64,
    /// Steps between calls of the external monitor.
    pub monitor_stride: u64,
}

impl RunConfig {
    /// Defaults for an `n`-vertex chain: `20 n^3` steps, thresholds 0.05 and
    /// 0.1, trajectory every `n^2 / 100` steps, monitor every `n^2 / 50`.
    pub fn for_n(n: usize) -> RunConfig {
        let n = n as u64;
        RunConfig {
            max_steps: 20 * n * n * n,
            tau_star_eps: vec![0.05, 0.1],
            halt_at_tau_star: None,
            trajectory_stride: (n * n / 100).max(1),
            monitor_stride: (n * n / 50).max(1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for &e in self.tau_star_eps.iter().chain(self.halt_at_tau_star.iter()) {
            if !(0.0..0.5).contains(&e) {
                return Err(Error::invalid("eps", format!("threshold must lie in [0, 1/2), got {e}")));
            }
        }
        if self.monitor_stride == 0 {
            return Err(Error::invalid("monitor_stride", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum StopReason {
    Absorbed { cause: AbsorbReason },
    MaxSteps,
    TauStar { eps: f64 },
    Monitor,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauStarHit {
    pub eps: f64,
    /// First step with minority `<= eps * n`, if reached.
    pub step: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: u64,
    pub n1: usize,
    pub disagreeing: usize,
}

/// Outcome of a single chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub n: usize,
    pub beta: f64,
    pub variant: ModelVariant,
    pub seed: Option<u64>,
    /// Step at which the run stopped; the absorption time when `!censored`.
    pub tau: u64,
    pub censored: bool,
    pub stop: StopReason,
    /// Elapsed model time (equals steps for discrete clocks).
    pub time: f64,
    pub tau_star_hits: Vec<TauStarHit>,
    /// `min(N0, N1) / n` at the stopping step.
    pub minority_at_stop: f64,
    pub relabel_count: u64,
    pub rewire_count: u64,
    pub noop_count: u64,
    pub edge_count: usize,
    #[serde(skip)]
    pub trajectory: Vec<TrajectoryPoint>,
}

impl RunSummary {
    pub fn absorbed(&self) -> bool {
        matches!(self.stop, StopReason::Absorbed { .. })
    }

    pub fn tau_star(&self, eps: f64) -> Option<u64> {
        self.tau_star_hits.iter().find(|h| h.eps == eps).and_then(|h| h.step)
    }

    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn write_trajectory_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,n1,disagreeing")?;
        for p in &self.trajectory {
            writeln!(w, "{},{},{}", p.t, p.n1, p.disagreeing)?;
        }
        Ok(())
    }
}

/// Shared bookkeeping for the step engine and the counter engine.
pub(crate) struct Recorder {
    summary: RunSummary,
    start_t: u64,
    config: RunConfig,
    halted: Option<StopReason>,
}

impl Recorder {
    pub(crate) fn new(state: &NetState, model: &Model, config: &RunConfig) -> Recorder {
        let mut rec = Recorder {
            summary: RunSummary {
                n: state.n(),
                beta: model.beta(),
                variant: model.variant(),
                seed: None,
                tau: state.t(),
                censored: false,
                stop: StopReason::MaxSteps,
                time: 0.0,
                tau_star_hits: config
                    .tau_star_eps
                    .iter()
                    .chain(config.halt_at_tau_star.iter())
                    .fold(Vec::new(), |mut acc, &eps| {
                        if !acc.iter().any(|h: &TauStarHit| h.eps == eps) {
                            acc.push(TauStarHit { eps, step: None });
                        }
                        acc
                    }),
                minority_at_stop: 0.0,
                relabel_count: 0,
                rewire_count: 0,
                noop_count: 0,
                edge_count: state.edge_count(),
                trajectory: Vec::new(),
            },
            start_t: state.t(),
            config: config.clone(),
            halted: None,
        };
        rec.record_point(state);
        rec.check_minority(state);
        rec
    }

    pub(crate) fn steps_taken(&self, state: &NetState) -> u64 {
        state.t() - self.start_t
    }

    fn record_point(&mut self, state: &NetState) {
        if self.config.trajectory_stride == 0 {
            return;
        }
        let p = TrajectoryPoint {
            t: state.t(),
            n1: state.n1(),
            disagreeing: state.disagreeing_count(),
        };
        if self.summary.trajectory.last().map(|q| q.t) != Some(p.t) {
            self.summary.trajectory.push(p);
        }
    }

    fn check_minority(&mut self, state: &NetState) {
        let m = state.minority() as f64;
        let n = state.n() as f64;
        for h in &mut self.summary.tau_star_hits {
            if h.step.is_none() && m <= h.eps * n {
                h.step = Some(state.t());
            }
        }
        if let Some(eps) = self.config.halt_at_tau_star {
            if m <= eps * n && self.halted.is_none() {
                self.halted = Some(StopReason::TauStar { eps });
            }
        }
    }

    /// Records the effect of one step; returns whether a halting predicate
    /// fired.
    pub(crate) fn after_step(&mut self, state: &NetState, kind: &StepKind, elapsed: f64) -> bool {
        match kind {
            StepKind::Relabel { .. } => {
                self.summary.relabel_count += 1;
                self.check_minority(state);
            }
            StepKind::Rewire { .. } => self.summary.rewire_count += 1,
            StepKind::AgreeingNoOp { .. } => self.summary.noop_count += 1,
            StepKind::Absorbed(_) => {}
        }
        self.summary.time += elapsed;
        let stride = self.config.trajectory_stride;
        if stride > 0 && (state.t() - self.start_t).is_multiple_of(stride) {
            self.record_point(state);
        }
        self.halted.is_some()
    }

    pub(crate) fn halted(&self) -> Option<StopReason> {
        self.halted
    }

    pub(crate) fn finish(mut self, state: &NetState, stop: StopReason) -> RunSummary {
        self.record_point(state);
        self.summary.tau = state.t();
        self.summary.censored = !matches!(stop, StopReason::Absorbed { .. });
        self.summary.stop = stop;
        self.summary.minority_at_stop = state.minority() as f64 / state.n() as f64;
        if self.summary.variant.clock != super::Clock::Continuous {
            self.summary.time = (state.t() - self.start_t) as f64;
        }
        self.summary
    }
}

/// Drives the chain until absorption, `max_steps`, or the configured
/// minority threshold, whichever comes first.
pub fn run_until<R: Rng + ?Sized>(
    state: &mut NetState,
    model: &Model,
    config: &RunConfig,
    rng: &mut R,
) -> Result<RunSummary> {
    run_until_monitored(state, model, config, rng, |_| false)
}

/// [`run_until`] with an external monitor called every
/// `config.monitor_stride` steps (and once on the initial state); the run
/// stops when it returns `true`.
pub fn run_until_monitored<R, M>(
    state: &mut NetState,
    model: &Model,
    config: &RunConfig,
    rng: &mut R,
    mut monitor: M,
) -> Result<RunSummary>
where
    R: Rng + ?Sized,
    M: FnMut(&NetState) -> bool,
{
    config.validate()?;
    if state.n() != model.n() {
        return Err(Error::invalid("n", format!("model built for n = {}, state has n = {}", model.n(), state.n())));
    }
    let mut rec = Recorder::new(state, model, config);
    if monitor(state) {
        return Ok(rec.finish(state, StopReason::Monitor));
    }
    if let Some(stop) = rec.halted() {
        return Ok(rec.finish(state, stop));
    }
    loop {
        if let Some(cause) = model.absorb_reason(state) {
            return Ok(rec.finish(state, StopReason::Absorbed { cause }));
        }
        if rec.steps_taken(state) >= config.max_steps {
            return Ok(rec.finish(state, StopReason::MaxSteps));
        }
        let out = model.step(state, rng);
        if let StepKind::Absorbed(cause) = out.kind {
            return Ok(rec.finish(state, StopReason::Absorbed { cause }));
        }
        if rec.after_step(state, &out.kind, out.elapsed) {
            let stop = rec.halted().expect("halt recorded");
            return Ok(rec.finish(state, stop));
        }
        if rec.steps_taken(state).is_multiple_of(config.monitor_stride) && monitor(state) {
            return Ok(rec.finish(state, StopReason::Monitor));
        }
    }
}
