//! Online evaluation of the stopping-time family along a trajectory.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cheeger::cheeger_sampled;
use super::config::StoppingConfig;
use super::cuts::{l_exact, l_sampled, EXACT_MAX_N};
use super::spectral::spectral_gap;
use super::structure::{degree_extremes, first_unbalanced, max_multiplicity};
use crate::error::Result;
use crate::graph::{Bond, NetState, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopTime {
    Tau2,
    Tau2Weak,
    Tau3,
    Tau3Weak,
    Tau4,
    Tau4Weak,
    Tau5,
    Tau5Weak,
    TauStar,
    TauStarWeak,
}

impl StopTime {
    pub const ALL: [StopTime; 10] = [
        StopTime::Tau2,
        StopTime::Tau2Weak,
        StopTime::Tau3,
        StopTime::Tau3Weak,
        StopTime::Tau4,
        StopTime::Tau4Weak,
        StopTime::Tau5,
        StopTime::Tau5Weak,
        StopTime::TauStar,
        StopTime::TauStarWeak,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StopTime::Tau2 => "tau2",
            StopTime::Tau2Weak => "tau2_weak",
            StopTime::Tau3 => "tau3",
            StopTime::Tau3Weak => "tau3_weak",
            StopTime::Tau4 => "tau4",
            StopTime::Tau4Weak => "tau4_weak",
            StopTime::Tau5 => "tau5",
            StopTime::Tau5Weak => "tau5_weak",
            StopTime::TauStar => "tau_star",
            StopTime::TauStarWeak => "tau_star_weak",
        }
    }
}

impl fmt::Display for StopTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What caused a stopping time to fire.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Cut { s_size: usize, value: f64 },
    Bond { bond: Bond, multiplicity: u32 },
    Vertex { vertex: VertexId, k: u32 },
    MaxDegree { vertex: VertexId, degree: usize },
    MinDegree { vertex: VertexId, degree: usize },
    Minority { count: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Firing {
    pub time: StopTime,
    pub step: u64,
    pub witness: Witness,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    /// Step of the most recent observation.
    pub t: u64,
    pub observations: usize,
    /// Whether `L` and `L'` were computed exhaustively.
    pub l_exact: bool,
    /// First firing of each stopping time, in order of occurrence.
    pub fired: Vec<Firing>,
}

impl MonitorReport {
    pub fn first(&self, time: StopTime) -> Option<&Firing> {
        self.fired.iter().find(|f| f.time == time)
    }

    pub fn fired_at(&self, time: StopTime) -> Option<u64> {
        self.first(time).map(|f| f.step)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Per-snapshot diagnostics for trajectory output.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: u64,
    pub lambda: f64,
    pub h_upper: f64,
    pub dmax: usize,
    pub dmin: usize,
    pub max_multiplicity: u32,
    pub l_sampled: f64,
}

impl Diagnostics {
    pub const CSV_HEADER: &'static str = "t,lambda,h_upper,dmax,dmin,M,L_sampled";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.t, self.lambda, self.h_upper, self.dmax, self.dmin, self.max_multiplicity, self.l_sampled
        )
    }
}

pub fn diagnostics(state: &NetState, beta: f64, config: &StoppingConfig, seed: u64) -> Diagnostics {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = degree_extremes(state);
    let l = l_sampled(state, config.eps2, config.cut_sample_count, &mut rng)
        .map(|x| x.l)
        .unwrap_or(f64::NAN);
    Diagnostics {
        t: state.t(),
        lambda: spectral_gap(state, beta).lambda,
        h_upper: cheeger_sampled(state, beta, config.cut_sample_count, &mut rng).h,
        dmax: d.max,
        dmin: d.min,
        max_multiplicity: max_multiplicity(state).0,
        l_sampled: l,
    }
}

/// Records the first observation at which each stopping time fires.
///
/// For `n <= 16` the cut deviations are exact; otherwise they are sampled
/// lower bounds, so `tau2` and its weak form can only fire late, never early.
pub struct Monitor {
    config: StoppingConfig,
    rng: ChaCha8Rng,
    report: MonitorReport,
}

impl Monitor {
    pub fn new(config: StoppingConfig, seed: u64) -> Result<Monitor> {
        config.validate()?;
        Ok(Monitor {
            config,
            rng: ChaCha8Rng::seed_from_u64(seed),
            report: MonitorReport::default(),
        })
    }

    pub fn config(&self) -> &StoppingConfig {
        &self.config
    }

    pub fn report(&self) -> &MonitorReport {
        &self.report
    }

    pub fn into_report(self) -> MonitorReport {
        self.report
    }

    pub fn has_fired(&self, time: StopTime) -> bool {
        self.report.first(time).is_some()
    }

    fn record(&mut self, time: StopTime, step: u64, witness: Option<Witness>) {
        if let Some(witness) = witness {
            if !self.has_fired(time) {
                self.report.fired.push(Firing { time, step, witness });
            }
        }
    }

    /// Evaluates every stopping condition on `state`.
    pub fn observe(&mut self, state: &NetState) {
        let n = state.n();
        let nf = n as f64;
        let t = state.t();
        let cfg = self.config.clone();
        self.report.t = t;
        self.report.observations += 1;

        if state.edge_count() > 0 {
            let exact = n <= EXACT_MAX_N;
            let cuts = if exact {
                l_exact(state, cfg.eps2)
            } else {
                l_sampled(state, cfg.eps2, cfg.cut_sample_count, &mut self.rng)
            };
            if let Ok(c) = cuts {
                self.report.l_exact = exact;
                let size = |cut: &[bool]| cut.iter().filter(|&&x| x).count();
                let w = (c.l >= cfg.eps3 * cfg.eps3).then(|| Witness::Cut {
                    s_size: size(&c.l_cut),
                    value: c.l,
                });
                self.record(StopTime::Tau2, t, w);
                let w = (c.l_prime >= 2.0 * cfg.eps3).then(|| Witness::Cut {
                    s_size: size(&c.l_prime_cut),
                    value: c.l_prime,
                });
                self.record(StopTime::Tau2Weak, t, w);
            }
        }

        let (m, bond) = max_multiplicity(state);
        let ln_n = nf.ln();
        if let Some(bond) = bond {
            let w = Witness::Bond { bond, multiplicity: m };
            self.record(StopTime::Tau3, t, (m as f64 >= cfg.eps4 * ln_n).then(|| w.clone()));
            self.record(StopTime::Tau3Weak, t, (m as f64 >= 2.0 * cfg.eps4 * ln_n).then_some(w));
        }

        if !self.has_fired(StopTime::Tau4) {
            let w = first_unbalanced(state, cfg.c1).map(|(vertex, k)| Witness::Vertex { vertex, k });
            self.record(StopTime::Tau4, t, w);
        }
        if !self.has_fired(StopTime::Tau4Weak) {
            let w = first_unbalanced(state, 2.0 * cfg.c1).map(|(vertex, k)| Witness::Vertex { vertex, k });
            self.record(StopTime::Tau4Weak, t, w);
        }

        let d = degree_extremes(state);
        let degree_witness = |hi: f64, lo: f64| {
            if d.max as f64 > hi {
                Some(Witness::MaxDegree {
                    vertex: d.argmax,
                    degree: d.max,
                })
            } else if (d.min as f64) < lo {
                Some(Witness::MinDegree {
                    vertex: d.argmin,
                    degree: d.min,
                })
            } else {
                None
            }
        };
        let w = degree_witness((1.0 - cfg.eps / 2.0) * nf, cfg.eps * nf / 2.0);
        self.record(StopTime::Tau5, t, w);
        let w = degree_witness(cfg.c2 * nf, cfg.eps * nf / 4.0);
        self.record(StopTime::Tau5Weak, t, w);

        let minority = state.minority();
        let w = Witness::Minority { count: minority };
        self.record(StopTime::TauStar, t, (minority as f64 <= cfg.eps * nf).then(|| w.clone()));
        self.record(StopTime::TauStarWeak, t, (minority as f64 <= cfg.eps_prime * nf).then_some(w));
    }
}

/// Single-snapshot evaluation.
pub fn monitor(state: &NetState, config: &StoppingConfig, seed: u64) -> Result<MonitorReport> {
    let mut m = Monitor::new(config.clone(), seed)?;
    m.observe(state);
    Ok(m.into_report())
}
