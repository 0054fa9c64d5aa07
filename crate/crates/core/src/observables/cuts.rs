//! Cut statistics and the maximal cut deviations `L` and `L'`.
//!
//! For a partition `V = S ∪ T` with `N` edges:
//!
//! ```text
//! K_ST = ((N_SS - |S|²/4) / N)² + ((N_TT - |T|²/4) / N)²
//! L'-term = max(|N_ST - |S||T|/2|, |N_SS - |S|²/4|) / N
//! ```
//!
//! `L` and `L'` maximise these over cuts whose smaller side has at least
//! `eps2 * n` vertices. Both terms of `L'` are evaluated on the same cut.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NetState;

/// Largest `n` accepted by the exhaustive estimators.
pub const EXACT_MAX_N: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutStat {
    pub s_size: usize,
    pub t_size: usize,
    pub n_ss: u64,
    pub n_st: u64,
    pub n_tt: u64,
    pub k_st: f64,
    pub lprime_term: f64,
}

impl CutStat {
    fn from_counts(s_size: usize, t_size: usize, n_ss: u64, n_st: u64, n_tt: u64) -> CutStat {
        let total = (n_ss + n_st + n_tt) as f64;
        let (s, t) = (s_size as f64, t_size as f64);
        let a = (n_ss as f64 - s * s / 4.0) / total;
        let b = (n_tt as f64 - t * t / 4.0) / total;
        let c = (n_st as f64 - s * t / 2.0) / total;
        CutStat {
            s_size,
            t_size,
            n_ss,
            n_st,
            n_tt,
            k_st: a * a + b * b,
            lprime_term: c.abs().max(a.abs()),
        }
    }
}

fn check_cut(state: &NetState, s: &[bool]) -> Result<usize> {
    if s.len() != state.n() {
        return Err(Error::invalid("cut", format!("mask length {} != n = {}", s.len(), state.n())));
    }
    let k = s.iter().filter(|&&x| x).count();
    if k == 0 || k == s.len() {
        return Err(Error::invalid("cut", "S must be a nonempty proper subset"));
    }
    if state.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(k)
}

/// Exact counts for the cut `S = {v : s[v]}` by one pass over the edges.
pub fn cut_stats(state: &NetState, s: &[bool]) -> Result<CutStat> {
    let k = check_cut(state, s)?;
    let (mut ss, mut st, mut tt) = (0u64, 0u64, 0u64);
    for b in state.placements() {
        match (s[b.u().index()], s[b.v().index()]) {
            (true, true) => ss += 1,
            (false, false) => tt += 1,
            _ => st += 1,
        }
    }
    let stat = CutStat::from_counts(k, s.len() - k, ss, st, tt);
    debug_assert_eq!(stat.n_ss + stat.n_st + stat.n_tt, state.edge_count() as u64);
    Ok(stat)
}

/// Largest deviations found over a family of cuts, with the maximising cuts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutExtremes {
    pub l: f64,
    pub l_cut: Vec<bool>,
    pub l_prime: f64,
    pub l_prime_cut: Vec<bool>,
    pub cuts_examined: usize,
    /// `true` when every qualifying cut was examined.
    pub exact: bool,
}

impl CutExtremes {
    fn empty(n: usize, exact: bool) -> Self {
        CutExtremes {
            l: f64::NEG_INFINITY,
            l_cut: vec![false; n],
            l_prime: f64::NEG_INFINITY,
            l_prime_cut: vec![false; n],
            cuts_examined: 0,
            exact,
        }
    }

    fn offer(&mut self, stat: &CutStat, cut: impl Fn() -> Vec<bool>) {
        self.cuts_examined += 1;
        if stat.k_st > self.l {
            self.l = stat.k_st;
            self.l_cut = cut();
        }
        if stat.lprime_term > self.l_prime {
            self.l_prime = stat.lprime_term;
            self.l_prime_cut = cut();
        }
    }
}

/// Smallest admissible side size: `max(1, ceil(eps2 * n))`.
pub fn min_side(n: usize, eps2: f64) -> usize {
    ((eps2 * n as f64).ceil() as usize).max(1)
}

fn qualifies(k: usize, n: usize, lo: usize) -> bool {
    k >= lo && n - k >= lo
}

/// Exact `L` and `L'` by enumerating all `2^n` cuts.
pub fn l_exact(state: &NetState, eps2: f64) -> Result<CutExtremes> {
    let n = state.n();
    if n > EXACT_MAX_N {
        return Err(Error::TooLarge { n, max: EXACT_MAX_N });
    }
    if state.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let lo = min_side(n, eps2);
    if 2 * lo > n {
        return Err(Error::invalid("eps2", format!("no cut of {n} vertices has both sides >= {lo}")));
    }
    let bonds: Vec<(u32, u32, u64)> = state
        .occupied_bonds()
        .map(|(b, m)| (b.u().0, b.v().0, m as u64))
        .collect();
    let total = state.edge_count() as u64;
    let mut best = CutExtremes::empty(n, true);
    for mask in 1u32..(1u32 << n) - 1 {
        let k = mask.count_ones() as usize;
        if !qualifies(k, n, lo) {
            continue;
        }
        let (mut ss, mut tt) = (0u64, 0u64);
        for &(u, v, m) in &bonds {
            match ((mask >> u) & 1, (mask >> v) & 1) {
                (1, 1) => ss += m,
                (0, 0) => tt += m,
                _ => {}
            }
        }
        let stat = CutStat::from_counts(k, n - k, ss, total - ss - tt, tt);
        best.offer(&stat, || (0..n).map(|v| (mask >> v) & 1 == 1).collect());
    }
    Ok(best)
}

/// Lower bounds on `L` and `L'` from `samples` uniformly drawn qualifying
/// cuts plus the opinion cut (`S` = opinion-0 vertices) when it qualifies.
pub fn l_sampled<R: Rng + ?Sized>(
    state: &NetState,
    eps2: f64,
    samples: usize,
    rng: &mut R,
) -> Result<CutExtremes> {
    let n = state.n();
    if state.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let lo = min_side(n, eps2);
    if 2 * lo > n {
        return Err(Error::invalid("eps2", format!("no cut of {n} vertices has both sides >= {lo}")));
    }
    let mut best = CutExtremes::empty(n, false);
    let opinion_cut: Vec<bool> = state.opinions().iter().map(|&o| o == 0).collect();
    if qualifies(state.n0(), n, lo) {
        let stat = cut_stats(state, &opinion_cut)?;
        best.offer(&stat, || opinion_cut.clone());
    }
    for _ in 0..samples {
        let cut = sample_qualifying_cut(n, lo, rng);
        let stat = cut_stats(state, &cut)?;
        best.offer(&stat, || cut.clone());
    }
    Ok(best)
}

/// A uniform subset conditioned on both sides having at least `lo` members.
/// Rejection from uniform subsets, falling back to a size-binomial draw when
/// the condition is unlikely.
pub(crate) fn sample_qualifying_cut<R: Rng + ?Sized>(n: usize, lo: usize, rng: &mut R) -> Vec<bool> {
    for _ in 0..64 {
        let cut: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        let k = cut.iter().filter(|&&x| x).count();
        if qualifies(k, n, lo) {
            return cut;
        }
    }
    let k = rng.random_range(lo..=n - lo);
    random_subset(n, k, rng)
}

pub(crate) fn random_subset<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<bool> {
    let mut cut = vec![false; n];
    for i in index::sample(rng, n, k) {
        cut[i] = true;
    }
    cut
}
