//! Cheeger constant `h = min_{|S| <= n/2} N_ST * beta / (2 |S| n)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cuts::{random_subset, EXACT_MAX_N};
use crate::error::{Error, Result};
use crate::graph::{NetState, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum CheegerMode {
    Exact,
    /// Minimum over the given number of random cuts plus structured
    /// candidates; an upper bound on `h`.
    Sampled { samples: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheegerEstimate {
    pub h: f64,
    /// Minimising side `S`, `|S| <= n/2`.
    pub cut: Vec<bool>,
    pub exact: bool,
}

fn ratio(n_st: u64, s: usize, n: usize, beta: f64) -> f64 {
    n_st as f64 * beta / (2.0 * s as f64 * n as f64)
}

fn crossing(state: &NetState, s: &[bool]) -> u64 {
    state
        .placements()
        .iter()
        .filter(|b| s[b.u().index()] != s[b.v().index()])
        .count() as u64
}

/// Orients a cut so `S` is the smaller side.
fn smaller_side(mut cut: Vec<bool>) -> Vec<bool> {
    let k = cut.iter().filter(|&&x| x).count();
    if 2 * k > cut.len() {
        cut.iter_mut().for_each(|x| *x = !*x);
    }
    cut
}

pub fn cheeger_exact(state: &NetState, beta: f64) -> Result<CheegerEstimate> {
    let n = state.n();
    if n > EXACT_MAX_N {
        return Err(Error::TooLarge { n, max: EXACT_MAX_N });
    }
    if n < 2 {
        return Err(Error::invalid("n", "needs at least two vertices"));
    }
    let bonds: Vec<(u32, u32, u64)> = state
        .occupied_bonds()
        .map(|(b, m)| (b.u().0, b.v().0, m as u64))
        .collect();
    let mut best = (f64::INFINITY, 0u32);
    for mask in 1u32..(1u32 << n) - 1 {
        let k = mask.count_ones() as usize;
        if 2 * k > n {
            continue;
        }
        let n_st: u64 = bonds
            .iter()
            .filter(|&&(u, v, _)| ((mask >> u) ^ (mask >> v)) & 1 == 1)
            .map(|&(_, _, m)| m)
            .sum();
        let h = ratio(n_st, k, n, beta);
        if h < best.0 {
            best = (h, mask);
        }
    }
    Ok(CheegerEstimate {
        h: best.0,
        cut: (0..n).map(|v| (best.1 >> v) & 1 == 1).collect(),
        exact: true,
    })
}

/// Random balanced-ish cuts, the opinion cut, and every ascending-degree
/// prefix of length up to `n/2`.
pub fn cheeger_sampled<R: Rng + ?Sized>(state: &NetState, beta: f64, samples: usize, rng: &mut R) -> CheegerEstimate {
    let n = state.n();
    let mut best = CheegerEstimate {
        h: f64::INFINITY,
        cut: vec![false; n],
        exact: false,
    };
    if n < 2 {
        return best;
    }
    let mut offer = |cut: Vec<bool>, n_st: u64| {
        let k = cut.iter().filter(|&&x| x).count();
        if k == 0 || 2 * k > n {
            return;
        }
        let h = ratio(n_st, k, n, beta);
        if h < best.h {
            best.h = h;
            best.cut = cut;
        }
    };

    let opinion = smaller_side(state.opinions().iter().map(|&o| o == 1).collect());
    let c = crossing(state, &opinion);
    offer(opinion, c);

    for _ in 0..samples {
        let k = rng.random_range(1..=n / 2);
        let cut = random_subset(n, k, rng);
        let c = crossing(state, &cut);
        offer(cut, c);
    }

    // grow S by ascending degree, updating N_ST incrementally
    let mut order: Vec<VertexId> = (0..n as u32).map(VertexId).collect();
    order.sort_by_key(|&v| (state.degree(v), v.0));
    let mut cut = vec![false; n];
    let mut n_st: i64 = 0;
    for &v in order.iter().take(n / 2) {
        for &e in state.incident(v) {
            let u = state.placement(e).other(v);
            n_st += if cut[u.index()] { -1 } else { 1 };
        }
        cut[v.index()] = true;
        offer(cut.clone(), n_st as u64);
    }
    best
}

pub fn cheeger<R: Rng + ?Sized>(state: &NetState, beta: f64, mode: CheegerMode, rng: &mut R) -> Result<CheegerEstimate> {
    match mode {
        CheegerMode::Exact => cheeger_exact(state, beta),
        CheegerMode::Sampled { samples } => Ok(cheeger_sampled(state, beta, samples, rng)),
    }
}
