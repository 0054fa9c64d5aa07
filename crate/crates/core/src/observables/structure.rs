use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Bond, NetState, VertexId};

/// Largest bond multiplicity and one bond attaining it.
pub fn max_multiplicity(state: &NetState) -> (u32, Option<Bond>) {
    state
        .occupied_bonds()
        .fold((0, None), |(m, b), (bond, k)| if k > m { (k, Some(bond)) } else { (m, b) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Balance {
    pub balanced: bool,
    /// Smallest `k` with `#{u : M(u, v) = k} > c1 * 10^-k * n`.
    pub first_violation: Option<u32>,
}

/// Number of neighbours of `v` joined by exactly `k` edges, indexed by `k`.
pub fn multiplicity_profile(state: &NetState, v: VertexId) -> Vec<u64> {
    let mut hist: Vec<u64> = Vec::new();
    for &e in state.incident(v) {
        let u = state.placement(e).other(v);
        let k = state.multiplicity(Bond::ordered(u, v)) as usize;
        if hist.len() <= k {
            hist.resize(k + 1, 0);
        }
        hist[k] += 1;
    }
    // each neighbour at multiplicity k was counted k times
    for (k, h) in hist.iter_mut().enumerate().skip(1) {
        *h /= k as u64;
    }
    hist
}

/// `v` is `c1`-balanced when `#{u : M(u, v) = k} <= c1 * 10^-k * n` for all `k >= 1`.
pub fn is_balanced(state: &NetState, v: VertexId, c1: f64) -> Result<Balance> {
    if v.index() >= state.n() {
        return Err(Error::invalid("vertex", format!("{v} out of range")));
    }
    let n = state.n() as f64;
    let hist = multiplicity_profile(state, v);
    let first_violation = hist
        .iter()
        .enumerate()
        .skip(1)
        .find(|&(k, &count)| count as f64 > c1 * 10f64.powi(-(k as i32)) * n)
        .map(|(k, _)| k as u32);
    Ok(Balance {
        balanced: first_violation.is_none(),
        first_violation,
    })
}

/// First vertex (by index) that is not `c1`-balanced.
pub fn first_unbalanced(state: &NetState, c1: f64) -> Option<(VertexId, u32)> {
    (0..state.n() as u32).map(VertexId).find_map(|v| {
        is_balanced(state, v, c1)
            .ok()
            .and_then(|b| b.first_violation.map(|k| (v, k)))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeExtremes {
    pub max: usize,
    pub argmax: VertexId,
    pub min: usize,
    pub argmin: VertexId,
}

/// Ties go to the smallest index.
pub fn degree_extremes(state: &NetState) -> DegreeExtremes {
    let mut out = DegreeExtremes {
        max: 0,
        argmax: VertexId(0),
        min: usize::MAX,
        argmin: VertexId(0),
    };
    for v in (0..state.n() as u32).map(VertexId) {
        let d = state.degree(v);
        if d > out.max {
            out.max = d;
            out.argmax = v;
        }
        if d < out.min {
            out.min = d;
            out.argmin = v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(u: u32, v: u32) -> Bond {
        Bond::new(VertexId(u), VertexId(v)).unwrap()
    }

    #[test]
    fn multiplicity_and_profile() {
        let s = NetState::from_parts(vec![0; 4], vec![b(0, 1), b(0, 1), b(0, 1), b(0, 2)]).unwrap();
        assert_eq!(max_multiplicity(&s), (3, Some(b(0, 1))));
        assert_eq!(multiplicity_profile(&s, VertexId(0)), vec![0, 1, 0, 1]);
    }

    #[test]
    fn balance_threshold() {
        // n = 4, c1 = 10: k = 1 allows 4 neighbours, k = 2 allows 0.4
        let s = NetState::from_parts(vec![0; 4], vec![b(0, 1), b(0, 2), b(0, 3)]).unwrap();
        assert!(is_balanced(&s, VertexId(0), 10.0).unwrap().balanced);
        let s = NetState::from_parts(vec![0; 4], vec![b(0, 1), b(0, 1)]).unwrap();
        let bal = is_balanced(&s, VertexId(0), 10.0).unwrap();
        assert_eq!(bal.first_violation, Some(2));
        assert_eq!(first_unbalanced(&s, 10.0), Some((VertexId(0), 2)));
    }

    #[test]
    fn degree_ties_go_to_lowest_index() {
        let s = NetState::from_parts(vec![0; 4], vec![b(0, 1), b(2, 3)]).unwrap();
        let d = degree_extremes(&s);
        assert_eq!((d.max, d.argmax, d.min, d.argmin), (1, VertexId(0), 1, VertexId(0)));
    }
}
