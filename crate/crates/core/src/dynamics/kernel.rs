use std::collections::BTreeMap;

use super::{Clock, Model, Rewiring};
use crate::error::{Error, Result};
use crate::graph::{Bond, EdgeId, NetState, VertexId};

/// Identifies a labelled state: opinions, then each edge's endpoints in
/// edge-id order.
pub fn state_key(state: &NetState) -> String {
    let mut key: String = state.opinions().iter().map(|o| char::from(b'0' + o)).collect();
    for b in state.placements() {
        key.push_str(&format!("|{}-{}", b.u(), b.v()));
    }
    key
}

/// Exact one-step law of `model` from `state`, keyed by [`state_key`].
/// The continuous clock is enumerated through its jump chain.
/// Intended for small states; the cost is `O(N n)` states.
pub fn one_step_kernel(state: &NetState, model: &Model) -> Result<BTreeMap<String, f64>> {
    if model.absorb_reason(state).is_some() {
        return Err(Error::invalid("state", "absorbed states have no transitions"));
    }
    let n = state.n();
    let q = model.relabel_prob();
    let mut law = BTreeMap::new();
    let mut add = |s: &NetState, p: f64| *law.entry(state_key(s)).or_insert(0.0) += p;

    let edges: Vec<EdgeId> = match model.variant().clock {
        Clock::Direct => state.disagreeing().collect(),
        Clock::Starred | Clock::Continuous => (0..state.edge_count() as u32).map(EdgeId).collect(),
    };
    let pick = 1.0 / edges.len() as f64;
    for e in edges {
        if !state.is_disagreeing(e) {
            add(state, pick);
            continue;
        }
        let bond = state.placement(e);
        for root in [bond.u(), bond.v()] {
            let p_root = pick / 2.0;
            let mut relabelled = state.clone();
            relabelled.flip_opinion(root)?;
            add(&relabelled, p_root * q);

            let targets: Vec<VertexId> = match model.variant().rewiring {
                Rewiring::RewireToRandom => (0..n as u32).map(VertexId).filter(|&w| w != root).collect(),
                Rewiring::RewireToSame => state.members(state.opinion(root)).filter(|&w| w != root).collect(),
            };
            for w in &targets {
                let mut moved = state.clone();
                moved.move_edge(e, Bond::new(root, *w)?)?;
                add(&moved, p_root * (1.0 - q) / targets.len() as f64);
            }
        }
    }
    Ok(law)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ModelVariant;

    #[test]
    fn probabilities_sum_to_one() {
        let b = |u, v| Bond::new(VertexId(u), VertexId(v)).unwrap();
        let s = NetState::from_parts(vec![0, 0, 1, 1], vec![b(0, 2), b(1, 2), b(0, 1)]).unwrap();
        for v in ModelVariant::ALL {
            let m = Model::new(v, 1.2, 4).unwrap();
            let total: f64 = one_step_kernel(&s, &m).unwrap().values().sum();
            assert!((total - 1.0).abs() < 1e-12, "{v}");
        }
    }
}
