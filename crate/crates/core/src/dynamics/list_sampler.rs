use rand::Rng;

use super::Rewiring;
use crate::graph::{NetState, VertexId};

/// Outcome of scanning the vertex list for one rewiring target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ListDraw {
    Target { vertex: VertexId, consumed: u64 },
    /// No vertex can ever be eligible (rewire-to-same with a singleton class).
    NoEligible,
    /// A finite list ran out before an eligible entry was found.
    Exhausted,
}

/// Rewiring targets read from an i.i.d. uniform vertex list: each draw scans
/// forward from the first uninspected entry and returns the first entry
/// that is a legal target for the current root.
pub struct ListSampler<I> {
    list: I,
    consumed: u64,
}

impl<I: Iterator<Item = VertexId>> ListSampler<I> {
    pub fn new(list: I) -> Self {
        ListSampler { list, consumed: 0 }
    }

    /// Total entries inspected so far.
    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    /// Skips entries equal to `root`.
    pub fn draw_random(&mut self, root: VertexId) -> ListDraw {
        self.scan(|w| w != root)
    }

    /// Skips entries equal to `root` or holding the other opinion.
    pub fn draw_same(&mut self, state: &NetState, root: VertexId) -> ListDraw {
        let own = state.opinion(root);
        if state.count(own) < 2 {
            return ListDraw::NoEligible;
        }
        self.scan(|w| w != root && state.opinion(w) == own)
    }

    pub fn draw(&mut self, rule: Rewiring, state: &NetState, root: VertexId) -> ListDraw {
        match rule {
            Rewiring::RewireToRandom => self.draw_random(root),
            Rewiring::RewireToSame => self.draw_same(state, root),
        }
    }

    fn scan(&mut self, legal: impl Fn(VertexId) -> bool) -> ListDraw {
        let mut consumed = 0;
        for w in self.list.by_ref() {
            consumed += 1;
            if legal(w) {
                self.consumed += consumed;
                return ListDraw::Target { vertex: w, consumed };
            }
        }
        self.consumed += consumed;
        ListDraw::Exhausted
    }
}

/// Endless i.i.d. uniform vertex list over `0..n`.
pub fn uniform_vertex_list<R: Rng>(mut rng: R, n: usize) -> impl Iterator<Item = VertexId> {
    std::iter::repeat_with(move || VertexId(rng.random_range(0..n as u32)))
}
