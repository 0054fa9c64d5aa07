//! The mutable chain state: a multigraph with labelled edges on a fixed
//! vertex set, together with binary opinions and the indices the dynamics
//! needs to run in O(1) per rewiring step.

mod indexed_set;
mod snapshot;

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use indexed_set::IndexedSet;

/// Opinion held by a vertex, always 0 or 1.
pub type Opinion = u8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u32);

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// Unordered pair of distinct vertices, stored as `(min, max)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawBond")]
pub struct Bond {
    u: VertexId,
    v: VertexId,
}

#[derive(Deserialize)]
struct RawBond {
    u: VertexId,
    v: VertexId,
}

impl TryFrom<RawBond> for Bond {
    type Error = Error;

    fn try_from(raw: RawBond) -> Result<Bond> {
        Bond::new(raw.u, raw.v)
    }
}

impl Bond {
    /// Fails on `a == b`; self-loops are not representable.
    pub fn new(a: VertexId, b: VertexId) -> Result<Bond> {
        if a == b {
            return Err(Error::invalid("bond", format!("self-loop at vertex {a}")));
        }
        Ok(Bond::ordered(a, b))
    }

    #[inline]
    pub(crate) fn ordered(a: VertexId, b: VertexId) -> Bond {
        debug_assert_ne!(a, b);
        if a < b {
            Bond { u: a, v: b }
        } else {
            Bond { u: b, v: a }
        }
    }

    #[inline]
    pub fn u(self) -> VertexId {
        self.u
    }

    #[inline]
    pub fn v(self) -> VertexId {
        self.v
    }

    #[inline]
    pub fn contains(self, x: VertexId) -> bool {
        self.u == x || self.v == x
    }

    /// The endpoint that is not `x`. `x` must be an endpoint.
    #[inline]
    pub fn other(self, x: VertexId) -> VertexId {
        debug_assert!(self.contains(x));
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

impl fmt::Display for Bond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.u, self.v)
    }
}

/// A consistency failure found by [`NetState::audit`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    InvalidPlacement { edge: EdgeId },
    InvalidOpinion { vertex: VertexId, value: u8 },
    DegreeMismatch { vertex: VertexId, stored: usize, actual: usize },
    IncidenceMismatch { edge: EdgeId, vertex: VertexId },
    MultiplicityMismatch { bond: Bond, stored: u32, actual: u32 },
    MissingDisagreeing { edge: EdgeId },
    SpuriousDisagreeing { edge: EdgeId },
    DisagreeIndexCorrupt,
    OpinionClassMismatch { vertex: VertexId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::InvalidPlacement { edge } => write!(f, "edge {edge} has an invalid bond"),
            Violation::InvalidOpinion { vertex, value } => {
                write!(f, "vertex {vertex} holds opinion {value}")
            }
            Violation::DegreeMismatch {
                vertex,
                stored,
                actual,
            } => write!(f, "vertex {vertex}: incidence length {stored}, placement degree {actual}"),
            Violation::IncidenceMismatch { edge, vertex } => {
                write!(f, "edge {edge} missing from incidence of vertex {vertex}")
            }
            Violation::MultiplicityMismatch {
                bond,
                stored,
                actual,
            } => write!(f, "bond {bond}: stored multiplicity {stored}, actual {actual}"),
            Violation::MissingDisagreeing { edge } => {
                write!(f, "disagreeing edge {edge} absent from disagree_index")
            }
            Violation::SpuriousDisagreeing { edge } => {
                write!(f, "agreeing edge {edge} present in disagree_index")
            }
            Violation::DisagreeIndexCorrupt => write!(f, "disagree_index position map is corrupt"),
            Violation::OpinionClassMismatch { vertex } => {
                write!(f, "vertex {vertex} filed under the wrong opinion class")
            }
        }
    }
}

/// Full state of the chain.
///
/// Everything other than `opinions`, `placement` and `t` is derived and kept
/// in sync by [`flip_opinion`](Self::flip_opinion) and
/// [`move_edge`](Self::move_edge). Equality compares the semantic content;
/// the internal order of index arrays is not part of a state's identity.
#[derive(Clone, Debug)]
pub struct NetState {
    n: usize,
    opinions: Vec<Opinion>,
    placement: Vec<Bond>,
    incidence: Vec<Vec<EdgeId>>,
    // position of each edge inside the incidence list of its (u, v) endpoints
    inc_pos: Vec<[u32; 2]>,
    // upper-triangular dense bond counts
    multiplicity: Vec<u32>,
    disagree: IndexedSet,
    classes: [IndexedSet; 2],
    t: u64,
}

impl NetState {
    /// Builds a state from opinions and an edge list. Edge `i` of `bonds`
    /// receives label `i`.
    pub fn from_parts(opinions: Vec<Opinion>, bonds: Vec<Bond>) -> Result<NetState> {
        let n = opinions.len();
        if n < 2 {
            return Err(Error::invalid("n", format!("need at least 2 vertices, got {n}")));
        }
        if n > u32::MAX as usize / 2 || bonds.len() >= u32::MAX as usize {
            return Err(Error::invalid("n", "too large"));
        }
        if let Some((v, &o)) = opinions.iter().enumerate().find(|(_, &o)| o > 1) {
            return Err(Error::invalid("opinions", format!("vertex {v} holds {o}")));
        }
        if let Some(b) = bonds.iter().find(|b| b.v.index() >= n) {
            return Err(Error::invalid("bonds", format!("{b} out of range for n = {n}")));
        }
        let mut state = NetState {
            n,
            opinions,
            placement: bonds,
            incidence: vec![Vec::new(); n],
            inc_pos: Vec::new(),
            multiplicity: vec![0; n * (n - 1) / 2],
            disagree: IndexedSet::new(0),
            classes: [IndexedSet::new(n), IndexedSet::new(n)],
            t: 0,
        };
        let m = state.placement.len();
        state.inc_pos = vec![[0; 2]; m];
        state.disagree = IndexedSet::new(m);
        for v in 0..n {
            state.classes[state.opinions[v] as usize].insert(v as u32);
        }
        for e in 0..m {
            let e = EdgeId(e as u32);
            state.attach(e);
            if state.edge_disagrees(e) {
                state.disagree.insert(e.0);
            }
        }
        Ok(state)
    }

    /// Samples the initial condition: every bond independently carries one
    /// edge with probability 1/2 and opinions are i.i.d. fair bits.
    ///
    /// Randomness is read in a fixed order so states are reproducible from
    /// the stream alone: first one `next_u64` per bond in row-major order
    /// (`(0,1), (0,2), …, (0,n-1), (1,2), …`), where the top bit decides
    /// presence, then one `next_u64` per vertex in index order, whose top bit
    /// is the opinion. Edges are labelled in scan order.
    pub fn sample_initial<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<NetState> {
        if n < 2 {
            return Err(Error::invalid("n", format!("need at least 2 vertices, got {n}")));
        }
        let mut bonds = Vec::with_capacity(n * n / 4);
        for u in 0..n {
            for v in u + 1..n {
                if rng.next_u64() >> 63 == 1 {
                    bonds.push(Bond::ordered(VertexId(u as u32), VertexId(v as u32)));
                }
            }
        }
        let opinions = (0..n).map(|_| (rng.next_u64() >> 63) as Opinion).collect();
        NetState::from_parts(opinions, bonds)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.placement.len()
    }

    #[inline]
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn set_t(&mut self, t: u64) {
        self.t = t;
    }

    #[inline]
    pub(crate) fn tick(&mut self) {
        self.t += 1;
    }

    #[inline]
    pub fn opinion(&self, v: VertexId) -> Opinion {
        self.opinions[v.index()]
    }

    pub fn opinions(&self) -> &[Opinion] {
        &self.opinions
    }

    #[inline]
    pub fn placement(&self, e: EdgeId) -> Bond {
        self.placement[e.index()]
    }

    pub fn placements(&self) -> &[Bond] {
        &self.placement
    }

    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.incidence[v.index()]
    }

    /// Number of edges incident to `v`, counting multi-edges.
    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.incidence[v.index()].len()
    }

    #[inline]
    fn tri_index(&self, b: Bond) -> usize {
        let (u, v) = (b.u.index(), b.v.index());
        u * self.n - u * (u + 1) / 2 + (v - u - 1)
    }

    /// Number of edges currently on bond `b`.
    #[inline]
    pub fn multiplicity(&self, b: Bond) -> u32 {
        self.multiplicity[self.tri_index(b)]
    }

    /// Occupied bonds with their multiplicities, in row-major order.
    pub fn occupied_bonds(&self) -> impl Iterator<Item = (Bond, u32)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |u| {
            (u + 1..n).filter_map(move |v| {
                let b = Bond::ordered(VertexId(u as u32), VertexId(v as u32));
                let m = self.multiplicity(b);
                (m > 0).then_some((b, m))
            })
        })
    }

    #[inline]
    pub fn count(&self, opinion: Opinion) -> usize {
        self.classes[opinion as usize].len()
    }

    #[inline]
    pub fn n0(&self) -> usize {
        self.count(0)
    }

    #[inline]
    pub fn n1(&self) -> usize {
        self.count(1)
    }

    /// Size of the smaller opinion class.
    #[inline]
    pub fn minority(&self) -> usize {
        self.n0().min(self.n1())
    }

    pub fn members(&self, opinion: Opinion) -> impl Iterator<Item = VertexId> + '_ {
        self.classes[opinion as usize].iter().map(VertexId)
    }

    #[inline]
    pub fn disagreeing_count(&self) -> usize {
        self.disagree.len()
    }

    #[inline]
    pub fn is_disagreeing(&self, e: EdgeId) -> bool {
        self.disagree.contains(e.0)
    }

    pub fn disagreeing(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.disagree.iter().map(EdgeId)
    }

    #[inline]
    fn edge_disagrees(&self, e: EdgeId) -> bool {
        let b = self.placement[e.index()];
        self.opinions[b.u.index()] != self.opinions[b.v.index()]
    }

    /// Uniform draw from the disagreeing edges; `None` means no disagreeing
    /// edge is left.
    #[inline]
    pub fn sample_disagreeing_edge<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<EdgeId> {
        self.disagree.sample(rng).map(EdgeId)
    }

    /// Uniform draw from the vertices sharing `u`'s opinion, excluding `u`.
    #[inline]
    pub fn sample_same_opinion<R: Rng + ?Sized>(&self, u: VertexId, rng: &mut R) -> Option<VertexId> {
        self.classes[self.opinion(u) as usize]
            .sample_excluding(u.0, rng)
            .map(VertexId)
    }

    fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v.index() >= self.n {
            return Err(Error::invalid("vertex", format!("{v} out of range for n = {}", self.n)));
        }
        Ok(())
    }

    /// Toggles the opinion of `v`. Every incident edge switches between
    /// agreeing and disagreeing; returns how many edges were reclassified.
    pub fn flip_opinion(&mut self, v: VertexId) -> Result<usize> {
        self.check_vertex(v)?;
        Ok(self.flip_unchecked(v))
    }

    #[inline]
    pub(crate) fn flip_unchecked(&mut self, v: VertexId) -> usize {
        let old = self.opinions[v.index()];
        self.opinions[v.index()] = 1 - old;
        self.classes[old as usize].remove(v.0);
        self.classes[1 - old as usize].insert(v.0);
        for &e in &self.incidence[v.index()] {
            if !self.disagree.remove(e.0) {
                self.disagree.insert(e.0);
            }
        }
        self.incidence[v.index()].len()
    }

    /// Moves edge `e` onto `target` and returns the bond it left.
    pub fn move_edge(&mut self, e: EdgeId, target: Bond) -> Result<Bond> {
        if e.index() >= self.edge_count() {
            return Err(Error::invalid("edge", format!("{e} out of range")));
        }
        self.check_vertex(target.v)?;
        Ok(self.move_unchecked(e, target))
    }

    #[inline]
    pub(crate) fn move_unchecked(&mut self, e: EdgeId, target: Bond) -> Bond {
        let old = self.placement[e.index()];
        if old == target {
            return old;
        }
        self.detach(e);
        self.placement[e.index()] = target;
        self.attach(e);
        if self.edge_disagrees(e) {
            self.disagree.insert(e.0);
        } else {
            self.disagree.remove(e.0);
        }
        old
    }

    fn attach(&mut self, e: EdgeId) {
        let b = self.placement[e.index()];
        let ti = self.tri_index(b);
        self.multiplicity[ti] += 1;
        for (side, x) in [b.u, b.v].into_iter().enumerate() {
            let list = &mut self.incidence[x.index()];
            self.inc_pos[e.index()][side] = list.len() as u32;
            list.push(e);
        }
    }

    fn detach(&mut self, e: EdgeId) {
        let b = self.placement[e.index()];
        let ti = self.tri_index(b);
        self.multiplicity[ti] -= 1;
        for (side, x) in [b.u, b.v].into_iter().enumerate() {
            let p = self.inc_pos[e.index()][side] as usize;
            let list = &mut self.incidence[x.index()];
            list.swap_remove(p);
            if let Some(&moved) = list.get(p) {
                let mb = self.placement[moved.index()];
                let moved_side = if mb.u == x { 0 } else { 1 };
                self.inc_pos[moved.index()][moved_side] = p as u32;
            }
        }
    }

    /// Recomputes every derived field from `placement` and `opinions` and
    /// reports each mismatch. An empty list means the state is consistent.
    pub fn audit(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.n;
        let mut placement_ok = true;
        for (i, b) in self.placement.iter().enumerate() {
            if b.u >= b.v || b.v.index() >= n {
                out.push(Violation::InvalidPlacement { edge: EdgeId(i as u32) });
                placement_ok = false;
            }
        }
        for (v, &o) in self.opinions.iter().enumerate() {
            let vid = VertexId(v as u32);
            if o > 1 {
                out.push(Violation::InvalidOpinion { vertex: vid, value: o });
            } else if !self.classes[o as usize].contains(v as u32) || self.classes[1 - o as usize].contains(v as u32) {
                out.push(Violation::OpinionClassMismatch { vertex: vid });
            }
        }
        if !placement_ok {
            return out;
        }

        let mut degree = vec![0usize; n];
        let mut mult = vec![0u32; self.multiplicity.len()];
        for (i, &b) in self.placement.iter().enumerate() {
            let e = EdgeId(i as u32);
            degree[b.u.index()] += 1;
            degree[b.v.index()] += 1;
            mult[self.tri_index(b)] += 1;
            for (side, x) in [b.u, b.v].into_iter().enumerate() {
                let p = self.inc_pos[i][side] as usize;
                if self.incidence[x.index()].get(p) != Some(&e) {
                    out.push(Violation::IncidenceMismatch { edge: e, vertex: x });
                }
            }
        }
        for (v, &d) in degree.iter().enumerate() {
            let stored = self.incidence[v].len();
            if stored != d {
                out.push(Violation::DegreeMismatch {
                    vertex: VertexId(v as u32),
                    stored,
                    actual: d,
                });
            }
        }
        for (b, _) in self.occupied_bonds_union(&mult) {
            let (stored, actual) = (self.multiplicity[self.tri_index(b)], mult[self.tri_index(b)]);
            if stored != actual {
                out.push(Violation::MultiplicityMismatch { bond: b, stored, actual });
            }
        }

        if !self.disagree.is_consistent() {
            out.push(Violation::DisagreeIndexCorrupt);
        }
        for i in 0..self.placement.len() {
            let e = EdgeId(i as u32);
            match (self.edge_disagrees(e), self.disagree.contains(e.0)) {
                (true, false) => out.push(Violation::MissingDisagreeing { edge: e }),
                (false, true) => out.push(Violation::SpuriousDisagreeing { edge: e }),
                _ => {}
            }
        }
        out
    }

    // bonds that are nonzero in either the stored or the recomputed table
    fn occupied_bonds_union<'a>(&'a self, other: &'a [u32]) -> impl Iterator<Item = (Bond, u32)> + 'a {
        let n = self.n;
        (0..n).flat_map(move |u| {
            (u + 1..n).filter_map(move |v| {
                let b = Bond::ordered(VertexId(u as u32), VertexId(v as u32));
                let i = self.tri_index(b);
                (self.multiplicity[i] > 0 || other[i] > 0).then_some((b, other[i]))
            })
        })
    }

    /// Test hook: toggles membership of `e` in the disagreeing-edge index
    /// without touching anything else, leaving the state inconsistent.
    #[doc(hidden)]
    pub fn inject_disagree_fault(&mut self, e: EdgeId) {
        if !self.disagree.remove(e.0) {
            self.disagree.insert(e.0);
        }
    }
}

impl PartialEq for NetState {
    fn eq(&self, other: &Self) -> bool {
        if self.n != other.n
            || self.t != other.t
            || self.opinions != other.opinions
            || self.placement != other.placement
            || self.multiplicity != other.multiplicity
            || self.disagree.len() != other.disagree.len()
            || self.classes[0].len() != other.classes[0].len()
        {
            return false;
        }
        let sorted = |l: &Vec<EdgeId>| {
            let mut l = l.clone();
            l.sort_unstable();
            l
        };
        self.incidence
            .iter()
            .zip(&other.incidence)
            .all(|(a, b)| sorted(a) == sorted(b))
            && self.disagree.iter().all(|e| other.disagree.contains(e))
            && self.classes[0].iter().all(|v| other.classes[0].contains(v))
    }
}
