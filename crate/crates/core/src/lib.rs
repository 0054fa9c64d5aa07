//! Evolving voter model on dense random multigraphs.
//!
//! A population of `n` agents holds binary opinions and is connected by a
//! fixed set of labelled edges that migrate between vertex pairs. When a
//! disagreeing edge is updated, one endpoint (the root) either copies the
//! other's opinion with probability `beta / n`, or detaches the edge and
//! re-attaches it to a freshly drawn vertex. Two re-attachment rules are
//! supported (uniform over all other vertices, or uniform over the root's
//! own opinion class) under three clocks (disagreeing-edge, uniform-edge and
//! continuous time).
//!
//! The crate is organised as:
//!
//! - [`graph`]: the mutable chain state with O(1) edge moves and O(1)
//!   uniform sampling of disagreeing edges.
//! - [`dynamics`]: transition kernels, run drivers and the equivalent
//!   counter-based construction.
//! - [`observables`]: cut statistics, multiplicities, balancedness, degree
//!   extremes, spectral gap, Cheeger constant and the stopping-time monitor.
//! - [`duality`]: random walks on frozen snapshots, mixing and collision
//!   diagnostics, and the product-measure disagreement test.
//! - [`harness`]: reproducible sweeps, scaling fits and the split
//!   experiment.

pub mod duality;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod harness;
pub mod observables;
pub mod selftest;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{Bond, EdgeId, NetState, Opinion, VertexId};
