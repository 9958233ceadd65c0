//! Persistence over F₂ and exact persistent Betti number queries.

mod components;
mod dense;
mod diagram;
mod reduce;

pub use components::{connected_component_count, ComponentCount, UnionFind};
pub use dense::{kernel_basis, persistent_betti_direct, rank, BitVector, DIRECT_MAX_CELLS};
pub use diagram::{persistent_betti, PersistenceDiagram, PersistencePair, Provenance, RankQuery};
pub(crate) use reduce::zero_after_reduction;
pub use reduce::{reduce, reduce_matrix, reduce_with, BoundaryMatrix, Persistence, ReduceOptions, Reduction};
