//! Sparse enumeration of the nonzero entries in a Hamiltonian column.

pub mod circuit;
pub mod index;
pub mod semantic;
pub mod table;

pub use circuit::{circuit_build, circuit_execute, gate_count, GateTally, LogLocalCircuit, OpKind, Snapshot, Step};
pub use index::{selectors, IndexSpace, InteractionSpace, SparsityIndex};
pub use semantic::{
    connected_states, enumerate_semantic, exact_sparsity, index_space_size, Connected, EnumTrace, Enumerator,
    InvalidReason, ZERO_CUTOFF,
};
pub use table::{build_lookup_table, multichoose, selector_count, table_stats, LookupTable};
