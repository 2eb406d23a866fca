//! Couplings of two discrete marginals and their entropy.
//!
//! The crate builds the canonical members of the Fréchet class of two
//! marginals (the set of joint tables with prescribed row and column sums)
//! and measures them:
//!
//! - [`independence_table`] maximizes joint entropy;
//! - [`cograduation_table`] / [`contrograduation_table`] realize the upper
//!   and lower Fréchet bounds (NW corner rule and its mirror);
//! - [`coupling::greedy_min_coupling`] is the greedy "largest row against
//!   largest column" construction aimed at minimizing joint entropy;
//! - [`oracle`] enumerates the vertices of the transportation polytope to
//!   find the true minimum on small instances;
//! - [`continuous`] discretizes absolutely continuous marginals and tracks
//!   the shifted entropies as the grid is refined.
//!
//! All entropies are in nats.

#![forbid(unsafe_code)]

pub mod continuous;
pub mod coupling;
pub mod oracle;

mod entropy;
mod error;
mod frechet;
mod marginal;
pub mod instances;
pub mod support;
mod sum;
mod table;

pub use entropy::{entropy, entropy_of, entropy_report, joint_entropy, nats_to_bits, EntropyReport};
pub use error::{Error, Result};
pub use frechet::{
    cograduation_table, contrograduation_table, frechet_cell_bounds, independence_table,
    northwest_corner,
};
pub use marginal::{validate_marginal, MarginalDistribution, DEFAULT_TOL};
pub use sum::NeumaierSum;
pub use table::{CouplingTable, Provenance};

pub use coupling::{
    geometric_gap, exact_partition_check, greedy_min_coupling, greedy_trace, min_entropy_2x2,
    partition_coupling, string_decomposition, trace_rearrangement, truncate_denumerable,
    DenumerableFamily, Exhausted, GreedyStep, GreedyTrace, PartitionWitness, Rearrangement,
    StringDecomposition,
};
pub use oracle::{compare_greedy_oracle, enumerate_vertices, grid_min_2x2, oracle_min_entropy, GapRecord, VertexSet};
