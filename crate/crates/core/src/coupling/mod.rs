//! Entropy minimization over the Fréchet class: the greedy construction,
//! its 2x2 closed form, truncation of denumerable laws, exact partition
//! couplings, and the string structure of greedy tables.

mod denumerable;
mod greedy;
mod partition;
mod rearrange;
mod strings;

pub use denumerable::{tail_error_bound, truncate_denumerable, DenumerableFamily, MAX_ATOMS};
pub use greedy::{greedy_min_coupling, greedy_trace, min_entropy_2x2, Exhausted, GreedyStep, GreedyTrace};
pub use partition::{geometric_gap, exact_partition_check, partition_coupling, PartitionWitness, EXHAUSTIVE_CAP};
pub use rearrange::{staircase_rearrangement, trace_rearrangement, Rearrangement};
pub use strings::{decompose_trace, string_decomposition, HorizontalString, StringDecomposition, VerticalString};
