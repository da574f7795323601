//! Three-way partitioning: the brute-force oracle, the block-balanced
//! tensor solver, balancing families from pairwise-independent hashing and
//! the reduction that ties them together.

mod balancing;
mod hash;
mod solver;

pub use balancing::{build_balancing_family, choose_block_count, required_block_size, BalancingFamily};
pub use hash::{chebyshev_check, ChebyshevCheck, HashFamily};
pub use solver::{
    brute_tripartition, filter_block_balanced, solve_block_balanced, solve_block_balanced_with, solve_tripartition,
    DecompositionProvider, FileProvider, Provided, TripartitionConfig, TripartitionOutcome, TrivialProvider,
};
