//! Seeded fixtures shared by the benchmarks.

use std::sync::Arc;

use arcolor_core::arith::qi;
use arcolor_core::gen::{planted_tripartition, random_graph, rng_from_seed, TripartitionInstance};
use arcolor_core::graph::Graph;
use arcolor_core::lattice::{LatticeIndex, LatticeVector};
use arcolor_core::{Rational, Universe};

/// `G(n, 1/2)`.
pub fn graph(n: usize, seed: u64) -> Graph {
    random_graph(n, 0.5, &mut rng_from_seed(seed)).expect("valid size")
}

/// Small integers in `[-6, 6]`, varied by position.
pub fn values(len: usize, salt: u64) -> Vec<Rational> {
    (0..len as u64).map(|i| qi(((i * 7919 + salt * 31) % 13) as i64 - 6)).collect()
}

/// A vector over the full power set of `[n]`.
pub fn lattice_vector(n: usize) -> LatticeVector {
    let index = Arc::new(LatticeIndex::full(Universe::new(n).expect("valid size")).expect("small universe"));
    let len = index.len();
    LatticeVector::new(index, values(len, n as u64)).expect("matching length")
}

/// Planted three-way partitioning with `ν = 5/12`.
pub fn planted(n: usize, seed: u64) -> TripartitionInstance {
    planted_tripartition(n, &arcolor_core::arith::q(5, 12), 6, &mut rng_from_seed(seed)).expect("splittable size")
}
