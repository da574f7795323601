//! Exact exponential-time algorithms for three-way set partitioning, set
//! cover and graph coloring, driven by subset-lattice transforms and
//! Kronecker-structured tensor evaluation.

pub mod arith;
pub mod chromatic;
pub mod error;
pub mod gen;
pub mod graph;
pub mod lattice;
pub mod metrics;
pub mod sets;
pub mod setcover;
pub mod tensor;
pub mod tripartition;

pub use arith::{parse_rational, Rational};
pub use error::{Error, Result};
pub use metrics::{Metrics, MetricsSnapshot};
pub use sets::{BalanceParams, BlockPartition, Mask, SetFamily, Universe};
