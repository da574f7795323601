use std::sync::atomic::{AtomicU64, Ordering};

/// Operation counters shared by the solvers.
///
/// Counters are atomics so a `&Metrics` can be threaded through pure
/// functions (and across threads) without `&mut` plumbing.
#[derive(Debug, Default)]
pub struct Metrics {
    pub lattice_ops: AtomicU64,
    pub yates_ops: AtomicU64,
    pub block_balanced_calls: AtomicU64,
    pub tripartition_iterations: AtomicU64,
    pub tripartition_calls: AtomicU64,
    pub oracle_calls: AtomicU64,
    pub mis_listed: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MetricsSnapshot {
    pub lattice_ops: u64,
    pub yates_ops: u64,
    pub block_balanced_calls: u64,
    pub tripartition_iterations: u64,
    pub tripartition_calls: u64,
    pub oracle_calls: u64,
    pub mis_listed: u64,
}

impl MetricsSnapshot {
    pub fn arithmetic_ops(&self) -> u64 {
        self.lattice_ops + self.yates_ops
    }
}

impl Metrics {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub(crate) fn add(counter: &AtomicU64, v: u64) {
        counter.fetch_add(v, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> MetricsSnapshot {
        let get = |c: &AtomicU64| c.load(Ordering::Relaxed);
        MetricsSnapshot {
            lattice_ops: get(&self.lattice_ops),
            yates_ops: get(&self.yates_ops),
            block_balanced_calls: get(&self.block_balanced_calls),
            tripartition_iterations: get(&self.tripartition_iterations),
            tripartition_calls: get(&self.tripartition_calls),
            oracle_calls: get(&self.oracle_calls),
            mis_listed: get(&self.mis_listed),
        }
    }
}
