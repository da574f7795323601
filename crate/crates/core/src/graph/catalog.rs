//! All graphs on a few vertices up to isomorphism.
//!
//! Graphs on `n` vertices are grown from those on `n − 1` by adding a vertex
//! of minimum degree (every graph has one, so nothing is missed) and
//! deduplicated by a canonical form: the largest upper-triangle adjacency
//! word over the leaves of an individualize-and-refine search.

use rustc_hash::FxHashSet;

use super::Graph;
use crate::error::{Error, Result};

/// Number of isomorphism classes of graphs on `n` vertices, `n = 0..=9`.
pub const CATALOG_COUNTS: [usize; 10] = [1, 1, 2, 4, 11, 34, 156, 1044, 12346, 274668];

const MAX_N: usize = 9;

type Adj = [u16; MAX_N];

/// Bit index of the pair `i < j` in the canonical word.
#[inline]
fn pair_bit(i: usize, j: usize) -> usize {
    j * (j - 1) / 2 + i
}

fn word(adj: &Adj, order: &[usize]) -> u64 {
    let mut w = 0u64;
    for j in 1..order.len() {
        for i in 0..j {
            if adj[order[i]] >> order[j] & 1 == 1 {
                w |= 1 << pair_bit(i, j);
            }
        }
    }
    w
}

/// Refines an ordered partition (cells as vertex masks) until every cell is
/// equitable: all its vertices have the same number of neighbours in every
/// cell. Split pieces are ordered by that count, which keeps the result
/// independent of vertex labels.
fn refine(adj: &Adj, cells: &mut Vec<u16>) {
    'outer: loop {
        for w in 0..cells.len() {
            let splitter = cells[w];
            for c in 0..cells.len() {
                let cell = cells[c];
                if cell.count_ones() < 2 {
                    continue;
                }
                let mut by_count = [0u16; MAX_N + 1];
                let mut bits = cell;
                while bits != 0 {
                    let v = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    by_count[(adj[v] & splitter).count_ones() as usize] |= 1 << v;
                }
                let pieces: Vec<u16> = by_count.iter().copied().filter(|&m| m != 0).collect();
                if pieces.len() > 1 {
                    cells.splice(c..=c, pieces);
                    continue 'outer;
                }
            }
        }
        return;
    }
}

fn search(adj: &Adj, cells: Vec<u16>, best: &mut u64) {
    let Some(target) = cells.iter().position(|c| c.count_ones() > 1) else {
        let order: Vec<usize> = cells.iter().map(|c| c.trailing_zeros() as usize).collect();
        *best = (*best).max(word(adj, &order));
        return;
    };
    let cell = cells[target];
    // Twins in one cell are swapped by an automorphism that fixes the
    // partition, so one representative per twin class suffices.
    let mut done: u16 = 0;
    let mut bits = cell;
    while bits != 0 {
        let v = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        if done >> v & 1 == 1 {
            continue;
        }
        let mut twins = 0u16;
        let mut rest = cell;
        while rest != 0 {
            let u = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if adj[u] & !(1 << v) == adj[v] & !(1 << u) {
                twins |= 1 << u;
            }
        }
        done |= twins;
        let mut next = cells.clone();
        next.splice(target..=target, [1u16 << v, cell & !(1 << v)]);
        refine(adj, &mut next);
        search(adj, next, best);
    }
}

fn canonical_word(adj: &Adj, n: usize) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut cells = vec![((1u32 << n) - 1) as u16];
    refine(adj, &mut cells);
    let mut best = 0;
    search(adj, cells, &mut best);
    best
}

fn from_word(w: u64, n: usize) -> Adj {
    let mut adj = [0u16; MAX_N];
    for j in 1..n {
        for i in 0..j {
            if w >> pair_bit(i, j) & 1 == 1 {
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
            }
        }
    }
    adj
}

fn words(n: usize) -> Vec<u64> {
    let mut level = vec![0u64];
    for m in 1..=n {
        let mut seen = FxHashSet::default();
        let mut next = Vec::new();
        for &w in &level {
            let base = from_word(w, m - 1);
            for nb in 0u16..(1 << (m - 1)) {
                let d = nb.count_ones();
                let mut adj = base;
                adj[m - 1] = nb;
                for u in 0..m - 1 {
                    if nb >> u & 1 == 1 {
                        adj[u] |= 1 << (m - 1);
                    }
                }
                if (0..m - 1).any(|u| adj[u].count_ones() < d) {
                    continue;
                }
                let c = canonical_word(&adj, m);
                if seen.insert(c) {
                    next.push(c);
                }
            }
        }
        next.sort_unstable();
        level = next;
    }
    level
}

/// One representative of every isomorphism class of graphs on `n`
/// vertices, `1 ≤ n ≤ 9`, in a fixed order.
pub fn graph_catalog(n: usize) -> Result<Vec<Graph>> {
    if n == 0 || n > MAX_N {
        return Err(Error::param(format!("graph catalog covers 1..={MAX_N} vertices, got {n}")));
    }
    Ok(words(n)
        .into_iter()
        .map(|w| {
            let adj = from_word(w, n);
            let mut g = Graph::new(n).expect("n in range");
            for u in 0..n {
                for v in u + 1..n {
                    if adj[u] >> v & 1 == 1 {
                        g.add_edge(u + 1, v + 1).expect("valid edge");
                    }
                }
            }
            g
        })
        .collect())
}
