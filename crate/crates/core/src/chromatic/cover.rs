use std::sync::Arc;

use crate::arith::{floor_usize, q, qu, Rational};
use crate::error::{Error, Result};
use crate::graph::{independent_set_family, Graph};
use crate::lattice::{list_t_covered, LatticeIndex};
use crate::metrics::Metrics;
use crate::sets::{popcount, three_partitions_of, Mask, SetFamily, Universe};
use crate::tensor::YatesOptions;
use crate::tripartition::{solve_tripartition, DecompositionProvider, TripartitionConfig};

/// Vertex sets of size at most `max_size` inducing a `k`-colorable
/// subgraph, as the sets `k`-covered by independent sets.
pub fn list_colorable_up_to(g: &Graph, k: usize, max_size: usize, metrics: &Metrics) -> Result<SetFamily> {
    let universe = Universe::new(g.n())?;
    let max_size = max_size.min(g.n());
    if k == 0 {
        return SetFamily::new(universe, vec![0]);
    }
    let index = Arc::new(LatticeIndex::bounded(universe, max_size)?);
    let family = independent_set_family(g, max_size)?;
    list_t_covered(&family, index, k, metrics)
}

/// Vertex sets `X` with `|X| ≤ νn` and `G[X]` `k`-colorable, for
/// `0 < ν < 1/2`.
pub fn list_k_colorable_subsets(g: &Graph, k: usize, nu: &Rational, metrics: &Metrics) -> Result<SetFamily> {
    if *nu <= q(0, 1) || *nu >= q(1, 2) {
        return Err(Error::pre(format!("nu must lie in (0, 1/2), got {nu}")));
    }
    list_colorable_up_to(g, k, floor_usize(&(nu * qu(g.n()))), metrics)
}

fn check_nu(nu: &Rational) -> Result<()> {
    if *nu < q(1, 3) || *nu >= q(1, 2) {
        return Err(Error::pre(format!("nu must lie in [1/3, 1/2), got {nu}")));
    }
    Ok(())
}

/// Ordered `(k₁, k₂, k₃)` of positive integers summing to `k` with
/// `k₁ ≤ k₂ ≤ k₃`. Three-way partitioning is symmetric in its families, so
/// the other orders add nothing.
fn sorted_triples(k: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (1..=k / 3).flat_map(move |k1| (k1..=(k - k1) / 2).map(move |k2| (k1, k2, k - k1 - k2)))
}

/// Whether `[n]` splits into three parts of at most `⌊νn⌋` elements, the
/// parts covered by `k₁`, `k₂`, `k₃` members of `F` (`k₁+k₂+k₃ = k`, all
/// positive). Members larger than `⌊νn⌋` cannot take part and are dropped
/// first. Needs `k ≥ 3`; smaller `k` has no such split and gives `false`.
pub fn detect_balanced_k_cover(
    f: &SetFamily,
    k: usize,
    nu: &Rational,
    provider: &dyn DecompositionProvider,
    metrics: &Metrics,
) -> Result<bool> {
    detect_balanced_k_cover_with(f, k, nu, provider, &YatesOptions::default(), metrics)
}

/// [`detect_balanced_k_cover`] with explicit evaluation options.
pub fn detect_balanced_k_cover_with(
    f: &SetFamily,
    k: usize,
    nu: &Rational,
    provider: &dyn DecompositionProvider,
    yates: &YatesOptions,
    metrics: &Metrics,
) -> Result<bool> {
    check_nu(nu)?;
    if k < 3 {
        return Ok(false);
    }
    let n = f.n();
    let s = floor_usize(&(nu * qu(n)));
    let small = f.filtered(|m| popcount(m) <= s);
    if small.is_empty() {
        return Ok(false);
    }
    let index = Arc::new(LatticeIndex::bounded(f.universe(), s)?);
    let mut covered: Vec<Option<SetFamily>> = vec![None; k - 1];
    let cfg = TripartitionConfig { yates: *yates, ..TripartitionConfig::desk(nu.clone(), n) };
    for (k1, k2, k3) in sorted_triples(k) {
        for t in [k1, k2, k3] {
            if covered[t].is_none() {
                covered[t] = Some(list_t_covered(&small, index.clone(), t, metrics)?);
            }
        }
        let fam = |t: usize| covered[t].as_ref().expect("filled above");
        if solve_tripartition(fam(k1), fam(k2), fam(k3), &cfg, provider, metrics)?.found() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Reference for [`detect_balanced_k_cover`]: unions of `t` members are
/// built directly, and every split of `[n]` into three small parts is
/// tried against them. Exponential in `n` with a large base; `n ≤ 12`.
pub fn brute_balanced_k_cover(f: &SetFamily, k: usize, nu: &Rational) -> Result<bool> {
    check_nu(nu)?;
    if k < 3 {
        return Ok(false);
    }
    let n = f.n();
    let s = floor_usize(&(nu * qu(n)));
    let small: Vec<Mask> = f.iter().filter(|&m| popcount(m) <= s).collect();
    // covered[t][X]: X lies inside a union of t members.
    let size = 1usize << n;
    let mut covered = vec![vec![false; size]];
    let mut unions: Vec<Mask> = vec![0];
    for _ in 1..=k - 2 {
        let mut next: Vec<Mask> = unions.iter().flat_map(|&u| small.iter().map(move |&m| u | m)).collect();
        next.sort_unstable();
        next.dedup();
        unions = next;
        let mut row = vec![false; size];
        for x in 0..size as Mask {
            row[x as usize] = unions.iter().any(|&u| x & !u == 0);
        }
        covered.push(row);
    }
    let full = (1u64 << n) - 1;
    for (k1, k2, k3) in sorted_triples(k) {
        for (a, b, c) in three_partitions_of(full) {
            let parts = [a, b, c];
            if parts.iter().all(|&p| popcount(p) <= s) {
                // Any assignment of the counts to the parts will do.
                let counts = [k1, k2, k3];
                let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
                if perms.iter().any(|p| (0..3).all(|i| covered[counts[p[i]]][parts[i] as usize])) {
                    return Ok(true);
                }
            }
        }
    }
    Ok(false)
}
