use super::hash::HashFamily;
use crate::arith::{floor_usize, is_prime, q, qu, Rational};
use crate::error::{Error, Result};
use crate::sets::{is_balanced_onto, popcount, BalanceParams, BlockPartition, Mask, Universe};

/// Block partitions `B_{(h,Q)}` with fault block `∪_{j∈Q} h^{-1}(j)`.
#[derive(Debug, Clone)]
pub struct BalancingFamily {
    pub params: BalanceParams,
    /// Ideal block size `n/r`.
    pub b: Rational,
    pub hash: HashFamily,
    pub partitions: Vec<BlockPartition>,
    /// Members dropped for violating `|B₀| ≤ δn` or `|B_i| ∈ (1±δ)n/r`.
    pub dropped_structural: usize,
    /// Members dropped because an earlier member had the same blocks.
    pub dropped_duplicate: usize,
}

/// `r` prime with `n/r ∈ [b', 2b']`, the largest such. `r = 1` is accepted
/// when `b' ≤ n ≤ 2b'`.
pub fn choose_block_count(n: usize, b_prime: &Rational) -> Result<usize> {
    let nq = qu(n);
    let lo = &nq / (b_prime * qu(2));
    let hi = &nq / b_prime;
    let top = floor_usize(&hi).min(n);
    for r in (1..=top).rev() {
        let rq = qu(r);
        if rq < lo {
            break;
        }
        if r == 1 || is_prime(r as u64) {
            return Ok(r);
        }
    }
    Err(Error::NoAdmissiblePrime { lo: lo.to_string(), hi: hi.to_string() })
}

/// `3δ⁻³(1−2ν)⁻²`, the block size the covering argument asks for.
pub fn required_block_size(delta: &Rational, nu: &Rational) -> Rational {
    let kappa = qu(1) - nu * qu(2);
    qu(3) / (delta * delta * delta * &kappa * &kappa)
}

/// Subsets of `{0, …, r−1}` with at most `max` elements, by size then in
/// lexicographic order of their sorted element lists.
fn small_subsets(r: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for size in 1..=max.min(r) {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            out.push(combo.clone());
            let Some(i) = (0..size).rev().find(|&i| combo[i] < r - size + i) else { break };
            combo[i] += 1;
            for j in i + 1..size {
                combo[j] = combo[j - 1] + 1;
            }
        }
    }
    out
}

pub fn build_balancing_family(
    n: usize,
    delta: &Rational,
    nu: &Rational,
    b_prime: &Rational,
    force_small: bool,
) -> Result<BalancingFamily> {
    let universe = Universe::new(n)?;
    crate::arith::require_positive("delta", delta)?;
    crate::arith::require_positive("b'", b_prime)?;
    if *nu >= q(1, 2) || *nu <= q(0, 1) {
        return Err(Error::pre(format!("nu must lie in (0, 1/2), got {nu}")));
    }
    if !force_small {
        let need = required_block_size(delta, nu);
        if *b_prime < need {
            return Err(Error::pre(format!(
                "b' = {b_prime} is below 3δ⁻³(1−2ν)⁻² = {need}; pass force_small to run at this size"
            )));
        }
    }
    let r = choose_block_count(n, b_prime)?;
    let hash = HashFamily::new(n, r)?;
    let b = qu(n) / qu(r);
    let params = BalanceParams { delta: delta.clone(), r, nu: nu.clone(), force_small };
    let fault_cap = delta * qu(n);
    let lo = (qu(1) - delta) * &b;
    let hi = (qu(1) + delta) * &b;
    let qs = small_subsets(r, floor_usize(&(delta * qu(r))));

    let mut partitions: Vec<BlockPartition> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let (mut dropped_structural, mut dropped_duplicate) = (0, 0);
    for (a, bb) in hash.members() {
        let pre = hash.preimages(a, bb);
        for qset in &qs {
            let fault: Mask = qset.iter().fold(0, |acc, &j| acc | pre[j]);
            let rest: Vec<Mask> = (0..r).filter(|j| !qset.contains(j)).map(|j| pre[j]).collect();
            let sizes_ok = rest.iter().all(|&m| {
                let s = qu(popcount(m));
                lo <= s && s <= hi
            });
            let blocks: Vec<Mask> = rest.into_iter().filter(|&m| m != 0).collect();
            if qu(popcount(fault)) > fault_cap || !sizes_ok || blocks.is_empty() {
                dropped_structural += 1;
                continue;
            }
            let mut key = blocks.clone();
            key.sort_unstable();
            if !seen.insert((fault, key)) {
                dropped_duplicate += 1;
                continue;
            }
            partitions.push(BlockPartition::new(universe, fault, blocks)?);
        }
    }
    Ok(BalancingFamily { params, b, hash, partitions, dropped_structural, dropped_duplicate })
}

impl BalancingFamily {
    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    /// Upper bound `p² · Σ_{q ≤ ⌊δr⌋} C(r, q)` on the construction loop.
    pub fn construction_bound(&self) -> u128 {
        let r = self.params.r;
        let qmax = floor_usize(&(&self.params.delta * qu(r)));
        let p = self.hash.p() as u128;
        p * p * (0..=qmax.min(r)).map(|k| crate::arith::binomial(r, k)).sum::<u128>()
    }

    /// First member under which every part of `parts` is balanced onto every
    /// non-fault block.
    pub fn find_balanced(&self, parts: &[Mask]) -> Option<usize> {
        let (delta, r) = (&self.params.delta, self.params.r);
        self.partitions
            .iter()
            .position(|bp| bp.blocks().iter().all(|&blk| parts.iter().all(|&a| is_balanced_onto(a, blk, delta, r))))
    }

    /// [`find_balanced`](Self::find_balanced) with the balance intervals
    /// precomputed as integer bounds per part size.
    fn find_balanced_in(&self, bounds: &[(usize, usize)], parts: &[Mask]) -> Option<usize> {
        self.partitions.iter().position(|bp| {
            bp.blocks().iter().all(|&blk| {
                parts.iter().all(|&a| {
                    let (lo, hi) = bounds[popcount(a)];
                    (lo..=hi).contains(&popcount(a & blk))
                })
            })
        })
    }

    /// `[⌈(1−δ)m/r⌉, ⌊(1+δ)m/r⌋]` for `m = 0..=n`; empty ranges come out as
    /// `lo > hi`.
    fn meet_bounds(&self) -> Vec<(usize, usize)> {
        let r = qu(self.params.r);
        (0..=self.hash.n())
            .map(|m| {
                let lo = (qu(1) - &self.params.delta) * qu(m) / &r;
                let hi = (qu(1) + &self.params.delta) * qu(m) / &r;
                let lo = if lo <= q(0, 1) { 0 } else { crate::arith::ceil_usize(&lo) };
                (lo, floor_usize(&hi))
            })
            .collect()
    }

    /// Checks the covering property over every ordered tripartition of `[n]`
    /// into ν-bounded parts; returns the first uncovered one.
    pub fn verify_covering(&self) -> std::result::Result<usize, [Mask; 3]> {
        let universe = self.hash.n();
        let full: Mask = (1u64 << universe) - 1;
        let cap = floor_usize(&(&self.params.nu * qu(universe)));
        let bounds = self.meet_bounds();
        let mut checked = 0;
        for (a1, a2, a3) in crate::sets::three_partitions_of(full) {
            if popcount(a1) > cap || popcount(a2) > cap || popcount(a3) > cap {
                continue;
            }
            if self.find_balanced_in(&bounds, &[a1, a2, a3]).is_none() {
                return Err([a1, a2, a3]);
            }
            checked += 1;
        }
        Ok(checked)
    }
}
