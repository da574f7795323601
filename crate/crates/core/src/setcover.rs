//! Set cover with small sets: when every set has at most `δn` elements for
//! some `δ < 1/4`, every cover splits into three groups of roughly a third
//! of the universe each, so three-way partitioning decides coverability.

use crate::arith::{q, qu, Rational};
use crate::chromatic::detect_balanced_k_cover;
use crate::error::{Error, Result};
use crate::metrics::Metrics;
use crate::sets::{popcount, SetFamily};
use crate::tripartition::DecompositionProvider;

/// Can `[n]` be covered by `t` members of `family`, all of size `≤ δn`?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverInstance {
    pub family: SetFamily,
    pub t: usize,
    pub delta: Rational,
}

impl CoverInstance {
    pub fn new(family: SetFamily, t: usize, delta: Rational) -> Self {
        Self { family, t, delta }
    }

    pub fn is_delta_bounded(&self) -> bool {
        let n = qu(self.family.n());
        self.family.iter().all(|m| qu(popcount(m)) <= &self.delta * &n)
    }
}

/// `κ = (1/2 − 2δ)/3`.
pub fn kappa(delta: &Rational) -> Rational {
    (q(1, 2) - delta * qu(2)) / qu(3)
}

fn check_delta(delta: &Rational) -> Result<()> {
    if *delta <= q(0, 1) || *delta >= q(1, 4) {
        return Err(Error::param(format!(
            "delta must lie in (0, 1/4), got {delta}; at 1/4 the singletons of [4] already have no balanced cover"
        )));
    }
    Ok(())
}

/// Splits weights summing to 1, each at most `δ < 1/4`, into three index
/// groups of total weight at most `1/2 − κ`: the first group takes items in
/// order until the next would exceed the bound, then the second, and the
/// third takes the rest.
pub fn greedy_real_partition(a: &[Rational], delta: &Rational) -> Result<[Vec<usize>; 3]> {
    check_delta(delta)?;
    if a.iter().any(|x| *x < q(0, 1) || x > delta) {
        return Err(Error::pre(format!("every weight must lie in [0, {delta}]")));
    }
    let total: Rational = a.iter().sum();
    if total != q(1, 1) {
        return Err(Error::pre(format!("weights must sum to 1, got {total}")));
    }
    let bound = q(1, 2) - kappa(delta);
    let mut parts: [Vec<usize>; 3] = Default::default();
    let mut part = 0;
    let mut sum = q(0, 1);
    for (i, x) in a.iter().enumerate() {
        if part < 2 && &sum + x > bound {
            part += 1;
            sum = q(0, 1);
        }
        sum += x;
        parts[part].push(i);
    }
    Ok(parts)
}

/// Decides `inst` through a `(1/2 − κ)`-balanced `t`-cover search over the
/// family.
pub fn solve_setcover(inst: &CoverInstance, provider: &dyn DecompositionProvider, metrics: &Metrics) -> Result<bool> {
    check_delta(&inst.delta)?;
    if !inst.is_delta_bounded() {
        return Err(Error::pre(format!("family has a member larger than {}·n", inst.delta)));
    }
    let n = inst.family.n();
    // Each set covers fewer than n/4 elements, so three never suffice, and
    // a minimal cover never needs more than n sets.
    if inst.t <= 3 {
        return Ok(false);
    }
    let t = inst.t.min(n);
    detect_balanced_k_cover(&inst.family, t, &(q(1, 2) - kappa(&inst.delta)), provider, metrics)
}

/// Reference: layers of unions of up to `t` members.
pub fn brute_setcover(family: &SetFamily, t: usize) -> bool {
    let full = family.universe().full();
    let mut reached = vec![false; 1usize << family.n()];
    reached[0] = true;
    let mut layer = vec![0u64];
    for _ in 0..t {
        let mut next = Vec::new();
        for &u in &layer {
            for m in family.iter() {
                let v = u | m;
                if !reached[v as usize] {
                    reached[v as usize] = true;
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        layer = next;
    }
    reached[full as usize]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::{Mask, Universe};
    use crate::tripartition::TrivialProvider;
    use proptest::prelude::*;

    fn solve(family: &SetFamily, t: usize, delta: Rational) -> Result<bool> {
        solve_setcover(&CoverInstance::new(family.clone(), t, delta), &TrivialProvider::new(), &Metrics::new())
    }

    fn pairs(n: usize) -> SetFamily {
        let mut members = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                members.push(1u64 << i | 1 << j);
            }
        }
        SetFamily::new(Universe::new(n).unwrap(), members).unwrap()
    }

    #[test]
    fn greedy_examples() {
        let fifths = vec![q(1, 5); 5];
        assert_eq!(kappa(&q(1, 5)), q(1, 30));
        let parts = greedy_real_partition(&fifths, &q(1, 5)).unwrap();
        assert_eq!(parts, [vec![0, 1], vec![2, 3], vec![4]]);
        let eighths = vec![q(1, 8); 8];
        let parts = greedy_real_partition(&eighths, &q(1, 8)).unwrap();
        let bound = q(1, 2) - kappa(&q(1, 8));
        assert!(parts.iter().all(|p| qu(p.len()) * q(1, 8) <= bound));
        assert!(greedy_real_partition(&[q(1, 3), q(1, 3), q(1, 3)], &q(1, 3)).is_err());
        assert!(greedy_real_partition(&vec![q(1, 5); 4], &q(1, 5)).is_err());
    }

    #[test]
    fn singletons_of_four_are_rejected() {
        let u = Universe::new(4).unwrap();
        let f = SetFamily::new(u, vec![1, 2, 4, 8]).unwrap();
        assert!(solve(&f, 4, q(1, 4)).is_err());
        assert!(brute_setcover(&f, 4));
    }

    #[test]
    fn pairs_of_nine() {
        let f = pairs(9);
        assert!(solve(&f, 5, q(2, 9)).unwrap());
        assert!(!solve(&f, 4, q(2, 9)).unwrap());
        assert!(brute_setcover(&f, 5) && !brute_setcover(&f, 4));
    }

    #[test]
    fn brute_edge_cases() {
        let u = Universe::new(3).unwrap();
        assert!(!brute_setcover(&SetFamily::new(u, vec![7]).unwrap(), 0));
        assert!(brute_setcover(&SetFamily::new(u, vec![7]).unwrap(), 1));
        assert!(!brute_setcover(&SetFamily::empty(u), 3));
    }

    #[test]
    fn unbounded_family_is_rejected() {
        let u = Universe::new(8).unwrap();
        let f = SetFamily::new(u, vec![0b111]).unwrap();
        assert!(solve(&f, 4, q(1, 5)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn greedy_respects_bound(den in 5i64..=40, raw in prop::collection::vec(1u32..=6, 1..60)) {
            // Weights above δ are cut into pieces of at most δ.
            let delta = q(1, 4) - q(1, den * 4);
            let total: u32 = raw.iter().sum();
            let mut a: Vec<Rational> = Vec::new();
            for &r in &raw {
                let mut w = q(r as i64, total as i64);
                while w > delta {
                    a.push(delta.clone());
                    w -= &delta;
                }
                a.push(w);
            }
            let parts = greedy_real_partition(&a, &delta).unwrap();
            let bound = q(1, 2) - kappa(&delta);
            let mut seen: Vec<usize> = parts.concat();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..a.len()).collect::<Vec<_>>());
            for p in &parts {
                let s: Rational = p.iter().map(|&i| a[i].clone()).sum();
                prop_assert!(s <= bound);
            }
        }

        #[test]
        fn solver_matches_brute(n in 4usize..=10, raw in prop::collection::vec(any::<u64>(), 0..12), t in 0usize..=7, dpick in 0usize..2) {
            let u = Universe::new(n).unwrap();
            let delta = [q(1, 5), q(6, 25)][dpick].clone();
            let cap = (&delta * qu(n)).floor().to_integer();
            let cap: usize = cap.try_into().unwrap();
            let members: Vec<Mask> = raw.iter()
                .map(|m| {
                    let mut m = m & u.full();
                    while popcount(m) > cap {
                        m &= m - 1;
                    }
                    m
                })
                .collect();
            let f = SetFamily::new(u, members).unwrap();
            prop_assert_eq!(solve(&f, t, delta).unwrap(), brute_setcover(&f, t));
        }

        #[test]
        fn adding_a_set_keeps_true(n in 4usize..=9, raw in prop::collection::vec(any::<u64>(), 1..10), extra in any::<u64>(), t in 4usize..=7) {
            let u = Universe::new(n).unwrap();
            let delta = q(6, 25);
            let cap: usize = (&delta * qu(n)).floor().to_integer().try_into().unwrap();
            let shrink = |mut m: Mask| {
                m &= u.full();
                while popcount(m) > cap {
                    m &= m - 1;
                }
                m
            };
            let members: Vec<Mask> = raw.iter().map(|&m| shrink(m)).collect();
            let f = SetFamily::new(u, members.clone()).unwrap();
            let mut more = members;
            more.push(shrink(extra));
            let g = SetFamily::new(u, more).unwrap();
            if solve(&f, t, delta.clone()).unwrap() {
                prop_assert!(solve(&g, t, delta).unwrap());
            }
        }
    }
}
