use std::ops::ControlFlow;

use super::Graph;
use crate::error::Result;
use crate::sets::{element_bit, elements, popcount, Mask, SetFamily, Universe};

/// Non-neighbours of `v` inside `within`, excluding `v`.
#[inline]
fn others(g: &Graph, v: usize, within: Mask) -> Mask {
    within & !g.neighbours(v) & !element_bit(v)
}

struct Enumerator<'a, F> {
    g: &'a Graph,
    within: Mask,
    lo: usize,
    hi: usize,
    emit: F,
}

impl<F: FnMut(Mask) -> ControlFlow<()>> Enumerator<'_, F> {
    // Bron–Kerbosch on the complement of G[within], with pivoting.
    fn run(&mut self, r: Mask, mut p: Mask, mut x: Mask) -> ControlFlow<()> {
        if p == 0 && x == 0 {
            let size = popcount(r);
            if (self.lo..=self.hi).contains(&size) {
                return (self.emit)(r);
            }
            return ControlFlow::Continue(());
        }
        // Every maximal set below this node has size in [|R|, |R|+|P|].
        if popcount(r) > self.hi || popcount(r) + popcount(p) < self.lo {
            return ControlFlow::Continue(());
        }
        let pivot = elements(p | x)
            .max_by(|&a, &b| {
                popcount(p & others(self.g, a, self.within))
                    .cmp(&popcount(p & others(self.g, b, self.within)))
                    .then(b.cmp(&a))
            })
            .expect("p | x is nonempty");
        for v in elements(p & !others(self.g, pivot, self.within)) {
            let nv = others(self.g, v, self.within);
            self.run(r | element_bit(v), p & nv, x & nv)?;
            p &= !element_bit(v);
            x |= element_bit(v);
        }
        ControlFlow::Continue(())
    }
}

/// Calls `emit` on every maximal independent set of `G[within]` whose size
/// lies in `lo..=hi`, each exactly once. `emit` may stop the enumeration by
/// returning `Break`.
///
/// The pivot is the vertex of `P ∪ X` with the most non-neighbours in `P`,
/// lowest index on ties.
pub fn for_each_mis(
    g: &Graph,
    within: Mask,
    lo: usize,
    hi: usize,
    emit: impl FnMut(Mask) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let within = within & g.full();
    let mut e = Enumerator { g, within, lo, hi, emit };
    e.run(0, within, 0)
}

/// All maximal independent sets of `G`, in enumeration order.
pub fn maximal_independent_sets(g: &Graph) -> Vec<Mask> {
    mis_in_window(g, g.full(), 0, g.n())
}

/// Maximal independent sets of `G[within]` with size in `lo..=hi`.
pub fn mis_in_window(g: &Graph, within: Mask, lo: usize, hi: usize) -> Vec<Mask> {
    let mut out = Vec::new();
    let _ = for_each_mis(g, within, lo, hi, |m| {
        out.push(m);
        ControlFlow::Continue(())
    });
    out
}

/// Size of a largest independent set of `G`.
pub fn alpha(g: &Graph) -> usize {
    alpha_within(g, g.full())
}

/// Size of a largest independent set of `G[within]`, by branch and bound.
pub fn alpha_within(g: &Graph, within: Mask) -> usize {
    fn go(g: &Graph, p: Mask, cur: usize, best: &mut usize) {
        if p == 0 {
            *best = (*best).max(cur);
            return;
        }
        if cur + popcount(p) <= *best {
            return;
        }
        let deg = |v: usize| popcount(g.neighbours(v) & p);
        let low = elements(p).min_by_key(|&v| deg(v)).expect("p nonempty");
        if deg(low) <= 1 {
            // Some maximum independent set contains a vertex of degree ≤ 1.
            go(g, p & !g.neighbours(low) & !element_bit(low), cur + 1, best);
            return;
        }
        let high = elements(p).max_by_key(|&v| (deg(v), std::cmp::Reverse(v))).expect("p nonempty");
        go(g, p & !g.neighbours(high) & !element_bit(high), cur + 1, best);
        go(g, p & !element_bit(high), cur, best);
    }
    let mut best = 0;
    go(g, within & g.full(), 0, &mut best);
    best
}

/// Independent sets of size at most `max_size`, in increasing mask order.
pub fn independent_set_family(g: &Graph, max_size: usize) -> Result<SetFamily> {
    let universe = Universe::new(g.n())?;
    let mut out = Vec::new();
    fn go(g: &Graph, cur: Mask, allowed: Mask, left: usize, out: &mut Vec<Mask>) {
        out.push(cur);
        if left == 0 {
            return;
        }
        for v in elements(allowed) {
            // Only extend by vertices above v afterwards so each set appears once.
            let above = allowed & !((element_bit(v) << 1) - 1);
            go(g, cur | element_bit(v), above & !g.neighbours(v), left - 1, out);
        }
    }
    go(g, 0, g.full(), max_size, &mut out);
    out.sort_unstable();
    SetFamily::new(universe, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::submasks;
    use proptest::prelude::*;

    fn brute_mis(g: &Graph) -> Vec<Mask> {
        let full = g.full();
        let mut v: Vec<Mask> = submasks(full).filter(|&m| g.is_maximal_independent_within(m, full)).collect();
        v.sort_unstable();
        v
    }

    fn graph_from_bits(n: usize, bits: u64) -> Graph {
        let mut g = Graph::new(n).unwrap();
        let mut k = 0;
        for u in 1..=n {
            for v in u + 1..=n {
                if bits >> (k % 64) & 1 == 1 {
                    g.add_edge(u, v).unwrap();
                }
                k += 1;
            }
        }
        g
    }

    #[test]
    fn mis_examples() {
        let empty = Graph::new(5).unwrap();
        assert_eq!(maximal_independent_sets(&empty), vec![0b11111]);
        let k3 = Graph::complete(3).unwrap();
        let two = k3.disjoint_union(&k3).unwrap();
        assert_eq!(maximal_independent_sets(&two).len(), 9);
        let c5 = Graph::cycle(5).unwrap();
        let mut got = maximal_independent_sets(&c5);
        got.sort_unstable();
        assert_eq!(got.len(), 5);
        assert!(got.iter().all(|&m| popcount(m) == 2));
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha(&Graph::complete(6).unwrap()), 1);
        assert_eq!(alpha(&Graph::cycle(5).unwrap()), 2);
        assert_eq!(alpha(&Graph::petersen()), 4);
        assert_eq!(alpha(&Graph::new(7).unwrap()), 7);
    }

    #[test]
    fn independent_set_family_examples() {
        let k3 = Graph::complete(3).unwrap();
        assert_eq!(independent_set_family(&k3, 3).unwrap().members(), &[0, 1, 2, 4]);
        assert_eq!(independent_set_family(&Graph::new(4).unwrap(), 2).unwrap().len(), 11);
        assert_eq!(independent_set_family(&Graph::cycle(4).unwrap(), 4).unwrap().len(), 7);
    }

    #[test]
    fn window_filters_by_size() {
        let g = Graph::cycle(7).unwrap();
        let all = maximal_independent_sets(&g);
        let win = mis_in_window(&g, g.full(), 3, 3);
        assert_eq!(win.len(), all.iter().filter(|&&m| popcount(m) == 3).count());
        assert!(!win.is_empty());
    }

    #[test]
    fn early_stop() {
        let g = Graph::new(4).unwrap().disjoint_union(&Graph::complete(4).unwrap()).unwrap();
        let mut seen = 0;
        let flow = for_each_mis(&g, g.full(), 0, 8, |_| {
            seen += 1;
            ControlFlow::Break(())
        });
        assert_eq!(flow, ControlFlow::Break(()));
        assert_eq!(seen, 1);
    }

    proptest! {
        #[test]
        fn mis_match_brute(n in 1usize..=10, bits in any::<u64>()) {
            let g = graph_from_bits(n, bits);
            let mut got = maximal_independent_sets(&g);
            prop_assert!(got.iter().all(|&m| g.is_maximal_independent_within(m, g.full())));
            got.sort_unstable();
            prop_assert_eq!(got, brute_mis(&g));
        }

        #[test]
        fn mis_within_subset(n in 2usize..=9, bits in any::<u64>(), within in any::<u64>()) {
            let g = graph_from_bits(n, bits);
            let within = within & g.full();
            let mut got = mis_in_window(&g, within, 0, n);
            got.sort_unstable();
            let mut want: Vec<Mask> = submasks(within).filter(|&m| g.is_maximal_independent_within(m, within)).collect();
            want.sort_unstable();
            prop_assert_eq!(got, want);
        }

        #[test]
        fn alpha_matches_brute(n in 1usize..=12, bits in any::<u64>()) {
            let g = graph_from_bits(n, bits);
            let want = submasks(g.full()).filter(|&m| g.is_independent(m)).map(popcount).max().unwrap();
            prop_assert_eq!(alpha(&g), want);
        }

        #[test]
        fn independent_family_matches_brute(n in 1usize..=10, bits in any::<u64>(), k in 0usize..=10) {
            let g = graph_from_bits(n, bits);
            let want: Vec<Mask> = submasks(g.full()).filter(|&m| g.is_independent(m) && popcount(m) <= k).collect();
            let mut want = want;
            want.sort_unstable();
            let fam = independent_set_family(&g, k).unwrap();
            prop_assert_eq!(fam.members(), &want[..]);
        }
    }
}
