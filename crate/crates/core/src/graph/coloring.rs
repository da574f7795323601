use std::ops::ControlFlow;

use super::mis::for_each_mis;
use super::Graph;
use crate::sets::{element_bit, elements, popcount, Mask};

/// A proper 2-coloring `(side0, side1)` of `G[within]`, found by BFS
/// layering from the lowest uncolored vertex, or `None` when `G[within]` has
/// an odd cycle.
pub fn bipartition_within(g: &Graph, within: Mask) -> Option<(Mask, Mask)> {
    let within = within & g.full();
    let (mut side0, mut side1) = (0, 0);
    let mut left = within;
    while left != 0 {
        let start = left.trailing_zeros() as usize + 1;
        let mut frontier = element_bit(start);
        let mut parity = false;
        while frontier != 0 {
            if parity {
                side1 |= frontier;
            } else {
                side0 |= frontier;
            }
            left &= !frontier;
            let mut next = 0;
            for v in elements(frontier) {
                next |= g.neighbours(v) & within;
            }
            let same = if parity { side1 } else { side0 };
            if next & same != 0 {
                return None;
            }
            frontier = next & left;
            parity = !parity;
        }
    }
    Some((side0, side1))
}

/// A 2-coloring as a per-vertex color vector (`0` or `1`), if one exists.
pub fn is_bipartite(g: &Graph) -> Option<Vec<usize>> {
    let (_, side1) = bipartition_within(g, g.full())?;
    Some((1..=g.n()).map(|v| usize::from(side1 & element_bit(v) != 0)).collect())
}

/// Swappable 3- and 4-colorability subroutines on induced subgraphs.
pub trait ColoringEngine: Send + Sync {
    fn name(&self) -> &str;
    fn three_colorable(&self, g: &Graph, within: Mask) -> bool;
    fn four_colorable(&self, g: &Graph, within: Mask) -> bool;
}

/// `G` is 3-colorable iff some maximal independent set leaves a bipartite
/// remainder, and 4-colorable iff some maximal independent set leaves a
/// 3-colorable one.
#[derive(Debug, Clone, Copy, Default)]
pub struct MisReduction;

impl ColoringEngine for MisReduction {
    fn name(&self) -> &str {
        "mis-reduction"
    }

    fn three_colorable(&self, g: &Graph, within: Mask) -> bool {
        let within = within & g.full();
        for_each_mis(g, within, 0, 64, |x| {
            if bipartition_within(g, within & !x).is_some() {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })
        .is_break()
    }

    fn four_colorable(&self, g: &Graph, within: Mask) -> bool {
        let within = within & g.full();
        for_each_mis(g, within, 0, 64, |x| {
            if self.three_colorable(g, within & !x) {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })
        .is_break()
    }
}

pub fn three_colorable(g: &Graph) -> bool {
    MisReduction.three_colorable(g, g.full())
}

pub fn four_colorable(g: &Graph) -> bool {
    MisReduction.four_colorable(g, g.full())
}

/// A proper coloring of `G[within]` with colors `0..k` (indexed by vertex − 1;
/// vertices outside `within` get `usize::MAX`), found by backtracking over
/// vertices in decreasing degree order.
pub fn color_brute(g: &Graph, within: Mask, k: usize) -> Option<Vec<usize>> {
    let within = within & g.full();
    let mut order: Vec<usize> = elements(within).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(popcount(g.neighbours(v) & within)), v));
    let mut colour = vec![usize::MAX; g.n()];
    // classes[c] = vertices currently colored c.
    let mut classes = vec![0 as Mask; k];
    fn go(g: &Graph, order: &[usize], i: usize, used: usize, colour: &mut [usize], classes: &mut [Mask]) -> bool {
        let Some(&v) = order.get(i) else { return true };
        let k = classes.len();
        // Colors above `used` are interchangeable, so only the first is tried.
        for c in 0..k.min(used + 1) {
            if classes[c] & g.neighbours(v) == 0 {
                classes[c] |= element_bit(v);
                colour[v - 1] = c;
                if go(g, order, i + 1, used.max(c + 1), colour, classes) {
                    return true;
                }
                classes[c] &= !element_bit(v);
            }
        }
        colour[v - 1] = usize::MAX;
        false
    }
    go(g, &order, 0, 0, &mut colour, &mut classes).then_some(colour)
}

pub fn k_colorable_brute(g: &Graph, within: Mask, k: usize) -> bool {
    color_brute(g, within, k).is_some()
}

/// Chromatic number by trying `k = 1, 2, …` with [`color_brute`].
pub fn chromatic_brute(g: &Graph) -> usize {
    (1..=g.n()).find(|&k| k_colorable_brute(g, g.full(), k)).unwrap_or(g.n())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

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
    fn bipartite_examples() {
        let c6 = Graph::cycle(6).unwrap();
        let col = is_bipartite(&c6).unwrap();
        assert!(c6.is_proper_coloring(&col));
        assert!(is_bipartite(&Graph::cycle(7).unwrap()).is_none());
        assert!(is_bipartite(&Graph::new(3).unwrap()).is_some());
    }

    #[test]
    fn small_k_examples() {
        assert!(three_colorable(&Graph::cycle(5).unwrap()));
        assert!(!three_colorable(&Graph::complete(4).unwrap()));
        assert!(three_colorable(&Graph::petersen()));
        assert!(!four_colorable(&Graph::complete(5).unwrap()));
        let mut k4_pendants = Graph::complete(4).unwrap().disjoint_union(&Graph::new(3).unwrap()).unwrap();
        for (u, v) in [(1, 5), (2, 6), (3, 7)] {
            k4_pendants.add_edge(u, v).unwrap();
        }
        assert!(four_colorable(&k4_pendants));
        assert!(!three_colorable(&k4_pendants));
    }

    #[test]
    fn brute_examples() {
        assert_eq!(chromatic_brute(&Graph::new(4).unwrap()), 1);
        for n in 1..=7 {
            assert_eq!(chromatic_brute(&Graph::complete(n).unwrap()), n);
        }
        assert_eq!(chromatic_brute(&Graph::petersen()), 3);
        assert_eq!(chromatic_brute(&Graph::cycle(9).unwrap()), 3);
        let g = Graph::petersen();
        let col = color_brute(&g, g.full(), 3).unwrap();
        assert!(g.is_proper_coloring(&col));
    }

    #[test]
    fn empty_within_is_trivially_colorable() {
        let g = Graph::complete(4).unwrap();
        assert!(MisReduction.three_colorable(&g, 0));
        assert!(MisReduction.four_colorable(&g, 0));
        assert!(k_colorable_brute(&g, 0, 0));
        assert_eq!(bipartition_within(&g, 0), Some((0, 0)));
    }

    proptest! {
        #[test]
        fn engines_match_brute(n in 1usize..=9, bits in any::<u64>(), within in any::<u64>()) {
            let g = graph_from_bits(n, bits);
            let within = within & g.full();
            prop_assert_eq!(bipartition_within(&g, within).is_some(), k_colorable_brute(&g, within, 2));
            prop_assert_eq!(MisReduction.three_colorable(&g, within), k_colorable_brute(&g, within, 3));
            prop_assert_eq!(MisReduction.four_colorable(&g, within), k_colorable_brute(&g, within, 4));
            if let Some((a, b)) = bipartition_within(&g, within) {
                prop_assert_eq!(a | b, within);
                prop_assert!(g.is_independent(a) && g.is_independent(b));
            }
        }
    }
}
