//! Chromatic number through size-profile case analysis: every coloring whose
//! largest class is a maximal independent set has a profile in one of five
//! cases, and each case has its own detector.

mod cases;
mod cover;
mod exponents;

use std::fmt;

use num_traits::ToPrimitive;

use crate::arith::{qu, Rational};
use crate::error::{Error, Result};

pub use cases::{
    case_a, case_b, case_c, case_d, case_e, chromatic_number, ChromaticOutcome, PipelineConfig, SlackRule, TraceRow,
    TraceStep,
};
pub use cover::{
    brute_balanced_k_cover, detect_balanced_k_cover, detect_balanced_k_cover_with, list_colorable_up_to,
    list_k_colorable_subsets,
};
pub use exponents::{binary_entropy, exponent_report, ExponentReport};

/// Color-class sizes in nonascending order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SizeProfile {
    sizes: Vec<usize>,
}

impl SizeProfile {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::param("a size profile needs at least one class and no empty classes"));
        }
        if sizes.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::param(format!("size profile {sizes:?} is not nonascending")));
        }
        Ok(Self { sizes })
    }

    /// Profile of a coloring given as a per-vertex color vector.
    pub fn of_coloring(coloring: &[usize]) -> Result<Self> {
        let k = coloring.iter().max().map_or(0, |&c| c + 1);
        let mut sizes = vec![0; k];
        for &c in coloring {
            sizes[c] += 1;
        }
        sizes.retain(|&s| s > 0);
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        Self::new(sizes)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// `s_i` (1-based), zero past the end.
    fn s(&self, i: usize) -> usize {
        self.sizes.get(i - 1).copied().unwrap_or(0)
    }

    fn top(&self, count: usize) -> usize {
        self.sizes.iter().take(count).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CaseLabel {
    A,
    B,
    C,
    D,
    E,
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseLabel::A => "A",
            CaseLabel::B => "B",
            CaseLabel::C => "C",
            CaseLabel::D => "D",
            CaseLabel::E => "E",
        };
        f.write_str(s)
    }
}

/// `d = p/q` with `q > 0`, as machine integers when they fit.
fn small_fraction(d: &Rational) -> Option<(i128, i128)> {
    Some((d.numer().to_i128()?, d.denom().to_i128()?))
}

/// Cases whose defining inequalities hold for `p` at slack `d`:
///
/// - A: `k ≤ 3`
/// - B: `s₁+s₂+s₃+s₄ > n − 6d`
/// - C: `s₁+s₂ > n/2 + d`
/// - D: `n/2 − d < s₁ ≤ n/2 + d` and `s₂ < 2d`
/// - E: `s₁ ≤ n/2 − d` and `s₁+s₂+s₃+s₄ ≤ n − 6d`
pub fn classify_profile(p: &SizeProfile, d: &Rational) -> Vec<CaseLabel> {
    let (n, s1, s2, two, four) = (p.n(), p.s(1), p.s(2), p.top(2), p.top(4));
    let mut out = Vec::new();
    if p.k() <= 3 {
        out.push(CaseLabel::A);
    }
    // Everything is scaled by 2q so the comparisons stay in integers.
    if let Some((pn, q)) = small_fraction(d).filter(|&(a, b)| a.abs() < 1 << 60 && b < 1 << 60) {
        let (n, s1, s2, two, four) = (n as i128, s1 as i128, s2 as i128, two as i128, four as i128);
        if 2 * q * four > 2 * q * n - 12 * pn {
            out.push(CaseLabel::B);
        }
        if 2 * q * two > q * n + 2 * pn {
            out.push(CaseLabel::C);
        }
        if q * n - 2 * pn < 2 * q * s1 && 2 * q * s1 <= q * n + 2 * pn && q * s2 < 2 * pn {
            out.push(CaseLabel::D);
        }
        if 2 * q * s1 <= q * n - 2 * pn && 2 * q * four <= 2 * q * n - 12 * pn {
            out.push(CaseLabel::E);
        }
        return out;
    }
    let (nq, half) = (qu(n), qu(n) / qu(2));
    let six_d = d * qu(6);
    if qu(four) > &nq - &six_d {
        out.push(CaseLabel::B);
    }
    if qu(two) > &half + d {
        out.push(CaseLabel::C);
    }
    if &half - d < qu(s1) && qu(s1) <= &half + d && qu(s2) < d * qu(2) {
        out.push(CaseLabel::D);
    }
    if qu(s1) <= &half - d && qu(four) <= &nq - &six_d {
        out.push(CaseLabel::E);
    }
    out
}

/// Splits the classes of `p` (0-based indices) into three parts of total
/// size at most `n/2 − d` each: the three largest classes open the parts,
/// then classes are taken smallest first into part 1 or else part 2 while
/// they fit, and whatever is left goes to part 3.
pub fn greedy_three_partition(p: &SizeProfile, d: &Rational) -> Result<[Vec<usize>; 3]> {
    let n = p.n();
    let bound = qu(n) / qu(2) - d;
    if qu(p.s(1)) > bound || qu(p.top(4)) > qu(n) - d * qu(6) {
        return Err(Error::pre(format!(
            "profile {:?} violates s1 ≤ n/2 − d or s1+s2+s3+s4 ≤ n − 6d at d = {d}",
            p.sizes()
        )));
    }
    let k = p.k();
    let mut parts: [Vec<usize>; 3] = Default::default();
    let mut sums = [0usize; 3];
    for i in 0..k.min(3) {
        parts[i].push(i);
        sums[i] = p.sizes[i];
    }
    let mut next = k;
    while next > 3 {
        let i = next - 1;
        let s = p.sizes[i];
        let Some(slot) = (0..2).find(|&j| qu(sums[j] + s) <= bound) else { break };
        parts[slot].push(i);
        sums[slot] += s;
        next -= 1;
    }
    for i in 3..next {
        parts[2].push(i);
    }
    Ok(parts)
}

/// Groups `tail` (the classes after the largest, all smaller than `2d`)
/// into three consecutive runs of at most `n'/3 + 2d` each, where `n'` is
/// their total. Returns the run lengths; all three are positive when
/// `tail` has at least three classes.
pub fn greedy_group(tail: &[usize], d: &Rational) -> Result<[usize; 3]> {
    let two_d = d * qu(2);
    if let Some(&s) = tail.iter().find(|&&s| qu(s) >= two_d) {
        return Err(Error::pre(format!("class of size {s} is not below 2d = {two_d}")));
    }
    let n_prime: usize = tail.iter().sum();
    let cap = qu(n_prime) / qu(3) + &two_d;
    let mut counts = [0usize; 3];
    let mut i = 0;
    for count in counts.iter_mut().take(2) {
        let mut sum = 0;
        while i < tail.len() && qu(sum + tail[i]) <= cap {
            sum += tail[i];
            i += 1;
            *count += 1;
        }
    }
    counts[2] = tail.len() - i;
    // Runs may come out empty when the tail is short; shift single classes
    // rightwards so each run has one.
    if tail.len() >= 3 {
        if counts[1] == 0 {
            counts[0] -= 1;
            counts[1] += 1;
        }
        if counts[2] == 0 {
            if counts[1] >= 2 {
                counts[1] -= 1;
            } else {
                counts[0] -= 1;
            }
            counts[2] += 1;
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, qi};
    use proptest::prelude::*;

    fn prof(s: &[usize]) -> SizeProfile {
        SizeProfile::new(s.to_vec()).unwrap()
    }

    fn classify_rational(p: &SizeProfile, d: &Rational) -> Vec<CaseLabel> {
        // Same inequalities, always through Rational.
        let (n, s1, s2) = (qu(p.n()), qu(p.s(1)), qu(p.s(2)));
        let (two, four) = (qu(p.top(2)), qu(p.top(4)));
        let half = &n / qu(2);
        let mut out = Vec::new();
        if p.k() <= 3 {
            out.push(CaseLabel::A);
        }
        if four > &n - d * qu(6) {
            out.push(CaseLabel::B);
        }
        if two > &half + d {
            out.push(CaseLabel::C);
        }
        if &half - d < s1 && s1 <= &half + d && s2 < d * qu(2) {
            out.push(CaseLabel::D);
        }
        if s1 <= &half - d && four <= &n - d * qu(6) {
            out.push(CaseLabel::E);
        }
        out
    }

    #[test]
    fn profile_validation() {
        assert!(SizeProfile::new(vec![]).is_err());
        assert!(SizeProfile::new(vec![2, 3]).is_err());
        assert!(SizeProfile::new(vec![3, 0]).is_err());
        let p = SizeProfile::of_coloring(&[0, 1, 1, 2, 1, 0]).unwrap();
        assert_eq!(p.sizes(), &[3, 2, 1]);
    }

    #[test]
    fn classify_examples() {
        assert!(classify_profile(&prof(&[5, 5]), &qi(3)).contains(&CaseLabel::A));
        let ten = prof(&[10; 10]);
        assert_eq!(classify_profile(&ten, &qi(2)), vec![CaseLabel::E]);
        let c = classify_profile(&prof(&[40, 30, 20, 10]), &qi(5));
        assert!(c.contains(&CaseLabel::B) && c.contains(&CaseLabel::C));
    }

    #[test]
    fn classify_large_fraction_takes_rational_path() {
        let d = Rational::new(num_bigint::BigInt::from(1u128 << 100), num_bigint::BigInt::from(3u128 << 99));
        let p = prof(&[10, 9, 8, 7, 6, 5]);
        assert_eq!(classify_profile(&p, &d), classify_rational(&p, &d));
    }

    #[test]
    fn greedy_three_partition_examples() {
        let p = prof(&[4, 4, 3, 3, 2, 2, 2]);
        let parts = greedy_three_partition(&p, &q(1, 2)).unwrap();
        let sums: Vec<usize> = parts.iter().map(|ix| ix.iter().map(|&i| p.sizes()[i]).sum()).collect();
        assert_eq!(sums, vec![8, 9, 3]);
        // With three classes s₁+…+s₄ = n, so no positive d admits them.
        assert!(greedy_three_partition(&prof(&[3, 2, 2]), &q(1, 2)).is_err());
        assert!(greedy_three_partition(&prof(&[6, 1, 1]), &qi(1)).is_err());
    }

    #[test]
    fn greedy_three_partition_equal_classes() {
        for k in 4..=12 {
            let p = prof(&vec![3; k]);
            let n = 3 * k;
            let d = q(1, 2);
            if greedy_three_partition(&p, &d).is_err() {
                continue;
            }
            let parts = greedy_three_partition(&p, &d).unwrap();
            for part in &parts {
                let sum = 3 * part.len();
                assert!(qu(sum) <= qu(n) / qu(2) - &d, "k={k}");
            }
        }
    }

    #[test]
    fn greedy_group_examples() {
        let tail = vec![1; 20];
        let d = q(3, 4);
        let counts = greedy_group(&tail, &d).unwrap();
        assert_eq!(counts.iter().sum::<usize>(), 20);
        assert!(counts.iter().all(|&c| qu(c) <= q(20, 3) + q(3, 2)));
        assert_eq!(greedy_group(&[1, 1, 1], &qi(1)).unwrap(), [1, 1, 1]);
        assert!(greedy_group(&[3, 1], &qi(1)).is_err());
    }

    fn admissible_profile() -> impl Strategy<Value = (Vec<usize>, Rational)> {
        (prop::collection::vec(1usize..12, 3..14), 1i64..40, 1i64..40).prop_filter_map("needs balance", |(mut s, a, b)| {
            s.sort_unstable_by(|x, y| y.cmp(x));
            let d = Rational::new(a.into(), (b * 4).into());
            let p = SizeProfile::new(s.clone()).ok()?;
            let n = qu(p.n());
            (qu(p.s(1)) <= &n / qu(2) - &d && qu(p.top(4)) <= &n - &d * qu(6)).then_some((s, d))
        })
    }

    proptest! {
        #[test]
        fn classify_fast_path_matches_rational(s in prop::collection::vec(1usize..15, 1..9), a in -20i64..60, b in 1i64..12) {
            let mut s = s;
            s.sort_unstable_by(|x, y| y.cmp(x));
            let p = SizeProfile::new(s).unwrap();
            let d = Rational::new(a.into(), b.into());
            prop_assert_eq!(classify_profile(&p, &d), classify_rational(&p, &d));
        }

        #[test]
        fn greedy_three_partition_respects_bound((s, d) in admissible_profile()) {
            let p = SizeProfile::new(s).unwrap();
            let parts = greedy_three_partition(&p, &d).unwrap();
            let mut seen: Vec<usize> = parts.iter().flatten().copied().collect();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..p.k()).collect::<Vec<_>>());
            for part in &parts {
                let sum: usize = part.iter().map(|&i| p.sizes()[i]).sum();
                prop_assert!(qu(sum) <= qu(p.n()) / qu(2) - &d);
            }
        }

        #[test]
        fn greedy_group_respects_bound(tail in prop::collection::vec(1usize..6, 3..30), extra in 0i64..8) {
            let max = *tail.iter().max().unwrap();
            let d = Rational::new((2 * max as i64 + 1 + extra).into(), 4.into());
            let counts = greedy_group(&tail, &d).unwrap();
            prop_assert!(counts.iter().all(|&c| c > 0));
            prop_assert_eq!(counts.iter().sum::<usize>(), tail.len());
            let n_prime: usize = tail.iter().sum();
            let cap = qu(n_prime) / qu(3) + &d * qu(2);
            let mut start = 0;
            for c in counts {
                let sum: usize = tail[start..start + c].iter().sum();
                prop_assert!(qu(sum) <= cap);
                start += c;
            }
        }
    }
}
