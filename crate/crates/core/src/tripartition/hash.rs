use crate::arith::{is_prime, Rational};
use crate::error::{Error, Result};
use crate::sets::{element_bit, popcount, Mask};

/// `h_{a,b}(x) = ((a·x + b) mod p) mod r` for all `(a, b) ∈ [p]×[p]`,
/// enumerated with `(a, b)` in lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashFamily {
    n: usize,
    r: usize,
    p: u64,
}

impl HashFamily {
    /// Uses the smallest prime `p ≥ max(n, r)`.
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if n == 0 || r == 0 {
            return Err(Error::param("hash family needs n ≥ 1 and r ≥ 1"));
        }
        if r > n {
            return Err(Error::param(format!("range r = {r} exceeds domain size n = {n}")));
        }
        let lo = n.max(2) as u64;
        let p = (lo..=2 * lo)
            .find(|&p| is_prime(p))
            .ok_or_else(|| Error::NoAdmissiblePrime { lo: lo.to_string(), hi: (2 * lo).to_string() })?;
        Ok(Self { n, r, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn len(&self) -> usize {
        (self.p * self.p) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn eval(&self, a: u64, b: u64, x: usize) -> usize {
        (((a * x as u64 + b) % self.p) % self.r as u64) as usize
    }

    /// Members as `(a, b)` pairs in enumeration order.
    pub fn members(&self) -> impl Iterator<Item = (u64, u64)> {
        let p = self.p;
        (0..p).flat_map(move |a| (0..p).map(move |b| (a, b)))
    }

    /// `h^{-1}(0), …, h^{-1}(r−1)` as masks over `[n]`.
    pub fn preimages(&self, a: u64, b: u64) -> Vec<Mask> {
        let mut out = vec![0; self.r];
        for x in 1..=self.n {
            out[self.eval(a, b, x)] |= element_bit(x);
        }
        out
    }

    /// Preimage lists of every member, in enumeration order.
    pub fn preimage_table(&self) -> Vec<Vec<Mask>> {
        self.members().map(|(a, b)| self.preimages(a, b)).collect()
    }

    /// Largest deviation, over `x ≠ x'` and `j, j'`, of
    /// `#{h : h(x)=j, h(x')=j'} / |H|` from `1/r²`.
    pub fn pairwise_deviation(&self) -> Rational {
        let r = self.r;
        let total = self.len() as i64;
        let mut worst = Rational::from_integer(0.into());
        let ideal = Rational::new(1.into(), ((r * r) as i64).into());
        for x in 1..=self.n {
            for y in 1..=self.n {
                if x == y {
                    continue;
                }
                let mut counts = vec![0i64; r * r];
                for (a, b) in self.members() {
                    counts[self.eval(a, b, x) * r + self.eval(a, b, y)] += 1;
                }
                for c in counts {
                    let dev = Rational::new(c.into(), total.into()) - &ideal;
                    let dev = if dev < Rational::from_integer(0.into()) { -dev } else { dev };
                    if dev > worst {
                        worst = dev;
                    }
                }
            }
        }
        worst
    }
}

/// Empirical Chebyshev data for one set `A` and one block index `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChebyshevCheck {
    /// Fraction of members `h` with `A` not `(δ,r)`-balanced onto `h^{-1}(j)`.
    pub bad_fraction: Rational,
    /// `Var / (δ|A|/r)²` for an exactly pairwise independent family.
    pub ideal_bound: Rational,
    /// Excess of the family's empirical second moment over the ideal
    /// variance, in the same units; zero when `r = p`.
    pub family_excess: Rational,
}

impl ChebyshevCheck {
    pub fn holds(&self) -> bool {
        self.bad_fraction <= &self.ideal_bound + &self.family_excess
    }
}

/// Chebyshev's inequality evaluated on the concrete family: the fraction of
/// `h` under which `|A ∩ h^{-1}(j)|` leaves `(1±δ)|A|/r` is at most the
/// empirical second moment over `(δ|A|/r)²`.
///
/// `table` is [`HashFamily::preimage_table`] of a family with range `r`.
pub fn chebyshev_check(table: &[Vec<Mask>], r: usize, a: Mask, j: usize, delta: &Rational) -> ChebyshevCheck {
    let m = popcount(a) as i64;
    let r = r as i64;
    let total = table.len() as i64;
    let mean = Rational::new(m.into(), r.into());
    let mut bad = 0i64;
    // Σ (r·hits − m)², i.e. r² times the summed squared deviation.
    let mut scaled_second: i128 = 0;
    for pre in table {
        let hits = pre.get(j).map_or(0, |&block| popcount(a & block)) as i64;
        scaled_second += i128::from(r * hits - m).pow(2);
        if !crate::sets::balanced_count(m as usize, hits as usize, delta, r as usize) {
            bad += 1;
        }
    }
    let second = Rational::new(scaled_second.into(), i128::from(r * r).into());
    let second = second / Rational::from_integer(total.into());
    let ideal_var = Rational::new((m * (r - 1)).into(), (r * r).into());
    let scale = {
        let s = delta * &mean;
        &s * &s
    };
    let zero = Rational::from_integer(0.into());
    let (ideal_bound, family_excess) = if scale == zero {
        (Rational::from_integer(1.into()), zero.clone())
    } else {
        let excess = (&second - &ideal_var).max(zero.clone());
        (&ideal_var / &scale, excess / &scale)
    };
    ChebyshevCheck { bad_fraction: Rational::new(bad.into(), total.into()), ideal_bound, family_excess }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::q;

    #[test]
    fn exact_pairwise_independence_when_r_is_p() {
        for p in [2usize, 3, 5, 7] {
            let h = HashFamily::new(p, p).unwrap();
            assert_eq!(h.p(), p as u64);
            assert_eq!(h.pairwise_deviation(), q(0, 1), "p={p}");
        }
        // Spelled out for p = r = 5: each (j, j') pair is hit once.
        let h = HashFamily::new(5, 5).unwrap();
        for j in 0..5 {
            for jj in 0..5 {
                let hits = h.members().filter(|&(a, b)| h.eval(a, b, 1) == j && h.eval(a, b, 3) == jj).count();
                assert_eq!(hits, 1);
            }
        }
    }

    #[test]
    fn sizes_and_degenerate_range() {
        let h = HashFamily::new(12, 3).unwrap();
        assert_eq!(h.p(), 13);
        assert_eq!(h.len(), 169);
        let one = HashFamily::new(9, 1).unwrap();
        assert!(one.members().all(|(a, b)| (1..=9).all(|x| one.eval(a, b, x) == 0)));
        assert!(HashFamily::new(3, 4).is_err());
    }

    #[test]
    fn preimages_partition_the_domain() {
        let h = HashFamily::new(10, 3).unwrap();
        for (a, b) in h.members() {
            let pre = h.preimages(a, b);
            assert_eq!(pre.iter().fold(0, |acc, m| acc | m), (1 << 10) - 1);
            assert_eq!(pre.iter().map(|&m| popcount(m)).sum::<usize>(), 10);
        }
    }

    #[test]
    fn chebyshev_bound_holds_for_every_large_set() {
        let delta = q(1, 2);
        for (n, r) in [(6, 1), (9, 3), (10, 2), (12, 3)] {
            let h = HashFamily::new(n, r).unwrap();
            let table = h.preimage_table();
            let min_size = n / 6;
            for a in 1..(1u64 << n) {
                if popcount(a) < min_size {
                    continue;
                }
                for j in 0..r {
                    let c = chebyshev_check(&table, r, a, j, &delta);
                    assert!(c.holds(), "n={n} r={r} A={a:b} j={j}: {c:?}");
                }
            }
        }
    }

    #[test]
    fn excess_vanishes_when_r_is_p() {
        let h = HashFamily::new(5, 5).unwrap();
        let table = h.preimage_table();
        for a in 1..32u64 {
            let c = chebyshev_check(&table, 5, a, 2, &q(1, 2));
            assert_eq!(c.family_excess, q(0, 1));
        }
    }
}
