//! Weighted up/down sums over subset-closed index families, and t-cover
//! counting built on them.
//!
//! Both transforms run one pass per universe element over the value array in
//! place. Pass `i` adds `α·g(X∖{i})` into `g(X)` for every `X ∋ i` (down) or
//! `α·g(X∪{i})` into `g(X)` for every `X ∌ i` (up). After all passes `g(X)`
//! holds the weighted path count from every `Y ⊆ X` (resp. `Y ⊇ X`).

use std::sync::Arc;

use rustc_hash::FxHashMap;

use crate::arith::{Rational, Scalar};
use crate::error::{Error, Result};
use crate::metrics::Metrics;
use crate::sets::{elements, popcount, submasks, Mask, SetFamily, Universe};

/// Above this size a full power set is not materialized.
pub const MAX_FULL_LATTICE_BITS: usize = 26;

/// A subset-closed family in canonical (increasing mask) order.
#[derive(Debug, Clone)]
pub struct LatticeIndex {
    universe: Universe,
    sets: Vec<Mask>,
    // None when the index is the full power set, where position == mask.
    lookup: Option<FxHashMap<Mask, usize>>,
}

impl LatticeIndex {
    pub fn new(family: &SetFamily) -> Result<Self> {
        let universe = family.universe();
        let canon = family.canonical();
        let sets = canon.members().to_vec();
        if universe.n() <= MAX_FULL_LATTICE_BITS && sets.len() == 1usize << universe.n() {
            return Ok(Self { universe, sets, lookup: None });
        }
        let lookup: FxHashMap<Mask, usize> = sets.iter().enumerate().map(|(p, &m)| (m, p)).collect();
        for &x in &sets {
            for e in elements(x) {
                let y = x & !crate::sets::element_bit(e);
                if !lookup.contains_key(&y) {
                    return Err(Error::NotSubsetClosed { missing: y });
                }
            }
        }
        Ok(Self { universe, sets, lookup: Some(lookup) })
    }

    /// The full power set `2^[n]`.
    pub fn full(universe: Universe) -> Result<Self> {
        if universe.n() > MAX_FULL_LATTICE_BITS {
            return Err(Error::CapExceeded { needed: 1u128 << universe.n(), cap: 1u128 << MAX_FULL_LATTICE_BITS });
        }
        let sets = (0..=universe.full()).collect();
        Ok(Self { universe, sets, lookup: None })
    }

    /// All subsets of `[n]` with at most `max_size` elements.
    pub fn bounded(universe: Universe, max_size: usize) -> Result<Self> {
        if max_size >= universe.n() {
            return Self::full(universe);
        }
        let needed: u128 = (0..=max_size).map(|j| crate::arith::binomial(universe.n(), j)).sum();
        let cap = 1u128 << MAX_FULL_LATTICE_BITS;
        if needed > cap {
            return Err(Error::CapExceeded { needed, cap });
        }
        let sets: Vec<Mask> = submasks(universe.full()).filter(|&m| popcount(m) <= max_size).collect();
        let lookup = sets.iter().enumerate().map(|(p, &m)| (m, p)).collect();
        Ok(Self { universe, sets, lookup: Some(lookup) })
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[Mask] {
        &self.sets
    }

    #[inline]
    pub fn position(&self, m: Mask) -> Option<usize> {
        match &self.lookup {
            None => ((m as usize) < self.sets.len()).then_some(m as usize),
            Some(map) => map.get(&m).copied(),
        }
    }

    pub fn as_family(&self) -> SetFamily {
        SetFamily::new(self.universe, self.sets.clone()).expect("index sets lie in the universe")
    }

    /// For each element pass, (position of X, position of neighbour) pairs.
    fn neighbours(&self, element: usize, down: bool) -> Vec<(usize, usize)> {
        let bit = crate::sets::element_bit(element);
        let mut out = Vec::new();
        for (p, &x) in self.sets.iter().enumerate() {
            let has = x & bit != 0;
            if down && has {
                let q = self.position(x & !bit).expect("index is subset-closed");
                out.push((p, q));
            } else if !down && !has {
                if let Some(q) = self.position(x | bit) {
                    out.push((p, q));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct LatticeVector {
    index: Arc<LatticeIndex>,
    values: Vec<Rational>,
}

impl LatticeVector {
    pub fn new(index: Arc<LatticeIndex>, values: Vec<Rational>) -> Result<Self> {
        if values.len() != index.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for an index family of {} sets",
                values.len(),
                index.len()
            )));
        }
        Ok(Self { index, values })
    }

    pub fn zeros(index: Arc<LatticeIndex>) -> Self {
        let values = vec![<Rational as Scalar>::zero(); index.len()];
        Self { index, values }
    }

    /// 0/1 vector marking the members of `family`.
    pub fn indicator(index: Arc<LatticeIndex>, family: &SetFamily) -> Result<Self> {
        let mut v = Self::zeros(index);
        for m in family.iter() {
            let p = v.index.position(m).ok_or(Error::NotInIndex(m))?;
            v.values[p] = <Rational as Scalar>::one();
        }
        Ok(v)
    }

    pub fn index(&self) -> &Arc<LatticeIndex> {
        &self.index
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn get(&self, m: Mask) -> Option<&Rational> {
        self.index.position(m).map(|p| &self.values[p])
    }

    /// Members whose value is nonzero, in canonical order.
    pub fn support(&self) -> SetFamily {
        let members = self
            .index
            .sets()
            .iter()
            .zip(&self.values)
            .filter(|(_, v)| !Scalar::is_zero(*v))
            .map(|(&m, _)| m)
            .collect();
        SetFamily::new(self.index.universe(), members).expect("index sets lie in the universe")
    }
}

fn run_passes<S: Scalar>(index: &LatticeIndex, values: &mut [S], alpha: &S, down: bool, metrics: &Metrics) -> Option<()> {
    let mut ops = 0u64;
    for e in 1..=index.universe().n() {
        for (p, q) in index.neighbours(e, down) {
            values[p] = values[p].mul_add(alpha, &values[q])?;
            ops += 2;
        }
    }
    Metrics::add(&metrics.lattice_ops, ops);
    Some(())
}

fn transform(f: &LatticeVector, alpha: &Rational, down: bool, metrics: &Metrics) -> LatticeVector {
    let fast_alpha = <i128 as Scalar>::from_rational(alpha);
    let fast_values: Option<Vec<i128>> = f.values.iter().map(<i128 as Scalar>::from_rational).collect();
    if let (Some(a), Some(mut vals)) = (fast_alpha, fast_values) {
        if run_passes(&f.index, &mut vals, &a, down, metrics).is_some() {
            let values = vals.iter().map(Scalar::to_rational).collect();
            return LatticeVector { index: f.index.clone(), values };
        }
    }
    let mut values = f.values.clone();
    run_passes(&f.index, &mut values, alpha, down, metrics).expect("rational arithmetic does not overflow");
    LatticeVector { index: f.index.clone(), values }
}

/// `g(X) = Σ_{Y ⊆ X, Y ∈ 𝓤} α^{|X∖Y|} f(Y)`.
pub fn down_transform(f: &LatticeVector, alpha: &Rational) -> LatticeVector {
    transform(f, alpha, true, &Metrics::new())
}

pub fn down_transform_metered(f: &LatticeVector, alpha: &Rational, metrics: &Metrics) -> LatticeVector {
    transform(f, alpha, true, metrics)
}

/// `g(X) = Σ_{Y ⊇ X, Y ∈ 𝓤} α^{|Y∖X|} f(Y)`.
pub fn up_transform(f: &LatticeVector, alpha: &Rational) -> LatticeVector {
    transform(f, alpha, false, &Metrics::new())
}

pub fn up_transform_metered(f: &LatticeVector, alpha: &Rational, metrics: &Metrics) -> LatticeVector {
    transform(f, alpha, false, metrics)
}

/// 0/1 vector over `U` marking the sets contained in some member of `F`.
pub fn downward_closure_indicator(family: &SetFamily, index: Arc<LatticeIndex>, metrics: &Metrics) -> Result<LatticeVector> {
    let ind = LatticeVector::indicator(index, family)?;
    let mut up = up_transform_metered(&ind, &Rational::from_integer(1.into()), metrics);
    for v in &mut up.values {
        if !Scalar::is_zero(v) {
            *v = <Rational as Scalar>::one();
        }
    }
    Ok(up)
}

/// `h^t(X)`: the number of ordered t-tuples from the downward closure of `F`
/// whose union is exactly `X`.
pub fn count_t_covers(family: &SetFamily, index: Arc<LatticeIndex>, t: usize, metrics: &Metrics) -> Result<LatticeVector> {
    if t == 0 {
        return Err(Error::param("t must be positive"));
    }
    let closure = downward_closure_indicator(family, index, metrics)?;
    let mut g = down_transform_metered(&closure, &Rational::from_integer(1.into()), metrics);
    for v in &mut g.values {
        *v = num_traits::pow(v.clone(), t);
    }
    Ok(down_transform_metered(&g, &Rational::from_integer((-1).into()), metrics))
}

/// The members of `U` that are t-covered by `F`, in canonical order.
pub fn list_t_covered(family: &SetFamily, index: Arc<LatticeIndex>, t: usize, metrics: &Metrics) -> Result<SetFamily> {
    Ok(count_t_covers(family, index, t, metrics)?.support())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, qi};
    use crate::sets::mask_of;
    use proptest::prelude::*;

    fn full(n: usize) -> Arc<LatticeIndex> {
        Arc::new(LatticeIndex::full(Universe::new(n).unwrap()).unwrap())
    }

    fn naive(f: &LatticeVector, alpha: &Rational, down: bool) -> Vec<Rational> {
        let sets = f.index.sets();
        sets.iter()
            .map(|&x| {
                let mut acc = qi(0);
                for (&y, v) in sets.iter().zip(&f.values) {
                    let related = if down { y & !x == 0 } else { x & !y == 0 };
                    if related {
                        acc += num_traits::pow(alpha.clone(), popcount(x ^ y)) * v;
                    }
                }
                acc
            })
            .collect()
    }

    #[test]
    fn down_of_empty_indicator_is_alpha_power() {
        let idx = full(3);
        let f = LatticeVector::indicator(idx.clone(), &SetFamily::new(idx.universe(), vec![0]).unwrap()).unwrap();
        let alpha = q(2, 3);
        let g = down_transform(&f, &alpha);
        for &x in idx.sets() {
            assert_eq!(g.get(x).unwrap(), &num_traits::pow(alpha.clone(), popcount(x)));
        }
    }

    #[test]
    fn counts_subsets_and_supersets() {
        let idx = full(2);
        let ones = LatticeVector::new(idx.clone(), vec![qi(1); 4]).unwrap();
        let down = down_transform(&ones, &qi(1));
        let up = up_transform(&ones, &qi(1));
        for &x in idx.sets() {
            assert_eq!(down.get(x).unwrap(), &qi(1 << popcount(x)));
            assert_eq!(up.get(x).unwrap(), &qi(1 << (2 - popcount(x))));
        }
        let top = LatticeVector::indicator(idx.clone(), &SetFamily::new(idx.universe(), vec![0b11]).unwrap()).unwrap();
        assert!(up_transform(&top, &qi(1)).values().iter().all(|v| v == &qi(1)));
    }

    #[test]
    fn rejects_non_closed_index() {
        let u = Universe::new(3).unwrap();
        let fam = SetFamily::new(u, vec![0, 0b1, 0b11]).unwrap();
        assert_eq!(LatticeIndex::new(&fam).unwrap_err(), Error::NotSubsetClosed { missing: 0b10 });
    }

    #[test]
    fn closure_indicator_examples() {
        let idx = full(2);
        let u = idx.universe();
        let m = Metrics::new();
        let c = downward_closure_indicator(&SetFamily::new(u, vec![0]).unwrap(), idx.clone(), &m).unwrap();
        assert_eq!(c.support().members(), &[0]);
        let c = downward_closure_indicator(&SetFamily::new(u, vec![0b11]).unwrap(), idx.clone(), &m).unwrap();
        assert_eq!(c.support().members(), &[0, 1, 2, 3]);
        let c = downward_closure_indicator(&SetFamily::new(u, vec![0b01, 0b10]).unwrap(), idx.clone(), &m).unwrap();
        assert_eq!(c.support().members(), &[0, 1, 2]);
    }

    #[test]
    fn t_cover_examples() {
        let idx = full(2);
        let u = idx.universe();
        let m = Metrics::new();
        let singles = SetFamily::new(u, vec![0b01, 0b10]).unwrap();
        let h = count_t_covers(&singles, idx.clone(), 2, &m).unwrap();
        assert_eq!(h.get(0b11).unwrap(), &qi(2));
        let h = count_t_covers(&SetFamily::empty(u), idx.clone(), 3, &m).unwrap();
        assert!(h.values().iter().all(|v| v == &qi(0)));
        let l = list_t_covered(&SetFamily::new(u, vec![0b11]).unwrap(), idx.clone(), 1, &m).unwrap();
        assert_eq!(l.members(), &[0, 1, 2, 3]);
        let l = list_t_covered(&singles, idx.clone(), 1, &m).unwrap();
        assert_eq!(l.members(), &[0, 1, 2]);
    }

    #[test]
    fn bounded_index_matches_family_construction() {
        let u = Universe::new(5).unwrap();
        let a = LatticeIndex::bounded(u, 2).unwrap();
        let b = LatticeIndex::new(&SetFamily::all_subsets_up_to(u, 2)).unwrap();
        assert_eq!(a.sets(), b.sets());
        assert_eq!(a.len(), 1 + 5 + 10);
        assert_eq!(a.position(mask_of(&[2, 5])), b.position(mask_of(&[2, 5])));
        assert_eq!(a.position(mask_of(&[1, 2, 3])), None);
    }

    #[test]
    fn falls_back_to_rationals_on_overflow() {
        let idx = full(3);
        let huge = Rational::from_integer(i128::MAX.into());
        let f = LatticeVector::new(idx.clone(), vec![huge.clone(); 8]).unwrap();
        let g = down_transform(&f, &qi(1));
        assert_eq!(g.get(0b111).unwrap(), &(huge * qi(8)));
    }

    fn closed_family(n: usize, seeds: Vec<u64>) -> SetFamily {
        let u = Universe::new(n).unwrap();
        let mut members: Vec<Mask> = Vec::new();
        for s in seeds {
            members.extend(submasks(s & u.full()));
        }
        members.push(0);
        SetFamily::new(u, members).unwrap().canonical()
    }

    proptest! {
        #[test]
        fn transforms_match_naive_and_invert(
            n in 1usize..=5,
            seeds in prop::collection::vec(any::<u64>(), 1..4),
            raw in prop::collection::vec((-9i64..10, 1i64..5), 32),
            a_num in -3i64..4,
            a_den in 1i64..4,
        ) {
            let idx = Arc::new(LatticeIndex::new(&closed_family(n, seeds)).unwrap());
            let values: Vec<Rational> = (0..idx.len()).map(|i| q(raw[i % raw.len()].0, raw[i % raw.len()].1)).collect();
            let f = LatticeVector::new(idx.clone(), values).unwrap();
            let alpha = q(a_num, a_den);
            let m = Metrics::new();
            let down = down_transform_metered(&f, &alpha, &m);
            let up = up_transform_metered(&f, &alpha, &m);
            prop_assert_eq!(down.values(), &naive(&f, &alpha, true)[..]);
            prop_assert_eq!(up.values(), &naive(&f, &alpha, false)[..]);
            prop_assert!(m.snapshot().lattice_ops <= 2 * 2 * (n as u64 + 1) * idx.len() as u64);
            let back = down_transform(&down_transform(&f, &qi(1)), &qi(-1));
            prop_assert_eq!(back.values(), f.values());
            let back = up_transform(&up_transform(&f, &qi(1)), &qi(-1));
            prop_assert_eq!(back.values(), f.values());
        }

        #[test]
        fn cover_counts_are_monotone_in_t(n in 1usize..=5, raw in prop::collection::vec(any::<u64>(), 1..5)) {
            let idx = full(n);
            let fam = SetFamily::new(idx.universe(), raw.iter().map(|r| r & idx.universe().full()).collect()).unwrap();
            let m = Metrics::new();
            let mut prev = list_t_covered(&fam, idx.clone(), 1, &m).unwrap();
            for t in 2..=3 {
                let h = count_t_covers(&fam, idx.clone(), t, &m).unwrap();
                prop_assert!(h.values().iter().all(|v| v >= &qi(0)));
                let cur = h.support();
                prop_assert!(prev.iter().all(|x| cur.members().contains(&x)));
                prev = cur;
            }
        }
    }
}
