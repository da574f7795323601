//! Evaluation of `T^{⊗r}(x, y, z)` through a rank decomposition of `T^{⊗s}`
//! without materializing the power.
//!
//! Each input vector is viewed as an array with one mode per Kronecker
//! factor: `⌊r/s⌋` modes of size `c^s` followed by `r − s⌊r/s⌋` modes of size
//! `c`. The factor matrices are applied one mode at a time, and the result is
//! `Σ_λ x̂_λ ŷ_λ ẑ_λ`.

use rustc_hash::FxHashMap;

use super::{Decomposition, FactorMatrix, SparseTensor};
use crate::arith::{Rational, Scalar};
use crate::error::{Error, Result};
use crate::metrics::Metrics;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum YatesStrategy {
    /// Dense passes for dense inputs, hash-map passes for sparse ones.
    #[default]
    Auto,
    Dense,
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YatesOptions {
    pub strategy: YatesStrategy,
    /// Largest intermediate array a dense pass may allocate.
    pub dense_limit: u64,
}

impl Default for YatesOptions {
    fn default() -> Self {
        Self { strategy: YatesStrategy::Auto, dense_limit: 1 << 24 }
    }
}

enum Hat<S> {
    Dense(Vec<S>),
    Sparse(FxHashMap<u64, S>),
}

impl<S: Scalar> Hat<S> {
    fn len(&self) -> usize {
        match self {
            Hat::Dense(v) => v.len(),
            Hat::Sparse(m) => m.len(),
        }
    }

    fn get(&self, idx: u64) -> Option<&S> {
        match self {
            Hat::Dense(v) => v.get(idx as usize).filter(|s| !s.is_zero()),
            Hat::Sparse(m) => m.get(&idx),
        }
    }

    fn for_each_nonzero(&self, mut f: impl FnMut(u64, &S) -> Option<()>) -> Option<()> {
        match self {
            Hat::Dense(v) => {
                for (i, s) in v.iter().enumerate() {
                    if !s.is_zero() {
                        f(i as u64, s)?;
                    }
                }
            }
            Hat::Sparse(m) => {
                for (&i, s) in m {
                    f(i, s)?;
                }
            }
        }
        Some(())
    }
}

/// One Kronecker factor of the evaluation: a factor matrix and its values in
/// the working scalar type (`None` for an all-ones matrix).
struct Mode<'a, S> {
    matrix: &'a FactorMatrix,
    values: Option<Vec<S>>,
}

impl<S: Scalar> Mode<'_, S> {
    #[inline]
    fn apply(&self, pos: usize, v: &S) -> Option<S> {
        match &self.values {
            None => Some(v.clone()),
            Some(vals) => vals[pos].mul(v),
        }
    }
}

fn checked_product(mut sizes: impl Iterator<Item = u64>) -> Result<u64> {
    sizes.try_fold(1u64, |acc, s| {
        acc.checked_mul(s).ok_or(Error::CapExceeded { needed: acc as u128 * s as u128, cap: u64::MAX as u128 })
    })
}

fn dense_pass<S: Scalar>(modes: &[Mode<'_, S>], input: &[(u64, S)], len: u64, ops: &mut u64) -> Option<Vec<S>> {
    let mut shape: Vec<u64> = modes.iter().map(|m| m.matrix.cols()).collect();
    let mut data = vec![S::zero(); len as usize];
    for (i, v) in input {
        data[*i as usize] = v.clone();
    }
    for (u, mode) in modes.iter().enumerate() {
        let outer: u64 = shape[..u].iter().product();
        let inner: u64 = shape[u + 1..].iter().product();
        let n = shape[u];
        let d = mode.matrix.rows() as u64;
        let mut out = vec![S::zero(); (outer * d * inner) as usize];
        for o in 0..outer {
            for row in 0..d {
                let dst = ((o * d + row) * inner) as usize;
                for p in mode.matrix.row_range(row as usize) {
                    let src = ((o * n + mode.matrix.col_at(p)) * inner) as usize;
                    for i in 0..inner as usize {
                        let x = &data[src + i];
                        if x.is_zero() {
                            continue;
                        }
                        out[dst + i] = out[dst + i].add(&mode.apply(p, x)?)?;
                        *ops += 2;
                    }
                }
            }
        }
        shape[u] = d;
        data = out;
    }
    Some(data)
}

fn sparse_pass<S: Scalar>(modes: &[Mode<'_, S>], input: &[(u64, S)], ops: &mut u64) -> Option<FxHashMap<u64, S>> {
    let mut shape: Vec<u64> = modes.iter().map(|m| m.matrix.cols()).collect();
    let mut data: FxHashMap<u64, S> = input.iter().filter(|(_, v)| !v.is_zero()).cloned().collect();
    for (u, mode) in modes.iter().enumerate() {
        let inner: u64 = shape[u + 1..].iter().product();
        let n = shape[u];
        let d = mode.matrix.rows() as u64;
        let mut out: FxHashMap<u64, S> = FxHashMap::default();
        for (&idx, v) in &data {
            let i = idx % inner;
            let col = (idx / inner) % n;
            let o = idx / (inner * n);
            for (row, p) in mode.matrix.column(col) {
                let key = (o * d + row as u64) * inner + i;
                let term = mode.apply(p, v)?;
                let slot = out.entry(key).or_insert_with(S::zero);
                *slot = slot.add(&term)?;
                *ops += 2;
            }
        }
        out.retain(|_, v| !v.is_zero());
        shape[u] = d;
        data = out;
    }
    Some(data)
}

fn hat<S: Scalar>(modes: &[Mode<'_, S>], input: &[(u64, S)], opts: &YatesOptions, ops: &mut u64) -> Result<Option<Hat<S>>> {
    let in_len = checked_product(modes.iter().map(|m| m.matrix.cols()))?;
    let out_len = checked_product(modes.iter().map(|m| m.matrix.rows() as u64))?;
    let peak = modes.iter().try_fold(in_len, |acc, m| {
        let next = acc / m.matrix.cols().max(1) * m.matrix.rows() as u64;
        Some(acc.max(next))
    });
    let dense_ok = peak.is_some_and(|p| p <= opts.dense_limit) && in_len <= opts.dense_limit && out_len <= opts.dense_limit;
    let dense = match opts.strategy {
        YatesStrategy::Dense => {
            if !dense_ok {
                return Err(Error::CapExceeded { needed: in_len.max(out_len) as u128, cap: opts.dense_limit as u128 });
            }
            true
        }
        YatesStrategy::Sparse => false,
        YatesStrategy::Auto => dense_ok && (input.len() as u64).saturating_mul(8) > in_len,
    };
    Ok(if dense {
        dense_pass(modes, input, in_len, ops).map(Hat::Dense)
    } else {
        sparse_pass(modes, input, ops).map(Hat::Sparse)
    })
}

fn combine<S: Scalar>(hats: &[Hat<S>; 3], ops: &mut u64) -> Option<S> {
    let lead = (0..3).min_by_key(|&i| hats[i].len()).expect("three vectors");
    let others: Vec<usize> = (0..3).filter(|&i| i != lead).collect();
    let mut acc = S::zero();
    hats[lead].for_each_nonzero(|idx, v| {
        if let (Some(a), Some(b)) = (hats[others[0]].get(idx), hats[others[1]].get(idx)) {
            acc = acc.add(&v.mul(a)?.mul(b)?)?;
            *ops += 3;
        }
        Some(())
    })?;
    Some(acc)
}

fn evaluate<S: Scalar>(
    factors: [Vec<&FactorMatrix>; 3],
    inputs: [&[(u64, Rational)]; 3],
    opts: &YatesOptions,
    ops: &mut u64,
) -> Result<Option<S>> {
    let mut hats = Vec::with_capacity(3);
    for leg in 0..3 {
        let mut modes = Vec::with_capacity(factors[leg].len());
        for &m in &factors[leg] {
            let values = match m.is_zero_one() {
                true => None,
                false => {
                    let conv: Option<Vec<S>> = (0..m.nnz()).map(|p| S::from_rational(m.value_at(p).expect("stored values"))).collect();
                    match conv {
                        Some(v) => Some(v),
                        None => return Ok(None),
                    }
                }
            };
            modes.push(Mode { matrix: m, values });
        }
        let input: Option<Vec<(u64, S)>> = inputs[leg].iter().map(|(i, v)| S::from_rational(v).map(|s| (*i, s))).collect();
        let Some(input) = input else { return Ok(None) };
        match hat(&modes, &input, opts, ops)? {
            Some(h) => hats.push(h),
            None => return Ok(None),
        }
    }
    let hats: [Hat<S>; 3] = match hats.try_into() {
        Ok(h) => h,
        Err(_) => unreachable!("three legs"),
    };
    Ok(combine(&hats, ops))
}

/// Like [`yates_evaluate`] with the inputs given as sparse `(index, value)`
/// lists; indices must be distinct.
#[allow(clippy::too_many_arguments)]
pub fn yates_evaluate_sparse(
    t: &SparseTensor,
    d: &Decomposition,
    base: Option<&Decomposition>,
    r: usize,
    inputs: [&[(u64, Rational)]; 3],
    opts: &YatesOptions,
    metrics: &Metrics,
) -> Result<Rational> {
    if r == 0 {
        return Err(Error::param("power must be positive"));
    }
    if d.leg_dims() != t.dims() {
        return Err(Error::DimensionMismatch(format!(
            "decomposition legs {:?} differ from tensor legs {:?}",
            d.leg_dims(),
            t.dims()
        )));
    }
    let s = d.power();
    let (whole, rem) = (r / s, r % s);
    if rem > 0 {
        match base {
            None => return Err(Error::MissingRemainder { r, s }),
            Some(b) if b.power() != 1 || b.leg_dims() != t.dims() => {
                return Err(Error::DimensionMismatch("base decomposition must certify the tensor itself (power 1)".into()))
            }
            Some(_) => {}
        }
    }
    let mut factors: [Vec<&FactorMatrix>; 3] = Default::default();
    for (leg, list) in factors.iter_mut().enumerate() {
        list.extend(std::iter::repeat(d.factor(leg)).take(whole));
        if rem > 0 {
            list.extend(std::iter::repeat(base.expect("checked above").factor(leg)).take(rem));
        }
        let len = checked_product(list.iter().map(|m| m.cols()))?;
        let input = inputs[leg];
        if let Some((bad, _)) = input.iter().find(|(i, _)| *i >= len) {
            return Err(Error::DimensionMismatch(format!("index {bad} outside leg {} of size {len}", leg + 1)));
        }
    }
    let mut ops = 0;
    let fast = evaluate::<i128>(factors.clone(), inputs, opts, &mut ops)?;
    let result = match fast {
        Some(v) => v.to_rational(),
        None => evaluate::<Rational>(factors, inputs, opts, &mut ops)?.expect("rational arithmetic does not overflow"),
    };
    Metrics::add(&metrics.yates_ops, ops);
    Ok(result)
}

/// `T^{⊗r}(x, y, z)` from a certificate `d` of `T^{⊗s}`; `base` certifies
/// `T` itself and is used for the `r − s⌊r/s⌋` leftover factors.
#[allow(clippy::too_many_arguments)]
pub fn yates_evaluate(
    t: &SparseTensor,
    d: &Decomposition,
    base: Option<&Decomposition>,
    r: usize,
    x: &[Rational],
    y: &[Rational],
    z: &[Rational],
    opts: &YatesOptions,
    metrics: &Metrics,
) -> Result<Rational> {
    let sparse = |v: &[Rational]| -> Vec<(u64, Rational)> {
        v.iter().enumerate().filter(|(_, a)| !num_traits::Zero::is_zero(*a)).map(|(i, a)| (i as u64, a.clone())).collect()
    };
    for (leg, v) in [x, y, z].iter().enumerate() {
        let want = t.dims()[leg].checked_pow(r as u32);
        if want != Some(v.len() as u64) {
            return Err(Error::DimensionMismatch(format!(
                "vector {} has length {}, expected {}^{r}",
                leg + 1,
                v.len(),
                t.dims()[leg]
            )));
        }
    }
    let (sx, sy, sz) = (sparse(x), sparse(y), sparse(z));
    yates_evaluate_sparse(t, d, base, r, [&sx, &sy, &sz], opts, metrics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, qi};
    use crate::tensor::{kronecker_power, matrix_mult_tensor, partitioning_tensor, trivial_decomposition, DEFAULT_MAX_NNZ};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<Rational> {
        (0..len).map(|_| if rng.random_bool(0.3) { qi(0) } else { q(rng.random_range(-5..=5), rng.random_range(1..=4)) }).collect()
    }

    fn check_all_strategies(t: &SparseTensor, s: usize, r: usize, seed: u64) {
        let d = trivial_decomposition(t, s, DEFAULT_MAX_NNZ).unwrap();
        let base = trivial_decomposition(t, 1, DEFAULT_MAX_NNZ).unwrap();
        let power = kronecker_power(t, r, DEFAULT_MAX_NNZ).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = power.dims();
        for _ in 0..5 {
            let x = random_vec(&mut rng, dims[0] as usize);
            let y = random_vec(&mut rng, dims[1] as usize);
            let z = random_vec(&mut rng, dims[2] as usize);
            let want = power.direct_evaluate(&x, &y, &z).unwrap();
            for strategy in [YatesStrategy::Auto, YatesStrategy::Dense, YatesStrategy::Sparse] {
                let opts = YatesOptions { strategy, ..Default::default() };
                let got = yates_evaluate(t, &d, Some(&base), r, &x, &y, &z, &opts, &Metrics::new()).unwrap();
                assert_eq!(got, want, "s={s} r={r} {strategy:?}");
            }
        }
    }

    #[test]
    fn agrees_with_direct_evaluation() {
        let t = partitioning_tensor(&q(1, 3), 3).unwrap();
        for (s, r) in [(1, 1), (1, 2), (2, 2), (2, 3), (1, 3)] {
            check_all_strategies(&t, s, r, 11 * s as u64 + r as u64);
        }
        let m2 = matrix_mult_tensor(2).unwrap();
        for (s, r) in [(1, 2), (2, 3)] {
            check_all_strategies(&m2, s, r, 99);
        }
    }

    #[test]
    fn counts_monomials_on_all_ones() {
        let t = partitioning_tensor(&q(1, 3), 3).unwrap();
        let d = trivial_decomposition(&t, 1, DEFAULT_MAX_NNZ).unwrap();
        let ones = vec![qi(1); 16];
        let m = Metrics::new();
        let v = yates_evaluate(&t, &d, None, 2, &ones, &ones, &ones, &YatesOptions::default(), &m).unwrap();
        assert_eq!(v, qi(36));
        assert!(m.snapshot().yates_ops > 0);
        let zeros = vec![qi(0); 16];
        assert_eq!(yates_evaluate(&t, &d, None, 2, &zeros, &ones, &ones, &YatesOptions::default(), &m).unwrap(), qi(0));
    }

    #[test]
    fn remainder_needs_a_base() {
        let t = partitioning_tensor(&q(1, 3), 3).unwrap();
        let d2 = trivial_decomposition(&t, 2, DEFAULT_MAX_NNZ).unwrap();
        let ones = vec![qi(1); 64];
        let err = yates_evaluate(&t, &d2, None, 3, &ones, &ones, &ones, &YatesOptions::default(), &Metrics::new());
        assert_eq!(err.unwrap_err(), Error::MissingRemainder { r: 3, s: 2 });
        let short = vec![qi(1); 63];
        assert!(yates_evaluate(&t, &d2, None, 3, &short, &ones, &ones, &YatesOptions::default(), &Metrics::new()).is_err());
    }

    #[test]
    fn dense_op_count_matches_the_pass_structure() {
        let t = partitioning_tensor(&q(1, 3), 3).unwrap();
        let d = trivial_decomposition(&t, 1, DEFAULT_MAX_NNZ).unwrap();
        let ones = vec![qi(1); 64];
        let m = Metrics::new();
        let opts = YatesOptions { strategy: YatesStrategy::Dense, ..Default::default() };
        yates_evaluate(&t, &d, None, 3, &ones, &ones, &ones, &opts, &m).unwrap();
        // Each leg: mode u costs (rows^u · cols^(r−1−u)) · nnz · 2; combine adds 3 per rank triple.
        let (c, rank, nnz) = (4u64, 6u64, 6u64);
        let per_leg: u64 = (0..3).map(|u| rank.pow(u) * c.pow(2 - u) * nnz * 2).sum();
        assert!(m.snapshot().yates_ops <= 3 * per_leg + 3 * rank.pow(3));
    }

    #[test]
    fn rational_fallback_matches() {
        let t = SparseTensor::from_entries([2, 2, 2], vec![([0, 1, 1], q(1, 2)), ([1, 0, 1], qi(3))]).unwrap();
        let d = trivial_decomposition(&t, 1, DEFAULT_MAX_NNZ).unwrap();
        let x = [q(1, 3), qi(1), qi(2), qi(0)];
        let power = kronecker_power(&t, 2, DEFAULT_MAX_NNZ).unwrap();
        let want = power.direct_evaluate(&x, &x, &x).unwrap();
        let got = yates_evaluate(&t, &d, None, 2, &x, &x, &x, &YatesOptions::default(), &Metrics::new()).unwrap();
        assert_eq!(got, want);
        let big = [Rational::from_integer(i128::MAX.into()), qi(1), qi(1), qi(1)];
        let want = power.direct_evaluate(&big, &big, &big).unwrap();
        let got = yates_evaluate(&t, &d, None, 2, &big, &big, &big, &YatesOptions::default(), &Metrics::new()).unwrap();
        assert_eq!(got, want);
    }
}
