//! Sparse exact-rational trilinear forms.
//!
//! A Kronecker product pairs indices row-major: index `(i, i')` of `T ⊗ T'`
//! is `i·c' + i'`, so the leftmost factor is the most significant digit. The
//! decomposition and evaluation code use the same convention.

mod decomp;
mod yates;

use std::sync::Arc;

use rustc_hash::FxHashMap;

use crate::arith::{ceil_usize, parse_rational, require_positive, Rational};
use crate::error::{Error, Result};
use crate::sets::{popcount, submasks, Mask};

pub use decomp::{trivial_decomposition, Decomposition, FactorMatrix};
pub use decomp::Verification;
pub use yates::{yates_evaluate, yates_evaluate_sparse, YatesOptions, YatesStrategy};

/// Default cap on materialized nonzeros.
pub const DEFAULT_MAX_NNZ: u128 = 10_000_000;

/// A leg label `(k, S)`: the subset `S ⊆ [k]`.
pub type LegLabel = (u32, Mask);

/// Per-factor label tables. A leg index of a Kronecker product decomposes
/// row-major into one index per factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    factors: Vec<[Arc<[LegLabel]>; 3]>,
}

impl Labels {
    fn single(tables: [Vec<LegLabel>; 3]) -> Self {
        let [a, b, c] = tables;
        Self { factors: vec![[a.into(), b.into(), c.into()]] }
    }

    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    /// Labels of leg `leg` at `index`, one per factor, outermost first.
    pub fn label(&self, leg: usize, mut index: u64) -> Vec<LegLabel> {
        let mut out = vec![(0, 0); self.factors.len()];
        for (slot, f) in out.iter_mut().zip(&self.factors).rev() {
            let len = f[leg].len() as u64;
            *slot = f[leg][(index % len) as usize];
            index /= len;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseTensor {
    dims: [u64; 3],
    entries: Vec<[u64; 3]>,
    // None means every stored coefficient is 1.
    coeffs: Option<Vec<Rational>>,
    labels: Option<Labels>,
}

impl SparseTensor {
    /// Builds a tensor from `(i, j, k, a)` entries; zero coefficients are
    /// dropped and repeated indices summed.
    pub fn from_entries(dims: [u64; 3], raw: Vec<([u64; 3], Rational)>) -> Result<Self> {
        let mut map: FxHashMap<[u64; 3], Rational> = FxHashMap::default();
        for (idx, a) in raw {
            for leg in 0..3 {
                if idx[leg] >= dims[leg] {
                    return Err(Error::DimensionMismatch(format!(
                        "index {} out of range on leg {} of size {}",
                        idx[leg],
                        leg + 1,
                        dims[leg]
                    )));
                }
            }
            *map.entry(idx).or_default() += a;
        }
        let mut items: Vec<_> = map.into_iter().filter(|(_, a)| !num_traits::Zero::is_zero(a)).collect();
        items.sort_unstable_by_key(|(idx, _)| *idx);
        let (entries, coeffs): (Vec<_>, Vec<_>) = items.into_iter().unzip();
        Ok(Self::with_coeffs(dims, entries, coeffs))
    }

    fn with_coeffs(dims: [u64; 3], entries: Vec<[u64; 3]>, coeffs: Vec<Rational>) -> Self {
        let all_ones = coeffs.iter().all(num_traits::One::is_one);
        Self { dims, entries, coeffs: (!all_ones).then_some(coeffs), labels: None }
    }

    fn ones(dims: [u64; 3], mut entries: Vec<[u64; 3]>, labels: Option<Labels>) -> Self {
        entries.sort_unstable();
        Self { dims, entries, coeffs: None, labels }
    }

    pub fn dims(&self) -> [u64; 3] {
        self.dims
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn indices(&self) -> &[[u64; 3]] {
        &self.entries
    }

    pub fn is_zero_one(&self) -> bool {
        self.coeffs.is_none()
    }

    pub fn coeff_at(&self, pos: usize) -> Rational {
        match &self.coeffs {
            None => Rational::from_integer(1.into()),
            Some(c) => c[pos].clone(),
        }
    }

    /// Entries in sorted index order.
    pub fn entries(&self) -> impl Iterator<Item = ([u64; 3], Rational)> + '_ {
        self.entries.iter().enumerate().map(|(p, &idx)| (idx, self.coeff_at(p)))
    }

    pub fn get(&self, idx: [u64; 3]) -> Rational {
        match self.entries.binary_search(&idx) {
            Ok(p) => self.coeff_at(p),
            Err(_) => Rational::from_integer(0.into()),
        }
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    /// Support as mask triples; only for tensors with single-factor labels.
    pub fn support_masks(&self) -> Result<Vec<[Mask; 3]>> {
        let labels = self.labels.as_ref().ok_or(Error::MissingLabels)?;
        if labels.factor_count() != 1 {
            return Err(Error::DimensionMismatch(format!(
                "support masks need single-factor labels, found {} factors",
                labels.factor_count()
            )));
        }
        Ok(self
            .entries
            .iter()
            .map(|idx| {
                let f = &labels.factors[0];
                [f[0][idx[0] as usize].1, f[1][idx[1] as usize].1, f[2][idx[2] as usize].1]
            })
            .collect())
    }

    /// `Σ a_ijk x_i y_j z_k` over the stored entries.
    pub fn direct_evaluate(&self, x: &[Rational], y: &[Rational], z: &[Rational]) -> Result<Rational> {
        for (leg, v) in [x, y, z].iter().enumerate() {
            if v.len() as u64 != self.dims[leg] {
                return Err(Error::DimensionMismatch(format!(
                    "vector {} has length {}, leg has dimension {}",
                    leg + 1,
                    v.len(),
                    self.dims[leg]
                )));
            }
        }
        let mut acc = Rational::from_integer(0.into());
        for (p, idx) in self.entries.iter().enumerate() {
            let (a, b, c) = (&x[idx[0] as usize], &y[idx[1] as usize], &z[idx[2] as usize]);
            if num_traits::Zero::is_zero(a) || num_traits::Zero::is_zero(b) || num_traits::Zero::is_zero(c) {
                continue;
            }
            let term = a * b * c;
            acc += match &self.coeffs {
                None => term,
                Some(cs) => term * &cs[p],
            };
        }
        Ok(acc)
    }

    /// Parses the `tensor v1` text format: a `dims a b c` line, then one
    /// `i j k coeff` line per entry with 0-based indices. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (no, header) = lines.next().ok_or_else(|| Error::parse(0, "empty tensor file"))?;
        if header != "tensor v1" {
            return Err(Error::parse(no, format!("expected \"tensor v1\", found {header:?}")));
        }
        let (no, line) = lines.next().ok_or_else(|| Error::parse(no, "missing dims line"))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 4 || toks[0] != "dims" {
            return Err(Error::parse(no, format!("expected \"dims a b c\", found {line:?}")));
        }
        let mut dims = [0u64; 3];
        for (leg, tok) in toks[1..].iter().enumerate() {
            dims[leg] = tok.parse().map_err(|_| Error::parse(no, format!("bad dimension {tok:?}")))?;
        }
        let mut raw = Vec::new();
        for (no, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 4 {
                return Err(Error::parse(no, format!("expected \"i j k coeff\", found {line:?}")));
            }
            let mut idx = [0u64; 3];
            for leg in 0..3 {
                idx[leg] = toks[leg].parse().map_err(|_| Error::parse(no, format!("bad index {:?}", toks[leg])))?;
                if idx[leg] >= dims[leg] {
                    return Err(Error::parse(no, format!("index {} out of range for leg {} of size {}", idx[leg], leg + 1, dims[leg])));
                }
            }
            let a = parse_rational(toks[3]).map_err(|e| Error::parse(no, e))?;
            raw.push((idx, a));
        }
        Self::from_entries(dims, raw)
    }

    pub fn to_text(&self) -> String {
        let [a, b, c] = self.dims;
        let mut out = format!("tensor v1\ndims {a} {b} {c}\n");
        for ([i, j, k], v) in self.entries() {
            out.push_str(&format!("{i} {j} {k} {v}\n"));
        }
        out
    }
}

/// Leg sets of a partitioning tensor on `[k]`: subsets of size at most `cap`
/// in increasing mask order, with a dense mask → position table.
fn leg_sets(k: usize, cap: usize) -> Result<(Vec<Mask>, Vec<u32>)> {
    if k > 24 {
        return Err(Error::CapExceeded { needed: 1u128 << k, cap: 1u128 << 24 });
    }
    let full: Mask = if k == 0 { 0 } else { (1u64 << k) - 1 };
    let sets: Vec<Mask> = submasks(full).filter(|&m| popcount(m) <= cap).collect();
    let mut pos = vec![u32::MAX; 1usize << k];
    for (p, &m) in sets.iter().enumerate() {
        pos[m as usize] = p as u32;
    }
    Ok((sets, pos))
}

fn tripartition_entries(k: usize, cap: usize, pos: &[u32], offset: u64, out: &mut Vec<[u64; 3]>) {
    let full: Mask = if k == 0 { 0 } else { (1u64 << k) - 1 };
    for i in submasks(full).filter(|&m| popcount(m) <= cap) {
        let rest = full & !i;
        for j in submasks(rest).filter(|&m| popcount(m) <= cap) {
            let l = rest & !j;
            if popcount(l) <= cap {
                out.push([
                    offset + pos[i as usize] as u64,
                    offset + pos[j as usize] as u64,
                    offset + pos[l as usize] as u64,
                ]);
            }
        }
    }
}

/// `T_{τ,k}`: coefficient 1 on every ordered tripartition `I ∪̇ J ∪̇ K = [k]`
/// with all parts of size at most `⌈τk⌉`.
pub fn partitioning_tensor(tau: &Rational, k: usize) -> Result<SparseTensor> {
    require_positive("tau", tau)?;
    if *tau > Rational::from_integer(1.into()) {
        return Err(Error::param(format!("tau must be at most 1, got {tau}")));
    }
    if k == 0 {
        return Err(Error::param("k must be positive"));
    }
    let cap = ceil_usize(&(tau * Rational::from_integer(k.into())));
    let (sets, pos) = leg_sets(k, cap)?;
    let mut entries = Vec::new();
    tripartition_entries(k, cap, &pos, 0, &mut entries);
    let table: Vec<LegLabel> = sets.iter().map(|&m| (k as u32, m)).collect();
    let c = sets.len() as u64;
    let labels = Labels::single([table.clone(), table.clone(), table]);
    Ok(SparseTensor::ones([c, c, c], entries, Some(labels)))
}

/// Direct sum of partitioning tensors on `[1], …, [max_k]` with every part of
/// size at most `cap`. Leg indices are `(k, S)` ordered by `k`, then mask.
pub fn block_sum_tensor_with_cap(cap: usize, max_k: usize) -> Result<SparseTensor> {
    if max_k == 0 {
        return Err(Error::param("block size bound must be positive"));
    }
    let mut table: Vec<LegLabel> = Vec::new();
    let mut entries = Vec::new();
    for k in 1..=max_k {
        let (sets, pos) = leg_sets(k, cap)?;
        tripartition_entries(k, cap, &pos, table.len() as u64, &mut entries);
        table.extend(sets.iter().map(|&m| (k as u32, m)));
    }
    let c = table.len() as u64;
    let labels = Labels::single([table.clone(), table.clone(), table]);
    Ok(SparseTensor::ones([c, c, c], entries, Some(labels)))
}

/// `Σ_{k=1}^{B} Σ X_{k,I} Y_{k,J} Z_{k,K}` over tripartitions of `[k]` with
/// parts of size at most `⌈ν'b⌉`.
pub fn block_sum_tensor(nu_prime: &Rational, b: &Rational, max_k: usize) -> Result<SparseTensor> {
    require_positive("nu'", nu_prime)?;
    require_positive("b", b)?;
    if *nu_prime >= crate::arith::q(1, 2) {
        return Err(Error::pre(format!("nu' must be below 1/2, got {nu_prime}")));
    }
    block_sum_tensor_with_cap(ceil_usize(&(nu_prime * b)), max_k)
}

/// Leg dimension of [`block_sum_tensor_with_cap`].
pub fn block_sum_leg_dimension(cap: usize, max_k: usize) -> u128 {
    (1..=max_k).map(|k| (0..=cap.min(k)).map(|j| crate::arith::binomial(k, j)).sum::<u128>()).sum()
}

/// `M_n = Σ X_{ij} Y_{jk} Z_{ki}`, pair `(i, j)` stored at `i·n + j`.
pub fn matrix_mult_tensor(n: usize) -> Result<SparseTensor> {
    if n == 0 {
        return Err(Error::param("matrix size must be positive"));
    }
    let n = n as u64;
    let mut entries = Vec::with_capacity((n * n * n) as usize);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                entries.push([i * n + j, j * n + k, k * n + i]);
            }
        }
    }
    Ok(SparseTensor::ones([n * n; 3], entries, None))
}

fn checked_dims(a: [u64; 3], b: [u64; 3]) -> Result<[u64; 3]> {
    let mut out = [0u64; 3];
    for leg in 0..3 {
        out[leg] = a[leg].checked_mul(b[leg]).ok_or_else(|| {
            Error::CapExceeded { needed: a[leg] as u128 * b[leg] as u128, cap: u64::MAX as u128 }
        })?;
    }
    Ok(out)
}

/// `T ⊗ T'` with coefficients `a_ijk · b_i'j'k'`.
pub fn kronecker(t: &SparseTensor, u: &SparseTensor) -> Result<SparseTensor> {
    kronecker_capped(t, u, DEFAULT_MAX_NNZ)
}

/// `T ⊗ T'`, refusing to materialize more than `cap` nonzeros.
pub fn kronecker_capped(t: &SparseTensor, u: &SparseTensor, cap: u128) -> Result<SparseTensor> {
    let needed = t.nnz() as u128 * u.nnz() as u128;
    if needed > cap {
        return Err(Error::CapExceeded { needed, cap });
    }
    let dims = checked_dims(t.dims, u.dims)?;
    let mut entries = Vec::with_capacity(needed as usize);
    for a in &t.entries {
        for b in &u.entries {
            entries.push([a[0] * u.dims[0] + b[0], a[1] * u.dims[1] + b[1], a[2] * u.dims[2] + b[2]]);
        }
    }
    let coeffs = if t.coeffs.is_none() && u.coeffs.is_none() {
        None
    } else {
        let mut cs = Vec::with_capacity(entries.len());
        for p in 0..t.nnz() {
            let a = t.coeff_at(p);
            for q in 0..u.nnz() {
                cs.push(&a * u.coeff_at(q));
            }
        }
        Some(cs)
    };
    let (entries, coeffs) = match coeffs {
        None => {
            let mut entries = entries;
            entries.sort_unstable();
            (entries, None)
        }
        Some(cs) => {
            let mut paired: Vec<_> = entries.into_iter().zip(cs).collect();
            paired.sort_unstable_by_key(|(idx, _)| *idx);
            let (e, c): (Vec<_>, Vec<_>) = paired.into_iter().unzip();
            (e, Some(c))
        }
    };
    let labels = match (&t.labels, &u.labels) {
        (Some(a), Some(b)) => Some(Labels { factors: a.factors.iter().chain(&b.factors).cloned().collect() }),
        _ => None,
    };
    Ok(SparseTensor { dims, entries, coeffs, labels })
}

/// `T^{⊗r}`, folded left to right; refuses when `nnz(T)^r > cap`.
pub fn kronecker_power(t: &SparseTensor, r: usize, cap: u128) -> Result<SparseTensor> {
    if r == 0 {
        return Err(Error::param("power must be positive"));
    }
    let mut needed: u128 = 1;
    for _ in 0..r {
        needed = needed.saturating_mul(t.nnz() as u128);
    }
    if needed > cap {
        return Err(Error::CapExceeded { needed, cap });
    }
    let mut acc = t.clone();
    for _ in 1..r {
        acc = kronecker_capped(&acc, t, cap)?;
    }
    Ok(acc)
}

/// Relabels a power of a partitioning tensor on `[k]` so that the leg index
/// `(S_1, …, S_r)` becomes `∪_u (S_u shifted by (u−1)k) ⊆ [rk]`.
///
/// The result's legs are the distinct remapped subsets in increasing mask
/// order, labelled `(rk, S)`.
pub fn remap_partition_indices(t: &SparseTensor, k: usize, r: usize) -> Result<SparseTensor> {
    let labels = t.labels.as_ref().ok_or(Error::MissingLabels)?;
    if labels.factor_count() != r {
        return Err(Error::DimensionMismatch(format!(
            "tensor has {} label factors, expected {r}",
            labels.factor_count()
        )));
    }
    if r * k > 63 {
        return Err(Error::param(format!("r·k = {} exceeds the 63-element limit", r * k)));
    }
    let remap = |leg: usize, idx: u64| -> Result<Mask> {
        let mut out = 0;
        for (u, (kk, s)) in labels.label(leg, idx).into_iter().enumerate() {
            if kk as usize != k {
                return Err(Error::DimensionMismatch(format!("label universe {kk} differs from k = {k}")));
            }
            out |= s << (u * k);
        }
        Ok(out)
    };
    let mut triples = Vec::with_capacity(t.nnz());
    for idx in &t.entries {
        triples.push([remap(0, idx[0])?, remap(1, idx[1])?, remap(2, idx[2])?]);
    }
    let mut tables: [Vec<Mask>; 3] = Default::default();
    for (leg, table) in tables.iter_mut().enumerate() {
        *table = triples.iter().map(|tr| tr[leg]).collect();
        table.sort_unstable();
        table.dedup();
    }
    let find = |leg: usize, m: Mask| tables[leg].binary_search(&m).expect("mask collected above") as u64;
    let mut raw: Vec<([u64; 3], usize)> =
        triples.iter().enumerate().map(|(p, tr)| ([find(0, tr[0]), find(1, tr[1]), find(2, tr[2])], p)).collect();
    raw.sort_unstable();
    if raw.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::pre("remapping is not injective on the support"));
    }
    let dims = [tables[0].len() as u64, tables[1].len() as u64, tables[2].len() as u64];
    let entries = raw.iter().map(|(idx, _)| *idx).collect();
    let coeffs = t.coeffs.as_ref().map(|_| raw.iter().map(|(_, p)| t.coeff_at(*p)).collect());
    let rk = (r * k) as u32;
    let to_labels = |table: &Vec<Mask>| table.iter().map(|&m| (rk, m)).collect::<Vec<_>>();
    let labels = Labels::single([to_labels(&tables[0]), to_labels(&tables[1]), to_labels(&tables[2])]);
    Ok(SparseTensor { dims, entries, coeffs, labels: Some(labels) })
}
