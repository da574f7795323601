use std::collections::HashSet;
use std::sync::{Arc, Mutex};

use rustc_hash::FxHashMap;

use super::balancing::{build_balancing_family, BalancingFamily};
use crate::arith::{ceil_usize, q, qu, Rational};
use crate::error::{Error, Result};
use crate::metrics::Metrics;
use crate::sets::{
    elements, is_balanced_onto, is_nu_bounded, popcount, three_partitions_of, BalanceParams, BlockPartition, Mask,
    SetFamily,
};
use crate::tensor::{
    block_sum_tensor_with_cap, trivial_decomposition, yates_evaluate_sparse, Decomposition, LegLabel, SparseTensor,
    YatesOptions, DEFAULT_MAX_NNZ,
};

/// First `(A₁, A₂, A₃) ∈ F₁×F₂×F₃` that partitions the universe, scanning
/// `F₁` then `F₂` in the given order.
pub fn brute_tripartition(f1: &SetFamily, f2: &SetFamily, f3: &SetFamily) -> Option<[Mask; 3]> {
    let full = f1.universe().full();
    let third: HashSet<Mask> = f3.iter().collect();
    for a in f1.iter() {
        for b in f2.iter() {
            if a & b != 0 {
                continue;
            }
            let c = full & !(a | b);
            if third.contains(&c) {
                return Some([a, b, c]);
            }
        }
    }
    None
}

/// Members of `f` that are `(δ, r)`-balanced onto every block in `blocks`.
pub fn filter_block_balanced(f: &SetFamily, blocks: &[Mask], delta: &Rational, r: usize) -> SetFamily {
    f.filtered(|a| blocks.iter().all(|&b| is_balanced_onto(a, b, delta, r)))
}

/// A certified block-sum tensor ready for evaluation.
#[derive(Debug)]
pub struct Provided {
    pub tensor: SparseTensor,
    pub decomposition: Decomposition,
    /// Power-1 certificate for leftover factors when the main certificate
    /// has power above 1.
    pub base: Option<Decomposition>,
    positions: FxHashMap<LegLabel, u64>,
}

impl Provided {
    pub fn new(tensor: SparseTensor, decomposition: Decomposition, base: Option<Decomposition>) -> Result<Self> {
        let labels = tensor.labels().ok_or(Error::MissingLabels)?;
        if labels.factor_count() != 1 {
            return Err(Error::pre("block-sum tensor must be a single factor"));
        }
        let positions = (0..tensor.dims()[0]).map(|i| (labels.label(0, i)[0], i)).collect();
        Ok(Self { tensor, decomposition, base, positions })
    }

    /// Leg index of `(k, S)`.
    pub fn position(&self, label: LegLabel) -> Option<u64> {
        self.positions.get(&label).copied()
    }
}

/// Supplies certified decompositions of `block_sum_tensor_with_cap(cap, max_k)`.
pub trait DecompositionProvider: Send + Sync {
    fn provide(&self, cap: usize, max_k: usize) -> Result<Arc<Provided>>;
}

type Cache = Mutex<FxHashMap<(usize, usize), Arc<Provided>>>;

fn cached(cache: &Cache, key: (usize, usize), build: impl FnOnce() -> Result<Provided>) -> Result<Arc<Provided>> {
    if let Some(p) = cache.lock().expect("provider cache poisoned").get(&key) {
        return Ok(p.clone());
    }
    let p = Arc::new(build()?);
    cache.lock().expect("provider cache poisoned").insert(key, p.clone());
    Ok(p)
}

/// The rank-`nnz` certificate, built on demand and cached per `(cap, B)`.
#[derive(Debug)]
pub struct TrivialProvider {
    max_nnz: u128,
    cache: Cache,
}

impl Default for TrivialProvider {
    fn default() -> Self {
        Self::with_cap(DEFAULT_MAX_NNZ)
    }
}

impl TrivialProvider {
    pub fn new() -> Self {
        Self::default()
    }

    /// Refuses to build certificates with more than `max_nnz` terms.
    pub fn with_cap(max_nnz: u128) -> Self {
        Self { max_nnz, cache: Cache::default() }
    }
}

impl DecompositionProvider for TrivialProvider {
    fn provide(&self, cap: usize, max_k: usize) -> Result<Arc<Provided>> {
        cached(&self.cache, (cap, max_k), || {
            let t = block_sum_tensor_with_cap(cap, max_k)?;
            let d = trivial_decomposition(&t, 1, self.max_nnz)?;
            Provided::new(t, d, None)
        })
    }
}

/// A user-supplied certificate. It is used for the `(cap, B)` whose tensor it
/// verifies against; other shapes go to the trivial fallback if one is set.
#[derive(Debug)]
pub struct FileProvider {
    decomposition: Decomposition,
    fallback: Option<TrivialProvider>,
    max_nnz: u128,
    cache: Cache,
}

impl FileProvider {
    pub fn new(decomposition: Decomposition, trivial_fallback: bool) -> Self {
        Self::with_cap(decomposition, trivial_fallback, DEFAULT_MAX_NNZ)
    }

    pub fn with_cap(decomposition: Decomposition, trivial_fallback: bool, max_nnz: u128) -> Self {
        let fallback = trivial_fallback.then(|| TrivialProvider::with_cap(max_nnz));
        Self { decomposition, fallback, max_nnz, cache: Cache::default() }
    }
}

impl DecompositionProvider for FileProvider {
    fn provide(&self, cap: usize, max_k: usize) -> Result<Arc<Provided>> {
        let t = block_sum_tensor_with_cap(cap, max_k)?;
        if t.dims() != self.decomposition.leg_dims() {
            return match &self.fallback {
                Some(f) => f.provide(cap, max_k),
                None => Err(Error::Provider(format!(
                    "certificate legs {:?} do not match block-sum tensor legs {:?} (cap {cap}, B {max_k})",
                    self.decomposition.leg_dims(),
                    t.dims()
                ))),
            };
        }
        cached(&self.cache, (cap, max_k), || {
            self.decomposition.verify(&t).map_err(|e| Error::Provider(e.to_string()))?;
            let base = if self.decomposition.power() > 1 { Some(trivial_decomposition(&t, 1, self.max_nnz)?) } else { None };
            Provided::new(t, self.decomposition.clone(), base)
        })
    }
}

/// Bits of `m` at the positions of `block`, packed into the low bits.
fn compress(m: Mask, block: Mask) -> Mask {
    let mut out = 0;
    for (i, e) in elements(block).enumerate() {
        if m & crate::sets::element_bit(e) != 0 {
            out |= 1 << i;
        }
    }
    out
}

/// Index of `A` in the `s`-fold Kronecker power: the row-major combination
/// of the leg positions of `(|B_j|, A∩B_j)`.
fn encode(p: &Provided, a: Mask, blocks: &[Mask]) -> Result<u64> {
    let c = p.tensor.dims()[0];
    let mut idx: u64 = 0;
    for &blk in blocks {
        let label = (popcount(blk) as u32, compress(a & blk, blk));
        let pos = p.position(label).ok_or_else(|| {
            Error::pre(format!("set {a:#b} meets block {blk:#b} in {} elements, beyond the tensor cap", popcount(a & blk)))
        })?;
        idx = idx
            .checked_mul(c)
            .and_then(|v| v.checked_add(pos))
            .ok_or(Error::CapExceeded { needed: u128::from(c).pow(blocks.len() as u32), cap: u64::MAX as u128 })?;
    }
    Ok(idx)
}

/// Decides whether the stripped families (all sets inside `∪ blocks`) admit
/// a blockwise tripartition of `∪ blocks`.
#[allow(clippy::too_many_arguments)]
fn decide_blocks(
    families: [&[Mask]; 3],
    blocks: &[Mask],
    cap: usize,
    provider: &dyn DecompositionProvider,
    opts: &YatesOptions,
    metrics: &Metrics,
) -> Result<bool> {
    Metrics::add(&metrics.block_balanced_calls, 1);
    if families.iter().any(|f| f.is_empty()) {
        return Ok(false);
    }
    if blocks.is_empty() {
        // Empty universe: only (∅, ∅, ∅) partitions it.
        return Ok(families.iter().all(|f| f.contains(&0)));
    }
    let max_k = blocks.iter().map(|&b| popcount(b)).max().unwrap_or(0);
    let p = provider.provide(cap, max_k)?;
    let one = q(1, 1);
    let mut inputs: [Vec<(u64, Rational)>; 3] = Default::default();
    for (leg, fam) in families.iter().enumerate() {
        let mut idx = fam.iter().map(|&a| encode(&p, a, blocks)).collect::<Result<Vec<_>>>()?;
        idx.sort_unstable();
        idx.dedup();
        inputs[leg] = idx.into_iter().map(|i| (i, one.clone())).collect();
    }
    let value = yates_evaluate_sparse(
        &p.tensor,
        &p.decomposition,
        p.base.as_ref(),
        blocks.len(),
        [&inputs[0], &inputs[1], &inputs[2]],
        opts,
        metrics,
    )?;
    Ok(!num_traits::Zero::is_zero(&value))
}

/// `⌈ν'·n/r⌉`, the per-block part size the block-sum tensor must admit.
fn block_cap(params: &BalanceParams, n: usize) -> usize {
    ceil_usize(&(params.nu_prime() * qu(n) / qu(params.r)))
}

fn check_nu_prime(params: &BalanceParams) -> Result<()> {
    if !params.force_small && params.nu_prime() >= q(1, 2) {
        return Err(Error::pre(format!(
            "(1+δ)ν = {} must be below 1/2, i.e. δ < 1/(2ν) − 1",
            params.nu_prime()
        )));
    }
    Ok(())
}

fn check_universes(families: [&SetFamily; 3]) -> Result<()> {
    let u = families[0].universe();
    if families.iter().any(|f| f.universe() != u) {
        return Err(Error::pre("families live over different universes"));
    }
    Ok(())
}

/// Block-balanced three-way partitioning over a partition with no fault
/// block: sets not balanced onto every block are dropped first.
pub fn solve_block_balanced(
    f1: &SetFamily,
    f2: &SetFamily,
    f3: &SetFamily,
    bp: &BlockPartition,
    params: &BalanceParams,
    provider: &dyn DecompositionProvider,
    metrics: &Metrics,
) -> Result<bool> {
    solve_block_balanced_with(f1, f2, f3, bp, params, provider, &YatesOptions::default(), metrics)
}

#[allow(clippy::too_many_arguments)]
pub fn solve_block_balanced_with(
    f1: &SetFamily,
    f2: &SetFamily,
    f3: &SetFamily,
    bp: &BlockPartition,
    params: &BalanceParams,
    provider: &dyn DecompositionProvider,
    opts: &YatesOptions,
    metrics: &Metrics,
) -> Result<bool> {
    check_universes([f1, f2, f3])?;
    check_nu_prime(params)?;
    if bp.fault_block() != 0 {
        return Err(Error::pre("block-balanced solver expects an empty fault block"));
    }
    let n = f1.n();
    let b = qu(n) / qu(params.r);
    let (lo, hi) = ((qu(1) - &params.delta) * &b, (qu(1) + &params.delta) * &b);
    for &blk in bp.blocks() {
        let s = qu(popcount(blk));
        if s < lo || s > hi {
            return Err(Error::pre(format!("block {blk:#b} has {s} elements, outside (1±δ)n/r = [{lo}, {hi}]")));
        }
    }
    let keep: Vec<Vec<Mask>> = [f1, f2, f3]
        .iter()
        .map(|f| filter_block_balanced(f, bp.blocks(), &params.delta, params.r).members().to_vec())
        .collect();
    decide_blocks([&keep[0], &keep[1], &keep[2]], bp.blocks(), block_cap(params, n), provider, opts, metrics)
}

/// Parameters of the full reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripartitionConfig {
    pub nu: Rational,
    pub delta: Rational,
    pub b_prime: Rational,
    pub force_small: bool,
    pub yates: YatesOptions,
}

impl TripartitionConfig {
    /// Desk-scale setting: `b' = n` (a single block, no hashing) and
    /// `δ = (1/(2ν) − 1)/2`, halfway to the solver's bound.
    pub fn desk(nu: Rational, n: usize) -> Self {
        let delta = (q(1, 2) / &nu - q(1, 1)) / qu(2);
        Self { nu, delta, b_prime: qu(n), force_small: true, yates: YatesOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripartitionOutcome {
    /// Witness recovered from the first successful iteration.
    pub witness: Option<[Mask; 3]>,
    /// `(partition index, fault split)` of the first success.
    pub hit: Option<(usize, [Mask; 3])>,
    pub family_size: usize,
    pub dropped_structural: usize,
    pub dropped_duplicate: usize,
    pub r: usize,
    pub max_fault: usize,
}

impl TripartitionOutcome {
    pub fn found(&self) -> bool {
        self.hit.is_some()
    }
}

/// Three-way partitioning of ν-bounded families through a balancing family:
/// every member and every 3-split of its fault block gives one
/// block-balanced instance.
pub fn solve_tripartition(
    f1: &SetFamily,
    f2: &SetFamily,
    f3: &SetFamily,
    cfg: &TripartitionConfig,
    provider: &dyn DecompositionProvider,
    metrics: &Metrics,
) -> Result<TripartitionOutcome> {
    check_universes([f1, f2, f3])?;
    if cfg.nu < q(1, 3) || cfg.nu >= q(1, 2) {
        return Err(Error::pre(format!("nu must lie in [1/3, 1/2), got {}", cfg.nu)));
    }
    for (i, f) in [f1, f2, f3].iter().enumerate() {
        if !is_nu_bounded(f, &cfg.nu) {
            return Err(Error::pre(format!("family {} is not {}-bounded", i + 1, cfg.nu)));
        }
    }
    let n = f1.n();
    let fam = build_balancing_family(n, &cfg.delta, &cfg.nu, &cfg.b_prime, cfg.force_small)?;
    check_nu_prime(&fam.params)?;
    run_reduction([f1, f2, f3], &fam, cfg, provider, metrics)
}

fn run_reduction(
    families: [&SetFamily; 3],
    fam: &BalancingFamily,
    cfg: &TripartitionConfig,
    provider: &dyn DecompositionProvider,
    metrics: &Metrics,
) -> Result<TripartitionOutcome> {
    Metrics::add(&metrics.tripartition_calls, 1);
    let n = families[0].n();
    let params = &fam.params;
    let cap = block_cap(params, n);
    let mut outcome = TripartitionOutcome {
        witness: None,
        hit: None,
        family_size: fam.len(),
        dropped_structural: fam.dropped_structural,
        dropped_duplicate: fam.dropped_duplicate,
        r: params.r,
        max_fault: fam.partitions.iter().map(|bp| popcount(bp.fault_block())).max().unwrap_or(0),
    };
    for (pi, bp) in fam.partitions.iter().enumerate() {
        let b0 = bp.fault_block();
        // Balanced members grouped by their trace on the fault block.
        let groups: Vec<FxHashMap<Mask, Vec<Mask>>> = families
            .iter()
            .map(|f| {
                let mut g: FxHashMap<Mask, Vec<Mask>> = FxHashMap::default();
                for a in filter_block_balanced(f, bp.blocks(), &params.delta, params.r).iter() {
                    g.entry(a & b0).or_default().push(a);
                }
                g
            })
            .collect();
        for (x1, x2, x3) in three_partitions_of(b0) {
            Metrics::add(&metrics.tripartition_iterations, 1);
            let (Some(g1), Some(g2), Some(g3)) = (groups[0].get(&x1), groups[1].get(&x2), groups[2].get(&x3)) else {
                continue;
            };
            let strip = |g: &[Mask]| g.iter().map(|&a| a & !b0).collect::<Vec<_>>();
            let (s1, s2, s3) = (strip(g1), strip(g2), strip(g3));
            if decide_blocks([&s1, &s2, &s3], bp.blocks(), cap, provider, &cfg.yates, metrics)? {
                outcome.hit = Some((pi, [x1, x2, x3]));
                outcome.witness = recover_witness([g1, g2, g3], families[0].universe().full());
                return Ok(outcome);
            }
        }
    }
    Ok(outcome)
}

fn recover_witness(groups: [&[Mask]; 3], full: Mask) -> Option<[Mask; 3]> {
    let third: HashSet<Mask> = groups[2].iter().copied().collect();
    for &a in groups[0] {
        for &b in groups[1] {
            if a & b == 0 && third.contains(&(full & !(a | b))) {
                return Some([a, b, full & !(a | b)]);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::qi;
    use crate::sets::{mask_of, Universe};
    use proptest::prelude::*;

    fn fam(n: usize, sets: &[&[usize]]) -> SetFamily {
        SetFamily::new(Universe::new(n).unwrap(), sets.iter().map(|s| mask_of(s)).collect()).unwrap()
    }

    fn two_subsets(n: usize) -> SetFamily {
        let u = Universe::new(n).unwrap();
        SetFamily::new(u, (0..1u64 << n).filter(|m| m.count_ones() == 2).collect()).unwrap()
    }

    #[test]
    fn brute_examples() {
        let f = two_subsets(6);
        assert_eq!(brute_tripartition(&f, &f, &f), Some([mask_of(&[1, 2]), mask_of(&[3, 4]), mask_of(&[5, 6])]));
        let any = two_subsets(6);
        assert_eq!(brute_tripartition(&fam(6, &[&[1, 2, 3]]), &fam(6, &[&[1, 4]]), &any), None);
        let s = fam(3, &[&[1], &[2], &[3]]);
        assert!(brute_tripartition(&s, &s, &s).is_some());
    }

    #[test]
    fn filter_examples() {
        let f = two_subsets(8);
        assert_eq!(filter_block_balanced(&f, &[], &q(0, 1), 2), f);
        assert_eq!(filter_block_balanced(&f, &[0b1111, 0b1111_0000], &qi(1), 2), f);
        let u = Universe::new(8).unwrap();
        let all = SetFamily::new(u, (0..256).collect()).unwrap();
        let even = filter_block_balanced(&all, &[0b1111, 0b1111_0000], &q(0, 1), 2);
        assert!(even.iter().all(|m| (m & 0b1111).count_ones() == (m >> 4).count_ones()));
        assert_eq!(even.len(), (0..=4).map(|k| crate::arith::binomial(4, k).pow(2) as usize).sum::<usize>());
    }

    #[test]
    fn compress_packs_block_bits() {
        assert_eq!(compress(mask_of(&[3, 6]), mask_of(&[2, 3, 6])), 0b110);
        assert_eq!(compress(0, mask_of(&[1, 2])), 0);
    }

    fn six_blocks() -> BlockPartition {
        let u = Universe::new(6).unwrap();
        BlockPartition::new(u, 0, vec![mask_of(&[1, 2]), mask_of(&[3, 4]), mask_of(&[5, 6])]).unwrap()
    }

    #[test]
    fn block_balanced_examples() {
        let params = BalanceParams { delta: qi(1), r: 3, nu: q(1, 3), force_small: true };
        let provider = TrivialProvider::new();
        let metrics = Metrics::new();
        let f = two_subsets(6);
        let got = solve_block_balanced(&f, &f, &f, &six_blocks(), &params, &provider, &metrics).unwrap();
        let keep = filter_block_balanced(&f, six_blocks().blocks(), &params.delta, 3);
        assert_eq!(got, brute_tripartition(&keep, &keep, &keep).is_some());
        assert!(got);

        let empty = SetFamily::empty(Universe::new(6).unwrap());
        assert!(!solve_block_balanced(&empty, &empty, &empty, &six_blocks(), &params, &provider, &metrics).unwrap());
    }

    #[test]
    fn block_balanced_preconditions() {
        let provider = TrivialProvider::new();
        let metrics = Metrics::new();
        let f = two_subsets(6);
        let strict = BalanceParams { delta: qi(1), r: 3, nu: q(1, 3), force_small: false };
        assert!(matches!(
            solve_block_balanced(&f, &f, &f, &six_blocks(), &strict, &provider, &metrics),
            Err(Error::Precondition(_))
        ));
        let skew = BlockPartition::new(Universe::new(6).unwrap(), 0, vec![0b1, 0b111110]).unwrap();
        let params = BalanceParams { delta: q(1, 4), r: 2, nu: q(1, 3), force_small: false };
        assert!(solve_block_balanced(&f, &f, &f, &skew, &params, &provider, &metrics).is_err());
    }

    #[test]
    fn desk_config_values() {
        let c = TripartitionConfig::desk(q(1, 3), 12);
        assert_eq!(c.delta, q(1, 4));
        assert_eq!(c.b_prime, qi(12));
        let c = TripartitionConfig::desk(q(2, 5), 10);
        assert_eq!(c.delta, q(1, 8));
        assert!((qi(1) + &c.delta) * &c.nu < q(1, 2));
    }

    #[test]
    fn reduction_rejects_unbounded_families() {
        let full = fam(6, &[&[1, 2, 3, 4, 5, 6]]);
        let cfg = TripartitionConfig::desk(q(1, 3), 6);
        let provider = TrivialProvider::new();
        let err = solve_tripartition(&full, &full, &full, &cfg, &provider, &Metrics::new()).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        let bad_nu = TripartitionConfig::desk(q(1, 4), 6);
        assert!(solve_tripartition(&full, &full, &full, &bad_nu, &provider, &Metrics::new()).is_err());
    }

    #[test]
    fn reduction_finds_planted_witness() {
        let u = Universe::new(12).unwrap();
        let parts = [mask_of(&[1, 4, 7, 10, 12]), mask_of(&[2, 5, 8, 11]), mask_of(&[3, 6, 9])];
        let noise = [mask_of(&[1, 2]), mask_of(&[3, 4, 5]), mask_of(&[6, 7, 8, 9])];
        let f: Vec<SetFamily> = (0..3)
            .map(|i| {
                let mut m = noise.to_vec();
                m.push(parts[i]);
                SetFamily::new(u, m).unwrap()
            })
            .collect();
        let provider = TrivialProvider::new();
        let metrics = Metrics::new();
        let cfg = TripartitionConfig::desk(q(5, 12), 12);
        let out = solve_tripartition(&f[0], &f[1], &f[2], &cfg, &provider, &metrics).unwrap();
        assert_eq!(out.witness, Some(parts));

        let hashed = TripartitionConfig { nu: q(5, 12), delta: q(1, 2), b_prime: qi(4), force_small: true, yates: YatesOptions::default() };
        let out = solve_tripartition(&f[0], &f[1], &f[2], &hashed, &provider, &metrics).unwrap();
        assert_eq!(out.r, 3);
        assert_eq!(out.witness, Some(parts));
        let snap = metrics.snapshot();
        assert!(snap.block_balanced_calls <= snap.tripartition_iterations);
    }

    fn family_strategy(n: usize, max_size: usize) -> impl Strategy<Value = Vec<Mask>> {
        prop::collection::vec(0u64..(1u64 << n), 0..24)
            .prop_map(move |v| v.into_iter().filter(|m| m.count_ones() as usize <= max_size).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn block_balanced_matches_brute(
            n in 3usize..=9,
            sets in (family_strategy(9, 4), family_strategy(9, 4), family_strategy(9, 4)),
            r in 1usize..=3,
        ) {
            let u = Universe::new(n).unwrap();
            let clip = |v: &Vec<Mask>| SetFamily::new(u, v.iter().map(|m| m & u.full()).collect()).unwrap();
            let (f1, f2, f3) = (clip(&sets.0), clip(&sets.1), clip(&sets.2));
            let r = r.min(n);
            let blocks: Vec<Mask> = (0..r)
                .map(|j| (1..=n).filter(|x| x % r == j).fold(0, |m, x| m | crate::sets::element_bit(x)))
                .collect();
            let bp = BlockPartition::new(u, 0, blocks).unwrap();
            let params = BalanceParams { delta: qi(1), r, nu: q(4, 9).max(qu(4) / qu(n)), force_small: true };
            let provider = TrivialProvider::new();
            let got = solve_block_balanced(&f1, &f2, &f3, &bp, &params, &provider, &Metrics::new());
            let keep: Vec<SetFamily> = [&f1, &f2, &f3].iter().map(|f| filter_block_balanced(f, bp.blocks(), &params.delta, r)).collect();
            let want = brute_tripartition(&keep[0], &keep[1], &keep[2]).is_some();
            prop_assert_eq!(got.unwrap(), want);
        }
    }
}
