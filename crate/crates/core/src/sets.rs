//! Universes, bitmask subsets, set families and block partitions.
//!
//! Elements are 1-based: element `i` lives in bit `i - 1`.

use std::fmt;

use crate::arith::{qu, Rational};
use crate::error::{Error, Result};

pub type Mask = u64;

pub const MAX_UNIVERSE: usize = 63;

#[inline]
pub fn popcount(m: Mask) -> usize {
    m.count_ones() as usize
}

#[inline]
pub fn element_bit(i: usize) -> Mask {
    1u64 << (i - 1)
}

/// Elements of `m` in increasing order (1-based).
pub fn elements(m: Mask) -> impl Iterator<Item = usize> {
    let mut rest = m;
    std::iter::from_fn(move || {
        if rest == 0 {
            None
        } else {
            let tz = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(tz + 1)
        }
    })
}

pub fn mask_of(elems: &[usize]) -> Mask {
    elems.iter().fold(0, |m, &e| m | element_bit(e))
}

/// All submasks of `m`, in increasing numeric order.
pub fn submasks(m: Mask) -> impl Iterator<Item = Mask> {
    let mut next = Some(0u64);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == m { None } else { Some(((cur | !m).wrapping_add(1)) & m) };
        Some(cur)
    })
}

pub fn format_mask(m: Mask) -> String {
    if m == 0 {
        return "-".to_string();
    }
    elements(m).map(|e| e.to_string()).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Universe {
    n: usize,
}

impl Universe {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_UNIVERSE {
            return Err(Error::param(format!("universe size must be in 1..={MAX_UNIVERSE}, got {n}")));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn full(&self) -> Mask {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    pub fn contains(&self, m: Mask) -> bool {
        m & !self.full() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetFamily {
    universe: Universe,
    members: Vec<Mask>,
}

impl SetFamily {
    pub fn new(universe: Universe, members: Vec<Mask>) -> Result<Self> {
        if let Some(&bad) = members.iter().find(|&&m| !universe.contains(m)) {
            return Err(Error::param(format!(
                "set {} is not contained in [{}]",
                format_mask(bad),
                universe.n()
            )));
        }
        Ok(Self { universe, members })
    }

    pub fn empty(universe: Universe) -> Self {
        Self { universe, members: Vec::new() }
    }

    /// Every subset of `[n]` of size at most `max_size`, ordered by mask value.
    pub fn all_subsets_up_to(universe: Universe, max_size: usize) -> Self {
        let full = universe.full();
        let members = submasks(full).filter(|&m| popcount(m) <= max_size).collect();
        Self { universe, members }
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn n(&self) -> usize {
        self.universe.n()
    }

    pub fn members(&self) -> &[Mask] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Mask> + '_ {
        self.members.iter().copied()
    }

    pub fn filtered(&self, keep: impl Fn(Mask) -> bool) -> Self {
        Self { universe: self.universe, members: self.iter().filter(|&m| keep(m)).collect() }
    }

    /// Sorted by mask value, duplicates removed.
    pub fn canonical(&self) -> Self {
        let mut members = self.members.clone();
        members.sort_unstable();
        members.dedup();
        Self { universe: self.universe, members }
    }

    pub fn max_member_size(&self) -> usize {
        self.iter().map(popcount).max().unwrap_or(0)
    }

    /// Parses the set-family text format: `n <n>` then one set per line,
    /// `-` for the empty set.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = numbered_lines(text);
        let universe = parse_header(&mut lines)?;
        let mut members = Vec::new();
        for (no, line) in lines {
            members.push(parse_set_line(universe, no, line)?);
        }
        Ok(Self { universe, members })
    }

    /// Parses a file holding three families: `n <n>` followed by sections
    /// introduced by the marker lines `[F1]`, `[F2]`, `[F3]` in that order.
    pub fn parse_three(text: &str) -> Result<[SetFamily; 3]> {
        let mut lines = numbered_lines(text);
        let universe = parse_header(&mut lines)?;
        let mut sections: Vec<Vec<Mask>> = Vec::new();
        for (no, line) in lines {
            if line.starts_with('[') {
                let expected = format!("[F{}]", sections.len() + 1);
                if line != expected || sections.len() == 3 {
                    return Err(Error::parse(no, format!("expected section marker {expected}, found {line:?}")));
                }
                sections.push(Vec::new());
                continue;
            }
            let Some(current) = sections.last_mut() else {
                return Err(Error::parse(no, "set line before the [F1] marker"));
            };
            current.push(parse_set_line(universe, no, line)?);
        }
        if sections.len() != 3 {
            return Err(Error::parse(0, format!("expected 3 sections, found {}", sections.len())));
        }
        let mut it = sections.into_iter().map(|members| SetFamily { universe, members });
        Ok([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("n {}\n", self.n());
        for m in self.iter() {
            out.push_str(&format_mask(m));
            out.push('\n');
        }
        out
    }

    pub fn three_to_text(families: [&SetFamily; 3]) -> String {
        let mut out = format!("n {}\n", families[0].n());
        for (i, f) in families.iter().enumerate() {
            out.push_str(&format!("[F{}]\n", i + 1));
            for m in f.iter() {
                out.push_str(&format_mask(m));
                out.push('\n');
            }
        }
        out
    }
}

impl fmt::Display for SetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>) -> Result<Universe> {
    let (no, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header line \"n <n>\""))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("n") {
        return Err(Error::parse(no, format!("expected \"n <n>\", found {header:?}")));
    }
    let n: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::parse(no, format!("bad universe size in {header:?}")))?;
    if parts.next().is_some() {
        return Err(Error::parse(no, "trailing tokens after universe size"));
    }
    Universe::new(n).map_err(|e| Error::parse(no, e.to_string()))
}

fn parse_set_line(universe: Universe, no: usize, line: &str) -> Result<Mask> {
    if line == "-" {
        return Ok(0);
    }
    let mut mask = 0;
    let mut prev = 0usize;
    for tok in line.split_whitespace() {
        let e: usize = tok.parse().map_err(|_| Error::parse(no, format!("not an element: {tok:?}")))?;
        if e == 0 || e > universe.n() {
            return Err(Error::parse(no, format!("element {e} outside 1..={}", universe.n())));
        }
        if e <= prev {
            return Err(Error::parse(no, "elements must be strictly increasing"));
        }
        prev = e;
        mask |= element_bit(e);
    }
    Ok(mask)
}

/// An ordered partition of `[n]` into a fault block `B0` and blocks `B1..Bs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockPartition {
    universe: Universe,
    fault_block: Mask,
    blocks: Vec<Mask>,
}

impl BlockPartition {
    pub fn new(universe: Universe, fault_block: Mask, blocks: Vec<Mask>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::param("a block partition needs at least one block"));
        }
        let mut seen = fault_block;
        for &b in &blocks {
            if b & seen != 0 {
                return Err(Error::param("blocks of a partition must be pairwise disjoint"));
            }
            seen |= b;
        }
        if seen != universe.full() {
            return Err(Error::param("blocks of a partition must cover the universe"));
        }
        Ok(Self { universe, fault_block, blocks })
    }

    /// The single-block partition `B1 = [n]`.
    pub fn whole(universe: Universe) -> Self {
        Self { universe, fault_block: 0, blocks: vec![universe.full()] }
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn fault_block(&self) -> Mask {
        self.fault_block
    }

    pub fn blocks(&self) -> &[Mask] {
        &self.blocks
    }
}

/// Parameters of `(δ, r)`-block balance for ν-bounded families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalanceParams {
    pub delta: Rational,
    pub r: usize,
    pub nu: Rational,
    /// Waives the asymptotic size conditions (`b' ≥ 3δ⁻³κ⁻²`, `(1+δ)ν < 1/2`)
    /// so the reduction can run at desk scale.
    pub force_small: bool,
}

impl BalanceParams {
    /// `ν' = (1 + δ) ν`.
    pub fn nu_prime(&self) -> Rational {
        (Rational::from_integer(1.into()) + &self.delta) * &self.nu
    }
}

/// True iff no member has more than `ν·n` elements (exact comparison).
pub fn is_nu_bounded(family: &SetFamily, nu: &Rational) -> bool {
    let bound = nu * qu(family.n());
    family.iter().all(|m| qu(popcount(m)) <= bound)
}

/// True iff `(1−δ)|A|/r ≤ |A∩B| ≤ (1+δ)|A|/r`.
///
/// For `|A| = 0` the interval is `{0}`, so the empty set is balanced onto
/// every block.
pub fn is_balanced_onto(a: Mask, b: Mask, delta: &Rational, r: usize) -> bool {
    let size = popcount(a);
    let meet = popcount(a & b);
    balanced_count(size, meet, delta, r)
}

/// `(1−δ)·size/r ≤ meet ≤ (1+δ)·size/r`, compared as
/// `meet·r ∈ [(1−δ)size, (1+δ)size]`.
pub(crate) fn balanced_count(size: usize, meet: usize, delta: &Rational, r: usize) -> bool {
    let lhs = qu(meet * r);
    let s = qu(size);
    let one = Rational::from_integer(1.into());
    let lo = (&one - delta) * &s;
    let hi = (&one + delta) * &s;
    lo <= lhs && lhs <= hi
}

/// Every ordered triple of pairwise-disjoint masks whose union is `mask`.
///
/// Order: `X1` runs over submasks of `mask` increasingly, then `X2` over
/// submasks of the rest; `X3` is what remains.
pub fn three_partitions_of(mask: Mask) -> impl Iterator<Item = (Mask, Mask, Mask)> {
    submasks(mask).flat_map(move |x1| {
        let rest = mask & !x1;
        submasks(rest).map(move |x2| (x1, x2, rest & !x2))
    })
}
