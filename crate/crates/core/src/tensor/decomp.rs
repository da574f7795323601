use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;

use super::{kronecker_power, SparseTensor, DEFAULT_MAX_NNZ};
use crate::arith::{parse_rational, Rational};
use crate::error::{Error, Result};

/// Leg size up to which a certificate is checked by full expansion.
pub const FULL_CHECK_MAX_COLS: u64 = 4096;
/// Number of index triples probed when full expansion is too large.
pub const SPOT_CHECKS: usize = 100;
const FULL_CHECK_BUDGET: u128 = 10_000_000;

/// A sparse `rows × cols` rational matrix, stored by rows with a column
/// index on the side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorMatrix {
    rows: usize,
    cols: u64,
    row_ptr: Vec<usize>,
    col_idx: Vec<u64>,
    // None means every stored value is 1.
    vals: Option<Vec<Rational>>,
    // (column, row, position in col_idx), sorted.
    by_col: Vec<(u64, u32, u32)>,
}

impl FactorMatrix {
    pub fn from_rows(cols: u64, rows: Vec<Vec<(u64, Rational)>>) -> Result<Self> {
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        for mut row in rows {
            row.retain(|(_, v)| !num_traits::Zero::is_zero(v));
            row.sort_by_key(|(c, _)| *c);
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::param("repeated column in a factor row"));
            }
            for (c, v) in row {
                if c >= cols {
                    return Err(Error::DimensionMismatch(format!("column {c} out of range {cols}")));
                }
                col_idx.push(c);
                vals.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        let all_ones = vals.iter().all(num_traits::One::is_one);
        Ok(Self::assemble(cols, row_ptr, col_idx, (!all_ones).then_some(vals)))
    }

    fn assemble(cols: u64, row_ptr: Vec<usize>, col_idx: Vec<u64>, vals: Option<Vec<Rational>>) -> Self {
        let rows = row_ptr.len() - 1;
        let mut by_col = Vec::with_capacity(col_idx.len());
        for r in 0..rows {
            for p in row_ptr[r]..row_ptr[r + 1] {
                by_col.push((col_idx[p], r as u32, p as u32));
            }
        }
        by_col.sort_unstable();
        Self { rows, cols, row_ptr, col_idx, vals, by_col }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> u64 {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn is_zero_one(&self) -> bool {
        self.vals.is_none()
    }

    /// The stored value at position `pos`, `None` standing for 1.
    #[inline]
    pub fn value_at(&self, pos: usize) -> Option<&Rational> {
        self.vals.as_ref().map(|v| &v[pos])
    }

    /// Positions `row_ptr[r]..row_ptr[r+1]` of row `r`.
    #[inline]
    pub fn row_range(&self, r: usize) -> std::ops::Range<usize> {
        self.row_ptr[r]..self.row_ptr[r + 1]
    }

    #[inline]
    pub fn col_at(&self, pos: usize) -> u64 {
        self.col_idx[pos]
    }

    /// `(row, position)` pairs of column `c`.
    pub fn column(&self, c: u64) -> impl Iterator<Item = (usize, usize)> + '_ {
        let start = self.by_col.partition_point(|e| e.0 < c);
        self.by_col[start..].iter().take_while(move |e| e.0 == c).map(|e| (e.1 as usize, e.2 as usize))
    }

    pub fn get(&self, r: usize, c: u64) -> Rational {
        let range = self.row_range(r);
        match self.col_idx[range.clone()].binary_search(&c) {
            Ok(off) => self.value_at(range.start + off).cloned().unwrap_or_else(|| Rational::from_integer(1.into())),
            Err(_) => Rational::from_integer(0.into()),
        }
    }
}

/// Three `d × c^s` matrices certifying
/// `Σ_ℓ A[ℓ,I]·B[ℓ,J]·C[ℓ,K] = (T^{⊗s})_{I,J,K}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    leg_dims: [u64; 3],
    power: usize,
    rank: usize,
    factors: [FactorMatrix; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verification {
    Full,
    Spot(usize),
}

impl Decomposition {
    pub fn new(leg_dims: [u64; 3], power: usize, factors: [FactorMatrix; 3]) -> Result<Self> {
        if power == 0 {
            return Err(Error::param("decomposition power must be positive"));
        }
        let rank = factors[0].rows();
        for (leg, f) in factors.iter().enumerate() {
            let want = leg_dims[leg]
                .checked_pow(power as u32)
                .ok_or_else(|| Error::param("decomposition leg size overflows"))?;
            if f.cols() != want {
                return Err(Error::DimensionMismatch(format!(
                    "factor {} has {} columns, expected {want}",
                    "ABC".as_bytes()[leg] as char,
                    f.cols()
                )));
            }
            if f.rows() != rank {
                return Err(Error::DimensionMismatch("factor matrices differ in rank".into()));
            }
        }
        Ok(Self { leg_dims, power, rank, factors })
    }

    pub fn leg_dims(&self) -> [u64; 3] {
        self.leg_dims
    }

    pub fn power(&self) -> usize {
        self.power
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn factor(&self, leg: usize) -> &FactorMatrix {
        &self.factors[leg]
    }

    /// `Σ_ℓ A[ℓ,I]·B[ℓ,J]·C[ℓ,K]`.
    pub fn value(&self, idx: [u64; 3]) -> Rational {
        let mut acc = Rational::from_integer(0.into());
        for (row, pos) in self.factors[0].column(idx[0]) {
            let b = self.factors[1].get(row, idx[1]);
            if num_traits::Zero::is_zero(&b) {
                continue;
            }
            let c = self.factors[2].get(row, idx[2]);
            let a = self.factors[0].value_at(pos).cloned().unwrap_or_else(|| Rational::from_integer(1.into()));
            acc += a * b * c;
        }
        acc
    }

    /// Checks the certificate against `t`; by full expansion when the legs of
    /// `T^{⊗s}` have at most 4096 indices, else at 100 deterministic triples.
    pub fn verify(&self, t: &SparseTensor) -> Result<Verification> {
        if t.dims() != self.leg_dims {
            return Err(Error::DimensionMismatch(format!(
                "decomposition legs {:?} differ from tensor legs {:?}",
                self.leg_dims,
                t.dims()
            )));
        }
        let max_cols = self.factors.iter().map(FactorMatrix::cols).max().unwrap_or(0);
        if max_cols <= FULL_CHECK_MAX_COLS && self.expansion_cost() <= FULL_CHECK_BUDGET {
            if let Ok(power) = kronecker_power(t, self.power, DEFAULT_MAX_NNZ) {
                self.verify_full(&power)?;
                return Ok(Verification::Full);
            }
        }
        self.verify_spots(t)?;
        Ok(Verification::Spot(SPOT_CHECKS))
    }

    fn expansion_cost(&self) -> u128 {
        (0..self.rank)
            .map(|r| self.factors.iter().map(|f| f.row_range(r).len() as u128).product::<u128>())
            .sum()
    }

    fn verify_full(&self, power: &SparseTensor) -> Result<()> {
        let mut expanded: FxHashMap<[u64; 3], Rational> = FxHashMap::default();
        let [fa, fb, fc] = &self.factors;
        let one = Rational::from_integer(1.into());
        for r in 0..self.rank {
            for pa in fa.row_range(r) {
                let a = fa.value_at(pa).unwrap_or(&one);
                for pb in fb.row_range(r) {
                    let ab = a * fb.value_at(pb).unwrap_or(&one);
                    for pc in fc.row_range(r) {
                        let v = &ab * fc.value_at(pc).unwrap_or(&one);
                        *expanded.entry([fa.col_at(pa), fb.col_at(pb), fc.col_at(pc)]).or_default() += v;
                    }
                }
            }
        }
        expanded.retain(|_, v| !num_traits::Zero::is_zero(v));
        for (idx, want) in power.entries() {
            let got = expanded.remove(&idx).unwrap_or_default();
            if got != want {
                return Err(Error::CertificateMismatch(format!("entry {idx:?}: expected {want}, certificate gives {got}")));
            }
        }
        if let Some((idx, got)) = expanded.into_iter().min_by_key(|(idx, _)| *idx) {
            return Err(Error::CertificateMismatch(format!("entry {idx:?}: expected 0, certificate gives {got}")));
        }
        Ok(())
    }

    fn verify_spots(&self, t: &SparseTensor) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_dec0);
        let lookup: FxHashMap<[u64; 3], Rational> = t.entries().collect();
        let dims = t.dims();
        let entry = |idx: [u64; 3]| -> Rational {
            // Row-major digits of each leg index, one per factor.
            let mut acc = Rational::from_integer(1.into());
            let mut rest = idx;
            for _ in 0..self.power {
                let digit = [rest[0] % dims[0], rest[1] % dims[1], rest[2] % dims[2]];
                match lookup.get(&digit) {
                    Some(v) => acc *= v,
                    None => return Rational::from_integer(0.into()),
                }
                rest = [rest[0] / dims[0], rest[1] / dims[1], rest[2] / dims[2]];
            }
            acc
        };
        for probe in 0..SPOT_CHECKS {
            let idx = if probe % 2 == 0 && t.nnz() > 0 {
                let mut idx = [0u64; 3];
                for _ in 0..self.power {
                    let e = t.indices()[rng.random_range(0..t.nnz())];
                    for leg in 0..3 {
                        idx[leg] = idx[leg] * dims[leg] + e[leg];
                    }
                }
                idx
            } else {
                let mut idx = [0u64; 3];
                for leg in 0..3 {
                    idx[leg] = rng.random_range(0..self.factors[leg].cols());
                }
                idx
            };
            let want = entry(idx);
            let got = self.value(idx);
            if got != want {
                return Err(Error::CertificateMismatch(format!("entry {idx:?}: expected {want}, certificate gives {got}")));
            }
        }
        Ok(())
    }

    /// Parses the `tensor-decomp v1` text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
        let mut next = |what: &str| lines.next().ok_or_else(|| Error::parse(0, format!("unexpected end of file, expected {what}")));
        let (no, header) = next("header")?;
        if header != "tensor-decomp v1" {
            return Err(Error::parse(no, format!("expected \"tensor-decomp v1\", found {header:?}")));
        }
        let mut field = |name: &str| -> Result<u64> {
            let (no, line) = next(name)?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(name) {
                return Err(Error::parse(no, format!("expected \"{name} <value>\", found {line:?}")));
            }
            let v = parts.next().and_then(|t| t.parse::<u64>().ok()).ok_or_else(|| Error::parse(no, format!("bad value for {name}")))?;
            if parts.next().is_some() {
                return Err(Error::parse(no, "trailing tokens"));
            }
            Ok(v)
        };
        let c = field("c")?;
        let s = field("s")?;
        let d = field("d")?;
        if c == 0 || s == 0 {
            return Err(Error::parse(0, "c and s must be positive"));
        }
        let cols = c.checked_pow(s as u32).filter(|&x| x <= 1 << 24).ok_or_else(|| Error::parse(0, "c^s too large for the text format"))?;
        let mut factors = Vec::with_capacity(3);
        for name in ["A", "B", "C"] {
            let (no, marker) = next(name)?;
            if marker != name {
                return Err(Error::parse(no, format!("expected block marker {name}, found {marker:?}")));
            }
            let mut rows = Vec::with_capacity(d as usize);
            for _ in 0..d {
                let (no, line) = next("matrix row")?;
                let mut row = Vec::new();
                let mut count = 0u64;
                for tok in line.split_whitespace() {
                    let v = parse_rational(tok).map_err(|e| Error::parse(no, e))?;
                    if !num_traits::Zero::is_zero(&v) {
                        row.push((count, v));
                    }
                    count += 1;
                }
                if count != cols {
                    return Err(Error::parse(no, format!("row has {count} entries, expected {cols}")));
                }
                rows.push(row);
            }
            factors.push(FactorMatrix::from_rows(cols, rows)?);
        }
        if let Ok((no, extra)) = next("end") {
            return Err(Error::parse(no, format!("trailing content {extra:?}")));
        }
        let [a, b, cc]: [FactorMatrix; 3] = factors.try_into().expect("three blocks");
        Self::new([c; 3], s as usize, [a, b, cc])
    }

    /// Parses and verifies against `t` in one step.
    pub fn load(text: &str, t: &SparseTensor) -> Result<(Self, Verification)> {
        let d = Self::parse(text)?;
        let how = d.verify(t)?;
        Ok((d, how))
    }

    pub fn to_text(&self) -> Result<String> {
        let c = self.leg_dims[0];
        if self.leg_dims.iter().any(|&x| x != c) {
            return Err(Error::param("the text format needs equal leg dimensions"));
        }
        let mut out = format!("tensor-decomp v1\nc {c}\ns {}\nd {}\n", self.power, self.rank);
        for (leg, name) in ["A", "B", "C"].iter().enumerate() {
            out.push_str(name);
            out.push('\n');
            let f = &self.factors[leg];
            for r in 0..self.rank {
                let mut dense = vec![String::from("0"); f.cols() as usize];
                for p in f.row_range(r) {
                    dense[f.col_at(p) as usize] = f.value_at(p).map_or_else(|| "1".to_string(), |v| v.to_string());
                }
                out.push_str(&dense.join(" "));
                out.push('\n');
            }
        }
        Ok(out)
    }
}

/// One rank-one term per support element of `T^{⊗s}`: `A` selects `I` with
/// the coefficient, `B` and `C` select `J` and `K`.
pub fn trivial_decomposition(t: &SparseTensor, s: usize, cap: u128) -> Result<Decomposition> {
    let power = kronecker_power(t, s, cap)?;
    let dims = power.dims();
    let n = power.nnz();
    let select = |leg: usize, with_coeff: bool| {
        let row_ptr: Vec<usize> = (0..=n).collect();
        let col_idx: Vec<u64> = power.indices().iter().map(|e| e[leg]).collect();
        let vals = (with_coeff && !power.is_zero_one()).then(|| (0..n).map(|p| power.coeff_at(p)).collect());
        FactorMatrix::assemble(dims[leg], row_ptr, col_idx, vals)
    };
    Decomposition::new(t.dims(), s, [select(0, true), select(1, false), select(2, false)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, qi};
    use crate::tensor::{matrix_mult_tensor, partitioning_tensor};

    #[test]
    fn trivial_ranks() {
        let unit = matrix_mult_tensor(1).unwrap();
        assert_eq!(trivial_decomposition(&unit, 2, DEFAULT_MAX_NNZ).unwrap().rank(), 1);
        let t = partitioning_tensor(&q(1, 3), 3).unwrap();
        assert_eq!(trivial_decomposition(&t, 1, DEFAULT_MAX_NNZ).unwrap().rank(), 6);
        let m2 = matrix_mult_tensor(2).unwrap();
        let d = trivial_decomposition(&m2, 1, DEFAULT_MAX_NNZ).unwrap();
        assert_eq!(d.rank(), 8);
        assert_eq!(d.verify(&m2).unwrap(), Verification::Full);
    }

    #[test]
    fn trivial_rank_is_multiplicative() {
        let t = partitioning_tensor(&q(1, 3), 3).unwrap();
        let m2 = matrix_mult_tensor(2).unwrap();
        let prod = crate::tensor::kronecker(&t, &m2).unwrap();
        let r = |x: &SparseTensor| trivial_decomposition(x, 1, DEFAULT_MAX_NNZ).unwrap().rank();
        assert_eq!(r(&prod), r(&t) * r(&m2));
    }

    #[test]
    fn strassen_certificate_verifies() {
        // Seven products for 2×2 matrices; M_2 pairs (i,j) at 2i+j and the
        // third leg is transposed (Z_{ki}).
        let a = [[1, 0, 0, 1], [0, 0, 1, 1], [1, 0, 0, 0], [0, 0, 0, 1], [1, 1, 0, 0], [-1, 0, 1, 0], [0, 1, 0, -1]];
        let b = [[1, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, -1], [-1, 0, 1, 0], [0, 0, 0, 1], [1, 1, 0, 0], [0, 0, 1, 1]];
        // C row ℓ lists the coefficient of product ℓ in c_{ik}, placed at Z index 2k+i.
        let c_entries: [[i64; 4]; 7] = {
            // c11 = m1+m4-m5+m7, c12 = m3+m5, c21 = m2+m4, c22 = m1-m2+m3+m6
            let coef = [[1, 0, 0, 1], [0, 0, 1, -1], [0, 1, 0, 1], [1, 0, 1, 0], [-1, 1, 0, 0], [0, 0, 0, 1], [1, 0, 0, 0]];
            let mut out = [[0i64; 4]; 7];
            for (l, row) in coef.iter().enumerate() {
                // row = [c11, c12, c21, c22]; c_{ik} sits at Z index 2k+i.
                out[l][0] = row[0];
                out[l][2] = row[1];
                out[l][1] = row[2];
                out[l][3] = row[3];
            }
            out
        };
        let to_rows = |m: &[[i64; 4]]| m.iter().map(|r| r.iter().enumerate().map(|(c, &v)| (c as u64, qi(v))).collect()).collect();
        let fa = FactorMatrix::from_rows(4, to_rows(&a)).unwrap();
        let fb = FactorMatrix::from_rows(4, to_rows(&b)).unwrap();
        let fc = FactorMatrix::from_rows(4, to_rows(&c_entries)).unwrap();
        let d = Decomposition::new([4; 3], 1, [fa, fb, fc]).unwrap();
        let m2 = matrix_mult_tensor(2).unwrap();
        assert_eq!(d.rank(), 7);
        assert_eq!(d.verify(&m2).unwrap(), Verification::Full);
        let again = Decomposition::parse(&d.to_text().unwrap()).unwrap();
        assert_eq!(again, d);
    }

    #[test]
    fn corrupted_certificates_are_rejected() {
        let t = partitioning_tensor(&q(1, 3), 3).unwrap();
        let d = trivial_decomposition(&t, 2, DEFAULT_MAX_NNZ).unwrap();
        assert_eq!(d.verify(&t).unwrap(), Verification::Full);
        let text = d.to_text().unwrap();
        // Flip the first stored 1 of block B into a 2.
        let b_start = text.find("\nB\n").unwrap() + 3;
        let one = b_start + text[b_start..].find('1').unwrap();
        let mut bad = text.clone();
        bad.replace_range(one..one + 1, "2");
        let parsed = Decomposition::parse(&bad).unwrap();
        assert!(matches!(parsed.verify(&t), Err(Error::CertificateMismatch(_))));
    }

    #[test]
    fn spot_checks_catch_corruption_on_large_powers() {
        let t = partitioning_tensor(&q(1, 3), 6).unwrap();
        let d = trivial_decomposition(&t, 3, DEFAULT_MAX_NNZ).unwrap();
        assert!(d.factor(0).cols() > FULL_CHECK_MAX_COLS);
        assert_eq!(d.verify(&t).unwrap(), Verification::Spot(SPOT_CHECKS));
        // Scale every A value by 2: every support entry is now wrong.
        let fa = d.factor(0);
        let rows = (0..d.rank())
            .map(|r| fa.row_range(r).map(|p| (fa.col_at(p), qi(2))).collect())
            .collect();
        let bad = Decomposition::new(d.leg_dims(), 3, [FactorMatrix::from_rows(fa.cols(), rows).unwrap(), d.factor(1).clone(), d.factor(2).clone()]).unwrap();
        assert!(matches!(bad.verify(&t), Err(Error::CertificateMismatch(_))));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let good = "tensor-decomp v1\nc 1\ns 1\nd 1\nA\n1\nB\n1\nC\n1\n";
        let d = Decomposition::parse(good).unwrap();
        assert_eq!(d.verify(&matrix_mult_tensor(1).unwrap()).unwrap(), Verification::Full);
        assert!(matches!(Decomposition::parse("tensor-decomp v2\n"), Err(Error::Parse { line: 1, .. })));
        let short = "tensor-decomp v1\nc 2\ns 1\nd 1\nA\n1\nB\n1 0\nC\n1 0\n";
        assert!(matches!(Decomposition::parse(short), Err(Error::Parse { line: 6, .. })));
        let junk = "tensor-decomp v1\nc 1\ns 1\nd 1\nA\nx\nB\n1\nC\n1\n";
        assert!(matches!(Decomposition::parse(junk), Err(Error::Parse { line: 6, .. })));
        let trailing = format!("{good}extra\n");
        assert!(Decomposition::parse(&trailing).is_err());
        assert_eq!(FactorMatrix::from_rows(2, vec![vec![(0, q(1, 2)), (1, qi(0))]]).unwrap().nnz(), 1);
    }
}
