//! Seeded instance generators with planted solutions.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{floor_usize, qu, Rational};
use crate::chromatic::{classify_profile, CaseLabel, SizeProfile};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::sets::{element_bit, elements, Mask, SetFamily, Universe};
use crate::tripartition::brute_tripartition;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `G(n, p)`.
pub fn random_graph(n: usize, p: f64, rng: &mut impl Rng) -> Result<Graph> {
    let mut g = Graph::new(n)?;
    for u in 1..=n {
        for v in u + 1..=n {
            if rng.random_bool(p) {
                g.add_edge(u, v)?;
            }
        }
    }
    Ok(g)
}

/// A graph with a known proper coloring.
#[derive(Debug, Clone)]
pub struct PlantedColoring {
    pub graph: Graph,
    /// Color classes, largest first.
    pub classes: Vec<Mask>,
}

impl PlantedColoring {
    pub fn coloring(&self) -> Vec<usize> {
        let mut c = vec![0; self.graph.n()];
        for (i, &class) in self.classes.iter().enumerate() {
            for v in elements(class) {
                c[v - 1] = i;
            }
        }
        c
    }
}

/// Random classes of the given sizes (nonascending) on shuffled vertices,
/// with each cross-class pair joined with probability `p`. Every vertex is
/// also given a neighbour in each larger class, so each class is maximal
/// independent in the graph left after removing the classes before it.
pub fn planted_coloring(sizes: &[usize], p: f64, rng: &mut impl Rng) -> Result<PlantedColoring> {
    let profile = SizeProfile::new(sizes.to_vec())?;
    let n = profile.n();
    let mut verts: Vec<usize> = (1..=n).collect();
    verts.shuffle(rng);
    let mut classes = Vec::with_capacity(sizes.len());
    let mut at = 0;
    for &s in profile.sizes() {
        classes.push(verts[at..at + s].iter().fold(0, |m, &v| m | element_bit(v)));
        at += s;
    }
    let mut g = Graph::new(n)?;
    for (i, &ci) in classes.iter().enumerate() {
        for &cj in &classes[i + 1..] {
            for u in elements(ci) {
                for v in elements(cj) {
                    if rng.random_bool(p) {
                        g.add_edge(u, v)?;
                    }
                }
            }
            let members: Vec<usize> = elements(ci).collect();
            for v in elements(cj) {
                if g.neighbours(v) & ci == 0 {
                    g.add_edge(v, members[rng.random_range(0..members.len())])?;
                }
            }
        }
    }
    Ok(PlantedColoring { graph: g, classes })
}

/// Splits `total` into `parts` sizes that differ by at most one.
fn even_split(total: usize, parts: usize) -> Vec<usize> {
    (0..parts).map(|i| total / parts + usize::from(i < total % parts)).collect()
}

/// Splits `total` into random sizes in `1..=max`.
fn random_small(total: usize, max: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut out = Vec::new();
    let mut left = total;
    while left > 0 {
        let s = rng.random_range(1..=max.min(left));
        out.push(s);
        left -= s;
    }
    out
}

/// A size profile on `n` vertices whose shape satisfies the inequalities
/// of `case` at slack `d`:
///
/// - B: four big classes and fewer than `6d` leftover vertices
/// - C: two classes together above `n/2 + d`
/// - D: one class in `(n/2 − d, n/2 + d]`, all others below `2d`
/// - E: equal classes, as few as the inequalities allow
pub fn case_profile(case: CaseLabel, n: usize, d: &Rational, rng: &mut impl Rng) -> Result<SizeProfile> {
    let unfit = || Error::param(format!("no case {case} profile on {n} vertices at d = {d}"));
    let mut sizes = match case {
        CaseLabel::A => even_split(n, 3.min(n)),
        CaseLabel::B => {
            let six_d = d * qu(6);
            let max_left = if six_d.is_integer() { floor_usize(&six_d).saturating_sub(1) } else { floor_usize(&six_d) };
            let left = rng.random_range(0..=max_left.min(n.saturating_sub(4)));
            let mut s = even_split(n - left, 4);
            s.extend(random_small(left, 2, rng));
            s
        }
        CaseLabel::C => {
            let two = (floor_usize(&(qu(n) / qu(2) + d)) + 1).min(n);
            let mut s = even_split(two, 2);
            s.extend(random_small(n - two, s[1].max(1), rng));
            s
        }
        CaseLabel::D => {
            let s1 = floor_usize(&(qu(n) / qu(2) + d)).min(n);
            let two_d = d * qu(2);
            let max = if two_d.is_integer() { floor_usize(&two_d).saturating_sub(1) } else { floor_usize(&two_d) };
            if max == 0 && s1 < n {
                return Err(unfit());
            }
            let mut s = vec![s1];
            s.extend(random_small(n - s1, max.max(1), rng));
            s
        }
        CaseLabel::E => {
            let fits = (1..=n).map(|k| even_split(n, k)).find(|s| {
                let p = SizeProfile::new(s.clone()).expect("valid sizes");
                classify_profile(&p, d).contains(&CaseLabel::E)
            });
            fits.ok_or_else(unfit)?
        }
    };
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    let p = SizeProfile::new(sizes)?;
    if !classify_profile(&p, d).contains(&case) {
        return Err(unfit());
    }
    Ok(p)
}

/// Random members of size at most `⌊νn⌋`.
pub fn random_bounded_family(n: usize, nu: &Rational, count: usize, rng: &mut impl Rng) -> Result<SetFamily> {
    let universe = Universe::new(n)?;
    let cap = floor_usize(&(nu * qu(n)));
    let members = (0..count).map(|_| random_set(n, rng.random_range(0..=cap), rng)).collect();
    SetFamily::new(universe, members)
}

fn random_set(n: usize, size: usize, rng: &mut impl Rng) -> Mask {
    let mut verts: Vec<usize> = (1..=n).collect();
    verts.shuffle(rng);
    verts[..size].iter().fold(0, |m, &v| m | element_bit(v))
}

/// Three families and, for planted instances, the partition hidden in them.
#[derive(Debug, Clone)]
pub struct TripartitionInstance {
    pub families: [SetFamily; 3],
    pub planted: Option<[Mask; 3]>,
}

/// A random split of `[n]` into parts of at most `⌊νn⌋` elements, one part
/// added to each of three families of `noise` random ν-bounded members.
pub fn planted_tripartition(n: usize, nu: &Rational, noise: usize, rng: &mut impl Rng) -> Result<TripartitionInstance> {
    let cap = floor_usize(&(nu * qu(n)));
    if 3 * cap < n {
        return Err(Error::param(format!("no split of [{n}] into parts of at most {cap}")));
    }
    let mut sizes = even_split(n, 3);
    // Shift elements between parts at random while staying within the cap.
    for _ in 0..n {
        let (a, b) = (rng.random_range(0..3), rng.random_range(0..3));
        if a != b && sizes[a] > 0 && sizes[b] < cap {
            sizes[a] -= 1;
            sizes[b] += 1;
        }
    }
    let mut verts: Vec<usize> = (1..=n).collect();
    verts.shuffle(rng);
    let mut parts = [0; 3];
    let mut at = 0;
    for (i, &s) in sizes.iter().enumerate() {
        parts[i] = verts[at..at + s].iter().fold(0, |m, &v| m | element_bit(v));
        at += s;
    }
    let mut families = Vec::with_capacity(3);
    for &part in &parts {
        let noise_family = random_bounded_family(n, nu, noise, rng)?;
        let mut members = noise_family.members().to_vec();
        members.push(part);
        families.push(SetFamily::new(Universe::new(n)?, members)?);
    }
    let families: [SetFamily; 3] = families.try_into().expect("three families");
    Ok(TripartitionInstance { families, planted: Some(parts) })
}

/// Random ν-bounded families that brute force confirms have no three-way
/// partition. Gives up after `attempts` draws.
pub fn unsolvable_tripartition(
    n: usize,
    nu: &Rational,
    count: usize,
    attempts: usize,
    rng: &mut impl Rng,
) -> Result<TripartitionInstance> {
    for _ in 0..attempts {
        let f = [
            random_bounded_family(n, nu, count, rng)?,
            random_bounded_family(n, nu, count, rng)?,
            random_bounded_family(n, nu, count, rng)?,
        ];
        if brute_tripartition(&f[0], &f[1], &f[2]).is_none() {
            return Ok(TripartitionInstance { families: f, planted: None });
        }
    }
    Err(Error::param(format!("no unsolvable instance found in {attempts} draws")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::q;
    use crate::graph::chromatic_brute;

    #[test]
    fn planted_coloring_is_proper() {
        let mut rng = rng_from_seed(3);
        let pc = planted_coloring(&[4, 3, 3, 2], 0.4, &mut rng).unwrap();
        assert!(pc.graph.is_proper_coloring(&pc.coloring()));
        assert!(chromatic_brute(&pc.graph) <= 4);
        let full = pc.graph.full();
        let mut rest = full;
        for &c in &pc.classes {
            assert!(pc.graph.is_maximal_independent_within(c, rest));
            rest &= !c;
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let a = random_graph(10, 0.5, &mut rng_from_seed(7)).unwrap();
        let b = random_graph(10, 0.5, &mut rng_from_seed(7)).unwrap();
        assert_eq!(a.edges(), b.edges());
        let x = planted_tripartition(12, &q(5, 12), 4, &mut rng_from_seed(1)).unwrap();
        let y = planted_tripartition(12, &q(5, 12), 4, &mut rng_from_seed(1)).unwrap();
        assert_eq!(x.families, y.families);
    }

    #[test]
    fn case_profiles_classify() {
        let mut rng = rng_from_seed(5);
        for case in [CaseLabel::B, CaseLabel::C, CaseLabel::D, CaseLabel::E] {
            for n in [12, 14, 20] {
                let p = case_profile(case, n, &q(1, 1), &mut rng).unwrap();
                assert_eq!(p.n(), n);
                assert!(classify_profile(&p, &q(1, 1)).contains(&case));
            }
        }
        assert!(case_profile(CaseLabel::D, 14, &q(1, 2), &mut rng).is_err());
    }

    #[test]
    fn planted_partition_is_valid() {
        let mut rng = rng_from_seed(9);
        for nu in [q(1, 3), q(2, 5), q(9, 20)] {
            let inst = planted_tripartition(12, &nu, 5, &mut rng).unwrap();
            let [a, b, c] = inst.planted.unwrap();
            assert_eq!(a | b | c, (1 << 12) - 1);
            assert_eq!(a & b | a & c | b & c, 0);
            assert!(brute_tripartition(&inst.families[0], &inst.families[1], &inst.families[2]).is_some());
        }
        let no = unsolvable_tripartition(9, &q(1, 3), 6, 100, &mut rng).unwrap();
        assert!(brute_tripartition(&no.families[0], &no.families[1], &no.families[2]).is_none());
    }
}
