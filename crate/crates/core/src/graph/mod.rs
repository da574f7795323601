//! Simple undirected graphs on at most 63 vertices, stored as neighbour
//! bitmasks, plus independent-set machinery and small-k coloring.
//!
//! Vertices are 1-based like set elements: vertex `v` is bit `v − 1`.

mod catalog;
mod coloring;
mod mis;

use std::fmt;

use crate::error::{Error, Result};
use crate::sets::{element_bit, elements, popcount, Mask, MAX_UNIVERSE};

pub use catalog::{graph_catalog, CATALOG_COUNTS};
pub use coloring::{
    bipartition_within, chromatic_brute, color_brute, four_colorable, is_bipartite, k_colorable_brute, three_colorable,
    ColoringEngine, MisReduction,
};
pub use mis::{
    alpha, alpha_within, for_each_mis, independent_set_family, maximal_independent_sets, mis_in_window,
};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<Mask>,
}

impl Graph {
    /// Edgeless graph on `n` vertices.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_UNIVERSE {
            return Err(Error::param(format!("graph must have 1..={MAX_UNIVERSE} vertices, got {n}")));
        }
        Ok(Self { adj: vec![0; n] })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(n)?;
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut g = Self::new(n)?;
        let full = g.full();
        for v in 1..=n {
            g.adj[v - 1] = full & !element_bit(v);
        }
        Ok(g)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::param("a cycle needs at least 3 vertices"));
        }
        Self::from_edges(n, &(1..=n).map(|v| (v, v % n + 1)).collect::<Vec<_>>())
    }

    pub fn petersen() -> Self {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i + 1, (i + 1) % 5 + 1));
            edges.push((i + 1, i + 6));
            edges.push((i + 6, (i + 2) % 5 + 6));
        }
        Self::from_edges(10, &edges).expect("valid edge list")
    }

    /// Disjoint union, with `other`'s vertices shifted past `self`'s.
    pub fn disjoint_union(&self, other: &Graph) -> Result<Self> {
        let shift = self.n();
        let mut g = Self::new(shift + other.n())?;
        g.adj[..shift].copy_from_slice(&self.adj);
        for (i, &m) in other.adj.iter().enumerate() {
            g.adj[shift + i] = m << shift;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        let n = self.n();
        if u == 0 || v == 0 || u > n || v > n {
            return Err(Error::param(format!("edge ({u}, {v}) outside 1..={n}")));
        }
        if u == v {
            return Err(Error::param(format!("self-loop at vertex {u}")));
        }
        self.adj[u - 1] |= element_bit(v);
        self.adj[v - 1] |= element_bit(u);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    /// Mask of all vertices.
    pub fn full(&self) -> Mask {
        (1u64 << self.n()) - 1
    }

    #[inline]
    pub fn neighbours(&self, v: usize) -> Mask {
        self.adj[v - 1]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u - 1] & element_bit(v) != 0
    }

    pub fn degree(&self, v: usize) -> usize {
        popcount(self.adj[v - 1])
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|&m| popcount(m)).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 1..=self.n() {
            for v in elements(self.adj[u - 1]) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn is_independent(&self, set: Mask) -> bool {
        elements(set).all(|v| self.adj[v - 1] & set == 0)
    }

    /// True iff `set` is independent and no vertex of `within ∖ set` can be
    /// added to it.
    pub fn is_maximal_independent_within(&self, set: Mask, within: Mask) -> bool {
        self.is_independent(set) && elements(within & !set).all(|v| self.adj[v - 1] & set != 0)
    }

    /// True iff `coloring[v−1]` differs across every edge.
    pub fn is_proper_coloring(&self, coloring: &[usize]) -> bool {
        coloring.len() == self.n() && self.edges().iter().all(|&(u, v)| coloring[u - 1] != coloring[v - 1])
    }

    /// `G[S]` relabelled onto `1..=|S|` in increasing vertex order.
    pub fn induced(&self, set: Mask) -> Result<Self> {
        let verts: Vec<usize> = elements(set).collect();
        let mut g = Self::new(verts.len())?;
        for (i, &u) in verts.iter().enumerate() {
            for (j, &v) in verts.iter().enumerate() {
                if self.has_edge(u, v) {
                    g.adj[i] |= element_bit(j + 1);
                }
            }
        }
        Ok(g)
    }

    /// DIMACS `.col`: `c` comments, one `p edge <n> <m>` line, then
    /// `e <u> <v>` lines. Repeated or reversed edges are merged; `<m>` is
    /// not checked against the edge lines for that reason.
    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut g: Option<Graph> = None;
        for (i, line) in text.lines().enumerate() {
            let no = i + 1;
            let mut tok = line.split_whitespace();
            match tok.next() {
                None | Some("c") => {}
                Some("p") => {
                    if g.is_some() {
                        return Err(Error::parse(no, "second problem line"));
                    }
                    match tok.next() {
                        Some("edge" | "col") => {}
                        other => return Err(Error::parse(no, format!("expected 'p edge', got {other:?}"))),
                    }
                    let n = parse_num(tok.next(), no, "vertex count")?;
                    parse_num(tok.next(), no, "edge count")?;
                    if tok.next().is_some() {
                        return Err(Error::parse(no, "trailing tokens"));
                    }
                    g = Some(Graph::new(n).map_err(|e| Error::parse(no, e.to_string()))?);
                }
                Some("e") => {
                    let graph = g.as_mut().ok_or_else(|| Error::parse(no, "edge before problem line"))?;
                    let u = parse_num(tok.next(), no, "edge endpoint")?;
                    let v = parse_num(tok.next(), no, "edge endpoint")?;
                    if tok.next().is_some() {
                        return Err(Error::parse(no, "trailing tokens"));
                    }
                    graph.add_edge(u, v).map_err(|e| Error::parse(no, e.to_string()))?;
                }
                Some(other) => return Err(Error::parse(no, format!("unknown line type '{other}'"))),
            }
        }
        g.ok_or_else(|| Error::parse(text.lines().count().max(1), "missing 'p edge' line"))
    }

    pub fn to_dimacs(&self) -> String {
        let edges = self.edges();
        let mut out = format!("p edge {} {}\n", self.n(), edges.len());
        for (u, v) in edges {
            out.push_str(&format!("e {u} {v}\n"));
        }
        out
    }
}

fn parse_num(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    let t = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    t.parse().map_err(|_| Error::parse(line, format!("bad {what} '{t}'")))
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dimacs())
    }
}
