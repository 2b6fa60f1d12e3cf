//! Loop configurations: spanning subgraphs of a domain in which every vertex
//! has degree 0 or 2.

use fixedbitset::FixedBitSet;
use serde::ser::SerializeSeq;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Domain, Vertex};
use crate::saw::Polygon;
use crate::scalar::{ModelParams, Scalar};

/// Minimal union-find used for loop counting.
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Degree of every vertex under the active edge set.
pub(crate) fn degrees(g: &Domain, active: &FixedBitSet) -> Vec<u32> {
    let mut deg = vec![0u32; g.vertex_count()];
    for e in active.ones() {
        let (a, b) = g.edges()[e];
        deg[a] += 1;
        deg[b] += 1;
    }
    deg
}

/// Number of components with at least one edge.
pub(crate) fn count_loops(g: &Domain, active: &FixedBitSet) -> usize {
    let mut uf = UnionFind::new(g.vertex_count());
    let mut touched = vec![false; g.vertex_count()];
    for e in active.ones() {
        let (a, b) = g.edges()[e];
        uf.union(a, b);
        touched[a] = true;
        touched[b] = true;
    }
    (0..g.vertex_count())
        .filter(|&v| touched[v] && uf.find(v) == v)
        .count()
}

/// A valid configuration `kappa` of a domain.
#[derive(Debug, Clone)]
pub struct LoopConfig<'a> {
    domain: &'a Domain,
    active: FixedBitSet,
}

impl PartialEq for LoopConfig<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain && self.active == other.active
    }
}

impl<'a> LoopConfig<'a> {
    pub fn empty(domain: &'a Domain) -> Self {
        LoopConfig {
            domain,
            active: FixedBitSet::with_capacity(domain.edge_count()),
        }
    }

    /// Wraps an edge-index bit set, checking the degree condition.
    pub fn new(domain: &'a Domain, active: FixedBitSet) -> Result<Self> {
        if active.len() != domain.edge_count() {
            return Err(Error::InvalidInput(format!(
                "edge set has {} slots, domain has {} edges",
                active.len(),
                domain.edge_count()
            )));
        }
        if degrees(domain, &active).iter().any(|&d| d != 0 && d != 2) {
            return Err(Error::InvalidInput("some vertex has degree other than 0 or 2".into()));
        }
        Ok(LoopConfig { domain, active })
    }

    pub(crate) fn from_trusted(domain: &'a Domain, active: FixedBitSet) -> Self {
        debug_assert!(degrees(domain, &active).iter().all(|&d| d == 0 || d == 2));
        LoopConfig { domain, active }
    }

    pub fn from_edges(domain: &'a Domain, edges: &[(Vertex, Vertex)]) -> Result<Self> {
        LoopConfig::new(domain, edge_bits(domain, edges)?)
    }

    /// The configuration whose loops are exactly `polygons`.
    pub fn from_polygons(domain: &'a Domain, polygons: &[Polygon]) -> Result<Self> {
        let edges: Vec<_> = polygons.iter().flat_map(|p| p.edges()).collect();
        LoopConfig::from_edges(domain, &edges)
    }

    pub fn domain(&self) -> &'a Domain {
        self.domain
    }

    pub fn active(&self) -> &FixedBitSet {
        &self.active
    }

    /// `o_G(kappa)`.
    pub fn edge_count(&self) -> usize {
        self.active.count_ones(..)
    }

    /// `L_G(kappa)`; isolated vertices are not loops.
    pub fn loop_count(&self) -> usize {
        count_loops(self.domain, &self.active)
    }

    /// `lambda^o n^L` with `0^0 = 1`.
    pub fn weight<T: Scalar>(&self, p: &ModelParams<T>) -> T {
        p.weight(self.edge_count() as u32, self.loop_count() as u32)
    }

    /// The loop through `x`, or the degenerate polygon when `x` is isolated.
    pub fn component_at(&self, x: &Vertex) -> Result<Polygon> {
        let start = self
            .domain
            .index_of(x)
            .ok_or_else(|| Error::NotInDomain(x.to_string()))?;
        let cycle = trace_loop(self.domain, &self.active, start);
        Ok(Polygon::canonical(
            cycle.into_iter().map(|i| self.domain.vertex(i).clone()).collect(),
        ))
    }

    /// Active edges as sorted vertex pairs, in sorted order.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut out: Vec<_> = self
            .active
            .ones()
            .map(|e| {
                let (a, b) = self.domain.edge_vertices(e);
                (a.clone(), b.clone())
            })
            .collect();
        out.sort();
        out
    }
}

impl Serialize for LoopConfig<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let edges = self.edges();
        let mut seq = s.serialize_seq(Some(edges.len()))?;
        for (a, b) in &edges {
            seq.serialize_element(&[a, b])?;
        }
        seq.end()
    }
}

/// Vertex indices of the loop through `start` in traversal order; just
/// `[start]` when it has no active edge.
pub(crate) fn trace_loop(g: &Domain, active: &FixedBitSet, start: usize) -> Vec<usize> {
    let mut cycle = vec![start];
    let mut prev_edge = usize::MAX;
    let mut cur = start;
    loop {
        let next_edge = g
            .incident(cur)
            .iter()
            .copied()
            .find(|&e| e != prev_edge && active[e]);
        let Some(e) = next_edge else { break };
        let next = g.other_end(e, cur);
        if next == start {
            break;
        }
        cycle.push(next);
        prev_edge = e;
        cur = next;
    }
    cycle
}

/// Bit set of domain edge indices for a list of vertex pairs.
pub fn edge_bits(g: &Domain, edges: &[(Vertex, Vertex)]) -> Result<FixedBitSet> {
    let mut bits = FixedBitSet::with_capacity(g.edge_count());
    for (a, b) in edges {
        let e = g
            .edge_of(a, b)
            .ok_or_else(|| Error::NotContained(format!("edge {a}-{b}")))?;
        bits.insert(e);
    }
    Ok(bits)
}

/// True iff every vertex has degree 0 or 2 under `edges`.
pub fn is_valid_config(g: &Domain, edges: &[(Vertex, Vertex)]) -> Result<bool> {
    let bits = edge_bits(g, edges)?;
    Ok(degrees(g, &bits).iter().all(|&d| d == 0 || d == 2))
}

/// The induced graph `U(P)` on the polygon's vertex set inside `g`.
pub fn envelope(g: &Domain, p: &Polygon) -> Result<Domain> {
    for v in p.sites() {
        if !g.contains(v) {
            return Err(Error::NotContained(format!("polygon vertex {v}")));
        }
    }
    for (a, b) in p.edges() {
        if g.edge_of(&a, &b).is_none() {
            return Err(Error::NotContained(format!("polygon edge {a}-{b}")));
        }
    }
    Domain::induced(g.lattice(), p.sites().iter().cloned())
}
