use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeKind, Vertex};

/// A self-avoiding walk, stored as its site sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Walk {
    sites: Vec<Vertex>,
}

impl Walk {
    /// Validates nearest-neighbor steps and self-avoidance.
    pub fn new(lattice: LatticeKind, sites: Vec<Vertex>) -> Result<Walk> {
        if sites.is_empty() {
            return Err(Error::InvalidInput("a walk needs at least one site".into()));
        }
        for pair in sites.windows(2) {
            if !lattice.adjacent(&pair[0], &pair[1]) {
                return Err(Error::InvalidInput(format!(
                    "sites {} and {} are not adjacent",
                    pair[0], pair[1]
                )));
            }
        }
        let distinct: BTreeSet<&Vertex> = sites.iter().collect();
        if distinct.len() != sites.len() {
            return Err(Error::InvalidInput("walk revisits a site".into()));
        }
        Ok(Walk { sites })
    }

    pub(crate) fn from_trusted(sites: Vec<Vertex>) -> Walk {
        Walk { sites }
    }

    pub fn sites(&self) -> &[Vertex] {
        &self.sites
    }

    /// Number of steps, one less than the number of sites.
    pub fn steps(&self) -> usize {
        self.sites.len() - 1
    }

    pub fn start(&self) -> &Vertex {
        &self.sites[0]
    }

    pub fn end(&self) -> &Vertex {
        &self.sites[self.sites.len() - 1]
    }

    /// Adds the edge from the last site back to the first.
    pub fn close(&self, lattice: LatticeKind) -> Result<Polygon> {
        Polygon::from_cycle(lattice, self.sites.clone())
    }
}

/// A self-avoiding polygon: a single cycle, or the degenerate polygon made of
/// one vertex and no edges.
///
/// Sites are stored in a canonical cyclic order (smallest vertex first, then
/// its smaller cycle neighbor), so equal polygons compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Polygon {
    sites: Vec<Vertex>,
}

impl Polygon {
    pub fn degenerate(x: Vertex) -> Polygon {
        Polygon { sites: vec![x] }
    }

    /// Builds a polygon from its sites in cyclic order.
    pub fn from_cycle(lattice: LatticeKind, sites: Vec<Vertex>) -> Result<Polygon> {
        match sites.len() {
            0 => return Err(Error::InvalidPolygon("no sites".into())),
            1 => return Ok(Polygon::degenerate(sites.into_iter().next().unwrap())),
            2 | 3 => {
                return Err(Error::InvalidPolygon(format!(
                    "{} sites cannot form a polygon",
                    sites.len()
                )))
            }
            _ => {}
        }
        let distinct: BTreeSet<&Vertex> = sites.iter().collect();
        if distinct.len() != sites.len() {
            return Err(Error::InvalidPolygon("repeated site".into()));
        }
        let n = sites.len();
        for i in 0..n {
            let (a, b) = (&sites[i], &sites[(i + 1) % n]);
            if !lattice.adjacent(a, b) {
                return Err(Error::InvalidPolygon(format!("{a} and {b} are not adjacent")));
            }
        }
        Ok(Polygon::canonical(sites))
    }

    pub(crate) fn canonical(sites: Vec<Vertex>) -> Polygon {
        let n = sites.len();
        if n == 1 {
            return Polygon { sites };
        }
        let start = (0..n).min_by(|&i, &j| sites[i].cmp(&sites[j])).unwrap();
        let next = &sites[(start + 1) % n];
        let prev = &sites[(start + n - 1) % n];
        let forward = next < prev;
        let ordered = (0..n)
            .map(|k| {
                let i = if forward {
                    (start + k) % n
                } else {
                    (start + n - k) % n
                };
                sites[i].clone()
            })
            .collect();
        Polygon { sites: ordered }
    }

    /// Builds a polygon from an unordered edge set forming one cycle.
    pub fn from_edges(lattice: LatticeKind, edges: &[(Vertex, Vertex)]) -> Result<Polygon> {
        if edges.is_empty() {
            return Err(Error::InvalidPolygon(
                "empty edge set; use Polygon::degenerate".into(),
            ));
        }
        let mut adj: HashMap<&Vertex, Vec<&Vertex>> = HashMap::new();
        for (a, b) in edges {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        if adj.values().any(|nb| nb.len() != 2) {
            return Err(Error::InvalidPolygon("some vertex does not have degree 2".into()));
        }
        let start = *adj.keys().min().unwrap();
        let mut sites = vec![start.clone()];
        let mut prev = start;
        let mut cur = adj[start][0];
        while cur != start {
            sites.push(cur.clone());
            let nb = &adj[cur];
            let next = if nb[0] == prev { nb[1] } else { nb[0] };
            prev = cur;
            cur = next;
        }
        if sites.len() != adj.len() {
            return Err(Error::InvalidPolygon("edge set is not connected".into()));
        }
        Polygon::from_cycle(lattice, sites)
    }

    pub fn is_degenerate(&self) -> bool {
        self.sites.len() == 1
    }

    /// Number of edges, `|P|`. Zero for the degenerate polygon.
    pub fn edge_count(&self) -> usize {
        if self.is_degenerate() {
            0
        } else {
            self.sites.len()
        }
    }

    /// The `N` of an `N`-step polygon; 1 for the degenerate polygon.
    pub fn steps(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[Vertex] {
        &self.sites
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        self.sites.contains(v)
    }

    pub fn vertex_set(&self) -> Vec<Vertex> {
        let mut vs = self.sites.clone();
        vs.sort();
        vs
    }

    /// Edges as sorted vertex pairs, in sorted order.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        if self.is_degenerate() {
            return Vec::new();
        }
        let n = self.sites.len();
        let mut es: Vec<_> = (0..n)
            .map(|i| {
                let (a, b) = (&self.sites[i], &self.sites[(i + 1) % n]);
                if a < b {
                    (a.clone(), b.clone())
                } else {
                    (b.clone(), a.clone())
                }
            })
            .collect();
        es.sort();
        es
    }

    /// The orientation map: of the two walks that trace the polygon from `x`,
    /// the one with the lexicographically smaller site sequence.
    pub fn orient(&self, x: &Vertex) -> Result<Walk> {
        if self.is_degenerate() {
            return Err(Error::InvalidPolygon(
                "the degenerate polygon has no orientation".into(),
            ));
        }
        let n = self.sites.len();
        let at = self
            .sites
            .iter()
            .position(|v| v == x)
            .ok_or_else(|| Error::InvalidPolygon(format!("{x} is not a vertex of the polygon")))?;
        let forward: Vec<Vertex> = (0..n).map(|k| self.sites[(at + k) % n].clone()).collect();
        let backward: Vec<Vertex> = (0..n)
            .map(|k| self.sites[(at + n - k) % n].clone())
            .collect();
        Ok(Walk::from_trusted(forward.min(backward)))
    }
}

pub fn orient(p: &Polygon, x: &Vertex) -> Result<Walk> {
    p.orient(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    const Z2: LatticeKind = LatticeKind::HyperCubic(2);

    fn v(c: &[i32]) -> Vertex {
        Vertex::new(c)
    }

    fn unit_square() -> Polygon {
        Polygon::from_cycle(Z2, vec![v(&[0, 0]), v(&[0, 1]), v(&[1, 1]), v(&[1, 0])]).unwrap()
    }

    #[test]
    fn canonical_form_ignores_start_and_direction() {
        let a = unit_square();
        let b = Polygon::from_cycle(Z2, vec![v(&[1, 1]), v(&[0, 1]), v(&[0, 0]), v(&[1, 0])]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.edge_count(), 4);
        let c = Polygon::from_edges(Z2, &a.edges()).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn rejects_non_polygons() {
        assert!(Polygon::from_cycle(Z2, vec![v(&[0, 0]), v(&[1, 0])]).is_err());
        assert!(Polygon::from_cycle(Z2, vec![v(&[0, 0]), v(&[0, 1]), v(&[1, 1]), v(&[2, 0])]).is_err());
        assert!(Walk::new(Z2, vec![v(&[0, 0]), v(&[1, 0]), v(&[0, 0])]).is_err());
    }

    #[test]
    fn orientation_round_trips() {
        let p = unit_square();
        let w = p.orient(&v(&[0, 0])).unwrap();
        assert_eq!(w.sites(), &[v(&[0, 0]), v(&[0, 1]), v(&[1, 1]), v(&[1, 0])]);
        assert_eq!(w.close(Z2).unwrap(), p);
        assert_eq!(p.orient(&v(&[0, 0])).unwrap(), w);
        let w2 = p.orient(&v(&[1, 1])).unwrap();
        assert_eq!(w2.sites(), &[v(&[1, 1]), v(&[0, 1]), v(&[0, 0]), v(&[1, 0])]);
        assert!(Polygon::degenerate(v(&[0, 0])).orient(&v(&[0, 0])).is_err());
        assert!(p.orient(&v(&[5, 5])).is_err());
    }
}
