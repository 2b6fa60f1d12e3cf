//! Hypercubic and hexagonal lattices and their finite domains.
//!
//! The hexagonal lattice uses the brick-wall embedding in `Z^2`: `(x, y)` is
//! joined to `(x ± 1, y)`, to `(x, y + 1)` when `x + y` is even and to
//! `(x, y - 1)` when `x + y` is odd.
//!
//! A [`Domain`] is always an induced subgraph: its edges are every lattice
//! edge with both endpoints in its vertex set. Vertices are kept in
//! lexicographic order, which fixes every enumeration order downstream.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// A lattice site. Ordering is lexicographic on the coordinates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vertex(SmallVec<[i32; 4]>);

impl Vertex {
    pub fn new(coords: &[i32]) -> Self {
        Vertex(SmallVec::from_slice(coords))
    }

    pub fn origin(dim: usize) -> Self {
        Vertex(SmallVec::from_elem(0, dim))
    }

    pub fn coords(&self) -> &[i32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn offset(&self, delta: &[i32]) -> Vertex {
        Vertex(self.0.iter().zip(delta).map(|(a, b)| a + b).collect())
    }

    pub fn difference(&self, other: &Vertex) -> SmallVec<[i32; 4]> {
        self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()
    }

    /// L1 distance; a lower bound on graph distance in both lattices.
    pub fn manhattan(&self, other: &Vertex) -> u32 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.abs_diff(*b))
            .sum()
    }
}

impl From<Vec<i32>> for Vertex {
    fn from(coords: Vec<i32>) -> Self {
        Vertex(SmallVec::from_vec(coords))
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for Vertex {
    type Err = Error;

    /// Parses `"1,2"` or `"(1,2)"`.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('(').trim_end_matches(')');
        let coords = body
            .split(',')
            .map(|c| c.trim().parse::<i32>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::InvalidInput(format!("cannot parse vertex `{s}`")))?;
        Ok(Vertex::from(coords))
    }
}

/// The ambient infinite lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LatticeKind {
    HyperCubic(usize),
    Hexagonal,
}

impl LatticeKind {
    pub fn hypercubic(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidInput(format!(
                "hypercubic lattice needs d >= 2, got {d}"
            )));
        }
        Ok(LatticeKind::HyperCubic(d))
    }

    pub fn dim(self) -> usize {
        match self {
            LatticeKind::HyperCubic(d) => d,
            LatticeKind::Hexagonal => 2,
        }
    }

    pub fn degree(self) -> usize {
        match self {
            LatticeKind::HyperCubic(d) => 2 * d,
            LatticeKind::Hexagonal => 3,
        }
    }

    /// Short name used on the command line and in cache keys: `z2`, `z3`, `hex`.
    pub fn name(self) -> String {
        match self {
            LatticeKind::HyperCubic(d) => format!("z{d}"),
            LatticeKind::Hexagonal => "hex".to_string(),
        }
    }

    /// Number of distinct unit displacements. On the hexagonal lattice only
    /// three of the four are available at any given vertex.
    pub fn direction_count(self) -> usize {
        match self {
            LatticeKind::HyperCubic(d) => 2 * d,
            LatticeKind::Hexagonal => 4,
        }
    }

    /// Unit displacement of direction `dir`: `2i` is `+e_i`, `2i+1` is `-e_i`.
    pub fn displacement(self, dir: usize) -> SmallVec<[i32; 4]> {
        let mut delta = SmallVec::from_elem(0, self.dim());
        delta[dir / 2] = if dir.is_multiple_of(2) { 1 } else { -1 };
        delta
    }

    /// Direction index of a unit displacement, if it is one.
    pub fn direction_of(self, delta: &[i32]) -> Option<usize> {
        if delta.len() != self.dim() {
            return None;
        }
        let mut found = None;
        for (axis, &c) in delta.iter().enumerate() {
            match c {
                0 => {}
                1 | -1 if found.is_none() => {
                    found = Some(2 * axis + usize::from(c == -1));
                }
                _ => return None,
            }
        }
        found
    }

    /// The neighbor of `v` in direction `dir`, or `None` where the hexagonal
    /// lattice has no such edge.
    pub fn step(self, v: &Vertex, dir: usize) -> Option<Vertex> {
        if let LatticeKind::Hexagonal = self {
            let parity_even = (v.0[0] + v.0[1]).rem_euclid(2) == 0;
            match dir {
                2 if !parity_even => return None,
                3 if parity_even => return None,
                _ => {}
            }
        }
        Some(v.offset(&self.displacement(dir)))
    }

    fn check_arity(self, v: &Vertex) -> Result<()> {
        if v.dim() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "vertex {v} has {} coordinates, lattice {} needs {}",
                v.dim(),
                self.name(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// All neighbors of `v` in direction order.
    pub fn neighbors(self, v: &Vertex) -> Result<Vec<Vertex>> {
        self.check_arity(v)?;
        Ok((0..self.direction_count())
            .filter_map(|dir| self.step(v, dir))
            .collect())
    }

    pub fn adjacent(self, a: &Vertex, b: &Vertex) -> bool {
        if a.dim() != self.dim() || b.dim() != self.dim() {
            return false;
        }
        match self.direction_of(&b.difference(a)) {
            Some(dir) => self.step(a, dir).is_some(),
            None => false,
        }
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for LatticeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "hex" | "hexagonal" | "h" => Ok(LatticeKind::Hexagonal),
            _ => {
                let d = s
                    .strip_prefix('z')
                    .and_then(|d| d.parse::<usize>().ok())
                    .ok_or_else(|| Error::InvalidInput(format!("unknown lattice `{s}`")))?;
                LatticeKind::hypercubic(d)
            }
        }
    }
}

/// A finite induced subgraph of a lattice. May be empty only as the result
/// of [`Domain::minus`].
#[derive(Debug, Clone)]
pub struct Domain {
    lattice: LatticeKind,
    vertices: Vec<Vertex>,
    index: HashMap<Vertex, usize>,
    edges: Vec<(usize, usize)>,
    edge_index: HashMap<(usize, usize), usize>,
    incident: Vec<Vec<usize>>,
}

impl PartialEq for Domain {
    fn eq(&self, other: &Self) -> bool {
        self.lattice == other.lattice && self.vertices == other.vertices
    }
}

impl Eq for Domain {}

impl Domain {
    fn build(lattice: LatticeKind, set: BTreeSet<Vertex>) -> Domain {
        let vertices: Vec<Vertex> = set.into_iter().collect();
        let index: HashMap<Vertex, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        let mut edges = Vec::new();
        for (i, v) in vertices.iter().enumerate() {
            for dir in 0..lattice.direction_count() {
                if let Some(w) = lattice.step(v, dir) {
                    if let Some(&j) = index.get(&w) {
                        if i < j {
                            edges.push((i, j));
                        }
                    }
                }
            }
        }
        edges.sort_unstable();
        let mut incident = vec![Vec::new(); vertices.len()];
        let mut edge_index = HashMap::with_capacity(edges.len());
        for (e, &(a, b)) in edges.iter().enumerate() {
            incident[a].push(e);
            incident[b].push(e);
            edge_index.insert((a, b), e);
        }
        Domain {
            lattice,
            vertices,
            index,
            edges,
            edge_index,
            incident,
        }
    }

    /// The induced domain on a nonempty vertex set.
    pub fn induced<I>(lattice: LatticeKind, vertices: I) -> Result<Domain>
    where
        I: IntoIterator<Item = Vertex>,
    {
        let mut set = BTreeSet::new();
        for v in vertices {
            lattice.check_arity(&v)?;
            set.insert(v);
        }
        if set.is_empty() {
            return Err(Error::InvalidInput("empty vertex set".into()));
        }
        Ok(Domain::build(lattice, set))
    }

    /// The distinguished empty domain; its partition function is 1.
    pub fn empty(lattice: LatticeKind) -> Domain {
        Domain::build(lattice, BTreeSet::new())
    }

    /// The box `corner + [0, side_i)` in each coordinate.
    pub fn lattice_box(lattice: LatticeKind, corner: &Vertex, sides: &[usize]) -> Result<Domain> {
        lattice.check_arity(corner)?;
        if sides.len() != lattice.dim() {
            return Err(Error::InvalidInput(format!(
                "box needs {} side lengths, got {}",
                lattice.dim(),
                sides.len()
            )));
        }
        if sides.contains(&0) {
            return Err(Error::InvalidInput("box side lengths must be >= 1".into()));
        }
        let mut set = BTreeSet::new();
        let mut cursor = vec![0usize; sides.len()];
        loop {
            let delta: Vec<i32> = cursor.iter().map(|&c| c as i32).collect();
            set.insert(corner.offset(&delta));
            let mut axis = sides.len();
            loop {
                if axis == 0 {
                    return Ok(Domain::build(lattice, set));
                }
                axis -= 1;
                cursor[axis] += 1;
                if cursor[axis] < sides[axis] {
                    break;
                }
                cursor[axis] = 0;
            }
        }
    }

    /// Removes `removed` and every edge touching it.
    pub fn minus<'a, I>(&self, removed: I) -> Result<Domain>
    where
        I: IntoIterator<Item = &'a Vertex>,
    {
        let mut keep: BTreeSet<Vertex> = self.vertices.iter().cloned().collect();
        for v in removed {
            if !keep.remove(v) && !self.index.contains_key(v) {
                return Err(Error::NotInDomain(v.to_string()));
            }
        }
        Ok(Domain::build(self.lattice, keep))
    }

    pub fn lattice(&self) -> LatticeKind {
        self.lattice
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Vertex {
        &self.vertices[i]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edges as sorted index pairs `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn index_of(&self, v: &Vertex) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        self.index.contains_key(v)
    }

    /// Index of the edge joining vertex indices `a` and `b`.
    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edge_index.get(&key).copied()
    }

    /// Index of the edge joining two vertices, if both are in the domain and adjacent.
    pub fn edge_of(&self, a: &Vertex, b: &Vertex) -> Option<usize> {
        self.edge_between(self.index_of(a)?, self.index_of(b)?)
    }

    /// Edge indices incident to vertex index `v`, ascending.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    /// The endpoint of edge `e` opposite to vertex index `v`.
    pub fn other_end(&self, e: usize, v: usize) -> usize {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    pub fn edge_vertices(&self, e: usize) -> (&Vertex, &Vertex) {
        let (a, b) = self.edges[e];
        (&self.vertices[a], &self.vertices[b])
    }
}

/// JSON form: `{lattice, d, vertices}`. Edges are recomputed on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainRecord {
    pub lattice: String,
    pub d: usize,
    pub vertices: Vec<Vec<i32>>,
}

impl From<&Domain> for DomainRecord {
    fn from(g: &Domain) -> Self {
        let lattice = match g.lattice {
            LatticeKind::HyperCubic(_) => "hypercubic",
            LatticeKind::Hexagonal => "hexagonal",
        };
        DomainRecord {
            lattice: lattice.to_string(),
            d: g.lattice.dim(),
            vertices: g.vertices.iter().map(|v| v.coords().to_vec()).collect(),
        }
    }
}

impl TryFrom<DomainRecord> for Domain {
    type Error = Error;

    fn try_from(rec: DomainRecord) -> Result<Domain> {
        let lattice = match rec.lattice.as_str() {
            "hypercubic" => LatticeKind::hypercubic(rec.d)?,
            "hexagonal" if rec.d == 2 => LatticeKind::Hexagonal,
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown lattice `{other}` with d = {}",
                    rec.d
                )))
            }
        };
        if rec.vertices.is_empty() {
            return Ok(Domain::empty(lattice));
        }
        Domain::induced(lattice, rec.vertices.into_iter().map(Vertex::from))
    }
}

impl Serialize for Domain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DomainRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Domain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = DomainRecord::deserialize(d)?;
        Domain::try_from(rec).map_err(serde::de::Error::custom)
    }
}

pub fn neighbors(lattice: LatticeKind, v: &Vertex) -> Result<Vec<Vertex>> {
    lattice.neighbors(v)
}

pub fn box_domain(lattice: LatticeKind, corner: &Vertex, side_lengths: &[usize]) -> Result<Domain> {
    Domain::lattice_box(lattice, corner, side_lengths)
}

pub fn induced_domain<I>(lattice: LatticeKind, vertex_set: I) -> Result<Domain>
where
    I: IntoIterator<Item = Vertex>,
{
    Domain::induced(lattice, vertex_set)
}

pub fn domain_minus<'a, I>(g: &Domain, removed: I) -> Result<Domain>
where
    I: IntoIterator<Item = &'a Vertex>,
{
    g.minus(removed)
}
