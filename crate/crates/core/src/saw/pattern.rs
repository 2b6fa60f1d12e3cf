//! Patterns and translation-only occurrence matching.

use serde::Serialize;

use super::walk::Walk;
use crate::error::{Error, Result};
use crate::lattice::{LatticeKind, Vertex};

/// A short walk anchored at the origin. It occurs at step `j` of a walk `w`
/// when `w(j + k) = p(k) + v` for a single translation `v` and every `k`.
/// Rotations and reflections are not matched.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Pattern {
    id: String,
    sites: Vec<Vertex>,
}

impl Pattern {
    /// Translates `sites` so that it starts at the origin. Needs at least one step.
    pub fn new(id: impl Into<String>, lattice: LatticeKind, sites: Vec<Vertex>) -> Result<Pattern> {
        let walk = Walk::new(lattice, sites)?;
        if walk.steps() == 0 {
            return Err(Error::InvalidInput("a pattern needs at least one step".into()));
        }
        let base = walk.start().clone();
        let sites = walk
            .sites()
            .iter()
            .map(|s| Vertex::from(s.difference(&base).to_vec()))
            .collect();
        Ok(Pattern {
            id: id.into(),
            sites,
        })
    }

    /// The U-shaped pattern `(o, e2, e1 + e2, e1)` on `Z^d`; on the hexagonal
    /// lattice, five consecutive edges of one hexagonal face traced from its
    /// lower-left corner.
    pub fn p_prime(lattice: LatticeKind) -> Pattern {
        let d = lattice.dim();
        let site = |c: &[i32]| {
            let mut coords = vec![0; d];
            coords[..c.len()].copy_from_slice(c);
            Vertex::from(coords)
        };
        let sites = match lattice {
            LatticeKind::HyperCubic(_) => vec![site(&[0, 0]), site(&[0, 1]), site(&[1, 1]), site(&[1, 0])],
            LatticeKind::Hexagonal => vec![
                site(&[0, 0]),
                site(&[0, 1]),
                site(&[1, 1]),
                site(&[2, 1]),
                site(&[2, 0]),
                site(&[1, 0]),
            ],
        };
        Pattern::new("p-prime", lattice, sites).expect("P' is a valid walk")
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn sites(&self) -> &[Vertex] {
        &self.sites
    }

    pub fn steps(&self) -> usize {
        self.sites.len() - 1
    }

    /// Direction indices of the pattern's steps.
    pub fn directions(&self, lattice: LatticeKind) -> Vec<u8> {
        self.sites
            .windows(2)
            .map(|p| {
                lattice
                    .direction_of(&p[1].difference(&p[0]))
                    .expect("pattern steps are unit steps") as u8
            })
            .collect()
    }

    /// Whether the pattern's endpoints are adjacent, so that one extra edge
    /// turns the pattern into a polygon.
    pub fn closes(&self, lattice: LatticeKind) -> bool {
        self.sites.len() >= 4 && lattice.adjacent(&self.sites[0], &self.sites[self.sites.len() - 1])
    }

    pub fn occurs_at(&self, w: &Walk, j: usize) -> bool {
        let sites = w.sites();
        if j + self.sites.len() > sites.len() {
            return false;
        }
        let shift = sites[j].difference(&self.sites[0]);
        self.sites
            .iter()
            .zip(&sites[j..])
            .all(|(p, s)| p.offset(&shift) == *s)
    }
}

/// Sorted step indices at which `p` occurs in `w`.
pub fn occurrences(w: &Walk, p: &Pattern) -> Vec<usize> {
    if p.steps() > w.steps() {
        return Vec::new();
    }
    (0..=w.steps() - p.steps()).filter(|&j| p.occurs_at(w, j)).collect()
}

pub fn pattern_p_prime(lattice: LatticeKind) -> Pattern {
    Pattern::p_prime(lattice)
}

/// Finds a self-avoiding walk on which `p` occurs at least `k` times, built
/// by repeating the pattern joined by a short connector. This exhibits the
/// "proper internal" property for the tested `k`.
pub fn proper_internal_witness(lattice: LatticeKind, p: &Pattern, k: usize) -> Option<Walk> {
    let pattern_dirs = p.directions(lattice);
    let dirs = lattice.direction_count();
    for len in 0..=4u32 {
        for code in 0..dirs.pow(len) {
            let mut connector = Vec::with_capacity(len as usize);
            let mut c = code;
            for _ in 0..len {
                connector.push((c % dirs) as u8);
                c /= dirs;
            }
            if let Some(w) = repeat_walk(lattice, &pattern_dirs, &connector, k) {
                if occurrences(&w, p).len() >= k {
                    return Some(w);
                }
            }
        }
    }
    None
}

fn repeat_walk(lattice: LatticeKind, pattern: &[u8], connector: &[u8], k: usize) -> Option<Walk> {
    let mut sites = vec![Vertex::origin(lattice.dim())];
    for rep in 0..k {
        let tail: &[u8] = if rep + 1 < k { connector } else { &[] };
        for &dir in pattern.iter().chain(tail) {
            let next = lattice.step(sites.last().unwrap(), dir as usize)?;
            if sites.contains(&next) {
                return None;
            }
            sites.push(next);
        }
    }
    Some(Walk::from_trusted(sites))
}
