//! Backtracking enumerator on a dense local grid.
//!
//! Cells of a box of radius `R` around the start are numbered so that cell
//! order equals lexicographic vertex order. Each cell stores its neighbor in
//! every direction slot, so a walk step is a table lookup. Pattern
//! occurrences are tracked incrementally from the direction sequence, which
//! is equivalent to translation-only matching.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{LatticeKind, Vertex};

const NONE: u32 = u32::MAX;
const MAX_CELLS: usize = 1 << 24;

pub(crate) struct LocalGrid {
    lattice: LatticeKind,
    origin: Vertex,
    radius: i32,
    side: usize,
    slots: usize,
    nbr: Vec<u32>,
    dist: Vec<u32>,
    centre: u32,
}

impl LocalGrid {
    pub(crate) fn new(lattice: LatticeKind, centre: &Vertex, radius: usize) -> Result<LocalGrid> {
        if centre.dim() != lattice.dim() {
            return Err(Error::InvalidInput(format!(
                "vertex {centre} has the wrong number of coordinates"
            )));
        }
        let dim = lattice.dim();
        let side = 2 * radius + 1;
        let cells = side
            .checked_pow(dim as u32)
            .filter(|&c| c <= MAX_CELLS)
            .ok_or(Error::SizeCap {
                what: "local grid cells",
                actual: side.saturating_pow(dim as u32),
                cap: MAX_CELLS,
            })?;
        let slots = lattice.direction_count();
        let mut grid = LocalGrid {
            lattice,
            origin: centre.clone(),
            radius: radius as i32,
            side,
            slots,
            nbr: vec![NONE; cells * slots],
            dist: vec![0; cells],
            centre: 0,
        };
        grid.centre = grid.cell_of(centre).expect("centre lies in its own grid");
        for cell in 0..cells as u32 {
            let v = grid.vertex_of(cell);
            grid.dist[cell as usize] = v.manhattan(centre);
            for dir in 0..slots {
                if let Some(w) = lattice.step(&v, dir) {
                    if let Some(c) = grid.cell_of(&w) {
                        grid.nbr[cell as usize * slots + dir] = c;
                    }
                }
            }
        }
        Ok(grid)
    }

    pub(crate) fn cell_of(&self, v: &Vertex) -> Option<u32> {
        let mut idx = 0usize;
        for (c, o) in v.coords().iter().zip(self.origin.coords()) {
            let off = c - o + self.radius;
            if off < 0 || off as usize >= self.side {
                return None;
            }
            idx = idx * self.side + off as usize;
        }
        Some(idx as u32)
    }

    pub(crate) fn vertex_of(&self, cell: u32) -> Vertex {
        let dim = self.lattice.dim();
        let mut coords = vec![0i32; dim];
        let mut rest = cell as usize;
        for axis in (0..dim).rev() {
            let off = (rest % self.side) as i32;
            rest /= self.side;
            coords[axis] = self.origin.coords()[axis] + off - self.radius;
        }
        Vertex::from(coords)
    }

    #[inline]
    fn neighbor(&self, cell: u32, dir: usize) -> u32 {
        self.nbr[cell as usize * self.slots + dir]
    }

    fn is_adjacent_to_centre(&self, cell: u32) -> bool {
        (0..self.slots).any(|d| self.neighbor(cell, d) == self.centre)
    }
}

/// What the search collects at its leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Target {
    /// All walks with exactly this many steps.
    Walks(usize),
    /// Polygons through the centre with this many edges, each reported once
    /// through its canonical orientation.
    Polygons(usize),
}

impl Target {
    fn walk_steps(self) -> usize {
        match self {
            Target::Walks(n) => n,
            Target::Polygons(n) => n - 1,
        }
    }
}

#[derive(Debug, Default)]
pub(crate) struct Tally {
    /// `histogram[m]` counts leaves with exactly `m` pattern occurrences.
    pub histogram: Vec<u64>,
    /// Leaf paths as cell sequences, when collection was requested.
    pub paths: Vec<Vec<u32>>,
}

impl Tally {
    pub(crate) fn total(&self) -> u64 {
        self.histogram.iter().sum()
    }

    fn absorb(&mut self, other: Tally) {
        if self.histogram.len() < other.histogram.len() {
            self.histogram.resize(other.histogram.len(), 0);
        }
        for (a, b) in self.histogram.iter_mut().zip(other.histogram) {
            *a += b;
        }
        self.paths.extend(other.paths);
    }
}

struct Dfs<'g> {
    grid: &'g LocalGrid,
    pattern: &'g [u8],
    target: Target,
    max_depth: usize,
    collect: bool,
    visited: Vec<bool>,
    cells: Vec<u32>,
    dirs: Vec<u8>,
    occ: Vec<u32>,
    tally: Tally,
}

impl<'g> Dfs<'g> {
    fn new(grid: &'g LocalGrid, pattern: &'g [u8], target: Target, collect: bool) -> Self {
        let max_depth = target.walk_steps();
        Dfs {
            grid,
            pattern,
            target,
            max_depth,
            collect,
            visited: vec![false; grid.dist.len()],
            cells: Vec::with_capacity(max_depth + 1),
            dirs: Vec::with_capacity(max_depth),
            occ: Vec::with_capacity(max_depth + 1),
            tally: Tally {
                histogram: vec![0; max_depth + 2],
                paths: Vec::new(),
            },
        }
    }

    fn reset_to(&mut self, prefix: &[u32], prefix_dirs: &[u8]) {
        for &c in &self.cells {
            self.visited[c as usize] = false;
        }
        self.cells.clear();
        self.dirs.clear();
        self.occ.clear();
        self.cells.push(prefix[0]);
        self.visited[prefix[0] as usize] = true;
        self.occ.push(0);
        for (&c, &d) in prefix[1..].iter().zip(prefix_dirs) {
            self.push(c, d);
        }
    }

    #[inline]
    fn push(&mut self, cell: u32, dir: u8) {
        self.visited[cell as usize] = true;
        self.cells.push(cell);
        self.dirs.push(dir);
        let k = self.dirs.len();
        let p = self.pattern.len();
        let hit = p > 0 && k >= p && self.dirs[k - p..] == *self.pattern;
        let prev = *self.occ.last().unwrap();
        self.occ.push(prev + u32::from(hit));
    }

    #[inline]
    fn pop(&mut self) {
        let cell = self.cells.pop().unwrap();
        self.visited[cell as usize] = false;
        self.dirs.pop();
        self.occ.pop();
    }

    fn leaf(&mut self) {
        let depth = self.dirs.len();
        if let Target::Polygons(_) = self.target {
            let last = self.cells[depth];
            if !self.grid.is_adjacent_to_centre(last) || self.cells[1] > last {
                return;
            }
        }
        let m = *self.occ.last().unwrap() as usize;
        self.tally.histogram[m] += 1;
        if self.collect {
            self.tally.paths.push(self.cells.clone());
        }
    }

    fn run(&mut self) {
        let depth = self.dirs.len();
        if depth == self.max_depth {
            self.leaf();
            return;
        }
        let here = self.cells[depth];
        let polygon = matches!(self.target, Target::Polygons(_));
        let remaining = (self.max_depth - depth - 1) as u32;
        for dir in 0..self.grid.slots {
            let next = self.grid.neighbor(here, dir);
            if next == NONE || self.visited[next as usize] {
                continue;
            }
            // a polygon walk must finish next to the centre
            if polygon && self.grid.dist[next as usize] > remaining + 1 {
                continue;
            }
            self.push(next, dir as u8);
            self.run();
            self.pop();
        }
    }
}

/// Enumerates walks from `start` and tallies pattern occurrences. The top
/// two levels of the search tree are split into independent tasks whose
/// tallies are merged in a fixed order.
pub(crate) fn search(
    lattice: LatticeKind,
    start: &Vertex,
    target: Target,
    pattern: &[u8],
    collect: bool,
) -> Result<(LocalGrid, Tally)> {
    let steps = target.walk_steps();
    let grid = LocalGrid::new(lattice, start, steps + 1)?;
    let centre = grid.centre;

    let split = steps.min(2);
    let mut prefixes: Vec<(Vec<u32>, Vec<u8>)> = vec![(vec![centre], Vec::new())];
    for _ in 0..split {
        let mut next = Vec::new();
        for (cells, dirs) in &prefixes {
            let here = *cells.last().unwrap();
            for dir in 0..grid.slots {
                let c = grid.neighbor(here, dir);
                if c != NONE && !cells.contains(&c) {
                    let mut cs = cells.clone();
                    cs.push(c);
                    let mut ds = dirs.clone();
                    ds.push(dir as u8);
                    next.push((cs, ds));
                }
            }
        }
        prefixes = next;
    }

    let parts: Vec<Tally> = prefixes
        .par_iter()
        .map(|(cells, dirs)| {
            let mut dfs = Dfs::new(&grid, pattern, target, collect);
            dfs.reset_to(cells, dirs);
            dfs.run();
            dfs.tally
        })
        .collect();

    let mut tally = Tally {
        histogram: vec![0; steps + 2],
        paths: Vec::new(),
    };
    for part in parts {
        tally.absorb(part);
    }
    Ok((grid, tally))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_order_is_lexicographic() {
        let g = LocalGrid::new(LatticeKind::HyperCubic(2), &Vertex::new(&[3, -1]), 2).unwrap();
        let mut prev: Option<Vertex> = None;
        for cell in 0..25 {
            let v = g.vertex_of(cell);
            assert_eq!(g.cell_of(&v), Some(cell));
            if let Some(p) = prev {
                assert!(p < v);
            }
            prev = Some(v);
        }
    }

    #[test]
    fn small_counts() {
        let z2 = LatticeKind::HyperCubic(2);
        let o = Vertex::origin(2);
        let counts: Vec<u64> = (0..=4)
            .map(|n| search(z2, &o, Target::Walks(n), &[], false).unwrap().1.total())
            .collect();
        assert_eq!(counts, vec![1, 4, 12, 36, 100]);
        let (_, t) = search(z2, &o, Target::Polygons(4), &[], false).unwrap();
        assert_eq!(t.total(), 4);
    }
}
