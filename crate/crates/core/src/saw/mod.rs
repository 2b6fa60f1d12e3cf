//! Self-avoiding walks and polygons, pattern statistics and growth-rate
//! estimates.

mod engine;
pub mod pattern;
pub mod walk;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Domain, LatticeKind, Vertex};

pub use pattern::{occurrences, pattern_p_prime, proper_internal_witness, Pattern};
pub use walk::{orient, Polygon, Walk};

/// Largest walk length enumerated without an explicit override.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_steps: usize,
}

impl SearchLimits {
    /// 20 steps on `Z^2`, 30 on the hexagonal lattice, 14 on `Z^d` for `d >= 3`.
    pub fn for_lattice(lattice: LatticeKind) -> Self {
        let max_steps = match lattice {
            LatticeKind::HyperCubic(2) => 20,
            LatticeKind::HyperCubic(_) => 14,
            LatticeKind::Hexagonal => 30,
        };
        SearchLimits { max_steps }
    }

    pub fn unlimited() -> Self {
        SearchLimits {
            max_steps: usize::MAX,
        }
    }

    fn check(&self, steps: usize) -> Result<()> {
        if steps > self.max_steps {
            return Err(Error::SizeCap {
                what: "walk steps",
                actual: steps,
                cap: self.max_steps,
            });
        }
        Ok(())
    }
}

/// Which family a count refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    Saw,
    Sap,
}

impl ObjectKind {
    pub fn name(self) -> &'static str {
        match self {
            ObjectKind::Saw => "saw",
            ObjectKind::Sap => "sap",
        }
    }
}

/// Occurrence statistics of one pattern over all `N`-step walks (or all
/// `N`-step polygons through a vertex, read along their orientation).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternStats {
    pub kind: ObjectKind,
    pub n: usize,
    pub total: u64,
    /// `histogram[m]` is the number of objects with exactly `m` occurrences.
    pub histogram: Vec<u64>,
}

impl PatternStats {
    /// Number of objects with fewer than `w` occurrences.
    pub fn deficient(&self, w: u64) -> u64 {
        let upto = (w as usize).min(self.histogram.len());
        self.histogram[..upto].iter().sum()
    }

    pub fn deficient_fraction(&self, w: u64) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.deficient(w) as f64 / self.total as f64
    }

    pub fn deficient_map(&self, thresholds: &[u64]) -> BTreeMap<u64, u64> {
        thresholds.iter().map(|&w| (w, self.deficient(w))).collect()
    }
}

/// Whether `SAP_x(N)` can be nonempty: `N = 1` or `N >= 4` even.
pub fn admissible_polygon_length(n: usize) -> bool {
    n == 1 || (n >= 4 && n.is_multiple_of(2))
}

pub fn count_saws(lattice: LatticeKind, x: &Vertex, n: usize, limits: SearchLimits) -> Result<u64> {
    limits.check(n)?;
    let (_, tally) = engine::search(lattice, x, engine::Target::Walks(n), &[], false)?;
    Ok(tally.total())
}

/// `|SAW_x(N)|` with the default cap.
pub fn enumerate_saws(lattice: LatticeKind, x: &Vertex, n: usize) -> Result<u64> {
    count_saws(lattice, x, n, SearchLimits::for_lattice(lattice))
}

/// Every `N`-step walk from `x`, in lexicographic order of site sequences.
pub fn saw_walks(lattice: LatticeKind, x: &Vertex, n: usize, limits: SearchLimits) -> Result<Vec<Walk>> {
    limits.check(n)?;
    let (grid, tally) = engine::search(lattice, x, engine::Target::Walks(n), &[], true)?;
    Ok(tally
        .paths
        .into_iter()
        .map(|cells| Walk::from_trusted(cells.into_iter().map(|c| grid.vertex_of(c)).collect()))
        .collect())
}

pub fn count_saps(lattice: LatticeKind, x: &Vertex, n: usize, limits: SearchLimits) -> Result<u64> {
    if n == 0 {
        return Err(Error::InvalidInput("polygon length must be >= 1".into()));
    }
    if n == 1 {
        return Ok(1);
    }
    if !admissible_polygon_length(n) {
        return Ok(0);
    }
    limits.check(n - 1)?;
    let (_, tally) = engine::search(lattice, x, engine::Target::Polygons(n), &[], false)?;
    Ok(tally.total())
}

/// `SAP_x(N)` with an explicit cap. Each polygon appears once.
pub fn enumerate_saps_with(
    lattice: LatticeKind,
    x: &Vertex,
    n: usize,
    limits: SearchLimits,
) -> Result<Vec<Polygon>> {
    if n == 0 {
        return Err(Error::InvalidInput("polygon length must be >= 1".into()));
    }
    if n == 1 {
        return Ok(vec![Polygon::degenerate(x.clone())]);
    }
    if !admissible_polygon_length(n) {
        return Ok(Vec::new());
    }
    limits.check(n - 1)?;
    let (grid, tally) = engine::search(lattice, x, engine::Target::Polygons(n), &[], true)?;
    Ok(tally
        .paths
        .into_iter()
        .map(|cells| Polygon::canonical(cells.into_iter().map(|c| grid.vertex_of(c)).collect()))
        .collect())
}

/// `SAP_x(N)` with the default cap.
pub fn enumerate_saps(lattice: LatticeKind, x: &Vertex, n: usize) -> Result<Vec<Polygon>> {
    enumerate_saps_with(lattice, x, n, SearchLimits::for_lattice(lattice))
}

/// Occurrence histogram of `pattern` over `N`-step walks from `x`, or over
/// `N`-step polygons through `x` read along their orientation from `x`.
pub fn pattern_stats(
    lattice: LatticeKind,
    x: &Vertex,
    n: usize,
    pattern: &Pattern,
    kind: ObjectKind,
    limits: SearchLimits,
) -> Result<PatternStats> {
    let dirs = pattern.directions(lattice);
    let histogram = match kind {
        ObjectKind::Saw => {
            limits.check(n)?;
            engine::search(lattice, x, engine::Target::Walks(n), &dirs, false)?
                .1
                .histogram
        }
        ObjectKind::Sap => {
            if n == 0 {
                return Err(Error::InvalidInput("polygon length must be >= 1".into()));
            }
            if n == 1 {
                // the degenerate polygon has an empty orientation
                vec![1]
            } else if !admissible_polygon_length(n) {
                vec![0]
            } else {
                limits.check(n - 1)?;
                engine::search(lattice, x, engine::Target::Polygons(n), &dirs, false)?
                    .1
                    .histogram
            }
        }
    };
    let total = histogram.iter().sum();
    Ok(PatternStats {
        kind,
        n,
        total,
        histogram,
    })
}

/// `|SAW_x[N, w, P]|` or `|SAP_x(N, w, P)|`: objects with fewer than `w`
/// occurrences of `pattern`.
pub fn deficient_counts(
    lattice: LatticeKind,
    x: &Vertex,
    n: usize,
    w: u64,
    pattern: &Pattern,
    kind: ObjectKind,
) -> Result<u64> {
    Ok(pattern_stats(lattice, x, n, pattern, kind, SearchLimits::for_lattice(lattice))?.deficient(w))
}

/// `ceil(a N)`, the occurrence threshold used wherever a density `a` is given.
pub fn occurrence_threshold(a: f64, n: usize) -> u64 {
    (a * n as f64).ceil().max(0.0) as u64
}

/// Finite-`N` root estimates `count^(1/N)`.
pub fn growth_estimates(counts: &BTreeMap<usize, u64>) -> Result<BTreeMap<usize, f64>> {
    if counts.is_empty() {
        return Err(Error::InvalidInput("no counts given".into()));
    }
    counts
        .iter()
        .map(|(&n, &c)| {
            if n == 0 {
                return Err(Error::InvalidInput("growth estimate needs N >= 1".into()));
            }
            if c == 0 {
                return Err(Error::InvalidInput(format!("zero count at N = {n}")));
            }
            Ok((n, (c as f64).powf(1.0 / n as f64)))
        })
        .collect()
}

/// Closes each occurrence of a closing pattern along `walk` into the minimal
/// face polygon it spans (a unit square on `Z^d`, a hexagon on the hexagonal
/// lattice).
pub fn q_squares(
    lattice: LatticeKind,
    walk: &Walk,
    pattern: &Pattern,
    occ: &[usize],
) -> Result<Vec<Polygon>> {
    if !pattern.closes(lattice) {
        return Err(Error::InvalidInput(format!(
            "pattern `{}` does not close into a polygon",
            pattern.id()
        )));
    }
    occ.iter()
        .map(|&j| {
            if !pattern.occurs_at(walk, j) {
                return Err(Error::InvalidInput(format!(
                    "pattern does not occur at step {j}"
                )));
            }
            let sites = walk.sites()[j..=j + pattern.steps()].to_vec();
            Polygon::from_cycle(lattice, sites)
        })
        .collect()
}

/// Outcome of the sub-multiplicativity and polygon-count checks.
#[derive(Debug, Clone, Serialize)]
pub struct MultiplicativityReport {
    /// Pairs `(m, n)` with `c_{m+n} > c_m c_n`.
    pub saw_violations: Vec<(usize, usize)>,
    pub saw_pairs_checked: usize,
    /// `N` with `|SAP_x(N)| > ((d-1)/d) N M^N`, `M = 2d - 1`.
    pub sap_violations: Vec<usize>,
    pub sap_lengths_checked: usize,
}

impl MultiplicativityReport {
    pub fn holds(&self) -> bool {
        self.saw_violations.is_empty() && self.sap_violations.is_empty()
    }
}

/// The polygon majorant `((d-1)/d) N M^N` with `M = 2d - 1 >= mu`.
pub fn sap_majorant(d: usize, n: usize) -> f64 {
    let m = (2 * d - 1) as f64;
    (d as f64 - 1.0) / d as f64 * n as f64 * m.powi(n as i32)
}

/// Checks `c_{m+n} <= c_m c_n` over every pair available in `saw_counts`,
/// and, on `Z^d`, the polygon majorant over `sap_counts`.
pub fn check_supermultiplicativity(
    lattice: LatticeKind,
    saw_counts: &BTreeMap<usize, u64>,
    sap_counts: &BTreeMap<usize, u64>,
) -> MultiplicativityReport {
    let mut report = MultiplicativityReport {
        saw_violations: Vec::new(),
        saw_pairs_checked: 0,
        sap_violations: Vec::new(),
        sap_lengths_checked: 0,
    };
    for (&m, &cm) in saw_counts.iter().filter(|(&m, _)| m >= 1) {
        for (&n, &cn) in saw_counts.range(m..) {
            if let Some(&cmn) = saw_counts.get(&(m + n)) {
                report.saw_pairs_checked += 1;
                if cmn as u128 > cm as u128 * cn as u128 {
                    report.saw_violations.push((m, n));
                }
            }
        }
    }
    if let LatticeKind::HyperCubic(d) = lattice {
        for (&n, &c) in sap_counts.iter().filter(|(&n, _)| n >= 4) {
            report.sap_lengths_checked += 1;
            if c as f64 > sap_majorant(d, n) {
                report.sap_violations.push(n);
            }
        }
    }
    report
}

/// Every polygon through `x` inside `g` with at most `max_len` edges, each
/// once, ordered by length and then by orientation from `x`.
pub fn polygons_in_domain(g: &Domain, x: &Vertex, max_len: usize) -> Result<Vec<Polygon>> {
    let start = g
        .index_of(x)
        .ok_or_else(|| Error::NotInDomain(x.to_string()))?;
    let mut found: Vec<Vec<usize>> = Vec::new();
    let mut path = vec![start];
    let mut on_path = vec![false; g.vertex_count()];
    on_path[start] = true;
    polygon_dfs(g, start, max_len, &mut path, &mut on_path, &mut found);
    found.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(found
        .into_iter()
        .map(|p| Polygon::canonical(p.into_iter().map(|i| g.vertex(i).clone()).collect()))
        .collect())
}

fn polygon_dfs(
    g: &Domain,
    start: usize,
    max_len: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    found: &mut Vec<Vec<usize>>,
) {
    let here = *path.last().unwrap();
    if path.len() >= 4 && path[1] < here && g.edge_between(here, start).is_some() {
        found.push(path.clone());
    }
    if path.len() == max_len {
        return;
    }
    for &e in g.incident(here) {
        let next = g.other_end(e, here);
        if on_path[next] {
            continue;
        }
        on_path[next] = true;
        path.push(next);
        polygon_dfs(g, start, max_len, path, on_path, found);
        path.pop();
        on_path[next] = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    const Z2: LatticeKind = LatticeKind::HyperCubic(2);

    fn o2() -> Vertex {
        Vertex::origin(2)
    }

    /// Filters all (2d)^N direction sequences for self-avoidance.
    fn brute_force_saws(lattice: LatticeKind, n: usize) -> u64 {
        let dirs = lattice.direction_count();
        let mut count = 0;
        'seq: for code in 0..dirs.pow(n as u32) {
            let mut c = code;
            let mut sites = vec![Vertex::origin(lattice.dim())];
            for _ in 0..n {
                let next = match lattice.step(sites.last().unwrap(), c % dirs) {
                    Some(v) => v,
                    None => continue 'seq,
                };
                c /= dirs;
                if sites.contains(&next) {
                    continue 'seq;
                }
                sites.push(next);
            }
            count += 1;
        }
        count
    }

    #[test]
    fn square_lattice_saw_counts() {
        let counts: Vec<u64> = (1..=4).map(|n| enumerate_saws(Z2, &o2(), n).unwrap()).collect();
        assert_eq!(counts, vec![4, 12, 36, 100]);
        assert_eq!(enumerate_saws(LatticeKind::HyperCubic(3), &Vertex::origin(3), 1).unwrap(), 6);
        assert_eq!(enumerate_saws(LatticeKind::HyperCubic(4), &Vertex::origin(4), 1).unwrap(), 8);
    }

    #[test]
    fn hexagonal_saw_counts() {
        let h = LatticeKind::Hexagonal;
        assert_eq!(enumerate_saws(h, &o2(), 1).unwrap(), 3);
        assert_eq!(enumerate_saws(h, &o2(), 2).unwrap(), 6);
        // both parities of the start give the same counts
        for n in 1..=8 {
            assert_eq!(
                enumerate_saws(h, &o2(), n).unwrap(),
                enumerate_saws(h, &Vertex::new(&[1, 0]), n).unwrap()
            );
        }
    }

    #[test]
    fn backtracking_matches_brute_force() {
        for n in 0..=6 {
            assert_eq!(enumerate_saws(Z2, &o2(), n).unwrap(), brute_force_saws(Z2, n));
            assert_eq!(
                enumerate_saws(LatticeKind::Hexagonal, &o2(), n).unwrap(),
                brute_force_saws(LatticeKind::Hexagonal, n)
            );
        }
    }

    #[test]
    fn caps_are_enforced() {
        assert!(matches!(
            enumerate_saws(Z2, &o2(), 21),
            Err(Error::SizeCap { .. })
        ));
        assert!(count_saws(Z2, &o2(), 3, SearchLimits { max_steps: 2 }).is_err());
    }

    #[test]
    fn unit_squares_through_a_vertex() {
        let saps = enumerate_saps(Z2, &o2(), 4).unwrap();
        assert_eq!(saps.len(), 4);
        for p in &saps {
            assert!(p.contains(&o2()));
            assert_eq!(p.edge_count(), 4);
        }
        assert!(enumerate_saps(Z2, &o2(), 2).unwrap().is_empty());
        assert!(enumerate_saps(Z2, &o2(), 7).unwrap().is_empty());
        assert_eq!(enumerate_saps(Z2, &o2(), 1).unwrap(), vec![Polygon::degenerate(o2())]);
        assert!(enumerate_saps(LatticeKind::Hexagonal, &o2(), 4).unwrap().is_empty());
        assert_eq!(enumerate_saps(LatticeKind::Hexagonal, &o2(), 6).unwrap().len(), 3);
    }

    #[test]
    fn polygons_are_distinct_and_match_known_counts() {
        // polygons through a fixed vertex: N times the number up to translation
        for (n, per_translation) in [(4, 1u64), (6, 2), (8, 7), (10, 28), (12, 124)] {
            let saps = enumerate_saps(Z2, &o2(), n).unwrap();
            let distinct: BTreeSet<_> = saps.iter().collect();
            assert_eq!(distinct.len(), saps.len());
            assert_eq!(saps.len() as u64, n as u64 * per_translation);
            assert_eq!(count_saps(Z2, &o2(), n, SearchLimits::for_lattice(Z2)).unwrap(), saps.len() as u64);
        }
    }

    #[test]
    fn orientation_of_eight_step_polygons() {
        for p in enumerate_saps(Z2, &o2(), 8).unwrap() {
            let w = p.orient(&o2()).unwrap();
            assert_eq!(w.steps(), 7);
            assert!(Z2.adjacent(w.start(), w.end()));
            assert_eq!(w.close(Z2).unwrap(), p);
        }
    }

    #[test]
    fn engine_histogram_agrees_with_walk_level_matching() {
        let p = Pattern::p_prime(Z2);
        for n in [6, 8, 10] {
            let stats = pattern_stats(Z2, &o2(), n, &p, ObjectKind::Sap, SearchLimits::for_lattice(Z2)).unwrap();
            let mut hist = vec![0u64; stats.histogram.len()];
            for poly in enumerate_saps(Z2, &o2(), n).unwrap() {
                hist[occurrences(&poly.orient(&o2()).unwrap(), &p).len()] += 1;
            }
            assert_eq!(stats.histogram, hist);
        }
        for n in [4, 7] {
            let stats = pattern_stats(Z2, &o2(), n, &p, ObjectKind::Saw, SearchLimits::for_lattice(Z2)).unwrap();
            let mut hist = vec![0u64; stats.histogram.len()];
            for w in saw_walks(Z2, &o2(), n, SearchLimits::for_lattice(Z2)).unwrap() {
                hist[occurrences(&w, &p).len()] += 1;
            }
            assert_eq!(stats.histogram, hist);
        }
    }

    #[test]
    fn deficient_count_edges() {
        let p = Pattern::p_prime(Z2);
        let total = enumerate_saws(Z2, &o2(), 8).unwrap();
        assert_eq!(deficient_counts(Z2, &o2(), 8, 0, &p, ObjectKind::Saw).unwrap(), 0);
        assert_eq!(deficient_counts(Z2, &o2(), 8, 9, &p, ObjectKind::Saw).unwrap(), total);
        let stats = pattern_stats(Z2, &o2(), 8, &p, ObjectKind::Saw, SearchLimits::for_lattice(Z2)).unwrap();
        let mut prev = 0;
        for w in 0..=9 {
            let d = stats.deficient(w);
            assert!(d >= prev && d <= stats.total);
            prev = d;
        }
    }

    #[test]
    fn twelve_edge_polygons_avoiding_p_prime() {
        let p = Pattern::p_prime(Z2);
        let filtered = enumerate_saps(Z2, &o2(), 12)
            .unwrap()
            .iter()
            .filter(|poly| occurrences(&poly.orient(&o2()).unwrap(), &p).is_empty())
            .count() as u64;
        assert_eq!(deficient_counts(Z2, &o2(), 12, 1, &p, ObjectKind::Sap).unwrap(), filtered);
    }

    #[test]
    fn growth_and_multiplicativity() {
        let counts: BTreeMap<usize, u64> = (1..=8).map(|n| (n, enumerate_saws(Z2, &o2(), n).unwrap())).collect();
        let mu = growth_estimates(&counts).unwrap();
        assert!((mu[&4] - 100f64.powf(0.25)).abs() < 1e-12);
        assert!((mu[&4] - 3.162).abs() < 1e-3);
        let saps: BTreeMap<usize, u64> = [4usize, 6, 8]
            .iter()
            .map(|&n| (n, count_saps(Z2, &o2(), n, SearchLimits::for_lattice(Z2)).unwrap()))
            .collect();
        let report = check_supermultiplicativity(Z2, &counts, &saps);
        assert!(report.holds());
        assert!(report.saw_pairs_checked > 0);
        assert!(counts[&4] <= counts[&2] * counts[&2]);
        assert_eq!(saps[&4], 4);
        assert_eq!(sap_majorant(2, 4), 162.0);
        assert!(growth_estimates(&BTreeMap::from([(3, 0)])).is_err());
        assert!(growth_estimates(&BTreeMap::new()).is_err());
    }

    #[test]
    fn q_squares_close_each_occurrence() {
        let sq = Polygon::from_cycle(Z2, vec![o2(), Vertex::new(&[0, 1]), Vertex::new(&[1, 1]), Vertex::new(&[1, 0])]).unwrap();
        let w = sq.orient(&o2()).unwrap();
        let p = Pattern::p_prime(Z2);
        let occ = occurrences(&w, &p);
        assert_eq!(occ, vec![0]);
        assert_eq!(q_squares(Z2, &w, &p, &occ).unwrap(), vec![sq]);
        assert!(q_squares(Z2, &w, &p, &[1]).is_err());
    }

    #[test]
    fn polygons_in_a_box_match_filtered_lattice_polygons() {
        let g = Domain::lattice_box(Z2, &o2(), &[3, 4]).unwrap();
        for x in g.vertices() {
            let inside = polygons_in_domain(&g, x, 12).unwrap();
            let mut expected = Vec::new();
            for n in (4..=12).step_by(2) {
                for p in enumerate_saps(Z2, x, n).unwrap() {
                    if p.sites().iter().all(|v| g.contains(v)) {
                        expected.push(p);
                    }
                }
            }
            let a: BTreeSet<_> = inside.iter().collect();
            let b: BTreeSet<_> = expected.iter().collect();
            assert_eq!(inside.len(), a.len());
            assert_eq!(a, b);
        }
    }
}
