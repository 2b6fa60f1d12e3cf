//! Metropolis face-flip sampler for the loop measure.
//!
//! A step picks a minimal face uniformly, proposes the symmetric difference
//! with its boundary, rejects proposals that break the degree condition and
//! otherwise accepts with probability `min(1, lambda^do n^dL)`.

use std::collections::{BTreeMap, HashSet};

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::Serialize;

use crate::enumerate::Enumerator;
use crate::error::{Error, Result};
use crate::lattice::{Domain, LatticeKind, Vertex};
use crate::loops::{count_loops, degrees, trace_loop, LoopConfig, UnionFind};
use crate::scalar::{ModelParams, Scalar};

pub const RNG_NAME: &str = "xoshiro256++";

/// A minimal face whose boundary lies entirely in the domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Face {
    /// Boundary vertices in cyclic order (domain indices).
    pub vertices: Vec<usize>,
    /// Boundary edges, `edges[k]` joining `vertices[k]` and `vertices[k + 1]`.
    pub edges: Vec<usize>,
}

fn face_from_cycle(g: &Domain, cycle: &[Vertex]) -> Option<Face> {
    let vertices: Vec<usize> = cycle.iter().map(|v| g.index_of(v)).collect::<Option<_>>()?;
    let k = vertices.len();
    let edges = (0..k)
        .map(|i| g.edge_between(vertices[i], vertices[(i + 1) % k]))
        .collect::<Option<_>>()?;
    Some(Face { vertices, edges })
}

/// Every unit square (each axis pair on `Z^d`) or hexagon of `g`, ordered by
/// lowest corner and then axis pair.
pub fn list_faces(g: &Domain) -> Vec<Face> {
    let mut faces = Vec::new();
    for v in g.vertices() {
        match g.lattice() {
            LatticeKind::HyperCubic(d) => {
                for i in 0..d {
                    for j in i + 1..d {
                        let mut ei = vec![0; d];
                        ei[i] = 1;
                        let mut ej = vec![0; d];
                        ej[j] = 1;
                        let mut eij = ei.clone();
                        eij[j] = 1;
                        let cycle = [v.clone(), v.offset(&ei), v.offset(&eij), v.offset(&ej)];
                        faces.extend(face_from_cycle(g, &cycle));
                    }
                }
            }
            LatticeKind::Hexagonal => {
                let c = v.coords();
                if (c[0] + c[1]).rem_euclid(2) != 0 {
                    continue;
                }
                let cycle: Vec<Vertex> = [(0, 0), (0, 1), (1, 1), (2, 1), (2, 0), (1, 0)]
                    .iter()
                    .map(|&(dx, dy)| v.offset(&[dx, dy]))
                    .collect();
                faces.extend(face_from_cycle(g, &cycle));
            }
        }
    }
    faces
}

/// True when face flips are known to connect all of `Omega_G`: a hexagonal
/// domain whose faces span its cycle space.
pub fn flips_are_irreducible(g: &Domain, faces: &[Face]) -> bool {
    if g.lattice() != LatticeKind::Hexagonal {
        return false;
    }
    let mut uf = UnionFind::new(g.vertex_count());
    for &(a, b) in g.edges() {
        uf.union(a, b);
    }
    let components = (0..g.vertex_count()).filter(|&v| uf.find(v) == v).count();
    faces.len() + g.vertex_count() == g.edge_count() + components
}

/// A running chain. Single-threaded; run several with distinct seeds for
/// independent replicas.
pub struct ChainState<'a> {
    domain: &'a Domain,
    faces: Vec<Face>,
    params: ModelParams<f64>,
    seed: u64,
    rng: Xoshiro256PlusPlus,
    active: FixedBitSet,
    degree: Vec<u8>,
    edges: usize,
    loops: usize,
    steps: u64,
    accepted: u64,
    full_recount: bool,
    scratch: Vec<bool>,
}

impl<'a> ChainState<'a> {
    /// Starts from the empty configuration.
    pub fn new(domain: &'a Domain, params: ModelParams<f64>, seed: u64) -> Result<Self> {
        let faces = list_faces(domain);
        if faces.is_empty() {
            return Err(Error::InvalidInput("domain has no complete face".into()));
        }
        Ok(ChainState {
            domain,
            faces,
            params,
            seed,
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
            active: FixedBitSet::with_capacity(domain.edge_count()),
            degree: vec![0; domain.vertex_count()],
            edges: 0,
            loops: 0,
            steps: 0,
            accepted: 0,
            full_recount: false,
            scratch: vec![false; domain.vertex_count()],
        })
    }

    /// Recount every loop after each flip instead of only those through the
    /// flipped face.
    pub fn with_full_recount(mut self, on: bool) -> Self {
        self.full_recount = on;
        self
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn loop_count(&self) -> usize {
        self.loops
    }

    pub fn active(&self) -> &FixedBitSet {
        &self.active
    }

    pub fn config(&self) -> LoopConfig<'a> {
        LoopConfig::from_trusted(self.domain, self.active.clone())
    }

    /// Length of the loop through vertex index `v`, 0 when isolated.
    pub fn loop_length_at(&self, v: usize) -> usize {
        if self.degree[v] == 0 {
            0
        } else {
            trace_loop(self.domain, &self.active, v).len()
        }
    }

    fn loops_touching(&mut self, verts: &[usize]) -> usize {
        let mut count = 0;
        let mut marked = Vec::new();
        for &v in verts {
            if self.degree[v] == 0 || self.scratch[v] {
                continue;
            }
            count += 1;
            for u in trace_loop(self.domain, &self.active, v) {
                self.scratch[u] = true;
                marked.push(u);
            }
        }
        for u in marked {
            self.scratch[u] = false;
        }
        count
    }

    fn toggle(&mut self, face: usize) {
        for k in 0..self.faces[face].edges.len() {
            let e = self.faces[face].edges[k];
            let (a, b) = self.domain.edges()[e];
            if self.active[e] {
                self.active.set(e, false);
                self.degree[a] -= 1;
                self.degree[b] -= 1;
                self.edges -= 1;
            } else {
                self.active.insert(e);
                self.degree[a] += 1;
                self.degree[b] += 1;
                self.edges += 1;
            }
        }
    }

    fn loops_in_scope(&mut self, face: usize) -> usize {
        if self.full_recount {
            count_loops(self.domain, &self.active)
        } else {
            let verts = self.faces[face].vertices.clone();
            self.loops_touching(&verts)
        }
    }

    /// One Metropolis step. Returns whether the proposal was accepted.
    pub fn step(&mut self) -> bool {
        self.steps += 1;
        let f = self.rng.random_range(0..self.faces.len());
        let face = &self.faces[f];
        let k = face.vertices.len();
        // each boundary vertex meets exactly two boundary edges
        let valid = (0..k).all(|i| {
            let v = face.vertices[i];
            let before = face.edges[(i + k - 1) % k];
            let after = face.edges[i];
            let mut d = self.degree[v] as i32;
            d += if self.active[before] { -1 } else { 1 };
            d += if self.active[after] { -1 } else { 1 };
            d == 0 || d == 2
        });
        if !valid {
            return false;
        }
        let old_edges = self.edges as i32;
        let old_local = self.loops_in_scope(f);
        self.toggle(f);
        let new_local = self.loops_in_scope(f);
        let d_edges = self.edges as i32 - old_edges;
        let d_loops = new_local as i32 - old_local as i32;
        let ratio = self.params.lambda.powi(d_edges) * self.params.n.powi(d_loops);
        let accept = ratio >= 1.0 || self.rng.random::<f64>() < ratio;
        if accept {
            self.loops = (self.loops as i32 + d_loops) as usize;
            self.accepted += 1;
        } else {
            self.toggle(f);
        }
        debug_assert!(self.degree.iter().all(|&d| d == 0 || d == 2));
        debug_assert_eq!(self.loops, count_loops(self.domain, &self.active));
        accept
    }

    /// `|faces|` steps.
    pub fn sweep(&mut self) {
        for _ in 0..self.faces.len() {
            self.step();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McOptions {
    pub sweeps: u64,
    pub burn_in: u64,
    pub seed: u64,
    pub marked: Vec<Vertex>,
    pub full_recount: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkedHistogram {
    pub vertex: Vertex,
    /// Samples by loop length; 0 means isolated.
    pub counts: BTreeMap<usize, u64>,
}

impl MarkedHistogram {
    pub fn law(&self) -> BTreeMap<usize, f64> {
        let total: u64 = self.counts.values().sum();
        self.counts
            .iter()
            .map(|(&l, &c)| (l, c as f64 / total as f64))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub lattice: String,
    pub lambda: f64,
    pub n: f64,
    pub seed: u64,
    pub rng: &'static str,
    pub sweeps: u64,
    pub burn_in: u64,
    pub faces: usize,
    pub steps: u64,
    pub acceptance_rate: f64,
    pub mean_edges: f64,
    pub mean_loops: f64,
    pub histograms: Vec<MarkedHistogram>,
    /// "irreducible" on hexagonal domains whose faces span the cycle space,
    /// "heuristic" otherwise.
    pub ergodicity: &'static str,
    pub full_recount: bool,
}

/// Runs `burn_in` sweeps, then `sweeps` more, recording observables after
/// every step.
pub fn run(g: &Domain, params: &ModelParams<f64>, opts: &McOptions) -> Result<McReport> {
    if opts.sweeps == 0 {
        return Err(Error::InvalidInput("sweeps must be >= 1".into()));
    }
    let marked: Vec<usize> = opts
        .marked
        .iter()
        .map(|x| g.index_of(x).ok_or_else(|| Error::NotInDomain(x.to_string())))
        .collect::<Result<_>>()?;
    let mut chain = ChainState::new(g, params.clone(), opts.seed)?.with_full_recount(opts.full_recount);
    for _ in 0..opts.burn_in {
        chain.sweep();
    }
    let burn_steps = chain.steps;
    let burn_accepted = chain.accepted;
    let mut counts = vec![BTreeMap::new(); marked.len()];
    let (mut sum_edges, mut sum_loops) = (0u64, 0u64);
    // observed after every step: with no rejections the chain has period 2,
    // and sampling only at sweep ends would see a single parity class
    let steps = opts.sweeps * chain.faces.len() as u64;
    for _ in 0..steps {
        chain.step();
        sum_edges += chain.edges as u64;
        sum_loops += chain.loops as u64;
        for (slot, &v) in counts.iter_mut().zip(&marked) {
            *slot.entry(chain.loop_length_at(v)).or_insert(0u64) += 1;
        }
    }
    debug_assert_eq!(steps, chain.steps - burn_steps);
    let ergodicity = if flips_are_irreducible(g, chain.faces()) {
        "irreducible"
    } else {
        "heuristic"
    };
    Ok(McReport {
        lattice: g.lattice().name(),
        lambda: params.lambda,
        n: params.n,
        seed: opts.seed,
        rng: RNG_NAME,
        sweeps: opts.sweeps,
        burn_in: opts.burn_in,
        faces: chain.faces.len(),
        steps,
        acceptance_rate: (chain.accepted - burn_accepted) as f64 / steps as f64,
        mean_edges: sum_edges as f64 / steps as f64,
        mean_loops: sum_loops as f64 / steps as f64,
        histograms: opts
            .marked
            .iter()
            .cloned()
            .zip(counts)
            .map(|(vertex, counts)| MarkedHistogram { vertex, counts })
            .collect(),
        ergodicity,
        full_recount: opts.full_recount,
    })
}

/// `(1/2) sum |p(l) - q(l)|` over the union of supports.
pub fn tv_distance(p: &BTreeMap<usize, f64>, q: &BTreeMap<usize, f64>) -> f64 {
    let keys: std::collections::BTreeSet<usize> = p.keys().chain(q.keys()).copied().collect();
    0.5 * keys
        .iter()
        .map(|k| (p.get(k).copied().unwrap_or(0.0) - q.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TvRun {
    pub seed: u64,
    pub sweeps: u64,
    pub tv: f64,
    pub acceptance_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TvReport {
    pub vertex: Vertex,
    pub exact: BTreeMap<usize, f64>,
    pub runs: Vec<TvRun>,
}

/// Compares the sampled loop-length law at `x` with the enumerated one,
/// once per seed. Chains run in parallel and are reported in seed order.
pub fn tv_against_exact(
    g: &Domain,
    x: &Vertex,
    params: &ModelParams<f64>,
    sweeps: u64,
    burn_in: u64,
    seeds: &[u64],
) -> Result<TvReport> {
    use rayon::prelude::*;
    let exact = Enumerator::default().loop_length_distribution(g, x, params)?.length_law;
    let runs = seeds
        .par_iter()
        .map(|&seed| {
            let opts = McOptions {
                sweeps,
                burn_in,
                seed,
                marked: vec![x.clone()],
                full_recount: false,
            };
            let report = run(g, params, &opts)?;
            Ok(TvRun {
                seed,
                sweeps,
                tv: tv_distance(&report.histograms[0].law(), &exact),
                acceptance_rate: report.acceptance_rate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TvReport {
        vertex: x.clone(),
        exact,
        runs,
    })
}

/// The configurations of `g` visited by a chain, against all enumerated ones.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coverage {
    pub enumerated: u64,
    pub visited: u64,
}

pub fn coverage(g: &Domain, params: &ModelParams<f64>, steps: u64, seed: u64) -> Result<Coverage> {
    let enumerated = Enumerator::default().for_each_config(g, |_| {})?;
    let mut chain = ChainState::new(g, params.clone(), seed)?;
    let mut seen: HashSet<FixedBitSet> = HashSet::new();
    seen.insert(chain.active.clone());
    for _ in 0..steps {
        if chain.step() {
            seen.insert(chain.active.clone());
        }
    }
    Ok(Coverage {
        enumerated,
        visited: seen.len() as u64,
    })
}

/// The exact one-step kernel over all configurations, in enumeration order.
#[derive(Debug, Clone)]
pub struct TransitionMatrix<T> {
    pub configs: Vec<FixedBitSet>,
    pub weights: Vec<T>,
    pub rows: Vec<Vec<T>>,
}

pub fn transition_matrix<T: Scalar>(g: &Domain, p: &ModelParams<T>) -> Result<TransitionMatrix<T>> {
    let faces = list_faces(g);
    if faces.is_empty() {
        return Err(Error::InvalidInput("domain has no complete face".into()));
    }
    let configs = Enumerator::default().configs(g)?;
    let bits: Vec<FixedBitSet> = configs.iter().map(|c| c.active().clone()).collect();
    let index: std::collections::HashMap<&FixedBitSet, usize> =
        bits.iter().enumerate().map(|(i, b)| (b, i)).collect();
    let weights: Vec<T> = configs.iter().map(|c| c.weight(p)).collect();
    let pick = T::one() / T::from_u64(faces.len() as u64);
    let mut rows = vec![vec![T::zero(); bits.len()]; bits.len()];
    for (i, from) in bits.iter().enumerate() {
        let mut stay = T::one();
        for face in &faces {
            let mut to = from.clone();
            for &e in &face.edges {
                to.toggle(e);
            }
            if !degrees(g, &to).iter().all(|&d| d == 0 || d == 2) {
                continue;
            }
            let j = index[&to];
            let ratio = weights[j].clone() / weights[i].clone();
            let accept = if ratio >= T::one() { T::one() } else { ratio };
            let rate = pick.clone() * accept;
            stay = stay - rate.clone();
            rows[i][j] = rows[i][j].clone() + rate;
        }
        rows[i][i] = rows[i][i].clone() + stay;
    }
    Ok(TransitionMatrix {
        configs: bits,
        weights,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;
    use num_rational::BigRational;

    const Z2: LatticeKind = LatticeKind::HyperCubic(2);

    fn square(sides: &[usize], lattice: LatticeKind) -> Domain {
        Domain::lattice_box(lattice, &Vertex::origin(2), sides).unwrap()
    }

    #[test]
    fn face_counts() {
        assert_eq!(list_faces(&square(&[2, 2], Z2)).len(), 1);
        assert_eq!(list_faces(&square(&[3, 3], Z2)).len(), 4);
        let holed = square(&[3, 3], Z2).minus([&Vertex::new(&[1, 1])]).unwrap();
        assert!(list_faces(&holed).is_empty());
        let z3 = Domain::lattice_box(LatticeKind::HyperCubic(3), &Vertex::origin(3), &[2, 2, 2]).unwrap();
        assert_eq!(list_faces(&z3).len(), 6);
        let hex = square(&[6, 4], LatticeKind::Hexagonal);
        assert_eq!(hex.edge_count(), 29);
        let faces = list_faces(&hex);
        assert_eq!(faces.len(), 6);
        assert!(flips_are_irreducible(&hex, &faces));
        assert!(!flips_are_irreducible(&square(&[3, 3], Z2), &list_faces(&square(&[3, 3], Z2))));
    }

    #[test]
    fn first_flip_at_unit_weight_is_accepted() {
        let g = square(&[2, 2], Z2);
        let mut chain = ChainState::new(&g, ModelParams::new(1.0, 1.0).unwrap(), 7).unwrap();
        assert!(chain.step());
        assert_eq!((chain.edge_count(), chain.loop_count()), (4, 1));
    }

    #[test]
    fn zero_loop_weight_freezes_the_chain() {
        let g = square(&[4, 4], Z2);
        let opts = McOptions {
            sweeps: 200,
            burn_in: 10,
            seed: 3,
            marked: vec![Vertex::new(&[1, 1])],
            full_recount: false,
        };
        let report = run(&g, &ModelParams::new(0.8, 0.0).unwrap(), &opts).unwrap();
        assert_eq!(report.acceptance_rate, 0.0);
        assert_eq!(report.mean_edges, 0.0);
        assert_eq!(report.histograms[0].counts, BTreeMap::from([(0, 200 * 9)]));
        assert_eq!(report.ergodicity, "heuristic");
    }

    #[test]
    fn two_state_law() {
        let g = square(&[2, 2], Z2);
        let (lambda, n) = (0.7, 1.5);
        let on = n * f64::powi(lambda, 4);
        let opts = McOptions {
            sweeps: 200_000,
            burn_in: 100,
            seed: 11,
            marked: vec![Vertex::origin(2)],
            full_recount: false,
        };
        let report = run(&g, &ModelParams::new(lambda, n).unwrap(), &opts).unwrap();
        let law = report.histograms[0].law();
        assert!((law[&4] - on / (1.0 + on)).abs() < 0.01);
    }

    #[test]
    fn detailed_balance_is_exact() {
        for (sides, lattice) in [(vec![2, 2], Z2), (vec![3, 3], Z2), (vec![4, 3], LatticeKind::Hexagonal)] {
            let g = square(&sides, lattice);
            let p = ModelParams::new(rational(1, 2), rational(3, 1)).unwrap();
            let m = transition_matrix::<BigRational>(&g, &p).unwrap();
            let z: BigRational = m.weights.iter().cloned().sum();
            let pi: Vec<BigRational> = m.weights.iter().map(|w| w / &z).collect();
            for i in 0..pi.len() {
                let row_sum: BigRational = m.rows[i].iter().cloned().sum();
                assert_eq!(row_sum, rational(1, 1));
                for j in 0..pi.len() {
                    assert_eq!(&pi[i] * &m.rows[i][j], &pi[j] * &m.rows[j][i]);
                }
            }
            for j in 0..pi.len() {
                let flow: BigRational = (0..pi.len()).map(|i| &pi[i] * &m.rows[i][j]).sum();
                assert_eq!(flow, pi[j]);
            }
        }
        let g = square(&[2, 2], Z2);
        let p = ModelParams::new(rational(1, 2), rational(2, 1)).unwrap();
        let m = transition_matrix::<BigRational>(&g, &p).unwrap();
        assert_eq!(m.configs.len(), 2);
        assert_eq!(m.rows[0][1], rational(1, 8));
        assert_eq!(m.rows[1][0], rational(1, 1));
    }

    #[test]
    fn local_and_full_recount_agree() {
        let g = square(&[6, 6], LatticeKind::Hexagonal);
        let p = ModelParams::new(0.9, 1.3).unwrap();
        let mut a = ChainState::new(&g, p.clone(), 5).unwrap();
        let mut b = ChainState::new(&g, p, 5).unwrap().with_full_recount(true);
        for _ in 0..5000 {
            assert_eq!(a.step(), b.step());
            assert_eq!(a.loop_count(), b.loop_count());
            assert_eq!(a.loop_count(), a.config().loop_count());
        }
    }

    #[test]
    fn reproducible_and_seed_sensitive() {
        let g = square(&[6, 4], LatticeKind::Hexagonal);
        let p = ModelParams::new(1.0, 1.0).unwrap();
        let opts = |seed| McOptions {
            sweeps: 2000,
            burn_in: 10,
            seed,
            marked: vec![Vertex::new(&[2, 1])],
            full_recount: false,
        };
        let a = run(&g, &p, &opts(1)).unwrap();
        let b = run(&g, &p, &opts(1)).unwrap();
        let c = run(&g, &p, &opts(2)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.histograms, c.histograms);
        assert_eq!(a.rng, "xoshiro256++");
        assert_eq!(a.ergodicity, "irreducible");
    }

    #[test]
    fn chain_visits_every_hex_configuration() {
        let g = square(&[6, 4], LatticeKind::Hexagonal);
        let cov = coverage(&g, &ModelParams::new(1.0, 1.0).unwrap(), 200_000, 9).unwrap();
        assert_eq!(cov.visited, cov.enumerated);
    }

    #[test]
    fn tv_of_identical_laws_is_zero() {
        let p = BTreeMap::from([(0, 0.5), (6, 0.5)]);
        assert_eq!(tv_distance(&p, &p), 0.0);
        let q = BTreeMap::from([(0, 1.0)]);
        assert_eq!(tv_distance(&p, &q), 0.5);
    }
}
