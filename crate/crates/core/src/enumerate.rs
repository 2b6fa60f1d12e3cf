//! Exact enumeration of all loop configurations of a small domain.
//!
//! Configurations are generated by a depth-first search over the edges in
//! their fixed order. A branch dies as soon as a vertex would exceed degree
//! 2, or when a vertex has seen its last incident edge with degree 1.
//!
//! Rather than summing weights per configuration, the search tallies how
//! many configurations have each `(edges, loops)` pair. The resulting
//! [`LoopPolynomial`] is exact and can be evaluated in either number mode
//! in a fixed term order.

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Domain, LatticeKind, Vertex};
use crate::loops::{count_loops, envelope, trace_loop, LoopConfig};
use crate::saw::{occurrences, occurrence_threshold, Pattern, Polygon};
use crate::scalar::{face_factor, ModelParams, Number, Scalar};

pub const DEFAULT_EDGE_CAP: usize = 40;

/// Configuration counts keyed by `(edge count, loop count)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoopPolynomial {
    terms: BTreeMap<(u32, u32), u64>,
}

impl LoopPolynomial {
    /// The polynomial `1` of the empty domain.
    pub fn one() -> Self {
        LoopPolynomial {
            terms: BTreeMap::from([((0, 0), 1)]),
        }
    }

    fn add(&mut self, edges: u32, loops: u32) {
        *self.terms.entry((edges, loops)).or_insert(0) += 1;
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32), u64> {
        &self.terms
    }

    /// Number of configurations counted.
    pub fn config_count(&self) -> u64 {
        self.terms.values().sum()
    }

    pub fn evaluate<T: Scalar>(&self, p: &ModelParams<T>) -> T {
        self.terms
            .iter()
            .fold(T::zero(), |acc, (&(o, l), &c)| acc + T::from_u64(c) * p.weight(o, l))
    }
}

/// Exact law of `|P_x|` together with the partition function.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationResult<T> {
    pub z: T,
    pub config_count: u64,
    /// Loop length (0 when `x` is isolated) to probability.
    pub length_law: BTreeMap<usize, T>,
}

impl<T: Scalar> EnumerationResult<T> {
    pub fn to_report(&self) -> LawReport {
        LawReport {
            z: self.z.clone().into_number(),
            config_count: self.config_count,
            length_law: self
                .length_law
                .iter()
                .map(|(&l, p)| (l, p.clone().into_number()))
                .collect(),
        }
    }
}

/// Serializable form of an [`EnumerationResult`].
#[derive(Debug, Clone, Serialize)]
pub struct LawReport {
    #[serde(rename = "Z")]
    pub z: Number,
    pub config_count: u64,
    pub length_law: Vec<(usize, Number)>,
}

/// A lower estimate of the supremum of `E[exp(delta |P_x|)]` over a finite
/// family of domains and all of their vertices.
#[derive(Debug, Clone, Serialize)]
pub struct ExpMomentEstimate {
    pub delta: f64,
    pub value: f64,
    pub family_spec: String,
    pub argmax_box: Vec<usize>,
    pub argmax_vertex: Vertex,
}

/// Result of checking the loop-removal bound for one polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Check<T> {
    /// Occurrences of the pattern along the polygon's orientation.
    pub occurrences: usize,
    /// `ceil(a N)`.
    pub required: u64,
    /// `Z(G \ P) / Z(G)`.
    pub ratio: T,
    /// `(1 + lambda^f n)^(-ceil(a N))`.
    pub bound: T,
    /// `(1 + lambda^f n)^(-m)` with `m` the occurrence count.
    pub occurrence_bound: T,
}

impl<T: Scalar> Lemma1Check<T> {
    pub fn holds(&self) -> bool {
        self.ratio.le_tol(&self.bound) && self.ratio.le_tol(&self.occurrence_bound)
    }
}

/// Enumeration entry point with an explicit edge cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Enumerator {
    pub edge_cap: usize,
}

impl Default for Enumerator {
    fn default() -> Self {
        Enumerator {
            edge_cap: DEFAULT_EDGE_CAP,
        }
    }
}

impl Enumerator {
    pub fn with_cap(edge_cap: usize) -> Self {
        Enumerator { edge_cap }
    }

    fn check_cap(&self, g: &Domain) -> Result<()> {
        if g.edge_count() > self.edge_cap {
            return Err(Error::SizeCap {
                what: "domain edges",
                actual: g.edge_count(),
                cap: self.edge_cap,
            });
        }
        Ok(())
    }

    /// Calls `visit` once per valid configuration, empty configuration first.
    /// Returns the number of configurations.
    pub fn for_each_config<F>(&self, g: &Domain, mut visit: F) -> Result<u64>
    where
        F: FnMut(&FixedBitSet),
    {
        self.check_cap(g)?;
        let mut last_edge = vec![usize::MAX; g.vertex_count()];
        for (e, &(a, b)) in g.edges().iter().enumerate() {
            last_edge[a] = e;
            last_edge[b] = e;
        }
        let mut state = Search {
            g,
            last_edge,
            degree: vec![0; g.vertex_count()],
            active: FixedBitSet::with_capacity(g.edge_count()),
            visited: 0,
        };
        state.run(0, &mut visit);
        Ok(state.visited)
    }

    pub fn configs<'a>(&self, g: &'a Domain) -> Result<Vec<LoopConfig<'a>>> {
        let mut out = Vec::new();
        self.for_each_config(g, |bits| out.push(LoopConfig::from_trusted(g, bits.clone())))?;
        Ok(out)
    }

    /// Configuration counts of `g` by edge and loop number. The empty domain
    /// gives the polynomial `1`.
    pub fn polynomial(&self, g: &Domain) -> Result<LoopPolynomial> {
        let mut poly = LoopPolynomial::default();
        self.for_each_config(g, |bits| {
            poly.add(bits.count_ones(..) as u32, count_loops(g, bits) as u32);
        })?;
        Ok(poly)
    }

    pub fn partition_function<T: Scalar>(&self, g: &Domain, p: &ModelParams<T>) -> Result<T> {
        Ok(self.polynomial(g)?.evaluate(p))
    }

    /// Polynomials split by the length of the loop through `x`.
    pub fn length_polynomials(&self, g: &Domain, x: &Vertex) -> Result<BTreeMap<usize, LoopPolynomial>> {
        let xi = g
            .index_of(x)
            .ok_or_else(|| Error::NotInDomain(x.to_string()))?;
        let mut by_len: BTreeMap<usize, LoopPolynomial> = BTreeMap::new();
        self.for_each_config(g, |bits| {
            let cycle = trace_loop(g, bits, xi);
            let len = if cycle.len() == 1 { 0 } else { cycle.len() };
            by_len
                .entry(len)
                .or_default()
                .add(bits.count_ones(..) as u32, count_loops(g, bits) as u32);
        })?;
        Ok(by_len)
    }

    /// Polynomials split by the loop through `x` itself.
    pub fn component_polynomials(&self, g: &Domain, x: &Vertex) -> Result<BTreeMap<Polygon, LoopPolynomial>> {
        let xi = g
            .index_of(x)
            .ok_or_else(|| Error::NotInDomain(x.to_string()))?;
        let mut by_loop: BTreeMap<Polygon, LoopPolynomial> = BTreeMap::new();
        self.for_each_config(g, |bits| {
            let cycle = trace_loop(g, bits, xi);
            let poly = Polygon::canonical(cycle.into_iter().map(|i| g.vertex(i).clone()).collect());
            by_loop
                .entry(poly)
                .or_default()
                .add(bits.count_ones(..) as u32, count_loops(g, bits) as u32);
        })?;
        Ok(by_loop)
    }

    pub fn loop_length_distribution<T: Scalar>(
        &self,
        g: &Domain,
        x: &Vertex,
        p: &ModelParams<T>,
    ) -> Result<EnumerationResult<T>> {
        let by_len = self.length_polynomials(g, x)?;
        let weights: BTreeMap<usize, T> = by_len
            .iter()
            .map(|(&l, poly)| (l, poly.evaluate(p)))
            .filter(|(_, w)| !w.is_zero())
            .collect();
        let z = weights.values().fold(T::zero(), |acc, w| acc + w.clone());
        let config_count = by_len.values().map(LoopPolynomial::config_count).sum();
        let length_law = weights
            .into_iter()
            .map(|(l, w)| (l, w / z.clone()))
            .collect();
        Ok(EnumerationResult {
            z,
            config_count,
            length_law,
        })
    }

    /// `P(P_x = P)` two ways: summing configurations whose loop through `x`
    /// is `P`, and `n lambda^|P| Z(G \ P) / Z(G)`.
    pub fn prob_component_equals<T: Scalar>(
        &self,
        g: &Domain,
        x: &Vertex,
        poly: &Polygon,
        p: &ModelParams<T>,
    ) -> Result<(T, T)> {
        check_polygon_through(g, x, poly)?;
        let by_loop = self.component_polynomials(g, x)?;
        let z = by_loop
            .values()
            .fold(T::zero(), |acc, q| acc + q.evaluate(p));
        let direct = by_loop
            .get(poly)
            .map(|q| q.evaluate(p))
            .unwrap_or_else(T::zero)
            / z.clone();
        let rest = self.partition_function(&g.minus(poly.sites())?, p)?;
        let formula = p.n.clone() * p.lambda.powu(poly.edge_count() as u32) * rest / z;
        Ok((direct, formula))
    }

    /// `E[exp(delta |P_x|)]`, computed from the exact law.
    pub fn exp_moment<T: Scalar>(&self, g: &Domain, x: &Vertex, delta: f64, p: &ModelParams<T>) -> Result<f64> {
        if delta.is_nan() || delta <= 0.0 {
            return Err(Error::InvalidInput(format!("delta must be positive, got {delta}")));
        }
        let law = self.loop_length_distribution(g, x, p)?;
        Ok(law
            .length_law
            .iter()
            .map(|(&l, prob)| prob.to_f64() * (delta * l as f64).exp())
            .sum())
    }

    /// Maximum of [`Enumerator::exp_moment`] over the boxes in `family`
    /// (corner at the origin) and all of their vertices.
    pub fn sup_exp_moment<T: Scalar>(
        &self,
        lattice: LatticeKind,
        family: &[Vec<usize>],
        delta: f64,
        p: &ModelParams<T>,
    ) -> Result<ExpMomentEstimate> {
        if family.is_empty() {
            return Err(Error::InvalidInput("empty domain family".into()));
        }
        let origin = Vertex::origin(lattice.dim());
        let mut best: Option<(f64, Vec<usize>, Vertex)> = None;
        for sides in family {
            let g = Domain::lattice_box(lattice, &origin, sides)?;
            for x in g.vertices() {
                let value = self.exp_moment(&g, x, delta, p)?;
                if best.as_ref().is_none_or(|(b, _, _)| value > *b) {
                    best = Some((value, sides.clone(), x.clone()));
                }
            }
        }
        let (value, argmax_box, argmax_vertex) = best.unwrap();
        let boxes: Vec<String> = family
            .iter()
            .map(|s| s.iter().map(|n| n.to_string()).collect::<Vec<_>>().join("x"))
            .collect();
        Ok(ExpMomentEstimate {
            delta,
            value,
            family_spec: format!("{} boxes [{}], all vertices", lattice.name(), boxes.join(", ")),
            argmax_box,
            argmax_vertex,
        })
    }

    /// `(Z(G), Z(G \ P) Z(U(P)))`; the first is never smaller.
    pub fn verify_factorization<T: Scalar>(&self, g: &Domain, poly: &Polygon, p: &ModelParams<T>) -> Result<(T, T)> {
        let env = envelope(g, poly)?;
        let lhs = self.partition_function(g, p)?;
        let rest = self.partition_function(&g.minus(poly.sites())?, p)?;
        let rhs = rest * self.partition_function(&env, p)?;
        Ok((lhs, rhs))
    }

    /// Checks `Z(G \ P)/Z(G) <= (1 + lambda^f n)^(-ceil(aN))` for a polygon
    /// whose orientation from `x` carries at least `ceil(aN)` occurrences of
    /// the closing pattern (`f` is the face length: 4 on `Z^d`, 6 on the
    /// hexagonal lattice).
    pub fn verify_lemma1<T: Scalar>(
        &self,
        g: &Domain,
        x: &Vertex,
        poly: &Polygon,
        p: &ModelParams<T>,
        a: f64,
    ) -> Result<Lemma1Check<T>> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidInput(format!("a must lie in (0, 1), got {a}")));
        }
        check_polygon_through(g, x, poly)?;
        let pattern = Pattern::p_prime(g.lattice());
        let m = occurrences(&poly.orient(x)?, &pattern).len();
        let required = occurrence_threshold(a, poly.steps());
        if (m as u64) < required {
            return Err(Error::OccurrencePrecondition {
                found: m,
                required: required as usize,
            });
        }
        let z = self.partition_function(g, p)?;
        let rest = self.partition_function(&g.minus(poly.sites())?, p)?;
        let ratio = rest / z;
        let face = face_factor(p, pattern.sites().len() as u32);
        let bound = T::one() / face.powu(required as u32);
        let occurrence_bound = T::one() / face.powu(m as u32);
        Ok(Lemma1Check {
            occurrences: m,
            required,
            ratio,
            bound,
            occurrence_bound,
        })
    }
}

fn check_polygon_through(g: &Domain, x: &Vertex, poly: &Polygon) -> Result<()> {
    if poly.is_degenerate() || !poly.contains(x) {
        return Err(Error::InvalidPolygon(format!("not a polygon through {x}")));
    }
    for (a, b) in poly.edges() {
        if g.edge_of(&a, &b).is_none() {
            return Err(Error::NotContained(format!("polygon edge {a}-{b}")));
        }
    }
    Ok(())
}

struct Search<'g> {
    g: &'g Domain,
    last_edge: Vec<usize>,
    degree: Vec<u8>,
    active: FixedBitSet,
    visited: u64,
}

impl Search<'_> {
    #[inline]
    fn settled(&self, v: usize, e: usize) -> bool {
        self.last_edge[v] != e || self.degree[v] != 1
    }

    fn run<F: FnMut(&FixedBitSet)>(&mut self, e: usize, visit: &mut F) {
        if e == self.g.edge_count() {
            self.visited += 1;
            visit(&self.active);
            return;
        }
        let (a, b) = self.g.edges()[e];
        if self.settled(a, e) && self.settled(b, e) {
            self.run(e + 1, visit);
        }
        if self.degree[a] < 2 && self.degree[b] < 2 {
            self.degree[a] += 1;
            self.degree[b] += 1;
            if self.settled(a, e) && self.settled(b, e) {
                self.active.insert(e);
                self.run(e + 1, visit);
                self.active.set(e, false);
            }
            self.degree[a] -= 1;
            self.degree[b] -= 1;
        }
    }
}

pub fn enumerate_configs(g: &Domain) -> Result<Vec<LoopConfig<'_>>> {
    Enumerator::default().configs(g)
}

pub fn partition_function<T: Scalar>(g: &Domain, p: &ModelParams<T>) -> Result<T> {
    Enumerator::default().partition_function(g, p)
}

pub fn loop_length_distribution<T: Scalar>(g: &Domain, x: &Vertex, p: &ModelParams<T>) -> Result<EnumerationResult<T>> {
    Enumerator::default().loop_length_distribution(g, x, p)
}

pub fn prob_component_equals<T: Scalar>(g: &Domain, x: &Vertex, poly: &Polygon, p: &ModelParams<T>) -> Result<(T, T)> {
    Enumerator::default().prob_component_equals(g, x, poly, p)
}

pub fn exp_moment<T: Scalar>(g: &Domain, x: &Vertex, delta: f64, p: &ModelParams<T>) -> Result<f64> {
    Enumerator::default().exp_moment(g, x, delta, p)
}

pub fn sup_exp_moment<T: Scalar>(
    lattice: LatticeKind,
    family: &[Vec<usize>],
    delta: f64,
    p: &ModelParams<T>,
) -> Result<ExpMomentEstimate> {
    Enumerator::default().sup_exp_moment(lattice, family, delta, p)
}

pub fn verify_factorization<T: Scalar>(g: &Domain, poly: &Polygon, p: &ModelParams<T>) -> Result<(T, T)> {
    Enumerator::default().verify_factorization(g, poly, p)
}

pub fn verify_lemma1<T: Scalar>(
    g: &Domain,
    x: &Vertex,
    poly: &Polygon,
    p: &ModelParams<T>,
    a: f64,
) -> Result<Lemma1Check<T>> {
    Enumerator::default().verify_lemma1(g, x, poly, p, a)
}
