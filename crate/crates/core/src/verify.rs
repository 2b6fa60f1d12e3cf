//! Exhaustive check suites over small domains. Each suite returns a report
//! with the number of checks run, the violations found and the first
//! counterexample.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

use crate::enumerate::{Enumerator, LoopPolynomial};
use crate::error::{Error, Result};
use crate::lattice::{Domain, LatticeKind, Vertex};
use crate::loops::envelope;
use crate::saw::{
    enumerate_saps_with, occurrences, polygons_in_domain, q_squares, Pattern, Polygon, SearchLimits,
};
use crate::scalar::{face_factor, ModelParams, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: u64,
    pub violations: u64,
    pub first_counterexample: Option<Value>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            checks: 0,
            violations: 0,
            first_counterexample: None,
        }
    }

    fn record(&mut self, ok: bool, example: impl FnOnce() -> Value) {
        self.checks += 1;
        if !ok {
            self.violations += 1;
            if self.first_counterexample.is_none() {
                self.first_counterexample = Some(example());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn num<T: Scalar>(v: &T) -> Value {
    serde_json::to_value(v.clone().into_number()).unwrap_or(Value::Null)
}

fn sites(p: &Polygon) -> Value {
    json!(p.sites().iter().map(|v| v.to_string()).collect::<Vec<_>>())
}

/// Polynomials of `G \ P`, memoized per polygon.
struct Removals<'g> {
    g: &'g Domain,
    enumerator: Enumerator,
    memo: BTreeMap<Polygon, LoopPolynomial>,
}

impl<'g> Removals<'g> {
    fn new(g: &'g Domain, enumerator: Enumerator) -> Self {
        Removals {
            g,
            enumerator,
            memo: BTreeMap::new(),
        }
    }

    fn get(&mut self, p: &Polygon) -> Result<&LoopPolynomial> {
        if !self.memo.contains_key(p) {
            let rest = self.g.minus(p.sites())?;
            let poly = self.enumerator.polynomial(&rest)?;
            self.memo.insert(p.clone(), poly);
        }
        Ok(&self.memo[p])
    }
}

fn face_len(lattice: LatticeKind) -> u32 {
    Pattern::p_prime(lattice).sites().len() as u32
}

/// For every `x` and every polygon `P` through `x` with at most `max_len`
/// edges: `P(P_x = P)` by direct summation equals `n lambda^|P| Z(G\P)/Z(G)`.
pub fn starting_point<T: Scalar>(
    g: &Domain,
    p: &ModelParams<T>,
    max_len: usize,
    enumerator: Enumerator,
) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("starting-point");
    let mut removals = Removals::new(g, enumerator);
    for x in g.vertices() {
        let by_loop = enumerator.component_polynomials(g, x)?;
        let z = by_loop.values().fold(T::zero(), |acc, q| acc + q.evaluate(p));
        for poly in polygons_in_domain(g, x, max_len)? {
            let direct = by_loop
                .get(&poly)
                .map(|q| q.evaluate(p))
                .unwrap_or_else(T::zero)
                / z.clone();
            let rest = removals.get(&poly)?.evaluate(p);
            let formula = p.n.clone() * p.lambda.powu(poly.edge_count() as u32) * rest / z.clone();
            report.record(direct.approx_eq(&formula), || {
                json!({"x": x.to_string(), "polygon": sites(&poly),
                       "direct": num(&direct), "formula": num(&formula)})
            });
        }
    }
    Ok(report)
}

/// Distinct polygons of `g` with at most `max_len` edges.
fn all_polygons(g: &Domain, max_len: usize) -> Result<Vec<Polygon>> {
    let mut all = std::collections::BTreeSet::new();
    for x in g.vertices() {
        all.extend(polygons_in_domain(g, x, max_len)?);
    }
    Ok(all.into_iter().collect())
}

/// `Z(G) >= Z(G\P) Z(U(P))` for every polygon of `g` with at most `max_len`
/// edges.
pub fn factorization<T: Scalar>(
    g: &Domain,
    p: &ModelParams<T>,
    max_len: usize,
    enumerator: Enumerator,
) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("factorization");
    let z = enumerator.partition_function(g, p)?;
    let mut removals = Removals::new(g, enumerator);
    for poly in all_polygons(g, max_len)? {
        let env = envelope(g, &poly)?;
        let rhs = removals.get(&poly)?.evaluate(p) * enumerator.partition_function(&env, p)?;
        report.record(rhs.le_tol(&z), || {
            json!({"polygon": sites(&poly), "lhs": num(&z), "rhs": num(&rhs)})
        });
    }
    Ok(report)
}

/// For every `x` and every polygon `P` through `x` whose orientation from
/// `x` carries `m >= 1` occurrences of the closing pattern:
/// `Z(G\P)/Z(G) <= (1 + lambda^f n)^(-m)` at every parameter pair. With a
/// density `a`, polygons with `m >= ceil(a|P|)` are also checked against
/// `(1 + lambda^f n)^(-ceil(a|P|))`.
pub fn lemma1<T: Scalar>(
    g: &Domain,
    params: &[ModelParams<T>],
    a: Option<f64>,
    enumerator: Enumerator,
) -> Result<SuiteReport> {
    if let Some(a) = a {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidInput(format!("a must lie in (0, 1), got {a}")));
        }
    }
    let mut report = SuiteReport::new("lemma1");
    let pattern = Pattern::p_prime(g.lattice());
    let f = face_len(g.lattice());
    let zs: Vec<T> = {
        let poly = enumerator.polynomial(g)?;
        params.iter().map(|p| poly.evaluate(p)).collect()
    };
    let mut removals = Removals::new(g, enumerator);
    for x in g.vertices() {
        for poly in polygons_in_domain(g, x, g.vertex_count())? {
            let m = occurrences(&poly.orient(x)?, &pattern).len();
            if m == 0 {
                continue;
            }
            let rest = removals.get(&poly)?.clone();
            for (p, z) in params.iter().zip(&zs) {
                let ratio = rest.evaluate(p) / z.clone();
                let face = face_factor(p, f);
                let bound = T::one() / face.powu(m as u32);
                report.record(ratio.le_tol(&bound), || {
                    json!({"x": x.to_string(), "polygon": sites(&poly), "occurrences": m,
                           "lambda": num(&p.lambda), "n": num(&p.n),
                           "ratio": num(&ratio), "bound": num(&bound)})
                });
                if let Some(a) = a {
                    let required = crate::saw::occurrence_threshold(a, poly.steps());
                    if m as u64 >= required {
                        let bound = T::one() / face.powu(required as u32);
                        report.record(ratio.le_tol(&bound), || {
                            json!({"x": x.to_string(), "polygon": sites(&poly), "required": required,
                                   "ratio": num(&ratio), "bound": num(&bound)})
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

/// `k` unit squares on `Z^2`, three columns apart, as one induced domain.
pub fn disjoint_squares(k: usize) -> Result<Domain> {
    if k == 0 {
        return Err(Error::InvalidInput("need at least one square".into()));
    }
    let vertices = (0..k as i32).flat_map(|i| {
        [(0, 0), (0, 1), (1, 0), (1, 1)]
            .into_iter()
            .map(move |(dx, dy)| Vertex::new(&[3 * i + dx, dy]))
    });
    Domain::induced(LatticeKind::HyperCubic(2), vertices)
}

/// `Z = (1 + n lambda^4)^j` for `j = 1..=k` disjoint unit squares.
pub fn bound_partition<T: Scalar>(k: usize, p: &ModelParams<T>, enumerator: Enumerator) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("bound-partition");
    for j in 1..=k {
        let g = disjoint_squares(j)?;
        let z = enumerator.partition_function(&g, p)?;
        let expected = face_factor(p, 4).powu(j as u32);
        report.record(z.approx_eq(&expected), || {
            json!({"squares": j, "z": num(&z), "expected": num(&expected)})
        });
    }
    Ok(report)
}

/// For every polygon through the start vertices with at most `max_len`
/// edges: occurrences of the closing pattern along its orientation are at
/// least one face length apart, their face cycles are pairwise
/// vertex-disjoint, and each lies on the polygon's vertex set.
pub fn q_disjointness(lattice: LatticeKind, max_len: usize) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("q-disjointness");
    let pattern = Pattern::p_prime(lattice);
    let f = face_len(lattice) as usize;
    // translation-only matching makes the parity of the start matter on the
    // hexagonal lattice
    let starts = match lattice {
        LatticeKind::Hexagonal => vec![Vertex::new(&[0, 0]), Vertex::new(&[1, 0])],
        _ => vec![Vertex::origin(lattice.dim())],
    };
    for x in &starts {
        for len in (4..=max_len).step_by(2) {
            for poly in enumerate_saps_with(lattice, x, len, SearchLimits::for_lattice(lattice))? {
                let walk = poly.orient(x)?;
                let occ = occurrences(&walk, &pattern);
                let spaced = occ.windows(2).all(|w| w[1] - w[0] >= f);
                let squares = q_squares(lattice, &walk, &pattern, &occ)?;
                let mut seen = std::collections::HashSet::new();
                let disjoint = squares
                    .iter()
                    .flat_map(|q| q.sites())
                    .all(|v| seen.insert(v.clone()));
                let inside = squares.iter().flat_map(|q| q.sites()).all(|v| poly.contains(v));
                report.record(spaced && disjoint && inside, || {
                    json!({"x": x.to_string(), "polygon": sites(&poly), "occurrences": occ})
                });
            }
        }
    }
    Ok(report)
}
