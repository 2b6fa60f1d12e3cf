use std::fmt::Write as _;

use loopon_core::bounds::{threshold_curve, ThresholdInputs};
use loopon_core::cache::CountCache;
use loopon_core::mc::{self, McOptions, RNG_NAME};
use loopon_core::saw::{growth_estimates, occurrence_threshold};
use loopon_core::scalar::parse_rational;
use loopon_core::verify::{self, SuiteReport};
use loopon_core::{
    BigRational, Domain, Enumerator, Error, LatticeKind, ModelParams, ObjectKind, Pattern,
    Result, Scalar, SearchLimits, Vertex,
};
use serde_json::{json, Value};

use crate::cli::{
    CountKind, CountsArgs, CurveArgs, DomainArgs, McArgs, McTvArgs, Mode, Object, Suite, VerifyArgs, ZArgs,
};

/// What a command produced, plus the facts recorded in its manifest.
#[derive(Debug, Default)]
pub struct Outcome {
    pub body: String,
    pub passed: bool,
    pub rng: Option<&'static str>,
    pub seeds: Vec<u64>,
    pub cache_hits: u64,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Outcome {
            body,
            passed: true,
            ..Outcome::default()
        }
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn parse_sides(text: &str) -> Result<Vec<usize>> {
    text.split(['x', 'X'])
        .map(|s| s.trim().parse::<usize>().map_err(|_| usage(format!("bad box `{text}`"))))
        .collect()
}

pub fn build_domain(args: &DomainArgs, default_sides: Option<&str>) -> Result<Domain> {
    let lattice: LatticeKind = args.lattice.parse()?;
    let sides = args
        .sides
        .as_deref()
        .or(default_sides)
        .ok_or_else(|| usage("--box is required"))?;
    let sides = parse_sides(sides)?;
    if sides.len() != lattice.dim() {
        return Err(usage(format!(
            "box has {} sides, lattice {} has dimension {}",
            sides.len(),
            lattice.name(),
            lattice.dim()
        )));
    }
    let corner = match &args.corner {
        Some(c) => c.parse::<Vertex>()?,
        None => Vertex::origin(lattice.dim()),
    };
    let g = Domain::lattice_box(lattice, &corner, &sides)?;
    let removed: Vec<Vertex> = args
        .remove
        .iter()
        .flat_map(|s| s.split(';'))
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    if removed.is_empty() {
        Ok(g)
    } else {
        g.minus(&removed)
    }
}

/// `"1e6"`, `"250000"` and the like as a count.
pub fn parse_count(text: &str) -> Result<u64> {
    let r = parse_rational(text)?;
    if !r.is_integer() || r < BigRational::from_integer(0.into()) {
        return Err(usage(format!("`{text}` is not a nonnegative integer")));
    }
    r.to_integer()
        .try_into()
        .map_err(|_| usage(format!("`{text}` is too large")))
}

fn enumerator(cap: usize, force: bool) -> Enumerator {
    Enumerator::with_cap(if force { usize::MAX } else { cap })
}

fn num<T: Scalar>(v: &T) -> Value {
    serde_json::to_value(v.clone().into_number()).unwrap_or(Value::Null)
}

fn z_body<T: Scalar>(g: &Domain, e: &Enumerator, p: &ModelParams<T>, mark: Option<&Vertex>) -> Result<Value> {
    let mut out = json!({
        "lambda": num(&p.lambda),
        "n": num(&p.n),
    });
    match mark {
        Some(x) => {
            let law = e.loop_length_distribution(g, x, p)?;
            out["Z"] = num(&law.z);
            out["config_count"] = json!(law.config_count);
            out["mark"] = json!(x.to_string());
            out["length_law"] = law
                .length_law
                .iter()
                .map(|(l, prob)| json!({"length": l, "probability": num(prob)}))
                .collect();
        }
        None => {
            let poly = e.polynomial(g)?;
            out["Z"] = num(&poly.evaluate(p));
            out["config_count"] = json!(poly.config_count());
        }
    }
    Ok(out)
}

pub fn z(a: &ZArgs) -> Result<Outcome> {
    let g = build_domain(&a.domain, None)?;
    let e = enumerator(a.edge_cap, a.force);
    let mark = a.mark.as_deref().map(str::parse::<Vertex>).transpose()?;
    let exact = ModelParams::<BigRational>::parse(&a.lambda, &a.n)?;
    let mut body = match a.mode {
        Mode::Rational => z_body(&g, &e, &exact, mark.as_ref())?,
        Mode::Float => z_body(&g, &e, &exact.to_f64(), mark.as_ref())?,
    };
    body["lattice"] = json!(g.lattice().name());
    body["vertices"] = json!(g.vertex_count());
    body["edges"] = json!(g.edge_count());
    body["mode"] = json!(a.mode);
    Ok(Outcome::ok(pretty(&body)))
}

fn parse_pairs(at: &[String], defaults: &[&str]) -> Result<Vec<ModelParams<BigRational>>> {
    let given: Vec<&str> = if at.is_empty() {
        defaults.to_vec()
    } else {
        at.iter().map(String::as_str).collect()
    };
    given
        .iter()
        .map(|s| {
            let (l, n) = s
                .split_once(':')
                .ok_or_else(|| usage(format!("expected LAMBDA:N, got `{s}`")))?;
            ModelParams::parse(l, n)
        })
        .collect()
}

fn run_suite<T: Scalar>(a: &VerifyArgs, params: &[ModelParams<T>]) -> Result<Vec<SuiteReport>> {
    let e = enumerator(a.edge_cap, a.force);
    let max_len = a.max_len;
    Ok(match a.suite {
        Suite::StartingPoint => {
            let g = build_domain(&a.domain, Some("4x4"))?;
            params
                .iter()
                .map(|p| verify::starting_point(&g, p, max_len.unwrap_or(12), e))
                .collect::<Result<_>>()?
        }
        Suite::Factorization => {
            let g = build_domain(&a.domain, Some("4x4"))?;
            params
                .iter()
                .map(|p| verify::factorization(&g, p, max_len.unwrap_or(12), e))
                .collect::<Result<_>>()?
        }
        Suite::Lemma1 => {
            let g = build_domain(&a.domain, Some("4x4"))?;
            vec![verify::lemma1(&g, params, a.a, e)?]
        }
        Suite::BoundPartition => params
            .iter()
            .map(|p| verify::bound_partition(a.k, p, e))
            .collect::<Result<_>>()?,
        Suite::QDisjointness => {
            let lattice: LatticeKind = a.domain.lattice.parse()?;
            vec![verify::q_disjointness(lattice, max_len.unwrap_or(16))?]
        }
    })
}

pub fn verify(a: &VerifyArgs) -> Result<Outcome> {
    let defaults: &[&str] = match a.suite {
        Suite::Lemma1 => &["1/2:1", "1:1", "1/4:4"],
        _ => &["1/2:2"],
    };
    let exact = parse_pairs(&a.at, defaults)?;
    let reports = match a.mode {
        Mode::Rational => run_suite(a, &exact)?,
        Mode::Float => {
            let float: Vec<_> = exact.iter().map(ModelParams::to_f64).collect();
            run_suite(a, &float)?
        }
    };
    let passed = reports.iter().all(SuiteReport::passed);
    let body = json!({
        "suite": a.suite,
        "mode": a.mode,
        "passed": passed,
        "reports": reports,
    });
    Ok(Outcome {
        body: pretty(&body),
        passed,
        ..Outcome::default()
    })
}

fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

pub fn counts(a: &CountsArgs) -> Result<Outcome> {
    let lattice: LatticeKind = a.lattice.parse()?;
    if a.from > a.to {
        return Err(usage("--from exceeds --to"));
    }
    let limits = if a.force {
        SearchLimits::unlimited()
    } else {
        SearchLimits::for_lattice(lattice)
    };
    let cache = if a.no_cache {
        CountCache::disabled()
    } else {
        CountCache::from_env()
    };
    let mut out = String::new();
    match a.kind {
        CountKind::Saw | CountKind::Sap => {
            let kind = if a.kind == CountKind::Saw {
                ObjectKind::Saw
            } else {
                ObjectKind::Sap
            };
            if kind == ObjectKind::Sap && a.from == 0 {
                return Err(usage("polygon lengths start at 1"));
            }
            out.push_str("N,count,mu_hat\n");
            for len in a.from..=a.to {
                let count = cache.stats(lattice, len, None, kind, limits)?.total;
                let mu = if len > 0 && count > 0 {
                    let single = [(len, count)].into_iter().collect();
                    fmt_f64(growth_estimates(&single)?[&len])
                } else {
                    String::new()
                };
                let _ = writeln!(out, "{len},{count},{mu}");
            }
        }
        CountKind::Deficient => {
            let kind = match a.object {
                Object::Saw => ObjectKind::Saw,
                Object::Sap => ObjectKind::Sap,
            };
            if kind == ObjectKind::Sap && a.from == 0 {
                return Err(usage("polygon lengths start at 1"));
            }
            let pattern = Pattern::p_prime(lattice);
            out.push_str("N,total,w,deficient,fraction\n");
            for len in a.from..=a.to {
                let stats = cache.stats(lattice, len, Some(&pattern), kind, limits)?;
                let w = a.w.unwrap_or_else(|| occurrence_threshold(a.a, len));
                let _ = writeln!(
                    out,
                    "{len},{},{w},{},{}",
                    stats.total,
                    stats.deficient(w),
                    fmt_f64(stats.deficient_fraction(w))
                );
            }
        }
    }
    Ok(Outcome {
        body: out,
        passed: true,
        cache_hits: cache.hits(),
        ..Outcome::default()
    })
}

pub fn bound_curve(a: &CurveArgs) -> Result<Outcome> {
    let inputs = ThresholdInputs::new(a.mu, a.mu_prime, a.a_prime)?;
    let ns: Vec<f64> = if a.n.is_empty() {
        if a.points < 2 || a.n_max.is_nan() || a.n_max <= 0.0 {
            return Err(usage("need --points >= 2 and --n-max > 0"));
        }
        (0..a.points)
            .map(|i| a.n_max * i as f64 / (a.points - 1) as f64)
            .collect()
    } else {
        a.n.clone()
    };
    let curve = threshold_curve(&inputs, &ns)?;
    Ok(Outcome {
        body: curve.to_csv(),
        passed: true,
        warnings: curve.warnings,
        ..Outcome::default()
    })
}

fn float_params(lambda: f64, n: f64) -> Result<ModelParams<f64>> {
    if !lambda.is_finite() || !n.is_finite() {
        return Err(usage("parameters must be finite"));
    }
    ModelParams::new(lambda, n)
}

pub fn mc(a: &McArgs) -> Result<Outcome> {
    let g = build_domain(&a.domain, None)?;
    let params = float_params(a.lambda, a.n)?;
    let marked = if a.mark.is_empty() {
        vec![g.vertex(0).clone()]
    } else {
        a.mark.iter().map(|s| s.parse()).collect::<Result<_>>()?
    };
    let opts = McOptions {
        sweeps: parse_count(&a.sweeps)?,
        burn_in: parse_count(&a.burn_in)?,
        seed: a.seed,
        marked,
        full_recount: a.full_recount,
    };
    let report = mc::run(&g, &params, &opts)?;
    Ok(Outcome {
        body: pretty(&serde_json::to_value(&report)?),
        passed: true,
        rng: Some(RNG_NAME),
        seeds: vec![a.seed],
        ..Outcome::default()
    })
}

pub fn mc_tv(a: &McTvArgs) -> Result<Outcome> {
    let g = build_domain(&a.domain, Some("6x4"))?;
    let params = float_params(a.lambda, a.n)?;
    let x = match &a.mark {
        Some(s) => s.parse()?,
        None => g.vertex(g.vertex_count() / 2).clone(),
    };
    if a.seeds.is_empty() {
        return Err(usage("no seeds given"));
    }
    let report = mc::tv_against_exact(&g, &x, &params, parse_count(&a.sweeps)?, parse_count(&a.burn_in)?, &a.seeds)?;
    let passed = report.runs.iter().all(|r| r.tv < a.tol);
    let body = json!({
        "lattice": g.lattice().name(),
        "edges": g.edge_count(),
        "lambda": a.lambda,
        "n": a.n,
        "rng": RNG_NAME,
        "tol": a.tol,
        "passed": passed,
        "vertex": report.vertex.to_string(),
        "exact": report.exact,
        "runs": report.runs,
    });
    Ok(Outcome {
        body: pretty(&body),
        passed,
        rng: Some(RNG_NAME),
        seeds: a.seeds.clone(),
        ..Outcome::default()
    })
}
