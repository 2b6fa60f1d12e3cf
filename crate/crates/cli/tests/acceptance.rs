//! Acceptance checks, one line per criterion.

use std::collections::{BTreeMap, HashSet};
use std::process::Command;
use std::time::Instant;

use loopon_core::bounds::{solve_lambda1, taylor_slope, ThresholdInputs};
use loopon_core::mc::{transition_matrix, tv_against_exact};
use loopon_core::saw::{
    check_supermultiplicativity, count_saps, count_saws, growth_estimates, occurrence_threshold, pattern_stats,
    sap_majorant,
};
use loopon_core::scalar::rational;
use loopon_core::verify::{self, SuiteReport};
use loopon_core::{
    BigRational, Domain, Enumerator, LatticeKind, ModelParams, ObjectKind, Pattern, SearchLimits, Vertex,
};

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

const Z2: LatticeKind = LatticeKind::HyperCubic(2);

fn z2_box(sides: &[usize]) -> Domain {
    Domain::lattice_box(Z2, &Vertex::origin(2), sides).expect("box")
}

fn exact(l: (i64, i64), n: (i64, i64)) -> ModelParams<BigRational> {
    ModelParams::new(rational(l.0, l.1), rational(n.0, n.1)).expect("params")
}

fn bound_params() -> Vec<ModelParams<BigRational>> {
    vec![exact((1, 2), (1, 1)), exact((1, 1), (1, 1)), exact((1, 4), (4, 1))]
}

fn summarize(reports: &[SuiteReport]) -> Outcome {
    let checks: u64 = reports.iter().map(|r| r.checks).sum();
    let violations: u64 = reports.iter().map(|r| r.violations).sum();
    if checks == 0 {
        return Err("no checks ran".into());
    }
    match reports.iter().find_map(|r| r.first_counterexample.clone()) {
        None => Ok(format!("{checks} checks, 0 violations")),
        Some(ex) => Err(format!("{violations}/{checks} violations; first: {ex}")),
    }
}

fn starting_point() -> Outcome {
    let g = z2_box(&[4, 4]);
    let r = verify::starting_point(&g, &exact((1, 2), (2, 1)), 12, Enumerator::default()).map_err(|e| e.to_string())?;
    summarize(&[r])
}

fn lemma1() -> Outcome {
    let mut reports = Vec::new();
    for sides in [[4, 4], [4, 5]] {
        let g = z2_box(&sides);
        reports.push(verify::lemma1(&g, &bound_params(), None, Enumerator::default()).map_err(|e| e.to_string())?);
    }
    summarize(&reports)
}

fn factorization() -> Outcome {
    let mut reports = Vec::new();
    for sides in [[4, 4], [4, 5]] {
        let g = z2_box(&sides);
        for p in bound_params() {
            reports.push(
                verify::factorization(&g, &p, g.vertex_count(), Enumerator::default()).map_err(|e| e.to_string())?,
            );
        }
    }
    summarize(&reports)
}

fn bound_partition() -> Outcome {
    let mut reports = Vec::new();
    for p in [exact((1, 2), (2, 1)), exact((1, 1), (1, 1)), exact((3, 5), (7, 3))] {
        reports.push(verify::bound_partition(4, &p, Enumerator::default()).map_err(|e| e.to_string())?);
    }
    reports.push(verify::q_disjointness(Z2, 16).map_err(|e| e.to_string())?);
    summarize(&reports)
}

/// Self-avoiding walks by trying every direction sequence.
fn brute_force_saws(n: usize) -> u64 {
    let steps = [(1, 0), (-1, 0), (0, 1), (0, -1)];
    let mut count = 0;
    for code in 0..4u64.pow(n as u32) {
        let mut c = code;
        let mut pos = (0i32, 0i32);
        let mut seen = HashSet::from([pos]);
        let mut ok = true;
        for _ in 0..n {
            let (dx, dy) = steps[(c % 4) as usize];
            c /= 4;
            pos = (pos.0 + dx, pos.1 + dy);
            if !seen.insert(pos) {
                ok = false;
                break;
            }
        }
        count += u64::from(ok);
    }
    count
}

fn saw_counts() -> Outcome {
    let o = Vertex::origin(2);
    let limits = SearchLimits::for_lattice(Z2);
    let count = |n| count_saws(Z2, &o, n, limits).map_err(|e| e.to_string());
    let first: Vec<u64> = (1..=4).map(count).collect::<Result<_, _>>()?;
    if first != [4, 12, 36, 100] {
        return Err(format!("c_1..c_4 = {first:?}"));
    }
    for n in 0..=8 {
        let (fast, slow) = (count(n)?, brute_force_saws(n));
        if fast != slow {
            return Err(format!("N = {n}: backtracking {fast}, brute force {slow}"));
        }
    }
    let counts: BTreeMap<usize, u64> = (1..=16).map(|n| Ok((n, count(n)?))).collect::<Result<_, String>>()?;
    let upto12: BTreeMap<usize, u64> = counts.range(..=12).map(|(&k, &v)| (k, v)).collect();
    let report = check_supermultiplicativity(Z2, &upto12, &BTreeMap::new());
    if !report.saw_violations.is_empty() {
        return Err(format!("c_(m+n) > c_m c_n at {:?}", report.saw_violations));
    }
    let mu = growth_estimates(&counts).map_err(|e| e.to_string())?;
    let seq: Vec<f64> = [4, 8, 12, 16].iter().map(|n| mu[n]).collect();
    if !seq.windows(2).all(|w| w[1] < w[0]) {
        return Err(format!("mu_hat not decreasing: {seq:?}"));
    }
    if !(2.60..=2.90).contains(&mu[&16]) {
        return Err(format!("mu_hat_16 = {}", mu[&16]));
    }
    Ok(format!(
        "c_1..4 = {first:?}, brute force agrees to N = 8, {} pairs, mu_hat_16 = {:.4} (c_16 = {})",
        report.saw_pairs_checked, mu[&16], counts[&16]
    ))
}

fn sap_majorant_check() -> Outcome {
    let o = Vertex::origin(2);
    let mut worst: f64 = 0.0;
    for n in (4..=16).step_by(2) {
        let c = count_saps(Z2, &o, n, SearchLimits::for_lattice(Z2)).map_err(|e| e.to_string())?;
        let bound = sap_majorant(2, n);
        if c as f64 > bound {
            return Err(format!("N = {n}: {c} > {bound}"));
        }
        worst = worst.max(c as f64 / bound);
    }
    Ok(format!("N = 4..16 even, largest count/majorant = {worst:.3e}"))
}

fn deficient_fraction() -> Outcome {
    let o = Vertex::origin(2);
    let p = Pattern::p_prime(Z2);
    let a = 0.01;
    let mut fractions = Vec::new();
    for n in [6, 8, 10, 12, 14, 16] {
        let stats = pattern_stats(Z2, &o, n, &p, ObjectKind::Saw, SearchLimits::for_lattice(Z2)).map_err(|e| e.to_string())?;
        fractions.push(stats.deficient_fraction(occurrence_threshold(a, n)));
    }
    let shown: Vec<String> = fractions.iter().map(|f| format!("{f:.4}")).collect();
    if fractions.windows(2).all(|w| w[1] <= w[0]) {
        Ok(format!("fractions {}", shown.join(", ")))
    } else {
        Err(format!("not nonincreasing: {}", shown.join(", ")))
    }
}

fn threshold_numerics() -> Outcome {
    let inputs = ThresholdInputs::new(2.64, 2.0, 0.01).map_err(|e| e.to_string())?;
    let inv = 1.0 / inputs.mu;
    let root = |n| solve_lambda1(n, &inputs).map_err(|e| e.to_string());
    if root(0.0)?.lambda != inv {
        return Err("lambda_1(0) differs from 1/mu".into());
    }
    let mut worst: f64 = 0.0;
    for k in 1..=50 {
        let n = 0.001 * 1.3f64.powi(k);
        let r = root(n)?;
        worst = worst.max(r.residual);
        if r.residual > 1e-10 || r.lambda <= inv {
            return Err(format!("n = {n}: lambda = {}, residual = {}", r.lambda, r.residual));
        }
    }
    let slope = taylor_slope(&inputs);
    let est = (root(1e-3)?.lambda - inv) * 1e3;
    if (est - slope).abs() > 0.1 * slope {
        return Err(format!("difference quotient {est} vs slope {slope}"));
    }
    Ok(format!("max residual {worst:.1e}, quotient {est:.4e} vs a'/mu^5 = {slope:.4e}"))
}

fn mc_validation() -> Outcome {
    let g = Domain::lattice_box(LatticeKind::Hexagonal, &Vertex::origin(2), &[6, 4]).map_err(|e| e.to_string())?;
    if g.edge_count() > 30 {
        return Err(format!("domain has {} edges", g.edge_count()));
    }
    let x = Vertex::new(&[2, 1]);
    let params = ModelParams::new(1.0, 1.0).map_err(|e| e.to_string())?;
    let report = tv_against_exact(&g, &x, &params, 1_000_000, 1000, &[1, 2, 3]).map_err(|e| e.to_string())?;
    let tvs: Vec<f64> = report.runs.iter().map(|r| r.tv).collect();
    if tvs.iter().any(|&t| t >= 0.02) {
        return Err(format!("TV distances {tvs:?}"));
    }

    let square = z2_box(&[2, 2]);
    let p = exact((1, 2), (3, 1));
    let m = transition_matrix(&square, &p).map_err(|e| e.to_string())?;
    let z: BigRational = m.weights.iter().cloned().sum();
    let pi: Vec<BigRational> = m.weights.iter().map(|w| w / &z).collect();
    let on = rational(3, 16);
    let target = [rational(1, 1) / (rational(1, 1) + &on), &on / (rational(1, 1) + &on)];
    if pi != target {
        return Err(format!("target law {pi:?}"));
    }
    for j in 0..pi.len() {
        let flow: BigRational = (0..pi.len()).map(|i| &pi[i] * &m.rows[i][j]).sum();
        if flow != pi[j] {
            return Err("target law is not stationary".into());
        }
    }
    let shown: Vec<String> = tvs.iter().map(|t| format!("{t:.4}")).collect();
    Ok(format!(
        "hex 6x4 ({} edges), TV per seed {}, 2-state kernel stationary exactly",
        g.edge_count(),
        shown.join(", ")
    ))
}

fn run_cli(args: &[&str], dir: &std::path::Path) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_loopon"))
        .args(args)
        .env("LOOPON_CACHE", dir.join("cache"))
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} exited with {}", out.status));
    }
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let commands: [&[&str]; 6] = [
        &["z", "--box", "4x4", "--lambda", "1/2", "--n", "2", "--mark", "1,1"],
        &["z", "--box", "3x4", "--lambda", "0.3", "--n", "1.5", "--mode", "float"],
        &["verify", "starting-point", "--box", "3x3"],
        &["counts", "--kind", "deficient", "--from", "4", "--to", "10"],
        &["bound-curve", "--mu", "2.64", "--mu-prime", "2", "--points", "21"],
        &["mc", "--lattice", "hex", "--box", "6x6", "--lambda", "0.8", "--n", "1", "--sweeps", "2e4", "--seed", "42"],
    ];
    for args in commands {
        let first = run_cli(args, dir.path())?;
        let second = run_cli(args, dir.path())?;
        if first != second || first.is_empty() {
            return Err(format!("output of {args:?} differs between runs"));
        }
    }
    Ok(format!("{} commands reproduced byte for byte", commands.len()))
}

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("starting-point identity, 4x4 box, exact", starting_point),
        ("per-occurrence bound, 4x4 and 4x5 boxes", lemma1),
        ("factorization inequality", factorization),
        ("disjoint-square partition and Q-face disjointness", bound_partition),
        ("self-avoiding walk counts on Z^2", saw_counts),
        ("polygon majorant on Z^2", sap_majorant_check),
        ("pattern-deficient fraction", deficient_fraction),
        ("threshold numerics", threshold_numerics),
        ("Monte Carlo against enumeration", mc_validation),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
