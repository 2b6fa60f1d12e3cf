//! Threshold numerics: the cap `2/(mu + mu')`, the root `lambda_1(n)` of
//! `lambda mu = (1 + lambda^4 n)^a'`, their minimum, the small-`n` slope
//! `a'/mu^5`, and finite truncations of the two tail sums that bound
//! `P(|P_x| > l)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::saw::occurrence_threshold;

/// Intervals scanned for sign changes before bisecting.
const SCAN_INTERVALS: usize = 4096;
const BISECTION_STEPS: usize = 200;
/// Upper end of the search bracket, in units of `1/mu`.
const BRACKET_FACTOR: f64 = 10.0;

/// Connective-constant estimate `mu`, pattern-deficient growth `mu' < mu`,
/// and pattern density `a'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdInputs {
    pub mu: f64,
    pub mu_prime: f64,
    pub a_prime: f64,
}

impl ThresholdInputs {
    pub fn new(mu: f64, mu_prime: f64, a_prime: f64) -> Result<Self> {
        if !(mu_prime > 0.0 && mu_prime < mu && mu.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "need 0 < mu' < mu, got mu = {mu}, mu' = {mu_prime}"
            )));
        }
        if !(a_prime > 0.0 && a_prime < 1.0) {
            return Err(Error::InvalidInput(format!("need 0 < a' < 1, got {a_prime}")));
        }
        Ok(ThresholdInputs {
            mu,
            mu_prime,
            a_prime,
        })
    }
}

/// `2 / (mu + mu')`.
pub fn lambda1_prime(mu: f64, mu_prime: f64) -> Result<f64> {
    if !(mu_prime > 0.0 && mu_prime < mu) {
        return Err(Error::InvalidInput(format!(
            "need 0 < mu' < mu, got mu = {mu}, mu' = {mu_prime}"
        )));
    }
    Ok(2.0 / (mu + mu_prime))
}

/// A root of the threshold equation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lambda1Root {
    pub lambda: f64,
    /// `|lambda mu - (1 + lambda^4 n)^a'|` at the returned value.
    pub residual: f64,
    /// Sign changes found in the bracket beyond the first.
    pub further_sign_changes: usize,
}

impl Lambda1Root {
    pub fn warning(&self) -> Option<String> {
        (self.further_sign_changes > 0).then(|| {
            format!(
                "{} further sign change(s) above lambda = {}; reporting the smallest root",
                self.further_sign_changes, self.lambda
            )
        })
    }
}

fn threshold_gap(lambda: f64, n: f64, inputs: &ThresholdInputs) -> f64 {
    lambda * inputs.mu - (1.0 + lambda.powi(4) * n).powf(inputs.a_prime)
}

/// The smallest `lambda >= 1/mu` solving `lambda mu = (1 + lambda^4 n)^a'`.
///
/// Needs `a' <= 1/4` so that the left side eventually overtakes the right.
/// The bracket `[1/mu, 10/mu]` is scanned for the first sign change, which
/// is then bisected.
pub fn solve_lambda1(n: f64, inputs: &ThresholdInputs) -> Result<Lambda1Root> {
    if n.is_nan() || n < 0.0 || n.is_infinite() {
        return Err(Error::InvalidInput(format!("n must be finite and >= 0, got {n}")));
    }
    if inputs.a_prime > 0.25 {
        return Err(Error::InvalidInput(format!(
            "a' must be at most 1/4, got {}",
            inputs.a_prime
        )));
    }
    let lo = 1.0 / inputs.mu;
    if n == 0.0 {
        return Ok(Lambda1Root {
            lambda: lo,
            residual: threshold_gap(lo, n, inputs).abs(),
            further_sign_changes: 0,
        });
    }
    let hi = BRACKET_FACTOR / inputs.mu;
    let step = (hi - lo) / SCAN_INTERVALS as f64;
    let grid = |i: usize| lo + step * i as f64;

    let mut first = None;
    let mut further = 0;
    let mut prev_sign = threshold_gap(lo, n, inputs) >= 0.0;
    for i in 1..=SCAN_INTERVALS {
        let sign = threshold_gap(grid(i), n, inputs) >= 0.0;
        if sign != prev_sign {
            if first.is_none() {
                first = Some(i);
            } else {
                further += 1;
            }
        }
        prev_sign = sign;
    }
    let i = first.ok_or_else(|| {
        Error::Unsolvable(format!(
            "no sign change on [{lo}, {hi}] for n = {n}, a' = {}",
            inputs.a_prime
        ))
    })?;

    let (mut a, mut b) = (grid(i - 1), grid(i));
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if threshold_gap(mid, n, inputs) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let lambda = if threshold_gap(a, n, inputs).abs() <= threshold_gap(b, n, inputs).abs() {
        a
    } else {
        b
    };
    Ok(Lambda1Root {
        lambda,
        residual: threshold_gap(lambda, n, inputs).abs(),
        further_sign_changes: further,
    })
}

/// The small-`n` slope `a'/mu^5` of `lambda_1(n) - 1/mu`.
pub fn taylor_slope(inputs: &ThresholdInputs) -> f64 {
    inputs.a_prime / inputs.mu.powi(5)
}

/// `min{2/(mu + mu'), lambda_1(n)}`.
pub fn combined_lower_bound(n: f64, inputs: &ThresholdInputs) -> Result<f64> {
    let cap = lambda1_prime(inputs.mu, inputs.mu_prime)?;
    Ok(solve_lambda1(n, inputs)?.lambda.min(cap))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveSample {
    pub n: f64,
    pub lambda1: f64,
    pub lambda1_prime: f64,
    pub combined: f64,
    /// `1/mu + (a'/mu^5) n`.
    pub slope_model: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdCurve {
    pub inputs: ThresholdInputs,
    pub samples: Vec<CurveSample>,
    pub warnings: Vec<String>,
}

impl ThresholdCurve {
    /// CSV with header `n,lambda1,lambda1_prime,combined,slope_model`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,lambda1,lambda1_prime,combined,slope_model\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                s.n, s.lambda1, s.lambda1_prime, s.combined, s.slope_model
            );
        }
        out
    }
}

pub fn threshold_curve(inputs: &ThresholdInputs, ns: &[f64]) -> Result<ThresholdCurve> {
    let cap = lambda1_prime(inputs.mu, inputs.mu_prime)?;
    let slope = taylor_slope(inputs);
    let mut samples = Vec::with_capacity(ns.len());
    let mut warnings = Vec::new();
    for &n in ns {
        let root = solve_lambda1(n, inputs)?;
        if let Some(w) = root.warning() {
            warnings.push(format!("n = {n}: {w}"));
        }
        samples.push(CurveSample {
            n,
            lambda1: root.lambda,
            lambda1_prime: cap,
            combined: root.lambda.min(cap),
            slope_model: 1.0 / inputs.mu + slope * n,
        });
    }
    Ok(ThresholdCurve {
        inputs: *inputs,
        samples,
        warnings,
    })
}

/// Parameters shared by the tail sums over `l < N <= n_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailParams {
    pub ell: usize,
    pub n_max: usize,
    pub lambda: f64,
    pub n: f64,
    pub a_prime: f64,
    /// Edges of the face closed by each pattern occurrence: 4 on `Z^d`, 6 on
    /// the hexagonal lattice.
    pub face_len: i32,
}

impl TailParams {
    fn face_discount(&self, len: usize) -> f64 {
        let face = 1.0 + self.lambda.powi(self.face_len) * self.n;
        face.powf(-(occurrence_threshold(self.a_prime, len) as f64))
    }

    fn count(&self, counts: &BTreeMap<usize, u64>, len: usize) -> Result<f64> {
        counts
            .get(&len)
            .map(|&c| c as f64)
            .ok_or(Error::MissingCount(len))
    }
}

/// `n * sum |SAP_x(N, ceil(a'N), P')| lambda^N` over `l < N <= n_max`, given
/// the pattern-deficient polygon counts for density `a'`.
pub fn tail_first_term(t: &TailParams, deficient_counts: &BTreeMap<usize, u64>) -> Result<f64> {
    let mut sum = 0.0;
    for len in t.ell + 1..=t.n_max {
        sum += t.count(deficient_counts, len)? * t.lambda.powi(len as i32);
    }
    Ok(t.n * sum)
}

/// `n * sum |SAP_x(N)| lambda^N (1 + lambda^f n)^(-ceil(a'N))` over `l < N <= n_max`.
pub fn tail_second_term(t: &TailParams, sap_counts: &BTreeMap<usize, u64>) -> Result<f64> {
    let mut sum = 0.0;
    for len in t.ell + 1..=t.n_max {
        sum += t.count(sap_counts, len)? * t.lambda.powi(len as i32) * t.face_discount(len);
    }
    Ok(t.n * sum)
}

/// The second tail with polygon counts replaced by the majorant
/// `((d-1)/d) N M^N`, `M = 2d - 1`.
pub fn tail_second_majorant(t: &TailParams, d: usize) -> f64 {
    let m = (2 * d - 1) as f64;
    let mut sum = 0.0;
    for len in t.ell + 1..=t.n_max {
        sum += len as f64 * (t.lambda * m).powi(len as i32) * t.face_discount(len);
    }
    t.n * (d as f64 - 1.0) / d as f64 * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs() -> ThresholdInputs {
        ThresholdInputs::new(2.64, 2.0, 0.01).unwrap()
    }

    #[test]
    fn cap_values() {
        assert_eq!(lambda1_prime(3.0, 1.0).unwrap(), 0.5);
        assert!((lambda1_prime(2.64, 2.0).unwrap() - 0.431_034_482_758_620_7).abs() < 1e-12);
        let near = lambda1_prime(2.64, 2.64 - 1e-9).unwrap();
        assert!(near > 1.0 / 2.64 && near - 1.0 / 2.64 < 1e-9);
        assert!(lambda1_prime(2.0, 3.0).is_err());
        assert!(lambda1_prime(2.0, 2.0).is_err());
        assert!(ThresholdInputs::new(2.64, 2.0, 1.0).is_err());
    }

    #[test]
    fn root_at_zero_is_exactly_inverse_mu() {
        let r = solve_lambda1(0.0, &inputs()).unwrap();
        assert_eq!(r.lambda, 1.0 / 2.64);
        assert_eq!(combined_lower_bound(0.0, &inputs()).unwrap(), 1.0 / 2.64);
    }

    #[test]
    fn root_lies_above_inverse_mu() {
        let inp = inputs();
        for n in [1e-6, 1e-3, 0.1, 1.0, 10.0] {
            let gap_at_start = 1.0 - (1.0 + n / inp.mu.powi(4)).powf(inp.a_prime);
            assert!(gap_at_start < 0.0);
            let r = solve_lambda1(n, &inp).unwrap();
            assert!(r.lambda > 1.0 / inp.mu);
            assert!(r.residual <= 1e-10);
            let direct = (r.lambda * inp.mu - (1.0 + r.lambda.powi(4) * n).powf(inp.a_prime)).abs();
            assert!(direct <= 1e-10);
        }
    }

    #[test]
    fn slope_and_numeric_limit() {
        let inp = inputs();
        let slope = taylor_slope(&inp);
        assert!((slope - 0.01 / 2.64f64.powi(5)).abs() < 1e-18);
        assert!((slope - 7.79e-5).abs() < 1e-7);
        assert!(slope > 0.0);
        let h = 1e-3;
        let est = (solve_lambda1(h, &inp).unwrap().lambda - 1.0 / inp.mu) / h;
        assert!((est - slope).abs() <= 0.1 * slope);
    }

    #[test]
    fn monotone_in_n_and_a() {
        let inp = inputs();
        let mut prev = 0.0;
        for k in 0..40 {
            let n = 0.25 * k as f64;
            let l = solve_lambda1(n, &inp).unwrap().lambda;
            if k > 0 {
                assert!(l > prev);
            }
            prev = l;
        }
        let mut prev = 0.0;
        for a in [0.005, 0.01, 0.05, 0.1, 0.2, 0.25] {
            let l = solve_lambda1(1.0, &ThresholdInputs { a_prime: a, ..inp }).unwrap().lambda;
            assert!(l > prev);
            prev = l;
        }
        assert!(solve_lambda1(1.0, &ThresholdInputs { a_prime: 0.3, ..inp }).is_err());
        assert!(solve_lambda1(-1.0, &inp).is_err());
    }

    #[test]
    fn combined_bound_is_root_for_small_n_and_capped_later() {
        let inp = ThresholdInputs::new(2.64, 2.0, 0.25).unwrap();
        let cap = lambda1_prime(2.64, 2.0).unwrap();
        assert_eq!(combined_lower_bound(0.01, &inp).unwrap(), solve_lambda1(0.01, &inp).unwrap().lambda);
        let mut prev = 0.0;
        let mut capped = false;
        for k in 0..60 {
            let n = 0.5 * k as f64;
            let c = combined_lower_bound(n, &inp).unwrap();
            assert!(c >= prev && c <= cap);
            capped |= c == cap;
            prev = c;
        }
        assert!(capped);
    }

    #[test]
    fn second_differences_near_zero_are_bounded() {
        let inp = inputs();
        for h in [1e-2, 1e-3] {
            let f = |n: f64| solve_lambda1(n, &inp).unwrap().lambda;
            let second = (f(2.0 * h) - 2.0 * f(h) + f(0.0)) / (h * h);
            assert!(second.abs() < 1e-3);
        }
    }

    #[test]
    fn curve_rows() {
        let inp = inputs();
        let curve = threshold_curve(&inp, &[0.0, 0.001, 0.5, 1.0]).unwrap();
        assert_eq!(curve.samples[0].combined, 1.0 / inp.mu);
        for s in &curve.samples[1..] {
            assert!(s.combined > 1.0 / inp.mu);
        }
        let csv = curve.to_csv();
        assert!(csv.starts_with("n,lambda1,lambda1_prime,combined,slope_model\n"));
        assert_eq!(csv.lines().count(), 5);
    }

    fn tail(ell: usize, lambda: f64, n: f64) -> TailParams {
        TailParams {
            ell,
            n_max: 12,
            lambda,
            n,
            a_prime: 0.1,
            face_len: 4,
        }
    }

    #[test]
    fn tail_sums() {
        let counts: BTreeMap<usize, u64> = (1..=12).map(|k| (k, if k % 2 == 0 && k >= 4 { 10 * k as u64 } else { 0 })).collect();
        assert_eq!(tail_first_term(&tail(3, 0.4, 0.0), &counts).unwrap(), 0.0);
        assert_eq!(tail_first_term(&tail(3, 0.0, 1.0), &counts).unwrap(), 0.0);
        assert_eq!(tail_second_term(&tail(3, 0.4, 0.0), &counts).unwrap(), 0.0);
        // recompute by hand
        let mut expected = 0.0;
        for k in [4, 6, 8, 10, 12] {
            expected += (10 * k) as f64 * 0.4f64.powi(k);
        }
        let got = tail_first_term(&tail(3, 0.4, 1.5), &counts).unwrap();
        assert!((got - 1.5 * expected).abs() < 1e-12);
        let a = tail_second_term(&tail(3, 0.4, 1.5), &counts).unwrap();
        let b = tail_second_term(&tail(7, 0.4, 1.5), &counts).unwrap();
        assert!(b < a);
        let mut missing = counts.clone();
        missing.remove(&8);
        assert!(matches!(tail_first_term(&tail(3, 0.4, 1.0), &missing), Err(Error::MissingCount(8))));
    }
}
