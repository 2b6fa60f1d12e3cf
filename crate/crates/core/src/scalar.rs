//! Number types used for weights and partition functions.
//!
//! Every computation that sums weights is generic over [`Scalar`], which is
//! implemented for exact rationals ([`BigRational`]) and for `f64`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

const FLOAT_SLACK: f64 = 1e-12;

/// Arithmetic needed by the enumeration and verification code.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialOrd
    + Zero
    + One
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + Send
    + Sync
{
    fn from_u64(value: u64) -> Self;

    fn to_f64(&self) -> f64;

    fn into_number(self) -> Number;

    /// Equality: exact for rationals, relative `1e-12` for floats.
    fn approx_eq(&self, other: &Self) -> bool;

    /// `self <= other`, with the same float slack as [`Scalar::approx_eq`].
    fn le_tol(&self, other: &Self) -> bool;

    /// `self^exp` with the convention `0^0 = 1`.
    fn powu(&self, exp: u32) -> Self {
        num_traits::pow(self.clone(), exp as usize)
    }

    /// `self^exp` for a signed exponent. Negative powers of zero are not defined.
    fn powi(&self, exp: i64) -> Option<Self> {
        if exp >= 0 {
            Some(self.powu(exp as u32))
        } else if self.is_zero() {
            None
        } else {
            Some(Self::one() / self.powu(exp.unsigned_abs() as u32))
        }
    }
}

impl Scalar for f64 {
    fn from_u64(value: u64) -> Self {
        value as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn into_number(self) -> Number {
        Number::Float(self)
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self - other).abs() <= FLOAT_SLACK * self.abs().max(other.abs()).max(1.0)
    }

    fn le_tol(&self, other: &Self) -> bool {
        *self <= *other + FLOAT_SLACK * other.abs().max(1.0)
    }
}

impl Scalar for BigRational {
    fn from_u64(value: u64) -> Self {
        BigRational::from_integer(BigInt::from(value))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn into_number(self) -> Number {
        Number::Rational(self)
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn le_tol(&self, other: &Self) -> bool {
        self <= other
    }
}

/// Selects exact rational or floating point evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NumberMode {
    ExactRational,
    Float64,
}

impl NumberMode {
    pub fn name(self) -> &'static str {
        match self {
            NumberMode::ExactRational => "rational",
            NumberMode::Float64 => "float",
        }
    }
}

impl FromStr for NumberMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rational" | "exact" | "exact-rational" => Ok(NumberMode::ExactRational),
            "float" | "f64" | "float64" => Ok(NumberMode::Float64),
            other => Err(Error::InvalidInput(format!("unknown number mode `{other}`"))),
        }
    }
}

/// A computed value in either mode. Rationals serialize as `"num/den"` strings.
#[derive(Debug, Clone, PartialEq)]
pub enum Number {
    Rational(BigRational),
    Float(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Rational(r) => Scalar::to_f64(r),
            Number::Float(f) => *f,
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Number::Float(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Number {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Number::Rational(_) => serializer.serialize_str(&self.to_string()),
            Number::Float(x) => serializer.serialize_f64(*x),
        }
    }
}

/// Parses `"p/q"`, an integer, or a decimal such as `"0.25"` or `"1e-3"` into an
/// exact rational. Decimals are converted exactly, not through `f64`.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let bad = || Error::InvalidInput(format!("cannot parse `{text}` as a number"));
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::InvalidInput(format!("zero denominator in `{text}`")));
        }
        return Ok(BigRational::new(num, den));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let digits = if digits == "-" || digits == "+" || digits.is_empty() {
        return Err(bad());
    } else {
        digits
    };
    let value: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let r = if scale >= 0 {
        BigRational::from_integer(value * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(value, num_traits::pow(ten, scale.unsigned_abs() as usize))
    };
    Ok(r)
}

/// Edge weight `lambda` and loop weight `n` of the measure.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    pub lambda: T,
    pub n: T,
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(lambda: T, n: T) -> Result<Self> {
        if lambda < T::zero() {
            return Err(Error::NegativeParameter(format!("lambda = {lambda:?}")));
        }
        if n < T::zero() {
            return Err(Error::NegativeParameter(format!("n = {n:?}")));
        }
        Ok(ModelParams { lambda, n })
    }

    /// `lambda^edges * n^loops`, with `0^0 = 1`.
    pub fn weight(&self, edges: u32, loops: u32) -> T {
        self.lambda.powu(edges) * self.n.powu(loops)
    }

    pub fn to_f64(&self) -> ModelParams<f64> {
        ModelParams {
            lambda: self.lambda.to_f64(),
            n: self.n.to_f64(),
        }
    }
}

impl ModelParams<BigRational> {
    /// Parses both parameters with [`parse_rational`].
    pub fn parse(lambda: &str, n: &str) -> Result<Self> {
        Self::new(parse_rational(lambda)?, parse_rational(n)?)
    }
}

/// `(1 + n lambda^face_len)`, the weight of a single isolated face.
pub fn face_factor<T: Scalar>(params: &ModelParams<T>, face_len: u32) -> T {
    T::one() + params.n.clone() * params.lambda.powu(face_len)
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
