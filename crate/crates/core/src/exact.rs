//! Exact rational arithmetic and the handful of planar primitives the rest of
//! the crate needs.
//!
//! Every coordinate is a [`Rational`]. Square roots never appear here; callers
//! that need a length carry it as `m/√s` (see [`crate::covering::ExactRadius`])
//! and only convert to `f64` at the edge.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("invalid rational literal {0:?}")]
    Parse(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("segment endpoints coincide")]
    DegenerateSegment,
}

/// Arbitrary-precision fraction, always in lowest terms with a positive
/// denominator.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self, ExactError> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(ExactError::ZeroDenominator);
        }
        Ok(Rational(BigRational::new(numer.into(), denom)))
    }

    /// Panicking shorthand for literals known to be valid.
    pub fn frac(numer: i64, denom: i64) -> Self {
        Self::new(numer, denom).expect("nonzero denominator")
    }

    pub fn integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// `x − ⌊x⌋`, always in `[0, 1)`.
    pub fn frac_part(&self) -> Rational {
        Rational(&self.0 - self.0.floor())
    }

    pub fn abs(&self) -> Rational {
        Rational(self.0.abs())
    }

    pub fn square(&self) -> Rational {
        Rational(&self.0 * &self.0)
    }

    pub fn recip(&self) -> Rational {
        Rational(self.0.recip())
    }

    pub fn max(self, other: Rational) -> Rational {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Rational) -> Rational {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Parity of `⌊x⌋`.
    pub fn floor_is_odd(&self) -> bool {
        self.floor().is_odd()
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::integer(n)
    }
}

impl From<u64> for Rational {
    fn from(n: u64) -> Self {
        Rational::integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

/// Canonical `n/d` form; integers print as `n/1`.
impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

/// Accepts `n/d`, plain integers and decimal literals (`0.02`, `-1.25`).
impl FromStr for Rational {
    type Err = ExactError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || ExactError::Parse(s.to_string());
        if t.is_empty() {
            return Err(bad());
        }
        if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = parse_int(n.trim()).ok_or_else(bad)?;
            let d: BigInt = parse_int(d.trim()).ok_or_else(bad)?;
            return Rational::new(n, d);
        }
        let (neg, body) = match t.as_bytes()[0] {
            b'-' => (true, &t[1..]),
            b'+' => (false, &t[1..]),
            _ => (false, t),
        };
        let (int_part, frac_digits) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_digits.is_empty() {
            return Err(bad());
        }
        let all_digits = |x: &str| x.bytes().all(|b| b.is_ascii_digit());
        if !all_digits(int_part) || !all_digits(frac_digits) {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac_digits}");
        let numer: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().map_err(|_| bad())?
        };
        let denom = num_traits::pow(BigInt::from(10u32), frac_digits.len());
        let numer = if neg { -numer } else { numer };
        Rational::new(numer, denom)
    }
}

fn parse_int(s: &str) -> Option<BigInt> {
    let body = s.strip_prefix(['-', '+']).unwrap_or(s);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<i64> for Rational {
            type Output = Rational;
            fn $method(self, rhs: i64) -> Rational {
                Rational(self.0.$method(BigRational::from_integer(rhs.into())))
            }
        }
        impl<'a> $trait<i64> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: i64) -> Rational {
                Rational((&self.0).$method(BigRational::from_integer(rhs.into())))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl PartialEq<i64> for Rational {
    fn eq(&self, other: &i64) -> bool {
        self.0.is_integer() && *self.0.numer() == BigInt::from(*other)
    }
}

impl PartialOrd<i64> for Rational {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        Some(self.0.cmp(&BigRational::from_integer((*other).into())))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Point {
    pub x: Rational,
    pub y: Rational,
}

impl Point {
    pub fn new(x: Rational, y: Rational) -> Self {
        Point { x, y }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.x.to_f64(), self.y.to_f64())
    }

    pub fn dist_sq(&self, other: &Point) -> Rational {
        (&self.x - &other.x).square() + (&self.y - &other.y).square()
    }

    pub fn midpoint(&self, other: &Point) -> Point {
        Point::new((&self.x + &other.x) / 2, (&self.y + &other.y) / 2)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Directed straight segment with distinct endpoints.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Segment {
    start: Point,
    end: Point,
}

impl Segment {
    pub fn new(start: Point, end: Point) -> Result<Self, ExactError> {
        if start == end {
            return Err(ExactError::DegenerateSegment);
        }
        Ok(Segment { start, end })
    }

    pub fn start(&self) -> &Point {
        &self.start
    }

    pub fn end(&self) -> &Point {
        &self.end
    }

    pub fn reversed(&self) -> Segment {
        Segment {
            start: self.end.clone(),
            end: self.start.clone(),
        }
    }

    /// Same point set, lexicographically smaller endpoint first.
    pub fn canonical(&self) -> Segment {
        if self.end < self.start {
            self.reversed()
        } else {
            self.clone()
        }
    }

    pub fn delta(&self) -> (Rational, Rational) {
        (&self.end.x - &self.start.x, &self.end.y - &self.start.y)
    }

    pub fn length_sq(&self) -> Rational {
        self.start.dist_sq(&self.end)
    }

    /// `dy/dx`, or `None` for a vertical segment.
    pub fn slope(&self) -> Option<Rational> {
        let (dx, dy) = self.delta();
        if dx.is_zero() {
            None
        } else {
            Some(dy / dx)
        }
    }
}

/// Exact squared distance from `pt` to the closed segment.
pub fn point_segment_distance_sq(pt: &Point, seg: &Segment) -> Rational {
    let (dx, dy) = seg.delta();
    let wx = &pt.x - &seg.start.x;
    let wy = &pt.y - &seg.start.y;
    let dot = &wx * &dx + &wy * &dy;
    if !dot.is_positive() {
        return pt.dist_sq(&seg.start);
    }
    let len_sq = seg.length_sq();
    if dot >= len_sq {
        return pt.dist_sq(&seg.end);
    }
    let cross = wx * &dy - wy * &dx;
    cross.square() / len_sq
}

/// Euclidean distance; the square root is the only inexact step.
pub fn point_segment_distance(pt: &Point, seg: &Segment) -> f64 {
    point_segment_distance_sq(pt, seg).to_f64().sqrt()
}

pub fn reflect_across_vertical(pt: &Point, x0: &Rational) -> Point {
    Point::new(x0 * 2 - &pt.x, pt.y.clone())
}

pub fn reflect_across_horizontal(pt: &Point, y0: &Rational) -> Point {
    Point::new(pt.x.clone(), y0 * 2 - &pt.y)
}
