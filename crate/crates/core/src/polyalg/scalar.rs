//! The field-element contract shared by the exact and multiprecision backends.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LiteralError {
    #[error("malformed scalar literal `{0}`")]
    Malformed(String),
    #[error("complex literal `{0}` is not representable in the exact backend")]
    NotReal(String),
}

/// A scalar as it appears in files: a single exact string, or a `[re, im]` pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Real(String),
    Complex([String; 2]),
}

impl Literal {
    pub fn real(s: impl Into<String>) -> Self {
        Literal::Real(s.into())
    }
}

impl From<&str> for Literal {
    fn from(s: &str) -> Self {
        Literal::Real(s.to_string())
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Real(s) => f.write_str(s),
            Literal::Complex([re, im]) => write!(f, "[{re}, {im}]"),
        }
    }
}

/// Field operations plus the tolerance model of a backend.
///
/// Exact backends compare structurally. Numeric backends treat `x` and `y`
/// as equal when `|x - y| <= tau * max(1, |x|, |y|)`.
pub trait Scalar: Clone + fmt::Debug + fmt::Display + PartialEq + Send + Sync + 'static {
    type Ctx: Clone + fmt::Debug + PartialEq + Send + Sync + 'static;

    const EXACT: bool;
    const NAME: &'static str;

    fn ctx(&self) -> Self::Ctx;
    fn zero(ctx: &Self::Ctx) -> Self;
    fn one(ctx: &Self::Ctx) -> Self;
    fn from_i64(ctx: &Self::Ctx, n: i64) -> Self;
    fn from_rational(ctx: &Self::Ctx, q: &BigRational) -> Self;
    /// `re + i*im`; `None` when the backend cannot hold a nonreal value.
    fn from_gaussian(ctx: &Self::Ctx, re: &BigRational, im: &BigRational) -> Option<Self>;

    fn from_f64(ctx: &Self::Ctx, x: f64) -> Self {
        let q = BigRational::from_float(x).unwrap_or_else(BigRational::zero);
        Self::from_rational(ctx, &q)
    }

    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// `None` only for an exact zero.
    fn inv(&self) -> Option<Self>;

    fn div(&self, o: &Self) -> Option<Self> {
        o.inv().map(|i| self.mul(&i))
    }

    fn mul_i64(&self, n: i64) -> Self {
        self.mul(&Self::from_i64(&self.ctx(), n))
    }

    fn pow(&self, mut n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(&self.ctx());
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Integer power; negative exponents invert (None on exact zero).
    fn powi(&self, n: i64) -> Option<Self> {
        let p = self.pow(n.unsigned_abs() as u32);
        if n >= 0 {
            Some(p)
        } else {
            p.inv()
        }
    }

    fn is_exact_zero(&self) -> bool;

    /// Zero up to the backend tolerance (`|x| <= tau`; exact: structural).
    fn is_zero(&self) -> bool;

    fn is_one(&self) -> bool {
        self.approx_eq(&Self::one(&self.ctx()))
    }

    /// Modulus as an `f64`, for reporting and tolerance comparisons.
    fn abs(&self) -> f64;

    fn tolerance(ctx: &Self::Ctx) -> f64;
    fn root_tolerance(ctx: &Self::Ctx) -> f64;

    fn approx_eq(&self, o: &Self) -> bool;

    /// `|x| <= tau * scale` (exact: `x == 0`).
    fn is_negligible(&self, scale: f64) -> bool {
        if Self::EXACT {
            self.is_exact_zero()
        } else {
            self.abs() <= Self::tolerance(&self.ctx()) * scale
        }
    }

    /// A random value with real and imaginary parts in `[-scale, scale]`
    /// (real only for exact backends).
    fn random<R: Rng + ?Sized>(ctx: &Self::Ctx, rng: &mut R, scale: f64) -> Self;

    /// Lexicographic by real part, then imaginary part.
    fn canonical_cmp(&self, o: &Self) -> Ordering;

    fn re_f64(&self) -> f64;
    fn im_f64(&self) -> f64;

    fn to_literal(&self) -> Literal;
    fn from_literal(ctx: &Self::Ctx, lit: &Literal) -> Result<Self, LiteralError>;

    /// Roots with multiplicity of the polynomial with the given coefficients
    /// (lowest degree first). `None` if the backend cannot produce all of
    /// them (exact: the polynomial does not split over Q).
    fn poly_roots(coeffs: &[Self]) -> Option<Vec<Self>>;
}

/// Parses `"3"`, `"-1/2"`, `"1.25e-3"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(digits.parse::<BigInt>().ok()?);
    let shift = exp - frac_part.len() as i64;
    let ten = BigRational::from_integer(BigInt::from(10));
    if shift.unsigned_abs() > 100_000 {
        return None;
    }
    let factor = num_traits::pow(ten, shift.unsigned_abs() as usize);
    value = if shift >= 0 { value * factor } else { value / factor };
    Some(if neg { -value } else { value })
}

pub(crate) fn rational_to_string(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub(crate) fn rational_abs_f64(q: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    q.abs().to_f64().unwrap_or(f64::INFINITY)
}
