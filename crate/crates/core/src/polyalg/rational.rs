//! Exact backend: rationals with unbounded numerators and denominators.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use super::scalar::{parse_rational, rational_abs_f64, rational_to_string, Literal, LiteralError, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(pub BigRational);

impl Rational {
    pub fn new(n: i64, d: i64) -> Self {
        Rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn parse(s: &str) -> Option<Self> {
        parse_rational(s).map(Rational)
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&rational_to_string(&self.0))
    }
}

impl Scalar for Rational {
    type Ctx = ();

    const EXACT: bool = true;
    const NAME: &'static str = "exact";

    fn ctx(&self) {}

    fn zero(_: &()) -> Self {
        Rational(BigRational::zero())
    }

    fn one(_: &()) -> Self {
        Rational(BigRational::one())
    }

    fn from_i64(_: &(), n: i64) -> Self {
        Rational::int(n)
    }

    fn from_rational(_: &(), q: &BigRational) -> Self {
        Rational(q.clone())
    }

    fn from_gaussian(_: &(), re: &BigRational, im: &BigRational) -> Option<Self> {
        im.is_zero().then(|| Rational(re.clone()))
    }

    fn add(&self, o: &Self) -> Self {
        Rational(&self.0 + &o.0)
    }

    fn sub(&self, o: &Self) -> Self {
        Rational(&self.0 - &o.0)
    }

    fn mul(&self, o: &Self) -> Self {
        Rational(&self.0 * &o.0)
    }

    fn neg(&self) -> Self {
        Rational(-&self.0)
    }

    fn inv(&self) -> Option<Self> {
        (!self.0.is_zero()).then(|| Rational(self.0.recip()))
    }

    fn mul_i64(&self, n: i64) -> Self {
        Rational(&self.0 * BigInt::from(n))
    }

    fn is_exact_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn is_one(&self) -> bool {
        self.0.is_one()
    }

    fn abs(&self) -> f64 {
        rational_abs_f64(&self.0)
    }

    fn tolerance(_: &()) -> f64 {
        0.0
    }

    fn root_tolerance(_: &()) -> f64 {
        0.0
    }

    fn approx_eq(&self, o: &Self) -> bool {
        self == o
    }

    fn random<R: Rng + ?Sized>(_: &(), rng: &mut R, scale: f64) -> Self {
        let den: i64 = rng.random_range(1..=16);
        let bound = ((scale * den as f64).floor() as i64).max(1);
        let num: i64 = rng.random_range(-bound..=bound);
        Rational::new(num, den)
    }

    fn canonical_cmp(&self, o: &Self) -> Ordering {
        self.0.cmp(&o.0)
    }

    fn re_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(if self.0.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
    }

    fn im_f64(&self) -> f64 {
        0.0
    }

    fn to_literal(&self) -> Literal {
        Literal::Real(rational_to_string(&self.0))
    }

    fn from_literal(_: &(), lit: &Literal) -> Result<Self, LiteralError> {
        match lit {
            Literal::Real(s) => Rational::parse(s).ok_or_else(|| LiteralError::Malformed(s.clone())),
            Literal::Complex([re, im]) => {
                let r = parse_rational(re).ok_or_else(|| LiteralError::Malformed(re.clone()))?;
                let i = parse_rational(im).ok_or_else(|| LiteralError::Malformed(im.clone()))?;
                if i.is_zero() {
                    Ok(Rational(r))
                } else {
                    Err(LiteralError::NotReal(lit.to_string()))
                }
            }
        }
    }

    fn poly_roots(coeffs: &[Self]) -> Option<Vec<Self>> {
        super::roots::rational_roots(coeffs)
    }
}
