//! Rational functions as numerator/denominator pairs.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::poly::Poly;
use super::scalar::Scalar;

/// `num / den` with a monic denominator. In the exact backend the pair is
/// kept reduced; numeric values are only normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFn<S: Scalar> {
    num: Poly<S>,
    den: Poly<S>,
}

impl<S: Scalar> RationalFn<S> {
    pub fn new(num: Poly<S>, den: Poly<S>) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        Some(Self::normalized(num, den))
    }

    fn normalized(num: Poly<S>, den: Poly<S>) -> Self {
        let ctx = den.ctx().clone();
        if num.is_zero() {
            return Self { num, den: Poly::one(&ctx) };
        }
        let (num, den) = if S::EXACT && !den.is_constant() {
            let g = num.gcd(&den);
            if g.is_constant() {
                (num, den)
            } else {
                (num.div_exact(&g).expect("gcd divides"), den.div_exact(&g).expect("gcd divides"))
            }
        } else {
            (num, den)
        };
        let l = den.lead().expect("nonzero").inv().expect("nonzero lead");
        Self { num: num.scale(&l), den: den.monic().expect("nonzero") }
    }

    pub fn from_poly(p: Poly<S>) -> Self {
        let ctx = p.ctx().clone();
        Self { num: p, den: Poly::one(&ctx) }
    }

    pub fn constant(c: S) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn zero(ctx: &S::Ctx) -> Self {
        Self::from_poly(Poly::zero(ctx))
    }

    pub fn one(ctx: &S::Ctx) -> Self {
        Self::from_poly(Poly::one(ctx))
    }

    pub fn num(&self) -> &Poly<S> {
        &self.num
    }

    pub fn den(&self) -> &Poly<S> {
        &self.den
    }

    pub fn ctx(&self) -> &S::Ctx {
        self.den.ctx()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The polynomial this equals, if the denominator is constant.
    pub fn as_poly(&self) -> Option<Poly<S>> {
        self.den.is_constant().then(|| self.num.clone())
    }

    /// `p' / p`.
    pub fn log_derivative(p: &Poly<S>) -> Option<Self> {
        Self::new(p.deriv(), p.clone())
    }

    pub fn inv(&self) -> Option<Self> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &Self) -> Option<Self> {
        o.inv().map(|i| self * &i)
    }

    pub fn scale(&self, c: &S) -> Self {
        Self { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn deriv(&self) -> Self {
        let num = &(&self.num.deriv() * &self.den) - &(&self.num * &self.den.deriv());
        Self::normalized(num, &self.den * &self.den)
    }

    /// `None` at a pole.
    pub fn eval(&self, x: &S) -> Option<S> {
        self.num.eval(x).div(&self.den.eval(x))
    }

    pub fn pow(&self, n: u32) -> Self {
        Self::normalized(self.num.pow(n), self.den.pow(n))
    }

    pub fn powi(&self, n: i64) -> Option<Self> {
        let p = self.pow(n.unsigned_abs() as u32);
        if n >= 0 {
            Some(p)
        } else {
            p.inv()
        }
    }

    /// Zero as a rational function: exact test, or numerator negligible
    /// relative to `scale` in numeric backends.
    pub fn is_negligible(&self, scale: f64) -> bool {
        self.num.is_negligible(scale)
    }
}

impl<S: Scalar> Add for &RationalFn<S> {
    type Output = RationalFn<S>;

    fn add(self, o: &RationalFn<S>) -> RationalFn<S> {
        if self.den == o.den {
            return RationalFn::normalized(&self.num + &o.num, self.den.clone());
        }
        let num = &(&self.num * &o.den) + &(&o.num * &self.den);
        RationalFn::normalized(num, &self.den * &o.den)
    }
}

impl<S: Scalar> Sub for &RationalFn<S> {
    type Output = RationalFn<S>;

    fn sub(self, o: &RationalFn<S>) -> RationalFn<S> {
        self + &(-o)
    }
}

impl<S: Scalar> Mul for &RationalFn<S> {
    type Output = RationalFn<S>;

    fn mul(self, o: &RationalFn<S>) -> RationalFn<S> {
        RationalFn::normalized(&self.num * &o.num, &self.den * &o.den)
    }
}

impl<S: Scalar> Neg for &RationalFn<S> {
    type Output = RationalFn<S>;

    fn neg(self) -> RationalFn<S> {
        RationalFn { num: -&self.num, den: self.den.clone() }
    }
}

impl<S: Scalar> fmt::Display for RationalFn<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_constant() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::Rational;

    fn p(c: &[i64]) -> Poly<Rational> {
        Poly::from_i64s(&(), c)
    }

    #[test]
    fn reduces_and_normalizes() {
        // (z^2 - 1) / (2z - 2) = (z + 1)/2
        let r = RationalFn::new(p(&[-1, 0, 1]), p(&[-2, 2])).unwrap();
        assert_eq!(r.den(), &p(&[1]));
        assert_eq!(r.num(), &Poly::from_coeffs(&(), vec![Rational::new(1, 2), Rational::new(1, 2)]));
        assert!(RationalFn::new(p(&[1]), p(&[])).is_none());
    }

    #[test]
    fn arithmetic_and_derivative() {
        let a = RationalFn::new(p(&[1]), p(&[1, 1])).unwrap();
        let b = RationalFn::new(p(&[1]), p(&[-1, 1])).unwrap();
        let s = &a + &b;
        // 1/(z+1) + 1/(z-1) = 2z/(z^2-1)
        assert_eq!(s.num(), &p(&[0, 2]));
        assert_eq!(s.den(), &p(&[-1, 0, 1]));
        let d = a.deriv();
        assert_eq!(d, RationalFn::new(p(&[-1]), p(&[1, 2, 1])).unwrap());
        assert!((&a - &a).is_zero());
        assert_eq!(a.eval(&Rational::int(-1)), None);
        assert_eq!(a.eval(&Rational::int(1)), Some(Rational::new(1, 2)));
    }
}
