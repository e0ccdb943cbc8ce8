//! Dense univariate polynomials, lowest degree first.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use super::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("zero polynomial where a nonzero one is required")]
    ZeroPolynomial,
    #[error("root extraction failed for a degree {0} polynomial")]
    RootsUnavailable(usize),
}

/// A polynomial in `z`. The zero polynomial has no coefficients and no
/// degree; arithmetic only ever drops exactly-zero leading terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<S: Scalar> {
    coeffs: Vec<S>,
    ctx: S::Ctx,
}

impl<S: Scalar> Poly<S> {
    pub fn zero(ctx: &S::Ctx) -> Self {
        Self { coeffs: Vec::new(), ctx: ctx.clone() }
    }

    pub fn one(ctx: &S::Ctx) -> Self {
        Self::constant(S::one(ctx))
    }

    pub fn constant(c: S) -> Self {
        let ctx = c.ctx();
        Self::from_coeffs(&ctx, vec![c])
    }

    /// The monomial `c z^k`.
    pub fn monomial(c: S, k: usize) -> Self {
        let ctx = c.ctx();
        let mut coeffs = vec![S::zero(&ctx); k];
        coeffs.push(c);
        Self::from_coeffs(&ctx, coeffs)
    }

    /// `z - a`.
    pub fn linear(a: &S) -> Self {
        let ctx = a.ctx();
        Self { coeffs: vec![a.neg(), S::one(&ctx)], ctx }
    }

    pub fn from_coeffs(ctx: &S::Ctx, mut coeffs: Vec<S>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_exact_zero()) {
            coeffs.pop();
        }
        Self { coeffs, ctx: ctx.clone() }
    }

    pub fn from_i64s(ctx: &S::Ctx, coeffs: &[i64]) -> Self {
        Self::from_coeffs(ctx, coeffs.iter().map(|&c| S::from_i64(ctx, c)).collect())
    }

    /// `lead * prod (z - r)` over the multiset `roots`.
    pub fn from_roots(ctx: &S::Ctx, roots: &[S], lead: &S) -> Self {
        let mut coeffs = vec![lead.clone()];
        for r in roots {
            // multiply by (z - r) in place
            coeffs.push(S::zero(ctx));
            for k in (0..coeffs.len()).rev() {
                let shifted = if k > 0 { coeffs[k - 1].clone() } else { S::zero(ctx) };
                coeffs[k] = shifted.sub(&coeffs[k].mul(r));
            }
        }
        Self::from_coeffs(ctx, coeffs)
    }

    pub fn ctx(&self) -> &S::Ctx {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    /// Coefficient of `z^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> S {
        self.coeffs.get(k).cloned().unwrap_or_else(|| S::zero(&self.ctx))
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial mapped to `-1`.
    pub fn degree_i64(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn lead(&self) -> Option<&S> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.lead().is_some_and(|c| c.is_one())
    }

    /// Divides out the leading coefficient.
    pub fn monic(&self) -> Option<Self> {
        let inv = self.lead()?.inv()?;
        let mut p = self.scale(&inv);
        if let Some(last) = p.coeffs.last_mut() {
            *last = S::one(&self.ctx);
        }
        Some(p)
    }

    pub fn scale(&self, c: &S) -> Self {
        Self::from_coeffs(&self.ctx, self.coeffs.iter().map(|a| a.mul(c)).collect())
    }

    pub fn deriv(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.mul_i64(k as i64))
            .collect();
        Self::from_coeffs(&self.ctx, coeffs)
    }

    pub fn eval(&self, x: &S) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(&self.ctx), |acc, c| acc.mul(x).add(c))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(&self.ctx);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Euclidean division; `None` if `d` is zero.
    pub fn divrem(&self, d: &Self) -> Option<(Self, Self)> {
        let dl = d.lead()?.inv()?;
        let dd = d.coeffs.len() - 1;
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return Some((Self::zero(&self.ctx), self.clone()));
        }
        let mut q = vec![S::zero(&self.ctx); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = r[k + dd].mul(&dl);
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k + j] = r[k + j].sub(&c.mul(dc));
            }
            // the leading term cancels by construction
            r[k + dd] = S::zero(&self.ctx);
            q[k] = c;
        }
        r.truncate(dd);
        Some((Self::from_coeffs(&self.ctx, q), Self::from_coeffs(&self.ctx, r)))
    }

    /// Quotient when `d` divides `self` (exactly, or up to tolerance relative
    /// to the size of `self` in numeric backends).
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let (q, r) = self.divrem(d)?;
        r.is_negligible(self.norm().max(1.0)).then_some(q)
    }

    /// `self / (z - a)`, dropping the remainder; returns (quotient, remainder).
    pub fn deflate(&self, a: &S) -> (Self, S) {
        if self.coeffs.is_empty() {
            return (self.clone(), S::zero(&self.ctx));
        }
        let n = self.coeffs.len();
        let mut q = vec![S::zero(&self.ctx); n - 1];
        let mut carry = self.coeffs[n - 1].clone();
        for k in (0..n - 1).rev() {
            q[k] = carry.clone();
            carry = self.coeffs[k].add(&carry.mul(a));
        }
        (Self::from_coeffs(&self.ctx, q), carry)
    }

    /// Monic gcd by the Euclidean algorithm. Meaningful for exact backends;
    /// numeric callers should compare roots instead.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.divrem(&b).expect("nonzero divisor");
            let r = if S::EXACT { r } else { r.trim_tol(b.norm()) };
            a = b;
            b = r;
        }
        a.monic().unwrap_or(a)
    }

    /// Max modulus of the coefficients (0 for the zero polynomial).
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max)
    }

    /// True when every coefficient is negligible relative to `scale`.
    pub fn is_negligible(&self, scale: f64) -> bool {
        self.coeffs.iter().all(|c| c.is_negligible(scale))
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).all(|k| self.coeff(k).approx_eq(&other.coeff(k)))
    }

    /// Drops leading coefficients negligible relative to `scale`, logging
    /// a warning whenever the degree changes.
    pub fn trim_tol(&self, scale: f64) -> Self {
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.is_negligible(scale.max(1.0))) {
            coeffs.pop();
        }
        if coeffs.len() != self.coeffs.len() {
            log::warn!(
                "trimmed polynomial from degree {} to {}",
                self.degree_i64(),
                coeffs.len() as i64 - 1
            );
        }
        Self::from_coeffs(&self.ctx, coeffs)
    }

    /// Roots with multiplicity, if the backend can produce them.
    pub fn roots(&self) -> Result<Vec<S>, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        S::poly_roots(&self.coeffs).ok_or(PolyError::RootsUnavailable(self.coeffs.len() - 1))
    }
}

/// `W(p, q) = p q' - q p'`.
pub fn wronskian<S: Scalar>(p: &Poly<S>, q: &Poly<S>) -> Poly<S> {
    &(p * &q.deriv()) - &(q * &p.deriv())
}

/// The polynomial `h` with `h' + xi h = p`.
///
/// For `xi != 0` this is the unique polynomial solution, found by
/// back-substitution from the top coefficient. For `xi = 0` it is the
/// antiderivative with zero constant term.
pub fn solve_linear_ode<S: Scalar>(xi: &S, p: &Poly<S>) -> Poly<S> {
    let ctx = p.ctx().clone();
    let Some(n) = p.degree() else {
        return Poly::zero(&ctx);
    };
    if xi.is_zero() {
        let mut coeffs = vec![S::zero(&ctx)];
        for (k, c) in p.coeffs().iter().enumerate() {
            let q = S::from_i64(&ctx, k as i64 + 1);
            coeffs.push(c.div(&q).expect("nonzero integer"));
        }
        return Poly::from_coeffs(&ctx, coeffs);
    }
    let xinv = xi.inv().expect("nonzero pairing");
    let mut h = vec![S::zero(&ctx); n + 1];
    h[n] = p.coeff(n).mul(&xinv);
    for k in (0..n).rev() {
        h[k] = p.coeff(k).sub(&h[k + 1].mul_i64(k as i64 + 1)).mul(&xinv);
    }
    Poly::from_coeffs(&ctx, h)
}

/// `lead * prod (z - r)`.
pub fn poly_from_roots<S: Scalar>(ctx: &S::Ctx, roots: &[S], lead: &S) -> Poly<S> {
    Poly::from_roots(ctx, roots, lead)
}

fn pairwise_separated<S: Scalar>(a: &[S], b: Option<&[S]>, tol: f64) -> bool {
    match b {
        None => a
            .iter()
            .enumerate()
            .all(|(i, x)| a[i + 1..].iter().all(|y| x.sub(y).abs() > tol)),
        Some(b) => a.iter().all(|x| b.iter().all(|y| x.sub(y).abs() > tol)),
    }
}

/// No repeated roots: `gcd(p, p')` constant (exact), or all pairwise root
/// distances above the root tolerance (numeric).
pub fn distinct_roots_check<S: Scalar>(p: &Poly<S>) -> Result<bool, PolyError> {
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    if S::EXACT {
        return Ok(p.gcd(&p.deriv()).is_constant());
    }
    if p.degree() < Some(2) {
        return Ok(true);
    }
    let roots = p.roots()?;
    Ok(pairwise_separated(&roots, None, S::root_tolerance(p.ctx())))
}

/// No common root between `p` and `q`.
pub fn coprime_check<S: Scalar>(p: &Poly<S>, q: &Poly<S>) -> Result<bool, PolyError> {
    if p.is_zero() || q.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    if S::EXACT {
        return Ok(p.gcd(q).is_constant());
    }
    if p.is_constant() || q.is_constant() {
        return Ok(true);
    }
    let (rp, rq) = (p.roots()?, q.roots()?);
    Ok(pairwise_separated(&rp, Some(&rq), S::root_tolerance(p.ctx())))
}

impl<S: Scalar> Add for &Poly<S> {
    type Output = Poly<S>;

    fn add(self, o: &Poly<S>) -> Poly<S> {
        let n = self.coeffs.len().max(o.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k).add(&o.coeff(k))).collect();
        Poly::from_coeffs(&self.ctx, coeffs)
    }
}

impl<S: Scalar> Sub for &Poly<S> {
    type Output = Poly<S>;

    fn sub(self, o: &Poly<S>) -> Poly<S> {
        let n = self.coeffs.len().max(o.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k).sub(&o.coeff(k))).collect();
        Poly::from_coeffs(&self.ctx, coeffs)
    }
}

impl<S: Scalar> Mul for &Poly<S> {
    type Output = Poly<S>;

    fn mul(self, o: &Poly<S>) -> Poly<S> {
        if self.is_zero() || o.is_zero() {
            return Poly::zero(&self.ctx);
        }
        let mut coeffs = vec![S::zero(&self.ctx); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
            }
        }
        Poly::from_coeffs(&self.ctx, coeffs)
    }
}

impl<S: Scalar> Neg for &Poly<S> {
    type Output = Poly<S>;

    fn neg(self) -> Poly<S> {
        Poly::from_coeffs(&self.ctx, self.coeffs.iter().map(|c| c.neg()).collect())
    }
}

impl<S: Scalar> fmt::Display for Poly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_exact_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*z")?,
                _ => write!(f, "({c})*z^{k}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::{Mp, NumCtx, Rational};

    fn p(c: &[i64]) -> Poly<Rational> {
        Poly::from_i64s(&(), c)
    }

    #[test]
    fn wronskian_examples() {
        assert_eq!(wronskian(&p(&[1, 1]), &p(&[1])), p(&[-1]));
        let q = p(&[2, -3, 1]);
        assert!(wronskian(&q, &q).is_zero());
        assert_eq!(wronskian(&p(&[1]), &p(&[0, 1])), p(&[1]));
    }

    #[test]
    fn ode_examples() {
        assert_eq!(solve_linear_ode(&Rational::int(1), &p(&[0, 1])), p(&[-1, 1]));
        assert_eq!(solve_linear_ode(&Rational::int(0), &p(&[1])), p(&[0, 1]));
        assert!(solve_linear_ode(&Rational::int(2), &p(&[])).is_zero());
    }

    #[test]
    fn from_roots_examples() {
        assert_eq!(poly_from_roots(&(), &[Rational::int(0)], &Rational::int(1)), p(&[0, 1]));
        let roots = [Rational::int(1), Rational::int(2)];
        assert_eq!(poly_from_roots(&(), &roots, &Rational::int(1)), p(&[2, -3, 1]));
        assert_eq!(poly_from_roots(&(), &[], &Rational::int(5)), p(&[5]));
    }

    #[test]
    fn root_checks() {
        assert!(!distinct_roots_check(&p(&[0, 0, 1])).unwrap());
        assert!(coprime_check(&p(&[1, 1]), &p(&[1])).unwrap());
        assert!(!coprime_check(&p(&[2, -3, 1]), &p(&[-1, 1])).unwrap());
        assert_eq!(distinct_roots_check(&p(&[])), Err(PolyError::ZeroPolynomial));
    }

    #[test]
    fn numeric_root_checks_agree() {
        let ctx = NumCtx::default();
        let n = |c: &[i64]| Poly::<Mp>::from_i64s(&ctx, c);
        assert!(!distinct_roots_check(&n(&[0, 0, 1])).unwrap());
        assert!(distinct_roots_check(&n(&[2, -3, 1])).unwrap());
        assert!(coprime_check(&n(&[1, 1]), &n(&[1])).unwrap());
        assert!(!coprime_check(&n(&[2, -3, 1]), &n(&[-1, 1])).unwrap());
    }

    #[test]
    fn division() {
        let a = p(&[2, -3, 1]);
        let (q, r) = a.divrem(&p(&[-1, 1])).unwrap();
        assert_eq!(q, p(&[-2, 1]));
        assert!(r.is_zero());
        let (q2, rem) = a.deflate(&Rational::int(3));
        assert_eq!(q2, p(&[0, 1]));
        assert_eq!(rem, Rational::int(2));
        assert_eq!(a.gcd(&p(&[-2, 1])), p(&[-2, 1]));
    }
}
