//! Numeric backend: complex numbers at a configurable binary precision.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use rand::Rng;
use rug::float::Constant;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use super::scalar::{Literal, LiteralError, Scalar};

/// Precision and tolerances carried by every numeric value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NumCtx {
    /// Mantissa bits.
    pub prec: u32,
    /// Comparison tolerance `tau = 2^-tol_bits`, relative.
    pub tol_bits: u32,
    /// Root separation tolerance `2^-root_tol_bits`.
    pub root_tol_bits: u32,
}

impl Default for NumCtx {
    fn default() -> Self {
        Self { prec: 256, tol_bits: 160, root_tol_bits: 80 }
    }
}

impl NumCtx {
    pub fn with_prec(prec: u32) -> Self {
        // keep the default headroom ratios when only the precision changes
        Self { prec, tol_bits: prec * 5 / 8, root_tol_bits: prec * 5 / 16 }
    }

    pub fn tol(&self) -> f64 {
        (-(self.tol_bits as f64)).exp2()
    }

    pub fn root_tol(&self) -> f64 {
        (-(self.root_tol_bits as f64)).exp2()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mp {
    v: Complex,
    ctx: NumCtx,
}

impl Mp {
    pub fn from_complex(ctx: NumCtx, v: Complex) -> Self {
        Self { v: Complex::with_val(ctx.prec, v), ctx }
    }

    pub fn from_parts(ctx: NumCtx, re: f64, im: f64) -> Self {
        Self { v: Complex::with_val(ctx.prec, (re, im)), ctx }
    }

    pub fn from_floats(ctx: NumCtx, re: &Float, im: &Float) -> Self {
        Self { v: Complex::with_val(ctx.prec, (re, im)), ctx }
    }

    pub fn value(&self) -> &Complex {
        &self.v
    }

    pub fn real(&self) -> &Float {
        self.v.real()
    }

    pub fn imag(&self) -> &Float {
        self.v.imag()
    }

    pub fn abs_float(&self) -> Float {
        Float::with_val(self.ctx.prec, self.v.abs_ref())
    }

    pub fn sqrt(&self) -> Self {
        Self { v: Complex::with_val(self.ctx.prec, self.v.sqrt_ref()), ctx: self.ctx }
    }

    pub fn conj(&self) -> Self {
        Self { v: Complex::with_val(self.ctx.prec, self.v.conj_ref()), ctx: self.ctx }
    }

    /// `|re| + |im|`, cheaper than the modulus and within a factor sqrt(2).
    pub fn abs1(&self) -> Float {
        let mut a = Float::with_val(self.ctx.prec, self.v.real().abs_ref());
        a += Float::with_val(self.ctx.prec, self.v.imag().abs_ref());
        a
    }

    /// `exp(i theta)`.
    pub fn cis(ctx: NumCtx, theta: &Float) -> Self {
        let (s, c) = Float::with_val(ctx.prec, theta).sin_cos(Float::new(ctx.prec));
        Self { v: Complex::with_val(ctx.prec, (c, s)), ctx }
    }

    /// `2^e` for a real exponent.
    pub fn exp2(ctx: NumCtx, e: &Float) -> Self {
        let v = Float::with_val(ctx.prec, e.exp2_ref());
        Self { v: Complex::with_val(ctx.prec, (v, 0)), ctx }
    }

    pub fn pi(ctx: NumCtx) -> Float {
        Float::with_val(ctx.prec, Constant::Pi)
    }

    fn wrap(&self, v: Complex) -> Self {
        Self { v, ctx: self.ctx }
    }

    fn parse_component(ctx: &NumCtx, s: &str) -> Result<Float, LiteralError> {
        let s = s.trim();
        if s.contains('/') {
            let q = rug::Rational::from_str(s).map_err(|_| LiteralError::Malformed(s.into()))?;
            return Ok(Float::with_val(ctx.prec, &q));
        }
        let parsed = Float::parse(s).map_err(|_| LiteralError::Malformed(s.into()))?;
        let f = Float::with_val(ctx.prec, parsed);
        if f.is_finite() {
            Ok(f)
        } else {
            Err(LiteralError::Malformed(s.into()))
        }
    }

    fn float_to_string(f: &Float) -> String {
        if f.is_zero() {
            "0".to_string()
        } else {
            f.to_string_radix(10, None)
        }
    }
}

fn to_rug_rational(q: &BigRational) -> rug::Rational {
    let n = rug::Integer::from_str_radix(&q.numer().to_str_radix(16), 16).expect("hex integer");
    let d = rug::Integer::from_str_radix(&q.denom().to_str_radix(16), 16).expect("hex integer");
    rug::Rational::from((n, d))
}

impl fmt::Display for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = Some(f.precision().unwrap_or(20));
        if self.v.imag().is_zero() {
            write!(f, "{}", self.v.real().to_string_radix(10, digits))
        } else {
            write!(
                f,
                "[{}, {}]",
                self.v.real().to_string_radix(10, digits),
                self.v.imag().to_string_radix(10, digits)
            )
        }
    }
}

impl Scalar for Mp {
    type Ctx = NumCtx;

    const EXACT: bool = false;
    const NAME: &'static str = "numeric";

    fn ctx(&self) -> NumCtx {
        self.ctx
    }

    fn zero(ctx: &NumCtx) -> Self {
        Self { v: Complex::new(ctx.prec), ctx: *ctx }
    }

    fn one(ctx: &NumCtx) -> Self {
        Self::from_i64(ctx, 1)
    }

    fn from_i64(ctx: &NumCtx, n: i64) -> Self {
        Self { v: Complex::with_val(ctx.prec, n), ctx: *ctx }
    }

    fn from_rational(ctx: &NumCtx, q: &BigRational) -> Self {
        let r = to_rug_rational(q);
        Self { v: Complex::with_val(ctx.prec, (&r, 0)), ctx: *ctx }
    }

    fn from_gaussian(ctx: &NumCtx, re: &BigRational, im: &BigRational) -> Option<Self> {
        let (r, i) = (to_rug_rational(re), to_rug_rational(im));
        Some(Self { v: Complex::with_val(ctx.prec, (&r, &i)), ctx: *ctx })
    }

    fn from_f64(ctx: &NumCtx, x: f64) -> Self {
        Self::from_parts(*ctx, x, 0.0)
    }

    fn add(&self, o: &Self) -> Self {
        self.wrap(Complex::with_val(self.ctx.prec, &self.v + &o.v))
    }

    fn sub(&self, o: &Self) -> Self {
        self.wrap(Complex::with_val(self.ctx.prec, &self.v - &o.v))
    }

    fn mul(&self, o: &Self) -> Self {
        self.wrap(Complex::with_val(self.ctx.prec, &self.v * &o.v))
    }

    fn neg(&self) -> Self {
        self.wrap(Complex::with_val(self.ctx.prec, -&self.v))
    }

    fn inv(&self) -> Option<Self> {
        if self.is_exact_zero() {
            None
        } else {
            Some(self.wrap(Complex::with_val(self.ctx.prec, self.v.recip_ref())))
        }
    }

    fn div(&self, o: &Self) -> Option<Self> {
        if o.is_exact_zero() {
            None
        } else {
            Some(self.wrap(Complex::with_val(self.ctx.prec, &self.v / &o.v)))
        }
    }

    fn mul_i64(&self, n: i64) -> Self {
        self.wrap(Complex::with_val(self.ctx.prec, &self.v * n))
    }

    fn is_exact_zero(&self) -> bool {
        self.v.real().is_zero() && self.v.imag().is_zero()
    }

    fn is_zero(&self) -> bool {
        self.abs() <= self.ctx.tol()
    }

    fn abs(&self) -> f64 {
        self.abs_float().to_f64()
    }

    fn tolerance(ctx: &NumCtx) -> f64 {
        ctx.tol()
    }

    fn root_tolerance(ctx: &NumCtx) -> f64 {
        ctx.root_tol()
    }

    fn approx_eq(&self, o: &Self) -> bool {
        let d = self.sub(o).abs();
        d <= self.ctx.tol() * 1f64.max(self.abs()).max(o.abs())
    }

    fn random<R: Rng + ?Sized>(ctx: &NumCtx, rng: &mut R, scale: f64) -> Self {
        let re = rng.random_range(-1.0..=1.0) * scale;
        let im = rng.random_range(-1.0..=1.0) * scale;
        Self::from_parts(*ctx, re, im)
    }

    fn canonical_cmp(&self, o: &Self) -> Ordering {
        self.v
            .real()
            .partial_cmp(o.v.real())
            .unwrap_or(Ordering::Equal)
            .then_with(|| self.v.imag().partial_cmp(o.v.imag()).unwrap_or(Ordering::Equal))
    }

    fn re_f64(&self) -> f64 {
        self.v.real().to_f64()
    }

    fn im_f64(&self) -> f64 {
        self.v.imag().to_f64()
    }

    fn to_literal(&self) -> Literal {
        let re = Self::float_to_string(self.v.real());
        if self.v.imag().is_zero() {
            Literal::Real(re)
        } else {
            Literal::Complex([re, Self::float_to_string(self.v.imag())])
        }
    }

    fn from_literal(ctx: &NumCtx, lit: &Literal) -> Result<Self, LiteralError> {
        let (re, im) = match lit {
            Literal::Real(s) => (Self::parse_component(ctx, s)?, Float::new(ctx.prec)),
            Literal::Complex([r, i]) => (Self::parse_component(ctx, r)?, Self::parse_component(ctx, i)?),
        };
        Ok(Self::from_floats(*ctx, &re, &im))
    }

    fn poly_roots(coeffs: &[Self]) -> Option<Vec<Self>> {
        super::roots::complex_roots(coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_round_trip_full_precision() {
        let ctx = NumCtx::default();
        let third = Mp::from_i64(&ctx, 1).div(&Mp::from_i64(&ctx, 3)).unwrap();
        let x = third.add(&Mp::from_parts(ctx, 0.0, -2.5));
        let back = Mp::from_literal(&ctx, &x.to_literal()).unwrap();
        assert_eq!(back, x);
        let z = Mp::zero(&ctx);
        assert_eq!(Mp::from_literal(&ctx, &z.to_literal()).unwrap(), z);
    }

    #[test]
    fn literal_accepts_rational_and_exponent_forms() {
        let ctx = NumCtx::default();
        let a = Mp::from_literal(&ctx, &Literal::real("-1/2")).unwrap();
        assert!(a.approx_eq(&Mp::from_parts(ctx, -0.5, 0.0)));
        let b = Mp::from_literal(&ctx, &Literal::real("1.25e-3")).unwrap();
        assert!(b.approx_eq(&Mp::from_literal(&ctx, &Literal::real("1/800")).unwrap()));
        assert!(Mp::from_literal(&ctx, &Literal::real("nope")).is_err());
    }

    #[test]
    fn tolerance_model() {
        let ctx = NumCtx::default();
        let one = Mp::one(&ctx);
        let tiny = Mp::exp2(ctx, &Float::with_val(64, -200));
        assert!(one.add(&tiny).approx_eq(&one));
        assert!(tiny.is_zero());
        assert!(!tiny.is_exact_zero());
        let small = Mp::exp2(ctx, &Float::with_val(64, -100));
        assert!(!one.add(&small).approx_eq(&one));
    }
}
