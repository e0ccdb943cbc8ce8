//! Root extraction: rational roots for the exact backend, companion-matrix
//! eigenvalues for the numeric backend.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rug::{Complex, Float};

use super::mp::Mp;
use super::poly::Poly;
use super::rational::Rational;
use super::scalar::Scalar;

const TRIAL_DIVISION_LIMIT: u64 = 1_000_000;
const MAX_DIVISORS: usize = 20_000;

/// All divisors of `n`, or `None` when `n` cannot be factored by trial
/// division below the limit.
fn divisors(n: &BigUint) -> Option<Vec<BigUint>> {
    if n.is_zero() {
        return None;
    }
    let mut rest = n.clone();
    let mut factors: Vec<(BigUint, u32)> = Vec::new();
    let mut d = 2u64;
    while d <= TRIAL_DIVISION_LIMIT {
        let dd = BigUint::from(d);
        if &dd * &dd > rest {
            break;
        }
        let mut e = 0;
        while (&rest % d).is_zero() {
            rest /= d;
            e += 1;
        }
        if e > 0 {
            factors.push((dd, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if !rest.is_one() {
        // no factor below the limit: prime only if below limit^2
        let lim = BigUint::from(TRIAL_DIVISION_LIMIT);
        if rest > &lim * &lim && BigUint::from(d) * BigUint::from(d) <= rest {
            return None;
        }
        factors.push((rest, 1));
    }
    let mut divs = vec![BigUint::one()];
    for (p, e) in factors {
        let mut next = Vec::with_capacity(divs.len() * (e as usize + 1));
        for dv in &divs {
            let mut pk = BigUint::one();
            for _ in 0..=e {
                next.push(dv * &pk);
                pk *= &p;
            }
        }
        divs = next;
        if divs.len() > MAX_DIVISORS {
            return None;
        }
    }
    Some(divs)
}

/// Integer coefficients proportional to `p`.
fn integer_coefficients(p: &Poly<Rational>) -> Vec<BigInt> {
    let l = p
        .coeffs()
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.value().denom()));
    p.coeffs()
        .iter()
        .map(|c| (c.value() * BigRational::from_integer(l.clone())).to_integer())
        .collect()
}

/// Rational roots with multiplicity; `None` unless `p` splits over Q.
pub fn rational_roots(coeffs: &[Rational]) -> Option<Vec<Rational>> {
    let mut p = Poly::from_coeffs(&(), coeffs.to_vec());
    if p.is_zero() {
        return None;
    }
    let mut roots = Vec::new();
    while p.degree() > Some(0) && p.coeff(0).is_exact_zero() {
        roots.push(Rational::int(0));
        p = Poly::from_coeffs(&(), p.coeffs()[1..].to_vec());
    }
    'outer: while p.degree() > Some(0) {
        let ints = integer_coefficients(&p);
        let a0 = ints[0].abs().to_biguint()?;
        let an = ints.last()?.abs().to_biguint()?;
        let (dp, dq) = (divisors(&a0)?, divisors(&an)?);
        let mut candidates = BTreeSet::new();
        for num in &dp {
            for den in &dq {
                let c = BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()));
                candidates.insert(c.clone());
                candidates.insert(-c);
            }
        }
        for c in candidates {
            let r = Rational(c);
            let (q, rem) = p.deflate(&r);
            if rem.is_exact_zero() {
                roots.push(r);
                p = q;
                continue 'outer;
            }
        }
        return None;
    }
    Some(roots)
}

struct Work {
    prec: u32,
}

impl Work {
    fn c(&self) -> Complex {
        Complex::new(self.prec)
    }

    fn abs1(&self, z: &Complex) -> Float {
        let mut a = Float::with_val(self.prec, z.real().abs_ref());
        a += Float::with_val(self.prec, z.imag().abs_ref());
        a
    }

    fn mul(&self, a: &Complex, b: &Complex) -> Complex {
        Complex::with_val(self.prec, a * b)
    }

    fn conj(&self, a: &Complex) -> Complex {
        Complex::with_val(self.prec, a.conj_ref())
    }

    fn eig2(&self, a: &Complex, b: &Complex, c: &Complex, d: &Complex) -> (Complex, Complex) {
        let m = Complex::with_val(self.prec, a + d) / 2u32;
        let h = Complex::with_val(self.prec, a - d) / 2u32;
        let disc = Complex::with_val(self.prec, &h * &h) + self.mul(b, c);
        let s = disc.sqrt();
        (Complex::with_val(self.prec, &m + &s), Complex::with_val(self.prec, &m - &s))
    }

    /// Eigenvalues of an upper Hessenberg matrix by single-shift complex QR
    /// with Wilkinson shifts and occasional exceptional shifts.
    fn hessenberg_eigenvalues(&self, mut h: Vec<Complex>, n: usize) -> Option<Vec<Complex>> {
        let at = |i: usize, j: usize| i * n + j;
        let eps = Float::with_val(self.prec, Float::i_exp(1, -(self.prec as i32 - 8)));
        let hnorm = h.iter().map(|z| self.abs1(z)).fold(Float::new(self.prec), |a, b| a.max(&b));
        let tiny = Float::with_val(self.prec, &eps * &eps) * &hnorm;
        let mut eig = vec![self.c(); n];
        let mut hi = n - 1;
        let mut iter = 0usize;
        let mut total = 0usize;
        loop {
            if hi == 0 {
                eig[0] = h[0].clone();
                break;
            }
            let mut l = hi;
            while l > 0 {
                let s = self.abs1(&h[at(l, l - 1)]);
                let t = self.abs1(&h[at(l - 1, l - 1)]) + self.abs1(&h[at(l, l)]);
                if s <= Float::with_val(self.prec, &eps * &t) || s <= tiny {
                    h[at(l, l - 1)] = self.c();
                    break;
                }
                l -= 1;
            }
            if l == hi {
                eig[hi] = h[at(hi, hi)].clone();
                hi -= 1;
                iter = 0;
                continue;
            }
            if l + 1 == hi {
                let (e1, e2) = self.eig2(
                    &h[at(l, l)],
                    &h[at(l, hi)],
                    &h[at(hi, l)],
                    &h[at(hi, hi)],
                );
                eig[l] = e1;
                eig[hi] = e2;
                if l == 0 {
                    break;
                }
                hi = l - 1;
                iter = 0;
                continue;
            }
            iter += 1;
            total += 1;
            if total > 100 * n {
                return None;
            }
            let d = &h[at(hi, hi)];
            let mu = if iter % 11 == 0 {
                let sub = Float::with_val(self.prec, h[at(hi, hi - 1)].abs_ref());
                let bump = Complex::with_val(self.prec, (&sub * 0.75f64, &sub * 0.5f64));
                Complex::with_val(self.prec, d + &bump)
            } else {
                let (e1, e2) = self.eig2(
                    &h[at(hi - 1, hi - 1)],
                    &h[at(hi - 1, hi)],
                    &h[at(hi, hi - 1)],
                    d,
                );
                let d1 = self.abs1(&Complex::with_val(self.prec, &e1 - d));
                let d2 = self.abs1(&Complex::with_val(self.prec, &e2 - d));
                if d1 <= d2 {
                    e1
                } else {
                    e2
                }
            };
            for k in l..=hi {
                h[at(k, k)] -= &mu;
            }
            let mut rots: Vec<Option<(Complex, Complex)>> = Vec::with_capacity(hi - l);
            for k in l..hi {
                let x = h[at(k, k)].clone();
                let y = h[at(k + 1, k)].clone();
                let nx = Float::with_val(self.prec, x.norm_ref());
                let ny = Float::with_val(self.prec, y.norm_ref());
                let r = Float::with_val(self.prec, &nx + &ny).sqrt();
                if r.is_zero() {
                    rots.push(None);
                    continue;
                }
                let c = Complex::with_val(self.prec, &x / &r);
                let s = Complex::with_val(self.prec, &y / &r);
                let (cc, sc) = (self.conj(&c), self.conj(&s));
                for j in k..=hi {
                    let a = h[at(k, j)].clone();
                    let b = h[at(k + 1, j)].clone();
                    h[at(k, j)] = self.mul(&cc, &a) + self.mul(&sc, &b);
                    h[at(k + 1, j)] = self.mul(&c, &b) - self.mul(&s, &a);
                }
                rots.push(Some((c, s)));
            }
            for k in l..hi {
                let Some((c, s)) = &rots[k - l] else { continue };
                let (cc, sc) = (self.conj(c), self.conj(s));
                for i in l..=(k + 2).min(hi) {
                    let a = h[at(i, k)].clone();
                    let b = h[at(i, k + 1)].clone();
                    h[at(i, k)] = self.mul(&a, c) + self.mul(&b, s);
                    h[at(i, k + 1)] = self.mul(&b, &cc) - self.mul(&a, &sc);
                }
            }
            for k in l..=hi {
                h[at(k, k)] += &mu;
            }
        }
        Some(eig)
    }

    fn horner(&self, coeffs: &[Complex], x: &Complex) -> (Complex, Complex) {
        let mut p = self.c();
        let mut dp = self.c();
        for c in coeffs.iter().rev() {
            dp = self.mul(&dp, x) + &p;
            p = self.mul(&p, x) + c;
        }
        (p, dp)
    }

    /// Newton polish, kept only if it stays well inside the basin of `x0`.
    fn polish(&self, coeffs: &[Complex], x0: &Complex, radius: &Float) -> Complex {
        let mut x = x0.clone();
        for _ in 0..8 {
            let (p, dp) = self.horner(coeffs, &x);
            if dp.real().is_zero() && dp.imag().is_zero() {
                break;
            }
            let step = Complex::with_val(self.prec, &p / &dp);
            let small = self.abs1(&step);
            x -= &step;
            if small.is_zero() || small < Float::with_val(self.prec, Float::i_exp(1, -(self.prec as i32))) {
                break;
            }
        }
        let moved = self.abs1(&Complex::with_val(self.prec, &x - x0));
        if moved.is_finite() && moved < *radius {
            x
        } else {
            x0.clone()
        }
    }
}

/// Complex roots with multiplicity via companion-matrix eigenvalues, each
/// followed by a Newton polish on the polynomial itself.
pub fn complex_roots(coeffs: &[Mp]) -> Option<Vec<Mp>> {
    let ctx = coeffs.first()?.ctx();
    let mut cs: Vec<Mp> = coeffs.to_vec();
    while cs.last().is_some_and(|c| c.is_exact_zero()) {
        cs.pop();
    }
    if cs.is_empty() {
        return None;
    }
    let mut roots = Vec::new();
    while cs.len() > 1 && cs[0].is_exact_zero() {
        roots.push(Mp::zero(&ctx));
        cs.remove(0);
    }
    let n = cs.len() - 1;
    if n == 0 {
        return Some(roots);
    }
    if n == 1 {
        roots.push(cs[0].neg().div(&cs[1])?);
        return Some(roots);
    }
    let w = Work { prec: ctx.prec + 32 };
    // balance with z = s*y, s a power of two near |c0/cn|^(1/n)
    let ratio = cs[0].abs_float() / cs[n].abs_float();
    let log2s = (ratio.log2().to_f64() / n as f64).round() as i32;
    let mut scaled: Vec<Complex> = Vec::with_capacity(n + 1);
    for (k, c) in cs.iter().enumerate() {
        let mut v = Complex::with_val(w.prec, c.value());
        v <<= log2s * k as i32;
        scaled.push(v);
    }
    let lead = scaled[n].clone();
    let mut h = vec![w.c(); n * n];
    for i in 1..n {
        h[i * n + i - 1] = Complex::with_val(w.prec, 1);
    }
    for i in 0..n {
        h[i * n + n - 1] = -Complex::with_val(w.prec, &scaled[i] / &lead);
    }
    let eig = w.hessenberg_eigenvalues(h, n)?;
    let orig: Vec<Complex> = cs.iter().map(|c| Complex::with_val(w.prec, c.value())).collect();
    for (i, e) in eig.iter().enumerate() {
        let mut z = e.clone();
        z <<= log2s;
        let mut radius = Float::with_val(w.prec, f64::INFINITY);
        for (j, f) in eig.iter().enumerate() {
            if i != j {
                let mut fz = f.clone();
                fz <<= log2s;
                let d = w.abs1(&Complex::with_val(w.prec, &fz - &z)) / 4u32;
                if d < radius {
                    radius = d;
                }
            }
        }
        let x = w.polish(&orig, &z, &radius);
        if !x.real().is_finite() || !x.imag().is_finite() {
            return None;
        }
        roots.push(Mp::from_complex(ctx, x));
    }
    Some(roots)
}
