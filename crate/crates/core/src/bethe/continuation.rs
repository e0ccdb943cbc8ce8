//! Homotopy from the infinite-twist solution down to the target twist.
//!
//! Along the twist `t Z^H` put `q-_i = qb_i / (t xi_i)`; the qq-system becomes
//!
//! ```text
//! (1 / (t xi_i)) W(q+_i, qb_i) + q+_i qb_i = Lambda_i prod_{j != i} (q+_j)^(-a_ji)
//! ```
//!
//! which at `1/t = 0` is solved by the infinite partition. The unknowns are
//! the lower coefficients of the monic `q+_i` and of `qb_i` (whose leading
//! coefficient is that of the right-hand side); `t` runs from `2^40` to 1
//! with a small seeded excursion into the complex plane.

use rand::Rng;
use rug::Float;

use super::{solve_newton, BetheError, BetheRoots, InfinitePartition, SolveOptions};
use crate::polyalg::{wronskian, LinalgError, Matrix, Mp, NumCtx, Poly, Scalar};
use crate::qqcore::QQInstance;

const CORRECTOR_ITERATIONS: usize = 8;
const MIN_STEP_BITS: i32 = 20;

struct Layout {
    /// `deg q+_i`.
    d: Vec<usize>,
    /// `deg qb_i`.
    e: Vec<usize>,
    /// Start of color `i` in the unknown (and equation) vector.
    offset: Vec<usize>,
    /// Leading coefficient of `qb_i`.
    lead: Vec<Mp>,
    size: usize,
}

impl Layout {
    fn unpack(&self, ctx: &NumCtx, x: &[Mp]) -> (Vec<Poly<Mp>>, Vec<Poly<Mp>>) {
        let mut qp = Vec::with_capacity(self.d.len());
        let mut qb = Vec::with_capacity(self.d.len());
        for i in 0..self.d.len() {
            let o = self.offset[i];
            let mut c = x[o..o + self.d[i]].to_vec();
            c.push(Mp::one(ctx));
            qp.push(Poly::from_coeffs(ctx, c));
            let mut c = x[o + self.d[i]..o + self.d[i] + self.e[i]].to_vec();
            c.push(self.lead[i].clone());
            qb.push(Poly::from_coeffs(ctx, c));
        }
        (qp, qb)
    }
}

struct Homotopy<'a> {
    inst: &'a QQInstance<Mp>,
    layout: Layout,
    xis: Vec<Mp>,
    theta: Float,
    t_start_log2: u32,
}

impl Homotopy<'_> {
    fn ctx(&self) -> &NumCtx {
        self.inst.ctx()
    }

    /// `t(s) = 2^(t0 (1 - s)) exp(i theta sin(pi s))`, with `t(1) = 1` exactly.
    fn t(&self, s: f64) -> Mp {
        let ctx = *self.ctx();
        if s >= 1.0 {
            return Mp::one(&ctx);
        }
        let e = Float::with_val(ctx.prec, self.t_start_log2) * Float::with_val(ctx.prec, 1.0 - s);
        let mut phase = Mp::pi(ctx) * Float::with_val(ctx.prec, s);
        phase.sin_mut();
        phase *= &self.theta;
        Mp::exp2(ctx, &e).mul(&Mp::cis(ctx, &phase))
    }

    /// Coefficients `0 .. deg rhs_i - 1` of every equation.
    fn residual(&self, x: &[Mp], eps: &Mp) -> Vec<Mp> {
        let (qp, qb) = self.layout.unpack(self.ctx(), x);
        let mut out = Vec::with_capacity(self.layout.size);
        for i in 0..qp.len() {
            let c = eps.div(&self.xis[i]).expect("nonzero pairing");
            let f = &(&wronskian(&qp[i], &qb[i]).scale(&c) + &(&qp[i] * &qb[i])) - &self.inst.rhs(&qp, i);
            for k in 0..self.layout.d[i] + self.layout.e[i] {
                out.push(f.coeff(k));
            }
        }
        out
    }

    fn jacobian(&self, x: &[Mp], eps: &Mp) -> Matrix<Mp> {
        let ctx = *self.ctx();
        let lay = &self.layout;
        let (qp, qb) = lay.unpack(&ctx, x);
        let r = qp.len();
        let mut jac = Matrix::zeros(&ctx, lay.size, lay.size);
        let mut put = |row_color: usize, col: usize, p: &Poly<Mp>| {
            let o = lay.offset[row_color];
            for k in 0..lay.d[row_color] + lay.e[row_color] {
                jac.set(o + k, col, p.coeff(k));
            }
        };
        for i in 0..r {
            let c = eps.div(&self.xis[i]).expect("nonzero pairing");
            for k in 0..lay.d[i] {
                let zk = Poly::monomial(Mp::one(&ctx), k);
                let col = lay.offset[i] + k;
                put(i, col, &(&wronskian(&zk, &qb[i]).scale(&c) + &(&zk * &qb[i])));
                // q+_i enters the right-hand side of every neighbour
                for j in 0..r {
                    let a = self.inst.cartan.a(i, j);
                    if j == i || a == 0 {
                        continue;
                    }
                    let mut p = self.inst.lambda(j);
                    for (m, q) in qp.iter().enumerate() {
                        let am = self.inst.cartan.a(m, j);
                        if m != j && m != i && am != 0 {
                            p = &p * &q.pow((-am) as u32);
                        }
                    }
                    let dq = &qp[i].pow((-a - 1) as u32) * &zk;
                    put(j, col, &(&p * &dq).scale(&Mp::from_i64(&ctx, a)));
                }
            }
            for k in 0..lay.e[i] {
                let zk = Poly::monomial(Mp::one(&ctx), k);
                let col = lay.offset[i] + lay.d[i] + k;
                put(i, col, &(&wronskian(&qp[i], &zk).scale(&c) + &(&qp[i] * &zk)));
            }
        }
        jac
    }

    fn scale(&self, x: &[Mp]) -> f64 {
        let (qp, _) = self.layout.unpack(self.ctx(), x);
        (0..qp.len()).map(|i| self.inst.rhs(&qp, i).norm()).fold(1.0, f64::max)
    }

    /// Newton corrector at fixed `s`; `None` if it fails to settle quickly.
    fn correct(&self, mut x: Vec<Mp>, s: f64) -> Option<Vec<Mp>> {
        let eps = self.t(s).inv().expect("t is never zero");
        let tol = Mp::tolerance(self.ctx()) * self.scale(&x);
        let mut last = f64::INFINITY;
        for _ in 0..CORRECTOR_ITERATIONS {
            let f = self.residual(&x, &eps);
            let norm = f.iter().map(Mp::abs).fold(0.0, f64::max);
            if norm <= tol {
                return Some(x);
            }
            if norm >= last {
                return None;
            }
            last = norm;
            let rhs: Vec<Mp> = f.iter().map(Mp::neg).collect();
            let dx = match self.jacobian(&x, &eps).solve(&rhs) {
                Ok(dx) => dx,
                Err(LinalgError::Singular(_)) => return None,
                Err(_) => return None,
            };
            x = x.iter().zip(&dx).map(|(a, d)| a.add(d)).collect();
        }
        let f = self.residual(&x, &eps);
        (f.iter().map(Mp::abs).fold(0.0, f64::max) <= tol).then_some(x)
    }

    /// Fails when two roots of one color come within the root tolerance.
    fn check_separation(&self, x: &[Mp], s: f64) -> Result<(), BetheError> {
        let ctx = self.ctx();
        let (qp, _) = self.layout.unpack(ctx, x);
        let tol = Mp::root_tolerance(ctx);
        for (i, p) in qp.iter().enumerate() {
            let roots = p.roots()?;
            for (a, u) in roots.iter().enumerate() {
                for v in &roots[..a] {
                    if u.sub(v).abs() <= tol * 1f64.max(u.abs()) {
                        return Err(BetheError::PathCollision { color: i, s });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Seeds the Bethe roots from an infinite-twist partition and tracks them
/// to the instance's twist, finishing with a Newton polish in root space.
///
/// Requires every pairing `xi_i` of the target twist to be nonzero.
pub fn seed_and_continue(
    inst: &QQInstance<Mp>,
    part: &InfinitePartition<Mp>,
    opts: &SolveOptions,
) -> Result<BetheRoots<Mp>, BetheError> {
    let ctx = *inst.ctx();
    let xis = inst.xis();
    if let Some(i) = xis.iter().position(Mp::is_zero) {
        return Err(BetheError::ZeroPairing(i));
    }
    let start = super::infinite_solution(inst, part)?;
    let r = inst.rank();
    let mut layout = Layout { d: Vec::new(), e: Vec::new(), offset: Vec::new(), lead: Vec::new(), size: 0 };
    let mut x = Vec::new();
    for i in 0..r {
        let (qp, qb) = (&start.q_plus[i], &start.q_minus[i]);
        let d = qp.degree().expect("monic");
        let e = qb.degree().ok_or(BetheError::BadPartition(format!("right-hand side of color {} vanishes", i + 1)))?;
        layout.offset.push(layout.size);
        layout.d.push(d);
        layout.e.push(e);
        layout.lead.push(qb.lead().expect("nonzero").clone());
        layout.size += d + e;
        x.extend_from_slice(&qp.coeffs()[..d]);
        x.extend_from_slice(&qb.coeffs()[..e]);
    }
    let mut rng = opts.rng();
    let theta = rng.random_range(0.2..0.6) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let hom = Homotopy {
        inst,
        layout,
        xis,
        theta: Float::with_val(ctx.prec, theta),
        t_start_log2: opts.t_start_log2,
    };

    let n = opts.continuation.max(1) as f64;
    let min_step = (1.0 / n) * (-(MIN_STEP_BITS as f64)).exp2();
    let mut s = 0.0;
    x = hom.correct(x, 0.0).ok_or(BetheError::NoConvergence { iterations: CORRECTOR_ITERATIONS, residual: f64::NAN })?;
    let mut prev: Option<(f64, Vec<Mp>)> = None;
    let mut h = 1.0 / n;
    while s < 1.0 {
        let s_new = (s + h).min(1.0);
        let guess: Vec<Mp> = match &prev {
            Some((sp, xp)) => {
                let f = Mp::from_f64(&ctx, (s_new - s) / (s - sp));
                x.iter().zip(xp).map(|(a, b)| a.add(&a.sub(b).mul(&f))).collect()
            }
            None => x.clone(),
        };
        match hom.correct(guess, s_new) {
            Some(xn) => {
                hom.check_separation(&xn, s_new)?;
                log::debug!(target: "qqsys::continuation", "{{\"s\":{s_new},\"step\":{h:e}}}");
                prev = Some((s, std::mem::replace(&mut x, xn)));
                s = s_new;
                h = (2.0 * h).min(1.0 / n);
            }
            None => {
                h /= 2.0;
                if h < min_step {
                    let eps = hom.t(s_new).inv().expect("nonzero");
                    let res = hom.residual(&x, &eps).iter().map(Mp::abs).fold(0.0, f64::max);
                    return Err(BetheError::NoConvergence { iterations: CORRECTOR_ITERATIONS, residual: res });
                }
            }
        }
    }

    let (qp, _) = hom.layout.unpack(&ctx, &x);
    let seeded = BetheRoots::from_polys(&qp)?;
    let mut roots = solve_newton(inst, &seeded, opts)?;
    roots.canonicalize();
    Ok(roots)
}
