//! Bethe Ansatz equations for the inhomogeneous Gaudin model
//!
//! ```text
//! xi_i + sum_k l_{k,i} / (w - z_k) - sum_{(j,s) != (i,l)} a_ji / (w - w^j_s) = 0,   w = w^i_l
//! ```
//!
//! plus a damped Newton solver and seeding from the infinite qq-system.

mod continuation;
mod infinite;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::polyalg::{LinalgError, Matrix, Poly, PolyError, Scalar};
use crate::qqcore::QQInstance;

pub use continuation::seed_and_continue;
pub use infinite::{find_partition, infinite_solution, InfinitePartition};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BetheError {
    #[error("pole collision at root {} of color {}", .index + 1, .color + 1)]
    PoleCollision { color: usize, index: usize },
    #[error("Newton did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("singular Jacobian")]
    SingularJacobian,
    #[error("roots of color {} merged during continuation at s = {s}", .color + 1)]
    PathCollision { color: usize, s: f64 },
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("pairing xi_{} vanishes at the target twist", .0 + 1)]
    ZeroPairing(usize),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Colored Bethe roots `w^i_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct BetheRoots<S: Scalar> {
    pub roots: Vec<Vec<S>>,
}

impl<S: Scalar> BetheRoots<S> {
    pub fn new(roots: Vec<Vec<S>>) -> Self {
        Self { roots }
    }

    pub fn empty(rank: usize) -> Self {
        Self { roots: vec![Vec::new(); rank] }
    }

    /// Roots of each `q+_i`.
    pub fn from_polys(q_plus: &[Poly<S>]) -> Result<Self, PolyError> {
        Ok(Self { roots: q_plus.iter().map(|p| p.roots()).collect::<Result<_, _>>()? })
    }

    /// Monic `q+_i = prod (z - w^i_l)`.
    pub fn to_polys(&self, ctx: &S::Ctx) -> Vec<Poly<S>> {
        self.roots.iter().map(|r| Poly::from_roots(ctx, r, &S::one(ctx))).collect()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.roots.iter().map(Vec::len).collect()
    }

    pub fn count(&self) -> usize {
        self.roots.iter().map(Vec::len).sum()
    }

    /// Sorts each color lexicographically by real then imaginary part.
    pub fn canonicalize(&mut self) {
        for r in &mut self.roots {
            r.sort_by(|a, b| a.canonical_cmp(b));
        }
    }

    fn flat(&self) -> Vec<S> {
        self.roots.iter().flatten().cloned().collect()
    }

    fn with_flat(&self, x: &[S]) -> Self {
        let mut it = x.iter().cloned();
        Self { roots: self.roots.iter().map(|r| r.iter().map(|_| it.next().unwrap()).collect()).collect() }
    }

    fn index(&self) -> Vec<(usize, usize)> {
        self.roots
            .iter()
            .enumerate()
            .flat_map(|(i, r)| (0..r.len()).map(move |l| (i, l)))
            .collect()
    }
}

/// Newton and continuation settings.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub max_iterations: usize,
    /// Step halvings allowed per Newton iteration before giving up.
    pub max_halvings: usize,
    /// Absolute residual tolerance; `None` picks `2^-40` times the backend
    /// tolerance (exact backends require an exact zero).
    pub tolerance: Option<f64>,
    /// Base number of continuation steps.
    pub continuation: usize,
    /// `log2` of the starting continuation scale.
    pub t_start_log2: u32,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { max_iterations: 100, max_halvings: 40, tolerance: None, continuation: 64, t_start_log2: 40, seed: 0 }
    }
}

impl SolveOptions {
    pub fn resolved_tolerance<S: Scalar>(&self, ctx: &S::Ctx) -> f64 {
        self.tolerance.unwrap_or_else(|| {
            if S::EXACT {
                0.0
            } else {
                // tau = 2^-tol_bits; the default Newton target sits 40 bits lower
                (S::tolerance(ctx).log2() - 40.0).exp2()
            }
        })
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

fn inv_diff<S: Scalar>(w: &S, v: &S, color: usize, index: usize) -> Result<S, BetheError> {
    let d = w.sub(v);
    if d.is_zero() {
        return Err(BetheError::PoleCollision { color, index });
    }
    Ok(d.inv().expect("nonzero difference"))
}

/// `E'/E` and its derivative at `w` for the extra factor of `Lambda_i`.
fn extra_terms<S: Scalar>(inst: &QQInstance<S>, i: usize, w: &S, l: usize) -> Result<(S, S), BetheError> {
    let e = &inst.extra[i];
    let ctx = inst.ctx();
    if e.is_constant() {
        return Ok((S::zero(ctx), S::zero(ctx)));
    }
    let (e0, e1, e2) = (e.eval(w), e.deriv().eval(w), e.deriv().deriv().eval(w));
    let inv = e0.inv().filter(|_| !e0.is_zero()).ok_or(BetheError::PoleCollision { color: i, index: l })?;
    let ld = e1.mul(&inv);
    let dld = e2.mul(&inv).sub(&ld.mul(&ld));
    Ok((ld, dld))
}

/// The `(i, l)` Bethe residual in explicit form.
pub fn bethe_residual<S: Scalar>(inst: &QQInstance<S>, roots: &BetheRoots<S>, i: usize, l: usize) -> Result<S, BetheError> {
    let w = &roots.roots[i][l];
    let mut acc = inst.xi(i);
    for pt in &inst.points {
        let e = pt.weights[i];
        if e > 0 {
            acc = acc.add(&inv_diff(w, &pt.z, i, l)?.mul_i64(e as i64));
        }
    }
    acc = acc.add(&extra_terms(inst, i, w, l)?.0);
    for (j, rj) in roots.roots.iter().enumerate() {
        let a = inst.cartan.a(j, i);
        if a == 0 {
            continue;
        }
        for (s, v) in rj.iter().enumerate() {
            if j == i && s == l {
                continue;
            }
            acc = acc.sub(&inv_diff(w, v, i, l)?.mul_i64(a));
        }
    }
    Ok(acc)
}

/// The `(i, l)` Bethe residual in logarithmic form,
/// `xi_i + d/dz log[Lambda_i prod_j (q+_j)^(-a_ji) (z - w)^2]` at `z = w`,
/// evaluated through the polynomials rather than their roots.
pub fn bethe_residual_log<S: Scalar>(inst: &QQInstance<S>, roots: &BetheRoots<S>, i: usize, l: usize) -> Result<S, BetheError> {
    let ctx = inst.ctx();
    let w = &roots.roots[i][l];
    let polys = roots.to_polys(ctx);
    let pole = || BetheError::PoleCollision { color: i, index: l };
    let log_deriv = |p: &Poly<S>| -> Result<S, BetheError> {
        let v = p.eval(w);
        if v.is_zero() {
            return Err(pole());
        }
        Ok(p.deriv().eval(w).div(&v).expect("nonzero value"))
    };
    let lam = inst.lambda(i);
    let mut acc = inst.xi(i).add(&log_deriv(&lam)?);
    // q+_i (z - w)^-1 carries exponent -2 after the (z - w)^2 factor
    let (r, _) = polys[i].deflate(w);
    acc = acc.sub(&log_deriv(&r)?.mul_i64(2));
    for (j, p) in polys.iter().enumerate() {
        let a = inst.cartan.a(j, i);
        if j != i && a != 0 {
            acc = acc.sub(&log_deriv(p)?.mul_i64(a));
        }
    }
    Ok(acc)
}

/// All residuals, flattened color by color.
pub fn residual_vector<S: Scalar>(inst: &QQInstance<S>, roots: &BetheRoots<S>) -> Result<Vec<S>, BetheError> {
    roots.index().into_iter().map(|(i, l)| bethe_residual(inst, roots, i, l)).collect()
}

/// Analytic Jacobian of [`residual_vector`] with respect to the flattened roots.
pub fn bethe_jacobian<S: Scalar>(inst: &QQInstance<S>, roots: &BetheRoots<S>) -> Result<Matrix<S>, BetheError> {
    let ctx = inst.ctx();
    let idx = roots.index();
    let n = idx.len();
    let mut jac = Matrix::zeros(ctx, n, n);
    for (row, &(i, l)) in idx.iter().enumerate() {
        let w = &roots.roots[i][l];
        let mut diag = extra_terms(inst, i, w, l)?.1;
        for pt in &inst.points {
            let e = pt.weights[i];
            if e > 0 {
                let u = inv_diff(w, &pt.z, i, l)?;
                diag = diag.sub(&u.mul(&u).mul_i64(e as i64));
            }
        }
        for (col, &(j, s)) in idx.iter().enumerate() {
            let a = inst.cartan.a(j, i);
            if a == 0 || (j == i && s == l) {
                continue;
            }
            let u = inv_diff(w, &roots.roots[j][s], i, l)?;
            let t = u.mul(&u).mul_i64(a);
            diag = diag.add(&t);
            jac.set(row, col, t.neg());
        }
        jac.set(row, row, diag);
    }
    Ok(jac)
}

/// Outcome of [`verify_bethe`].
#[derive(Clone, Debug, PartialEq)]
pub struct BetheReport<S: Scalar> {
    pub residuals: Vec<Vec<S>>,
    pub max_residual: f64,
    pub pass: bool,
}

/// Evaluates every Bethe equation; passes iff the largest residual is
/// within `tol` (exact backends: all residuals vanish).
pub fn verify_bethe<S: Scalar>(inst: &QQInstance<S>, roots: &BetheRoots<S>, tol: f64) -> Result<BetheReport<S>, BetheError> {
    let mut residuals = Vec::with_capacity(roots.roots.len());
    let mut max_residual: f64 = 0.0;
    let mut all_zero = true;
    for (i, r) in roots.roots.iter().enumerate() {
        let mut row = Vec::with_capacity(r.len());
        for l in 0..r.len() {
            let v = bethe_residual(inst, roots, i, l)?;
            max_residual = max_residual.max(v.abs());
            all_zero &= v.is_exact_zero();
            row.push(v);
        }
        residuals.push(row);
    }
    let pass = if S::EXACT { all_zero } else { max_residual <= tol };
    Ok(BetheReport { residuals, max_residual, pass })
}

fn max_abs<S: Scalar>(v: &[S]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Damped Newton on the stacked Bethe residuals with the analytic Jacobian.
///
/// A singular Jacobian triggers up to three restarts from the current
/// point perturbed by seeded noise of size `10 * tol`.
pub fn solve_newton<S: Scalar>(inst: &QQInstance<S>, init: &BetheRoots<S>, opts: &SolveOptions) -> Result<BetheRoots<S>, BetheError> {
    let ctx = inst.ctx().clone();
    let tol = opts.resolved_tolerance::<S>(&ctx);
    let mut rng = opts.rng();
    let mut current = init.clone();
    let mut res = residual_vector(inst, &current)?;
    let mut norm = max_abs(&res);
    let mut retries = 0;
    for step in 0..opts.max_iterations {
        if converged(&res, norm, tol) {
            return Ok(current);
        }
        let jac = bethe_jacobian(inst, &current)?;
        let rhs: Vec<S> = res.iter().map(|r| r.neg()).collect();
        let delta = match jac.solve(&rhs) {
            Ok(d) => d,
            Err(LinalgError::Singular(_)) if retries < 3 => {
                retries += 1;
                let noise = (10.0 * tol).max(S::tolerance(&ctx) * 10.0);
                let x: Vec<S> = current.flat().iter().map(|v| v.add(&S::random(&ctx, &mut rng, noise))).collect();
                current = current.with_flat(&x);
                res = residual_vector(inst, &current)?;
                norm = max_abs(&res);
                continue;
            }
            Err(_) => return Err(BetheError::SingularJacobian),
        };
        let x = current.flat();
        let mut lambda = S::one(&ctx);
        let half = S::from_i64(&ctx, 2).inv().expect("two");
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<S> = x.iter().zip(&delta).map(|(a, d)| a.add(&d.mul(&lambda))).collect();
            let cand = current.with_flat(&trial);
            if let Ok(r) = residual_vector(inst, &cand) {
                let n = max_abs(&r);
                if n < norm || converged(&r, n, tol) {
                    log::debug!(
                        target: "qqsys::newton",
                        "{{\"step\":{step},\"max_residual\":{n:e},\"damping\":{:e}}}",
                        lambda.abs()
                    );
                    current = cand;
                    res = r;
                    norm = n;
                    accepted = true;
                    break;
                }
            }
            lambda = lambda.mul(&half);
        }
        if !accepted {
            return Err(BetheError::NoConvergence { iterations: step + 1, residual: norm });
        }
    }
    if converged(&res, norm, tol) {
        return Ok(current);
    }
    Err(BetheError::NoConvergence { iterations: opts.max_iterations, residual: norm })
}

fn converged<S: Scalar>(res: &[S], norm: f64, tol: f64) -> bool {
    if S::EXACT {
        res.iter().all(|r| r.is_exact_zero())
    } else {
        norm <= tol
    }
}
