//! The qq-system
//!
//! ```text
//! W(q+_i, q-_i) + xi_i q+_i q-_i = Lambda_i prod_{j != i} (q+_j)^(-a_ji)
//! ```
//!
//! with instances, residuals, nondegeneracy checks, completion of `q-`
//! from `q+`, and folding of B_n / G_2 systems onto simply-laced ones.

use thiserror::Error;

use crate::polyalg::{coprime_check, distinct_roots_check, wronskian, LinalgError, Matrix, Poly, Scalar};
use crate::rootsys::{cartan_matrix, CartanMatrix, CartanType, Family, RootSystemError, Twist};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QQError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error(transparent)]
    RootSystem(#[from] RootSystemError),
    #[error("no polynomial q- exists for color {}", .0 + 1)]
    InconsistentSystem(usize),
    #[error("q+ of color {} is zero", .0 + 1)]
    ZeroPolynomial(usize),
    #[error("folding is only defined for B_n and G_2, not {0}")]
    UnsupportedType(CartanType),
    #[error("expected {expected} polynomials, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// A singular point `z_k` with exponents `l_{k,i} = <alpha_i, coweight_k>`.
#[derive(Clone, Debug, PartialEq)]
pub struct Point<S: Scalar> {
    pub z: S,
    pub weights: Vec<u32>,
}

/// Lie type, singularities and twist; determines every `Lambda_i` as
/// `lead_i * extra_i * prod_k (z - z_k)^{l_{k,i}}`.
///
/// `extra_i` is 1 except on instances produced by [`fold`], whose
/// `Lambda` picks up a polynomial factor built from the folded solution.
#[derive(Clone, Debug, PartialEq)]
pub struct QQInstance<S: Scalar> {
    pub cartan_type: CartanType,
    pub cartan: CartanMatrix,
    pub points: Vec<Point<S>>,
    pub twist: Twist<S>,
    pub lead: Vec<S>,
    pub extra: Vec<Poly<S>>,
    ctx: S::Ctx,
}

impl<S: Scalar> QQInstance<S> {
    pub fn new(cartan_type: CartanType, points: Vec<Point<S>>, twist: Twist<S>) -> Result<Self, QQError> {
        let r = cartan_type.rank();
        if twist.rank() != r {
            return Err(QQError::InvalidInstance(format!("twist has {} entries, rank is {r}", twist.rank())));
        }
        let ctx = twist.zeta[0].ctx();
        for (k, p) in points.iter().enumerate() {
            if p.weights.len() != r {
                return Err(QQError::InvalidInstance(format!(
                    "point {} has {} weights, rank is {r}",
                    k + 1,
                    p.weights.len()
                )));
            }
            if points[..k].iter().any(|q| q.z.approx_eq(&p.z)) {
                return Err(QQError::InvalidInstance(format!("point {} repeats an earlier point", k + 1)));
            }
        }
        Ok(Self {
            cartan_type,
            cartan: cartan_matrix(cartan_type),
            points,
            twist,
            lead: vec![S::one(&ctx); r],
            extra: vec![Poly::one(&ctx); r],
            ctx,
        })
    }

    pub fn with_lead(mut self, lead: Vec<S>) -> Result<Self, QQError> {
        if lead.len() != self.rank() {
            return Err(QQError::Dimension { expected: self.rank(), got: lead.len() });
        }
        if lead.iter().any(|l| l.is_exact_zero()) {
            return Err(QQError::InvalidInstance("leading coefficient of Lambda is zero".into()));
        }
        self.lead = lead;
        Ok(self)
    }

    pub fn ctx(&self) -> &S::Ctx {
        &self.ctx
    }

    pub fn rank(&self) -> usize {
        self.cartan.rank()
    }

    /// `xi_i = <alpha_i, Z^H>`, recomputed from the twist.
    pub fn xi(&self, i: usize) -> S {
        crate::rootsys::pairing(i, &self.twist, &self.cartan)
    }

    pub fn xis(&self) -> Vec<S> {
        self.twist.pairings(&self.cartan)
    }

    pub fn xi_vanishes(&self, i: usize) -> bool {
        self.xi(i).is_zero()
    }

    /// `Lambda_i(z)`.
    pub fn lambda(&self, i: usize) -> Poly<S> {
        let mut p = self.extra[i].scale(&self.lead[i]);
        for pt in &self.points {
            let e = pt.weights[i];
            if e > 0 {
                p = &p * &Poly::linear(&pt.z).pow(e);
            }
        }
        p
    }

    pub fn lambda_degree(&self, i: usize) -> usize {
        let base: u32 = self.points.iter().map(|p| p.weights[i]).sum();
        base as usize + self.extra[i].degree().unwrap_or(0)
    }

    /// Right-hand side `Lambda_i prod_{j != i} (q+_j)^(-a_ji)`.
    pub fn rhs(&self, q_plus: &[Poly<S>], i: usize) -> Poly<S> {
        let mut p = self.lambda(i);
        for (j, q) in q_plus.iter().enumerate() {
            let a = self.cartan.a(j, i);
            if j != i && a != 0 {
                p = &p * &q.pow((-a) as u32);
            }
        }
        p
    }

    /// Clone with a different twist.
    pub fn with_twist(&self, twist: Twist<S>) -> Self {
        Self { twist, ..self.clone() }
    }
}

/// `Lambda_i` for every color.
pub fn build_lambdas<S: Scalar>(inst: &QQInstance<S>) -> Vec<Poly<S>> {
    (0..inst.rank()).map(|i| inst.lambda(i)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct QQSolution<S: Scalar> {
    pub q_plus: Vec<Poly<S>>,
    pub q_minus: Vec<Poly<S>>,
}

impl<S: Scalar> QQSolution<S> {
    pub fn new(q_plus: Vec<Poly<S>>, q_minus: Vec<Poly<S>>) -> Self {
        Self { q_plus, q_minus }
    }

    pub fn rank(&self) -> usize {
        self.q_plus.len()
    }

    pub fn plus_degrees(&self) -> Vec<usize> {
        self.q_plus.iter().map(|p| p.degree().unwrap_or(0)).collect()
    }
}

/// LHS minus RHS of the `i`-th equation.
pub fn qq_residual<S: Scalar>(inst: &QQInstance<S>, sol: &QQSolution<S>, i: usize) -> Poly<S> {
    let (qp, qm) = (&sol.q_plus[i], &sol.q_minus[i]);
    let lhs = &wronskian(qp, qm) + &(qp * qm).scale(&inst.xi(i));
    &lhs - &inst.rhs(&sol.q_plus, i)
}

/// Size of a residual next to the size of the terms it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualCheck {
    pub residual: f64,
    pub scale: f64,
    pub pass: bool,
}

/// Residual of equation `i`, judged exactly (exact backend) or relative to
/// the largest coefficient among its terms (numeric backend).
pub fn qq_check<S: Scalar>(inst: &QQInstance<S>, sol: &QQSolution<S>, i: usize) -> ResidualCheck {
    let (qp, qm) = (&sol.q_plus[i], &sol.q_minus[i]);
    let w = wronskian(qp, qm);
    let prod = (qp * qm).scale(&inst.xi(i));
    let rhs = inst.rhs(&sol.q_plus, i);
    let res = &(&w + &prod) - &rhs;
    let scale = w.norm().max(prod.norm()).max(rhs.norm()).max(1.0);
    ResidualCheck { residual: res.norm(), scale, pass: res.is_negligible(scale) }
}

/// True when every equation of the system holds.
pub fn is_solution<S: Scalar>(inst: &QQInstance<S>, sol: &QQSolution<S>) -> bool {
    (0..inst.rank()).all(|i| qq_check(inst, sol, i).pass)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NondegReport {
    pub monic: Vec<bool>,
    pub squarefree: Vec<bool>,
    pub coprime_to_lambda: Vec<bool>,
    /// `(i, j, ok)` for each Dynkin edge `i < j`.
    pub pairwise_coprime: Vec<(usize, usize, bool)>,
    pub overall: bool,
}

/// Monic, squarefree, coprime to `Lambda_i`, and coprime to Dynkin
/// neighbours. Zero or unrootable inputs count as failures.
pub fn check_nondegenerate<S: Scalar>(inst: &QQInstance<S>, q_plus: &[Poly<S>]) -> NondegReport {
    let r = inst.rank();
    let monic: Vec<bool> = q_plus.iter().map(|p| p.is_monic()).collect();
    let squarefree: Vec<bool> = q_plus
        .iter()
        .map(|p| distinct_roots_check(p).unwrap_or(false))
        .collect();
    let coprime_to_lambda: Vec<bool> = (0..r)
        .map(|i| coprime_check(&q_plus[i], &inst.lambda(i)).unwrap_or(false))
        .collect();
    let mut pairwise_coprime = Vec::new();
    for i in 0..r {
        for j in inst.cartan.neighbours(i).filter(|&j| j > i) {
            pairwise_coprime.push((i, j, coprime_check(&q_plus[i], &q_plus[j]).unwrap_or(false)));
        }
    }
    let overall = monic.iter().chain(&squarefree).chain(&coprime_to_lambda).all(|&b| b)
        && pairwise_coprime.iter().all(|t| t.2);
    NondegReport { monic, squarefree, coprime_to_lambda, pairwise_coprime, overall }
}

/// Generic degree of `q-_i`: `deg Lambda_i - d_i - sum_{j != i} a_ji d_j`,
/// plus one when `xi_i = 0`. A negative value means no polynomial
/// completion of the generic degree exists.
pub fn expected_minus_degree<S: Scalar>(inst: &QQInstance<S>, dplus: &[usize], i: usize) -> i64 {
    let mut e = inst.lambda_degree(i) as i64 - dplus[i] as i64;
    for (j, &d) in dplus.iter().enumerate() {
        if j != i {
            e -= inst.cartan.a(j, i) * d as i64;
        }
    }
    if inst.xi_vanishes(i) {
        e += 1;
    }
    e
}

/// Solves `W(q+, q-) + xi q+ q- = rhs` for `q-` by linear algebra on its
/// coefficients. With `xi = 0` the solution is only defined modulo `q+`;
/// the coefficient of `z^{deg q+}` in `q-` is then pinned to `c`.
pub fn complete_color<S: Scalar>(
    q_plus: &Poly<S>,
    xi: &S,
    rhs: &Poly<S>,
    expected: i64,
    c: &S,
    color: usize,
) -> Result<Poly<S>, QQError> {
    let ctx = rhs.ctx().clone();
    let d = q_plus.degree().ok_or(QQError::ZeroPolynomial(color))?;
    let xi_zero = xi.is_zero();
    let top = if xi_zero { expected.max(d as i64) } else { expected };
    if top < 0 {
        return if rhs.is_zero() { Ok(Poly::zero(&ctx)) } else { Err(QQError::InconsistentSystem(color)) };
    }
    let top = top as usize;
    let columns: Vec<Poly<S>> = (0..=top)
        .map(|k| {
            let zk = Poly::monomial(S::one(&ctx), k);
            let w = wronskian(q_plus, &zk);
            if xi_zero {
                w
            } else {
                &w + &(q_plus * &zk).scale(xi)
            }
        })
        .collect();
    let height = columns
        .iter()
        .map(|p| p.degree_i64())
        .chain(std::iter::once(rhs.degree_i64()))
        .max()
        .unwrap_or(0)
        .max(0) as usize
        + 1;
    let rows = height + usize::from(xi_zero);
    let mut a = Matrix::zeros(&ctx, rows.max(top + 1), top + 1);
    let mut b = vec![S::zero(&ctx); rows.max(top + 1)];
    for (k, col) in columns.iter().enumerate() {
        for (row, v) in col.coeffs().iter().enumerate() {
            a.set(row, k, v.clone());
        }
    }
    for (row, v) in rhs.coeffs().iter().enumerate() {
        b[row] = v.clone();
    }
    if xi_zero {
        a.set(height, d, S::one(&ctx));
        b[height] = c.clone();
    }
    match a.solve(&b) {
        Ok(x) => Ok(Poly::from_coeffs(&ctx, x)),
        Err(LinalgError::Inconsistent(_)) | Err(LinalgError::Singular(_)) => Err(QQError::InconsistentSystem(color)),
        Err(LinalgError::Dimension) => unreachable!("system is built with rows >= cols"),
    }
}

/// Completes every `q-_i` from the `q+` family. `constants[i]` fixes the
/// free multiple of `q+_i` when `xi_i = 0` (default 0).
pub fn complete_minus<S: Scalar>(
    inst: &QQInstance<S>,
    q_plus: &[Poly<S>],
    constants: Option<&[S]>,
) -> Result<QQSolution<S>, QQError> {
    let r = inst.rank();
    if q_plus.len() != r {
        return Err(QQError::Dimension { expected: r, got: q_plus.len() });
    }
    let dplus: Vec<usize> = q_plus
        .iter()
        .enumerate()
        .map(|(i, p)| p.degree().ok_or(QQError::ZeroPolynomial(i)))
        .collect::<Result<_, _>>()?;
    let zero = S::zero(inst.ctx());
    let q_minus = (0..r)
        .map(|i| {
            let c = constants.map_or(&zero, |cs| &cs[i]);
            complete_color(
                &q_plus[i],
                &inst.xi(i),
                &inst.rhs(q_plus, i),
                expected_minus_degree(inst, &dplus, i),
                c,
                i,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(QQSolution::new(q_plus.to_vec(), q_minus))
}

/// The short simple root `k`, its long neighbour `l`, and `m = -a_kl`.
pub fn fold_data(ty: CartanType) -> Option<(usize, usize, u32)> {
    let n = ty.rank();
    match ty.family() {
        Family::B => Some((n - 1, n - 2, 2)),
        Family::G => Some((0, 1, 3)),
        _ => None,
    }
}

/// Maps a B_n (resp. G_2) system onto A_n (resp. A_2).
///
/// `q~k_+- = (qk_+-)^m`, `xi~_k = m xi_k`, and
/// `Lambda~_k = m (qk_+ qk_-)^(m-1) Lambda_k`; every other color, including
/// the long neighbour `l`, keeps its data.
pub fn fold<S: Scalar>(inst: &QQInstance<S>, sol: &QQSolution<S>) -> Result<(QQInstance<S>, QQSolution<S>), QQError> {
    let (k, _l, m) = fold_data(inst.cartan_type).ok_or(QQError::UnsupportedType(inst.cartan_type))?;
    let ctx = inst.ctx().clone();
    let target = CartanType::new(Family::A, inst.rank())?;
    let ca = cartan_matrix(target);
    let mut xis = inst.xis();
    xis[k] = xis[k].mul_i64(m as i64);
    // xi = A^T zeta for the folded Cartan matrix
    let r = inst.rank();
    let mut at = Matrix::zeros(&ctx, r, r);
    for i in 0..r {
        for j in 0..r {
            at.set(i, j, S::from_i64(&ctx, ca.a(j, i)));
        }
    }
    let zeta = at.solve(&xis).expect("type A Cartan matrices are invertible");
    let mut folded = QQInstance::new(target, inst.points.clone(), Twist::new(zeta))?;
    folded.lead = inst.lead.clone();
    folded.extra = inst.extra.clone();
    folded.lead[k] = inst.lead[k].mul_i64(m as i64);
    let pq = &sol.q_plus[k] * &sol.q_minus[k];
    folded.extra[k] = &inst.extra[k] * &pq.pow(m - 1);
    let mut q_plus = sol.q_plus.clone();
    let mut q_minus = sol.q_minus.clone();
    q_plus[k] = sol.q_plus[k].pow(m);
    q_minus[k] = sol.q_minus[k].pow(m);
    Ok((folded, QQSolution::new(q_plus, q_minus)))
}
