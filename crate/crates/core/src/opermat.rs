//! Miura connections and their gauge transformations.
//!
//! A connection `d/dz + sum_i g_i coroot_i + sum_i Lambda_i e_i` is stored
//! by its coefficients. Matrices of rational functions appear for the
//! rank-two restrictions (any type) and for global type A computations in
//! the defining representation, where `e_i = E_{i,i+1}`, `f_i = E_{i+1,i}`
//! and `coroot_i = E_ii - E_{i+1,i+1}`.
//!
//! Gauge action convention: `v (d + Z) v^-1 = d + v Z v^-1 - v' v^-1`, so
//! `A` is gauge equivalent to the constant `Z` by `v` iff `A v - v Z + v' = 0`.

use std::fmt;

use thiserror::Error;

use crate::backlund::{chain, ChainError, ChainTrace};
use crate::polyalg::{Matrix, Poly, PolyError, RationalFn, Scalar};
use crate::qqcore::{QQInstance, QQSolution};
use crate::rootsys::{CartanMatrix, CartanType, Family, RootSystemError, Twist, WeylWord};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperError {
    #[error("type A only, got {0}")]
    UnsupportedType(CartanType),
    #[error("word {0} is not a reduced word for the longest element")]
    NotLongest(WeylWord),
    #[error("chain broken at step {} (color {}): {message}", .step + 1, .color + 1)]
    ChainBroken { step: usize, color: usize, message: String },
    #[error("{0}")]
    Chain(String),
    #[error("b- is not in the big cell: pivot {} vanishes", .0 + 1)]
    FactorizationFailed(usize),
    #[error("pole collision at root {} of color {}", .index + 1, .color + 1)]
    PoleCollision { color: usize, index: usize },
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    RootSystem(#[from] RootSystemError),
}

impl<S: Scalar> From<ChainError<S>> for OperError {
    fn from(e: ChainError<S>) -> Self {
        match e {
            ChainError::Broken(f) => OperError::ChainBroken { step: f.step, color: f.color, message: f.error.to_string() },
            other => OperError::Chain(other.to_string()),
        }
    }
}

/// Square matrix of rational functions.
#[derive(Clone, Debug, PartialEq)]
pub struct RatMatrix<S: Scalar> {
    n: usize,
    entries: Vec<RationalFn<S>>,
}

/// Rank-two restrictions.
pub type Matrix2<S> = RatMatrix<S>;
/// Defining representation of `sl(n)`.
pub type MatrixN<S> = RatMatrix<S>;

impl<S: Scalar> RatMatrix<S> {
    pub fn zeros(ctx: &S::Ctx, n: usize) -> Self {
        Self { n, entries: vec![RationalFn::zero(ctx); n * n] }
    }

    pub fn identity(ctx: &S::Ctx, n: usize) -> Self {
        let mut m = Self::zeros(ctx, n);
        for i in 0..n {
            m.set(i, i, RationalFn::one(ctx));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<RationalFn<S>>>) -> Option<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(Self { n, entries: rows.into_iter().flatten().collect() })
    }

    pub fn diagonal(d: Vec<RationalFn<S>>) -> Self {
        let ctx = d[0].ctx().clone();
        let mut m = Self::zeros(&ctx, d.len());
        for (i, x) in d.into_iter().enumerate() {
            m.set(i, i, x);
        }
        m
    }

    /// Entries of a constant matrix.
    pub fn constant(m: &Matrix<S>) -> Self {
        let n = m.rows();
        Self { n, entries: (0..n * n).map(|k| RationalFn::constant(m.get(k / n, k % n).clone())).collect() }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn ctx(&self) -> &S::Ctx {
        self.entries[0].ctx()
    }

    pub fn get(&self, i: usize, j: usize) -> &RationalFn<S> {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: RationalFn<S>) {
        self.entries[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<RationalFn<S>>> {
        self.entries.chunks(self.n).map(<[_]>::to_vec).collect()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(self.ctx(), n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = RationalFn::zero(self.ctx());
                for k in 0..n {
                    let (a, b) = (self.get(i, k), o.get(k, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    fn zip(&self, o: &Self, f: impl Fn(&RationalFn<S>, &RationalFn<S>) -> RationalFn<S>) -> Self {
        Self { n: self.n, entries: self.entries.iter().zip(&o.entries).map(|(a, b)| f(a, b)).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a - b)
    }

    pub fn deriv(&self) -> Self {
        Self { n: self.n, entries: self.entries.iter().map(RationalFn::deriv).collect() }
    }

    /// Inverse of a 2x2 matrix.
    pub fn inv2(&self) -> Option<Self> {
        if self.n != 2 {
            return None;
        }
        let (a, b, c, d) = (self.get(0, 0), self.get(0, 1), self.get(1, 0), self.get(1, 1));
        let det = &(a * d) - &(b * c);
        let di = det.inv()?;
        Self::from_rows(vec![vec![d * &di, &(-b) * &di], vec![&(-c) * &di, a * &di]])
    }

    /// Values at a point; `None` at a pole of some entry.
    pub fn eval(&self, x: &S) -> Option<Matrix<S>> {
        let rows = self
            .rows()
            .iter()
            .map(|r| r.iter().map(|e| e.eval(x)).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()?;
        Matrix::from_rows(rows)
    }

    /// Largest coefficient among the numerators.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.num().norm()).fold(0.0, f64::max)
    }

    /// Zero as a matrix of rational functions (numeric: relative to `scale`).
    pub fn is_negligible(&self, scale: f64) -> bool {
        self.entries.iter().all(|e| e.is_negligible(scale))
    }
}

impl<S: Scalar> fmt::Display for RatMatrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|e| e.to_string()).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// Coefficients `g_i = zeta_i - (q+_i)' / q+_i` and `Lambda_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct MiuraConnection<S: Scalar> {
    pub twist: Twist<S>,
    pub g: Vec<RationalFn<S>>,
    pub lambdas: Vec<Poly<S>>,
}

impl<S: Scalar> MiuraConnection<S> {
    /// `<alpha_i, A^H> = sum_j a_ji g_j`.
    pub fn cartan_pairing(&self, c: &CartanMatrix, i: usize) -> RationalFn<S> {
        let mut acc = RationalFn::zero(self.g[0].ctx());
        for (j, g) in self.g.iter().enumerate() {
            let a = c.a(j, i);
            if a != 0 {
                acc = &acc + &g.scale(&S::from_i64(g.ctx(), a));
            }
        }
        acc
    }
}

pub fn build_connection<S: Scalar>(inst: &QQInstance<S>, q_plus: &[Poly<S>]) -> Result<MiuraConnection<S>, OperError> {
    let g = q_plus
        .iter()
        .zip(&inst.twist.zeta)
        .enumerate()
        .map(|(i, (q, z))| {
            let ld = RationalFn::log_derivative(q).ok_or(OperError::Poly(PolyError::ZeroPolynomial))?;
            let _ = i;
            Ok(&RationalFn::constant(z.clone()) - &ld)
        })
        .collect::<Result<Vec<_>, OperError>>()?;
    Ok(MiuraConnection { twist: inst.twist.clone(), g, lambdas: (0..inst.rank()).map(|i| inst.lambda(i)).collect() })
}

/// The rank-two oper at color `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gl2Oper<S: Scalar> {
    /// `[[g_i, Lambda_i], [0, -g_i - sum_{k != i} a_ki g_k]]`.
    pub raw: Matrix2<S>,
    /// `raw` gauged by `diag(1, prod_{j != i} (q+_j)^a_ji)`.
    pub tilde: Matrix2<S>,
    /// `Lambda_i prod_{k != i} (q+_k)^(-a_ki)`.
    pub rho: RationalFn<S>,
}

fn gauge<S: Scalar>(u: &RatMatrix<S>, u_inv: &RatMatrix<S>, a: &RatMatrix<S>) -> RatMatrix<S> {
    u.mul(a).mul(u_inv).sub(&u.deriv().mul(u_inv))
}

pub fn gl2_oper<S: Scalar>(
    conn: &MiuraConnection<S>,
    q_plus: &[Poly<S>],
    c: &CartanMatrix,
    i: usize,
) -> Result<Gl2Oper<S>, OperError> {
    c.check_index(i)?;
    let ctx = conn.g[0].ctx().clone();
    let gi = &conn.g[i];
    let mut lower = -gi;
    let mut phi = RationalFn::one(&ctx);
    for (k, g) in conn.g.iter().enumerate() {
        let a = c.a(k, i);
        if k != i && a != 0 {
            lower = &lower - &g.scale(&S::from_i64(&ctx, a));
            let y = RationalFn::from_poly(q_plus[k].clone());
            phi = &phi * &y.powi(a).ok_or(OperError::Poly(PolyError::ZeroPolynomial))?;
        }
    }
    let lam = RationalFn::from_poly(conn.lambdas[i].clone());
    let raw = Matrix2::from_rows(vec![vec![gi.clone(), lam.clone()], vec![RationalFn::zero(&ctx), lower]]).expect("2x2");
    let phi_inv = phi.inv().ok_or(OperError::Poly(PolyError::ZeroPolynomial))?;
    let u = Matrix2::diagonal(vec![RationalFn::one(&ctx), phi]);
    let u_inv = Matrix2::diagonal(vec![RationalFn::one(&ctx), phi_inv.clone()]);
    let tilde = gauge(&u, &u_inv, &raw);
    Ok(Gl2Oper { raw, tilde, rho: &lam * &phi_inv })
}

/// Outcome of [`verify_mp_twist`].
#[derive(Clone, Debug, PartialEq)]
pub struct MpCheck<S: Scalar> {
    /// `nabla_i - v_i (d + Z_i) v_i^-1`.
    pub difference: Matrix2<S>,
    pub residual: f64,
    pub pass: bool,
}

/// Checks that the rank-two oper at color `i` is gauge equivalent to
/// `d + Z_i` through `v_i = diag(q+_i, P / q+_i) [[1, -q-_i / q+_i], [0, 1]]`,
/// `P = prod_{j != i} (q+_j)^(-a_ji)`.
pub fn verify_mp_twist<S: Scalar>(inst: &QQInstance<S>, sol: &QQSolution<S>, i: usize) -> Result<MpCheck<S>, OperError> {
    let ctx = inst.ctx().clone();
    let conn = build_connection(inst, &sol.q_plus)?;
    let oper = gl2_oper(&conn, &sol.q_plus, &inst.cartan, i)?;
    let (qp, qm) = (&sol.q_plus[i], &sol.q_minus[i]);
    let mut p = Poly::one(&ctx);
    let mut z2 = inst.twist.zeta[i].neg();
    for (j, q) in sol.q_plus.iter().enumerate() {
        let a = inst.cartan.a(j, i);
        if j != i && a != 0 {
            p = &p * &q.pow((-a) as u32);
            z2 = z2.sub(&inst.twist.zeta[j].mul_i64(a));
        }
    }
    let zero = RationalFn::zero(&ctx);
    let diag = Matrix2::diagonal(vec![
        RationalFn::from_poly(qp.clone()),
        RationalFn::new(p, qp.clone()).ok_or(OperError::Poly(PolyError::ZeroPolynomial))?,
    ]);
    let shear = Matrix2::from_rows(vec![
        vec![RationalFn::one(&ctx), -&RationalFn::new(qm.clone(), qp.clone()).ok_or(OperError::Poly(PolyError::ZeroPolynomial))?],
        vec![zero.clone(), RationalFn::one(&ctx)],
    ])
    .expect("2x2");
    let v = diag.mul(&shear);
    let v_inv = v.inv2().ok_or(OperError::Poly(PolyError::ZeroPolynomial))?;
    let z = Matrix2::diagonal(vec![RationalFn::constant(inst.twist.zeta[i].clone()), RationalFn::constant(z2)]);
    let difference = oper.raw.sub(&gauge(&v, &v_inv, &z));
    let scale = oper.raw.norm().max(v.norm()).max(1.0);
    let residual = difference.norm();
    let pass = difference.is_negligible(scale);
    Ok(MpCheck { difference, residual, pass })
}

/// The finite part at each root `w` of `q+_i` of
/// `2 / (z - w) + <alpha_i, A^H(z)> + d log Lambda_i(z)`,
/// computed from the connection; indexed `[i][l]` like the roots.
pub fn regularity_residues<S: Scalar>(inst: &QQInstance<S>, sol: &QQSolution<S>) -> Result<Vec<Vec<S>>, OperError> {
    let ctx = inst.ctx().clone();
    let conn = build_connection(inst, &sol.q_plus)?;
    let mut out = Vec::with_capacity(inst.rank());
    for i in 0..inst.rank() {
        let lam = inst.lambda(i);
        let base = &conn.cartan_pairing(&inst.cartan, i) + &RationalFn::log_derivative(&lam).ok_or(PolyError::ZeroPolynomial)?;
        let roots = sol.q_plus[i].roots()?;
        let mut vals = Vec::with_capacity(roots.len());
        for (l, w) in roots.iter().enumerate() {
            let pole = RationalFn::new(Poly::constant(S::from_i64(&ctx, 2)), Poly::linear(w)).expect("nonzero");
            let f = &base + &pole;
            let (mut num, mut den) = (f.num().clone(), f.den().clone());
            // cancel the removable factor (z - w)
            loop {
                let (qn, rn) = num.deflate(w);
                let (qd, rd) = den.deflate(w);
                if den.is_constant() || !rd.is_negligible(den.norm().max(1.0)) || !rn.is_negligible(num.norm().max(1.0)) {
                    break;
                }
                num = qn;
                den = qd;
            }
            let d = den.eval(w);
            if d.is_zero() {
                return Err(OperError::PoleCollision { color: i, index: l });
            }
            vals.push(num.eval(w).div(&d).expect("nonzero"));
        }
        out.push(vals);
    }
    Ok(out)
}

/// Outcome of [`reduce_twist_type_a`].
#[derive(Clone, Debug, PartialEq)]
pub struct TwistReduction<S: Scalar> {
    pub u: MatrixN<S>,
    /// The diagonal part, read as `sum_i zeta_i coroot_i`.
    pub twist: Twist<S>,
    /// `u (d + Z) u^-1`, diagonal by construction.
    pub reduced: MatrixN<S>,
}

/// Conjugates a constant upper triangular traceless `Z` to its diagonal
/// part by unipotent upper triangular `u(z)` with polynomial entries,
/// clearing one diagonal at a time.
pub fn reduce_twist_type_a<S: Scalar>(z: &Matrix<S>) -> Result<TwistReduction<S>, OperError> {
    let n = z.rows();
    if n == 0 || z.cols() != n {
        return Err(OperError::InvalidMatrix("not square".into()));
    }
    let ctx = z.get(0, 0).ctx();
    let mut trace = S::zero(&ctx);
    for i in 0..n {
        trace = trace.add(z.get(i, i));
        for j in 0..i {
            if !z.get(i, j).is_exact_zero() {
                return Err(OperError::InvalidMatrix("not upper triangular".into()));
            }
        }
    }
    if !trace.is_zero() {
        return Err(OperError::InvalidMatrix("not traceless".into()));
    }
    // d + D with polynomial upper triangular D; u accumulates on the left
    let mut d: Vec<Vec<Poly<S>>> =
        (0..n).map(|i| (0..n).map(|j| Poly::constant(z.get(i, j).clone())).collect()).collect();
    let mut u: Vec<Vec<Poly<S>>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Poly::one(&ctx) } else { Poly::zero(&ctx) }).collect())
        .collect();
    for k in 1..n {
        for i in 0..n - k {
            let j = i + k;
            if d[i][j].is_zero() {
                continue;
            }
            // (I + x E_ij)(d + D)(I - x E_ij) clears D_ij when x' + (D_ii - D_jj) x = D_ij
            let shift = z.get(i, i).sub(z.get(j, j));
            let x = crate::polyalg::solve_linear_ode(&shift, &d[i][j]);
            for m in j + 1..n {
                d[i][m] = &d[i][m] + &(&x * &d[j][m]);
            }
            for m in 0..i {
                d[m][j] = &d[m][j] - &(&x * &d[m][i]);
            }
            d[i][j] = Poly::zero(&ctx);
            for m in 0..n {
                let t = &x * &u[j][m];
                u[i][m] = &u[i][m] + &t;
            }
        }
    }
    let mut zeta = Vec::with_capacity(n - 1);
    let mut acc = S::zero(&ctx);
    for i in 0..n - 1 {
        acc = acc.add(z.get(i, i));
        zeta.push(acc.clone());
    }
    let lift = |m: Vec<Vec<Poly<S>>>| {
        RatMatrix::from_rows(m.into_iter().map(|r| r.into_iter().map(RationalFn::from_poly).collect()).collect())
            .expect("square")
    };
    Ok(TwistReduction { u: lift(u), twist: Twist::new(zeta), reduced: lift(d) })
}

/// `sum_i zeta_i coroot_i` in the defining representation.
pub fn twist_matrix<S: Scalar>(ctx: &S::Ctx, twist: &Twist<S>) -> MatrixN<S> {
    let r = twist.rank();
    let mut d = Vec::with_capacity(r + 1);
    for k in 0..=r {
        let a = if k < r { twist.zeta[k].clone() } else { S::zero(ctx) };
        let b = if k > 0 { twist.zeta[k - 1].clone() } else { S::zero(ctx) };
        d.push(RationalFn::constant(a.sub(&b)));
    }
    RatMatrix::diagonal(d)
}

/// The type A connection matrix `sum g_i coroot_i + sum Lambda_i e_i`.
pub fn connection_matrix<S: Scalar>(conn: &MiuraConnection<S>) -> MatrixN<S> {
    let r = conn.g.len();
    let ctx = conn.g[0].ctx().clone();
    let mut m = RatMatrix::zeros(&ctx, r + 1);
    for i in 0..r {
        m.set(i, i, &m.get(i, i).clone() + &conn.g[i]);
        m.set(i + 1, i + 1, &m.get(i + 1, i + 1).clone() - &conn.g[i]);
        m.set(i, i + 1, RationalFn::from_poly(conn.lambdas[i].clone()));
    }
    m
}

/// Residual `A v - v Z + v'`, zero iff `A = v (d + Z) v^-1`.
pub fn gauge_residual<S: Scalar>(a: &MatrixN<S>, v: &MatrixN<S>, z: &MatrixN<S>) -> MatrixN<S> {
    a.mul(v).sub(&v.mul(z)).add(&v.deriv())
}

/// Outcome of [`diagonalize_type_a`].
#[derive(Clone, Debug, PartialEq)]
pub struct Diagonalization<S: Scalar> {
    /// `b+`, with `A = v (d + Z^H) v^-1`.
    pub v: MatrixN<S>,
    pub b_minus: MatrixN<S>,
    pub n_plus: MatrixN<S>,
    pub connection: MatrixN<S>,
    pub residual_matrix: MatrixN<S>,
    pub residual: f64,
    pub pass: bool,
}

fn longest_check<S: Scalar>(inst: &QQInstance<S>, word: &WeylWord) -> Result<(), OperError> {
    if inst.cartan_type.family() != Family::A {
        return Err(OperError::UnsupportedType(inst.cartan_type));
    }
    word.check_reduced(&inst.cartan)?;
    if word.len() != inst.cartan_type.positive_root_count() {
        return Err(OperError::NotLongest(word.clone()));
    }
    Ok(())
}

/// Runs the chain along a reduced word for `w0` and factors
/// `b- = E(z) prod_j (qbar+_j)^coroot_j` as `b+ w0 n+`, where
/// `E = exp(-mu_1 f) ... exp(-mu_k f)` lists the steps in application order.
pub fn diagonalize_type_a<S: Scalar>(
    inst: &QQInstance<S>,
    sol: &QQSolution<S>,
    word: &WeylWord,
    seed: u64,
) -> Result<Diagonalization<S>, OperError> {
    longest_check(inst, word)?;
    let trace = chain(inst, sol, word, seed)?;
    diagonalize_trace(&trace)
}

pub fn diagonalize_trace<S: Scalar>(trace: &ChainTrace<S>) -> Result<Diagonalization<S>, OperError> {
    let inst = &trace.instance;
    longest_check(inst, &trace.word)?;
    if !trace.composable() {
        return Err(OperError::Chain("trace is not fully composable".into()));
    }
    let ctx = inst.ctx().clone();
    let n = inst.rank() + 1;
    let mut b_minus = RatMatrix::identity(&ctx, n);
    for step in &trace.steps {
        let mut g = RatMatrix::identity(&ctx, n);
        g.set(step.index + 1, step.index, -&step.mu);
        b_minus = b_minus.mul(&g);
    }
    let qbar = &trace.final_solution().q_plus;
    let mut h = Vec::with_capacity(n);
    for k in 0..n {
        let top = if k < n - 1 { qbar[k].clone() } else { Poly::one(&ctx) };
        let bottom = if k > 0 { qbar[k - 1].clone() } else { Poly::one(&ctx) };
        h.push(RationalFn::new(top, bottom).ok_or(OperError::Poly(PolyError::ZeroPolynomial))?);
    }
    let b_minus = b_minus.mul(&RatMatrix::diagonal(h));

    // Crout on J b-: J b- = L U with U unit upper triangular
    let scale = b_minus.norm().max(1.0);
    let jb = |i: usize, j: usize| b_minus.get(n - 1 - i, j).clone();
    let mut l = RatMatrix::zeros(&ctx, n);
    let mut u = RatMatrix::identity(&ctx, n);
    for j in 0..n {
        for i in j..n {
            let mut acc = jb(i, j);
            for k in 0..j {
                acc = &acc - &(l.get(i, k) * u.get(k, j));
            }
            l.set(i, j, acc);
        }
        let pivot = l.get(j, j).clone();
        if pivot.is_negligible(scale) {
            return Err(OperError::FactorizationFailed(j));
        }
        let pinv = pivot.inv().expect("nonzero pivot");
        for i in j + 1..n {
            let mut acc = jb(j, i);
            for k in 0..j {
                acc = &acc - &(l.get(j, k) * u.get(k, i));
            }
            u.set(j, i, &acc * &pinv);
        }
    }
    // b+ = J L J
    let mut v = RatMatrix::zeros(&ctx, n);
    for i in 0..n {
        for j in 0..n {
            v.set(i, j, l.get(n - 1 - i, n - 1 - j).clone());
        }
    }
    let conn = build_connection(inst, &trace.solution.q_plus)?;
    let a = connection_matrix(&conn);
    let z = twist_matrix(&ctx, &inst.twist);
    let residual_matrix = gauge_residual(&a, &v, &z);
    let residual = residual_matrix.norm();
    let pass = residual_matrix.is_negligible(a.norm().max(v.norm()).max(1.0));
    Ok(Diagonalization { v, b_minus, n_plus: u, connection: a, residual_matrix, residual, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bethe::{bethe_residual, BetheRoots};
    use crate::polyalg::Rational;
    use crate::qqcore::Point;

    fn q(s: &str) -> Rational {
        Rational::parse(s).unwrap()
    }

    fn p(c: &[i64]) -> Poly<Rational> {
        Poly::from_i64s(&(), c)
    }

    fn rf(num: &[i64], den: &[i64]) -> RationalFn<Rational> {
        RationalFn::new(p(num), p(den)).unwrap()
    }

    fn a1() -> (QQInstance<Rational>, QQSolution<Rational>) {
        let inst = QQInstance::new(
            "A1".parse().unwrap(),
            vec![Point { z: q("0"), weights: vec![1] }],
            Twist::new(vec![q("1/2")]),
        )
        .unwrap();
        (inst, QQSolution::new(vec![p(&[1, 1])], vec![p(&[1])]))
    }

    #[test]
    fn connection_examples() {
        let (inst, sol) = a1();
        let conn = build_connection(&inst, &sol.q_plus).unwrap();
        // 1/2 - 1/(z+1) = (z - 1) / (2 (z + 1))
        assert_eq!(conn.g[0], &RationalFn::constant(q("1/2")) - &rf(&[1], &[1, 1]));
        let flat = build_connection(&inst, &[p(&[1])]).unwrap();
        assert_eq!(flat.g[0], RationalFn::constant(q("1/2")));
        let zero = inst.with_twist(Twist::new(vec![q("0")]));
        assert!(build_connection(&zero, &[p(&[1])]).unwrap().g[0].is_zero());
    }

    #[test]
    fn gl2_examples() {
        let (inst, sol) = a1();
        let conn = build_connection(&inst, &sol.q_plus).unwrap();
        let o = gl2_oper(&conn, &sol.q_plus, &inst.cartan, 0).unwrap();
        assert_eq!(o.rho, RationalFn::from_poly(p(&[0, 1])));
        assert_eq!(o.raw.get(1, 1), &-&conn.g[0]);
        assert_eq!(o.tilde, o.raw);

        let a2 = QQInstance::new(
            "A2".parse().unwrap(),
            vec![Point { z: q("0"), weights: vec![1, 0] }],
            Twist::new(vec![q("1"), q("2")]),
        )
        .unwrap();
        let qp = vec![p(&[1, 1]), p(&[-3, 1])];
        let conn = build_connection(&a2, &qp).unwrap();
        let o = gl2_oper(&conn, &qp, &a2.cartan, 0).unwrap();
        assert_eq!(o.rho, RationalFn::from_poly(&p(&[0, 1]) * &qp[1]));
        // constant trace 1 - sum a_j1 zeta_j away from the 1 on the diagonal
        let tr = o.tilde.get(0, 0) + o.tilde.get(1, 1);
        assert_eq!(tr, RationalFn::constant(q("2")));
    }

    #[test]
    fn mp_twist_examples() {
        let (inst, sol) = a1();
        assert!(verify_mp_twist(&inst, &sol, 0).unwrap().pass);
        let bad = QQSolution::new(sol.q_plus.clone(), vec![p(&[2])]);
        let chk = verify_mp_twist(&inst, &bad, 0).unwrap();
        assert!(!chk.pass);
        let trivial = crate::qqcore::complete_minus(&inst, &[p(&[1])], None).unwrap();
        assert!(verify_mp_twist(&inst, &trivial, 0).unwrap().pass);
    }

    #[test]
    fn regularity_matches_bethe_on_example() {
        let (inst, sol) = a1();
        let reg = regularity_residues(&inst, &sol).unwrap();
        assert_eq!(reg, vec![vec![q("0")]]);
        let off = QQSolution::new(vec![p(&[-1, 1])], vec![p(&[1])]);
        let roots = BetheRoots::new(vec![vec![q("1")]]);
        assert_eq!(regularity_residues(&inst, &off).unwrap()[0][0], bethe_residual(&inst, &roots, 0, 0).unwrap());
        let empty = QQSolution::new(vec![p(&[1])], vec![p(&[0, 1])]);
        assert_eq!(regularity_residues(&inst, &empty).unwrap(), vec![Vec::<Rational>::new()]);
    }

    fn qm(rows: &[&[&str]]) -> Matrix<Rational> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|s| q(s)).collect()).collect()).unwrap()
    }

    #[test]
    fn twist_reduction_examples() {
        let d = qm(&[&["1", "0"], &["0", "-1"]]);
        let red = reduce_twist_type_a(&d).unwrap();
        assert_eq!(red.u, RatMatrix::identity(&(), 2));
        assert_eq!(red.twist.zeta, vec![q("1")]);

        let z = qm(&[&["3", "5"], &["0", "-3"]]);
        let red = reduce_twist_type_a(&z).unwrap();
        assert_eq!(red.u.get(0, 1), &RationalFn::constant(q("5/6")));
        assert_eq!(red.reduced, RatMatrix::constant(&d).add(&RatMatrix::constant(&qm(&[&["2", "0"], &["0", "-2"]]))));

        let z = qm(&[&["0", "4"], &["0", "0"]]);
        let red = reduce_twist_type_a(&z).unwrap();
        assert_eq!(red.u.get(0, 1), &rf(&[0, 4], &[1]));
        let zr = RatMatrix::constant(&z);
        let check = red.u.mul(&zr).sub(&red.u.deriv()).sub(&red.reduced.mul(&red.u));
        assert!(check.is_negligible(1.0));

        assert!(reduce_twist_type_a(&qm(&[&["1", "0"], &["0", "1"]])).is_err());
        assert!(reduce_twist_type_a(&qm(&[&["0", "0"], &["1", "0"]])).is_err());
    }

    #[test]
    fn diagonalize_a1() {
        let (inst, sol) = a1();
        let d = diagonalize_type_a(&inst, &sol, &"1".parse().unwrap(), 0).unwrap();
        assert!(d.pass, "{}", d.residual_matrix);
        // the framing diag(q+, 1/q+) [[1, -q-/q+], [0, 1]] up to a constant diagonal
        let framing = RatMatrix::from_rows(vec![
            vec![RationalFn::from_poly(p(&[1, 1])), RationalFn::from_poly(p(&[-1]))],
            vec![RationalFn::zero(&()), rf(&[1], &[1, 1])],
        ])
        .unwrap();
        let c0 = d.v.get(0, 0).div(framing.get(0, 0)).unwrap();
        let c1 = d.v.get(1, 1).div(framing.get(1, 1)).unwrap();
        assert!(c0.as_poly().unwrap().is_constant() && c1.as_poly().unwrap().is_constant());
        assert_eq!(d.v, framing.mul(&RatMatrix::diagonal(vec![c0, c1])));
    }

    #[test]
    fn diagonalize_rejects_short_words() {
        let inst = QQInstance::new(
            "A2".parse().unwrap(),
            vec![Point { z: q("0"), weights: vec![1, 1] }],
            Twist::new(vec![q("1"), q("3")]),
        )
        .unwrap();
        let sol = crate::qqcore::complete_minus(&inst, &[p(&[1]), p(&[1])], None).unwrap();
        assert!(matches!(diagonalize_type_a(&inst, &sol, &"12".parse().unwrap(), 0), Err(OperError::NotLongest(_))));
        let d = diagonalize_type_a(&inst, &sol, &"121".parse().unwrap(), 0).unwrap();
        assert!(d.pass, "{}", d.residual_matrix);
    }
}
