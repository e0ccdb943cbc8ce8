//! Bäcklund transformations of qq-solutions.
//!
//! The simple transformation at color `i` gauges the Miura connection by
//! `exp(mu_i f_i)`: it swaps `q+_i` with `q-_i` and reflects the twist by
//! `s_i`. Solutions are kept monic; the constant pulled out of `q-_i` is
//! pushed into the leading coefficients of the neighbouring `Lambda_j`.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::polyalg::{Poly, RationalFn, Scalar};
use crate::qqcore::{check_nondegenerate, complete_color, expected_minus_degree, qq_check, QQError, QQInstance, QQSolution};
use crate::rootsys::{cartan_matrix, reflect_twist, CartanType, RootSystemError, WeylWord};

const GENERIC_RETRIES: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BacklundError {
    #[error("q+ or q- of color {} vanishes", .0 + 1)]
    ZeroDenominator(usize),
    #[error("equation {} of the qq-system does not hold", .0 + 1)]
    NotASolution(usize),
    #[error(transparent)]
    Completion(#[from] QQError),
    #[error(transparent)]
    RootSystem(#[from] RootSystemError),
}

/// `mu_i` by both formulas.
#[derive(Clone, Debug, PartialEq)]
pub struct Mu<S: Scalar> {
    /// `prod_{j != i} (q+_j)^(-a_ji) / (q+_i q-_i)`.
    pub value: RationalFn<S>,
    /// `Lambda_i^-1 [d log(q-_i / q+_i) + xi_i]`.
    pub from_log: RationalFn<S>,
    pub agree: bool,
}

fn mu_from_log<S: Scalar>(lambda: &Poly<S>, xi: &S, qp: &Poly<S>, qm: &Poly<S>, i: usize) -> Result<RationalFn<S>, BacklundError> {
    let ld = |p: &Poly<S>| RationalFn::log_derivative(p).ok_or(BacklundError::ZeroDenominator(i));
    let bracket = &(&ld(qm)? - &ld(qp)?) + &RationalFn::constant(xi.clone());
    bracket
        .div(&RationalFn::from_poly(lambda.clone()))
        .ok_or(BacklundError::ZeroDenominator(i))
}

pub fn mu<S: Scalar>(inst: &QQInstance<S>, sol: &QQSolution<S>, i: usize) -> Result<Mu<S>, BacklundError> {
    inst.cartan.check_index(i)?;
    let (qp, qm) = (&sol.q_plus[i], &sol.q_minus[i]);
    if qp.is_zero() || qm.is_zero() {
        return Err(BacklundError::ZeroDenominator(i));
    }
    let mut num = Poly::one(inst.ctx());
    for (j, q) in sol.q_plus.iter().enumerate() {
        let a = inst.cartan.a(j, i);
        if j != i && a != 0 {
            num = &num * &q.pow((-a) as u32);
        }
    }
    let value = RationalFn::new(num, qp * qm).ok_or(BacklundError::ZeroDenominator(i))?;
    let from_log = mu_from_log(&inst.lambda(i), &inst.xi(i), qp, qm, i)?;
    let diff = &value - &from_log;
    let scale = value.num().norm().max(from_log.num().norm()).max(1.0);
    let agree = diff.is_negligible(scale);
    Ok(Mu { value, from_log, agree })
}

/// The transformation at color `i`. `constants[j]` pins the free multiple
/// of `q+_j` in any recompleted `q-_j` whose pairing vanishes (default 0).
pub fn apply_simple_with<S: Scalar>(
    inst: &QQInstance<S>,
    sol: &QQSolution<S>,
    i: usize,
    constants: Option<&[S]>,
) -> Result<(QQInstance<S>, QQSolution<S>), BacklundError> {
    inst.cartan.check_index(i)?;
    if !qq_check(inst, sol, i).pass {
        return Err(BacklundError::NotASolution(i));
    }
    let lambda = sol.q_minus[i].lead().ok_or(BacklundError::ZeroDenominator(i))?.clone();
    let lambda_inv = lambda.inv().ok_or(BacklundError::ZeroDenominator(i))?;
    let ctx = inst.ctx().clone();
    let mut next = inst.with_twist(reflect_twist(i, &inst.twist, &inst.cartan));
    for j in inst.cartan.neighbours(i) {
        let a = inst.cartan.a(i, j);
        next.lead[j] = next.lead[j].mul(&lambda.powi(-a).expect("nonzero lead"));
    }
    let mut q_plus = sol.q_plus.clone();
    let mut q_minus = sol.q_minus.clone();
    q_plus[i] = sol.q_minus[i].scale(&lambda_inv);
    q_minus[i] = sol.q_plus[i].scale(&lambda.neg());
    let dplus: Vec<usize> = q_plus.iter().map(|p| p.degree().unwrap_or(0)).collect();
    let zero = S::zero(&ctx);
    for j in inst.cartan.neighbours(i) {
        let c = constants.map_or(&zero, |cs| &cs[j]);
        q_minus[j] = complete_color(
            &q_plus[j],
            &next.xi(j),
            &next.rhs(&q_plus, j),
            expected_minus_degree(&next, &dplus, j),
            c,
            j,
        )?;
    }
    Ok((next, QQSolution::new(q_plus, q_minus)))
}

pub fn apply_simple<S: Scalar>(
    inst: &QQInstance<S>,
    sol: &QQSolution<S>,
    i: usize,
) -> Result<(QQInstance<S>, QQSolution<S>), BacklundError> {
    apply_simple_with(inst, sol, i, None)
}

/// Degrees `d`, `N = deg Lambda` and the colors whose pairing vanishes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinatorialDatum {
    pub cartan_type: CartanType,
    pub d: Vec<i64>,
    pub n: Vec<i64>,
    /// Simple roots `i` with `xi_i = 0`.
    pub psi: Vec<usize>,
    /// Every root of the system kills the twist.
    pub twist_vanishes: bool,
}

impl CombinatorialDatum {
    pub fn new(cartan_type: CartanType, d: Vec<i64>, n: Vec<i64>) -> Self {
        Self { cartan_type, d, n, psi: Vec::new(), twist_vanishes: false }
    }

    pub fn from_instance<S: Scalar>(inst: &QQInstance<S>, q_plus: &[Poly<S>]) -> Self {
        let r = inst.rank();
        let psi: Vec<usize> = (0..r).filter(|&i| inst.xi_vanishes(i)).collect();
        Self {
            cartan_type: inst.cartan_type,
            d: q_plus.iter().map(|p| p.degree_i64()).collect(),
            n: (0..r).map(|i| inst.lambda_degree(i) as i64).collect(),
            twist_vanishes: psi.len() == r,
            psi,
        }
    }
}

/// `d_i -> N_i - d_i - sum_{k != i} a_ki d_k`, other colors unchanged.
pub fn degree_map(datum: &CombinatorialDatum, d: &[i64], i: usize) -> Vec<i64> {
    let c = cartan_matrix(datum.cartan_type);
    let mut out = d.to_vec();
    let mut v = datum.n[i] - d[i];
    for (k, &dk) in d.iter().enumerate() {
        if k != i {
            v -= c.a(k, i) * dk;
        }
    }
    out[i] = v;
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixCheck {
    /// Number of letters applied, counted from the right end of the word.
    pub prefix: usize,
    pub degrees: Vec<i64>,
    /// Per color: `0 <= d_j <= N_j - sum_{p != j} a_pj d_p`.
    pub holds: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissibilityReport {
    pub prefixes: Vec<PrefixCheck>,
    pub pass: bool,
}

impl AdmissibilityReport {
    pub fn first_failure(&self) -> Option<usize> {
        self.prefixes.iter().find(|p| !p.holds.iter().all(|&b| b)).map(|p| p.prefix)
    }
}

pub fn check_admissible(datum: &CombinatorialDatum, word: &WeylWord) -> AdmissibilityReport {
    let c = cartan_matrix(datum.cartan_type);
    let check = |d: &[i64]| -> Vec<bool> {
        (0..d.len())
            .map(|j| {
                let mut bound = datum.n[j];
                for (p, &dp) in d.iter().enumerate() {
                    if p != j {
                        bound -= c.a(p, j) * dp;
                    }
                }
                d[j] >= 0 && d[j] <= bound
            })
            .collect()
    };
    let mut d = datum.d.clone();
    let mut prefixes = vec![PrefixCheck { prefix: 0, holds: check(&d), degrees: d.clone() }];
    for (s, &i) in word.letters.iter().rev().enumerate() {
        d = degree_map(datum, &d, i);
        prefixes.push(PrefixCheck { prefix: s + 1, holds: check(&d), degrees: d.clone() });
    }
    let pass = prefixes.iter().all(|p| p.holds.iter().all(|&b| b));
    AdmissibilityReport { prefixes, pass }
}

/// One applied reflection.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainStep<S: Scalar> {
    /// Color of the reflection (0-based).
    pub index: usize,
    pub instance: QQInstance<S>,
    pub solution: QQSolution<S>,
    pub composable: bool,
    pub generic: bool,
    /// The gauge parameter of the connection for this step.
    pub mu: RationalFn<S>,
    /// `mu` in the normalization of the solution the step started from.
    pub mu_ledger: RationalFn<S>,
    /// Number of re-randomized `q-` constants tried (0 if none were needed).
    pub retries: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainTrace<S: Scalar> {
    pub word: WeylWord,
    pub instance: QQInstance<S>,
    pub solution: QQSolution<S>,
    pub initial_generic: bool,
    /// In application order: the last letter of the word first.
    pub steps: Vec<ChainStep<S>>,
}

impl<S: Scalar> ChainTrace<S> {
    pub fn final_instance(&self) -> &QQInstance<S> {
        self.steps.last().map_or(&self.instance, |s| &s.instance)
    }

    pub fn final_solution(&self) -> &QQSolution<S> {
        self.steps.last().map_or(&self.solution, |s| &s.solution)
    }

    pub fn is_complete(&self) -> bool {
        self.steps.len() == self.word.len()
    }

    pub fn composable(&self) -> bool {
        self.is_complete() && self.steps.iter().all(|s| s.composable)
    }

    pub fn generic(&self) -> bool {
        self.composable() && self.initial_generic && self.steps.iter().all(|s| s.generic)
    }

    /// Connection-level `mu`'s in application order.
    pub fn mus(&self) -> Vec<&RationalFn<S>> {
        self.steps.iter().map(|s| &s.mu).collect()
    }
}

/// A chain that stopped early, with everything computed before the break.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainFailure<S: Scalar> {
    pub step: usize,
    pub color: usize,
    pub error: BacklundError,
    pub partial: ChainTrace<S>,
}

impl<S: Scalar> fmt::Display for ChainFailure<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chain broken at step {} (color {}): {}", self.step + 1, self.color + 1, self.error)
    }
}

impl<S: Scalar> std::error::Error for ChainFailure<S> {}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError<S: Scalar> {
    #[error("{0}")]
    Broken(ChainFailure<S>),
    #[error(transparent)]
    RootSystem(#[from] RootSystemError),
    #[error(transparent)]
    Backlund(#[from] BacklundError),
}

/// Applies the word right to left, recording every intermediate solution.
///
/// When the pairing of the reflected color vanishes, `q-_i` is only
/// defined up to multiples of `q+_i`; if the result is degenerate the step
/// is retried with `q-_i + c q+_i` for seeded random `c`.
pub fn chain<S: Scalar>(
    inst: &QQInstance<S>,
    sol: &QQSolution<S>,
    word: &WeylWord,
    seed: u64,
) -> Result<ChainTrace<S>, ChainError<S>> {
    word.check_reduced(&inst.cartan)?;
    let r = inst.rank();
    for i in 0..r {
        if !qq_check(inst, sol, i).pass {
            return Err(BacklundError::NotASolution(i).into());
        }
    }
    let ctx = inst.ctx().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = ChainTrace {
        word: word.clone(),
        instance: inst.clone(),
        solution: sol.clone(),
        initial_generic: check_nondegenerate(inst, &sol.q_plus).overall,
        steps: Vec::new(),
    };
    for (step, &i) in word.letters.iter().rev().enumerate() {
        let (cur_inst, cur_sol) = (trace.final_instance().clone(), trace.final_solution().clone());
        let lambda0 = inst.lambda(i);
        let xi = cur_inst.xi(i);
        let free = cur_inst.xi_vanishes(i);
        let mut attempt = 0;
        let outcome = loop {
            let mut trial = cur_sol.clone();
            if attempt > 0 {
                let c = S::random(&ctx, &mut rng, 4.0);
                trial.q_minus[i] = &trial.q_minus[i] + &trial.q_plus[i].scale(&c);
            }
            let res = mu(&cur_inst, &trial, i).and_then(|m| {
                let conn = mu_from_log(&lambda0, &xi, &trial.q_plus[i], &trial.q_minus[i], i)?;
                let (ni, ns) = apply_simple(&cur_inst, &trial, i)?;
                Ok((m.value, conn, ni, ns))
            });
            let generic = res.as_ref().is_ok_and(|(_, _, ni, ns)| check_nondegenerate(ni, &ns.q_plus).overall);
            if generic || !free || attempt == GENERIC_RETRIES {
                break res.map(|r| (r, generic, attempt));
            }
            attempt += 1;
        };
        match outcome {
            Ok(((mu_ledger, mu, instance, solution), generic, retries)) => {
                log::debug!(target: "qqsys::chain", "step {} color {} generic {generic}", step + 1, i + 1);
                trace.steps.push(ChainStep { index: i, instance, solution, composable: true, generic, mu, mu_ledger, retries });
            }
            Err(error) => return Err(ChainError::Broken(ChainFailure { step, color: i, error, partial: trace })),
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::Rational;
    use crate::qqcore::{is_solution, Point};
    use crate::rootsys::Twist;

    fn q(s: &str) -> Rational {
        Rational::parse(s).unwrap()
    }

    fn p(c: &[i64]) -> Poly<Rational> {
        Poly::from_i64s(&(), c)
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
    fn mu_examples() {
        let (inst, sol) = a1();
        let m = mu(&inst, &sol, 0).unwrap();
        assert_eq!(m.value, RationalFn::new(p(&[1]), p(&[1, 1])).unwrap());
        assert!(m.agree);
        let bad = QQSolution::new(vec![p(&[1, 1])], vec![p(&[2])]);
        assert!(!mu(&inst, &bad, 0).unwrap().agree);
        let zero_twist = inst.with_twist(Twist::new(vec![q("0")]));
        let m = mu(&zero_twist, &QQSolution::new(vec![p(&[1])], vec![p(&[0, 1])]), 0).unwrap();
        assert_eq!(m.value, RationalFn::new(p(&[1]), p(&[0, 1])).unwrap());
    }

    #[test]
    fn simple_step_example() {
        let (inst, sol) = a1();
        let (ni, ns) = apply_simple(&inst, &sol, 0).unwrap();
        assert_eq!(ni.xi(0), q("-1"));
        assert_eq!(ns.q_plus[0], p(&[1]));
        assert_eq!(ns.q_minus[0], p(&[-1, -1]));
        assert!(is_solution(&ni, &ns));
        let (bi, bs) = apply_simple(&ni, &ns, 0).unwrap();
        assert_eq!(bi.twist, inst.twist);
        assert_eq!(bs.q_plus, sol.q_plus);
    }

    #[test]
    fn degree_map_examples() {
        let a1 = CombinatorialDatum::new("A1".parse().unwrap(), vec![1], vec![1]);
        assert_eq!(degree_map(&a1, &a1.d, 0), vec![0]);
        let a2 = CombinatorialDatum::new("A2".parse().unwrap(), vec![1, 1], vec![2, 0]);
        assert_eq!(degree_map(&a2, &a2.d, 0), vec![2, 1]);
        let z = CombinatorialDatum::new("A1".parse().unwrap(), vec![0], vec![0]);
        assert_eq!(degree_map(&z, &z.d, 0), vec![0]);
    }

    #[test]
    fn admissibility_examples() {
        let w: WeylWord = "1".parse().unwrap();
        let ok = CombinatorialDatum::new("A1".parse().unwrap(), vec![1], vec![1]);
        let rep = check_admissible(&ok, &w);
        assert!(rep.pass);
        assert_eq!(rep.prefixes[1].degrees, vec![0]);
        let bad = CombinatorialDatum::new("A1".parse().unwrap(), vec![2], vec![1]);
        assert_eq!(check_admissible(&bad, &w).first_failure(), Some(0));
        let zero = CombinatorialDatum::new("A3".parse().unwrap(), vec![0; 3], vec![0; 3]);
        assert!(check_admissible(&zero, &"121321".parse().unwrap()).pass);
    }

    #[test]
    fn chain_examples() {
        let (inst, sol) = a1();
        let t = chain(&inst, &sol, &"1".parse().unwrap(), 0).unwrap();
        assert_eq!(t.steps.len(), 1);
        assert!(t.composable() && t.generic());
        let t = chain(&inst, &sol, &WeylWord::new(vec![]), 0).unwrap();
        assert!(t.steps.is_empty() && t.generic());
        assert_eq!(t.final_solution(), &sol);
    }

    #[test]
    fn broken_chain_keeps_partial_trace() {
        // degenerate solution with constant Lambda and xi = (1, 0); after s_1
        // the second color would need deg q-_2 = -1
        let inst = QQInstance::new("A2".parse().unwrap(), vec![], Twist::new(vec![q("2/3"), q("1/3")])).unwrap();
        let sol = QQSolution::new(vec![p(&[0, 1]), p(&[0, 0, 1])], vec![p(&[0, 1]), p(&[-1]).scale(&q("1/2"))]);
        assert!(is_solution(&inst, &sol));
        let word: WeylWord = "21".parse().unwrap();
        match chain(&inst, &sol, &word, 0) {
            Err(ChainError::Broken(f)) => {
                assert_eq!((f.step, f.color), (0, 0));
                assert_eq!(f.error, BacklundError::Completion(QQError::InconsistentSystem(1)));
                assert!(f.partial.steps.is_empty());
            }
            other => panic!("expected a broken chain, got {other:?}"),
        }
        assert!(matches!(chain(&inst, &sol, &WeylWord::new(vec![0, 0]), 0), Err(ChainError::RootSystem(_))));
    }
}
