//! Exact solutions of the qq-system at infinite twist.
//!
//! Each `q+_j` is a product over a chosen root set `W_j`; the sets must be
//! drawn from the zeros of `Lambda_j` and of the neighbouring `q+_k`, so
//! that `q+_j` divides the right-hand side and `q-_j` is the cofactor.

use super::BetheError;
use crate::polyalg::{Poly, Scalar};
use crate::qqcore::{QQInstance, QQSolution};

/// Root sets `W_j`, one per color.
#[derive(Clone, Debug, PartialEq)]
pub struct InfinitePartition<S: Scalar> {
    pub w: Vec<Vec<S>>,
}

impl<S: Scalar> InfinitePartition<S> {
    pub fn degrees(&self) -> Vec<usize> {
        self.w.iter().map(Vec::len).collect()
    }
}

fn contains<S: Scalar>(set: &[S], x: &S) -> bool {
    set.iter().any(|y| y.approx_eq(x))
}

/// Zeros of `Lambda_j`, which must be simple.
fn point_set<S: Scalar>(inst: &QQInstance<S>, j: usize) -> Result<Vec<S>, BetheError> {
    if !inst.extra[j].is_constant() {
        return Err(BetheError::Unsupported("Lambda carries a non-constant extra factor".into()));
    }
    let mut out = Vec::new();
    for pt in &inst.points {
        match pt.weights[j] {
            0 => {}
            1 => out.push(pt.z.clone()),
            _ => {
                return Err(BetheError::BadPartition(format!(
                    "Lambda_{} has a repeated zero at {}",
                    j + 1,
                    pt.z
                )))
            }
        }
    }
    Ok(out)
}

/// Zeros of the right-hand side of color `j` with multiplicity.
fn rhs_multiset<S: Scalar>(inst: &QQInstance<S>, w: &[Vec<S>], j: usize) -> Result<Vec<S>, BetheError> {
    let mut m = point_set(inst, j)?;
    for (k, wk) in w.iter().enumerate() {
        let a = inst.cartan.a(k, j);
        if k != j && a != 0 {
            for _ in 0..(-a) {
                m.extend(wk.iter().cloned());
            }
        }
    }
    Ok(m)
}

fn validate<S: Scalar>(inst: &QQInstance<S>, part: &InfinitePartition<S>) -> Result<(), BetheError> {
    let r = inst.rank();
    let bad = |s: String| Err(BetheError::BadPartition(s));
    if part.w.len() != r {
        return bad(format!("{} root sets for rank {r}", part.w.len()));
    }
    if !inst.cartan_type.is_simply_laced() {
        return Err(BetheError::Unsupported(format!("infinite solutions need a simply-laced type, got {}", inst.cartan_type)));
    }
    for pt in &inst.points {
        if pt.weights.iter().filter(|&&e| e > 0).count() > 1 {
            return bad(format!("point {} lies in the zero sets of two colors", pt.z));
        }
    }
    for (j, wj) in part.w.iter().enumerate() {
        for (s, x) in wj.iter().enumerate() {
            if contains(&wj[..s], x) {
                return bad(format!("root {x} repeated in color {}", j + 1));
            }
        }
        let zj = point_set(inst, j)?;
        for (k, wk) in part.w.iter().enumerate() {
            if k != j && inst.cartan.a(j, k) == 0 && wk.iter().any(|x| contains(&zj, x)) {
                return bad(format!("color {} uses a zero of Lambda_{}", k + 1, j + 1));
            }
        }
        let m = rhs_multiset(inst, &part.w, j)?;
        for (s, x) in m.iter().enumerate() {
            if contains(&m[..s], x) {
                return bad(format!("right-hand side of color {} has a repeated zero at {x}", j + 1));
            }
        }
        if let Some(x) = wj.iter().find(|x| !contains(&m, x)) {
            return bad(format!("root {x} of color {} is not a zero of its right-hand side", j + 1));
        }
    }
    Ok(())
}

/// `q+_j = prod_{W_j} (z - w)` and `q-_j` = right-hand side over `q+_j`.
pub fn infinite_solution<S: Scalar>(inst: &QQInstance<S>, part: &InfinitePartition<S>) -> Result<QQSolution<S>, BetheError> {
    validate(inst, part)?;
    let ctx = inst.ctx();
    let one = S::one(ctx);
    let q_plus: Vec<Poly<S>> = part.w.iter().map(|w| Poly::from_roots(ctx, w, &one)).collect();
    let q_minus = (0..inst.rank())
        .map(|j| {
            inst.rhs(&q_plus, j)
                .div_exact(&q_plus[j])
                .ok_or_else(|| BetheError::BadPartition(format!("q+_{} does not divide its right-hand side", j + 1)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(QQSolution::new(q_plus, q_minus))
}

const SEARCH_LIMIT: usize = 100_000;

/// Searches for a partition with the given degrees, choosing each `W_j`
/// from `Z_j` and the sets of already chosen neighbours.
pub fn find_partition<S: Scalar>(inst: &QQInstance<S>, degrees: &[usize]) -> Option<InfinitePartition<S>> {
    let r = inst.rank();
    if degrees.len() != r {
        return None;
    }
    let forward: Vec<usize> = (0..r).collect();
    let backward: Vec<usize> = (0..r).rev().collect();
    let mut budget = SEARCH_LIMIT;
    [forward, backward].into_iter().find_map(|order| {
        let mut w = vec![Vec::new(); r];
        search(inst, degrees, &order, 0, &mut w, &mut budget).then(|| InfinitePartition { w })
    })
}

fn search<S: Scalar>(
    inst: &QQInstance<S>,
    degrees: &[usize],
    order: &[usize],
    pos: usize,
    w: &mut Vec<Vec<S>>,
    budget: &mut usize,
) -> bool {
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    if pos == order.len() {
        return validate(inst, &InfinitePartition { w: w.clone() }).is_ok();
    }
    let j = order[pos];
    let Ok(mut cand) = point_set(inst, j) else {
        return false;
    };
    for &k in &order[..pos] {
        if inst.cartan.a(k, j) < 0 {
            for x in &w[k] {
                if !contains(&cand, x) {
                    cand.push(x.clone());
                }
            }
        }
    }
    let d = degrees[j];
    if d > cand.len() {
        return false;
    }
    let mut idx: Vec<usize> = (0..d).collect();
    loop {
        w[j] = idx.iter().map(|&t| cand[t].clone()).collect();
        if search(inst, degrees, order, pos + 1, w, budget) {
            return true;
        }
        // next combination in lexicographic order
        let n = cand.len();
        let Some(p) = (0..d).rev().find(|&p| idx[p] != p + n - d) else {
            break;
        };
        idx[p] += 1;
        for q in p + 1..d {
            idx[q] = idx[q - 1] + 1;
        }
    }
    w[j].clear();
    false
}
