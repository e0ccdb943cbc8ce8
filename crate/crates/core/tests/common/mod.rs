#![allow(dead_code)]

use qqsys::backlund::{chain, ChainTrace};
use qqsys::bethe::find_partition;
use qqsys::qqcore::complete_minus;
use qqsys::rootsys::w0_reduced_word;
use qqsys::{Mp, NumCtx, Point, Poly, QQInstance, QQSolution, Rational, Scalar, Twist};
use rand::Rng;

pub fn q(s: &str) -> Rational {
    Rational::parse(s).unwrap()
}

pub fn exact_instance(ty: &str, points: &[(&str, &[u32])], zeta: &[&str]) -> QQInstance<Rational> {
    let points = points.iter().map(|(z, w)| Point { z: q(z), weights: w.to_vec() }).collect();
    QQInstance::new(ty.parse().unwrap(), points, Twist::new(zeta.iter().map(|s| q(s)).collect())).unwrap()
}

pub fn trivial_solution<S: Scalar>(inst: &QQInstance<S>) -> QQSolution<S> {
    let ones = vec![Poly::one(inst.ctx()); inst.rank()];
    complete_minus(inst, &ones, None).unwrap()
}

/// Instances whose trivial solution is chained along `w0` to produce exact
/// solutions with nontrivial `q+`.
pub fn exact_seed_instances() -> Vec<QQInstance<Rational>> {
    vec![
        exact_instance("A1", &[("0", &[1])], &["1/2"]),
        exact_instance("A1", &[("1", &[1]), ("2", &[1])], &["1"]),
        exact_instance("A1", &[("-1", &[2]), ("3", &[1])], &["-2/3"]),
        exact_instance("A2", &[("0", &[1, 0]), ("1", &[0, 1])], &["1/3", "2/5"]),
        exact_instance("A2", &[("0", &[1, 1]), ("2", &[1, 0])], &["1", "3"]),
        exact_instance("A2", &[("-1", &[2, 0]), ("1/2", &[0, 1])], &["3/4", "-1/5"]),
        exact_instance("A3", &[("0", &[1, 0, 0]), ("1", &[0, 1, 0]), ("2", &[0, 0, 1])], &["1/2", "1/3", "1/7"]),
        exact_instance("B2", &[("0", &[0, 1])], &["1", "2"]),
        exact_instance("B2", &[("0", &[1, 0]), ("1", &[0, 1])], &["1/3", "5/2"]),
    ]
}

pub fn exact_chain_traces() -> Vec<ChainTrace<Rational>> {
    exact_seed_instances()
        .iter()
        .map(|inst| {
            let sol = trivial_solution(inst);
            chain(inst, &sol, &w0_reduced_word(inst.cartan_type), 0).expect("chain from a trivial solution")
        })
        .collect()
}

/// Every (instance, solution) pair met along the chains.
pub fn exact_fixtures() -> Vec<(QQInstance<Rational>, QQSolution<Rational>)> {
    let mut out = Vec::new();
    for t in exact_chain_traces() {
        out.push((t.instance.clone(), t.solution.clone()));
        for s in &t.steps {
            out.push((s.instance.clone(), s.solution.clone()));
        }
    }
    out
}

pub fn mp(ctx: NumCtx, x: &Rational) -> Mp {
    Mp::from_rational(&ctx, x.value())
}

fn random_rational<R: Rng>(rng: &mut R, lo: i64, hi: i64, den: i64) -> Rational {
    Rational::new(rng.random_range(lo * den..=hi * den), den)
}

/// Random type A instance with distinct rational points, each assigned to
/// one color with weight one, and a twist whose pairings with all positive
/// roots are nonzero.
pub fn random_type_a<R: Rng>(rng: &mut R, rank: usize) -> QQInstance<Rational> {
    let npts = rng.random_range(rank..=rank + 2);
    let mut zs: Vec<Rational> = Vec::new();
    while zs.len() < npts {
        let z = random_rational(rng, -4, 4, 7);
        if !zs.contains(&z) {
            zs.push(z);
        }
    }
    let points: Vec<Point<Rational>> = zs
        .into_iter()
        .enumerate()
        .map(|(k, z)| {
            let mut w = vec![0; rank];
            w[if k < rank { k } else { rng.random_range(0..rank) }] = 1;
            Point { z, weights: w }
        })
        .collect();
    loop {
        let zeta: Vec<Rational> = (0..rank)
            .map(|_| {
                let num = rng.random_range(1..=60) * if rng.random_bool(0.5) { 1 } else { -1 };
                Rational::new(num, rng.random_range(7..=13))
            })
            .collect();
        let inst = QQInstance::new(format!("A{rank}").parse().unwrap(), points.clone(), Twist::new(zeta)).unwrap();
        let xi = inst.xis();
        let regular = (0..rank).all(|a| {
            let mut s = Rational::int(0);
            (a..rank).all(|b| {
                s = s.add(&xi[b]);
                s.abs() > 0.1
            })
        });
        if regular {
            return inst;
        }
    }
}

pub fn to_numeric(inst: &QQInstance<Rational>, ctx: NumCtx) -> QQInstance<Mp> {
    let points = inst.points.iter().map(|p| Point { z: mp(ctx, &p.z), weights: p.weights.clone() }).collect();
    let zeta = inst.twist.zeta.iter().map(|z| mp(ctx, z)).collect();
    QQInstance::new(inst.cartan_type, points, Twist::new(zeta)).unwrap()
}

/// A random nonzero degree vector that admits an infinite-twist partition.
pub fn random_degrees<R: Rng>(rng: &mut R, inst: &QQInstance<Mp>) -> Option<Vec<usize>> {
    let r = inst.rank();
    for _ in 0..50 {
        let d: Vec<usize> = (0..r).map(|_| rng.random_range(0..=2)).collect();
        if d.iter().sum::<usize>() == 0 || d.iter().sum::<usize>() > 4 {
            continue;
        }
        if find_partition(inst, &d).is_some() {
            return Some(d);
        }
    }
    None
}
