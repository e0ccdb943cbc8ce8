//! Acceptance harness: one PASS/FAIL line per criterion.

mod common;

use std::time::{Duration, Instant};

use common::*;
use qqsys::backlund::{apply_simple, chain, check_admissible, degree_map, CombinatorialDatum};
use qqsys::bethe::{
    bethe_jacobian, bethe_residual, bethe_residual_log, find_partition, residual_vector, seed_and_continue, verify_bethe,
    BetheRoots, SolveOptions,
};
use qqsys::opermat::{diagonalize_type_a, reduce_twist_type_a, regularity_residues, verify_mp_twist, RatMatrix};
use qqsys::polyalg::Matrix;
use qqsys::qqcore::{check_nondegenerate, complete_minus, fold, fold_data, is_solution, qq_residual};
use qqsys::rootsys::w0_reduced_word;
use qqsys::{CartanType, Family, Mp, NumCtx, Point, Poly, QQInstance, QQSolution, Rational, Scalar, Twist, WeylWord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn zero_matrix<S: Scalar>(m: &RatMatrix<S>) -> bool {
    m.rows().iter().flatten().all(|e| e.num().is_zero())
}

fn criterion_1() -> Verdict {
    let inst = exact_instance("A1", &[("0", &[1])], &["1/2"]);
    let qp = Poly::from_i64s(&(), &[1, 1]);
    let sol = match complete_minus(&inst, &[qp.clone()], None) {
        Ok(s) => s,
        Err(e) => return verdict(false, format!("completion failed: {e}")),
    };
    let minus_one = sol.q_minus[0] == Poly::one(&());
    let qq = qq_residual(&inst, &sol, 0).is_zero();
    let roots = BetheRoots::new(vec![vec![q("-1")]]);
    let bethe = bethe_residual(&inst, &roots, 0, 0).map(|r| r.is_exact_zero()).unwrap_or(false);
    let mp = verify_mp_twist(&inst, &sol, 0).map(|m| m.pass && m.residual == 0.0).unwrap_or(false);
    let reg = regularity_residues(&inst, &sol).map(|r| r[0].len() == 1 && r[0][0].is_exact_zero()).unwrap_or(false);
    verdict(
        minus_one && qq && bethe && mp && reg,
        format!("q- = {}, qq {qq}, bethe {bethe}, mp_twist {mp}, regularity {reg}", sol.q_minus[0]),
    )
}

fn solve_numeric(inst: &QQInstance<Mp>, d: &[usize]) -> Option<BetheRoots<Mp>> {
    let part = find_partition(inst, d)?;
    (0..3).find_map(|seed| seed_and_continue(inst, &part, &SolveOptions { seed, ..SolveOptions::default() }).ok())
}

fn criterion_2() -> Verdict {
    let ctx = NumCtx::with_prec(256);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut solved, mut forward, mut backward, mut attempts) = (0, 0, 0, 0);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    while solved < 100 && attempts < 200 {
        attempts += 1;
        let rank = 1 + attempts % 3;
        let inst = to_numeric(&random_type_a(&mut rng, rank), ctx);
        let Some(d) = random_degrees(&mut rng, &inst) else { continue };
        solved += 1;
        let Some(roots) = solve_numeric(&inst, &d) else {
            failures.push(format!("A{rank} d={d:?}: no convergence"));
            continue;
        };
        let report = verify_bethe(&inst, &roots, 1e-30).expect("distinct roots");
        worst = worst.max(report.max_residual);
        let completes = complete_minus(&inst, &roots.to_polys(&ctx), None).is_ok();
        if report.pass && completes {
            forward += 1;
        } else {
            failures.push(format!("A{rank} d={d:?}: residual {:e}, completion {completes}", report.max_residual));
        }
        let mut all_break = true;
        for (i, l) in roots.roots.iter().enumerate().flat_map(|(i, r)| (0..r.len()).map(move |l| (i, l))) {
            let mut bumped = roots.clone();
            bumped.roots[i][l] = bumped.roots[i][l].add(&Mp::from_f64(&ctx, 1e-6));
            let fails = complete_minus(&inst, &bumped.to_polys(&ctx), None).is_err();
            let big = residual_vector(&inst, &bumped)
                .map(|v| v.iter().map(Scalar::abs).fold(0.0, f64::max) > 1e-8)
                .unwrap_or(true);
            all_break &= fails && big;
        }
        if all_break {
            backward += 1;
        } else {
            failures.push(format!("A{rank} d={d:?}: a perturbed root still completes"));
        }
    }
    let pass = solved == 100 && forward == 100 && backward == 100;
    let mut detail = format!("{forward}/{solved} solved and completed, {backward}/{solved} perturbations rejected, max residual {worst:e}");
    if let Some(f) = failures.first() {
        detail += &format!("; first failure: {f}");
    }
    verdict(pass, detail)
}

fn same_roots(a: &Poly<Rational>, b: &Poly<Rational>) -> bool {
    a.monic() == b.monic()
}

fn criterion_3() -> Verdict {
    let (mut steps, mut bad) = (0, Vec::new());
    for (inst, sol) in exact_fixtures() {
        for i in 0..inst.rank() {
            steps += 1;
            let tag = format!("{} twist {:?} color {}", inst.cartan_type, inst.twist.zeta, i + 1);
            let (inst1, sol1) = match apply_simple(&inst, &sol, i) {
                Ok(x) => x,
                Err(e) => {
                    bad.push(format!("{tag}: {e}"));
                    continue;
                }
            };
            if !is_solution(&inst1, &sol1) {
                bad.push(format!("{tag}: nonzero residual after one step"));
                continue;
            }
            match apply_simple(&inst1, &sol1, i) {
                Ok((inst2, sol2)) => {
                    let back = inst2.twist == inst.twist
                        && sol2.q_plus.iter().zip(&sol.q_plus).all(|(a, b)| same_roots(a, b))
                        && is_solution(&inst2, &sol2);
                    if !back {
                        bad.push(format!("{tag}: not an involution"));
                    }
                }
                Err(e) => bad.push(format!("{tag}: second step {e}")),
            }
        }
    }
    verdict(bad.is_empty(), format!("{} of {steps} double steps fail{}", bad.len(), first(&bad)))
}

fn first(v: &[String]) -> String {
    v.first().map(|s| format!("; first: {s}")).unwrap_or_default()
}

fn criterion_4() -> Verdict {
    let (mut checked, mut bad) = (0, Vec::new());
    for t in exact_chain_traces() {
        let mut src = (t.instance.clone(), t.solution.clone());
        for s in &t.steps {
            let i = s.index;
            if !src.0.xi_vanishes(i) {
                checked += 1;
                let datum = CombinatorialDatum::from_instance(&src.0, &src.1.q_plus);
                let predicted = degree_map(&datum, &datum.d, i)[i];
                let actual = s.solution.q_plus[i].degree_i64();
                if predicted != actual {
                    bad.push(format!("{} s{}: predicted {predicted}, got {actual}", t.instance.cartan_type, i + 1));
                }
            }
            src = (s.instance.clone(), s.solution.clone());
        }
    }
    verdict(bad.is_empty() && checked > 0, format!("{checked} steps checked, {} mismatches{}", bad.len(), first(&bad)))
}

fn criterion_5() -> Verdict {
    let ctx = NumCtx::with_prec(256);
    let a2: CartanType = "A2".parse().unwrap();
    let word: WeylWord = "121".parse().unwrap();
    let points = vec![
        Point { z: Mp::from_i64(&ctx, -1), weights: vec![1, 0] },
        Point { z: Mp::from_i64(&ctx, 2), weights: vec![0, 1] },
    ];
    let twist = Twist::new(vec![mp(ctx, &q("1/3")), mp(ctx, &q("3/4"))]);
    let inst = QQInstance::new(a2, points, twist).unwrap();
    let mut agree = 0;
    let mut lines = Vec::new();
    for d in [[0usize, 0], [1, 0], [0, 1], [1, 1], [2, 0], [0, 2]] {
        let datum = CombinatorialDatum::new(a2, d.iter().map(|&x| x as i64).collect(), vec![1, 1]);
        let admissible = check_admissible(&datum, &word).pass;
        let generic = solve_numeric(&inst, &d)
            .and_then(|roots| complete_minus(&inst, &roots.to_polys(&ctx), None).ok())
            .and_then(|sol| chain(&inst, &sol, &word, 0).ok())
            .is_some_and(|t| t.is_complete() && t.composable() && t.generic());
        if admissible == generic {
            agree += 1;
        }
        lines.push(format!("{d:?}: {admissible}/{generic}"));
    }
    verdict(agree == 6, format!("{agree}/6 agree (admissible/generic chain) {}", lines.join(", ")))
}

fn criterion_6() -> Verdict {
    let (mut checked, mut skipped, mut bad) = (0, 0, Vec::new());
    for (inst, sol) in exact_fixtures() {
        if inst.cartan_type.family() != Family::A || inst.rank() > 2 {
            continue;
        }
        let word = w0_reduced_word(inst.cartan_type);
        if !chain(&inst, &sol, &word, 0).is_ok_and(|t| t.composable()) {
            skipped += 1;
            continue;
        }
        checked += 1;
        match diagonalize_type_a(&inst, &sol, &word, 0) {
            Ok(d) if d.pass && zero_matrix(&d.residual_matrix) => {}
            Ok(d) => bad.push(format!("{}: residual {:e}", inst.cartan_type, d.residual)),
            Err(e) => bad.push(format!("{}: {e}", inst.cartan_type)),
        }
    }
    verdict(
        bad.is_empty() && checked > 0,
        format!("{checked} composable fixtures, {skipped} not composable, {} nonzero residuals{}", bad.len(), first(&bad)),
    )
}

fn criterion_7() -> Verdict {
    let (mut checked, mut degenerate_expected, mut bad) = (0, 0, Vec::new());
    for (inst, sol) in exact_fixtures() {
        let Some((k, _, _)) = fold_data(inst.cartan_type) else { continue };
        checked += 1;
        let (finst, fsol) = match fold(&inst, &sol) {
            Ok(x) => x,
            Err(e) => {
                bad.push(e.to_string());
                continue;
            }
        };
        if !is_solution(&finst, &fsol) {
            bad.push(format!("twist {:?}: folded residual nonzero", inst.twist.zeta));
        }
        if sol.q_plus[k].degree().unwrap_or(0) >= 1 {
            degenerate_expected += 1;
            if check_nondegenerate(&finst, &fsol.q_plus).squarefree.iter().all(|&b| b) {
                bad.push(format!("twist {:?}: folded q+ squarefree", inst.twist.zeta));
            }
        }
    }
    verdict(
        bad.is_empty() && checked > 0,
        format!("{checked} B2 fixtures folded, {degenerate_expected} with deg q+_k >= 1{}", first(&bad)),
    )
}

fn random_exact_input(rng: &mut ChaCha8Rng) -> (QQInstance<Rational>, BetheRoots<Rational>) {
    let types = ["A1", "A2", "A3", "B2", "G2"];
    let ty: CartanType = types[rng.random_range(0..types.len())].parse().unwrap();
    let r = ty.rank();
    let mut used: Vec<Rational> = Vec::new();
    let mut fresh = |rng: &mut ChaCha8Rng| loop {
        let x = Rational::new(rng.random_range(-40..=40), rng.random_range(1..=4));
        if !used.contains(&x) {
            used.push(x.clone());
            return x;
        }
    };
    let points = (0..rng.random_range(1..=3))
        .map(|_| Point { z: fresh(rng), weights: (0..r).map(|_| rng.random_range(0..=2)).collect() })
        .collect();
    let zeta = (0..r).map(|_| Rational::new(rng.random_range(-9..=9), rng.random_range(1..=5))).collect();
    let inst = QQInstance::new(ty, points, Twist::new(zeta)).unwrap();
    let roots = (0..r).map(|_| (0..rng.random_range(0..=3)).map(|_| fresh(rng)).collect()).collect();
    (inst, BetheRoots::new(roots))
}

fn criterion_8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut bad = Vec::new();
    let mut compared = 0;
    for _ in 0..1000 {
        let (inst, roots) = random_exact_input(&mut rng);
        let q_plus = roots.to_polys(&());
        let sol = QQSolution::new(q_plus.clone(), vec![Poly::one(&()); inst.rank()]);
        let canonical = BetheRoots::from_polys(&q_plus).unwrap();
        let reg = match regularity_residues(&inst, &sol) {
            Ok(r) => r,
            Err(e) => {
                bad.push(format!("regularity: {e}"));
                continue;
            }
        };
        for (i, l) in canonical.roots.iter().enumerate().flat_map(|(i, r)| (0..r.len()).map(move |l| (i, l))) {
            compared += 1;
            let explicit = bethe_residual(&inst, &canonical, i, l).unwrap();
            let log = bethe_residual_log(&inst, &canonical, i, l).unwrap();
            if reg[i][l] != explicit || log != explicit {
                bad.push(format!("{} color {} root {}", inst.cartan_type, i + 1, canonical.roots[i][l]));
            }
        }
    }

    let ctx = NumCtx::with_prec(256);
    let h = Mp::from_f64(&ctx, 2f64.powi(-64));
    let two_h = h.mul_i64(2);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (inst, roots) = random_exact_input(&mut rng);
        if roots.count() == 0 {
            continue;
        }
        let inst = to_numeric(&inst, ctx);
        let roots = BetheRoots::new(roots.roots.iter().map(|r| r.iter().map(|x| mp(ctx, x)).collect()).collect());
        let jac = bethe_jacobian(&inst, &roots).unwrap();
        let index: Vec<(usize, usize)> =
            roots.roots.iter().enumerate().flat_map(|(i, r)| (0..r.len()).map(move |l| (i, l))).collect();
        let mut fd = Matrix::zeros(&ctx, index.len(), index.len());
        for (col, &(i, l)) in index.iter().enumerate() {
            let mut plus = roots.clone();
            let mut minus = roots.clone();
            plus.roots[i][l] = plus.roots[i][l].add(&h);
            minus.roots[i][l] = minus.roots[i][l].sub(&h);
            let fp = residual_vector(&inst, &plus).unwrap();
            let fm = residual_vector(&inst, &minus).unwrap();
            for row in 0..index.len() {
                fd.set(row, col, fp[row].sub(&fm[row]).div(&two_h).unwrap());
            }
        }
        let mut diff = 0.0f64;
        for row in 0..index.len() {
            for col in 0..index.len() {
                diff = diff.max(jac.get(row, col).sub(fd.get(row, col)).abs());
            }
        }
        worst = worst.max(diff / jac.norm().max(f64::MIN_POSITIVE));
    }
    verdict(
        bad.is_empty() && compared > 0 && worst < 1e-20,
        format!("{compared} residues compared, {} mismatches, jacobian relative error {worst:e}{}", bad.len(), first(&bad)),
    )
}

fn random_upper(rng: &mut ChaCha8Rng, n: usize) -> Matrix<Rational> {
    let mut m = Matrix::zeros(&(), n, n);
    let palette: Vec<Rational> = (0..2).map(|_| Rational::new(rng.random_range(-6..=6), rng.random_range(1..=3))).collect();
    let mut trace = Rational::int(0);
    for i in 0..n - 1 {
        let d = if rng.random_bool(0.5) {
            palette[rng.random_range(0..2)].clone()
        } else {
            Rational::new(rng.random_range(-6..=6), rng.random_range(1..=3))
        };
        trace = trace.add(&d);
        m.set(i, i, d);
    }
    m.set(n - 1, n - 1, trace.neg());
    for i in 0..n {
        for j in i + 1..n {
            m.set(i, j, Rational::new(rng.random_range(-5..=5), rng.random_range(1..=3)));
        }
    }
    m
}

fn criterion_9() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut repeated, mut bad) = (0, Vec::new());
    for k in 0..100 {
        let n = 3 + k % 2;
        let z = random_upper(&mut rng, n);
        let diag: Vec<&Rational> = (0..n).map(|i| z.get(i, i)).collect();
        if (0..n).any(|i| (i + 1..n).any(|j| diag[i] == diag[j])) {
            repeated += 1;
        }
        let red = match reduce_twist_type_a(&z) {
            Ok(r) => r,
            Err(e) => {
                bad.push(e.to_string());
                continue;
            }
        };
        let zm = RatMatrix::constant(&z);
        let conj = red.u.mul(&zm).sub(&red.u.deriv()).sub(&red.reduced.mul(&red.u));
        let mut ok = zero_matrix(&conj);
        for i in 0..n {
            for j in 0..n {
                let r = red.reduced.get(i, j);
                let u = red.u.get(i, j);
                ok &= if i == j {
                    r.as_poly().is_some_and(|p| p == Poly::constant(z.get(i, i).clone())) && u.as_poly() == Some(Poly::one(&()))
                } else {
                    r.is_zero() && (i < j || u.is_zero())
                };
            }
        }
        if !ok {
            bad.push(format!("{n}x{n} case {k}"));
        }
    }
    verdict(bad.is_empty(), format!("100 matrices ({repeated} with repeated diagonal), {} failures{}", bad.len(), first(&bad)))
}

fn main() {
    let criteria: [(fn() -> Verdict, Duration); 9] = [
        (criterion_1, Duration::from_secs(1)),
        (criterion_2, Duration::from_secs(120)),
        (criterion_3, Duration::from_secs(30)),
        (criterion_4, Duration::MAX),
        (criterion_5, Duration::from_secs(60)),
        (criterion_6, Duration::from_secs(30)),
        (criterion_7, Duration::MAX),
        (criterion_8, Duration::MAX),
        (criterion_9, Duration::MAX),
    ];
    let mut failed = 0;
    for (k, (run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *limit;
        let pass = v.pass && in_time;
        if !pass {
            failed += 1;
        }
        let limit = if *limit == Duration::MAX { String::new() } else { format!(" (limit {}s)", limit.as_secs()) };
        println!(
            "criterion {}: {} {} [{:.2}s{limit}]",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
