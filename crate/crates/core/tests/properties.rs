mod common;

use common::*;
use proptest::prelude::*;
use qqsys::backlund::apply_simple;
use qqsys::bethe::{bethe_residual, bethe_residual_log, BetheRoots};
use qqsys::polyalg::{solve_linear_ode, wronskian};
use qqsys::qqcore::{complete_minus, is_solution};
use qqsys::rootsys::{cartan_matrix, pairing, reflect_twist};
use qqsys::{CartanType, Point, Poly, QQInstance, Rational, Scalar, Twist};

fn rational() -> impl Strategy<Value = Rational> {
    (-30i64..=30, 1i64..=6).prop_map(|(n, d)| Rational::new(n, d))
}

fn poly(max_len: usize) -> impl Strategy<Value = Poly<Rational>> {
    prop::collection::vec(rational(), 0..=max_len).prop_map(|c| Poly::from_coeffs(&(), c))
}

fn cartan_type() -> impl Strategy<Value = CartanType> {
    prop::sample::select(vec!["A1", "A2", "A3", "A4", "B2", "B3", "C3", "D4", "G2"]).prop_map(|s| s.parse().unwrap())
}

fn type_and_twist() -> impl Strategy<Value = (CartanType, Twist<Rational>)> {
    cartan_type().prop_flat_map(|ty| {
        prop::collection::vec(rational(), ty.rank()).prop_map(move |z| (ty, Twist::new(z)))
    })
}

proptest! {
    #[test]
    fn reflection_is_an_involution((ty, twist) in type_and_twist(), i in 0usize..4) {
        let c = cartan_matrix(ty);
        let i = i % ty.rank();
        let once = reflect_twist(i, &twist, &c);
        prop_assert_eq!(reflect_twist(i, &once, &c), twist.clone());
        prop_assert_eq!(pairing(i, &once, &c), pairing(i, &twist, &c).neg());
    }

    #[test]
    fn wronskian_is_bilinear_and_alternating(p in poly(5), q in poly(5), r in poly(5), a in rational()) {
        prop_assert_eq!(wronskian(&p, &q), wronskian(&q, &p).scale(&Rational::int(-1)));
        let lhs = wronskian(&(&p + &r.scale(&a)), &q);
        prop_assert_eq!(lhs, &wronskian(&p, &q) + &wronskian(&r, &q).scale(&a));
    }

    #[test]
    fn wronskian_product_rule(f in poly(3), p in poly(4), q in poly(4)) {
        prop_assert_eq!(wronskian(&(&f * &p), &(&f * &q)), &(&f * &f) * &wronskian(&p, &q));
    }

    #[test]
    fn linear_ode_right_inverse(xi in rational(), p in poly(6)) {
        let h = solve_linear_ode(&xi, &p);
        let back = &h.deriv() + &h.scale(&xi);
        prop_assert_eq!(back, p);
    }

    #[test]
    fn roots_survive_the_polynomial_round_trip(roots in prop::collection::vec(prop::collection::vec(rational(), 0..4), 1..4)) {
        let mut given = BetheRoots::new(roots);
        let back = BetheRoots::from_polys(&given.to_polys(&())).unwrap();
        given.canonicalize();
        let mut back = back;
        back.canonicalize();
        prop_assert_eq!(back, given);
    }

    #[test]
    fn log_and_explicit_bethe_forms_agree(
        zs in prop::collection::btree_set(-20i64..20, 6),
        zeta in rational(),
        weights in prop::collection::vec(0u32..3, 2),
    ) {
        let zs: Vec<Rational> = zs.into_iter().map(|n| Rational::new(n, 3)).collect();
        let points = vec![
            Point { z: zs[0].clone(), weights: vec![weights[0]] },
            Point { z: zs[1].clone(), weights: vec![weights[1]] },
        ];
        let inst = QQInstance::new("A1".parse().unwrap(), points, Twist::new(vec![zeta])).unwrap();
        let roots = BetheRoots::new(vec![zs[2..].to_vec()]);
        for l in 0..4 {
            prop_assert_eq!(bethe_residual(&inst, &roots, 0, l).unwrap(), bethe_residual_log(&inst, &roots, 0, l).unwrap());
        }
    }

    #[test]
    fn trivial_solutions_step_and_return(z in prop::collection::btree_set(-10i64..10, 3), zeta in prop::collection::vec(rational(), 2)) {
        prop_assume!(zeta.iter().all(|x| !x.is_exact_zero()));
        let pts: Vec<Rational> = z.into_iter().map(Rational::int).collect();
        let points = vec![
            Point { z: pts[0].clone(), weights: vec![1, 0] },
            Point { z: pts[1].clone(), weights: vec![0, 1] },
            Point { z: pts[2].clone(), weights: vec![1, 1] },
        ];
        let inst = QQInstance::new("A2".parse().unwrap(), points, Twist::new(zeta)).unwrap();
        prop_assume!(inst.xis().iter().all(|x| !x.is_exact_zero()));
        let sol = complete_minus(&inst, &[Poly::one(&()), Poly::one(&())], None).unwrap();
        for i in 0..2 {
            let (inst1, sol1) = apply_simple(&inst, &sol, i).unwrap();
            prop_assert!(is_solution(&inst1, &sol1));
            let (inst2, sol2) = apply_simple(&inst1, &sol1, i).unwrap();
            prop_assert_eq!(&inst2.twist, &inst.twist);
            prop_assert_eq!(&sol2.q_plus, &sol.q_plus);
        }
    }
}

#[test]
fn chain_fixtures_are_solutions() {
    for (inst, sol) in exact_fixtures() {
        assert!(is_solution(&inst, &sol), "{} {:?}", inst.cartan_type, inst.twist.zeta);
    }
}
