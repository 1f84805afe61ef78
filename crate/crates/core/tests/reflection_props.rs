mod common;

use common::*;
use mortal_core::abstractions::{affine_hull, det_fixpoint, determinize, AffineTS, LinearSimulation};
use mortal_core::qlinalg::{rational_spectrum, QMatrix};
use mortal_core::reflection::{homogenize, integer_restriction, omega_domain, qdlts_reflection};
use proptest::prelude::*;
use rand::Rng;

/// Random deterministic linear systems: plain matrices, or homogenized
/// determinizations of random transition formulas.
fn random_system(seed: u64) -> Option<AffineTS> {
    let mut r = rng(seed);
    if r.gen_bool(0.5) {
        let n = r.gen_range(1..=3);
        let rows: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| r.gen_range(-2..=2)).collect()).collect();
        let refs: Vec<&[i64]> = rows.iter().map(|v| v.as_slice()).collect();
        Some(AffineTS::linear_map(&QMatrix::from_ints(&refs)))
    } else {
        let n = r.gen_range(1..=3);
        let tf = rand_tf(&mut r, n);
        let hull = affine_hull(&tf);
        if hull.is_empty() {
            return None;
        }
        let (d, _, _) = determinize(&hull);
        Some(homogenize(&d).unwrap().0)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn omega_domain_is_invariant_and_stable(seed in any::<u64>()) {
        let Some(t) = random_system(seed) else { return Ok(()) };
        let om = omega_domain(&t).unwrap();
        for v in om.omega_basis.basis() {
            prop_assert!(om.omega_basis.contains(&om.successor.mul_vec(v)));
            // every omega vector has a successor in T
            prop_assert!(t.contains(v, &om.successor.mul_vec(v)));
        }
    }

    #[test]
    fn reflection_is_a_deterministic_rational_abstraction(seed in any::<u64>()) {
        let Some(t) = random_system(seed) else { return Ok(()) };
        let (u, s) = qdlts_reflection(&t).unwrap();
        prop_assert!(s.is_simulation(&t, &u));
        prop_assert!(det_fixpoint(&u).is_full());
        let om = omega_domain(&u).unwrap();
        prop_assert!(rational_spectrum(&om.dynamics).unwrap().fully_split);
    }

    #[test]
    fn integer_restriction_invariants(seed in any::<u64>()) {
        let Some(t) = random_system(seed) else { return Ok(()) };
        let (u, _) = qdlts_reflection(&t).unwrap();
        let om = omega_domain(&u).unwrap();
        let ir = integer_restriction(&u, &om).unwrap();
        prop_assert!(ir.has_integer_spectrum());
        prop_assert!(ir.p.is_integral() && ir.cmat.is_integral());
        let z = ir.z_basis.col_matrix();
        let pz = &ir.p * &z;
        prop_assert!(pz.inverse().is_some());
        // cmat vanishes exactly on Z(T)
        prop_assert!((&ir.cmat * &z).is_zero());
        prop_assert_eq!(ir.cmat.rank() + ir.dim(), u.dim());
        for v in ir.z_basis.basis() {
            let next = om.successor.mul_vec(v);
            prop_assert!(ir.z_basis.contains(&next));
            // p commutes with the dynamics on Z(T)
            prop_assert_eq!(ir.p.mul_vec(&next), ir.m.mul_vec(&ir.p.mul_vec(v)));
        }
    }
}

/// For a hand-built rational-spectrum target `target` with a simulation `s`
/// from `t`, the factor through the reflection exists, is unique and simulates.
fn check_universal(t: &AffineTS, target: &AffineTS, s: &QMatrix) {
    let s = LinearSimulation::linear(s.clone());
    assert!(s.is_simulation(t, target));
    let (u, q) = qdlts_reflection(t).unwrap();
    assert_eq!(q.matrix.rank(), q.matrix.rows(), "q is surjective");
    let rows: Vec<_> = (0..s.matrix.rows())
        .map(|i| q.matrix.transpose().solve(s.matrix.row(i)).expect("factor exists"))
        .collect();
    let bar = LinearSimulation::linear(QMatrix::from_rows(u.dim(), rows));
    assert_eq!(bar.after(&q).matrix, s.matrix);
    assert!(bar.is_simulation(&u, target));
}

#[test]
fn universal_property_spot_checks() {
    // rotation on (x1, x2), Jordan block on (x3, x4)
    let t = AffineTS::linear_map(&QMatrix::from_ints(&[
        &[0, -1, 0, 0],
        &[1, 0, 0, 0],
        &[0, 0, 1, 1],
        &[0, 0, 0, 1],
    ]));
    let jordan = AffineTS::linear_map(&QMatrix::from_ints(&[&[1, 1], &[0, 1]]));
    check_universal(&t, &jordan, &QMatrix::from_ints(&[&[0, 0, 1, 0], &[0, 0, 0, 1]]));
    let one = AffineTS::linear_map(&QMatrix::from_ints(&[&[1]]));
    check_universal(&t, &one, &QMatrix::from_ints(&[&[0, 0, 0, 3]]));

    // x' = y, y' = 2x has spectrum {sqrt 2, -sqrt 2}; only the zero map factors
    let t = AffineTS::linear_map(&QMatrix::from_ints(&[&[0, 1, 0], &[2, 0, 0], &[0, 0, 3]]));
    let three = AffineTS::linear_map(&QMatrix::from_ints(&[&[3]]));
    check_universal(&t, &three, &QMatrix::from_ints(&[&[0, 0, 2]]));
    let (u, _) = qdlts_reflection(&t).unwrap();
    assert_eq!(u.dim(), 1);
}
