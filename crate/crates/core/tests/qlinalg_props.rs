mod common;

use common::rng;
use mortal_core::qlinalg::{
    closed_form, generalized_eigenspace, rat, rational_roots, rational_spectrum, IntPoly, QMatrix,
    Rational, Side, Subspace,
};
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::Rng;

fn int_matrix(r: &mut impl Rng, n: usize, upper: bool) -> Vec<Vec<i64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if upper && j < i { 0 } else { r.gen_range(-3..=3) }).collect())
        .collect()
}

fn to_q(m: &[Vec<i64>]) -> QMatrix {
    let rows: Vec<&[i64]> = m.iter().map(|r| r.as_slice()).collect();
    QMatrix::from_ints(&rows)
}

/// `c^T A^k x` by repeated exact multiplication, independent of the library.
fn power_oracle(a: &[Vec<i64>], c: &[i64], x: &[i64], k: u64) -> BigInt {
    let mut v: Vec<BigInt> = x.iter().map(|&t| BigInt::from(t)).collect();
    for _ in 0..k {
        v = a
            .iter()
            .map(|row| row.iter().zip(&v).map(|(&p, q)| BigInt::from(p) * q).sum())
            .collect();
    }
    c.iter().zip(&v).map(|(&p, q)| BigInt::from(p) * q).sum()
}

#[test]
fn closed_forms_match_powers() {
    for seed in 0..120u64 {
        let mut r = rng(seed);
        let n = r.gen_range(1..=4);
        let a = int_matrix(&mut r, n, true);
        let c: Vec<i64> = (0..n).map(|_| r.gen_range(-3..=3)).collect();
        let x: Vec<i64> = (0..n).map(|_| r.gen_range(-5..=5)).collect();
        let e = closed_form(&c.iter().map(|&t| rat(t)).collect::<Vec<_>>(), &to_q(&a)).unwrap();
        let xb: Vec<BigInt> = x.iter().map(|&t| BigInt::from(t)).collect();
        let t0 = e.validity_threshold;
        for k in t0 + 1..=t0 + 16 {
            let want = Rational::from_integer(power_oracle(&a, &c, &x, k));
            assert_eq!(e.eval(&xb, k), want, "seed {seed} k {k}");
        }
    }
}

fn matrix_strategy(rows: usize, cols: usize) -> impl Strategy<Value = QMatrix> {
    proptest::collection::vec(-4i64..=4, rows * cols).prop_map(move |v| {
        QMatrix::from_rows(cols, v.chunks(cols).map(|r| r.iter().map(|&t| rat(t)).collect()).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn rref_is_idempotent_and_keeps_row_space(m in (1usize..5, 1usize..5).prop_flat_map(|(r, c)| matrix_strategy(r, c))) {
        let (r1, p1) = m.rref();
        let (r2, p2) = r1.rref();
        prop_assert_eq!(&r1, &r2);
        prop_assert_eq!(p1, p2);
        let a = Subspace::span(m.cols(), m.row_vecs());
        let b = Subspace::span(m.cols(), r1.row_vecs());
        prop_assert!(a.is_subspace_of(&b) && b.is_subspace_of(&a));
        // each original row solves against the rref rows
        for row in m.row_vecs() {
            prop_assert!(r1.transpose().solve(&row).is_some());
        }
    }

    #[test]
    fn null_space_is_annihilated(m in (1usize..5, 1usize..6).prop_flat_map(|(r, c)| matrix_strategy(r, c))) {
        let ns = m.null_space();
        for b in ns.basis() {
            prop_assert!(m.mul_vec(b).iter().all(|x| *x == rat(0)));
        }
        prop_assert_eq!(m.rank() + ns.dim(), m.cols());
    }

    #[test]
    fn generalized_eigenspaces_are_invariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=4);
        let upper = r.gen_bool(0.7);
        let a = to_q(&int_matrix(&mut r, n, upper));
        let spec = rational_spectrum(&a).unwrap();
        for (lambda, mult) in &spec.roots {
            let right = generalized_eigenspace(&a, lambda, Side::Right).unwrap();
            prop_assert_eq!(right.dim(), *mult);
            for v in right.basis() {
                prop_assert!(right.contains(&a.mul_vec(v)));
            }
            let left = generalized_eigenspace(&a, lambda, Side::Left).unwrap();
            for v in left.basis() {
                prop_assert!(left.contains(&a.vec_mul(v)));
            }
        }
    }

    #[test]
    fn rational_roots_deflate_exactly(roots in proptest::collection::vec((-6i64..=6, 1i64..=3), 0..4), irreducible in any::<bool>()) {
        // product of (q x - p) factors, optionally times x^2 + 1
        let mut poly = if irreducible { IntPoly::from_ints(&[1, 0, 1]) } else { IntPoly::from_ints(&[1]) };
        for (p, q) in &roots {
            poly = poly.mul(&IntPoly::from_ints(&[-p, *q]));
        }
        let found = rational_roots(&poly).unwrap();
        prop_assert_eq!(found.fully_split, !irreducible);
        let total: usize = found.roots.iter().map(|(_, m)| m).sum();
        prop_assert_eq!(total, roots.len());
        for (root, mult) in &found.roots {
            let mut p = poly.clone();
            for _ in 0..*mult {
                p = p.deflate(root).expect("root divides");
            }
            prop_assert!(p.deflate(root).is_none());
            prop_assert_ne!(p.eval(root), Rational::from_integer(0.into()));
        }
        for cand in -6..=6 {
            let c = rat(cand);
            if !found.roots.iter().any(|(r, _)| *r == c) {
                prop_assert_ne!(poly.eval(&c), rat(0));
            }
        }
    }
}
