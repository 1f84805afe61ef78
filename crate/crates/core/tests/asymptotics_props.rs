mod common;

use common::*;
use mortal_core::asymptotics::{chi_formula, dta, eventual_invariance, PeriodicFormulaSeq};
use mortal_core::lia::{equivalent, parse_formula, Formula, LinTerm, Var};
use mortal_core::qlinalg::{closed_form, rat, QMatrix};
use num_bigint::BigInt;
use num_traits::Signed;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn chi_matches_orbits_beyond_k0() {
    for seed in 0..60u64 {
        chi_oracle_instance(seed, 64).unwrap();
    }
}

fn five() -> QMatrix {
    QMatrix::from_ints(&[
        &[1, 1, 0, 0, 0],
        &[0, 1, 1, 0, 0],
        &[0, 0, 1, 0, 0],
        &[0, 0, 0, -3, 0],
        &[0, 0, 0, 0, 2],
    ])
}

#[test]
fn pointwise_algebra() {
    let vs = vars(&["x", "y", "z", "a", "b"]);
    let g1 = parse_formula("a - b >= 0").unwrap();
    let g2 = parse_formula("3 | x + y").unwrap();
    let a = five();
    let c1 = chi_formula(&g1, &a, &vs).unwrap();
    let c2 = chi_formula(&g2, &a, &vs).unwrap();
    // a negated divisibility atom stays a negation, so the check is syntactic
    let neg = chi_formula(&Formula::not(g2.clone()), &a, &vs).unwrap();
    assert_eq!(neg.period(), c2.period());
    for k in 0..c2.period() as u64 {
        assert_eq!(neg.at(k), &Formula::not(c2.at(k).clone()));
    }
    // a negated inequality is normalized into another inequality
    let neg = chi_formula(&Formula::not(g1.clone()), &a, &vs).unwrap();
    assert_eq!(neg.period(), c1.period());
    for k in 0..c1.period() as u64 {
        assert!(equivalent(neg.at(k), &Formula::not(c1.at(k).clone())));
    }
    let both = chi_formula(&Formula::and(vec![g1, g2]), &a, &vs).unwrap();
    assert_eq!(both.period() % c1.period(), 0);
    assert_eq!(both.period() % c2.period(), 0);
    for k in 0..both.period() as u64 {
        assert_eq!(both.at(k), &Formula::and(vec![c1.at(k).clone(), c2.at(k).clone()]));
    }
}

fn atoms_only(f: &Formula, leq: bool) -> bool {
    match f {
        Formula::True | Formula::False => true,
        Formula::Leq(_) => leq,
        Formula::Div(..) => !leq,
        Formula::Not(g) => atoms_only(g, leq),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().all(|g| atoms_only(g, leq)),
        _ => false,
    }
}

fn all_moduli(f: &Formula, out: &mut Vec<BigInt>) {
    match f {
        Formula::Div(n, _) => out.push(n.clone()),
        Formula::Not(g) => all_moduli(g, out),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| all_moduli(g, out)),
        _ => {}
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn atom_sequences_have_atom_structure(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=3);
        let a: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| if j < i { 0 } else { r.gen_range(-3..=3) }).collect()).collect();
        let refs: Vec<&[i64]> = a.iter().map(|row| row.as_slice()).collect();
        let m = QMatrix::from_ints(&refs);
        let vs: Vec<Var> = (0..n).map(|i| Var::new(&format!("x{i}"))).collect();
        let t = rand_term(&mut r, &vs, 3, 4);
        let ineq = chi_formula(&Formula::leq0(t.clone()), &m, &vs).unwrap();
        prop_assert!(ineq.formulas().iter().all(|f| atoms_only(f, true)));
        let modulus = *[2i64, 3, 4].get(r.gen_range(0..3)).unwrap();
        let div = chi_formula(&Formula::div(modulus, t), &m, &vs).unwrap();
        prop_assert!(div.formulas().iter().all(|f| atoms_only(f, false)));
        // moduli divide Q n, so every modulus is a multiple of a divisor of Q n
        let mut mods = Vec::new();
        for f in div.formulas() {
            all_moduli(f, &mut mods);
        }
        prop_assert!(mods.iter().all(|q| q.is_positive()));
    }

    #[test]
    fn dta_agrees_with_sign_at_k0(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=3);
        // positive diagonal so no even/odd split is needed
        let a: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| match j.cmp(&i) {
            std::cmp::Ordering::Less => 0,
            std::cmp::Ordering::Equal => r.gen_range(1..=3),
            std::cmp::Ordering::Greater => r.gen_range(-2..=2),
        }).collect()).collect();
        let refs: Vec<&[i64]> = a.iter().map(|row| row.as_slice()).collect();
        let c: Vec<_> = (0..n).map(|_| rat(r.gen_range(-3..=3))).collect();
        let e = closed_form(&c, &QMatrix::from_ints(&refs)).unwrap();
        let vs: Vec<Var> = (0..n).map(|i| Var::new(&format!("x{i}"))).collect();
        let f = dta(&e, &vs).unwrap();
        let x: Vec<i64> = (0..n).map(|_| r.gen_range(-5..=5)).collect();
        let xb: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
        let v = e.numerator_at(&xb, 64);
        prop_assert_eq!(f.eval(&valuation(&vs, &x)).unwrap(), !v.is_negative());
    }
}

#[test]
fn eventual_invariance_examples() {
    let vs = vars(&["x"]);
    let two = QMatrix::from_ints(&[&[2]]);
    assert!(eventual_invariance(&Formula::True, &two, &vs).unwrap().is_true());
    assert!(eventual_invariance(&Formula::False, &two, &vs).unwrap().is_false());
    let ev = eventual_invariance(&parse_formula("x >= 0").unwrap(), &two, &vs).unwrap();
    for x0 in -4i64..=4 {
        // 2^k x0 >= 0 eventually iff x0 >= 0
        assert_eq!(ev.eval(&valuation(&vs, &[x0])).unwrap(), x0 >= 0);
    }
    assert!(equivalent(&ev, &parse_formula("x >= 1 || x == 0").unwrap()));
}

#[test]
fn periods_collapse_and_align() {
    let x = LinTerm::var(&Var::new("x"));
    let f = Formula::leq0(x.clone());
    let s = PeriodicFormulaSeq::new(vec![f.clone(), f.clone(), f.clone()]);
    assert_eq!(s.period(), 1);
    let g = Formula::div(2, x);
    let alt = PeriodicFormulaSeq::new(vec![f.clone(), g.clone()]);
    let three = PeriodicFormulaSeq::new(vec![f.clone(), g.clone(), Formula::True]);
    let z = PeriodicFormulaSeq::zip_all(&[alt, three], Formula::and);
    assert_eq!(z.period(), 6);
}
