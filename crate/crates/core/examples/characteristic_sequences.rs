//! Eventual behaviour of formulas along linear orbits: the periodic
//! characteristic sequence and the eventually-always formula.
//!
//!     cargo run --example characteristic_sequences

use mortal_core::asymptotics::{chi_formula, eventual_invariance};
use mortal_core::lia::{parse_formula, Valuation, Var};
use mortal_core::qlinalg::QMatrix;
use num_bigint::BigInt;

fn main() {
    let vs: Vec<Var> = ["x", "y", "z", "a", "b"].iter().map(|n| Var::new(n)).collect();
    let a = QMatrix::from_ints(&[
        &[1, 1, 0, 0, 0],
        &[0, 1, 1, 0, 0],
        &[0, 0, 1, 0, 0],
        &[0, 0, 0, -3, 0],
        &[0, 0, 0, 0, 2],
    ]);
    for g in ["x >= 0", "a - b >= 0", "3 | x + y", "x >= 0 && !(2 | b)"] {
        let f = parse_formula(g).unwrap();
        let seq = chi_formula(&f, &a, &vs).unwrap();
        println!("{g}: period {}", seq.period());
        for (k, h) in seq.formulas().iter().enumerate() {
            println!("  [{k}] {h}");
        }
    }

    // x doubles each step, so x >= 1 holds eventually always iff x >= 1 now
    let x = vec![Var::new("x")];
    let two = QMatrix::from_ints(&[&[2]]);
    let ev = eventual_invariance(&parse_formula("x >= 1").unwrap(), &two, &x).unwrap();
    println!("eventually always x >= 1 under x' = 2x: {ev}");
    for v in [-2i64, 0, 3] {
        let val: Valuation = [(x[0].clone(), BigInt::from(v))].into_iter().collect();
        println!("  x = {v}: {}", ev.eval(&val).unwrap());
    }
}
