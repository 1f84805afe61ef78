//! Linear integer arithmetic: parsing, quantifier elimination and models.
//!
//!     cargo run --example presburger

use mortal_core::lia::{entails, equivalent, model, parse_formula, qe_cooper};

fn main() {
    for src in [
        "exists x. 3*x == y && x >= 0",
        "exists x. 2*x <= y && y <= 2*x + 1 && x >= 5",
        "forall x. 2 | x + y",
        "exists q. y == 4*q + 1 || y == 4*q + 3",
    ] {
        let f = parse_formula(src).unwrap();
        println!("{f}\n  => {}", qe_cooper(&f));
    }

    let g = parse_formula("3 | x + 1 && x >= 10 && 2*x + y <= 25 && y >= 0").unwrap();
    match model(&g) {
        Some(m) => {
            let shown: Vec<String> = m.iter().map(|(v, n)| format!("{v} = {n}")).collect();
            println!("model of {g}: {}", shown.join(", "));
            assert!(g.eval(&m).unwrap());
        }
        None => println!("{g} is unsatisfiable"),
    }

    let odd = parse_formula("exists k. y == 2*k + 1").unwrap();
    let not_even = parse_formula("!(2 | y)").unwrap();
    println!("odd <=> not even: {}", equivalent(&odd, &not_even));
    let pos = parse_formula("y >= 3").unwrap();
    println!("y >= 3 entails y >= 1: {}", entails(&pos, &parse_formula("y >= 1").unwrap()));
}
