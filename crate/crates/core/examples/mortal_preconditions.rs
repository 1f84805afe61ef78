//! Mortal preconditions and termination proofs for transition formulas.
//!
//!     cargo run --example mortal_preconditions

use mortal_core::abstractions::TransitionFormula;
use mortal_core::lia::parse_formula;
use mortal_core::mortal::{is_mortal_state, mp, state};

fn main() {
    let cases: [(&[&str], &str); 5] = [
        (&["x"], "x >= 0 && x' == x - 1"),
        (&["x"], "x' == x"),
        (&["x", "c"], "2 | x && x - 1 <= 2*x' && 2*x' <= x && c' == c + 1"),
        (&["x", "y"], "x >= 0 && x' == x + y && y' == y"),
        (&["x", "y"], "x >= 0 && y >= 0 && x' == 2*x - y && y' == y"),
    ];
    for (names, body) in cases {
        let tf = TransitionFormula::from_names(names, parse_formula(body).unwrap());
        let r = mp(&tf).unwrap();
        let verdict = if r.proved_universal { "terminates" } else { "not proved" };
        println!("{body}\n  mp = {}\n  {verdict}", r.mp);
    }

    // a state that satisfies the precondition cannot run forever
    let tf = TransitionFormula::from_names(&["x", "y"], parse_formula("x >= 0 && x' == x + y && y' == y").unwrap());
    let r = mp(&tf).unwrap();
    for s in [[5, -1], [5, 0], [5, 2]] {
        println!("state {s:?}: mortal = {}", is_mortal_state(&r, &state(&s)).unwrap());
    }
}
