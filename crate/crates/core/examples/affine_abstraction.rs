//! Affine hull of a transition formula and its best deterministic
//! abstraction.
//!
//!     cargo run --example affine_abstraction

use mortal_core::abstractions::{affine_hull_with_samples, det_fixpoint, determinize};
use mortal_core::cli::compile;
use mortal_core::qlinalg::QMatrix;

const PROGRAM: &str = "
vars w, x, y, z;
loop {
  assume(x >= 0 && y >= 0);
  w = 3*w + x + 1;
  if (2 | x - y) { x = x - z; } else { y = y - z; }
}
";

fn main() {
    let tf = compile(PROGRAM).unwrap();
    println!("transition formula over {:?}:\n  {}", tf.vars.iter().map(|v| v.to_string()).collect::<Vec<_>>(), tf.body);

    let (hull, transcript) = affine_hull_with_samples(&tf);
    println!("affine hull from {} models:\n{hull}", transcript.samples.len());

    let lam = det_fixpoint(&hull);
    println!("deterministic subspace (rows):\n{}", QMatrix::from_rows(4, lam.basis().to_vec()));

    let (det, sim, _) = determinize(&hull);
    println!("deterministic abstraction:\n{det}");
    println!("simulation:\n{}", sim.matrix);
    assert!(sim.is_simulation(&hull, &det));
}
