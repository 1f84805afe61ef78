//! Compiling loop programs to transition formulas and running the same
//! analysis the `mortal` binary exposes.
//!
//!     cargo run --example programs

use mortal_core::cli::{compile, report_json, run};
use mortal_core::mortal::mp;

const PROGRAM: &str = "
vars x, y, n;
loop {
  assume(x >= 1 && 2 | x);
  x = x / 2;
  y = *;
  if (y >= 0) { n = n + 1; } else { n = n - 1; }
}
";

fn main() {
    let tf = compile(PROGRAM).unwrap();
    println!("compiled: {}", tf.body);
    let r = mp(&tf).unwrap();
    println!("mp: {}", r.mp);
    let json = report_json(&r);
    println!("proved_universal = {}", json["proved_universal"]);

    // the command-line front end on the same text, via a temporary file
    let path = std::env::temp_dir().join("mortal-example.tf");
    std::fs::write(&path, PROGRAM).unwrap();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(["mortal", "prove", path.to_str().unwrap()], &mut out, &mut err);
    print!("mortal prove -> exit {code}: {}", String::from_utf8_lossy(&out));
    let _ = std::fs::remove_file(path);
}
