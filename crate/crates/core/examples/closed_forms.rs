//! Exact linear algebra: characteristic polynomials, rational spectra and
//! closed forms of `c . A^k x`.
//!
//!     cargo run --example closed_forms

use mortal_core::qlinalg::{char_poly, closed_form, iterate_functional, rat_vec, rational_spectrum, QMatrix};
use num_bigint::BigInt;

fn main() {
    let a = QMatrix::from_ints(&[&[1, 1, 0], &[0, 1, 1], &[0, 0, 2]]);
    println!("A =\n{a}");
    let (p, scale) = char_poly(&a).unwrap();
    println!("char poly: {p} (scaled by {scale})");
    let spec = rational_spectrum(&a).unwrap();
    for (root, mult) in &spec.roots {
        println!("eigenvalue {root} with multiplicity {mult}");
    }

    // closed form of the first coordinate along the orbit
    let c = rat_vec(&[1, 0, 0]);
    let e = closed_form(&c, &a).unwrap();
    println!("terms (lambda, degree, coeffs) over denominator {}:", e.denom);
    for t in &e.terms {
        println!("  {} {} {:?}", t.lambda, t.degree, t.coeffs.iter().map(|x| x.to_string()).collect::<Vec<_>>());
    }

    let x = rat_vec(&[3, -1, 2]);
    let xi: Vec<BigInt> = [3, -1, 2].iter().map(|&v| BigInt::from(v)).collect();
    for k in 0..6u64 {
        let closed = e.eval(&xi, k);
        let direct = iterate_functional(&c, &a, &x, k);
        println!("k = {k}: closed form {closed}, direct {direct}");
        assert_eq!(closed, direct);
    }
}
