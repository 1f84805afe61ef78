//! Rational-spectrum reflection and the integer restriction of a
//! deterministic linear system.
//!
//!     cargo run --example reflection

use mortal_core::abstractions::AffineTS;
use mortal_core::qlinalg::{rational_spectrum, QMatrix};
use mortal_core::reflection::{integer_restriction, omega_domain, qdlts_reflection};

fn main() {
    // a doubling on x + y next to a rotation of (z, w); the last row pins
    // x = y before a step is allowed
    let t = AffineTS::from_ints(
        &[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1], &[0, 0, 0, 0]],
        &[&[1, 1, 0, 0], &[1, 1, 0, 0], &[0, 0, 0, 1], &[0, 0, -1, 0], &[1, -1, 0, 0]],
        &[0, 0, 0, 0, 0],
    );
    let om = omega_domain(&t).unwrap();
    println!("states with infinite runs span {} dimensions", om.omega_basis.dim());
    println!("dynamics there:\n{}", om.dynamics);

    let (u, s) = qdlts_reflection(&t).unwrap();
    println!("reflection has dimension {}; simulation:\n{}", u.dim(), s.matrix);
    let d = omega_domain(&u).unwrap().dynamics;
    let spec = rational_spectrum(&d).unwrap();
    println!("reflected spectrum: {:?}", spec.roots.iter().map(|(r, m)| format!("{r}^{m}")).collect::<Vec<_>>());

    // halving loses integrality, so only the x = 0 slice survives
    let mut m = QMatrix::from_ints(&[&[0, 0], &[0, 1]]);
    m[(0, 0)] = num_rational::BigRational::new(1.into(), 2.into());
    let half = AffineTS::linear_map(&m);
    let ir = integer_restriction(&half, &omega_domain(&half).unwrap()).unwrap();
    println!("integer restriction of diag(1/2, 1): dim {}, constraint rows\n{}", ir.dim(), ir.cmat);
}
