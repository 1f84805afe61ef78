//! Linear abstractions with rational and integer spectra.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::abstractions::{alpha, det_fixpoint, AffineTS, LinearSimulation};
use crate::error::{Error, Result};
use crate::qlinalg::{
    generalized_eigenspace, lcm_denominators, primitive_integer, rational_spectrum, int_vec_to_rat,
    QMatrix, Rational, Side, Subspace,
};

/// The ω-domain of a deterministic linear system and the map it induces there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaRestriction {
    pub omega_basis: Subspace,
    /// Matrix of `T|ω` in `omega_basis` coordinates.
    pub dynamics: QMatrix,
    /// Ambient successor map; agrees with `T` on `dom(T)`.
    pub successor: QMatrix,
    /// Number of `dom(T^k)` iterations until stabilization.
    pub steps: usize,
}

/// The integer-spectrum part of a linear system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerRestriction {
    pub z_basis: Subspace,
    /// Restricted dynamics on projected coordinates.
    pub m: QMatrix,
    /// Integer projection of the ambient space onto `z_basis` coordinates.
    pub p: QMatrix,
    /// Integer constraint matrix: `cmat w = 0` iff `w` lies in `z_basis`.
    pub cmat: QMatrix,
}

/// `[[a, 0], [0, 1]] x' = [[b, c], [0, 1]] x` and the embedding `x -> (x, 1)`.
pub fn homogenize(v: &AffineTS) -> Result<(AffineTS, LinearSimulation)> {
    if v.is_empty() {
        return Err(Error::EmptyRelation);
    }
    let n = v.dim();
    let k = v.num_constraints();
    let mut a_rows: Vec<Vec<Rational>> = v
        .a()
        .row_vecs()
        .into_iter()
        .map(|mut r| {
            r.push(Rational::zero());
            r
        })
        .collect();
    let mut b_rows: Vec<Vec<Rational>> = v
        .b()
        .row_vecs()
        .into_iter()
        .zip(v.c())
        .map(|(mut r, c)| {
            r.push(c.clone());
            r
        })
        .collect();
    let mut last = vec![Rational::zero(); n + 1];
    last[n] = Rational::one();
    a_rows.push(last.clone());
    b_rows.push(last.clone());
    let sys = AffineTS::new(
        QMatrix::from_rows(n + 1, a_rows),
        QMatrix::from_rows(n + 1, b_rows),
        vec![Rational::zero(); k + 1],
    );
    let mut embed = QMatrix::zeros(n + 1, n);
    for i in 0..n {
        embed[(i, i)] = Rational::one();
    }
    Ok((
        sys,
        LinearSimulation {
            matrix: embed,
            offset: last,
        },
    ))
}

/// Left inverse of a full-column-rank matrix.
fn left_inverse(a: &QMatrix) -> Result<QMatrix> {
    let at = a.transpose();
    let gram = &at * a;
    let inv = gram.inverse().ok_or(Error::NotDeterministic)?;
    Ok(&inv * &at)
}

/// Computes `dom^ω(t)` and the restricted dynamics.
pub fn omega_domain(t: &AffineTS) -> Result<OmegaRestriction> {
    let n = t.dim();
    if t.is_empty() {
        return Ok(OmegaRestriction {
            omega_basis: Subspace::zero(n),
            dynamics: QMatrix::zeros(0, 0),
            successor: QMatrix::zeros(n, n),
            steps: 0,
        });
    }
    if !t.is_linear() {
        return Err(Error::Dimension("omega_domain expects a linear system".into()));
    }
    if t.a().rank() < n {
        return Err(Error::NotDeterministic);
    }
    let a = t.a();
    let b = t.b();
    // rows annihilating the column space of a
    let k = a.transpose().null_space().row_matrix();
    let succ = &left_inverse(a)? * b;
    let base = if k.rows() == 0 {
        QMatrix::zeros(0, n)
    } else {
        &k * b
    };
    let mut dom = base.null_space();
    let mut steps = 1;
    loop {
        let ck = dom.annihilator().row_matrix();
        let rows = if ck.rows() == 0 {
            base.clone()
        } else {
            base.vstack(&(&ck * &succ))
        };
        let next = rows.null_space();
        if next == dom {
            break;
        }
        dom = next;
        steps += 1;
    }
    let d = dom.dim();
    let mut dyn_cols = Vec::with_capacity(d);
    for v in dom.basis() {
        let image = succ.mul_vec(v);
        let coords = dom
            .coordinates(&image)
            .expect("dom^omega is invariant under the successor map");
        dyn_cols.push(coords);
    }
    Ok(OmegaRestriction {
        omega_basis: dom,
        dynamics: QMatrix::from_cols(d, dyn_cols),
        successor: succ,
        steps,
    })
}

/// Extends a functional on `dom^ω` (given in basis coordinates) to the ambient space.
fn lift_functional(basis: &QMatrix, h: &[Rational]) -> Vec<Rational> {
    // f . b_i = h_i for every basis vector b_i: solve basis^T f = h.
    basis
        .transpose()
        .solve(h)
        .expect("basis columns are independent")
}

/// `E_Q(t)`: lifted generalized left eigenvectors with rational eigenvalues,
/// plus every functional vanishing on `dom^ω`.
pub fn rational_eigenspace(t: &AffineTS, omega: &OmegaRestriction) -> Result<Subspace> {
    let n = t.dim();
    let w = omega.omega_basis.col_matrix();
    let mut gens: Vec<Vec<Rational>> = omega.omega_basis.annihilator().basis().to_vec();
    if omega.dynamics.rows() > 0 {
        let spec = rational_spectrum(&omega.dynamics)?;
        for (lambda, _) in &spec.roots {
            let left = generalized_eigenspace(&omega.dynamics, lambda, Side::Left)?;
            for h in left.basis() {
                gens.push(lift_functional(&w, h));
            }
        }
    }
    Ok(Subspace::span(n, gens))
}

/// `true` if the restricted dynamics has only rational eigenvalues.
pub fn has_rational_spectrum(omega: &OmegaRestriction) -> Result<bool> {
    Ok(rational_spectrum(&omega.dynamics)?.fully_split)
}

/// Best abstraction of a deterministic linear system by one whose restricted
/// dynamics has rational spectrum.
pub fn qdlts_reflection(t: &AffineTS) -> Result<(AffineTS, LinearSimulation)> {
    let mut u = t.clone();
    let mut s = LinearSimulation::identity(t.dim());
    loop {
        let omega = omega_domain(&u)?;
        if has_rational_spectrum(&omega)? {
            return Ok((u, s));
        }
        let e = rational_eigenspace(&u, &omega)?;
        let (q_sys, q) = alpha(&u, &e);
        let lam = det_fixpoint(&q_sys);
        let (next, d) = alpha(&q_sys, &lam);
        s = d.after(&q.after(&s));
        u = next;
    }
}

/// `Z(t)`, the restricted dynamics on it, an integer projection onto it and
/// an integer constraint matrix for it.
pub fn integer_restriction(t: &AffineTS, omega: &OmegaRestriction) -> Result<IntegerRestriction> {
    let n = t.dim();
    let d = omega.dynamics.rows();
    let w = omega.omega_basis.col_matrix();
    let mut int_vecs = Vec::new();
    let mut other_vecs = Vec::new();
    if d > 0 {
        let spec = rational_spectrum(&omega.dynamics)?;
        if !spec.fully_split {
            return Err(Error::NonRationalSpectrum);
        }
        for (lambda, _) in &spec.roots {
            let g = generalized_eigenspace(&omega.dynamics, lambda, Side::Right)?;
            let target = if lambda.is_integer() {
                &mut int_vecs
            } else {
                &mut other_vecs
            };
            for v in g.basis() {
                target.push(w.mul_vec(v));
            }
        }
    }
    let z_basis = Subspace::span(n, int_vecs);
    let zdim = z_basis.dim();

    // Dynamics on Z in its RREF basis.
    let mut cols = Vec::with_capacity(zdim);
    for v in z_basis.basis() {
        let image = omega.successor.mul_vec(v);
        cols.push(
            z_basis
                .coordinates(&image)
                .expect("Z(T) is invariant under the successor map"),
        );
    }
    let m = QMatrix::from_cols(zdim, cols);

    // Projection with kernel = non-integer eigenspaces + complement of dom^ω.
    let mut full: Vec<Vec<Rational>> = z_basis.basis().to_vec();
    full.extend(Subspace::span(n, other_vecs).basis().iter().cloned());
    full.extend(omega.omega_basis.complement_units());
    let change = QMatrix::from_cols(n, full);
    let inv = change
        .inverse()
        .expect("eigenspaces and complement form a basis");
    let p_rows: Vec<Vec<Rational>> = (0..zdim).map(|i| inv.row(i).to_vec()).collect();
    let scale = Rational::from_integer(lcm_denominators(p_rows.iter().flatten()));
    let p = QMatrix::from_rows(n, p_rows).scale(&scale);

    let c_rows = z_basis
        .annihilator()
        .basis()
        .iter()
        .map(|r| int_vec_to_rat(&primitive_integer(r)))
        .collect();
    let cmat = QMatrix::from_rows(n, c_rows);
    Ok(IntegerRestriction {
        z_basis,
        m,
        p,
        cmat,
    })
}

impl IntegerRestriction {
    pub fn dim(&self) -> usize {
        self.z_basis.dim()
    }

    /// `true` if every eigenvalue of `m` is an integer.
    pub fn has_integer_spectrum(&self) -> bool {
        rational_spectrum(&self.m).is_ok_and(|s| s.fully_split && s.all_integer())
    }

    /// Projected coordinates of an ambient state.
    pub fn project(&self, x: &[Rational]) -> Vec<Rational> {
        self.p.mul_vec(x)
    }
}

/// Integer-valued vector from rationals that are known to be integral.
pub fn to_integers(v: &[Rational]) -> Option<Vec<BigInt>> {
    v.iter()
        .map(|x| x.is_integer().then(|| x.to_integer()))
        .collect()
}

/// Sign-insensitive check used by tests and reports.
pub fn is_nonnegative_integer(x: &Rational) -> bool {
    x.is_integer() && !x.is_negative()
}
