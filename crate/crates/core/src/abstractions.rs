//! Transition formulas and their affine and deterministic abstractions.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lia::{model, qe_cooper, Formula, LinTerm, Valuation, Var};
use crate::qlinalg::{
    dot, int_vec_to_rat, is_zero_vec, lcm_denominators, primitive_integer, QMatrix, Rational,
    Subspace,
};

/// A transition formula `F(X, X')`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionFormula {
    pub vars: Vec<Var>,
    pub body: Formula,
}

impl TransitionFormula {
    pub fn new(vars: Vec<Var>, body: Formula) -> Self {
        TransitionFormula { vars, body }
    }

    /// Convenience constructor from variable names.
    pub fn from_names(names: &[&str], body: Formula) -> Self {
        TransitionFormula::new(names.iter().map(|n| Var::new(n)).collect(), body)
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn primed_vars(&self) -> Vec<Var> {
        self.vars.iter().map(Var::primed).collect()
    }

    /// Pre-state variables followed by post-state variables.
    pub fn stacked_vars(&self) -> Vec<Var> {
        let mut v = self.vars.clone();
        v.extend(self.primed_vars());
        v
    }

    pub fn identity(vars: Vec<Var>) -> Self {
        let body = Formula::and(
            vars.iter()
                .map(|v| Formula::eq(LinTerm::var(&v.primed()), LinTerm::var(v))),
        );
        TransitionFormula::new(vars, body)
    }

    /// The body with quantifiers eliminated.
    pub fn quantifier_free(&self) -> TransitionFormula {
        if self.body.is_quantifier_free() {
            self.clone()
        } else {
            TransitionFormula::new(self.vars.clone(), qe_cooper(&self.body))
        }
    }

    /// Some successor of `state`, if the relation has one.
    pub fn successor(&self, state: &[BigInt]) -> Option<Vec<BigInt>> {
        let val: Valuation = self.vars.iter().cloned().zip(state.iter().cloned()).collect();
        let step = crate::lia::partial_eval(&self.body, &val);
        let m = model(&step)?;
        Some(
            self.primed_vars()
                .iter()
                .map(|v| m.get(v).cloned().unwrap_or_default())
                .collect(),
        )
    }

    pub fn holds(&self, pre: &[BigInt], post: &[BigInt]) -> Result<bool> {
        let mut val: Valuation = self.vars.iter().cloned().zip(pre.iter().cloned()).collect();
        val.extend(self.primed_vars().into_iter().zip(post.iter().cloned()));
        self.quantifier_free().body.eval(&val)
    }
}

/// Relational composition `exists x''. f(x, x'') && g(x'', x')`, optionally
/// with the intermediate state eliminated.
pub fn compose(f: &TransitionFormula, g: &TransitionFormula, eliminate: bool) -> TransitionFormula {
    assert_eq!(f.vars, g.vars, "composition over different variable sets");
    let mids: Vec<Var> = f.vars.iter().map(|v| Var::fresh(v.name())).collect();
    let to_mid_post: BTreeMap<Var, Var> = f.primed_vars().into_iter().zip(mids.clone()).collect();
    let to_mid_pre: BTreeMap<Var, Var> = g.vars.iter().cloned().zip(mids.clone()).collect();
    let body = Formula::and(vec![f.body.rename(&to_mid_post), g.body.rename(&to_mid_pre)]);
    let body = Formula::exists_many(mids, body);
    let body = if eliminate { qe_cooper(&body) } else { body };
    TransitionFormula::new(f.vars.clone(), body)
}

/// Affine transition system `a x' = b x + c`, kept as the RREF of the
/// constraint block `[a | -b | -c]`, or the empty relation.
#[derive(Clone, PartialEq, Eq)]
pub struct AffineTS {
    dim: usize,
    a: QMatrix,
    b: QMatrix,
    c: Vec<Rational>,
    empty: bool,
}

impl AffineTS {
    pub fn new(a: QMatrix, b: QMatrix, c: Vec<Rational>) -> Self {
        let n = a.cols();
        assert_eq!(b.cols(), n);
        assert_eq!(a.rows(), b.rows());
        assert_eq!(c.len(), a.rows());
        let neg = Rational::from_integer(BigInt::from(-1));
        let block = a
            .hstack(&b.scale(&neg))
            .hstack(&QMatrix::from_cols(a.rows(), vec![c.iter().map(|x| -x).collect()]));
        let (r, pivots) = block.rref();
        if pivots.last() == Some(&(2 * n)) {
            return AffineTS::empty(n);
        }
        let m = pivots.len();
        let rows: Vec<Vec<Rational>> = (0..m).map(|i| r.row(i).to_vec()).collect();
        let a = QMatrix::from_rows(n, rows.iter().map(|r| r[..n].to_vec()).collect());
        let b = QMatrix::from_rows(
            n,
            rows.iter()
                .map(|r| r[n..2 * n].iter().map(|x| -x).collect())
                .collect(),
        );
        let c = rows.iter().map(|r| -&r[2 * n]).collect();
        AffineTS {
            dim: n,
            a,
            b,
            c,
            empty: false,
        }
    }

    /// The linear system `x' = m x`.
    pub fn linear_map(m: &QMatrix) -> Self {
        let n = m.rows();
        AffineTS::new(QMatrix::identity(n), m.clone(), vec![Rational::zero(); n])
    }

    pub fn empty(dim: usize) -> Self {
        AffineTS {
            dim,
            a: QMatrix::zeros(0, dim),
            b: QMatrix::zeros(0, dim),
            c: Vec::new(),
            empty: true,
        }
    }

    pub fn from_ints(a: &[&[i64]], b: &[&[i64]], c: &[i64]) -> Self {
        AffineTS::new(
            QMatrix::from_ints(a),
            QMatrix::from_ints(b),
            c.iter().map(|&x| Rational::from_integer(x.into())).collect(),
        )
    }

    /// The affine set `point + span(dirs)` of stacked `(x, x')` vectors.
    pub fn from_affine_set(dim: usize, point: &[Rational], dirs: &Subspace) -> Self {
        assert_eq!(point.len(), 2 * dim);
        let ann = dirs.annihilator();
        let mut a_rows = Vec::new();
        let mut b_rows = Vec::new();
        let mut c = Vec::new();
        for f in ann.basis() {
            // f_pre . x + f_post . x' = f . point
            a_rows.push(f[dim..].to_vec());
            b_rows.push(f[..dim].iter().map(|x| -x).collect());
            c.push(dot(f, point));
        }
        AffineTS::new(
            QMatrix::from_rows(dim, a_rows),
            QMatrix::from_rows(dim, b_rows),
            c,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn a(&self) -> &QMatrix {
        &self.a
    }

    pub fn b(&self) -> &QMatrix {
        &self.b
    }

    pub fn c(&self) -> &[Rational] {
        &self.c
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn is_linear(&self) -> bool {
        is_zero_vec(&self.c)
    }

    pub fn num_constraints(&self) -> usize {
        self.a.rows()
    }

    pub fn contains(&self, x: &[Rational], x2: &[Rational]) -> bool {
        if self.empty {
            return false;
        }
        let lhs = self.a.mul_vec(x2);
        let rhs = self.b.mul_vec(x);
        lhs.iter()
            .zip(&rhs)
            .zip(&self.c)
            .all(|((l, r), c)| l == &(r + c))
    }

    /// Constraint matrix over stacked `(x, x')`: `[-b | a] z = c`.
    pub fn stacked_constraints(&self) -> (QMatrix, Vec<Rational>) {
        let neg = Rational::from_integer(BigInt::from(-1));
        (self.b.scale(&neg).hstack(&self.a), self.c.clone())
    }

    /// A point of the relation and a basis of its direction space, over
    /// stacked `(x, x')`.
    pub fn generators(&self) -> Option<(Vec<Rational>, Subspace)> {
        if self.empty {
            return None;
        }
        let (m, c) = self.stacked_constraints();
        let point = m.solve(&c).expect("non-empty system is consistent");
        Some((point, m.null_space()))
    }

    /// Number of free parameters in successors (0 iff deterministic where defined).
    pub fn successor_freedom(&self) -> usize {
        self.dim - self.a.rank()
    }
}

impl fmt::Debug for AffineTS {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for AffineTS {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.empty {
            return write!(f, "empty relation over {} variables", self.dim);
        }
        writeln!(f, "A x' = B x + c over {} variables", self.dim)?;
        for i in 0..self.a.rows() {
            let row = |m: &QMatrix| {
                m.row(i)
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            writeln!(f, "  [{}] x' = [{}] x + {}", row(&self.a), row(&self.b), self.c[i])?;
        }
        Ok(())
    }
}

/// Affine map `x -> matrix * x + offset`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinearSimulation {
    pub matrix: QMatrix,
    pub offset: Vec<Rational>,
}

impl LinearSimulation {
    pub fn linear(matrix: QMatrix) -> Self {
        let offset = vec![Rational::zero(); matrix.rows()];
        LinearSimulation { matrix, offset }
    }

    pub fn identity(n: usize) -> Self {
        LinearSimulation::linear(QMatrix::identity(n))
    }

    pub fn source_dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn target_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn apply(&self, x: &[Rational]) -> Vec<Rational> {
        self.matrix
            .mul_vec(x)
            .into_iter()
            .zip(&self.offset)
            .map(|(a, b)| a + b)
            .collect()
    }

    /// `self` after `inner`: `x -> self(inner(x))`.
    pub fn after(&self, inner: &LinearSimulation) -> LinearSimulation {
        LinearSimulation {
            matrix: &self.matrix * &inner.matrix,
            offset: self.apply(&inner.offset),
        }
    }

    pub fn scale(&self, k: &Rational) -> LinearSimulation {
        LinearSimulation {
            matrix: self.matrix.scale(k),
            offset: self.offset.iter().map(|x| x * k).collect(),
        }
    }

    /// Least positive integer `k` making matrix and offset integral.
    pub fn integer_scale(&self) -> BigInt {
        lcm_denominators(self.matrix.row_vecs().iter().flatten().chain(&self.offset))
    }

    /// Checks the simulation property on the generators of `source`.
    pub fn is_simulation(&self, source: &AffineTS, target: &AffineTS) -> bool {
        let Some((point, dirs)) = source.generators() else {
            return true;
        };
        let n = source.dim();
        if !target.contains(&self.apply(&point[..n]), &self.apply(&point[n..])) {
            return false;
        }
        dirs.basis().iter().all(|d| {
            let dx = self.matrix.mul_vec(&d[..n]);
            let dx2 = self.matrix.mul_vec(&d[n..]);
            let l = target.a().mul_vec(&dx2);
            let r = target.b().mul_vec(&dx);
            l == r
        })
    }
}

/// Integer points sampled by the affine-hull loop.
#[derive(Clone, Debug)]
pub struct HullTranscript {
    pub samples: Vec<Vec<BigInt>>,
}

/// Affine hull of the models of `f`, with the sampled models.
pub fn affine_hull_with_samples(f: &TransitionFormula) -> (AffineTS, HullTranscript) {
    let n = f.dim();
    let tf = f.quantifier_free();
    let stacked = tf.stacked_vars();
    let mut point: Option<Vec<Rational>> = None;
    let mut dirs = Subspace::zero(2 * n);
    let mut samples = Vec::new();
    loop {
        let query = match &point {
            None => tf.body.clone(),
            Some(p) => {
                // models outside the current hull
                let ann = dirs.annihilator();
                let outside = ann.basis().iter().map(|row| {
                    let coeffs = primitive_integer(row);
                    let rc = int_vec_to_rat(&coeffs);
                    let d = dot(&rc, p).to_integer();
                    let t = LinTerm::linear(&coeffs, &stacked);
                    Formula::or(vec![
                        Formula::leq(t.clone(), LinTerm::constant(&d - BigInt::one())),
                        Formula::geq(t, LinTerm::constant(d + BigInt::one())),
                    ])
                });
                Formula::and(vec![tf.body.clone(), Formula::or(outside)])
            }
        };
        let Some(m) = model(&query) else {
            break;
        };
        let z: Vec<BigInt> = stacked
            .iter()
            .map(|v| m.get(v).cloned().unwrap_or_default())
            .collect();
        let zr = int_vec_to_rat(&z);
        samples.push(z);
        match &point {
            None => point = Some(zr),
            Some(p) => {
                let d: Vec<Rational> = zr.iter().zip(p).map(|(a, b)| a - b).collect();
                dirs = dirs.sum(&Subspace::span(2 * n, vec![d]));
            }
        }
        if dirs.is_full() {
            break;
        }
    }
    let hull = match point {
        None => AffineTS::empty(n),
        Some(p) => AffineTS::from_affine_set(n, &p, &dirs),
    };
    (hull, HullTranscript { samples })
}

pub fn affine_hull(f: &TransitionFormula) -> AffineTS {
    affine_hull_with_samples(f).0
}

/// `{d : exists y. M B^T y = 0 && A^T y = d}` where `M` spans the annihilator of `lam`.
pub fn det_step(t: &AffineTS, lam: &Subspace) -> Subspace {
    let n = t.dim();
    assert_eq!(lam.ambient_dim(), n);
    if t.is_empty() {
        return Subspace::full(n);
    }
    let m = lam.annihilator().row_matrix();
    let k = t.num_constraints();
    let ys = if m.rows() == 0 {
        Subspace::full(k)
    } else {
        (&m * &t.b().transpose()).null_space()
    };
    ys.image(&t.a().transpose())
}

/// Greatest fixpoint of `det_step` from the full dual space.
pub fn det_fixpoint(t: &AffineTS) -> Subspace {
    let mut lam = Subspace::full(t.dim());
    loop {
        let next = det_step(t, &lam);
        if next == lam {
            return lam;
        }
        lam = next;
    }
}

/// The abstraction of `t` induced by the functionals in `lam`.
pub fn alpha(t: &AffineTS, lam: &Subspace) -> (AffineTS, LinearSimulation) {
    let s = lam.row_matrix();
    let m = s.rows();
    let sim = LinearSimulation::linear(s.clone());
    let Some((point, dirs)) = t.generators() else {
        return (AffineTS::empty(m), sim);
    };
    let n = t.dim();
    let stack = |z: &[Rational]| {
        let mut v = s.mul_vec(&z[..n]);
        v.extend(s.mul_vec(&z[n..]));
        v
    };
    let p = stack(&point);
    let d = Subspace::span(2 * m, dirs.basis().iter().map(|z| stack(z)).collect());
    (AffineTS::from_affine_set(m, &p, &d), sim)
}

/// Deterministic reflection: `alpha(t, det_fixpoint(t))`.
pub fn determinize(t: &AffineTS) -> (AffineTS, LinearSimulation, Subspace) {
    let lam = det_fixpoint(t);
    let (u, s) = alpha(t, &lam);
    (u, s, lam)
}

/// Checks that `t` is deterministic: successors, where they exist, are unique.
pub fn is_deterministic(t: &AffineTS) -> bool {
    t.is_empty() || t.successor_freedom() == 0
}

/// Error helper for callers requiring determinism.
pub fn require_deterministic(t: &AffineTS) -> Result<()> {
    if is_deterministic(t) {
        Ok(())
    } else {
        Err(Error::NotDeterministic)
    }
}
