//! Mortal preconditions of transition formulas.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::abstractions::{
    affine_hull, determinize, AffineTS, LinearSimulation, TransitionFormula,
};
use crate::asymptotics::{chi_formula, PeriodicFormulaSeq};
use crate::error::{Error, Result};
use crate::lia::{is_valid, qe_cooper, Formula, LinTerm, Valuation, Var};
use crate::qlinalg::{int_vec_to_rat, QMatrix, Rational, Subspace};
use crate::reflection::{
    homogenize, integer_restriction, omega_domain, qdlts_reflection, to_integers,
    IntegerRestriction,
};

/// Intermediate artifacts of one mortal-precondition computation.
#[derive(Clone, Debug)]
pub struct Stages {
    pub affine_hull: AffineTS,
    pub det_space: Option<Subspace>,
    pub deterministic: Option<(AffineTS, LinearSimulation)>,
    pub homogenized: Option<AffineTS>,
    pub reflection: Option<(AffineTS, LinearSimulation)>,
    /// Integer-scaled affine simulation from the formula to the reflection.
    pub simulation: Option<LinearSimulation>,
    pub integer_restriction: Option<IntegerRestriction>,
    /// Abstract-state variables of the guard.
    pub guard_vars: Vec<Var>,
    pub guard: Option<Formula>,
    pub chi: Option<PeriodicFormulaSeq>,
}

#[derive(Clone, Debug)]
pub struct MortalReport {
    pub vars: Vec<Var>,
    pub mp: Formula,
    pub stages: Stages,
    pub proved_universal: bool,
}

/// `rows * vars + offset` as linear terms.
fn affine_terms(m: &QMatrix, offset: &[Rational], vars: &[Var]) -> Vec<LinTerm> {
    (0..m.rows())
        .map(|i| {
            let coeffs = to_integers(m.row(i)).expect("integer-scaled simulation");
            let c = offset[i].to_integer();
            LinTerm::linear(&coeffs, vars) + LinTerm::constant(c)
        })
        .collect()
}

fn combine(m: &QMatrix, terms: &[LinTerm]) -> Vec<LinTerm> {
    (0..m.rows())
        .map(|i| {
            let coeffs = to_integers(m.row(i)).expect("integer matrix");
            coeffs
                .iter()
                .zip(terms)
                .fold(LinTerm::zero(), |acc, (c, t)| acc + t.scale(c))
        })
        .collect()
}

/// Computes a mortal precondition of `f`: every state satisfying it has no
/// infinite run.
pub fn mp(f: &TransitionFormula) -> Result<MortalReport> {
    let f = f.quantifier_free();
    let hull = affine_hull(&f);
    let mut stages = Stages {
        affine_hull: hull.clone(),
        det_space: None,
        deterministic: None,
        homogenized: None,
        reflection: None,
        simulation: None,
        integer_restriction: None,
        guard_vars: Vec::new(),
        guard: None,
        chi: None,
    };
    if hull.is_empty() {
        return Ok(MortalReport {
            vars: f.vars.clone(),
            mp: Formula::True,
            stages,
            proved_universal: true,
        });
    }
    let (dsys, dsim, lam) = determinize(&hull);
    stages.det_space = Some(lam);
    stages.deterministic = Some((dsys.clone(), dsim.clone()));
    let (hsys, hsim) = homogenize(&dsys)?;
    stages.homogenized = Some(hsys.clone());
    let (rsys, rsim) = qdlts_reflection(&hsys)?;
    stages.reflection = Some((rsys.clone(), rsim.clone()));

    let t = rsim.after(&hsim).after(&dsim);
    let k = Rational::from_integer(t.integer_scale());
    let t = t.scale(&k);
    stages.simulation = Some(t.clone());

    let omega = omega_domain(&rsys)?;
    let ir = integer_restriction(&rsys, &omega)?;
    stages.integer_restriction = Some(ir.clone());

    let tx = affine_terms(&t.matrix, &t.offset, &f.vars);
    let ptx = combine(&ir.p, &tx);
    let ctx = combine(&ir.cmat, &tx);
    let ws: Vec<Var> = (0..ir.dim()).map(|_| Var::fresh("w")).collect();
    stages.guard_vars = ws.clone();

    // G(w) = exists x, x'. F && w = P t(x) && C t(x) = 0
    let in_z = Formula::and(ctx.iter().map(|c| Formula::eq0(c.clone())));
    let links = ws
        .iter()
        .zip(&ptx)
        .map(|(w, p)| Formula::eq(LinTerm::var(w), p.clone()));
    let body = Formula::and(
        std::iter::once(f.body.clone())
            .chain(links)
            .chain(std::iter::once(in_z.clone())),
    );
    let guard = qe_cooper(&Formula::exists_many(f.stacked_vars(), body));
    stages.guard = Some(guard.clone());

    let chi = chi_formula(&guard, &ir.m, &ws)?;
    stages.chi = Some(chi.clone());

    let sigma: BTreeMap<Var, LinTerm> = ws.iter().cloned().zip(ptx).collect();
    let eventually = chi.conjunction().substitute(&sigma);
    let result = Formula::not(Formula::and(vec![eventually, in_z])).nnf();
    let proved = is_valid(&result);
    Ok(MortalReport {
        vars: f.vars.clone(),
        mp: result,
        stages,
        proved_universal: proved,
    })
}

/// `true` if every state of `f` is mortal according to [`mp`].
pub fn prove_termination(f: &TransitionFormula) -> Result<bool> {
    Ok(mp(f)?.proved_universal)
}

/// Bounded check that `g` (over `vars`, the coordinates of `ir.p`) holds on
/// every orbit point in the second half of `steps` iterations from `x0`.
pub fn sat_infty_check(
    ir: &IntegerRestriction,
    g: &Formula,
    vars: &[Var],
    x0: &[Rational],
    steps: usize,
) -> Result<bool> {
    if !ir.z_basis.contains(x0) {
        return Err(Error::OutsideSubspace);
    }
    let mut w = ir.project(x0);
    let g = if g.is_quantifier_free() {
        g.clone()
    } else {
        qe_cooper(g)
    };
    for k in 0..=steps {
        if k > steps / 2 {
            let ints = to_integers(&w)
                .ok_or_else(|| Error::Dimension("orbit left the integer lattice".into()))?;
            let val: Valuation = vars.iter().cloned().zip(ints).collect();
            if !g.eval(&val)? {
                return Ok(false);
            }
        }
        w = ir.m.mul_vec(&w);
    }
    Ok(true)
}

/// Convenience: evaluates `mp` at an integer state.
pub fn is_mortal_state(report: &MortalReport, state: &[BigInt]) -> Result<bool> {
    let val: Valuation = report.vars.iter().cloned().zip(state.iter().cloned()).collect();
    report.mp.eval(&val)
}

/// Integer vector helper for callers holding `i64` data.
pub fn state(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Rational embedding of an integer state.
pub fn rational_state(v: &[BigInt]) -> Vec<Rational> {
    int_vec_to_rat(v)
}

impl MortalReport {
    /// `true` if `mp` is trivially false (no state proved mortal).
    pub fn is_trivial(&self) -> bool {
        self.mp.is_false()
    }

    pub fn num_guard_vars(&self) -> usize {
        self.stages.guard_vars.len()
    }
}

impl Stages {
    pub fn is_zero_dimensional(&self) -> bool {
        self.integer_restriction
            .as_ref()
            .is_some_and(|ir| ir.dim() == 0)
    }
}
