//! Characteristic sequences of LIA guards along integer-spectrum orbits.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lia::{qe_cooper, Formula, LinTerm, Var};
use crate::qlinalg::{closed_form, ExpPoly, ExpTerm, QMatrix, Rational};

/// One period `H_0 .. H_{P-1}` of a periodic formula sequence.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PeriodicFormulaSeq {
    formulas: Vec<Formula>,
}

impl PeriodicFormulaSeq {
    /// Builds the sequence and shrinks it to its least syntactic period.
    pub fn new(formulas: Vec<Formula>) -> Self {
        assert!(!formulas.is_empty(), "a period has at least one formula");
        let p = formulas.len();
        let least = (1..=p)
            .filter(|q| p % q == 0)
            .find(|&q| (0..p).all(|i| formulas[i] == formulas[i % q]))
            .unwrap_or(p);
        PeriodicFormulaSeq {
            formulas: formulas[..least].to_vec(),
        }
    }

    pub fn constant(f: Formula) -> Self {
        PeriodicFormulaSeq { formulas: vec![f] }
    }

    pub fn period(&self) -> usize {
        self.formulas.len()
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    /// `H_{k mod P}`.
    pub fn at(&self, k: u64) -> &Formula {
        &self.formulas[(k % self.period() as u64) as usize]
    }

    pub fn map(&self, f: impl Fn(&Formula) -> Formula) -> Self {
        PeriodicFormulaSeq::new(self.formulas.iter().map(f).collect())
    }

    /// Pointwise combination after aligning both periods to their lcm.
    pub fn zip_all(seqs: &[PeriodicFormulaSeq], f: impl Fn(Vec<Formula>) -> Formula) -> Self {
        let p = seqs.iter().fold(1usize, |acc, s| acc.lcm(&s.period()));
        PeriodicFormulaSeq::new(
            (0..p)
                .map(|i| f(seqs.iter().map(|s| s.at(i as u64).clone()).collect()))
                .collect(),
        )
    }

    /// `H_0 && .. && H_{P-1}`.
    pub fn conjunction(&self) -> Formula {
        Formula::and(self.formulas.iter().cloned())
    }
}

impl fmt::Display for PeriodicFormulaSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, h) in self.formulas.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{h}")?;
        }
        f.write_str(")^w")
    }
}

impl fmt::Debug for PeriodicFormulaSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn lin(coeffs: &[BigInt], vars: &[Var]) -> LinTerm {
    LinTerm::linear(coeffs, vars)
}

/// Eventual non-negativity of `p` by dominant term analysis. Every base
/// must be positive.
pub fn dta(p: &ExpPoly, vars: &[Var]) -> Result<Formula> {
    if let Some(t) = p.terms.iter().find(|t| !t.lambda.is_positive()) {
        return Err(Error::NonPositiveBase(t.lambda.to_string()));
    }
    // Dominance-ordered summands; the constant sits at the (1, 0) position.
    let mut summands: Vec<LinTerm> = Vec::new();
    let mut placed = p.constant.is_zero();
    for t in &p.terms {
        let is_unit = t.lambda.is_one() && t.degree == 0;
        if !placed && !is_unit && !outranks(t) {
            summands.push(LinTerm::constant(p.constant.clone()));
            placed = true;
        }
        let mut s = lin(&t.coeffs, vars);
        if is_unit && !placed {
            s.add_constant(&p.constant);
            placed = true;
        }
        summands.push(s);
    }
    if !placed {
        summands.push(LinTerm::constant(p.constant.clone()));
    }
    // DTA(s + rest) = s >= 1 || (s = 0 && DTA(rest)), DTA(0) = true;
    // the innermost step s >= 1 || s = 0 is written s >= 0.
    let mut rev = summands.into_iter().rev();
    let Some(last) = rev.next() else {
        return Ok(Formula::True);
    };
    let init = Formula::geq(last, LinTerm::zero());
    Ok(rev.fold(init, |rest, s| {
        Formula::or(vec![
            Formula::geq(s.clone(), LinTerm::constant(1)),
            Formula::and(vec![Formula::eq0(s), rest]),
        ])
    }))
}

/// `true` if the term dominates the constant `1^k k^0`.
fn outranks(t: &ExpTerm) -> bool {
    t.lambda > BigInt::one() || t.degree > 0
}

fn to_rat(v: &[BigInt]) -> Vec<Rational> {
    v.iter().map(|x| Rational::from_integer(x.clone())).collect()
}

/// Characteristic sequence of `c.x + d >= 0` under `a`.
pub fn chi_ineq(c: &[BigInt], d: &BigInt, a: &QMatrix, vars: &[Var]) -> Result<PeriodicFormulaSeq> {
    let e = closed_form(&to_rat(c), a)?.drop_zero_bases();
    let shift = |p: ExpPoly| {
        let dq = d * &p.denom;
        p.with_constant(dq)
    };
    if e.terms.iter().all(|t| t.lambda.is_positive()) {
        return Ok(PeriodicFormulaSeq::constant(dta(&shift(e), vars)?));
    }
    let even = shift(e.reindex(2, 0)).drop_zero_bases();
    let odd = shift(e.reindex(2, 1)).drop_zero_bases();
    Ok(PeriodicFormulaSeq::new(vec![dta(&even, vars)?, dta(&odd, vars)?]))
}

/// Transient length and period of `lambda^k mod m`.
fn power_cycle(lambda: &BigInt, m: &BigInt) -> (usize, usize) {
    let mut seen: HashMap<BigInt, usize> = HashMap::new();
    let mut x = BigInt::one().mod_floor(m);
    let mut k = 0usize;
    loop {
        if let Some(&start) = seen.get(&x) {
            return (start, k - start);
        }
        seen.insert(x.clone(), k);
        x = (&x * lambda).mod_floor(m);
        k += 1;
    }
}

/// `lambda^k * k^d mod m`.
fn term_residue(lambda: &BigInt, degree: u32, k: usize, m: &BigInt) -> BigInt {
    let lp = lambda.modpow(&BigInt::from(k), m);
    let kp = BigInt::from(k).modpow(&BigInt::from(degree), m);
    (lp * kp).mod_floor(m)
}

/// Characteristic sequence of `n | c.x + d` under `a`.
pub fn chi_div(
    n: &BigInt,
    c: &[BigInt],
    d: &BigInt,
    a: &QMatrix,
    vars: &[Var],
) -> Result<PeriodicFormulaSeq> {
    let e = closed_form(&to_rat(c), a)?;
    let q = e.denom.clone();
    let modulus = &q * n;
    let m_usize = modulus
        .to_usize()
        .ok_or_else(|| Error::Dimension(format!("modulus {modulus} too large")))?;
    let mut period = 1usize;
    let mut transient = 0usize;
    for t in &e.terms {
        let (tr, p) = power_cycle(&t.lambda, &modulus);
        let p = if t.degree > 0 { p.lcm(&m_usize) } else { p };
        period = period.lcm(&p);
        transient = transient.max(tr);
    }
    let threshold = usize::try_from(e.validity_threshold).unwrap_or(usize::MAX);
    let floor = transient.max(threshold.saturating_add(1));
    let start = floor.div_ceil(period) * period;
    let qd = &q * d;
    let formulas = (0..period)
        .map(|r| {
            let k = start + r;
            let mut t = LinTerm::constant(qd.clone());
            for term in &e.terms {
                let z = term_residue(&term.lambda, term.degree, k, &modulus);
                t = t + lin(&term.coeffs, vars).scale(&z);
            }
            Formula::div(modulus.clone(), t)
        })
        .collect();
    Ok(PeriodicFormulaSeq::new(formulas))
}

fn atom_coeffs(t: &LinTerm, vars: &[Var]) -> Result<Vec<BigInt>> {
    if let Some(v) = t.vars().find(|v| !vars.contains(v)) {
        return Err(Error::UnboundVariable(v.to_string()));
    }
    Ok(vars.iter().map(|v| t.coeff(v)).collect())
}

/// Characteristic sequence of an LIA formula over `vars` under `a`.
pub fn chi_formula(g: &Formula, a: &QMatrix, vars: &[Var]) -> Result<PeriodicFormulaSeq> {
    let g = if g.is_quantifier_free() {
        g.clone()
    } else {
        qe_cooper(g)
    };
    let mut cache = HashMap::new();
    chi_rec(&g, a, vars, &mut cache)
}

fn chi_rec(
    g: &Formula,
    a: &QMatrix,
    vars: &[Var],
    cache: &mut HashMap<Formula, PeriodicFormulaSeq>,
) -> Result<PeriodicFormulaSeq> {
    if let Some(s) = cache.get(g) {
        return Ok(s.clone());
    }
    let out = match g {
        Formula::True | Formula::False => PeriodicFormulaSeq::constant(g.clone()),
        Formula::Leq(t) => {
            // t <= 0  <=>  -t >= 0
            let c: Vec<BigInt> = atom_coeffs(t, vars)?.into_iter().map(|x| -x).collect();
            chi_ineq(&c, &-t.constant_part(), a, vars)?
        }
        Formula::Div(n, t) => chi_div(n, &atom_coeffs(t, vars)?, t.constant_part(), a, vars)?,
        Formula::Not(h) => chi_rec(h, a, vars, cache)?.map(|f| Formula::not(f.clone())),
        Formula::And(hs) | Formula::Or(hs) => {
            let parts = hs
                .iter()
                .map(|h| chi_rec(h, a, vars, cache))
                .collect::<Result<Vec<_>>>()?;
            if matches!(g, Formula::And(_)) {
                PeriodicFormulaSeq::zip_all(&parts, Formula::and)
            } else {
                PeriodicFormulaSeq::zip_all(&parts, Formula::or)
            }
        }
        Formula::Exists(..) | Formula::Forall(..) => return Err(Error::Quantified),
    };
    cache.insert(g.clone(), out.clone());
    Ok(out)
}

/// States from which `g` holds at all but finitely many points of the orbit.
pub fn eventual_invariance(g: &Formula, a: &QMatrix, vars: &[Var]) -> Result<Formula> {
    Ok(chi_formula(g, a, vars)?.conjunction())
}
