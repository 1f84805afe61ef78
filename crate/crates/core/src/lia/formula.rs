use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::term::{LinTerm, Valuation, Var};
use crate::error::{Error, Result};

/// LIA formula. `Leq(t)` is `t <= 0`; `Div(n, t)` is `n | t` with `n >= 1`.
///
/// Build through the smart constructors, which fold constants, flatten
/// connectives and normalize atoms.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Leq(LinTerm),
    Div(BigInt, LinTerm),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
}

impl Formula {
    pub fn bool(b: bool) -> Formula {
        if b {
            Formula::True
        } else {
            Formula::False
        }
    }

    /// `t <= 0`, divided through by the coefficient content.
    pub fn leq0(t: LinTerm) -> Formula {
        if t.is_constant() {
            return Formula::bool(!t.constant_part().is_positive());
        }
        let g = t.content();
        if g.is_one() {
            return Formula::Leq(t);
        }
        // g*s + c <= 0  <=>  s + ceil(c/g) <= 0
        let c = t.constant_part().clone();
        let s = t.linear_part().div_exact(&g);
        Formula::Leq(s.with_constant(ceil_div(&c, &g)))
    }

    pub fn leq(lhs: LinTerm, rhs: LinTerm) -> Formula {
        Formula::leq0(lhs - rhs)
    }

    pub fn lt(lhs: LinTerm, rhs: LinTerm) -> Formula {
        Formula::leq0(lhs - rhs + LinTerm::constant(1))
    }

    pub fn geq(lhs: LinTerm, rhs: LinTerm) -> Formula {
        Formula::leq(rhs, lhs)
    }

    pub fn gt(lhs: LinTerm, rhs: LinTerm) -> Formula {
        Formula::lt(rhs, lhs)
    }

    pub fn eq(lhs: LinTerm, rhs: LinTerm) -> Formula {
        let d = lhs - rhs;
        Formula::and(vec![Formula::leq0(d.clone()), Formula::leq0(-d)])
    }

    pub fn eq0(t: LinTerm) -> Formula {
        Formula::eq(t, LinTerm::zero())
    }

    pub fn neq(lhs: LinTerm, rhs: LinTerm) -> Formula {
        Formula::or(vec![Formula::lt(lhs.clone(), rhs.clone()), Formula::gt(lhs, rhs)])
    }

    /// `n | t`; `n` must be nonzero (its sign is ignored).
    pub fn div(n: impl Into<BigInt>, t: LinTerm) -> Formula {
        let n = n.into().abs();
        assert!(!n.is_zero(), "divisibility by zero");
        if n.is_one() {
            return Formula::True;
        }
        let mut r = LinTerm::constant(t.constant_part().mod_floor(&n));
        for (v, c) in t.coeffs() {
            r.add_monomial(c.mod_floor(&n), v);
        }
        if r.is_constant() {
            return Formula::bool(r.constant_part().is_zero());
        }
        let g = r.content().gcd(&n);
        if !r.constant_part().is_multiple_of(&g) {
            return Formula::False;
        }
        if g.is_one() {
            return Formula::Div(n, r);
        }
        Formula::div(&n / &g, r.div_exact(&g))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(g) => *g,
            // not(t <= 0) <=> 1 - t <= 0
            Formula::Leq(t) => Formula::leq0(LinTerm::constant(1) - t),
            g => Formula::Not(Box::new(g)),
        }
    }

    pub fn and(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out: Vec<Formula> = Vec::new();
        let mut seen = BTreeSet::new();
        for f in fs {
            match f {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(gs) => {
                    for g in gs {
                        if seen.insert(g.clone()) {
                            out.push(g);
                        }
                    }
                }
                g => {
                    if seen.insert(g.clone()) {
                        out.push(g);
                    }
                }
            }
        }
        let Some(mut out) = merge_bounds(out, true) else {
            return Formula::False;
        };
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    pub fn or(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out: Vec<Formula> = Vec::new();
        let mut seen = BTreeSet::new();
        for f in fs {
            match f {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(gs) => {
                    for g in gs {
                        if seen.insert(g.clone()) {
                            out.push(g);
                        }
                    }
                }
                g => {
                    if seen.insert(g.clone()) {
                        out.push(g);
                    }
                }
            }
        }
        let Some(mut out) = merge_bounds(out, false) else {
            return Formula::True;
        };
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(vec![Formula::not(a), b])
    }

    pub fn exists(v: Var, body: Formula) -> Formula {
        if !body.has_free(&v) {
            return body;
        }
        Formula::Exists(v, Box::new(body))
    }

    pub fn forall(v: Var, body: Formula) -> Formula {
        if !body.has_free(&v) {
            return body;
        }
        Formula::Forall(v, Box::new(body))
    }

    pub fn exists_many(vs: impl IntoIterator<Item = Var>, body: Formula) -> Formula {
        let vs: Vec<Var> = vs.into_iter().collect();
        vs.into_iter().rev().fold(body, |b, v| Formula::exists(v, b))
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Formula::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Formula::False)
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Leq(_) | Formula::Div(..) => true,
            Formula::Not(g) => g.is_quantifier_free(),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().all(Formula::is_quantifier_free),
            Formula::Exists(..) | Formula::Forall(..) => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out, &mut Vec::new());
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Var>, bound: &mut Vec<Var>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Leq(t) | Formula::Div(_, t) => {
                for v in t.vars() {
                    if !bound.contains(v) {
                        out.insert(v.clone());
                    }
                }
            }
            Formula::Not(g) => g.collect_free(out, bound),
            Formula::And(gs) | Formula::Or(gs) => {
                for g in gs {
                    g.collect_free(out, bound);
                }
            }
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                bound.push(v.clone());
                g.collect_free(out, bound);
                bound.pop();
            }
        }
    }

    pub fn has_free(&self, v: &Var) -> bool {
        match self {
            Formula::True | Formula::False => false,
            Formula::Leq(t) | Formula::Div(_, t) => t.mentions(v),
            Formula::Not(g) => g.has_free(v),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().any(|g| g.has_free(v)),
            Formula::Exists(w, g) | Formula::Forall(w, g) => w != v && g.has_free(v),
        }
    }

    /// Standard semantics on a quantifier-free formula.
    pub fn eval(&self, val: &Valuation) -> Result<bool> {
        Ok(match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Leq(t) => !t.eval(val)?.is_positive(),
            Formula::Div(n, t) => t.eval(val)?.is_multiple_of(n),
            Formula::Not(g) => !g.eval(val)?,
            Formula::And(gs) => {
                for g in gs {
                    if !g.eval(val)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(gs) => {
                for g in gs {
                    if g.eval(val)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::Exists(..) | Formula::Forall(..) => return Err(Error::Quantified),
        })
    }

    /// Capture-avoiding simultaneous substitution.
    pub fn substitute(&self, sigma: &BTreeMap<Var, LinTerm>) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Leq(t) => Formula::leq0(t.substitute_all(sigma)),
            Formula::Div(n, t) => Formula::div(n.clone(), t.substitute_all(sigma)),
            Formula::Not(g) => Formula::not(g.substitute(sigma)),
            Formula::And(gs) => Formula::and(gs.iter().map(|g| g.substitute(sigma))),
            Formula::Or(gs) => Formula::or(gs.iter().map(|g| g.substitute(sigma))),
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                let mut inner = sigma.clone();
                inner.remove(v);
                let captured = inner.values().any(|t| t.mentions(v));
                let (v2, body) = if captured {
                    let fresh = Var::fresh(v.name());
                    inner.insert(v.clone(), LinTerm::var(&fresh));
                    (fresh, g.substitute(&inner))
                } else {
                    (v.clone(), g.substitute(&inner))
                };
                if matches!(self, Formula::Exists(..)) {
                    Formula::exists(v2, body)
                } else {
                    Formula::forall(v2, body)
                }
            }
        }
    }

    pub fn substitute_var(&self, v: &Var, t: &LinTerm) -> Formula {
        let mut sigma = BTreeMap::new();
        sigma.insert(v.clone(), t.clone());
        self.substitute(&sigma)
    }

    /// Renames free variables (capture-avoiding).
    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Formula {
        let sigma = map
            .iter()
            .map(|(a, b)| (a.clone(), LinTerm::var(b)))
            .collect();
        self.substitute(&sigma)
    }

    /// Negation normal form: `Not` only wraps divisibility atoms.
    pub fn nnf(&self) -> Formula {
        self.nnf_signed(true)
    }

    fn nnf_signed(&self, pos: bool) -> Formula {
        match (self, pos) {
            (Formula::True, _) | (Formula::False, _) => {
                Formula::bool(matches!(self, Formula::True) == pos)
            }
            (Formula::Leq(_), true) | (Formula::Div(..), true) => self.clone(),
            (Formula::Leq(_), false) | (Formula::Div(..), false) => Formula::not(self.clone()),
            (Formula::Not(g), _) => g.nnf_signed(!pos),
            (Formula::And(gs), true) | (Formula::Or(gs), false) => {
                Formula::and(gs.iter().map(|g| g.nnf_signed(pos)))
            }
            (Formula::Or(gs), true) | (Formula::And(gs), false) => {
                Formula::or(gs.iter().map(|g| g.nnf_signed(pos)))
            }
            (Formula::Exists(v, g), true) | (Formula::Forall(v, g), false) => {
                Formula::exists(v.clone(), g.nnf_signed(pos))
            }
            (Formula::Forall(v, g), true) | (Formula::Exists(v, g), false) => {
                Formula::forall(v.clone(), g.nnf_signed(pos))
            }
        }
    }

    /// Number of nodes; used for size reporting and heuristics.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Leq(_) | Formula::Div(..) => 1,
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => 1 + g.size(),
            Formula::And(gs) | Formula::Or(gs) => 1 + gs.iter().map(Formula::size).sum::<usize>(),
        }
    }

    /// Visits every atom (`Leq`/`Div`) of the formula.
    pub fn atoms(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Formula>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Leq(_) | Formula::Div(..) => out.push(self),
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => g.collect_atoms(out),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.collect_atoms(out)),
        }
    }
}

/// Merges the `Leq` atoms of a conjunction (`conj`) or disjunction that share a
/// linear part into at most one lower and one upper bound.  Returns `None` when
/// the bounds alone make the connective absorbing (false for `and`, true for `or`).
fn merge_bounds(fs: Vec<Formula>, conj: bool) -> Option<Vec<Formula>> {
    // key -> (lower, upper) on the canonical linear part
    let mut bounds: BTreeMap<LinTerm, (Option<BigInt>, Option<BigInt>)> = BTreeMap::new();
    let mut first: BTreeMap<LinTerm, usize> = BTreeMap::new();
    let mut rest = Vec::with_capacity(fs.len());
    for f in fs {
        let Formula::Leq(t) = &f else {
            rest.push(Some(f));
            continue;
        };
        let lin = t.linear_part();
        let positive = lin.coeffs().values().next().is_some_and(|c| c.is_positive());
        // t = L + c <= 0 gives L <= -c; t = -L + c <= 0 gives L >= c
        let (key, lo, hi) = if positive {
            (lin, None, Some(-t.constant_part()))
        } else {
            (-lin, Some(t.constant_part().clone()), None)
        };
        first.entry(key.clone()).or_insert_with(|| {
            rest.push(None);
            rest.len() - 1
        });
        let e = bounds.entry(key).or_insert((None, None));
        let pick = |old: Option<BigInt>, new: Option<BigInt>, tighter_is_max: bool| match (old, new) {
            (None, x) | (x, None) => x,
            (Some(a), Some(b)) => Some(if (a > b) == tighter_is_max { a } else { b }),
        };
        // and: lower = max, upper = min.  or: lower = min, upper = max.
        e.0 = pick(e.0.take(), lo, conj);
        e.1 = pick(e.1.take(), hi, !conj);
    }
    let mut slots: BTreeMap<usize, Vec<Formula>> = BTreeMap::new();
    for (key, (lo, hi)) in bounds {
        if let (Some(l), Some(h)) = (&lo, &hi) {
            if conj && l > h {
                return None;
            }
            if !conj && *l <= h + 1 {
                return None;
            }
        }
        let mut atoms = Vec::new();
        if let Some(l) = lo {
            atoms.push(Formula::Leq(-key.clone() + LinTerm::constant(l)));
        }
        if let Some(h) = hi {
            atoms.push(Formula::Leq(key.clone() - LinTerm::constant(h)));
        }
        slots.insert(first[&key], atoms);
    }
    let mut out = Vec::new();
    for (i, f) in rest.into_iter().enumerate() {
        match f {
            Some(f) => out.push(f),
            None => out.extend(slots.remove(&i).unwrap_or_default()),
        }
    }
    Some(out)
}

pub(crate) fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

pub(crate) fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

fn fmt_leq(t: &LinTerm, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let lin = t.linear_part();
    let c = -t.constant_part();
    let leading_negative = lin.coeffs().values().next().is_some_and(|c| c.is_negative());
    if leading_negative {
        write!(f, "{} >= {}", -lin, -c)
    } else {
        write!(f, "{lin} <= {c}")
    }
}

impl Formula {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        // prec: 0 = top, 1 = quantifier body, 2 = connective operand, 3 = operand of !
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Leq(t) => {
                if prec >= 3 {
                    f.write_str("(")?;
                    fmt_leq(t, f)?;
                    f.write_str(")")
                } else {
                    fmt_leq(t, f)
                }
            }
            Formula::Div(n, t) => {
                if prec >= 3 {
                    write!(f, "({n} | {t})")
                } else {
                    write!(f, "{n} | {t}")
                }
            }
            Formula::Not(g) => {
                f.write_str("!")?;
                g.fmt_prec(f, 3)
            }
            Formula::And(gs) | Formula::Or(gs) => {
                let sep = if matches!(self, Formula::And(_)) {
                    " && "
                } else {
                    " || "
                };
                let paren = prec >= 2;
                if paren {
                    f.write_str("(")?;
                }
                let conj = matches!(self, Formula::And(_));
                let mut i = 0;
                while i < gs.len() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    // adjacent opposite bounds in a conjunction print as one equation
                    if let (true, Formula::Leq(t), Some(Formula::Leq(u))) = (conj, &gs[i], gs.get(i + 1)) {
                        if t.clone() + u.clone() == LinTerm::zero() {
                            let lin = t.linear_part();
                            let (lin, c) = if lin.coeffs().values().next().is_some_and(|c| c.is_negative()) {
                                (-lin, t.constant_part().clone())
                            } else {
                                (lin, -t.constant_part())
                            };
                            write!(f, "{lin} == {c}")?;
                            i += 2;
                            continue;
                        }
                    }
                    gs[i].fmt_prec(f, 2)?;
                    i += 1;
                }
                if paren {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                let q = if matches!(self, Formula::Exists(..)) {
                    "exists"
                } else {
                    "forall"
                };
                if prec > 0 {
                    f.write_str("(")?;
                }
                write!(f, "{q} {v}. ")?;
                g.fmt_prec(f, 0)?;
                if prec > 0 {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
