use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::formula::{ceil_div, floor_div, Formula};
use super::term::{LinTerm, Var};

/// Literal of a cube.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Lit {
    Leq(LinTerm),
    Div(BigInt, LinTerm),
    NDiv(BigInt, LinTerm),
}

impl Lit {
    pub(crate) fn term(&self) -> &LinTerm {
        match self {
            Lit::Leq(t) | Lit::Div(_, t) | Lit::NDiv(_, t) => t,
        }
    }
}

/// Satisfiable-looking conjunction of literals. Inequalities are kept as
/// intervals over a canonical linear part, so opposite bounds meet in one
/// entry and trivial conflicts are caught on insertion.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Cube {
    /// canonical linear part -> (lower, upper)
    bounds: BTreeMap<LinTerm, (Option<BigInt>, Option<BigInt>)>,
    divs: BTreeSet<(BigInt, LinTerm)>,
    ndivs: BTreeSet<(BigInt, LinTerm)>,
}

impl Cube {
    pub(crate) fn top() -> Cube {
        Cube::default()
    }

    /// Adds `t <= 0`. Returns `false` on conflict.
    pub(crate) fn add_leq(&mut self, t: LinTerm) -> bool {
        match Formula::leq0(t) {
            Formula::True => true,
            Formula::False => false,
            Formula::Leq(t) => {
                let lin = t.linear_part();
                let c = t.constant_part().clone();
                let flip = lin.coeffs().values().next().is_some_and(|c| c.is_negative());
                let (key, lo, hi) = if flip {
                    // -L + c <= 0  <=>  L >= c
                    (-lin, Some(c), None)
                } else {
                    // L + c <= 0  <=>  L <= -c
                    (lin, None, Some(-c))
                };
                let e = self.bounds.entry(key).or_insert((None, None));
                if let Some(l) = lo {
                    if e.0.as_ref().is_none_or(|cur| &l > cur) {
                        e.0 = Some(l);
                    }
                }
                if let Some(h) = hi {
                    if e.1.as_ref().is_none_or(|cur| &h < cur) {
                        e.1 = Some(h);
                    }
                }
                match (&e.0, &e.1) {
                    (Some(l), Some(h)) => l <= h,
                    _ => true,
                }
            }
            _ => unreachable!(),
        }
    }

    pub(crate) fn add_div(&mut self, n: &BigInt, t: LinTerm) -> bool {
        match Formula::div(n.clone(), t) {
            Formula::True => true,
            Formula::False => false,
            Formula::Div(n, t) => {
                let clash = self.divs.iter().any(|(m, u)| {
                    m == &n
                        && u.linear_part() == t.linear_part()
                        && u.constant_part() != t.constant_part()
                });
                let key = (n, t);
                if clash || self.ndivs.contains(&key) {
                    return false;
                }
                self.divs.insert(key);
                true
            }
            _ => unreachable!(),
        }
    }

    pub(crate) fn add_ndiv(&mut self, n: &BigInt, t: LinTerm) -> bool {
        match Formula::div(n.clone(), t) {
            Formula::True => false,
            Formula::False => true,
            Formula::Div(n, t) => {
                let key = (n, t);
                if self.divs.contains(&key) {
                    return false;
                }
                self.ndivs.insert(key);
                true
            }
            _ => unreachable!(),
        }
    }

    pub(crate) fn add_lit(&mut self, l: Lit) -> bool {
        match l {
            Lit::Leq(t) => self.add_leq(t),
            Lit::Div(n, t) => self.add_div(&n, t),
            Lit::NDiv(n, t) => self.add_ndiv(&n, t),
        }
    }

    /// Adds an NNF literal (`Leq`, `Div`, or `Not(Div)`).
    pub(crate) fn add_formula_literal(&mut self, f: &Formula) -> bool {
        match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Leq(t) => self.add_leq(t.clone()),
            Formula::Div(n, t) => self.add_div(n, t.clone()),
            Formula::Not(g) => match &**g {
                Formula::Div(n, t) => self.add_ndiv(n, t.clone()),
                Formula::Leq(t) => self.add_leq(LinTerm::constant(1) - t.clone()),
                other => panic!("not a literal: !{other}"),
            },
            other => panic!("not a literal: {other}"),
        }
    }

    pub(crate) fn literals(&self) -> Vec<Lit> {
        let mut out = Vec::new();
        for (l, (lo, hi)) in &self.bounds {
            if let Some(lo) = lo {
                out.push(Lit::Leq(l.clone().with_constant(-lo.clone()) * &BigInt::from(-1)));
            }
            if let Some(hi) = hi {
                out.push(Lit::Leq(l.clone().with_constant(-hi.clone())));
            }
        }
        for (n, t) in &self.divs {
            out.push(Lit::Div(n.clone(), t.clone()));
        }
        for (n, t) in &self.ndivs {
            out.push(Lit::NDiv(n.clone(), t.clone()));
        }
        out
    }

    pub(crate) fn from_lits(lits: impl IntoIterator<Item = Lit>) -> Option<Cube> {
        let mut c = Cube::top();
        for l in lits {
            if !c.add_lit(l) {
                return None;
            }
        }
        Some(c)
    }

    pub(crate) fn to_formula(&self) -> Formula {
        let mut parts = Vec::new();
        for (l, (lo, hi)) in &self.bounds {
            match (lo, hi) {
                (Some(a), Some(b)) if a == b => {
                    parts.push(Formula::eq(l.clone(), LinTerm::constant(a.clone())))
                }
                _ => {
                    if let Some(a) = lo {
                        parts.push(Formula::geq(l.clone(), LinTerm::constant(a.clone())));
                    }
                    if let Some(b) = hi {
                        parts.push(Formula::leq(l.clone(), LinTerm::constant(b.clone())));
                    }
                }
            }
        }
        for (n, t) in &self.divs {
            parts.push(Formula::div(n.clone(), t.clone()));
        }
        for (n, t) in &self.ndivs {
            parts.push(Formula::not(Formula::div(n.clone(), t.clone())));
        }
        Formula::and(parts)
    }

    pub(crate) fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for l in self.bounds.keys() {
            l.free_vars_into(&mut out);
        }
        for (_, t) in self.divs.iter().chain(&self.ndivs) {
            t.free_vars_into(&mut out);
        }
        out
    }

    pub(crate) fn is_top(&self) -> bool {
        self.bounds.is_empty() && self.divs.is_empty() && self.ndivs.is_empty()
    }

    /// An equality `t = 0` whose term mentions `x`, with the smallest |coefficient| of `x`.
    pub(crate) fn equality_on(&self, x: &Var) -> Option<LinTerm> {
        self.bounds
            .iter()
            .filter(|(l, (lo, hi))| l.mentions(x) && lo.is_some() && lo == hi)
            .min_by_key(|(l, _)| l.coeff(x).abs())
            .map(|(l, (lo, _))| l.clone().with_constant(-lo.clone().unwrap()))
    }

    /// `true` if every literal of `other` is implied syntactically by `self`.
    pub(crate) fn entails_syntactically(&self, other: &Cube) -> bool {
        other.bounds.iter().all(|(l, (lo, hi))| {
            let Some((slo, shi)) = self.bounds.get(l) else {
                return false;
            };
            let lo_ok = match (lo, slo) {
                (None, _) => true,
                (Some(a), Some(b)) => b >= a,
                (Some(_), None) => false,
            };
            let hi_ok = match (hi, shi) {
                (None, _) => true,
                (Some(a), Some(b)) => b <= a,
                (Some(_), None) => false,
            };
            lo_ok && hi_ok
        }) && other.divs.is_subset(&self.divs)
            && other.ndivs.is_subset(&self.ndivs)
    }

    /// Every integer `x` satisfying the literals that mention `x`, once the
    /// other variables are fixed, lies in the returned interval and residue
    /// constraints. Returns the least/greatest-first satisfying value, if any.
    pub(crate) fn solve_for(
        &self,
        x: &Var,
        val: &super::term::Valuation,
    ) -> Option<BigInt> {
        let mut lo: Option<BigInt> = None;
        let mut hi: Option<BigInt> = None;
        let mut congr: Vec<(BigInt, BigInt, BigInt, bool)> = Vec::new();
        let mut period = BigInt::one();
        for lit in self.literals() {
            let t = lit.term();
            let a = t.coeff(x);
            let rest = t.without(x).partial_eval(val);
            debug_assert!(rest.is_constant());
            let r = rest.constant_part().clone();
            match &lit {
                Lit::Leq(_) => {
                    if a.is_zero() {
                        if r.is_positive() {
                            return None;
                        }
                    } else if a.is_positive() {
                        let b = floor_div(&-r, &a);
                        if hi.as_ref().is_none_or(|h| &b < h) {
                            hi = Some(b);
                        }
                    } else {
                        let b = ceil_div(&r, &-a);
                        if lo.as_ref().is_none_or(|l| &b > l) {
                            lo = Some(b);
                        }
                    }
                }
                Lit::Div(n, _) | Lit::NDiv(n, _) => {
                    let pos = matches!(lit, Lit::Div(..));
                    if a.is_zero() {
                        if (r.clone() % n).is_zero() != pos {
                            return None;
                        }
                    } else {
                        period = num_integer::lcm(period, n.clone());
                        congr.push((n.clone(), a, r, pos));
                    }
                }
            }
        }
        if let (Some(l), Some(h)) = (&lo, &hi) {
            if l > h {
                return None;
            }
        }
        let start = match (&lo, &hi) {
            (Some(l), _) => l.clone(),
            (None, Some(h)) => h - &period + BigInt::one(),
            (None, None) => BigInt::zero(),
        };
        let mut cand = start;
        let mut steps = BigInt::zero();
        while steps < period {
            if hi.as_ref().is_some_and(|h| &cand > h) {
                return None;
            }
            let ok = congr
                .iter()
                .all(|(n, a, r, pos)| ((a * &cand + r) % n).is_zero() == *pos);
            if ok {
                return Some(cand);
            }
            cand += 1;
            steps += 1;
        }
        None
    }
}
