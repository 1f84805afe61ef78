use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::cube::{Cube, Lit};
use super::formula::Formula;
use super::term::{LinTerm, Valuation, Var};

/// Calls `visit` on each cube of the DNF of an NNF formula, pruning
/// conflicting partial cubes. Stops early when `visit` returns `true`.
pub(crate) fn for_each_cube(f: &Formula, visit: &mut dyn FnMut(&Cube) -> bool) -> bool {
    walk(vec![f], Cube::top(), visit)
}

fn walk(mut todo: Vec<&Formula>, mut cube: Cube, visit: &mut dyn FnMut(&Cube) -> bool) -> bool {
    while let Some(g) = todo.pop() {
        match g {
            Formula::True => {}
            Formula::False => return false,
            Formula::And(gs) => todo.extend(gs.iter()),
            Formula::Or(gs) => {
                for h in gs {
                    let mut t = todo.clone();
                    t.push(h);
                    if walk(t, cube.clone(), visit) {
                        return true;
                    }
                }
                return false;
            }
            Formula::Exists(..) | Formula::Forall(..) => {
                panic!("quantifier inside a DNF walk")
            }
            lit => {
                if !cube.add_formula_literal(lit) {
                    return false;
                }
            }
        }
    }
    visit(&cube)
}

/// Projects `x` out of a cube: the result is a disjunction of cubes
/// equivalent to `exists x. cube`.
pub(crate) fn project(cube: &Cube, x: &Var) -> Vec<Cube> {
    let lits = cube.literals();
    let (with, without): (Vec<Lit>, Vec<Lit>) =
        lits.into_iter().partition(|l| l.term().mentions(x));
    if with.is_empty() {
        return vec![cube.clone()];
    }
    let Some(base) = Cube::from_lits(without) else {
        return Vec::new();
    };

    if let Some(eq) = cube.equality_on(x) {
        // a*x + r = 0: scale every literal by |a| and replace a*x by -r.
        let a = eq.coeff(x);
        let r = eq.without(x);
        let abs = a.abs();
        let sign = BigInt::from(if a.is_negative() { -1 } else { 1 });
        let mut out = base;
        let subst = |t: &LinTerm| -> LinTerm {
            let b = t.coeff(x);
            t.without(x).scale(&abs) - r.scale(&(&sign * &b))
        };
        let mut ok = out.add_div(&abs, r.clone());
        for l in &with {
            if !ok {
                break;
            }
            ok = match l {
                Lit::Leq(t) => out.add_leq(subst(t)),
                Lit::Div(n, t) => out.add_div(&(n * &abs), subst(t)),
                Lit::NDiv(n, t) => out.add_ndiv(&(n * &abs), subst(t)),
            };
        }
        return if ok { vec![out] } else { Vec::new() };
    }

    // Normalize the coefficient of x to +-delta, then rename delta*x to x.
    let delta = with
        .iter()
        .fold(BigInt::one(), |acc, l| acc.lcm(&l.term().coeff(x)));
    let mut lowers = Vec::new();
    let mut uppers = Vec::new();
    // (modulus, sign of x, rest, positive?)
    let mut congr: Vec<(BigInt, BigInt, LinTerm, bool)> = Vec::new();
    for l in &with {
        let t = l.term();
        let b = t.coeff(x);
        let m = &delta / b.abs();
        let rest = t.without(x).scale(&m);
        let sign = b.signum();
        match l {
            Lit::Leq(_) => {
                if sign.is_positive() {
                    uppers.push(-rest);
                } else {
                    lowers.push(rest);
                }
            }
            Lit::Div(n, _) => congr.push((n * &m, sign, rest, true)),
            Lit::NDiv(n, _) => congr.push((n * &m, sign, rest, false)),
        }
    }
    if !delta.is_one() {
        congr.push((delta.clone(), BigInt::one(), LinTerm::zero(), true));
    }
    let period = congr
        .iter()
        .fold(BigInt::one(), |acc, (n, ..)| acc.lcm(n));

    let instantiate = |xv: &LinTerm, bounds: bool| -> Option<Cube> {
        let mut c = base.clone();
        if bounds {
            for l in &lowers {
                if !c.add_leq(l.clone() - xv.clone()) {
                    return None;
                }
            }
            for u in &uppers {
                if !c.add_leq(xv.clone() - u.clone()) {
                    return None;
                }
            }
        }
        for (n, s, rest, pos) in &congr {
            let t = xv.scale(s) + rest.clone();
            let ok = if *pos { c.add_div(n, t) } else { c.add_ndiv(n, t) };
            if !ok {
                return None;
            }
        }
        Some(c)
    };

    if (lowers.is_empty() || uppers.is_empty()) && congr.len() <= 1 {
        // A single congruence on a unit-coefficient x always has a solution.
        return vec![base];
    }
    let mut out = BTreeSet::new();
    let mut j = BigInt::zero();
    while j < period {
        if lowers.is_empty() || uppers.is_empty() {
            out.extend(instantiate(&LinTerm::constant(j.clone()), false));
        } else if lowers.len() <= uppers.len() {
            for l in &lowers {
                out.extend(instantiate(&(l.clone() + LinTerm::constant(j.clone())), true));
            }
        } else {
            for u in &uppers {
                out.extend(instantiate(&(u.clone() - LinTerm::constant(j.clone())), true));
            }
        }
        j += 1;
    }
    prune(out.into_iter().collect())
}

fn complement(l: &Lit) -> Lit {
    match l {
        Lit::Leq(t) => Lit::Leq(LinTerm::constant(1) - t.clone()),
        Lit::Div(n, t) => Lit::NDiv(n.clone(), t.clone()),
        Lit::NDiv(n, t) => Lit::Div(n.clone(), t.clone()),
    }
}

/// Replaces pairs `A && l`, `A && !l` by `A` until none remain.
fn merge_complementary(cs: Vec<Cube>) -> Vec<Cube> {
    let mut sets: Vec<BTreeSet<Lit>> = cs
        .iter()
        .map(|c| c.literals().into_iter().collect())
        .collect();
    'again: loop {
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                if sets[i].len() != sets[j].len() {
                    continue;
                }
                let mut di = sets[i].difference(&sets[j]);
                let mut dj = sets[j].difference(&sets[i]);
                if let (Some(a), None, Some(b), None) = (di.next(), di.next(), dj.next(), dj.next()) {
                    if &complement(a) == b {
                        let a = a.clone();
                        sets[i].remove(&a);
                        sets.swap_remove(j);
                        continue 'again;
                    }
                }
            }
        }
        break;
    }
    sets.into_iter()
        .filter_map(Cube::from_lits)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Drops cubes that syntactically entail another cube of the disjunction.
fn prune(cs: Vec<Cube>) -> Vec<Cube> {
    if cs.iter().any(Cube::is_top) {
        return vec![Cube::top()];
    }
    let cs = merge_complementary(cs);
    if cs.iter().any(Cube::is_top) {
        return vec![Cube::top()];
    }
    let mut keep: Vec<Cube> = Vec::new();
    'outer: for (i, c) in cs.iter().enumerate() {
        for (j, d) in cs.iter().enumerate() {
            if i != j && c.entails_syntactically(d) && (!d.entails_syntactically(c) || j < i) {
                continue 'outer;
            }
        }
        keep.push(c.clone());
    }
    keep
}

/// Rough branching cost of projecting `x` out of `cube`.
fn projection_cost(cube: &Cube, x: &Var) -> BigInt {
    if cube.equality_on(x).is_some() {
        return BigInt::zero();
    }
    let mut lo = 0u32;
    let mut hi = 0u32;
    let mut period = BigInt::one();
    let mut delta = BigInt::one();
    for l in cube.literals() {
        let a = l.term().coeff(x);
        if a.is_zero() {
            continue;
        }
        delta = delta.lcm(&a);
        match l {
            Lit::Leq(_) => {
                if a.is_positive() {
                    hi += 1
                } else {
                    lo += 1
                }
            }
            Lit::Div(n, _) | Lit::NDiv(n, _) => period = period.lcm(&n),
        }
    }
    let bounds = if lo == 0 || hi == 0 { 1 } else { lo.min(hi) };
    period.lcm(&delta) * BigInt::from(bounds)
}

fn cheapest_var(cube: &Cube, vars: &BTreeSet<Var>) -> Option<Var> {
    vars.iter()
        .min_by_key(|v| projection_cost(cube, v))
        .cloned()
}

fn model_cube(cube: &Cube) -> Option<Valuation> {
    let vars = cube.vars();
    let Some(x) = cheapest_var(cube, &vars) else {
        return Some(Valuation::new());
    };
    for branch in project(cube, &x) {
        if let Some(mut m) = model_cube(&branch) {
            // Variables dropped by the projection are unconstrained.
            for v in &vars {
                if v != &x && !m.contains_key(v) {
                    m.insert(v.clone(), BigInt::zero());
                }
            }
            let xv = cube
                .solve_for(&x, &m)
                .expect("projection soundness: branch model extends");
            m.insert(x, xv);
            return Some(m);
        }
    }
    None
}

/// Eliminates `x` from a quantifier-free formula.
fn eliminate(x: &Var, f: &Formula) -> Formula {
    if !f.has_free(x) {
        return f.clone();
    }
    match f {
        Formula::Or(gs) => Formula::or(gs.iter().map(|g| eliminate(x, g))),
        Formula::And(gs) => {
            let (with, without): (Vec<Formula>, Vec<Formula>) =
                gs.iter().cloned().partition(|g| g.has_free(x));
            let inner = if with.len() == 1 {
                eliminate_dnf(x, &with[0])
            } else {
                eliminate_dnf(x, &Formula::and(with))
            };
            Formula::and(without.into_iter().chain(std::iter::once(inner)))
        }
        _ => eliminate_dnf(x, f),
    }
}

fn eliminate_dnf(x: &Var, f: &Formula) -> Formula {
    if let Formula::Or(gs) = f {
        return Formula::or(gs.iter().map(|g| eliminate(x, g)));
    }
    let mut out = Vec::new();
    for_each_cube(f, &mut |c| {
        out.extend(project(c, x));
        false
    });
    let out = prune(out.into_iter().collect::<BTreeSet<_>>().into_iter().collect());
    Formula::or(out.iter().map(Cube::to_formula))
}

/// Cooper quantifier elimination. The result is quantifier-free and
/// equivalent over the integers.
pub fn qe_cooper(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Leq(_) | Formula::Div(..) => f.clone(),
        Formula::Not(g) => Formula::not(qe_cooper(g)),
        Formula::And(gs) => Formula::and(gs.iter().map(qe_cooper)),
        Formula::Or(gs) => Formula::or(gs.iter().map(qe_cooper)),
        Formula::Exists(x, g) => eliminate(x, &qe_cooper(g).nnf()),
        Formula::Forall(x, g) => {
            let inner = Formula::not(qe_cooper(g)).nnf();
            Formula::not(eliminate(x, &inner)).nnf()
        }
    }
}

/// A satisfying valuation for every free variable of `f`, if one exists.
pub fn model(f: &Formula) -> Option<Valuation> {
    let free = f.free_vars();
    let g = if f.is_quantifier_free() {
        f.nnf()
    } else {
        qe_cooper(f).nnf()
    };
    let mut found = None;
    for_each_cube(&g, &mut |c| {
        found = model_cube(c);
        found.is_some()
    });
    let mut m = found?;
    for v in free {
        m.entry(v).or_insert_with(BigInt::zero);
    }
    Some(m)
}

pub fn is_sat(f: &Formula) -> bool {
    model(f).is_some()
}

/// `f |= g`.
pub fn entails(f: &Formula, g: &Formula) -> bool {
    !is_sat(&Formula::and(vec![f.clone(), Formula::not(g.clone())]))
}

pub fn is_valid(f: &Formula) -> bool {
    !is_sat(&Formula::not(f.clone()))
}

pub fn equivalent(f: &Formula, g: &Formula) -> bool {
    entails(f, g) && entails(g, f)
}

/// Substitutes a valuation into a formula, leaving other variables free.
pub fn partial_eval(f: &Formula, val: &Valuation) -> Formula {
    let sigma: BTreeMap<Var, LinTerm> = val
        .iter()
        .map(|(v, x)| (v.clone(), LinTerm::constant(x.clone())))
        .collect();
    f.substitute(&sigma)
}
