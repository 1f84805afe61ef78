// Shared generators and brute-force oracles for the integration tests and
// the acceptance runner.
#![allow(dead_code)]

use std::collections::BTreeMap;

use mortal_core::abstractions::TransitionFormula;
use mortal_core::lia::{Formula, LinTerm, Valuation, Var};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn vars(names: &[&str]) -> Vec<Var> {
    names.iter().map(|n| Var::new(n)).collect()
}

pub fn valuation(vars: &[Var], vals: &[i64]) -> Valuation {
    vars.iter().cloned().zip(vals.iter().map(|&v| BigInt::from(v))).collect()
}

pub fn rand_term(r: &mut impl Rng, vs: &[Var], coef: i64, konst: i64) -> LinTerm {
    let mut t = LinTerm::constant(r.gen_range(-konst..=konst));
    for v in vs {
        if r.gen_bool(0.6) {
            t.add_monomial(BigInt::from(r.gen_range(-coef..=coef)), v);
        }
    }
    t
}

pub fn rand_atom(r: &mut impl Rng, vs: &[Var], coef: i64) -> Formula {
    let t = rand_term(r, vs, coef, 5);
    match r.gen_range(0..10) {
        0..=5 => Formula::leq0(t),
        6 => Formula::eq0(t),
        _ => Formula::div(*[2, 3, 4].choose(r).unwrap(), t),
    }
}

/// Random quantifier-free formula with exactly `atoms` atoms.
pub fn rand_qf(r: &mut impl Rng, vs: &[Var], atoms: usize, coef: i64) -> Formula {
    if atoms <= 1 {
        let a = rand_atom(r, vs, coef);
        return if r.gen_bool(0.2) { Formula::not(a) } else { a };
    }
    let left = r.gen_range(1..atoms);
    let a = rand_qf(r, vs, left, coef);
    let b = rand_qf(r, vs, atoms - left, coef);
    let f = if r.gen_bool(0.5) {
        Formula::and(vec![a, b])
    } else {
        Formula::or(vec![a, b])
    };
    if r.gen_bool(0.15) {
        Formula::not(f)
    } else {
        f
    }
}

/// Random formula over `free` with `nq` nested quantifiers.  The innermost
/// quantifier always has a quantifier-free body.
pub fn rand_quantified(r: &mut impl Rng, free: &[Var], nq: usize) -> Formula {
    let bound: Vec<Var> = (0..nq).map(|i| Var::new(&format!("q{i}"))).collect();
    let mut all: Vec<Var> = free.to_vec();
    all.extend(bound.iter().cloned());
    let atoms = r.gen_range(1..=3);
    let mut f = rand_qf(r, &all, atoms, 3);
    for i in (0..nq).rev() {
        let q = bound[i].clone();
        f = if r.gen_bool(0.5) {
            Formula::Exists(q, Box::new(f))
        } else {
            Formula::Forall(q, Box::new(f))
        };
        if i > 0 && r.gen_bool(0.5) {
            let scope = &all[..free.len() + i];
            let side = rand_qf(r, scope, 1, 3);
            f = if r.gen_bool(0.5) {
                Formula::and(vec![side, f])
            } else {
                Formula::or(vec![side, f])
            };
        }
    }
    f
}

/// Formula compiled to dense `i128` arithmetic over variable slots.
#[derive(Clone, Debug)]
pub enum Fast {
    Const(bool),
    Leq(Vec<(usize, i128)>, i128),
    Div(i128, Vec<(usize, i128)>, i128),
    Not(Box<Fast>),
    And(Vec<Fast>),
    Or(Vec<Fast>),
    Ex(usize, Box<Fast>),
    All(usize, Box<Fast>),
}

fn to_i128(x: &BigInt) -> i128 {
    x.to_i128().expect("coefficient fits in i128")
}

struct Slots {
    map: BTreeMap<Var, usize>,
    next: usize,
}

impl Slots {
    fn lin(&mut self, t: &LinTerm) -> (Vec<(usize, i128)>, i128) {
        let cs = t
            .coeffs()
            .iter()
            .map(|(v, c)| {
                let i = match self.map.get(v) {
                    Some(&i) => i,
                    None => {
                        let i = self.next;
                        self.next += 1;
                        self.map.insert(v.clone(), i);
                        i
                    }
                };
                (i, to_i128(c))
            })
            .collect();
        (cs, to_i128(t.constant_part()))
    }

    fn compile(&mut self, f: &Formula) -> Fast {
        match f {
            Formula::True => Fast::Const(true),
            Formula::False => Fast::Const(false),
            Formula::Leq(t) => {
                let (cs, c) = self.lin(t);
                Fast::Leq(cs, c)
            }
            Formula::Div(n, t) => {
                let (cs, c) = self.lin(t);
                Fast::Div(to_i128(n), cs, c)
            }
            Formula::Not(g) => Fast::Not(Box::new(self.compile(g))),
            Formula::And(gs) => Fast::And(gs.iter().map(|g| self.compile(g)).collect()),
            Formula::Or(gs) => Fast::Or(gs.iter().map(|g| self.compile(g)).collect()),
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                // each binder gets a fresh slot, restoring any shadowed one
                let s = self.next;
                self.next += 1;
                let saved = self.map.insert(v.clone(), s);
                let body = self.compile(g);
                match saved {
                    Some(old) => self.map.insert(v.clone(), old),
                    None => self.map.remove(v),
                };
                if matches!(f, Formula::Exists(..)) {
                    Fast::Ex(s, Box::new(body))
                } else {
                    Fast::All(s, Box::new(body))
                }
            }
        }
    }
}

impl Fast {
    /// Compiles `f`; `free[i]` gets slot `i`.
    pub fn compile(f: &Formula, free: &[Var]) -> Fast {
        let mut slots = Slots {
            map: free.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect(),
            next: free.len(),
        };
        slots.compile(f)
    }

    pub fn num_slots(&self) -> usize {
        fn walk(f: &Fast, m: &mut usize) {
            let mut see = |cs: &[(usize, i128)]| {
                for (i, _) in cs {
                    *m = (*m).max(i + 1);
                }
            };
            match f {
                Fast::Const(_) => {}
                Fast::Leq(cs, _) | Fast::Div(_, cs, _) => see(cs),
                Fast::Not(g) => walk(g, m),
                Fast::And(gs) | Fast::Or(gs) => gs.iter().for_each(|g| walk(g, m)),
                Fast::Ex(s, g) | Fast::All(s, g) => {
                    *m = (*m).max(s + 1);
                    walk(g, m)
                }
            }
        }
        let mut m = 0;
        walk(self, &mut m);
        m
    }

    fn is_qf(&self) -> bool {
        match self {
            Fast::Const(_) | Fast::Leq(..) | Fast::Div(..) => true,
            Fast::Not(g) => g.is_qf(),
            Fast::And(gs) | Fast::Or(gs) => gs.iter().all(Fast::is_qf),
            Fast::Ex(..) | Fast::All(..) => false,
        }
    }

    fn lin(cs: &[(usize, i128)], c: i128, env: &[i128]) -> i128 {
        cs.iter().fold(c, |acc, (i, k)| acc + k * env[*i])
    }

    /// Exact evaluation of a quantifier-free formula.
    pub fn eval(&self, env: &[i128]) -> bool {
        match self {
            Fast::Const(b) => *b,
            Fast::Leq(cs, c) => Fast::lin(cs, *c, env) <= 0,
            Fast::Div(n, cs, c) => Fast::lin(cs, *c, env).mod_floor(n) == 0,
            Fast::Not(g) => !g.eval(env),
            Fast::And(gs) => gs.iter().all(|g| g.eval(env)),
            Fast::Or(gs) => gs.iter().any(|g| g.eval(env)),
            Fast::Ex(..) | Fast::All(..) => panic!("eval on quantified formula"),
        }
    }

    /// A range of `x` values that decides every quantifier-free `body` in `x`
    /// at `env`: beyond `R` every inequality has a fixed sign and the
    /// divisibility atoms repeat with period `L`.
    fn exact_range(body: &Fast, x: usize, env: &[i128]) -> i128 {
        fn walk(f: &Fast, x: usize, env: &[i128], r: &mut i128, l: &mut i128) {
            match f {
                Fast::Leq(cs, c) | Fast::Div(_, cs, c) => {
                    if cs.iter().any(|(i, k)| *i == x && *k != 0) {
                        let rest: i128 = cs.iter().filter(|(i, _)| *i != x).fold(*c, |a, (i, k)| a + k * env[*i]);
                        *r = (*r).max(rest.abs() + 1);
                        if let Fast::Div(n, ..) = f {
                            *l = l.lcm(n);
                        }
                    }
                }
                Fast::Not(g) => walk(g, x, env, r, l),
                Fast::And(gs) | Fast::Or(gs) => gs.iter().for_each(|g| walk(g, x, env, r, l)),
                _ => {}
            }
        }
        let (mut r, mut l) = (1, 1);
        walk(body, x, env, &mut r, &mut l);
        r + l
    }

    /// Three-valued brute-force truth: `Some(b)` when conclusive.  Innermost
    /// quantifiers are decided exactly; outer ones scan `[-outer, outer]` and
    /// only conclude from a witness (or counterexample).
    pub fn brute(&self, env: &mut Vec<i128>, outer: i128) -> Option<bool> {
        match self {
            Fast::Const(_) | Fast::Leq(..) | Fast::Div(..) => Some(self.eval(env)),
            Fast::Not(g) => g.brute(env, outer).map(|b| !b),
            Fast::And(gs) => {
                let mut unknown = false;
                for g in gs {
                    match g.brute(env, outer) {
                        Some(false) => return Some(false),
                        None => unknown = true,
                        Some(true) => {}
                    }
                }
                if unknown {
                    None
                } else {
                    Some(true)
                }
            }
            Fast::Or(gs) => {
                let mut unknown = false;
                for g in gs {
                    match g.brute(env, outer) {
                        Some(true) => return Some(true),
                        None => unknown = true,
                        Some(false) => {}
                    }
                }
                if unknown {
                    None
                } else {
                    Some(false)
                }
            }
            Fast::Ex(x, g) | Fast::All(x, g) => {
                let want = matches!(self, Fast::Ex(..));
                let exact = g.is_qf();
                let range = if exact { Fast::exact_range(g, *x, env) } else { outer };
                let mut unknown = false;
                let mut found = false;
                for v in -range..=range {
                    env[*x] = v;
                    match g.brute(env, outer) {
                        Some(b) if b == want => {
                            found = true;
                            break;
                        }
                        None => unknown = true,
                        Some(_) => {}
                    }
                }
                env[*x] = 0;
                if found {
                    Some(want)
                } else if exact && !unknown {
                    Some(!want)
                } else {
                    None
                }
            }
        }
    }
}

/// Calls `f` on every point of `[-r, r]^n`.
pub fn for_grid(n: usize, r: i64, mut f: impl FnMut(&[i64])) {
    let mut p = vec![-r; n];
    loop {
        f(&p);
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            if p[i] < r {
                p[i] += 1;
                break;
            }
            p[i] = -r;
            i += 1;
        }
    }
}

/// Random small transition formula: a guard over `X` and an update that is
/// affine, havocked, or split by a random condition.
pub fn rand_tf(r: &mut impl Rng, n: usize) -> TransitionFormula {
    let names = ["x", "y", "z"];
    let vs: Vec<Var> = names[..n].iter().map(|s| Var::new(s)).collect();
    let atoms = r.gen_range(1..=2);
    let guard = rand_qf(r, &vs, atoms, 2);
    let update = |r: &mut ChaCha8Rng| -> Vec<Formula> {
        vs.iter()
            .map(|v| {
                let post = LinTerm::var(&v.primed());
                match r.gen_range(0..10) {
                    0 => Formula::True,
                    1..=2 => Formula::eq(post, LinTerm::var(v)),
                    _ => {
                        let mut t = LinTerm::constant(r.gen_range(-2..=2));
                        for w in &vs {
                            let c: i64 = if w == v { r.gen_range(-1..=2) } else { r.gen_range(-1..=1) };
                            t.add_monomial(BigInt::from(c), w);
                        }
                        Formula::eq(post, t)
                    }
                }
            })
            .collect()
    };
    let mut r2 = ChaCha8Rng::seed_from_u64(r.gen());
    let first = Formula::and(update(&mut r2));
    let body = if r.gen_bool(0.3) {
        let cond = rand_atom(r, &vs, 2);
        let second = Formula::and(update(&mut r2));
        Formula::or(vec![
            Formula::and(vec![cond.clone(), first]),
            Formula::and(vec![Formula::not(cond), second]),
        ])
    } else {
        first
    };
    TransitionFormula::new(vs, Formula::and(vec![guard, body]))
}

/// Runs `steps` concrete steps from `state`, picking successors with model
/// queries.  Returns `true` if the run did not get stuck.
pub fn survives(tf: &TransitionFormula, state: &[BigInt], steps: usize) -> bool {
    let mut s = state.to_vec();
    for _ in 0..steps {
        match tf.successor(&s) {
            Some(next) => s = next,
            None => return false,
        }
    }
    true
}

/// Grid comparison of `qe_cooper(f)` against the brute-force oracle over
/// `[-r, r]^free`.  Returns (conclusive points, mismatches).
pub fn qe_grid_check(f: &Formula, free: &[Var], r: i64, outer: i128) -> (usize, usize) {
    let qf = mortal_core::lia::qe_cooper(f);
    assert!(qf.is_quantifier_free());
    let slow = Fast::compile(f, free);
    let fast = Fast::compile(&qf, free);
    let width = slow.num_slots().max(fast.num_slots()).max(free.len());
    let mut env = vec![0i128; width];
    let (mut conclusive, mut bad) = (0, 0);
    for_grid(free.len(), r, |p| {
        for (i, &v) in p.iter().enumerate() {
            env[i] = v as i128;
        }
        if let Some(truth) = slow.brute(&mut env, outer) {
            conclusive += 1;
            if fast.eval(&env) != truth {
                bad += 1;
            }
        }
    });
    (conclusive, bad)
}

/// One Theorem-1 oracle instance: a random upper-triangular integer matrix,
/// a random guard and a random state.  Compares the guard along the orbit
/// with the characteristic sequence for `k` in `(k0, k0 + 3P]`.
pub fn chi_oracle_instance(seed: u64, k0: u64) -> Result<(), String> {
    use mortal_core::asymptotics::chi_formula;
    use mortal_core::qlinalg::QMatrix;
    let mut r = rng(seed);
    let n = r.gen_range(1..=4);
    let a: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| if j < i { 0 } else { r.gen_range(-3..=3) }).collect())
        .collect();
    let vs: Vec<Var> = (0..n).map(|i| Var::new(&format!("x{i}"))).collect();
    let atoms = r.gen_range(1..=3);
    let g = rand_qf(&mut r, &vs, atoms, 3);
    let x0: Vec<i64> = (0..n).map(|_| r.gen_range(-5..=5)).collect();
    let refs: Vec<&[i64]> = a.iter().map(|row| row.as_slice()).collect();
    let chi = chi_formula(&g, &QMatrix::from_ints(&refs), &vs).map_err(|e| e.to_string())?;
    let p = chi.period() as u64;
    let start = valuation(&vs, &x0);
    let mut x: Vec<BigInt> = x0.iter().map(|&v| BigInt::from(v)).collect();
    for k in 0..=k0 + 3 * p {
        if k > k0 {
            let at: Valuation = vs.iter().cloned().zip(x.iter().cloned()).collect();
            let lhs = g.eval(&at).unwrap();
            let rhs = chi.at(k).eval(&start).unwrap();
            if lhs != rhs {
                return Err(format!("seed {seed}: A={a:?} G={g} x0={x0:?} k={k}: orbit {lhs}, chi {rhs} ({chi})"));
            }
        }
        x = a
            .iter()
            .map(|row| row.iter().zip(&x).map(|(&c, v)| BigInt::from(c) * v).sum())
            .collect();
    }
    Ok(())
}

/// Soundness instance: states of a random formula that survive `steps`
/// concrete steps must falsify `mp`.  Returns the number of survivors.
pub fn soundness_instance(seed: u64, states: usize, steps: usize) -> Result<usize, String> {
    let mut r = rng(seed);
    let n = r.gen_range(1..=2);
    let tf = rand_tf(&mut r, n);
    let report = mortal_core::mortal::mp(&tf).map_err(|e| format!("seed {seed}: {e}"))?;
    let mut survivors = 0;
    for _ in 0..states {
        let s: Vec<BigInt> = (0..n).map(|_| BigInt::from(r.gen_range(-5..=5))).collect();
        if survives(&tf, &s, steps) {
            survivors += 1;
            if mortal_core::mortal::is_mortal_state(&report, &s).unwrap() {
                return Err(format!("seed {seed}: {s:?} survives {steps} steps of {} but satisfies mp = {}", tf.body, report.mp));
            }
        }
    }
    Ok(survivors)
}

/// Monotonicity instance: strengthening a formula weakens nothing, so
/// `mp(F2) |= mp(F2 && c)`.
pub fn monotonicity_instance(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let n = r.gen_range(1..=2);
    let f2 = rand_tf(&mut r, n);
    let stacked = f2.stacked_vars();
    let c = Formula::leq0(rand_term(&mut r, &stacked, 2, 3));
    let f1 = TransitionFormula::new(f2.vars.clone(), Formula::and(vec![f2.body.clone(), c]));
    let m2 = mortal_core::mortal::mp(&f2).map_err(|e| format!("seed {seed}: {e}"))?;
    let m1 = mortal_core::mortal::mp(&f1).map_err(|e| format!("seed {seed}: {e}"))?;
    if mortal_core::lia::entails(&m2.mp, &m1.mp) {
        Ok(())
    } else {
        Err(format!("seed {seed}: mp({}) = {} does not entail mp({}) = {}", f2.body, m2.mp, f1.body, m1.mp))
    }
}
