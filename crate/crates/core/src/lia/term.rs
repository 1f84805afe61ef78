use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Variable identifier. Cheap to clone.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Arc<str>);

static FRESH: AtomicUsize = AtomicUsize::new(0);

impl Var {
    pub fn new(name: &str) -> Var {
        Var(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// `x` -> `x'`.
    pub fn primed(&self) -> Var {
        Var(Arc::from(format!("{}'", self.0)))
    }

    pub fn is_primed(&self) -> bool {
        self.0.ends_with('\'')
    }

    /// A variable that no parsed program can mention: `base#n`.
    pub fn fresh(base: &str) -> Var {
        let n = FRESH.fetch_add(1, Ordering::Relaxed);
        let stem = base.split('#').next().unwrap_or(base).trim_end_matches('\'');
        Var(Arc::from(format!("{stem}#{n}")))
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Var {
        Var::new(s)
    }
}

pub type Valuation = BTreeMap<Var, BigInt>;

/// `sum coeffs[v] * v + constant`; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LinTerm {
    coeffs: BTreeMap<Var, BigInt>,
    constant: BigInt,
}

impl LinTerm {
    pub fn zero() -> LinTerm {
        LinTerm::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> LinTerm {
        LinTerm {
            coeffs: BTreeMap::new(),
            constant: c.into(),
        }
    }

    pub fn var(v: &Var) -> LinTerm {
        LinTerm::monomial(BigInt::one(), v)
    }

    pub fn monomial(c: impl Into<BigInt>, v: &Var) -> LinTerm {
        let c = c.into();
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(v.clone(), c);
        }
        LinTerm {
            coeffs,
            constant: BigInt::zero(),
        }
    }

    /// `sum c_i v_i` over paired slices.
    pub fn linear(coeffs: &[BigInt], vars: &[Var]) -> LinTerm {
        let mut t = LinTerm::zero();
        for (c, v) in coeffs.iter().zip(vars) {
            t.add_monomial(c.clone(), v);
        }
        t
    }

    pub fn coeffs(&self) -> &BTreeMap<Var, BigInt> {
        &self.coeffs
    }

    pub fn constant_part(&self) -> &BigInt {
        &self.constant
    }

    pub fn coeff(&self, v: &Var) -> BigInt {
        self.coeffs.get(v).cloned().unwrap_or_default()
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.coeffs.contains_key(v)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.coeffs.keys()
    }

    pub fn add_monomial(&mut self, c: BigInt, v: &Var) {
        if c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(v.clone()).or_default();
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(v);
        }
    }

    pub fn add_constant(&mut self, c: &BigInt) {
        self.constant += c;
    }

    pub fn with_constant(mut self, c: BigInt) -> LinTerm {
        self.constant = c;
        self
    }

    /// The term with `v`'s monomial removed.
    pub fn without(&self, v: &Var) -> LinTerm {
        let mut t = self.clone();
        t.coeffs.remove(v);
        t
    }

    /// The variable part only (constant dropped).
    pub fn linear_part(&self) -> LinTerm {
        LinTerm {
            coeffs: self.coeffs.clone(),
            constant: BigInt::zero(),
        }
    }

    pub fn scale(&self, k: &BigInt) -> LinTerm {
        if k.is_zero() {
            return LinTerm::zero();
        }
        LinTerm {
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    /// gcd of the variable coefficients (0 for a constant term).
    pub fn content(&self) -> BigInt {
        self.coeffs
            .values()
            .fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Exact division of every coefficient and the constant.
    pub fn div_exact(&self, k: &BigInt) -> LinTerm {
        LinTerm {
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c / k)).collect(),
            constant: &self.constant / k,
        }
    }

    pub fn substitute(&self, v: &Var, t: &LinTerm) -> LinTerm {
        match self.coeffs.get(v) {
            None => self.clone(),
            Some(c) => self.without(v) + t.scale(c),
        }
    }

    pub fn substitute_all(&self, sigma: &BTreeMap<Var, LinTerm>) -> LinTerm {
        let mut out = LinTerm::constant(self.constant.clone());
        for (v, c) in &self.coeffs {
            match sigma.get(v) {
                Some(t) => out = out + t.scale(c),
                None => out.add_monomial(c.clone(), v),
            }
        }
        out
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> LinTerm {
        let mut out = LinTerm::constant(self.constant.clone());
        for (v, c) in &self.coeffs {
            out.add_monomial(c.clone(), map.get(v).unwrap_or(v));
        }
        out
    }

    pub fn eval(&self, val: &Valuation) -> Result<BigInt> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            let x = val
                .get(v)
                .ok_or_else(|| Error::UnboundVariable(v.to_string()))?;
            acc += c * x;
        }
        Ok(acc)
    }

    /// Partial evaluation: substitutes the variables bound in `val`.
    pub fn partial_eval(&self, val: &Valuation) -> LinTerm {
        let mut out = LinTerm::constant(self.constant.clone());
        for (v, c) in &self.coeffs {
            match val.get(v) {
                Some(x) => out.constant += c * x,
                None => out.add_monomial(c.clone(), v),
            }
        }
        out
    }

    pub fn free_vars_into(&self, out: &mut BTreeSet<Var>) {
        out.extend(self.coeffs.keys().cloned());
    }
}

impl Add for LinTerm {
    type Output = LinTerm;
    fn add(mut self, rhs: LinTerm) -> LinTerm {
        for (v, c) in rhs.coeffs {
            self.add_monomial(c, &v);
        }
        self.constant += rhs.constant;
        self
    }
}

impl Sub for LinTerm {
    type Output = LinTerm;
    fn sub(self, rhs: LinTerm) -> LinTerm {
        self + (-rhs)
    }
}

impl Neg for LinTerm {
    type Output = LinTerm;
    fn neg(self) -> LinTerm {
        LinTerm {
            coeffs: self.coeffs.into_iter().map(|(v, c)| (v, -c)).collect(),
            constant: -self.constant,
        }
    }
}

impl Mul<&BigInt> for LinTerm {
    type Output = LinTerm;
    fn mul(self, k: &BigInt) -> LinTerm {
        self.scale(k)
    }
}

impl fmt::Display for LinTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.coeffs {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            if mag.is_one() {
                write!(f, "{v}")?;
            } else {
                write!(f, "{mag}*{v}")?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)
        } else if self.constant.is_positive() {
            write!(f, " + {}", self.constant)
        } else if self.constant.is_negative() {
            write!(f, " - {}", -&self.constant)
        } else {
            Ok(())
        }
    }
}

impl fmt::Debug for LinTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
