use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{lcm_denominators, QMatrix, Rational, Subspace};
use crate::error::{Error, Result};

/// Integer polynomial, coefficients lowest degree first, kept primitive with a
/// positive leading coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    /// Normalizes to primitive form: trailing zeros stripped, content divided out,
    /// leading coefficient positive.
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Self::zero();
        }
        let mut g = coeffs.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if coeffs.last().unwrap().is_negative() {
            g = -g;
        }
        if !g.is_one() {
            for c in coeffs.iter_mut() {
                *c = &*c / &g;
            }
        }
        IntPoly { coeffs }
    }

    /// Primitive integer polynomial with the same roots as the rational polynomial.
    pub fn from_rationals(coeffs: &[Rational]) -> Self {
        let l = lcm_denominators(coeffs);
        Self::new(
            coeffs
                .iter()
                .map(|c| (c * Rational::from_integer(l.clone())).to_integer())
                .collect(),
        )
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial has no degree.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + Rational::from_integer(c.clone()))
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Divides by `(x - r)` when `r` is a root, returning the primitive quotient.
    pub fn deflate(&self, r: &Rational) -> Option<IntPoly> {
        let n = self.coeffs.len();
        if n < 2 {
            return None;
        }
        // Synthetic division over Q, highest coefficient first.
        let mut q = vec![Rational::zero(); n - 1];
        let mut acc = Rational::zero();
        for i in (0..n).rev() {
            acc = acc * r + Rational::from_integer(self.coeffs[i].clone());
            if i > 0 {
                q[i - 1] = acc.clone();
            }
        }
        if !acc.is_zero() {
            return None;
        }
        Some(Self::from_rationals(&q))
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let (sign, mag) = if c.is_negative() { ("-", -c) } else { ("+", c.clone()) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match (i, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "x")?,
                (1, false) => write!(f, "{mag}x")?,
                (_, true) => write!(f, "x^{i}")?,
                (_, false) => write!(f, "{mag}x^{i}")?,
            }
        }
        Ok(())
    }
}

/// Monic characteristic polynomial `det(xI - a)` with rational coefficients,
/// lowest degree first, by the Faddeev-LeVerrier recurrence.
pub fn char_poly_monic(a: &QMatrix) -> Result<Vec<Rational>> {
    a.check_square()?;
    let n = a.rows();
    let mut c = vec![Rational::zero(); n + 1];
    c[n] = Rational::one();
    let mut m = QMatrix::zeros(n, n);
    for k in 1..=n {
        m = &(a * &m) + &QMatrix::scalar(n, &c[n - k + 1]);
        let am = a * &m;
        c[n - k] = -am.trace() / Rational::from_integer(BigInt::from(k));
    }
    Ok(c)
}

/// Primitive integer characteristic polynomial `p` and the positive integer `s`
/// with `p = s * det(xI - a)`.
pub fn char_poly(a: &QMatrix) -> Result<(IntPoly, BigInt)> {
    let monic = char_poly_monic(a)?;
    let p = IntPoly::from_rationals(&monic);
    let s = p.coeffs().last().cloned().unwrap_or_else(BigInt::one);
    Ok((p, s))
}

/// Rational roots of a nonzero integer polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalRoots {
    pub roots: Vec<(Rational, usize)>,
    /// Multiplicities sum to the degree.
    pub fully_split: bool,
}

impl RationalRoots {
    pub fn all_integer(&self) -> bool {
        self.roots.iter().all(|(r, _)| r.is_integer())
    }
}

fn positive_divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    if n.is_zero() {
        return Vec::new();
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let root = n.sqrt();
    let mut d = BigInt::one();
    while d <= root {
        if (&n % &d).is_zero() {
            let q = &n / &d;
            if q != d {
                large.push(q);
            }
            small.push(d.clone());
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Rational roots with multiplicities by the rational-root theorem.
pub fn rational_roots(p: &IntPoly) -> Result<RationalRoots> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let degree = p.degree().unwrap();
    let mut roots = Vec::new();
    let mut cur = p.clone();
    // Zero roots first so the trailing coefficient is nonzero afterwards.
    let zeros = cur.coeffs().iter().take_while(|c| c.is_zero()).count();
    if zeros > 0 {
        roots.push((Rational::zero(), zeros));
        cur = IntPoly::new(cur.coeffs()[zeros..].to_vec());
    }
    if cur.degree().unwrap_or(0) > 0 {
        let lead = cur.coeffs().last().unwrap().clone();
        let trail = cur.coeffs()[0].clone();
        let nums = positive_divisors(&trail);
        let dens = positive_divisors(&lead);
        let mut candidates: Vec<Rational> = Vec::new();
        for num in &nums {
            for den in &dens {
                for sign in [1, -1] {
                    let r = Rational::new(num * sign, den.clone());
                    if !candidates.contains(&r) {
                        candidates.push(r);
                    }
                }
            }
        }
        candidates.sort();
        for r in candidates {
            let mut mult = 0;
            while let Some(q) = cur.deflate(&r) {
                cur = q;
                mult += 1;
            }
            if mult > 0 {
                roots.push((r, mult));
            }
            if cur.degree().unwrap_or(0) == 0 {
                break;
            }
        }
    }
    roots.sort_by(|a, b| a.0.cmp(&b.0));
    let total: usize = roots.iter().map(|(_, m)| m).sum();
    Ok(RationalRoots {
        roots,
        fully_split: total == degree,
    })
}

/// Rational spectrum of a square matrix (roots of its characteristic polynomial).
pub fn rational_spectrum(a: &QMatrix) -> Result<RationalRoots> {
    if a.rows() == 0 {
        a.check_square()?;
        return Ok(RationalRoots {
            roots: Vec::new(),
            fully_split: true,
        });
    }
    let (p, _) = char_poly(a)?;
    rational_roots(&p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Generalized eigenspace of `a` for `lambda`. Right: vectors `v` with
/// `(a - lambda I)^n v = 0`. Left: row functionals `g` with `g (a - lambda I)^n = 0`.
pub fn generalized_eigenspace(a: &QMatrix, lambda: &Rational, side: Side) -> Result<Subspace> {
    a.check_square()?;
    let n = a.rows();
    let shifted = a - &QMatrix::scalar(n, lambda);
    let power = shifted.pow(n as u32);
    Ok(match side {
        Side::Right => power.null_space(),
        Side::Left => power.transpose().null_space(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::{rat, rat_vec};

    fn det_oracle(m: &QMatrix) -> Rational {
        // Laplace expansion; independent of the recurrence under test.
        let n = m.rows();
        if n == 0 {
            return Rational::one();
        }
        let mut acc = Rational::zero();
        for j in 0..n {
            let minor = QMatrix::from_rows(
                n - 1,
                (1..n)
                    .map(|i| (0..n).filter(|&c| c != j).map(|c| m[(i, c)].clone()).collect())
                    .collect(),
            );
            let term = &m[(0, j)] * det_oracle(&minor);
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    #[test]
    fn char_poly_identity() {
        let (p, _) = char_poly(&QMatrix::identity(3)).unwrap();
        assert_eq!(p, IntPoly::from_ints(&[-1, 3, -3, 1]));
    }

    #[test]
    fn char_poly_scalar_two() {
        let (p, s) = char_poly(&QMatrix::from_ints(&[&[2]])).unwrap();
        assert_eq!(p, IntPoly::from_ints(&[-2, 1]));
        assert_eq!(s, BigInt::one());
    }

    #[test]
    fn char_poly_rotation_block() {
        let a = QMatrix::from_ints(&[&[2, 0, 0], &[0, 0, 1], &[0, -1, 0]]);
        let (p, _) = char_poly(&a).unwrap();
        // (x - 2)(x^2 + 1) = x^3 - 2x^2 + x - 2
        assert_eq!(p, IntPoly::from_ints(&[-2, 1, -2, 1]));
    }

    #[test]
    fn char_poly_matches_determinant_oracle() {
        let a = QMatrix::from_ints(&[&[1, 2, 0], &[3, -1, 4], &[0, 5, 2]]);
        let monic = char_poly_monic(&a).unwrap();
        for x in -3..=3 {
            let xi = &QMatrix::scalar(3, &rat(x)) - &a;
            let direct = det_oracle(&xi);
            let via = monic
                .iter()
                .rev()
                .fold(Rational::zero(), |acc, c| acc * rat(x) + c);
            assert_eq!(direct, via);
        }
    }

    #[test]
    fn roots_examples() {
        let r = rational_roots(&IntPoly::from_ints(&[1, -2, 1])).unwrap();
        assert_eq!(r.roots, vec![(rat(1), 2)]);
        assert!(r.fully_split);
        let r = rational_roots(&IntPoly::from_ints(&[-2, 1, -2, 1])).unwrap();
        assert_eq!(r.roots, vec![(rat(2), 1)]);
        assert!(!r.fully_split);
        let r = rational_roots(&IntPoly::from_ints(&[-2, 0, 1])).unwrap();
        assert!(r.roots.is_empty());
        assert!(!r.fully_split);
        assert_eq!(rational_roots(&IntPoly::zero()), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn roots_with_fractions_and_zero() {
        // x^2 (2x - 1)(x + 3)
        let p = IntPoly::from_ints(&[0, 0, 1])
            .mul(&IntPoly::from_ints(&[-1, 2]))
            .mul(&IntPoly::from_ints(&[3, 1]));
        let r = rational_roots(&p).unwrap();
        assert_eq!(
            r.roots,
            vec![(rat(-3), 1), (rat(0), 2), (Rational::new(1.into(), 2.into()), 1)]
        );
        assert!(r.fully_split);
    }

    #[test]
    fn generalized_eigenspaces() {
        let full = generalized_eigenspace(&QMatrix::identity(2), &rat(1), Side::Right).unwrap();
        assert!(full.is_full());
        let a = QMatrix::from_ints(&[&[2, 0, 0], &[0, 0, 1], &[0, -1, 0]]);
        let e = generalized_eigenspace(&a, &rat(2), Side::Right).unwrap();
        assert_eq!(e, Subspace::span(3, vec![rat_vec(&[1, 0, 0])]));
        let shifted = &a - &QMatrix::scalar(3, &rat(2));
        assert!(shifted.pow(3).mul_vec(&rat_vec(&[1, 0, 0])).iter().all(Zero::is_zero));
        assert_eq!(shifted.pow(3).rank(), 2);
        let left = generalized_eigenspace(&a, &rat(2), Side::Left).unwrap();
        assert_eq!(left, Subspace::span(3, vec![rat_vec(&[1, 0, 0])]));
    }

    #[test]
    fn jordan_block_generalized_space() {
        let a = QMatrix::from_ints(&[&[3, 1], &[0, 3]]);
        let e = generalized_eigenspace(&a, &rat(3), Side::Right).unwrap();
        assert!(e.is_full());
        let plain = (&a - &QMatrix::scalar(2, &rat(3))).null_space();
        assert_eq!(plain.dim(), 1);
    }
}
