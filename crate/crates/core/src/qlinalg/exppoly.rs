use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::poly::{generalized_eigenspace, rational_spectrum, Side};
use super::{dot, is_zero_vec, lcm_denominators, QMatrix, Rational};
use crate::error::{Error, Result};

/// One summand `lambda^k * k^degree * (coeffs . x)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExpTerm {
    pub lambda: BigInt,
    pub degree: u32,
    pub coeffs: Vec<BigInt>,
}

/// Integer exponential-polynomial `(1/denom) * (sum of terms + constant)`,
/// valid for iteration indices strictly greater than `validity_threshold`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExpPoly {
    pub dim: usize,
    pub denom: BigInt,
    pub terms: Vec<ExpTerm>,
    /// Constant summand, attached to the `1^k k^0` position.
    pub constant: BigInt,
    pub validity_threshold: u64,
}

/// Dominance order: larger |lambda| first, then larger degree, then positive
/// lambda before negative.
pub fn dominance(a: (&BigInt, u32), b: (&BigInt, u32)) -> Ordering {
    b.0.abs()
        .cmp(&a.0.abs())
        .then(b.1.cmp(&a.1))
        .then(b.0.cmp(a.0))
}

fn binom(n: u32, k: u32) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Coefficients (lowest degree first) of the polynomial `k choose j` in `k`.
fn binomial_poly(j: usize) -> Vec<Rational> {
    let mut p = vec![Rational::one()];
    let mut fact = BigInt::one();
    for i in 0..j {
        // multiply by (k - i)
        let mut next = vec![Rational::zero(); p.len() + 1];
        for (d, c) in p.iter().enumerate() {
            next[d + 1] += c;
            next[d] -= c * Rational::from_integer(BigInt::from(i));
        }
        p = next;
        fact *= BigInt::from(i + 1);
    }
    let f = Rational::from_integer(fact);
    p.into_iter().map(|c| c / &f).collect()
}

impl ExpPoly {
    /// Builds a normalized exp-poly from rational coefficient vectors keyed by
    /// `(lambda, degree)`, clearing denominators into `denom`.
    fn from_rational_terms(
        dim: usize,
        terms: BTreeMap<(BigInt, u32), Vec<Rational>>,
        validity_threshold: u64,
    ) -> Self {
        let q = lcm_denominators(terms.values().flatten());
        let qr = Rational::from_integer(q.clone());
        let terms = terms
            .into_iter()
            .filter(|(_, v)| !is_zero_vec(v))
            .map(|((lambda, degree), v)| ExpTerm {
                lambda,
                degree,
                coeffs: v.iter().map(|c| (c * &qr).to_integer()).collect(),
            })
            .collect();
        let mut e = ExpPoly {
            dim,
            denom: q,
            terms,
            constant: BigInt::zero(),
            validity_threshold,
        };
        e.normalize();
        e
    }

    /// Merges duplicate `(lambda, degree)` pairs, drops zero terms, sorts by
    /// dominance and reduces the common denominator.
    pub fn normalize(&mut self) {
        let mut merged: BTreeMap<(BigInt, u32), Vec<BigInt>> = BTreeMap::new();
        for t in self.terms.drain(..) {
            let e = merged
                .entry((t.lambda, t.degree))
                .or_insert_with(|| vec![BigInt::zero(); self.dim]);
            for (a, b) in e.iter_mut().zip(t.coeffs) {
                *a += b;
            }
        }
        self.terms = merged
            .into_iter()
            .filter(|(_, c)| c.iter().any(|x| !x.is_zero()))
            .map(|((lambda, degree), coeffs)| ExpTerm {
                lambda,
                degree,
                coeffs,
            })
            .collect();
        self.terms
            .sort_by(|a, b| dominance((&a.lambda, a.degree), (&b.lambda, b.degree)));
        let mut g = self.denom.gcd(&self.constant);
        for t in &self.terms {
            for c in &t.coeffs {
                g = g.gcd(c);
            }
        }
        if !g.is_zero() && !g.is_one() {
            self.denom = &self.denom / &g;
            self.constant = &self.constant / &g;
            for t in self.terms.iter_mut() {
                for c in t.coeffs.iter_mut() {
                    *c = &*c / &g;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant.is_zero()
    }

    /// Adds `value` (in the same scale, i.e. already multiplied by `denom`) to the constant.
    pub fn with_constant(mut self, value: BigInt) -> Self {
        self.constant += value;
        self
    }

    /// `sum of terms + constant` at `(x, k)`, i.e. `denom` times the closed form value.
    pub fn numerator_at(&self, x: &[BigInt], k: u64) -> BigInt {
        let kk = BigInt::from(k);
        let mut acc = self.constant.clone();
        for t in &self.terms {
            let lin: BigInt = t.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            if lin.is_zero() {
                continue;
            }
            let lp = if t.lambda.is_zero() {
                if k == 0 {
                    BigInt::one()
                } else {
                    BigInt::zero()
                }
            } else {
                num_traits::pow(t.lambda.clone(), k as usize)
            };
            acc += lp * num_traits::pow(kk.clone(), t.degree as usize) * lin;
        }
        acc
    }

    pub fn eval(&self, x: &[BigInt], k: u64) -> Rational {
        Rational::new(self.numerator_at(x, k), self.denom.clone())
    }

    /// Substitutes `k -> stride*k + offset`, re-expanding into the
    /// `(lambda^stride)^k k^d` basis.
    pub fn reindex(&self, stride: u32, offset: u32) -> ExpPoly {
        let mut terms = Vec::new();
        for t in &self.terms {
            let base = num_traits::pow(t.lambda.clone(), stride as usize);
            let lead = num_traits::pow(t.lambda.clone(), offset as usize);
            // (stride*k + offset)^d = sum_e C(d,e) stride^e offset^(d-e) k^e
            for e in 0..=t.degree {
                let f = &lead
                    * binom(t.degree, e)
                    * num_traits::pow(BigInt::from(stride), e as usize)
                    * num_traits::pow(BigInt::from(offset), (t.degree - e) as usize);
                if f.is_zero() {
                    continue;
                }
                terms.push(ExpTerm {
                    lambda: base.clone(),
                    degree: e,
                    coeffs: t.coeffs.iter().map(|c| c * &f).collect(),
                });
            }
        }
        let mut e = ExpPoly {
            dim: self.dim,
            denom: self.denom.clone(),
            terms,
            constant: self.constant.clone(),
            validity_threshold: self.validity_threshold / u64::from(stride.max(1)),
        };
        e.normalize();
        e
    }

    /// Drops terms whose base is zero (they vanish for every k >= 1).
    pub fn drop_zero_bases(mut self) -> ExpPoly {
        self.terms.retain(|t| !t.lambda.is_zero());
        self
    }
}

/// Smallest `r` with `rank(a^r) = rank(a^(r+1))`: the largest rank of a
/// generalized eigenvector for eigenvalue 0.
fn zero_index(a: &QMatrix) -> u64 {
    let mut r = 0u64;
    let mut p = QMatrix::identity(a.rows());
    let mut rank = a.rows();
    loop {
        let next = &p * a;
        let nr = next.rank();
        if nr == rank {
            return r;
        }
        rank = nr;
        p = next;
        r += 1;
    }
}

/// Closed form of `c^T a^k x` for a matrix with integer spectrum.
pub fn closed_form(c: &[Rational], a: &QMatrix) -> Result<ExpPoly> {
    a.check_square()?;
    let n = a.rows();
    if c.len() != n {
        return Err(Error::Dimension(format!(
            "functional of length {} for {n}x{n} matrix",
            c.len()
        )));
    }
    let spec = rational_spectrum(a)?;
    if !spec.fully_split || !spec.all_integer() {
        return Err(Error::NonIntegerSpectrum);
    }
    // Basis of generalized left eigenvectors, grouped by eigenvalue.
    let mut rows = Vec::new();
    let mut blocks = Vec::new();
    for (lambda, _) in &spec.roots {
        let g = generalized_eigenspace(a, lambda, Side::Left)?;
        let start = rows.len();
        rows.extend(g.basis().iter().cloned());
        blocks.push((lambda.clone(), start..rows.len()));
    }
    let w = QMatrix::from_rows(n, rows);
    let y = w
        .transpose()
        .solve(c)
        .ok_or_else(|| Error::Dimension("eigenbasis does not span the dual space".into()))?;

    let mut acc: BTreeMap<(BigInt, u32), Vec<Rational>> = BTreeMap::new();
    for (lambda, range) in blocks {
        if lambda.is_zero() {
            continue;
        }
        let mut g = vec![Rational::zero(); n];
        for i in range {
            if y[i].is_zero() {
                continue;
            }
            for (gj, wj) in g.iter_mut().zip(w.row(i)) {
                *gj += &y[i] * wj;
            }
        }
        if is_zero_vec(&g) {
            continue;
        }
        // g a^k = sum_j C(k,j) lambda^(k-j) g N^j with N = a - lambda I.
        let shifted = a - &QMatrix::scalar(n, &lambda);
        let lam_int = lambda.to_integer();
        let mut v = g;
        let mut j = 0usize;
        while !is_zero_vec(&v) {
            let scale = Rational::one() / num_traits::pow(lambda.clone(), j);
            for (d, bc) in binomial_poly(j).into_iter().enumerate() {
                if bc.is_zero() {
                    continue;
                }
                let f = &bc * &scale;
                let e = acc
                    .entry((lam_int.clone(), d as u32))
                    .or_insert_with(|| vec![Rational::zero(); n]);
                for (ei, vi) in e.iter_mut().zip(&v) {
                    *ei += &f * vi;
                }
            }
            v = shifted.vec_mul(&v);
            j += 1;
        }
    }
    let threshold = if spec.roots.iter().any(|(l, _)| l.is_zero()) {
        zero_index(a)
    } else {
        0
    };
    Ok(ExpPoly::from_rational_terms(n, acc, threshold))
}

/// Exact `c^T a^k x` by repeated multiplication; the reference for closed forms.
pub fn iterate_functional(c: &[Rational], a: &QMatrix, x: &[Rational], k: u64) -> Rational {
    let mut v = x.to_vec();
    for _ in 0..k {
        v = a.mul_vec(&v);
    }
    dot(c, &v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::{int_vec_to_rat, rat, rat_vec};

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn section_four_example() {
        let a = QMatrix::from_ints(&[
            &[1, 1, 0, 0, 0],
            &[0, 1, 1, 0, 0],
            &[0, 0, 1, 0, 0],
            &[0, 0, 0, -3, 0],
            &[0, 0, 0, 0, 2],
        ]);
        let e = closed_form(&rat_vec(&[1, 0, 0, 0, 0]), &a).unwrap();
        assert_eq!(e.denom, BigInt::from(2));
        let expect = vec![
            ExpTerm {
                lambda: 1.into(),
                degree: 2,
                coeffs: big(&[0, 0, 1, 0, 0]),
            },
            ExpTerm {
                lambda: 1.into(),
                degree: 1,
                coeffs: big(&[0, 2, -1, 0, 0]),
            },
            ExpTerm {
                lambda: 1.into(),
                degree: 0,
                coeffs: big(&[2, 0, 0, 0, 0]),
            },
        ];
        assert_eq!(e.terms, expect);
    }

    #[test]
    fn identity_and_scalar() {
        let e = closed_form(&rat_vec(&[3, -1]), &QMatrix::identity(2)).unwrap();
        assert_eq!(e.denom, BigInt::one());
        assert_eq!(e.terms.len(), 1);
        assert_eq!(e.terms[0].lambda, BigInt::one());
        assert_eq!(e.terms[0].degree, 0);
        assert_eq!(e.terms[0].coeffs, big(&[3, -1]));
        let e = closed_form(&rat_vec(&[1]), &QMatrix::from_ints(&[&[2]])).unwrap();
        assert_eq!(e.terms[0].lambda, BigInt::from(2));
        assert_eq!(e.terms[0].coeffs, big(&[1]));
    }

    #[test]
    fn rejects_non_integer_spectrum() {
        let rot = QMatrix::from_ints(&[&[0, 1], &[-1, 0]]);
        assert_eq!(closed_form(&rat_vec(&[1, 0]), &rot), Err(Error::NonIntegerSpectrum));
        let half = QMatrix::from_rows(1, vec![vec![Rational::new(1.into(), 2.into())]]);
        assert_eq!(closed_form(&rat_vec(&[1]), &half), Err(Error::NonIntegerSpectrum));
    }

    #[test]
    fn nilpotent_threshold() {
        // x' = y, y' = 0: c a^k x vanishes for k >= 2.
        let a = QMatrix::from_ints(&[&[0, 1], &[0, 0]]);
        let e = closed_form(&rat_vec(&[1, 0]), &a).unwrap();
        assert!(e.terms.is_empty());
        assert_eq!(e.validity_threshold, 2);
        let x = rat_vec(&[5, 7]);
        for k in 3..6 {
            assert!(iterate_functional(&rat_vec(&[1, 0]), &a, &x, k).is_zero());
        }
    }

    #[test]
    fn even_odd_reindex_matches_direct() {
        let a = QMatrix::from_ints(&[&[-2, 1], &[0, 3]]);
        let c = rat_vec(&[1, 2]);
        let e = closed_form(&c, &a).unwrap();
        let even = e.reindex(2, 0);
        let odd = e.reindex(2, 1);
        assert!(even.terms.iter().all(|t| t.lambda.is_positive()));
        let xi = big(&[3, -4]);
        let xr = int_vec_to_rat(&xi);
        for k in 0..6u64 {
            assert_eq!(even.eval(&xi, k), iterate_functional(&c, &a, &xr, 2 * k));
            assert_eq!(odd.eval(&xi, k), iterate_functional(&c, &a, &xr, 2 * k + 1));
        }
        let _ = rat(0);
    }
}
