use num_traits::{One, Zero};

use super::{QMatrix, Rational};

/// A linear subspace of `Q^n` stored by its RREF basis, so equal subspaces
/// compare equal structurally.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<Vec<Rational>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(n: usize) -> Self {
        Subspace {
            ambient_dim: n,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(n: usize) -> Self {
        Self::span(n, QMatrix::identity(n).row_vecs())
    }

    pub fn span(n: usize, vectors: Vec<Vec<Rational>>) -> Self {
        if vectors.is_empty() {
            return Self::zero(n);
        }
        let (r, pivots) = QMatrix::from_rows(n, vectors).rref();
        let basis = (0..pivots.len()).map(|i| r.row(i).to_vec()).collect();
        Subspace {
            ambient_dim: n,
            basis,
            pivots,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim
    }

    pub fn basis(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Basis vectors as the rows of a `dim x n` matrix.
    pub fn row_matrix(&self) -> QMatrix {
        QMatrix::from_rows(self.ambient_dim, self.basis.clone())
    }

    /// Basis vectors as the columns of an `n x dim` matrix.
    pub fn col_matrix(&self) -> QMatrix {
        QMatrix::from_cols(self.ambient_dim, self.basis.clone())
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        assert_eq!(v.len(), self.ambient_dim);
        if v.iter().all(Zero::is_zero) {
            return true;
        }
        // Reduce against the RREF basis using its pivots.
        let mut r = v.to_vec();
        for (b, &p) in self.basis.iter().zip(&self.pivots) {
            if r[p].is_zero() {
                continue;
            }
            let f = r[p].clone();
            for (x, y) in r.iter_mut().zip(b) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        r.iter().all(Zero::is_zero)
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.basis.iter().all(|b| other.contains(b))
    }

    /// Coordinates of `v` with respect to the stored basis, if `v` lies in the subspace.
    pub fn coordinates(&self, v: &[Rational]) -> Option<Vec<Rational>> {
        if !self.contains(v) {
            return None;
        }
        // The basis is in RREF, so the coordinate on basis vector i is v[pivot_i].
        Some(self.pivots.iter().map(|&p| v[p].clone()).collect())
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient_dim, other.ambient_dim);
        let mut vs = self.basis.clone();
        vs.extend(other.basis.iter().cloned());
        Subspace::span(self.ambient_dim, vs)
    }

    pub fn intersection(&self, other: &Subspace) -> Subspace {
        // x in both iff both annihilators vanish on x.
        let c = self.annihilator().row_matrix().vstack(&other.annihilator().row_matrix());
        c.null_space()
    }

    /// `{f : f . b = 0 for every basis vector b}`.
    pub fn annihilator(&self) -> Subspace {
        if self.basis.is_empty() {
            return Subspace::full(self.ambient_dim);
        }
        self.row_matrix().null_space()
    }

    /// Unit vectors that complete the basis to a basis of the ambient space,
    /// chosen at the non-pivot positions.
    pub fn complement_units(&self) -> Vec<Vec<Rational>> {
        (0..self.ambient_dim)
            .filter(|j| !self.pivots.contains(j))
            .map(|j| {
                let mut e = vec![Rational::zero(); self.ambient_dim];
                e[j] = Rational::one();
                e
            })
            .collect()
    }

    /// Image of the subspace under `m` (an `k x n` matrix).
    pub fn image(&self, m: &QMatrix) -> Subspace {
        Subspace::span(m.rows(), self.basis.iter().map(|b| m.mul_vec(b)).collect())
    }
}
