//! Exact lattice reduction and the lemmas that turn a reduced basis into a
//! cap on the size of a small linear form in logarithms.
//!
//! Bases are stored by columns. All arithmetic is over `Integer` and
//! `Rational`; ranks are tiny and entries huge, so exactness costs little.

mod approx;
mod lemma;
mod lll;

use std::fmt;

use rug::{Integer, Rational};

use crate::error::{domain, Result};

pub use approx::{
    build_approx_lattice, reduce_linear_form, ApproxLatticeSpec, CellReduction, LinearFormProblem, RetryPolicy,
};
pub use lemma::{coefficient_sums, lower_bound_c1_delta, reduced_height_cap, LatticeDistance, ReductionOutcome};
pub use lll::{lll_reduce, lll_reduce_with_transform, LllOutput};

/// A full-rank integer lattice given by the columns of a square matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct LatticeBasis {
    columns: Vec<Vec<Integer>>,
}

impl fmt::Debug for LatticeBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.columns.iter().map(|c| c.iter().map(|v| v.to_string()).collect::<Vec<_>>()))
            .finish()
    }
}

impl LatticeBasis {
    /// Builds a basis from its columns; rejects ragged, non-square or singular input.
    pub fn from_columns(columns: Vec<Vec<Integer>>) -> Result<Self> {
        let dim = columns.len();
        if dim == 0 {
            return domain("a lattice basis needs at least one vector");
        }
        if columns.iter().any(|c| c.len() != dim) {
            return domain(format!("basis must be square, got {dim} columns of mixed length"));
        }
        let basis = Self { columns };
        if basis.determinant() == 0 {
            return domain("basis vectors are linearly dependent");
        }
        Ok(basis)
    }

    /// Builds a basis from the rows of a matrix whose columns are the basis vectors.
    pub fn from_rows(rows: Vec<Vec<Integer>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return domain("matrix must be square");
        }
        let columns = (0..dim).map(|j| rows.iter().map(|r| r[j].clone()).collect()).collect();
        Self::from_columns(columns)
    }

    pub(crate) fn from_columns_unchecked(columns: Vec<Vec<Integer>>) -> Self {
        Self { columns }
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<Integer>] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &[Integer] {
        &self.columns[j]
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Integer {
        let n = self.dim();
        let mut a: Vec<Vec<Integer>> = (0..n).map(|i| (0..n).map(|j| self.columns[j][i].clone()).collect()).collect();
        let mut sign = 1;
        let mut prev = Integer::from(1);
        for k in 0..n {
            if a[k][k] == 0 {
                match (k + 1..n).find(|&r| a[r][k] != 0) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = -sign;
                    }
                    None => return Integer::new(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = Integer::from(&a[i][j] * &a[k][k]) - Integer::from(&a[i][k] * &a[k][j]);
                    a[i][j] = v.div_exact(&prev);
                }
            }
            prev = a[k][k].clone();
        }
        prev * sign
    }

    /// Squared Euclidean norm of column `j`.
    pub fn norm_sq(&self, j: usize) -> Integer {
        dot(&self.columns[j], &self.columns[j])
    }
}

pub(crate) fn dot(a: &[Integer], b: &[Integer]) -> Integer {
    let mut s = Integer::new();
    for (x, y) in a.iter().zip(b) {
        s += Integer::from(x * y);
    }
    s
}

fn dot_q(a: &[Rational], b: &[Rational]) -> Rational {
    let mut s = Rational::new();
    for (x, y) in a.iter().zip(b) {
        s += Rational::from(x * y);
    }
    s
}

/// Exact Gram-Schmidt data: `b*_i = b_i - sum_{j<i} mu_{i,j} b*_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramSchmidtData {
    pub ortho: Vec<Vec<Rational>>,
    /// `mu[i][j]` for `j < i`; entries with `j >= i` are zero.
    pub mu: Vec<Vec<Rational>>,
    /// `||b*_i||^2`.
    pub norms_sq: Vec<Rational>,
}

#[allow(clippy::needless_range_loop)]
pub fn gram_schmidt(basis: &LatticeBasis) -> Result<GramSchmidtData> {
    let n = basis.dim();
    let mut ortho: Vec<Vec<Rational>> = Vec::with_capacity(n);
    let mut mu = vec![vec![Rational::new(); n]; n];
    let mut norms_sq = Vec::with_capacity(n);
    for i in 0..n {
        let bi: Vec<Rational> = basis.column(i).iter().map(Rational::from).collect();
        let mut v = bi.clone();
        for j in 0..i {
            let m = dot_q(&bi, &ortho[j]) / &norms_sq[j];
            for (x, y) in v.iter_mut().zip(&ortho[j]) {
                *x -= Rational::from(&m * y);
            }
            mu[i][j] = m;
        }
        let nv = dot_q(&v, &v);
        if nv == 0 {
            return domain("basis vectors are linearly dependent");
        }
        ortho.push(v);
        norms_sq.push(nv);
    }
    Ok(GramSchmidtData { ortho, mu, norms_sq })
}

/// Whether the basis is size-reduced and satisfies the exchange condition
/// with constant 3/4.
pub fn is_reduced(basis: &LatticeBasis) -> bool {
    let Ok(gs) = gram_schmidt(basis) else {
        return false;
    };
    let half = Rational::from((1, 2));
    let three_quarters = Rational::from((3, 4));
    let n = basis.dim();
    for i in 1..n {
        for j in 0..i {
            if Rational::from(gs.mu[i][j].abs_ref()) > half {
                return false;
            }
        }
        // ||b*_i + mu_{i,i-1} b*_{i-1}||^2 = B_i + mu^2 B_{i-1}
        let m2 = Rational::from(gs.mu[i][i - 1].square_ref());
        let lhs = &gs.norms_sq[i] + Rational::from(&m2 * &gs.norms_sq[i - 1]);
        let rhs = Rational::from(&three_quarters * &gs.norms_sq[i - 1]);
        if lhs < rhs {
            return false;
        }
    }
    true
}

/// Exact solution of `B z = y` for the column matrix `B`.
#[allow(clippy::needless_range_loop)]
pub fn solve_coordinates(basis: &LatticeBasis, y: &[Integer]) -> Result<Vec<Rational>> {
    let n = basis.dim();
    if y.len() != n {
        return domain(format!("target has length {}, lattice has rank {n}", y.len()));
    }
    let mut a: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            let mut row: Vec<Rational> = (0..n).map(|j| Rational::from(&basis.columns[j][i])).collect();
            row.push(Rational::from(&y[i]));
            row
        })
        .collect();
    for k in 0..n {
        let p = (k..n).find(|&r| a[r][k] != 0).ok_or_else(|| crate::Error::Domain("singular basis".into()))?;
        a.swap(k, p);
        let pivot = a[k][k].clone();
        for j in k..=n {
            a[k][j] /= &pivot;
        }
        for i in 0..n {
            if i != k && a[i][k] != 0 {
                let f = a[i][k].clone();
                for j in k..=n {
                    let t = Rational::from(&f * &a[k][j]);
                    a[i][j] -= t;
                }
            }
        }
    }
    Ok(a.into_iter().map(|row| row[n].clone()).collect())
}
