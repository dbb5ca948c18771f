//! Exact integer and rational linear algebra.
//!
//! Everything here is generic over an exact integer scalar (`i64`, `i128`,
//! [`num_bigint::BigInt`], ...). Rational quantities are [`Ratio`]s over the
//! same scalar. There is deliberately no floating point path: determinants,
//! unimodular solves and cone membership must be decided exactly.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, One, Signed, Zero};
use thiserror::Error;

/// Exact signed integer scalar usable by the lattice routines.
pub trait Scalar:
    Integer + Signed + Clone + Debug + Display + Hash + FromPrimitive + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Integer + Signed + Clone + Debug + Display + Hash + FromPrimitive + Send + Sync + 'static
{
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix has {expected} entries per row but row {row} has {got}")]
    RaggedRows { row: usize, expected: usize, got: usize },
    #[error("basis is not unimodular (determinant {det})")]
    NotUnimodular { det: String },
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, entries: Vec<T>) -> Result<Self, LatticeError> {
        if entries.len() != rows * cols {
            return Err(LatticeError::DimensionMismatch {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Builds a matrix from its rows. An empty slice yields the 0x0 matrix.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self, LatticeError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(LatticeError::RaggedRows {
                    row: i,
                    expected: cols,
                    got: row.len(),
                });
            }
            entries.extend(row.iter().cloned());
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            entries,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![T::zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = T::one();
        }
        Self {
            rows: n,
            cols: n,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &T {
        &self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                entries.push(self.get(r, c).clone());
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn mul(&self, other: &Matrix<T>) -> Result<Matrix<T>, LatticeError> {
        if self.cols != other.rows {
            return Err(LatticeError::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut entries = Vec::with_capacity(self.rows * other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = T::zero();
                for k in 0..self.cols {
                    acc = acc + self.get(r, k).clone() * other.get(k, c).clone();
                }
                entries.push(acc);
            }
        }
        Ok(Matrix {
            rows: self.rows,
            cols: other.cols,
            entries,
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>, LatticeError> {
        if self.cols != v.len() {
            return Err(LatticeError::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| dot(self.row(r), v))
            .collect())
    }

    fn to_nested(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Gcd of all entries (0 for the zero vector).
pub fn content<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |g, x| g.gcd(x))
}

/// Divides out the content. The zero vector is returned unchanged.
pub fn primitive_part<T: Scalar>(v: &[T]) -> Vec<T> {
    let g = content(v);
    if g.is_zero() || g.is_one() {
        return v.to_vec();
    }
    v.iter().map(|x| x.clone() / g.clone()).collect()
}

/// Exact determinant by Bareiss fraction-free elimination.
pub fn determinant<T: Scalar>(m: &Matrix<T>) -> Result<T, LatticeError> {
    if !m.is_square() {
        return Err(LatticeError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let n = m.rows;
    if n == 0 {
        return Ok(T::one());
    }
    let mut a = m.to_nested();
    let mut negate = false;
    let mut prev = T::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    negate = !negate;
                }
                None => return Ok(T::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[i][j].clone() * a[k][k].clone() - a[i][k].clone() * a[k][j].clone();
                // Sylvester's identity guarantees exact division.
                a[i][j] = num / prev.clone();
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    Ok(if negate { -det } else { det })
}

/// Solves `m x = rhs` for a unimodular `m` by Cramer's rule.
pub fn solve_unimodular<T: Scalar>(m: &Matrix<T>, rhs: &[T]) -> Result<Vec<T>, LatticeError> {
    let det = determinant(m)?;
    if !det.abs().is_one() {
        return Err(LatticeError::NotUnimodular {
            det: det.to_string(),
        });
    }
    if rhs.len() != m.rows {
        return Err(LatticeError::DimensionMismatch {
            expected: m.rows,
            got: rhs.len(),
        });
    }
    let n = m.rows;
    let mut x = Vec::with_capacity(n);
    for col in 0..n {
        let mut replaced = m.clone();
        for (r, v) in rhs.iter().enumerate() {
            replaced.entries[r * n + col] = v.clone();
        }
        // det is a unit, so dividing is multiplying by it
        x.push(determinant(&replaced)? * det.clone());
    }
    Ok(x)
}

/// Coordinates of `target` in the basis given by the rows of `basis`:
/// returns `c` with `sum_i c_i * basis[i] = target`.
pub fn solve_in_basis<T: Scalar>(basis: &Matrix<T>, target: &[T]) -> Result<Vec<T>, LatticeError> {
    if !basis.is_square() {
        return Err(LatticeError::NotSquare {
            rows: basis.rows,
            cols: basis.cols,
        });
    }
    solve_unimodular(&basis.transpose(), target)
}

/// Dual basis of a unimodular basis (rows of `basis`): row `i` of the result
/// pairs to 1 with `basis[i]` and to 0 with every other basis vector.
pub fn dual_basis<T: Scalar>(basis: &Matrix<T>) -> Result<Matrix<T>, LatticeError> {
    let n = basis.rows;
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = vec![T::zero(); n];
        e[i] = T::one();
        rows.push(solve_unimodular(basis, &e)?);
    }
    // rows[i] is column i of basis^{-1}
    Matrix::from_rows(&rows)
}

/// True iff `m v = 0`.
pub fn integer_kernel_member_check<T: Scalar>(m: &Matrix<T>, v: &[T]) -> Result<bool, LatticeError> {
    Ok(m.mul_vec(v)?.iter().all(Zero::is_zero))
}

/// Decides exactly whether `target` is a nonnegative rational combination of
/// `generators`, using phase one of the simplex method with Bland's rule.
pub fn nonneg_combination_feasible<T: Scalar>(
    generators: &[Vec<Ratio<T>>],
    target: &[Ratio<T>],
) -> Result<bool, LatticeError> {
    let dim = target.len();
    for g in generators {
        if g.len() != dim {
            return Err(LatticeError::DimensionMismatch {
                expected: dim,
                got: g.len(),
            });
        }
    }
    if generators.is_empty() {
        return Ok(target.iter().all(Zero::is_zero));
    }

    // Columns: generators, then one artificial per row, then the rhs.
    let ng = generators.len();
    let width = ng + dim + 1;
    let mut tab: Vec<Vec<Ratio<T>>> = Vec::with_capacity(dim + 1);
    for i in 0..dim {
        let flip = target[i].is_negative();
        let mut row = vec![Ratio::zero(); width];
        for (j, g) in generators.iter().enumerate() {
            row[j] = if flip { -g[i].clone() } else { g[i].clone() };
        }
        row[ng + i] = Ratio::one();
        row[width - 1] = target[i].abs();
        tab.push(row);
    }
    // Reduced-cost row for minimizing the sum of artificials.
    let mut cost = vec![Ratio::zero(); width];
    for (j, c) in cost.iter_mut().enumerate() {
        if j >= ng && j < ng + dim {
            continue;
        }
        *c = tab.iter().fold(Ratio::zero(), |acc, row| acc - row[j].clone());
    }
    let mut basis: Vec<usize> = (ng..ng + dim).collect();

    while let Some(enter) = (0..width - 1).find(|&j| cost[j].is_negative()) {
        let mut leave: Option<(usize, Ratio<T>)> = None;
        for (i, row) in tab.iter().enumerate() {
            if !row[enter].is_positive() {
                continue;
            }
            let ratio = row[width - 1].clone() / row[enter].clone();
            let better = match &leave {
                None => true,
                Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        // The phase-one objective is bounded below by zero.
        let (pr, _) = leave.expect("phase-one simplex cannot be unbounded");

        let pivot = tab[pr][enter].clone();
        for x in tab[pr].iter_mut() {
            *x = x.clone() / pivot.clone();
        }
        let pivot_row = tab[pr].clone();
        for (i, row) in tab.iter_mut().enumerate() {
            if i == pr || row[enter].is_zero() {
                continue;
            }
            let f = row[enter].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x = x.clone() - f.clone() * p.clone();
            }
        }
        let f = cost[enter].clone();
        for (x, p) in cost.iter_mut().zip(&pivot_row) {
            *x = x.clone() - f.clone() * p.clone();
        }
        basis[pr] = enter;
    }
    // cost[rhs] holds minus the optimal sum of artificials.
    Ok(cost[width - 1].is_zero())
}

/// Lifts an integer vector to rationals.
pub fn to_rational<T: Scalar>(v: &[T]) -> Vec<Ratio<T>> {
    v.iter().map(|x| Ratio::from_integer(x.clone())).collect()
}
