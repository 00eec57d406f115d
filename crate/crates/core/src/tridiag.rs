//! Thomas algorithm for tridiagonal systems.
//!
//! No pivoting. Callers must hand in diagonally dominant matrices; the
//! factorization checks `|b_i| ≥ |a_i| + |c_i|` row by row.

use crate::error::{Error, Result};

/// Tridiagonal matrix with sub-diagonal `lower`, diagonal `diag` and
/// super-diagonal `upper`. `lower[0]` and `upper[n-1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Forward-elimination coefficients, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct ThomasFactor {
    lower: Vec<f64>,
    /// `c'_i = c_i / (b_i - a_i c'_{i-1})`
    upper_mod: Vec<f64>,
    /// `1 / (b_i - a_i c'_{i-1})`
    inv_pivot: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || lower.len() != diag.len() || upper.len() != diag.len() {
            return Err(Error::invalid(
                "diag",
                "lower, diag and upper must have the same nonzero length",
            ));
        }
        Ok(Tridiagonal { lower, diag, upper })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn is_diagonally_dominant(&self) -> Option<usize> {
        let n = self.len();
        (0..n).find(|&i| {
            let off = if i > 0 { self.lower[i].abs() } else { 0.0 }
                + if i + 1 < n { self.upper[i].abs() } else { 0.0 };
            !(self.diag[i].abs() >= off)
        })
    }

    pub fn factor(&self) -> Result<ThomasFactor> {
        if let Some(row) = self.is_diagonally_dominant() {
            return Err(Error::NotDiagonallyDominant { row });
        }
        let n = self.len();
        let mut upper_mod = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev = 0.0;
        for i in 0..n {
            let a = if i > 0 { self.lower[i] } else { 0.0 };
            let pivot = self.diag[i] - a * prev;
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::NotDiagonallyDominant { row: i });
            }
            inv_pivot[i] = 1.0 / pivot;
            prev = if i + 1 < n { self.upper[i] * inv_pivot[i] } else { 0.0 };
            upper_mod[i] = prev;
        }
        Ok(ThomasFactor {
            lower: self.lower.clone(),
            upper_mod,
            inv_pivot,
        })
    }

    /// `y = A x`.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }
}

impl ThomasFactor {
    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Overwrites `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.len();
        assert_eq!(rhs.len(), n, "right-hand side has the wrong length");
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.upper_mod[i] * rhs[i + 1];
        }
    }
}

/// One-shot solve of `A x = rhs`.
pub fn solve(matrix: &Tridiagonal, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != matrix.len() {
        return Err(Error::invalid("rhs", "length does not match the matrix"));
    }
    let factor = matrix.factor()?;
    let mut x = rhs.to_vec();
    factor.solve_in_place(&mut x);
    Ok(x)
}
