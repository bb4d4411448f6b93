//! Tridiagonal matrices and the Thomas algorithm.

use crate::error::{Error, Result};

/// `n x n` tridiagonal matrix. `lower[i]` sits at `(i+1, i)`, `upper[i]` at
/// `(i, i+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Self {
        assert!(!diag.is_empty(), "empty matrix");
        assert_eq!(lower.len() + 1, diag.len(), "lower band length");
        assert_eq!(upper.len() + 1, diag.len(), "upper band length");
        Self { lower, diag, upper }
    }

    /// Constant bands `(l, d, u)`.
    pub fn constant(n: usize, l: f64, d: f64, u: f64) -> Self {
        Self::new(vec![l; n - 1], vec![d; n], vec![u; n - 1])
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// `shift * I + scale * self`.
    pub fn affine(&self, shift: f64, scale: f64) -> Self {
        Self {
            lower: self.lower.iter().map(|v| scale * v).collect(),
            diag: self.diag.iter().map(|v| shift + scale * v).collect(),
            upper: self.upper.iter().map(|v| scale * v).collect(),
        }
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        assert!(x.len() == n && y.len() == n);
        if n == 1 {
            y[0] = self.diag[0] * x[0];
            return;
        }
        y[0] = self.diag[0] * x[0] + self.upper[0] * x[1];
        for i in 1..n - 1 {
            y[i] = self.lower[i - 1] * x[i - 1] + self.diag[i] * x[i] + self.upper[i] * x[i + 1];
        }
        y[n - 1] = self.lower[n - 2] * x[n - 2] + self.diag[n - 1] * x[n - 1];
    }

    /// LU factors for repeated solves with the same matrix.
    pub fn factor(&self) -> Result<ThomasFactor> {
        let n = self.dim();
        let mut inv_pivot = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut prev_c = 0.0;
        for i in 0..n {
            let l = if i > 0 { self.lower[i - 1] } else { 0.0 };
            let pivot = self.diag[i] - l * prev_c;
            let scale = self.diag[i].abs() + (l * prev_c).abs();
            if !pivot.is_finite() || pivot.abs() <= 1e-14 * scale || pivot == 0.0 {
                return Err(Error::LinearSolveFailure { row: i });
            }
            inv_pivot[i] = 1.0 / pivot;
            c[i] = if i + 1 < n { self.upper[i] / pivot } else { 0.0 };
            prev_c = c[i];
        }
        Ok(ThomasFactor {
            lower: self.lower.clone(),
            inv_pivot,
            c,
        })
    }

    /// One-shot solve `A x = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let f = self.factor()?;
        let mut x = rhs.to_vec();
        f.solve_in_place(&mut x);
        Ok(x)
    }
}

/// Forward-elimination multipliers of a [`Tridiagonal`].
#[derive(Debug, Clone)]
pub struct ThomasFactor {
    lower: Vec<f64>,
    inv_pivot: Vec<f64>,
    c: Vec<f64>,
}

impl ThomasFactor {
    pub fn dim(&self) -> usize {
        self.inv_pivot.len()
    }

    /// Overwrites `b` with the solution.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        assert_eq!(b.len(), n);
        b[0] *= self.inv_pivot[0];
        for i in 1..n {
            b[i] = (b[i] - self.lower[i - 1] * b[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            b[i] -= self.c[i] * b[i + 1];
        }
    }
}
