//! Small dense linear algebra: symmetric matrices, Cholesky factorization
//! and triangular solves.
//!
//! Every system in this crate is tiny (summary dimensions up to ~50, site
//! counts up to ~40), so a straightforward flat-storage implementation keeps
//! results deterministic and dependency-free.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} at column {col})")]
    NotPositiveDefinite { col: usize, pivot: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// y = A x
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Matrix,
}

impl Cholesky {
    /// Factor `a = L L'`. Fails with the offending pivot if `a` is not
    /// positive definite.
    pub fn new(a: &Matrix) -> Result<Self, LinalgError> {
        Self::with_pivot_tol(a, 0.0)
    }

    /// Factor with a relative pivot threshold: column `j` fails when its
    /// pivot drops to `rel_tol * a[(j, j)]` or below. Used to detect
    /// numerically collinear columns rather than produce wild factors.
    pub fn with_pivot_tol(a: &Matrix, rel_tol: f64) -> Result<Self, LinalgError> {
        if a.rows != a.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} is not square",
                a.rows, a.cols
            )));
        }
        let n = a.rows;
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if d <= rel_tol * a[(j, j)].abs() || !d.is_finite() {
                return Err(LinalgError::NotPositiveDefinite { col: j, pivot: d });
            }
            let dj = d.sqrt();
            l[(j, j)] = dj;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / dj;
            }
        }
        Ok(Cholesky { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    /// Solve L y = b (forward substitution).
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let row = self.l.row(i);
            let s: f64 = row[..i].iter().zip(&y[..i]).map(|(a, b)| a * b).sum();
            y[i] = (b[i] - s) / row[i];
        }
        y
    }

    /// Solve L' x = y (back substitution).
    pub fn solve_upper(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for i in (0..self.n).rev() {
            let s: f64 = (i + 1..self.n).map(|k| self.l[(k, i)] * x[k]).sum();
            x[i] = (y[i] - s) / self.l[(i, i)];
        }
        x
    }

    /// Solve A x = b via the two triangular solves.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// L z for a standard-normal vector z: one correlated Gaussian draw.
    pub fn lower_mul(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.n);
        (0..self.n)
            .map(|i| (0..=i).map(|k| self.l[(i, k)] * z[k]).sum())
            .collect()
    }
}
