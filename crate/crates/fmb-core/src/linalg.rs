//! Minimal dense linear algebra for the GP modules: symmetric matrices,
//! Cholesky factorization with a jitter ladder, and triangular solves.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("matrix not positive definite, even with maximum jitter")]
    NotPositiveDefinite,
    #[error("dimension mismatch")]
    DimensionMismatch,
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Matrix {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn identity(n: usize) -> Matrix {
        Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// self * v for a column vector v.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
            .collect()
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
pub struct Cholesky {
    l: Matrix,
    /// jitter that was added to the diagonal to reach positive definiteness
    pub jitter: f64,
}

/// Jitter ladder tried in order when the plain factorization fails.
const JITTER_LADDER: [f64; 4] = [0.0, 1e-10, 1e-8, 1e-6];

impl Cholesky {
    /// Factorizes `a` (+ jitter * I, escalating through the ladder when
    /// needed). `a` must be symmetric.
    pub fn new(a: &Matrix) -> Result<Cholesky, LinalgError> {
        if a.rows != a.cols {
            return Err(LinalgError::DimensionMismatch);
        }
        let scale = (0..a.rows).fold(1.0f64, |acc, i| acc.max(a.get(i, i).abs()));
        for &j in &JITTER_LADDER {
            let jitter = j * scale;
            if let Some(l) = try_factor(a, jitter) {
                return Ok(Cholesky { l, jitter });
            }
        }
        Err(LinalgError::NotPositiveDefinite)
    }

    pub fn n(&self) -> usize {
        self.l.rows
    }

    /// Element (i, j) of the lower-triangular factor.
    pub fn l(&self, i: usize, j: usize) -> f64 {
        self.l.get(i, j)
    }

    /// Solves L x = b.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n();
        debug_assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.l.get(i, j) * x[j];
            }
            x[i] = s / self.l.get(i, i);
        }
        x
    }

    /// Solves L^T x = b.
    pub fn backward(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n();
        debug_assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.l.get(j, i) * x[j];
            }
            x[i] = s / self.l.get(i, i);
        }
        x
    }

    /// Solves (L L^T) x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.backward(&self.forward(b))
    }

    /// log det(L L^T).
    pub fn log_det(&self) -> f64 {
        (0..self.n())
            .map(|i| libm::log(self.l.get(i, i)))
            .sum::<f64>()
            * 2.0
    }
}

fn try_factor(a: &Matrix, jitter: f64) -> Option<Matrix> {
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j) + if i == j { jitter } else { 0.0 };
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l.set(i, j, libm::sqrt(s));
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    Some(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_spd_system() {
        // A = [[4,2],[2,3]], b = [8, 7] -> x = [1, 5/3 + ...]; check A x = b
        let a = Matrix::from_fn(2, 2, |i, j| [[4.0, 2.0], [2.0, 3.0]][i][j]);
        let chol = Cholesky::new(&a).unwrap();
        assert_eq!(chol.jitter, 0.0);
        let x = chol.solve(&[8.0, 7.0]);
        let back = a.mul_vec(&x);
        assert!((back[0] - 8.0).abs() < 1e-12);
        assert!((back[1] - 7.0).abs() < 1e-12);
        // det = 8, log det
        assert!((chol.log_det() - libm::log(8.0)).abs() < 1e-12);
    }

    #[test]
    fn jitter_rescues_semidefinite() {
        // rank-1 matrix: plain Cholesky fails, ladder succeeds
        let a = Matrix::from_fn(2, 2, |_, _| 1.0);
        let chol = Cholesky::new(&a).unwrap();
        assert!(chol.jitter > 0.0);
    }

    #[test]
    fn rejects_negative_definite() {
        let a = Matrix::from_fn(2, 2, |i, j| if i == j { -5.0 } else { 0.0 });
        assert!(matches!(
            Cholesky::new(&a),
            Err(LinalgError::NotPositiveDefinite)
        ));
    }
}
