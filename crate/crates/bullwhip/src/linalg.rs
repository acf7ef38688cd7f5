//! Dense linear algebra for the absorbing-chain solve. The systems are small
//! (one row per transient node), so a plain LU factorization with partial
//! pivoting is all that is needed.

use crate::error::{Error, Result};

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
        let c = rows.first().map_or(0, Vec::len);
        debug_assert!(rows.iter().all(|row| row.len() == c));
        Matrix {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// C = A * B.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Max absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| m.max(x.abs()))
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

/// Solves A X = B for X by LU with partial pivoting. A is consumed as the
/// factorization workspace.
pub fn solve(mut a: Matrix, b: &Matrix) -> Result<Matrix> {
    assert_eq!(a.rows, a.cols);
    assert_eq!(a.rows, b.rows);
    let n = a.rows;
    let mut perm: Vec<usize> = (0..n).collect();

    for col in 0..n {
        let (pivot_row, pivot_val) =
            (col..n)
                .map(|r| (r, a[(r, col)].abs()))
                .fold(
                    (col, -1.0),
                    |best, cand| if cand.1 > best.1 { cand } else { best },
                );
        if pivot_val < 1e-300 {
            return Err(Error::Singular);
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = a[(col, j)];
                a[(col, j)] = a[(pivot_row, j)];
                a[(pivot_row, j)] = tmp;
            }
            perm.swap(col, pivot_row);
        }
        for r in col + 1..n {
            let f = a[(r, col)] / a[(col, col)];
            a[(r, col)] = f;
            for j in col + 1..n {
                let sub = f * a[(col, j)];
                a[(r, j)] -= sub;
            }
        }
    }

    let mut x = Matrix::zeros(n, b.cols);
    for rhs in 0..b.cols {
        // Forward substitution on the permuted right-hand side.
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = b[(perm[i], rhs)];
            for j in 0..i {
                acc -= a[(i, j)] * y[j];
            }
            y[i] = acc;
        }
        // Back substitution.
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in i + 1..n {
                acc -= a[(i, j)] * x[(j, rhs)];
            }
            x[(i, rhs)] = acc / a[(i, i)];
        }
    }
    Ok(x)
}

/// Infinity norm of A X - B, the solver's residual check.
pub fn residual_inf_norm(a: &Matrix, x: &Matrix, b: &Matrix) -> f64 {
    let ax = a.matmul(x);
    let mut worst: f64 = 0.0;
    for i in 0..b.rows {
        for j in 0..b.cols {
            worst = worst.max((ax[(i, j)] - b[(i, j)]).abs());
        }
    }
    worst
}

/// Spectral radius estimate by power iteration with a deterministic start.
/// Exact enough to detect divergence (radius at or above 1).
pub fn spectral_radius(a: &Matrix, iterations: usize) -> f64 {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    if n == 0 {
        return 0.0;
    }
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64) * 1e-3).collect();
    let mut radius = 0.0;
    for _ in 0..iterations {
        let mut w: Vec<f64> = (0..n)
            .map(|i| a.row(i).iter().zip(&v).map(|(x, y)| x * y).sum())
            .collect();
        let norm = w.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        if norm < 1e-300 {
            return 0.0;
        }
        radius = norm;
        for x in &mut w {
            *x /= norm;
        }
        v = w;
    }
    radius
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        // [[2,1],[1,3]] x = [[5],[10]] has solution [1, 3].
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let b = Matrix::from_rows(&[vec![5.0], vec![10.0]]);
        let x = solve(a.clone(), &b).unwrap();
        assert!((x[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((x[(1, 0)] - 3.0).abs() < 1e-12);
        assert!(residual_inf_norm(&a, &x, &b) < 1e-12);
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let b = Matrix::from_rows(&[vec![2.0], vec![3.0]]);
        let x = solve(a, &b).unwrap();
        assert!((x[(0, 0)] - 3.0).abs() < 1e-12);
        assert!((x[(1, 0)] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        let b = Matrix::from_rows(&[vec![1.0], vec![2.0]]);
        assert!(matches!(solve(a, &b), Err(Error::Singular)));
    }

    #[test]
    fn spectral_radius_of_scaled_identity() {
        let mut a = Matrix::identity(3);
        for i in 0..3 {
            a[(i, i)] = 0.5;
        }
        let r = spectral_radius(&a, 50);
        assert!((r - 0.5).abs() < 1e-9);
    }

    #[test]
    fn spectral_radius_of_nilpotent_is_zero() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert_eq!(spectral_radius(&a, 50), 0.0);
    }
}
