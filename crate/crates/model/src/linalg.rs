//! Dense linear algebra for the regression fits: just enough to solve
//! normal equations two independent ways (Gaussian elimination for ordinary
//! least squares, Cholesky for the ridge-penalized system).

use fncap_core::num::{real, Real};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
}

impl<R: Real> Mat<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![R::zero(); rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<R>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        debug_assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> R {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.data[i * self.cols + j] = v;
    }

    fn row(&self, i: usize) -> &[R] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// `X^T X` and `X^T y` for a design matrix, the shared input of both
/// solvers.
pub fn normal_equations<R: Real>(design: &Mat<R>, y: &[R]) -> (Mat<R>, Vec<R>) {
    let p = design.cols();
    let mut xtx = Mat::zeros(p, p);
    let mut xty = vec![R::zero(); p];
    for (i, &yi) in y.iter().enumerate() {
        let row = design.row(i);
        for a in 0..p {
            let ra = row[a];
            xty[a] += ra * yi;
            for b in a..p {
                let v = xtx.get(a, b) + ra * row[b];
                xtx.set(a, b, v);
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            xtx.set(a, b, xtx.get(b, a));
        }
    }
    (xtx, xty)
}

/// Solve `A x = b` by Gaussian elimination with partial pivoting. Returns
/// `None` when a pivot collapses (singular or rank-deficient system).
pub fn solve_gaussian<R: Real>(a: &Mat<R>, b: &[R]) -> Option<Vec<R>> {
    let n = a.rows();
    debug_assert_eq!(a.cols(), n);
    debug_assert_eq!(b.len(), n);
    let mut m = a.clone();
    let mut rhs = b.to_vec();

    // Pivot tolerance relative to the largest entry of the matrix.
    let scale = m.data.iter().fold(R::zero(), |acc, v| acc.max(v.abs())).max(R::one());
    let tol = scale * real(1e-12);

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| {
                m.get(i, col).abs().partial_cmp(&m.get(j, col).abs()).expect("finite matrix")
            })
            .expect("non-empty range");
        if m.get(pivot_row, col).abs() <= tol {
            return None;
        }
        if pivot_row != col {
            for j in 0..n {
                let (x, y) = (m.get(col, j), m.get(pivot_row, j));
                m.set(col, j, y);
                m.set(pivot_row, j, x);
            }
            rhs.swap(col, pivot_row);
        }
        let pivot = m.get(col, col);
        for i in col + 1..n {
            let factor = m.get(i, col) / pivot;
            if factor == R::zero() {
                continue;
            }
            for j in col..n {
                let v = m.get(i, j) - factor * m.get(col, j);
                m.set(i, j, v);
            }
            let delta = factor * rhs[col];
            rhs[i] -= delta;
        }
    }

    let mut x = vec![R::zero(); n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        for j in i + 1..n {
            acc -= m.get(i, j) * x[j];
        }
        x[i] = acc / m.get(i, i);
    }
    Some(x)
}

/// Solve `A x = b` for symmetric positive-definite `A` via Cholesky
/// decomposition. Returns `None` if `A` is not positive definite.
pub fn solve_cholesky<R: Real>(a: &Mat<R>, b: &[R]) -> Option<Vec<R>> {
    let n = a.rows();
    debug_assert_eq!(a.cols(), n);
    debug_assert_eq!(b.len(), n);

    // Lower-triangular factor L with A = L L^T.
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.get(i, j);
            for k in 0..j {
                sum -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if sum <= R::zero() {
                    return None;
                }
                l.set(i, j, sum.sqrt());
            } else {
                l.set(i, j, sum / l.get(j, j));
            }
        }
    }

    // Forward substitution L z = b, then back substitution L^T x = z.
    let mut z = vec![R::zero(); n];
    for i in 0..n {
        let mut acc = b[i];
        for k in 0..i {
            acc -= l.get(i, k) * z[k];
        }
        z[i] = acc / l.get(i, i);
    }
    let mut x = vec![R::zero(); n];
    for i in (0..n).rev() {
        let mut acc = z[i];
        for k in i + 1..n {
            acc -= l.get(k, i) * x[k];
        }
        x[i] = acc / l.get(i, i);
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_solves_a_known_system() {
        // 2x + y = 5, x + 3y = 10 -> x = 1, y = 3.
        let a = Mat::from_rows(vec![vec![2.0, 1.0], vec![1.0, 3.0]]);
        let x = solve_gaussian(&a, &[5.0, 10.0]).unwrap();
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(x[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn gaussian_detects_singularity() {
        let a = Mat::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(solve_gaussian(&a, &[1.0, 2.0]).is_none());
    }

    #[test]
    fn cholesky_matches_gaussian_on_an_spd_system() {
        let a = Mat::from_rows(vec![
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, 0.2],
            vec![0.5, 0.2, 2.0],
        ]);
        let b = [1.0, 2.0, 3.0];
        let g = solve_gaussian(&a, &b).unwrap();
        let c = solve_cholesky(&a, &b).unwrap();
        for (gi, ci) in g.iter().zip(&c) {
            assert_relative_eq!(gi, ci, epsilon = 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite_matrices() {
        let a = Mat::from_rows(vec![vec![1.0, 2.0], vec![2.0, 1.0]]); // eigenvalues 3, -1
        assert!(solve_cholesky(&a, &[1.0, 1.0]).is_none());
    }

    #[test]
    fn normal_equations_match_hand_computation() {
        // X = [[1,1],[1,2],[1,3]], y = [1,2,3]
        let x = Mat::from_rows(vec![vec![1.0, 1.0], vec![1.0, 2.0], vec![1.0, 3.0]]);
        let (xtx, xty) = normal_equations(&x, &[1.0, 2.0, 3.0]);
        assert_eq!(xtx.get(0, 0), 3.0);
        assert_eq!(xtx.get(0, 1), 6.0);
        assert_eq!(xtx.get(1, 0), 6.0);
        assert_eq!(xtx.get(1, 1), 14.0);
        assert_eq!(xty, vec![6.0, 14.0]);
    }
}
