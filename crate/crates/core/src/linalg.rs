//! Dense exact rational matrices and the float rank routine shared by the cohomology code.

use std::fmt;

use nalgebra::DMatrix;
use num::{Signed, Zero};
use thiserror::Error;

use crate::rational::{format_rational, int, to_f64, Rational};

/// Singular values below this fraction of the largest count as zero.
pub const RANK_CUTOFF: f64 = 1e-8;
/// Second, looser cutoff; a rank that changes between the two is reported as ill-conditioned.
pub const RANK_CUTOFF_LOOSE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("singular values straddle the rank cutoff band (rank {tight} at 1e-8, {loose} at 1e-6)")]
    IllConditioned { tight: usize, loose: usize },
    #[error("linear system has no solution")]
    NoSolution,
}

/// Row-major dense matrix over the rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = int(1);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, LinalgError> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(LinalgError::DimensionMismatch("ragged rows".into()));
        }
        Ok(RatMatrix {
            rows: n,
            cols: m,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_integers(rows: &[Vec<i64>]) -> Result<Self, LinalgError> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| int(x)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &RatMatrix) -> Result<RatMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| to_f64(&self[(i, j)]))
    }

    /// Reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = Rational::from_integer(1.into()) / self[(r, c)].clone();
            for j in c..self.cols {
                self[(r, j)] = &self[(r, j)] * &inv;
            }
            for i in 0..self.rows {
                if i == r || self[(i, c)].is_zero() {
                    continue;
                }
                let f = self[(i, c)].clone();
                for j in c..self.cols {
                    let d = &f * &self[(r, j)];
                    self[(i, j)] -= d;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Solves `x^T * self = target^T` for `x`, taking free variables as zero.
    pub fn solve_left(&self, target: &[Rational]) -> Result<Vec<Rational>, LinalgError> {
        if target.len() != self.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "target has length {}, matrix has {} columns",
                target.len(),
                self.cols
            )));
        }
        // (self^T | target) in echelon form
        let t = self.transpose();
        let mut aug = RatMatrix::zeros(t.rows, t.cols + 1);
        for i in 0..t.rows {
            for j in 0..t.cols {
                aug[(i, j)] = t[(i, j)].clone();
            }
            aug[(i, t.cols)] = target[i].clone();
        }
        let pivots = aug.rref();
        if pivots.last() == Some(&t.cols) {
            return Err(LinalgError::NoSolution);
        }
        let mut x = vec![Rational::zero(); t.cols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = aug[(r, t.cols)].clone();
        }
        Ok(x)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_symmetric(&mut self, a: usize, b: usize) {
        self.swap_rows(a, b);
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// Inertia `(positive, negative, zero)` of a symmetric matrix by congruence diagonalization.
    pub fn inertia(&self) -> Result<(usize, usize, usize), LinalgError> {
        if !self.is_symmetric() {
            return Err(LinalgError::DimensionMismatch(
                "inertia needs a symmetric matrix".into(),
            ));
        }
        let n = self.rows;
        let mut a = self.clone();
        let (mut pos, mut neg) = (0, 0);
        let mut k = 0;
        while k < n {
            if a[(k, k)].is_zero() {
                if let Some(p) = (k + 1..n).find(|&i| !a[(i, i)].is_zero()) {
                    a.swap_symmetric(k, p);
                } else if let Some(p) = (k + 1..n).find(|&i| !a[(k, i)].is_zero()) {
                    // a_kk = 0 = a_pp, a_kp != 0: replace e_k by e_k + e_p, giving 2 a_kp on the diagonal
                    for j in 0..n {
                        let v = a[(p, j)].clone();
                        a[(k, j)] += v;
                    }
                    for i in 0..n {
                        let v = a[(i, p)].clone();
                        a[(i, k)] += v;
                    }
                } else {
                    // row k is zero; move it out of the way
                    k += 1;
                    continue;
                }
            }
            let d = a[(k, k)].clone();
            if d.is_positive() {
                pos += 1;
            } else {
                neg += 1;
            }
            for i in k + 1..n {
                if a[(i, k)].is_zero() {
                    continue;
                }
                let f = &a[(i, k)] / &d;
                for j in k..n {
                    let v = &f * &a[(k, j)];
                    a[(i, j)] -= v;
                }
                for r in k..n {
                    let v = &f * &a[(r, k)];
                    a[(r, i)] -= v;
                }
            }
            k += 1;
        }
        Ok((pos, neg, n - pos - neg))
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(format_rational).collect())
            .collect();
        write!(f, "RatMatrix{rows:?}")
    }
}

/// Singular values in descending order (empty for a matrix with a zero dimension).
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank with the two-cutoff consistency check.
pub fn float_rank(m: &DMatrix<f64>) -> Result<usize, LinalgError> {
    let s = singular_values(m);
    let Some(&max) = s.first() else { return Ok(0) };
    if max == 0.0 {
        return Ok(0);
    }
    let tight = s.iter().filter(|&&x| x > RANK_CUTOFF * max).count();
    let loose = s.iter().filter(|&&x| x > RANK_CUTOFF_LOOSE * max).count();
    if tight != loose {
        return Err(LinalgError::IllConditioned { tight, loose });
    }
    Ok(tight)
}

/// Orthonormal basis of the null space, as columns.
pub fn null_space(m: &DMatrix<f64>) -> Result<DMatrix<f64>, LinalgError> {
    let n = m.ncols();
    if m.nrows() == 0 {
        return Ok(DMatrix::identity(n, n));
    }
    let rank = float_rank(m)?;
    // right singular vectors of m^T m span the row space; use an SVD of the padded square matrix
    let padded = if m.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let kernel: Vec<usize> = order[rank..].to_vec();
    Ok(DMatrix::from_fn(n, kernel.len(), |i, j| v_t[(kernel[j], i)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn exact_rank_and_solve() {
        let m = RatMatrix::from_integers(&[vec![2, 0, 0, 1], vec![0, 3, 0, 1], vec![0, 0, 5, 1], vec![1, 1, 1, 1]])
            .unwrap();
        assert_eq!(m.rank(), 4);
        let x = m.solve_left(&[int(0), int(0), int(0), int(1)]).unwrap();
        assert_eq!(x, vec![int(15), int(10), int(6), int(-30)]);
    }

    #[test]
    fn inconsistent_system() {
        let m = RatMatrix::from_integers(&[vec![0, 2, 0, 0], vec![2, 6, 2, 0], vec![0, 2, 0, 0], vec![0, 0, 0, 8]])
            .unwrap();
        assert_eq!(m.rank(), 3);
        assert_eq!(
            m.solve_left(&[int(0), int(0), int(1), int(0)]),
            Err(LinalgError::NoSolution)
        );
    }

    #[test]
    fn inertia_with_zero_diagonal() {
        let m = RatMatrix::from_integers(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(m.inertia().unwrap(), (1, 1, 0));
        let m = RatMatrix::from_integers(&[vec![0, 2, 0, 0], vec![2, 6, 2, 0], vec![0, 2, 0, 0], vec![0, 0, 0, 8]])
            .unwrap();
        assert_eq!(m.inertia().unwrap(), (2, 1, 1));
        let z = RatMatrix::zeros(3, 3);
        assert_eq!(z.inertia().unwrap(), (0, 0, 3));
    }

    #[test]
    fn inertia_rational_entries() {
        let m = RatMatrix::from_rows(vec![
            vec![ratio(19, 22), ratio(1, 22)],
            vec![ratio(1, 22), ratio(7, 22)],
        ])
        .unwrap();
        assert_eq!(m.inertia().unwrap(), (2, 0, 0));
    }

    #[test]
    fn float_rank_band() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-7]);
        assert!(matches!(float_rank(&m), Err(LinalgError::IllConditioned { tight: 2, loose: 1 })));
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-12]);
        assert_eq!(float_rank(&m).unwrap(), 1);
        assert_eq!(float_rank(&DMatrix::<f64>::zeros(0, 3)).unwrap(), 0);
    }

    #[test]
    fn null_space_wide() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let k = null_space(&m).unwrap();
        assert_eq!(k.ncols(), 2);
        assert!((&m * &k).norm() < 1e-12);
    }
}
