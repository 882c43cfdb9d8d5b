//! Small dense helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::Serialize;

use crate::error::{FinslerError, Result};

/// Dense rank-3 array `T[i][j][k]` with all indices running over `0..n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Self {
        Tensor3 {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.n + j) * self.n + k] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    /// max |self - other|, or max |self + other| when `odd` is set.
    pub fn max_diff(&self, other: &Tensor3, odd: bool) -> f64 {
        let s = if odd { -1.0 } else { 1.0 };
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - s * b).abs())
            .fold(0.0, f64::max)
    }

    /// Contracts the first index with `v`: `Σ_i v^i T[i][j][k]`.
    pub fn contract_first(&self, v: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |j, k| (0..n).map(|i| v[i] * self.get(i, j, k)).sum())
    }
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn matrix_max_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalized(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    a.iter().map(|v| v / n).collect()
}

/// Angle between two directions, in `[0, π]`.
pub fn angle(a: &[f64], b: &[f64]) -> f64 {
    // half-angle form stays accurate for nearly parallel and antiparallel vectors
    let (ua, ub) = (normalized(a), normalized(b));
    let diff: Vec<f64> = ua.iter().zip(&ub).map(|(p, q)| p - q).collect();
    let sum: Vec<f64> = ua.iter().zip(&ub).map(|(p, q)| p + q).collect();
    2.0 * norm(&diff).atan2(norm(&sum))
}

/// Cholesky factor of a matrix that must be symmetric positive definite at direction `y`.
pub fn spd_factor(g: &DMatrix<f64>, y: &[f64]) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(g.clone()).ok_or_else(|| FinslerError::MetricValidity {
        y: y.to_vec(),
        reason: "fundamental tensor is not positive definite".into(),
    })
}

pub fn to_dvector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

/// `uᵀ M v`.
pub fn bilinear(m: &DMatrix<f64>, u: &[f64], v: &[f64]) -> f64 {
    let n = u.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += u[i] * m[(i, j)] * v[j];
        }
    }
    acc
}

pub fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (m * to_dvector(v)).as_slice().to_vec()
}

/// Solves `A x = b` for a general square matrix.
pub fn solve(a: &DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    a.clone()
        .lu()
        .solve(&to_dvector(b))
        .map(|x| x.as_slice().to_vec())
        .ok_or_else(|| FinslerError::Numerical("singular linear system".into()))
}
