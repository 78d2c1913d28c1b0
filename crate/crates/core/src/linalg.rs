//! Row-major dense matrices and the few factorizations the solvers need.
//!
//! Storage and mat-vec are local; LU factorization and inversion are
//! delegated to `nalgebra`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Rows at or above this size are multiplied in parallel.
const PAR_THRESHOLD: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from row-major data.
    pub fn from_rows(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::LengthMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    /// Fills row `i` with `f(i, j)` for every column, rows in parallel.
    pub fn from_fn<F>(n: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        let mut data = vec![0.0; n * n];
        if n == 0 {
            return Self { n, data };
        }
        data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(i, j);
            }
        });
        Self { n, data }
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn scale_column(&mut self, j: usize, factor: f64) {
        for i in 0..self.n {
            self.data[i * self.n + j] *= factor;
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }

    /// `y = self * x`
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        let dot = |row: &[f64]| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        if self.n >= PAR_THRESHOLD {
            y.par_iter_mut()
                .zip(self.data.par_chunks(self.n))
                .for_each(|(yi, row)| *yi = dot(row));
        } else {
            for (yi, row) in y.iter_mut().zip(self.data.chunks(self.n)) {
                *yi = dot(row);
            }
        }
    }

    /// `y = (self + diag(d)) * x`
    pub fn matvec_plus_diag(&self, d: &[f64], x: &[f64], y: &mut [f64]) {
        self.matvec(x, y);
        for ((yi, di), xi) in y.iter_mut().zip(d).zip(x) {
            *yi += di * xi;
        }
    }

    /// Principal submatrix on the given index set (in the given order).
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let m = idx.len();
        Self::from_fn(m, |a, b| self.get(idx[a], idx[b]))
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        Self::from_fn(n, |i, j| m[(i, j)])
    }

    /// `self + diag(d)` as a new matrix.
    pub fn plus_diag(&self, d: &[f64]) -> Self {
        let mut out = self.clone();
        for (i, di) in d.iter().enumerate() {
            out.data[i * self.n + i] += di;
        }
        out
    }
}

/// LU factorization of a dense matrix, reusable across right-hand sides.
pub struct Lu {
    inner: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    n: usize,
}

impl Lu {
    pub fn new(m: &DenseMatrix) -> Result<Self> {
        let inner = m.to_nalgebra().lu();
        if !inner.is_invertible() {
            return Err(Error::Singular("LU factorization hit a zero pivot".into()));
        }
        let n = m.size();
        // Reject numerically singular factors as well as exact ones.
        let u = inner.u();
        let (mut dmin, mut dmax) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let d = u[(i, i)].abs();
            dmin = dmin.min(d);
            dmax = dmax.max(d);
        }
        if n > 0 && dmin <= dmax * 1e-14 {
            return Err(Error::Singular(format!(
                "pivot ratio {:e} below 1e-14",
                dmin / dmax
            )));
        }
        Ok(Self { inner, n })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: b.len(),
            });
        }
        let rhs = DVector::from_column_slice(b);
        self.inner
            .solve(&rhs)
            .map(|x| x.as_slice().to_vec())
            .ok_or_else(|| Error::Singular("LU solve failed".into()))
    }

    pub fn inverse(&self) -> Result<DenseMatrix> {
        self.inner
            .try_inverse()
            .map(|m| DenseMatrix::from_nalgebra(&m))
            .ok_or_else(|| Error::Singular("matrix inverse failed".into()))
    }
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}
