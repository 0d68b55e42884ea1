//! Data matrices, the centered unbiased sample covariance and linear shrinkage.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{sym_eigenvalues, SymMatrix};
use crate::rmt::ShrinkageParams;

/// `n × p` observations in rows, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    p: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    /// Validates shape and finiteness. At least two rows are required.
    pub fn new(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * p {
            return Err(Error::DimensionMismatch {
                expected: n * p,
                found: values.len(),
            });
        }
        if n < 2 {
            return Err(Error::TooFewObservations { n, required: 2 });
        }
        if p == 0 {
            return Err(Error::Domain("data must have at least one column"));
        }
        if let Some(idx) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                row: idx / p,
                col: idx % p,
            });
        }
        Ok(Self { n, p, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * p);
        for r in rows {
            if r.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), p, values)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.p];
        for i in 0..self.n {
            for (m, x) in mean.iter_mut().zip(self.row(i)) {
                *m += x;
            }
        }
        let inv = 1.0 / self.n as f64;
        mean.iter_mut().for_each(|m| *m *= inv);
        mean
    }

    /// Copy with each column mean subtracted.
    pub fn centered(&self) -> Self {
        let mean = self.column_means();
        let mut values = self.values.clone();
        for row in values.chunks_exact_mut(self.p) {
            for (x, m) in row.iter_mut().zip(&mean) {
                *x -= m;
            }
        }
        Self {
            n: self.n,
            p: self.p,
            values,
        }
    }

    /// `X Q` for a `p × p` row-major `q`.
    pub fn rotate_columns(&self, q: &[f64]) -> Result<Self> {
        let p = self.p;
        if q.len() != p * p {
            return Err(Error::DimensionMismatch {
                expected: p * p,
                found: q.len(),
            });
        }
        let mut values = vec![0.0; self.n * p];
        for i in 0..self.n {
            let out = &mut values[i * p..(i + 1) * p];
            for (k, &x) in self.row(i).iter().enumerate() {
                for (o, &qv) in out.iter_mut().zip(&q[k * p..(k + 1) * p]) {
                    *o += x * qv;
                }
            }
        }
        Self::new(self.n, p, values)
    }
}

/// `S = (1/(n−1)) Σ (x_i − x̄)(x_i − x̄)ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCovariance {
    pub matrix: SymMatrix,
    /// Divisor `n − 1`.
    pub n_tilde: usize,
}

impl SampleCovariance {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Sample eigenvalues `l_1 ≥ … ≥ l_p`.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        sym_eigenvalues(&self.matrix)
    }
}

/// `λS + (1 − λ)I`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShrunkenCovariance {
    pub matrix: SymMatrix,
    pub lambda: f64,
}

pub fn sample_covariance(data: &DataMatrix) -> SampleCovariance {
    let (n, p) = (data.n(), data.p());
    let mean = data.column_means();
    // centered columns, contiguous
    let mut cols = vec![0.0; n * p];
    for i in 0..n {
        for (j, (x, m)) in data.row(i).iter().zip(&mean).enumerate() {
            cols[j * n + i] = x - m;
        }
    }
    let inv = 1.0 / (n - 1) as f64;
    let mut acc = vec![0.0; p * p];
    for j in 0..p {
        let cj = &cols[j * n..(j + 1) * n];
        for k in j..p {
            let v = dot(cj, &cols[k * n..(k + 1) * n]) * inv;
            acc[j * p + k] = v;
            acc[k * p + j] = v;
        }
    }
    SampleCovariance {
        matrix: SymMatrix::from_row_major(p, acc).expect("p×p buffer"),
        n_tilde: n - 1,
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    let mut s = [0.0; 4];
    let xs = x.chunks_exact(4);
    let ys = y.chunks_exact(4);
    let tail: f64 = xs
        .remainder()
        .iter()
        .zip(ys.remainder())
        .map(|(a, b)| a * b)
        .sum();
    for (a, b) in xs.zip(ys) {
        for r in 0..4 {
            s[r] += a[r] * b[r];
        }
    }
    (s[0] + s[1]) + (s[2] + s[3]) + tail
}

pub fn shrink(s: &SampleCovariance, params: ShrinkageParams) -> ShrunkenCovariance {
    let lambda = params.lambda();
    let p = s.dim();
    let matrix = SymMatrix::from_fn(p, |i, j| {
        let v = lambda * s.matrix.get(i, j);
        if i == j {
            v + (1.0 - lambda)
        } else {
            v
        }
    });
    ShrunkenCovariance { matrix, lambda }
}
