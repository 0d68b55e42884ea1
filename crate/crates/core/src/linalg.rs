//! Dense symmetric matrices and their spectra.
//!
//! The eigensolver reduces to tridiagonal form with Householder reflections
//! and then runs implicit-shift QL iterations (the classic `tred2`/`tql2`
//! pair). Eigenvectors are accumulated only when asked for.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Row-major `dim × dim` matrix that is expected to be symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Wraps row-major data. Symmetry is checked lazily by the consumers.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![1.0; dim])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * m.dim + i] = d;
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(dim: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| m.max(libm::fabs(x)))
    }

    /// Largest `|m_ij − m_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                worst = worst.max(libm::fabs(self.get(i, j) - self.get(j, i)));
            }
        }
        worst
    }

    /// Replaces the matrix by `(M + Mᵀ)/2`.
    pub fn symmetrize(&mut self) {
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let avg = 0.5 * (self.get(i, j) + self.get(j, i));
                self.set(i, j, avg);
                self.set(j, i, avg);
            }
        }
    }

    /// `Qᵀ M Q` for a square `q` in row-major order.
    pub fn congruence(&self, q: &[f64]) -> Result<Self> {
        let n = self.dim;
        if q.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: q.len(),
            });
        }
        let mut mq = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let mik = self.data[i * n + k];
                for j in 0..n {
                    mq[i * n + j] += mik * q[k * n + j];
                }
            }
        }
        let mut out = vec![0.0; n * n];
        for k in 0..n {
            for i in 0..n {
                let qki = q[k * n + i];
                for j in 0..n {
                    out[i * n + j] += qki * mq[k * n + j];
                }
            }
        }
        Ok(Self { dim: n, data: out })
    }

    fn checked_copy(&self) -> Result<Vec<f64>> {
        let scale = self.max_abs().max(1.0);
        if self.asymmetry() > 1e-9 * scale || self.data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NotSymmetric);
        }
        let mut m = self.clone();
        m.symmetrize();
        Ok(m.data)
    }
}

/// Eigenvalues in descending order with matching unit eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Row-major; column `k` is the eigenvector of `values[k]`.
    pub vectors: Vec<f64>,
}

/// Full spectrum of a symmetric matrix, largest first.
pub fn sym_eigenvalues(m: &SymMatrix) -> Result<Vec<f64>> {
    let n = m.dim();
    let mut a = m.checked_copy()?;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize_values(&mut a, n, &mut d, &mut e);
    ql_implicit(&mut a, n, &mut d, &mut e, false)?;
    d.sort_by(|x, y| y.total_cmp(x));
    Ok(d)
}

/// Eigenvalues (descending) and eigenvectors of a symmetric matrix.
pub fn sym_eigen(m: &SymMatrix) -> Result<SymEigen> {
    let n = m.dim();
    let mut v = m.checked_copy()?;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, n, &mut d, &mut e, true);
    ql_implicit(&mut v, n, &mut d, &mut e, true)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[y].total_cmp(&d[x]));
    let values = order.iter().map(|&k| d[k]).collect();
    let mut vectors = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + dst] = v[r * n + src];
        }
    }
    Ok(SymEigen { values, vectors })
}

// Householder reduction to tridiagonal form. On return `d` holds the diagonal
// and `e[1..]` the subdiagonal; with `vectors` the orthogonal transform is
// left in `v`.
fn tridiagonalize(v: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64], vectors: bool) {
    if n == 0 {
        return;
    }
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for &dk in &d[..i] {
            scale += libm::fabs(dk);
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
                v[j * n + i] = 0.0;
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in &mut e[..i] {
                *ej = 0.0;
            }
            for j in 0..i {
                let f = d[j];
                v[j * n + i] = f;
                let mut g = e[j] + v[j * n + j] * f;
                for k in (j + 1)..i {
                    let vkj = v[k * n + j];
                    g += vkj * d[k];
                    e[k] += vkj * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    v[k * n + j] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
            }
        }
        d[i] = h;
    }

    if !vectors {
        for i in 0..n {
            d[i] = v[i * n + i];
        }
        e[0] = 0.0;
        return;
    }

    for i in 0..n - 1 {
        v[(n - 1) * n + i] = v[i * n + i];
        v[i * n + i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k * n + i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k * n + i + 1] * v[k * n + j];
                }
                for k in 0..=i {
                    v[k * n + j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k * n + i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
        v[(n - 1) * n + j] = 0.0;
    }
    v[(n - 1) * n + n - 1] = 1.0;
    e[0] = 0.0;
}

// Same reduction as `tridiagonalize` without the transform. The active
// lower triangle is read through its mirror in the upper triangle so that
// the inner loops run along rows.
fn tridiagonalize_values(a: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64]) {
    if n == 0 {
        return;
    }
    for j in 0..n {
        d[j] = a[j * n + n - 1];
    }
    for i in (1..n).rev() {
        let scale: f64 = d[..i].iter().map(|x| libm::fabs(*x)).sum();
        let mut h = 0.0;
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = a[j * n + i - 1];
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].iter_mut().for_each(|x| *x = 0.0);
            for j in 0..i {
                let f = d[j];
                let row = &a[j * n..j * n + i];
                let mut g = e[j] + row[j] * f;
                for k in (j + 1)..i {
                    g += row[k] * d[k];
                    e[k] += row[k] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                let row = &mut a[j * n..j * n + i];
                for k in j..i {
                    row[k] -= f * e[k] + g * d[k];
                }
                d[j] = a[j * n + i - 1];
            }
        }
        d[i] = h;
    }
    for i in 0..n {
        d[i] = a[i * n + i];
    }
    e[0] = 0.0;
}

// Implicit-shift QL on the tridiagonal (d, e). Rotations are applied to `v`
// when `vectors` is set.
fn ql_implicit(v: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64], vectors: bool) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let max_iter = 30 * n.max(2);
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(libm::fabs(d[l]) + libm::fabs(e[l]));
        let mut m = l;
        while m < n - 1 {
            if libm::fabs(e[m]) <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::NoConvergence);
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in &mut d[(l + 2)..n] {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if vectors {
                        for k in 0..n {
                            let row = k * n;
                            let h = v[row + i + 1];
                            v[row + i + 1] = s * v[row + i] + c * h;
                            v[row + i] = c * v[row + i] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if libm::fabs(e[l]) <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::NoConvergence);
    }
    Ok(())
}
