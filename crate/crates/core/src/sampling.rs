//! Multivariate normal draws and keyed random streams.
//!
//! Every replication of a Monte Carlo experiment owns its own ChaCha8 stream,
//! keyed by the master seed and addressed by `(cell, replication)`. Results
//! therefore do not depend on how replications are scheduled.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rand_distr::{Distribution, StandardNormal};

use crate::covariance::DataMatrix;
use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, SymMatrix};

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random stream for replication `replication` of cell `cell`.
///
/// The 256-bit ChaCha key is expanded from `master_seed`; the stream id packs
/// the cell index in the high 32 bits and the replication in the low 32 bits.
pub fn stream_rng(master_seed: u64, cell: u32, replication: u32) -> ChaCha8Rng {
    let mut state = master_seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream((u64::from(cell) << 32) | u64::from(replication));
    rng
}

#[derive(Debug, Clone)]
enum Factor {
    /// `Σ^{1/2} = I + Σ_k c_k u_k u_kᵀ`; `dirs` holds the `u_k` as rows.
    LowRank { dirs: Vec<f64>, coef: Vec<f64> },
    /// Dense row-major `Σ^{1/2}`.
    Dense(Vec<f64>),
}

/// Draws rows `x = Σ^{1/2} z`, `z ~ N(0, I)`, with the symmetric square root.
///
/// When `Σ` differs from the identity only on a few eigen-directions the
/// square root is kept in low-rank form, so a row costs `O(p·r)` instead of `O(p²)`.
#[derive(Debug, Clone)]
pub struct MvnSampler {
    p: usize,
    factor: Factor,
}

impl MvnSampler {
    pub fn new(sigma: &SymMatrix) -> Result<Self> {
        let p = sigma.dim();
        if p == 0 {
            return Err(Error::Domain("covariance must be at least 1×1"));
        }
        let eig = sym_eigen(sigma)?;
        let floor = -1e-10 * sigma.max_abs().max(1.0);
        if eig.values.iter().any(|&l| l < floor) {
            return Err(Error::NotPositiveSemidefinite);
        }
        let roots: Vec<f64> = eig.values.iter().map(|&l| libm::sqrt(l.max(0.0))).collect();
        let deviating: Vec<usize> = (0..p)
            .filter(|&k| libm::fabs(roots[k] - 1.0) > 1e-12)
            .collect();

        let factor = if 4 * deviating.len() <= p {
            let mut dirs = Vec::with_capacity(deviating.len() * p);
            let mut coef = Vec::with_capacity(deviating.len());
            for &k in &deviating {
                dirs.extend((0..p).map(|r| eig.vectors[r * p + k]));
                coef.push(roots[k] - 1.0);
            }
            Factor::LowRank { dirs, coef }
        } else {
            let mut dense = vec![0.0; p * p];
            for i in 0..p {
                for j in 0..p {
                    dense[i * p + j] = (0..p)
                        .map(|k| eig.vectors[i * p + k] * roots[k] * eig.vectors[j * p + k])
                        .sum();
                }
            }
            Factor::Dense(dense)
        };
        Ok(Self { p, factor })
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    /// Writes one draw into `out` using `z` as scratch.
    fn draw_row<R: RngCore + ?Sized>(&self, rng: &mut R, z: &mut [f64], out: &mut [f64]) {
        for v in z.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        match &self.factor {
            Factor::LowRank { dirs, coef } => {
                out.copy_from_slice(z);
                for (u, &c) in dirs.chunks_exact(self.p).zip(coef) {
                    let proj: f64 = u.iter().zip(z.iter()).map(|(a, b)| a * b).sum();
                    let w = c * proj;
                    for (o, &ui) in out.iter_mut().zip(u) {
                        *o += w * ui;
                    }
                }
            }
            Factor::Dense(f) => {
                for (o, row) in out.iter_mut().zip(f.chunks_exact(self.p)) {
                    *o = row.iter().zip(z.iter()).map(|(a, b)| a * b).sum();
                }
            }
        }
    }

    /// `n` independent rows from `N(0, Σ)`.
    pub fn sample<R: RngCore + ?Sized>(&self, n: usize, rng: &mut R) -> Result<DataMatrix> {
        let p = self.p;
        let mut values = vec![0.0; n * p];
        let mut z = vec![0.0; p];
        for row in values.chunks_exact_mut(p) {
            self.draw_row(rng, &mut z, row);
        }
        DataMatrix::new(n, p, values)
    }
}

/// `n` rows from `N(0, sigma)`.
pub fn sample_mvn<R: RngCore + ?Sized>(n: usize, sigma: &SymMatrix, rng: &mut R) -> Result<DataMatrix> {
    MvnSampler::new(sigma)?.sample(n, rng)
}
