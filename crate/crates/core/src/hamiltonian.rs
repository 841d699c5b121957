//! Matrix-free transverse-field Hamiltonian on the `n`-cube.
//!
//! `H = diag(E) - Γ Σ_i σ^x_i`. Basis state `α` stores spin `i` in bit `i`,
//! so the single-flip neighbours of `α` are `α ^ (1 << i)`. With the minus
//! sign the ground state of the transverse term is the uniform superposition
//! at energy `-nΓ`.

use std::io::Write;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QremError, Result};
use crate::rem::RemInstance;

/// Largest `n` for which [`FieldedHamiltonian::dense_matrix`] will allocate.
pub const MAX_DENSE_SPINS: usize = 12;

/// Chunk size for the blocked matrix-vector product.
const CHUNK_BITS: usize = 12;

/// Scalar types the Hamiltonian can act on.
pub trait Amplitude:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
}

impl Amplitude for f64 {}
impl Amplitude for Complex64 {}

/// A real symmetric operator that can be applied to a vector.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

#[derive(Debug, Clone, Copy)]
pub struct FieldedHamiltonian<'a> {
    instance: &'a RemInstance,
    gamma: f64,
}

impl<'a> FieldedHamiltonian<'a> {
    pub fn new(instance: &'a RemInstance, gamma: f64) -> Self {
        Self { instance, gamma }
    }

    pub fn instance(&self) -> &'a RemInstance {
        self.instance
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n(&self) -> usize {
        self.instance.n()
    }

    /// Upper bound on the spectral radius, `max|E| + n|Γ|`.
    pub fn norm_bound(&self) -> f64 {
        self.instance.max_abs_energy() + self.n() as f64 * self.gamma.abs()
    }

    /// `y = H x`. Cost `O(n 2^n)`, no allocation.
    pub fn apply_into<T: Amplitude>(&self, x: &[T], y: &mut [T]) -> Result<()> {
        let dim = self.instance.dim();
        if x.len() != dim {
            return Err(QremError::Dimension {
                expected: dim,
                got: x.len(),
            });
        }
        if y.len() != dim {
            return Err(QremError::Dimension {
                expected: dim,
                got: y.len(),
            });
        }
        self.apply_unchecked(x, y);
        Ok(())
    }

    /// Allocating variant of [`apply_into`](Self::apply_into).
    pub fn apply<T: Amplitude>(&self, x: &[T]) -> Result<Vec<T>> {
        let mut y = x.to_vec();
        self.apply_into(x, &mut y)?;
        Ok(y)
    }

    fn apply_unchecked<T: Amplitude>(&self, x: &[T], y: &mut [T]) {
        let n = self.n();
        let energies = self.instance.energies();
        let gamma = self.gamma;
        let chunk_bits = CHUNK_BITS.min(n);
        let chunk = 1usize << chunk_bits;

        y.par_chunks_mut(chunk).enumerate().for_each(|(c, out)| {
            let base = c * chunk;
            for (j, o) in out.iter_mut().enumerate() {
                *o = x[base + j] * energies[base + j];
            }
            if gamma == 0.0 {
                return;
            }
            let xs = &x[base..base + chunk];
            // Flips inside the chunk: swap the two halves of each block.
            for bit in 0..chunk_bits {
                let half = 1usize << bit;
                for block in (0..chunk).step_by(2 * half) {
                    for j in 0..half {
                        let lo = block + j;
                        let hi = lo + half;
                        out[lo] = out[lo] - xs[hi] * gamma;
                        out[hi] = out[hi] - xs[lo] * gamma;
                    }
                }
            }
            // Flips of higher bits map the chunk onto another contiguous chunk.
            for bit in chunk_bits..n {
                let partner = base ^ (1usize << bit);
                let xp = &x[partner..partner + chunk];
                for (o, &v) in out.iter_mut().zip(xp) {
                    *o = *o - v * gamma;
                }
            }
        });
    }

    /// Explicit `2^n × 2^n` matrix, for oracle checks at small `n`.
    pub fn dense_matrix(&self) -> Result<DenseMatrix> {
        let n = self.n();
        if n > MAX_DENSE_SPINS {
            return Err(QremError::Capacity {
                what: "dense Hamiltonian",
                n,
                max: MAX_DENSE_SPINS,
            });
        }
        let dim = self.instance.dim();
        let mut data = vec![0.0; dim * dim];
        for (alpha, &e) in self.instance.energies().iter().enumerate() {
            data[alpha * dim + alpha] = e;
            for bit in 0..n {
                data[alpha * dim + (alpha ^ (1 << bit))] = -self.gamma;
            }
        }
        Ok(DenseMatrix { dim, data })
    }
}

impl SymmetricOperator for FieldedHamiltonian<'_> {
    fn dim(&self) -> usize {
        self.instance.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.instance.dim());
        assert_eq!(y.len(), self.instance.dim());
        self.apply_unchecked(x, y);
    }
}

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.data
            .chunks(self.dim)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl SymmetricOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (out, row) in y.iter_mut().zip(self.data.chunks(self.dim)) {
            *out = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

/// Normalized complex amplitudes over the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(QremError::domain(format!(
                "state length {len} is not a power of two >= 2"
            )));
        }
        let mut state = Self {
            n: len.trailing_zeros() as usize,
            amplitudes,
        };
        let norm = state.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(QremError::domain("state has zero or non-finite norm"));
        }
        state.normalize();
        Ok(state)
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::from_amplitudes(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn basis(n: usize, alpha: usize) -> Result<Self> {
        let dim = 1usize << n;
        if alpha >= dim {
            return Err(QremError::Dimension {
                expected: dim,
                got: alpha,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[alpha] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amplitudes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let inv = 1.0 / self.norm();
        for a in &mut self.amplitudes {
            *a *= inv;
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &QuantumState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn probability(&self, alpha: usize) -> f64 {
        self.amplitudes[alpha].norm_sqr()
    }

    /// Raw snapshot: little-endian `(re, im)` pairs of `f64` in basis order,
    /// plus a JSON sidecar `{n, gamma, time}`.
    pub fn write_snapshot<W: Write, S: Write>(
        &self,
        gamma: f64,
        time: f64,
        mut raw: W,
        sidecar: S,
    ) -> Result<()> {
        for a in &self.amplitudes {
            raw.write_all(&a.re.to_le_bytes())?;
            raw.write_all(&a.im.to_le_bytes())?;
        }
        serde_json::to_writer_pretty(
            sidecar,
            &SnapshotMeta {
                n: self.n,
                gamma,
                time,
            },
        )?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub n: usize,
    pub gamma: f64,
    pub time: f64,
}

/// Ground state of the transverse term: the uniform superposition.
pub fn qp_ground_state(n: usize) -> QuantumState {
    let dim = 1usize << n;
    let amp = Complex64::new((dim as f64).sqrt().recip(), 0.0);
    QuantumState {
        n,
        amplitudes: vec![amp; dim],
    }
}
