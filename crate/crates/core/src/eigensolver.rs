//! Thick-restart Lanczos for the lowest eigenpairs of a real symmetric
//! operator.
//!
//! Every new Lanczos vector is orthogonalized twice against the whole basis,
//! so no spurious copies of converged Ritz values appear. When the basis is
//! full, the `k + p` lowest Ritz vectors (`p = max(4, k)`) are kept together
//! with the last residual direction and the recurrence continues from there.
//! Keeping the previous Ritz vectors in the basis makes the lowest Ritz value
//! non-increasing from one restart to the next.

use crate::error::{QremError, Result};
use crate::hamiltonian::SymmetricOperator;
use crate::linalg::{axpy, dot, norm, project, scale, subtract_combination, symmetric_eigen};
use crate::rng::{CounterRng, STREAM_START_VECTOR};

#[derive(Debug, Clone)]
pub struct LanczosOptions<'a> {
    /// Residual tolerance `‖H v - λ v‖` for each requested pair.
    pub tol: f64,
    /// Outer restart limit; `None` means `10 · log2(dim) · k`.
    pub max_restarts: Option<usize>,
    /// Seed of the pseudo-random starting vector.
    pub seed: u64,
    /// Optional warm start, e.g. the ground vector of a neighbouring field.
    pub start: Option<&'a [f64]>,
    pub want_vectors: bool,
}

impl Default for LanczosOptions<'_> {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_restarts: None,
            seed: 0x5eed,
            start: None,
            want_vectors: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    /// Explicit residual norms `‖H v_i - λ_i v_i‖`.
    pub residuals: Vec<f64>,
    pub converged: Vec<bool>,
    /// Matrix-vector products performed.
    pub iterations: usize,
    pub restarts: usize,
    /// Lowest Ritz value after each Rayleigh-Ritz step.
    pub ground_history: Vec<f64>,
}

impl EigenResult {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    pub fn gap(&self) -> Option<f64> {
        (self.eigenvalues.len() >= 2).then(|| self.eigenvalues[1] - self.eigenvalues[0])
    }
}

fn random_unit(dim: usize, seed: u64, counter: u64) -> Vec<f64> {
    let rng = CounterRng::new(seed, counter, STREAM_START_VECTOR);
    let mut v: Vec<f64> = (0..dim as u64).map(|i| rng.uniform(i) - 0.5).collect();
    let nv = norm(&v);
    scale(1.0 / nv, &mut v);
    v
}

/// Two passes of classical Gram-Schmidt; returns the accumulated coefficients.
fn orthogonalize(basis: &[Vec<f64>], w: &mut [f64]) -> Vec<f64> {
    // The newest vectors carry almost all of the overlap, so they go first;
    // then classical Gram-Schmidt against everything, repeated once if it
    // still cancelled most of `w` (the DGKS criterion).
    let mut coeffs = vec![0.0; basis.len()];
    for i in basis.len().saturating_sub(2)..basis.len() {
        let h = dot(&basis[i], w);
        axpy(-h, &basis[i], w);
        coeffs[i] += h;
    }
    for _ in 0..2 {
        let before = norm(w);
        let h = project(basis, w);
        subtract_combination(basis, &h, w);
        for (c, a) in coeffs.iter_mut().zip(h) {
            *c += a;
        }
        if norm(w) >= std::f64::consts::FRAC_1_SQRT_2 * before {
            break;
        }
    }
    coeffs
}

/// The `k` lowest eigenpairs of `op`.
///
/// If some pairs have not reached `tol` when the restart budget runs out, the
/// best estimates are returned with `converged[i] == false`.
pub fn lowest_eigenpairs<O: SymmetricOperator + ?Sized>(
    op: &O,
    k: usize,
    opts: &LanczosOptions<'_>,
) -> Result<EigenResult> {
    let dim = op.dim();
    if k == 0 || k > dim {
        return Err(QremError::domain(format!(
            "requested {k} eigenpairs of a {dim}-dimensional operator"
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(QremError::domain(format!("tolerance {} must be positive", opts.tol)));
    }
    let retain = (k + k.max(4)).min(dim);
    let m = (2 * retain).max(retain + 12).min(dim);
    let max_restarts = opts
        .max_restarts
        .unwrap_or_else(|| (10 * (dim.trailing_zeros() as usize).max(1) * k).max(50));

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut fresh = 0u64;
    let v0 = match opts.start {
        Some(s) if s.len() == dim && norm(s) > 0.0 => {
            let mut v = s.to_vec();
            scale(1.0 / norm(&v), &mut v);
            v
        }
        Some(s) if s.len() != dim => {
            return Err(QremError::Dimension {
                expected: dim,
                got: s.len(),
            })
        }
        _ => {
            fresh += 1;
            random_unit(dim, opts.seed, 0)
        }
    };
    basis.push(v0);

    let mut t = vec![0.0; m * m];
    let mut w = vec![0.0; dim];
    let mut matvecs = 0usize;
    let mut restarts = 0usize;
    let mut anorm = 0.0f64;
    let mut history = Vec::new();

    loop {
        // Extend the basis to m vectors.
        let mut beta;
        let mut j = basis.len() - 1;
        loop {
            op.apply(&basis[j], &mut w);
            matvecs += 1;
            let h = orthogonalize(&basis, &mut w);
            for (i, &hi) in h.iter().enumerate() {
                t[i * m + j] = hi;
                t[j * m + i] = hi;
                anorm = anorm.max(hi.abs());
            }
            beta = norm(&w);
            anorm = anorm.max(beta);
            if j + 1 == m || (j >= k && estimates_within(&t, m, j + 1, beta, k, opts.tol)) {
                break;
            }
            if beta <= 1e-12 * anorm.max(f64::MIN_POSITIVE) {
                // Invariant subspace: continue with a fresh direction.
                if basis.len() == dim {
                    beta = 0.0;
                    break;
                }
                let mut r = random_unit(dim, opts.seed, fresh);
                fresh += 1;
                orthogonalize(&basis, &mut r);
                let nr = norm(&r);
                scale(1.0 / nr, &mut r);
                basis.push(r);
            } else {
                let mut next = w.clone();
                scale(1.0 / beta, &mut next);
                basis.push(next);
            }
            j += 1;
        }

        let size = basis.len();
        let (theta, u) = symmetric_eigen(&leading_block(&t, m, size), size);
        history.push(theta[0]);
        let exact = size == dim;
        let estimates: Vec<f64> = (0..k).map(|i| (beta * u[(size - 1) * size + i]).abs()).collect();
        let estimated_ok = exact || estimates.iter().all(|&e| e <= opts.tol);
        let out_of_budget = restarts >= max_restarts;

        if estimated_ok || out_of_budget {
            let vectors = ritz_vectors(&basis, &u, size, k);
            let mut residuals = Vec::with_capacity(k);
            let mut scratch = vec![0.0; dim];
            for (i, x) in vectors.iter().enumerate() {
                op.apply(x, &mut scratch);
                matvecs += 1;
                axpy(-theta[i], x, &mut scratch);
                residuals.push(norm(&scratch));
            }
            let converged: Vec<bool> = residuals.iter().map(|&r| r <= opts.tol).collect();
            if exact || out_of_budget || converged.iter().all(|&c| c) {
                return Ok(EigenResult {
                    eigenvalues: theta[..k].to_vec(),
                    eigenvectors: opts.want_vectors.then_some(vectors),
                    residuals,
                    converged,
                    iterations: matvecs,
                    restarts,
                    ground_history: history,
                });
            }
        }

        // Thick restart: keep the lowest Ritz vectors plus the residual direction.
        let keep = retain.min(size - 1);
        let mut kept = ritz_vectors(&basis, &u, size, keep);
        t.iter_mut().for_each(|x| *x = 0.0);
        for (i, &th) in theta.iter().take(keep).enumerate() {
            t[i * m + i] = th;
        }
        let mut next = w.clone();
        if beta > 0.0 {
            scale(1.0 / beta, &mut next);
        } else {
            next = random_unit(dim, opts.seed, fresh);
            fresh += 1;
            orthogonalize(&kept, &mut next);
            let nn = norm(&next);
            scale(1.0 / nn, &mut next);
        }
        kept.push(next);
        basis = kept;
        restarts += 1;
    }
}

/// Whether the Lanczos residual estimates of the `k` lowest Ritz pairs of
/// the leading `size × size` block of `t` are all within `tol`.
fn estimates_within(t: &[f64], m: usize, size: usize, beta: f64, k: usize, tol: f64) -> bool {
    let proj = leading_block(t, m, size);
    let (_, u) = symmetric_eigen(&proj, size);
    (0..k).all(|i| (beta * u[(size - 1) * size + i]).abs() <= tol)
}

fn leading_block(t: &[f64], m: usize, size: usize) -> Vec<f64> {
    let mut proj = vec![0.0; size * size];
    for r in 0..size {
        proj[r * size..(r + 1) * size].copy_from_slice(&t[r * m..r * m + size]);
    }
    proj
}

fn ritz_vectors(basis: &[Vec<f64>], u: &[f64], size: usize, count: usize) -> Vec<Vec<f64>> {
    let dim = basis[0].len();
    (0..count)
        .map(|i| {
            let mut x = vec![0.0; dim];
            let coeffs: Vec<f64> = (0..size).map(|r| -u[r * size + i]).collect();
            subtract_combination(&basis[..size], &coeffs, &mut x);
            let nx = norm(&x);
            scale(1.0 / nx, &mut x);
            x
        })
        .collect()
}
