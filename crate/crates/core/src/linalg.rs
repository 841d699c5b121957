//! Small dense helpers used by the Krylov solver.

use rayon::prelude::*;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four partial sums; keeps the reduction order fixed and vectorizable.
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

const BLOCK: usize = 4096;

/// Coefficients `V^T w` for the rows `V` of `basis`, reading each basis
/// vector once. Per-block partial sums are combined in a fixed order.
pub(crate) fn project(basis: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    let partials: Vec<Vec<f64>> = w
        .par_chunks(BLOCK)
        .enumerate()
        .map(|(b, wc)| {
            let lo = b * BLOCK;
            basis.iter().map(|v| dot(&v[lo..lo + wc.len()], wc)).collect()
        })
        .collect();
    let mut h = vec![0.0; basis.len()];
    for p in &partials {
        for (hi, pi) in h.iter_mut().zip(p) {
            *hi += pi;
        }
    }
    h
}

/// `w -= V h`.
pub(crate) fn subtract_combination(basis: &[Vec<f64>], h: &[f64], w: &mut [f64]) {
    w.par_chunks_mut(BLOCK).enumerate().for_each(|(b, wc)| {
        let lo = b * BLOCK;
        for (v, &hi) in basis.iter().zip(h) {
            axpy(-hi, &v[lo..lo + wc.len()], wc);
        }
    });
}

pub(crate) fn scale(alpha: f64, x: &mut [f64]) {
    for xi in x {
        *xi *= alpha;
    }
}

/// Eigen-decomposition of a small symmetric matrix (row-major, `m × m`) by
/// cyclic Jacobi rotations. Returns eigenvalues ascending and the matching
/// eigenvectors as columns of a row-major `m × m` matrix.
pub(crate) fn symmetric_eigen(a: &[f64], m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = a.to_vec();
    let mut v = vec![0.0; m * m];
    for i in 0..m {
        v[i * m + i] = 1.0;
    }
    let scale = a.iter().fold(0.0f64, |s, x| s.max(x.abs())).max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..m {
            for q in p + 1..m {
                off += a[p * m + q] * a[p * m + q];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[p * m + p];
                let aqq = a[q * m + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
                for k in 0..m {
                    let vkp = v[k * m + p];
                    let vkq = v[k * m + q];
                    v[k * m + p] = c * vkp - s * vkq;
                    v[k * m + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| a[i * m + i].total_cmp(&a[j * m + j]));
    let values = order.iter().map(|&i| a[i * m + i]).collect();
    let mut vectors = vec![0.0; m * m];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..m {
            vectors[row * m + col] = v[row * m + src];
        }
    }
    (values, vectors)
}
