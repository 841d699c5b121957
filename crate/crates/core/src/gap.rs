//! Spectra versus transverse field, the minimal gap of a single instance, and
//! its scaling over an ensemble of instances.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolver::{lowest_eigenpairs, EigenResult, LanczosOptions};
use crate::error::{QremError, Result};
use crate::golden;
use crate::hamiltonian::FieldedHamiltonian;
use crate::perturbation::minimal_gap_prediction;
use crate::rem::RemInstance;
use crate::rng::ensemble_seed;
use crate::stats::{linear_fit, LinearFit, Summary};

/// Grid resolution of the fallback scan for non-unimodal gap curves.
pub const FALLBACK_GRID_POINTS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCurve {
    pub gammas: Vec<f64>,
    /// `levels[i][p]` is the `i`-th eigenvalue at `gammas[p]`.
    pub levels: Vec<Vec<f64>>,
    /// Residual norms, indexed like `levels`.
    pub residuals: Vec<Vec<f64>>,
    /// Per grid point: all requested levels reached the tolerance.
    pub converged: Vec<bool>,
}

impl SpectrumCurve {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.levels[1]
            .iter()
            .zip(&self.levels[0])
            .map(|(a, b)| a - b)
            .collect()
    }
}

/// Solves one field value, warm-starting from the sum of previous vectors.
fn solve_point(
    instance: &RemInstance,
    gamma: f64,
    k: usize,
    tol: f64,
    start: Option<&[f64]>,
) -> Result<EigenResult> {
    let h = FieldedHamiltonian::new(instance, gamma);
    let opts = LanczosOptions {
        tol,
        start,
        want_vectors: true,
        ..Default::default()
    };
    lowest_eigenpairs(&h, k, &opts)
}

fn warm_vector(result: &EigenResult) -> Option<Vec<f64>> {
    let vectors = result.eigenvectors.as_ref()?;
    let mut sum = vectors[0].clone();
    for v in &vectors[1..] {
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
    }
    Some(sum)
}

/// The `k` lowest levels at every field in `gammas`.
///
/// With `warm_start`, each solve starts from the superposition of the
/// previous point's eigenvectors. Non-converged points are flagged, not
/// fatal.
pub fn spectrum_vs_field(
    instance: &RemInstance,
    gammas: &[f64],
    k: usize,
    tol: f64,
    warm_start: bool,
) -> Result<SpectrumCurve> {
    if gammas.is_empty() {
        return Err(QremError::domain("empty field grid"));
    }
    if gammas.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(QremError::domain("field grid must be ascending"));
    }
    if k < 2 || k > instance.dim() {
        return Err(QremError::domain(format!(
            "need 2 <= k <= {} levels, got {k}",
            instance.dim()
        )));
    }
    let mut levels = vec![Vec::with_capacity(gammas.len()); k];
    let mut residuals = vec![Vec::with_capacity(gammas.len()); k];
    let mut converged = Vec::with_capacity(gammas.len());
    let mut previous: Option<Vec<f64>> = None;
    for &gamma in gammas {
        let start = if warm_start { previous.as_deref() } else { None };
        let r = solve_point(instance, gamma, k, tol, start)?;
        for i in 0..k {
            levels[i].push(r.eigenvalues[i]);
            residuals[i].push(r.residuals[i]);
        }
        converged.push(r.all_converged());
        previous = warm_vector(&r);
    }
    Ok(SpectrumCurve {
        gammas: gammas.to_vec(),
        levels,
        residuals,
        converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapOptions {
    /// Search interval; `None` means `[0.6, 1.4] · |E0|/n`.
    pub bracket: Option<(f64, f64)>,
    /// Final bracket width; `None` means `0.05 · Δ_pred / n`, which pins the
    /// minimal gap to a few parts in 10⁴.
    pub tol_gamma: Option<f64>,
    /// Cap on the residual tolerance of the eigensolves, which is otherwise a
    /// hundredth of the smallest gap seen so far (of `Δ_pred` at the start).
    pub tol_eig: Option<f64>,
}

impl Default for GapOptions {
    fn default() -> Self {
        Self {
            bracket: None,
            tol_gamma: None,
            tol_eig: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapResult {
    pub gamma_star: f64,
    pub delta_min: f64,
    pub e0: f64,
    pub search_evals: usize,
    pub bracket: (f64, f64),
    /// Interval handed to golden section after localizing the crossing.
    pub window: (f64, f64),
    /// False when golden-section search hit a bracket end and the grid
    /// fallback was used.
    pub unimodal: bool,
    /// Every eigensolve reached its tolerance.
    pub converged: bool,
}

struct GapProbe<'a> {
    instance: &'a RemInstance,
    /// Upper limit on the eigensolve residual tolerance.
    tol_cap: f64,
    /// Gap scale used before any gap has been measured.
    initial_scale: f64,
    best: f64,
    evals: usize,
    converged: bool,
    warm: Option<Vec<f64>>,
}

impl GapProbe<'_> {
    fn tolerance(&self) -> f64 {
        let scale = if self.best.is_finite() {
            self.best
        } else {
            self.initial_scale
        };
        self.tol_cap.min(0.01 * scale)
    }

    fn gap(&mut self, gamma: f64) -> Result<f64> {
        let r = solve_point(self.instance, gamma, 2, self.tolerance(), self.warm.as_deref())?;
        self.evals += 1;
        self.converged &= r.all_converged();
        self.warm = warm_vector(&r);
        let g = r.eigenvalues[1] - r.eigenvalues[0];
        if g > 0.0 {
            self.best = self.best.min(g);
        }
        Ok(g)
    }

    /// `|⟨+|ψ₀⟩|²`, the weight of the ground state on the uniform
    /// superposition. Needs only the ground level, which converges quickly
    /// even where λ₁ sits inside the nearly degenerate one-flip band.
    fn paramagnetic_weight(&mut self, gamma: f64) -> Result<f64> {
        let tol = self.tol_cap.min(0.01 * self.initial_scale);
        let r = solve_point(self.instance, gamma, 1, tol, self.warm.as_deref())?;
        self.evals += 1;
        self.converged &= r.all_converged();
        let ground = &r.eigenvectors.as_ref().expect("vectors requested")[0];
        let weight = ground.iter().sum::<f64>().powi(2) / ground.len() as f64;
        self.warm = Some(ground.clone());
        Ok(weight)
    }
}

/// Narrows `[lo, hi]` onto the glass/paramagnet crossing by bisecting on the
/// ground state's paramagnetic weight, which jumps from ~0 to ~1 across it.
/// Stops at a few predicted crossing widths, where the gap is hyperbolic and
/// golden section is safe. `None` when the weight does not change character
/// inside the bracket.
fn localize_crossing(
    probe: &mut GapProbe<'_>,
    lo: f64,
    hi: f64,
    width: f64,
) -> Result<Option<(f64, f64)>> {
    let left = probe.paramagnetic_weight(lo)?;
    let right = probe.paramagnetic_weight(hi)?;
    let threshold = 0.5 * right;
    if !(left < threshold) {
        return Ok(None);
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > width {
        let mid = 0.5 * (a + b);
        if probe.paramagnetic_weight(mid)? < threshold {
            a = mid;
        } else {
            b = mid;
        }
    }
    let span = b - a;
    Ok(Some(((a - span).max(lo), (b + span).min(hi))))
}

/// Minimal splitting `λ₁ - λ₀` of one instance at its glass/paramagnet
/// avoided crossing.
pub fn minimal_gap(instance: &RemInstance, opts: &GapOptions) -> Result<GapResult> {
    let e0 = instance.ground_energy();
    let n = instance.n();
    let pred = minimal_gap_prediction(e0, n)?;
    let (lo, hi) = opts
        .bracket
        .unwrap_or((0.6 * pred.gamma_star, 1.4 * pred.gamma_star));
    if !(lo >= 0.0 && lo < hi) {
        return Err(QremError::domain(format!("invalid bracket [{lo}, {hi}]")));
    }
    if !(lo <= pred.gamma_star && pred.gamma_star <= hi) {
        return Err(QremError::domain(format!(
            "bracket [{lo}, {hi}] does not contain the predicted crossing {}",
            pred.gamma_star
        )));
    }
    let tol_gamma = opts
        .tol_gamma
        .unwrap_or(0.05 * pred.delta_min / n as f64)
        .max(1e-12 * hi);
    let tol_cap = opts.tol_eig.unwrap_or(f64::INFINITY);
    if !(tol_gamma > 0.0) || !(tol_cap > 0.0) {
        return Err(QremError::domain("tolerances must be positive"));
    }

    let mut probe = GapProbe {
        instance,
        tol_cap,
        initial_scale: pred.delta_min,
        best: f64::INFINITY,
        evals: 0,
        converged: true,
        warm: None,
    };
    let crossing_width = (2.0 * pred.delta_min / n as f64).max(tol_gamma);
    let window = localize_crossing(&mut probe, lo, hi, crossing_width)?.unwrap_or((lo, hi));
    let out = golden::minimize(|g| probe.gap(g), window.0, window.1, tol_gamma)?;
    let (gamma_star, delta_min, unimodal) = if out.interior {
        (out.x, out.fx, true)
    } else {
        let (x, fx) = grid_fallback(&mut probe, lo, hi, tol_gamma)?;
        (x, fx, false)
    };
    if !(delta_min > 0.0) {
        return Err(QremError::Numeric(format!(
            "non-positive minimal gap {delta_min} at Γ = {gamma_star}"
        )));
    }
    Ok(GapResult {
        gamma_star,
        delta_min,
        e0,
        search_evals: probe.evals,
        bracket: (lo, hi),
        window,
        unimodal,
        converged: probe.converged,
    })
}

/// Scans a uniform grid, refines every interior local minimum by golden
/// section between its grid neighbours and returns the lowest refined value.
/// Falls back to the grid minimum when the curve has no interior minimum.
fn grid_fallback(probe: &mut GapProbe<'_>, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    let m = FALLBACK_GRID_POINTS;
    let grid: Vec<f64> = (0..m)
        .map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64)
        .collect();
    let mut values = Vec::with_capacity(m);
    for &g in &grid {
        values.push(probe.gap(g)?);
    }
    let mut best: Option<(f64, f64)> = None;
    for i in 1..m - 1 {
        if values[i] <= values[i - 1] && values[i] <= values[i + 1] {
            let out = golden::minimize(|g| probe.gap(g), grid[i - 1], grid[i + 1], tol)?;
            let (x, fx) = if out.fx <= values[i] {
                (out.x, out.fx)
            } else {
                (grid[i], values[i])
            };
            if best.map_or(true, |(_, b)| fx < b) {
                best = Some((x, fx));
            }
        }
    }
    Ok(best.unwrap_or_else(|| {
        let i = values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        (grid[i], values[i])
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRecord {
    pub n: usize,
    pub sample: u64,
    pub seed: u64,
    pub e0: f64,
    pub gamma_star: f64,
    pub delta_min: f64,
    pub unimodal: bool,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeStats {
    pub n: usize,
    pub requested: usize,
    pub excluded: usize,
    pub delta_min: Summary,
    pub gamma_star: Summary,
    /// Mean of `|Γ* - |E0|/n|` over the instances.
    pub mean_crossing_offset: f64,
    /// Fraction of requested instances whose Δ_min is within a factor 2 of
    /// `2|E0|2^{-n/2}`; excluded instances count as misses.
    pub within_factor_two: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub ns: Vec<usize>,
    pub stats: Vec<SizeStats>,
    /// Fit of `log2(median Δ_min)` against `n`; absent for a single size.
    pub fit: Option<LinearFit>,
    pub records: Vec<EnsembleRecord>,
    pub excluded: usize,
}

/// Confidence level of the reported slope interval.
pub const FIT_CONFIDENCE: f64 = 0.95;

/// Minimal gaps of `samples` instances at each size, seeded from
/// `(master_seed, n, sample)`, evaluated in parallel and merged in
/// `(n, sample)` order.
pub fn gap_scaling_ensemble(
    ns: &[usize],
    samples: usize,
    master_seed: u64,
    opts: &GapOptions,
) -> Result<ScalingResult> {
    if ns.is_empty() {
        return Err(QremError::domain("no system sizes requested"));
    }
    if samples < 10 {
        return Err(QremError::domain(format!("need at least 10 samples per size, got {samples}")));
    }
    for &n in ns {
        if n == 0 || n > crate::rem::MAX_SPINS {
            return Err(QremError::Capacity {
                what: "ensemble size",
                n,
                max: crate::rem::MAX_SPINS,
            });
        }
    }
    let jobs: Vec<(usize, u64)> = ns
        .iter()
        .flat_map(|&n| (0..samples as u64).map(move |s| (n, s)))
        .collect();
    let outcomes: Vec<Option<EnsembleRecord>> = jobs
        .par_iter()
        .map(|&(n, sample)| {
            let seed = ensemble_seed(master_seed, n, sample);
            let inst = RemInstance::sample(n, seed).ok()?;
            let r = minimal_gap(&inst, opts).ok()?;
            Some(EnsembleRecord {
                n,
                sample,
                seed,
                e0: r.e0,
                gamma_star: r.gamma_star,
                delta_min: r.delta_min,
                unimodal: r.unimodal,
                converged: r.converged,
            })
        })
        .collect();

    let excluded = outcomes.iter().filter(|o| o.is_none()).count();
    let records: Vec<EnsembleRecord> = outcomes.into_iter().flatten().collect();
    let mut stats = Vec::with_capacity(ns.len());
    for &n in ns {
        let rows: Vec<&EnsembleRecord> = records.iter().filter(|r| r.n == n).collect();
        let deltas: Vec<f64> = rows.iter().map(|r| r.delta_min).collect();
        let gammas: Vec<f64> = rows.iter().map(|r| r.gamma_star).collect();
        let (Some(delta_min), Some(gamma_star)) = (Summary::of(&deltas), Summary::of(&gammas)) else {
            return Err(QremError::Numeric(format!("every instance at n = {n} failed")));
        };
        let offsets: Vec<f64> = rows
            .iter()
            .map(|r| (r.gamma_star - r.e0.abs() / n as f64).abs())
            .collect();
        let within = rows
            .iter()
            .filter(|r| {
                let pred = 2.0 * r.e0.abs() * 2f64.powf(-(n as f64) / 2.0);
                let ratio = r.delta_min / pred;
                (0.5..=2.0).contains(&ratio)
            })
            .count();
        stats.push(SizeStats {
            n,
            requested: samples,
            excluded: samples - rows.len(),
            delta_min,
            gamma_star,
            mean_crossing_offset: offsets.iter().sum::<f64>() / offsets.len() as f64,
            within_factor_two: within as f64 / samples as f64,
        });
    }
    let xs: Vec<f64> = stats.iter().map(|s| s.n as f64).collect();
    let ys: Vec<f64> = stats.iter().map(|s| s.delta_min.median.log2()).collect();
    let fit = linear_fit(&xs, &ys, FIT_CONFIDENCE);
    Ok(ScalingResult {
        ns: ns.to_vec(),
        stats,
        fit,
        records,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_spectrum_is_sorted_energies() {
        let inst = RemInstance::sample(8, 3).unwrap();
        let curve = spectrum_vs_field(&inst, &[0.0], 3, 1e-10, true).unwrap();
        for (i, want) in inst.lowest_energies(3).into_iter().enumerate() {
            assert!((curve.levels[i][0] - want).abs() < 1e-10);
        }
    }

    #[test]
    fn spectrum_rejects_bad_grids() {
        let inst = RemInstance::sample(4, 3).unwrap();
        assert!(spectrum_vs_field(&inst, &[0.2, 0.1], 2, 1e-10, true).is_err());
        assert!(spectrum_vs_field(&inst, &[], 2, 1e-10, true).is_err());
        assert!(spectrum_vs_field(&inst, &[0.1], 1, 1e-10, true).is_err());
    }

    #[test]
    fn bracket_must_contain_prediction() {
        let inst = RemInstance::sample(8, 3).unwrap();
        let opts = GapOptions {
            bracket: Some((0.01, 0.02)),
            ..Default::default()
        };
        assert!(minimal_gap(&inst, &opts).is_err());
    }

    #[test]
    fn ensemble_preconditions() {
        let opts = GapOptions::default();
        assert!(gap_scaling_ensemble(&[6], 5, 1, &opts).is_err());
        assert!(gap_scaling_ensemble(&[], 10, 1, &opts).is_err());
        assert!(gap_scaling_ensemble(&[40], 10, 1, &opts).is_err());
    }

    #[test]
    fn single_size_has_no_fit() {
        let r = gap_scaling_ensemble(&[6], 10, 3, &GapOptions::default()).unwrap();
        assert!(r.fit.is_none());
        assert_eq!(r.stats[0].requested, 10);
        assert_eq!(r.stats[0].excluded + r.stats[0].delta_min.count, 10);
        assert_eq!(r.records.len() + r.excluded, 10);
    }
}
