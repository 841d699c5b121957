//! Closed-form level predictions: the two perturbative branches and the
//! two-level model of the avoided crossing between the classical ground state
//! and the quantum paramagnet.

use serde::{Deserialize, Serialize};

use crate::error::{QremError, Result};

/// Relative round-off allowed below zero in the two-level radicand.
const RADICAND_CLAMP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// Continuation of a classical level `E_i` to small Γ.
    Rem,
    /// Continuation of a transverse level with `k` flipped spins to large Γ.
    Qp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPrediction {
    pub origin: Branch,
    /// `E_i` for the REM branch, the flip count `k` for the QP branch.
    pub level: f64,
    pub gamma: f64,
    pub predicted: f64,
}

/// `E_i + n Γ² / E_i`, valid for extensive levels.
pub fn rem_branch(level_energy: f64, n: usize, gamma: f64) -> Result<f64> {
    if level_energy == 0.0 || !level_energy.is_finite() {
        return Err(QremError::domain(format!(
            "REM branch needs a non-zero extensive level, got {level_energy}"
        )));
    }
    Ok(level_energy + n as f64 * gamma * gamma / level_energy)
}

/// `-Γ (n - 2k) - 1/(2Γ)`: the `k`-flip transverse level shifted by the
/// second-order disorder correction.
pub fn qp_branch(n: usize, gamma: f64, k: usize) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(QremError::domain(format!("QP branch needs Γ > 0, got {gamma}")));
    }
    if k > n {
        return Err(QremError::domain(format!("excitation index {k} exceeds n = {n}")));
    }
    Ok(-gamma * (n as f64 - 2.0 * k as f64) - 0.5 / gamma)
}

pub fn predict(origin: Branch, level: f64, n: usize, gamma: f64) -> Result<BranchPrediction> {
    let predicted = match origin {
        Branch::Rem => rem_branch(level, n, gamma)?,
        Branch::Qp => {
            if level < 0.0 || level.fract() != 0.0 {
                return Err(QremError::domain(format!("flip count {level} is not a whole number")));
            }
            qp_branch(n, gamma, level as usize)?
        }
    };
    Ok(BranchPrediction {
        origin,
        level,
        gamma,
        predicted,
    })
}

/// Splitting of the two-level model spanned by the classical ground state
/// (energy `e0`) and the uniform state (energy `-nΓ`), whose overlap squared
/// is `2^-n`.
pub fn two_level_gap(e0: f64, n: usize, gamma: f64) -> Result<f64> {
    if !(e0 < 0.0) {
        return Err(QremError::domain(format!("ground energy {e0} must be negative")));
    }
    if !(gamma >= 0.0) {
        return Err(QremError::domain(format!("field {gamma} must be non-negative")));
    }
    let ng = n as f64 * gamma;
    let overlap_sq = 2f64.powi(-(n as i32));
    let sum_sq = (ng - e0) * (ng - e0);
    // (nΓ - E0)² - 4(-E0 nΓ + E0 nΓ s²) regrouped as (nΓ + E0)² - 4 E0 nΓ s²,
    // which has no cancellation at the crossing.
    let radicand = (ng + e0) * (ng + e0) - 4.0 * e0 * ng * overlap_sq;
    if radicand >= 0.0 {
        return Ok(radicand.sqrt());
    }
    if radicand >= -RADICAND_CLAMP * sum_sq.max(f64::MIN_POSITIVE) {
        return Ok(0.0);
    }
    Err(QremError::Numeric(format!(
        "negative two-level radicand {radicand} for e0 = {e0}, n = {n}, Γ = {gamma}"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapPrediction {
    pub gamma_star: f64,
    pub delta_min: f64,
}

/// Crossing field `|E0|/n` and minimal gap `2 |E0| 2^{-n/2}`.
pub fn minimal_gap_prediction(e0: f64, n: usize) -> Result<GapPrediction> {
    if !(e0 < 0.0) {
        return Err(QremError::domain(format!("ground energy {e0} must be negative")));
    }
    Ok(GapPrediction {
        gamma_star: e0.abs() / n as f64,
        delta_min: 2.0 * e0.abs() * 2f64.powf(-(n as f64) / 2.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SQRT_LN2: f64 = 0.832_554_611_157_697_7;

    #[test]
    fn rem_branch_values() {
        assert!((rem_branch(-10.0, 20, 0.3).unwrap() + 10.18).abs() < 1e-12);
        assert_eq!(rem_branch(-7.5, 12, 0.0).unwrap(), -7.5);
        assert!(rem_branch(0.0, 12, 0.3).is_err());
    }

    #[test]
    fn qp_branch_values() {
        assert_eq!(qp_branch(20, 1.0, 0).unwrap(), -20.5);
        assert_eq!(qp_branch(20, 1.0, 1).unwrap(), -18.5);
        assert!(qp_branch(20, 0.0, 0).is_err());
        assert!(qp_branch(20, -1.0, 0).is_err());
        assert!(qp_branch(4, 1.0, 5).is_err());
        // Decreasing once Γ > 1/sqrt(2n).
        let mut prev = qp_branch(16, 0.2, 0).unwrap();
        for i in 5..200 {
            let e = qp_branch(16, 0.05 * i as f64, 0).unwrap();
            assert!(e < prev);
            prev = e;
        }
        for k in 0..=5 {
            let g = 1e6;
            let exact = -g * (5.0 - 2.0 * k as f64);
            if exact != 0.0 {
                assert!(((qp_branch(5, g, k).unwrap() - exact) / exact).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn predictions_are_tagged() {
        let p = predict(Branch::Rem, -5.0, 10, 0.0).unwrap();
        assert_eq!(p.predicted, -5.0);
        let q = predict(Branch::Qp, 1.0, 20, 1.0).unwrap();
        assert_eq!(q.predicted, -18.5);
        assert!(predict(Branch::Qp, 1.5, 20, 1.0).is_err());
    }

    #[test]
    fn two_level_gap_values() {
        assert!((two_level_gap(-3.0, 8, 0.0).unwrap() - 3.0).abs() < 1e-15);
        let e0 = -20.0 * SQRT_LN2;
        let at = two_level_gap(e0, 20, e0.abs() / 20.0).unwrap();
        let formula = 2.0 * e0.abs() * 2f64.powi(-10);
        assert!(((at - formula) / formula).abs() < 1e-9);
        let g = two_level_gap(-16.651, 20, 0.83255).unwrap();
        assert!((g - 0.03252).abs() < 2e-5, "{g}");
        assert!(two_level_gap(1.0, 4, 0.2).is_err());
        assert!(two_level_gap(-1.0, 4, -0.2).is_err());
    }

    #[test]
    fn minimal_gap_values() {
        let p = minimal_gap_prediction(-20.0 * SQRT_LN2, 20).unwrap();
        assert!((p.gamma_star - 0.83255).abs() < 1e-5);
        assert!((p.delta_min - 0.03252).abs() < 1e-5);
        let q = minimal_gap_prediction(-1.0, 2).unwrap();
        assert_eq!((q.gamma_star, q.delta_min), (0.5, 1.0));
        assert!(minimal_gap_prediction(0.0, 2).is_err());
    }

    #[test]
    fn branch_intersection_tracks_crossing() {
        for n in 10..=30 {
            let e0 = -(n as f64) * SQRT_LN2;
            let diff = |g: f64| rem_branch(e0, n, g).unwrap() - qp_branch(n, g, 0).unwrap();
            let (mut lo, mut hi) = (0.3, 1.5);
            assert!(diff(lo) < 0.0 && diff(hi) > 0.0);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if diff(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let star = minimal_gap_prediction(e0, n).unwrap().gamma_star;
            assert!((lo - star).abs() <= 1.0 / n as f64, "n={n} {lo} vs {star}");
        }
    }

    proptest! {
        #[test]
        fn crossing_minimizes_two_level_gap(e0 in -30.0f64..-0.5, n in 1usize..30, gamma in 0.0f64..5.0) {
            let pred = minimal_gap_prediction(e0, n).unwrap();
            // The exact minimizer sits at nΓ = |E0|(1 - 2^{1-n}), a factor
            // sqrt(1 - 2^-n) below the value at |E0|/n.
            let g = two_level_gap(e0, n, gamma).unwrap();
            let floor = pred.delta_min * (1.0 - 2f64.powi(-(n as i32))).sqrt();
            prop_assert!(g >= floor - 1e-12);
            let at = two_level_gap(e0, n, pred.gamma_star).unwrap();
            prop_assert!(((at - pred.delta_min) / pred.delta_min).abs() <= 1e-12);
        }
    }
}
