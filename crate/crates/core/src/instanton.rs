//! Large-p instanton estimates in the static approximation.
//!
//! An imaginary-time path spends a fraction `Θ` of `β` in the glass and the
//! rest in the paramagnet, jumping `k` times between them. Its action per
//! spin is `Θ sqrt(ln 2) βJ/2 + (1-Θ) βΓ + k ln|⟨x|z⟩|`, and each interface
//! costs `ln|⟨x|z⟩| = -ln(2)/2` per spin, so the tunnelling amplitude, and
//! with it the gap, scales as `e^G` with `G = -n ln(2)/2`.

use serde::{Deserialize, Serialize};

use crate::error::{QremError, Result};

/// `ln |⟨x|z⟩| = ln(1/√2)`.
pub fn jump_cost() -> f64 {
    -0.5 * std::f64::consts::LN_2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstantonParams {
    /// Fraction of imaginary time in the glass state, in [0, 1].
    pub theta: f64,
    pub beta: f64,
    pub j: f64,
    pub gamma: f64,
    /// Number of jumps; even.
    pub k: u32,
    pub n: usize,
}

impl InstantonParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(QremError::domain(format!("theta {} outside [0, 1]", self.theta)));
        }
        if !(self.beta > 0.0) || !(self.j > 0.0) {
            return Err(QremError::domain("beta and J must be positive"));
        }
        if !(self.gamma >= 0.0) {
            return Err(QremError::domain(format!("field {} must be non-negative", self.gamma)));
        }
        if self.k % 2 != 0 {
            return Err(QremError::domain(format!("jump count {} must be even", self.k)));
        }
        Ok(())
    }
}

/// Saddle point of the replica block size, `m = 2√2 / (Θ β J)`.
pub fn static_m(theta: f64, beta: f64, j: f64) -> Result<f64> {
    if !(theta > 0.0 && beta > 0.0 && j > 0.0) {
        return Err(QremError::domain(format!(
            "static_m needs positive Θ, β, J (got {theta}, {beta}, {j})"
        )));
    }
    Ok(2.0 * std::f64::consts::SQRT_2 / (theta * beta * j))
}

/// `-βf` per spin of a `k`-jump path.
pub fn instanton_action(p: &InstantonParams) -> Result<f64> {
    p.validate()?;
    let glass = p.theta * std::f64::consts::LN_2.sqrt() * p.beta * p.j / 2.0;
    let para = (1.0 - p.theta) * p.beta * p.gamma;
    Ok(glass + para + p.k as f64 * jump_cost())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCost {
    /// Extensive interface cost `G = n ln|⟨x|z⟩|`.
    pub g: f64,
    /// `e^G = 2^{-n/2}`.
    pub gap_scale: f64,
}

pub fn surface_cost_gap(n: usize) -> Result<SurfaceCost> {
    if n == 0 {
        return Err(QremError::domain("surface cost needs n >= 1"));
    }
    Ok(SurfaceCost {
        g: n as f64 * jump_cost(),
        gap_scale: 2f64.powf(-(n as f64) / 2.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalancedTheta {
    pub theta: f64,
    pub action: f64,
    /// Both phases give the same action; any Θ in [0, 1] is optimal.
    pub degenerate: bool,
}

/// Glass fraction maximizing the jump-free action. The action is linear in
/// Θ, so the optimum sits at an endpoint unless the two slopes tie.
pub fn balanced_theta_action(beta: f64, j: f64, gamma: f64) -> Result<BalancedTheta> {
    if !(beta > 0.0 && j > 0.0 && gamma > 0.0) {
        return Err(QremError::domain("balanced_theta_action needs positive β, J, Γ"));
    }
    let glass_rate = std::f64::consts::LN_2.sqrt() * j / 2.0;
    let scale = glass_rate.max(gamma);
    let degenerate = (glass_rate - gamma).abs() <= 1e-12 * scale;
    let theta = if degenerate || glass_rate > gamma { 1.0 } else { 0.0 };
    let action = instanton_action(&InstantonParams {
        theta,
        beta,
        j,
        gamma,
        k: 0,
        n: 1,
    })?;
    Ok(BalancedTheta {
        theta,
        action,
        degenerate,
    })
}
