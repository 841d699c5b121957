//! Thermodynamics of the classical REM and of the free transverse-field
//! paramagnet, and the first-order boundary where the two free energies meet.

use serde::{Deserialize, Serialize};

use crate::error::{QremError, Result};

const LN2: f64 = std::f64::consts::LN_2;

/// Ground-state energy density of the REM, `-sqrt(ln 2)`.
pub fn critical_energy_density() -> f64 {
    -LN2.sqrt()
}

/// Freezing temperature `1 / (2 sqrt(ln 2))`, the inverse slope of `s(e)` at `e₀`.
pub fn critical_temperature() -> f64 {
    0.5 / LN2.sqrt()
}

/// Microcanonical entropy density `s(e) = ln 2 - e²`.
pub fn entropy_density(e: f64) -> Result<f64> {
    let edge = LN2.sqrt();
    if !(e.abs() <= edge) {
        return Err(QremError::domain(format!(
            "energy density {e} outside [-sqrt(ln 2), sqrt(ln 2)]: no configurations"
        )));
    }
    if e.abs() == edge {
        return Ok(0.0);
    }
    Ok((LN2 - e * e).max(0.0))
}

/// Free energy per spin of the classical REM.
pub fn classical_free_energy(t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(QremError::domain(format!("temperature {t} is negative")));
    }
    if t <= critical_temperature() {
        Ok(-LN2.sqrt())
    } else {
        Ok(-0.25 / t - t * LN2)
    }
}

/// Free energy per spin of `n` free spins in a transverse field,
/// `-T ln 2 - T ln cosh(Γ/T)`, written as `-|Γ| - T ln(1 + e^{-2|Γ|/T})`
/// so that large `Γ/T` cannot overflow.
pub fn paramagnetic_free_energy(t: f64, gamma: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(QremError::domain(format!("temperature {t} is negative")));
    }
    let g = gamma.abs();
    if t == 0.0 {
        return Ok(-g);
    }
    Ok(-g - t * (-2.0 * g / t).exp().ln_1p())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub temperature: f64,
    pub gamma_c: f64,
    /// True on the frozen side of the classical transition, `T < T_c`.
    pub frozen: bool,
}

/// Transverse field at which the classical and paramagnetic free energies
/// cross, found by bisection on `[1e-6, max(4, 4T)]`.
pub fn phase_boundary(t: f64, tol: f64) -> Result<PhasePoint> {
    if !(tol > 0.0) {
        return Err(QremError::domain(format!("tolerance {tol} must be positive")));
    }
    let f_rem = classical_free_energy(t)?;
    let diff = |gamma: f64| -> f64 { f_rem - paramagnetic_free_energy(t, gamma).unwrap() };

    let (mut lo, mut hi) = (1e-6, 4f64.max(4.0 * t));
    let (f_lo, f_hi) = (diff(lo), diff(hi));
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(QremError::Search { lo, hi, f_lo, f_hi });
    }
    // The difference is strictly increasing in Γ with unit slope at large Γ,
    // so halving until both the bracket and the residual are below tol is safe.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = diff(mid);
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if f_mid < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol && diff(0.5 * (lo + hi)).abs() <= tol {
            break;
        }
    }
    Ok(PhasePoint {
        temperature: t,
        gamma_c: 0.5 * (lo + hi),
        frozen: t < critical_temperature(),
    })
}
