//! Real-time annealing: `i dψ/dt = H(Γ(t)) ψ` along a field schedule.
//!
//! Each step holds Γ at its midpoint value and applies `exp(-i H dt)` through
//! its Taylor series, summed until the next term falls below `1e-15` in norm.
//! Steps at `Γ = 0` use the exact diagonal phase. The state is never
//! renormalized, so the reported norm drift is a genuine diagnostic.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolver::{lowest_eigenpairs, LanczosOptions};
use crate::error::{QremError, Result};
use crate::hamiltonian::{qp_ground_state, FieldedHamiltonian, QuantumState};
use crate::rem::RemInstance;

/// Norm drift beyond which a run is rejected.
pub const MAX_NORM_DRIFT: f64 = 1e-6;
/// Largest allowed `dt · ‖H‖`.
pub const MAX_STEP_PHASE: f64 = 0.1;
const TAYLOR_CUTOFF: f64 = 1e-15;
const MAX_TAYLOR_TERMS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleShape {
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub gamma_start: f64,
    pub gamma_end: f64,
    pub tau: f64,
    pub shape: ScheduleShape,
}

impl Schedule {
    pub fn linear(gamma_start: f64, gamma_end: f64, tau: f64) -> Result<Self> {
        let s = Self {
            gamma_start,
            gamma_end,
            tau,
            shape: ScheduleShape::Linear,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_start > 0.0) {
            return Err(QremError::domain(format!(
                "gamma_start {} must be positive",
                self.gamma_start
            )));
        }
        if !(self.gamma_end >= 0.0) {
            return Err(QremError::domain(format!(
                "gamma_end {} must be non-negative",
                self.gamma_end
            )));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(QremError::domain(format!("tau {} must be positive", self.tau)));
        }
        Ok(())
    }

    pub fn with_tau(&self, tau: f64) -> Self {
        Self { tau, ..*self }
    }

    pub fn gamma_at(&self, t: f64) -> f64 {
        match self.shape {
            ScheduleShape::Linear => {
                let s = (t / self.tau).clamp(0.0, 1.0);
                self.gamma_start + (self.gamma_end - self.gamma_start) * s
            }
        }
    }

    fn gamma_max(&self) -> f64 {
        self.gamma_start.max(self.gamma_end)
    }
}

/// Default step `0.1 / (max|E| + n Γ_start)`, scaled by `dt_rule / 0.1`.
pub fn default_dt(instance: &RemInstance, schedule: &Schedule, dt_rule: f64) -> f64 {
    dt_rule / (instance.max_abs_energy() + instance.n() as f64 * schedule.gamma_max())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Krylov ground state at `gamma_start`.
    Ground,
    /// Uniform superposition, used when the ground-state solve did not converge.
    Uniform,
    /// Supplied by the caller.
    Given,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: f64,
    pub gamma: f64,
    /// `|⟨ground(Γ(t))|ψ(t)⟩|²`.
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealResult {
    pub schedule: Schedule,
    /// Step actually used, `tau / steps`.
    pub dt: f64,
    pub steps: usize,
    /// `|⟨classical ground|ψ(τ)⟩|²`.
    pub fidelity: f64,
    /// `| ‖ψ(τ)‖ - 1 |`.
    pub norm_drift: f64,
    /// Largest drift seen after any step.
    pub max_norm_drift: f64,
    pub initial: InitialState,
    pub checkpoints: Vec<Checkpoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvolveOptions {
    /// Record an instantaneous-ground-state fidelity every this many steps.
    pub checkpoint_every: Option<usize>,
}

fn state_norm(psi: &[Complex64]) -> f64 {
    psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Applies `exp(-i H dt)` in place. `work` and `term` are scratch buffers.
fn step(
    h: &FieldedHamiltonian<'_>,
    dt: f64,
    psi: &mut [Complex64],
    term: &mut [Complex64],
    work: &mut [Complex64],
) -> Result<()> {
    if h.gamma() == 0.0 {
        for (a, &e) in psi.iter_mut().zip(h.instance().energies()) {
            *a *= Complex64::from_polar(1.0, -e * dt);
        }
        return Ok(());
    }
    term.copy_from_slice(psi);
    for j in 1..=MAX_TAYLOR_TERMS {
        h.apply_into(term, work)?;
        let factor = Complex64::new(0.0, -dt / j as f64);
        let mut tn = 0.0;
        for ((t, w), p) in term.iter_mut().zip(work.iter()).zip(psi.iter_mut()) {
            *t = w * factor;
            *p += *t;
            tn += t.norm_sqr();
        }
        if tn.sqrt() <= TAYLOR_CUTOFF {
            return Ok(());
        }
    }
    Err(QremError::Numeric(format!(
        "Taylor propagator did not converge in {MAX_TAYLOR_TERMS} terms (dt = {dt})"
    )))
}

fn ground_state(instance: &RemInstance, gamma: f64, tol: f64) -> Result<Option<QuantumState>> {
    let h = FieldedHamiltonian::new(instance, gamma);
    let opts = LanczosOptions {
        tol,
        want_vectors: true,
        ..Default::default()
    };
    let r = lowest_eigenpairs(&h, 1, &opts)?;
    if !r.all_converged() {
        return Ok(None);
    }
    let v = &r.eigenvectors.as_ref().expect("vectors requested")[0];
    Ok(Some(QuantumState::from_real(v)?))
}

/// Anneals from the ground state at `gamma_start`.
pub fn evolve(instance: &RemInstance, schedule: &Schedule, dt: f64) -> Result<AnnealResult> {
    evolve_with(instance, schedule, dt, &EvolveOptions::default())
}

pub fn evolve_with(
    instance: &RemInstance,
    schedule: &Schedule,
    dt: f64,
    opts: &EvolveOptions,
) -> Result<AnnealResult> {
    schedule.validate()?;
    let (initial, kind) = match ground_state(instance, schedule.gamma_start, 1e-10)? {
        Some(g) => (g, InitialState::Ground),
        None => (qp_ground_state(instance.n()), InitialState::Uniform),
    };
    let mut r = evolve_from(instance, schedule, dt, initial, opts)?;
    r.initial = kind;
    Ok(r)
}

/// Anneals an arbitrary initial state.
pub fn evolve_from(
    instance: &RemInstance,
    schedule: &Schedule,
    dt: f64,
    initial: QuantumState,
    opts: &EvolveOptions,
) -> Result<AnnealResult> {
    schedule.validate()?;
    if initial.n() != instance.n() {
        return Err(QremError::Dimension {
            expected: instance.dim(),
            got: 1 << initial.n(),
        });
    }
    let bound = instance.max_abs_energy() + instance.n() as f64 * schedule.gamma_max();
    if !(dt > 0.0) || dt * bound > MAX_STEP_PHASE * (1.0 + 1e-12) {
        return Err(QremError::domain(format!(
            "dt = {dt} violates dt·‖H‖ <= {MAX_STEP_PHASE} (‖H‖ <= {bound})"
        )));
    }
    let steps = ((schedule.tau / dt).ceil() as usize).max(1);
    let h_dt = schedule.tau / steps as f64;

    let target = instance.ground_index();
    let mut psi = initial.into_amplitudes();
    let mut term = vec![Complex64::new(0.0, 0.0); psi.len()];
    let mut work = term.clone();
    let mut max_drift = 0.0f64;
    let mut checkpoints = Vec::new();

    for s in 0..steps {
        let t_mid = (s as f64 + 0.5) * h_dt;
        let h = FieldedHamiltonian::new(instance, schedule.gamma_at(t_mid));
        step(&h, h_dt, &mut psi, &mut term, &mut work)?;
        let drift = (state_norm(&psi) - 1.0).abs();
        max_drift = max_drift.max(drift);
        if drift > MAX_NORM_DRIFT {
            return Err(QremError::StepSize {
                drift,
                limit: MAX_NORM_DRIFT,
                dt: h_dt,
            });
        }
        if let Some(every) = opts.checkpoint_every.filter(|&e| e > 0) {
            if (s + 1) % every == 0 || s + 1 == steps {
                let t = (s + 1) as f64 * h_dt;
                let gamma = schedule.gamma_at(t);
                let fidelity = match ground_state(instance, gamma, 1e-10)? {
                    Some(g) => g
                        .amplitudes()
                        .iter()
                        .zip(&psi)
                        .map(|(a, b)| a.conj() * b)
                        .sum::<Complex64>()
                        .norm_sqr(),
                    None => f64::NAN,
                };
                checkpoints.push(Checkpoint { t, gamma, fidelity });
            }
        }
    }

    Ok(AnnealResult {
        schedule: *schedule,
        dt: h_dt,
        steps,
        fidelity: psi[target].norm_sqr(),
        norm_drift: (state_norm(&psi) - 1.0).abs(),
        max_norm_drift: max_drift,
        initial: InitialState::Given,
        checkpoints,
    })
}

/// One anneal per `tau`, each with `dt = default_dt(instance, schedule, dt_rule)`.
/// Runs are independent and evaluated in parallel; output order follows `taus`.
pub fn success_vs_tau(
    instance: &RemInstance,
    taus: &[f64],
    template: &Schedule,
    dt_rule: f64,
) -> Result<Vec<AnnealResult>> {
    if taus.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(QremError::domain("taus must be ascending"));
    }
    if !(dt_rule > 0.0 && dt_rule <= MAX_STEP_PHASE) {
        return Err(QremError::domain(format!("dt_rule {dt_rule} outside (0, {MAX_STEP_PHASE}]")));
    }
    template.validate()?;
    let initial = match ground_state(instance, template.gamma_start, 1e-10)? {
        Some(g) => (g, InitialState::Ground),
        None => (qp_ground_state(instance.n()), InitialState::Uniform),
    };
    let dt = default_dt(instance, template, dt_rule);
    taus.par_iter()
        .map(|&tau| {
            let schedule = template.with_tau(tau);
            let mut r = evolve_from(instance, &schedule, dt, initial.0.clone(), &EvolveOptions::default())?;
            r.initial = initial.1;
            Ok(r)
        })
        .collect()
}
