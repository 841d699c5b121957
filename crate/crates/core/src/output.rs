//! CSV and JSON emission. Column names and order are a stable contract;
//! floats are written in Rust's shortest round-trip form, so identical
//! inputs give byte-identical files.

use std::io::Write;

use serde::Serialize;

use crate::anneal::{AnnealResult, Checkpoint};
use crate::error::Result;
use crate::gap::{EnsembleRecord, SpectrumCurve};
use crate::thermo::PhasePoint;

pub const SPECTRUM_COLUMNS: [&str; 4] = ["gamma", "level_index", "energy", "residual"];
pub const SCALING_COLUMNS: [&str; 6] = ["n", "sample", "seed", "e0", "gamma_star", "delta_min"];
pub const ANNEAL_COLUMNS: [&str; 6] = ["n", "seed", "tau", "dt", "fidelity", "norm_drift"];
pub const CHECKPOINT_COLUMNS: [&str; 3] = ["t", "gamma", "fidelity"];
pub const PHASE_COLUMNS: [&str; 3] = ["T", "gamma_c", "frozen"];

fn writer<W: Write>(out: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header)?;
    Ok(w)
}

pub fn write_spectrum_csv<W: Write>(out: W, curve: &SpectrumCurve) -> Result<()> {
    let mut w = writer(out, &SPECTRUM_COLUMNS)?;
    for (p, gamma) in curve.gammas.iter().enumerate() {
        for (level, (values, residuals)) in curve.levels.iter().zip(&curve.residuals).enumerate() {
            w.write_record([
                gamma.to_string(),
                level.to_string(),
                values[p].to_string(),
                residuals[p].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_scaling_csv<W: Write>(out: W, records: &[EnsembleRecord]) -> Result<()> {
    let mut w = writer(out, &SCALING_COLUMNS)?;
    for r in records {
        w.write_record([
            r.n.to_string(),
            r.sample.to_string(),
            r.seed.to_string(),
            r.e0.to_string(),
            r.gamma_star.to_string(),
            r.delta_min.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `runs` pairs each result with the `(n, seed)` of its instance.
pub fn write_anneal_csv<'a, W: Write>(
    out: W,
    runs: impl IntoIterator<Item = (usize, u64, &'a AnnealResult)>,
) -> Result<()> {
    let mut w = writer(out, &ANNEAL_COLUMNS)?;
    for (n, seed, r) in runs {
        w.write_record([
            n.to_string(),
            seed.to_string(),
            r.schedule.tau.to_string(),
            r.dt.to_string(),
            r.fidelity.to_string(),
            r.norm_drift.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_checkpoint_csv<W: Write>(out: W, checkpoints: &[Checkpoint]) -> Result<()> {
    let mut w = writer(out, &CHECKPOINT_COLUMNS)?;
    for c in checkpoints {
        w.write_record([c.t.to_string(), c.gamma.to_string(), c.fidelity.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_phase_csv<W: Write>(out: W, points: &[PhasePoint]) -> Result<()> {
    let mut w = writer(out, &PHASE_COLUMNS)?;
    for p in points {
        w.write_record([
            p.temperature.to_string(),
            p.gamma_c.to_string(),
            p.frozen.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize>(out: W, value: &T) -> Result<()> {
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}
