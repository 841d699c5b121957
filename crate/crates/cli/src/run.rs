//! Dispatch of a validated config to the library, and file emission.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use qrem::anneal::{default_dt, evolve_with, AnnealResult, EvolveOptions, InitialState, Schedule};
use qrem::gap::{gap_scaling_ensemble, minimal_gap, spectrum_vs_field, EnsembleRecord};
use qrem::instanton::{balanced_theta_action, instanton_action, jump_cost, surface_cost_gap, InstantonParams};
use qrem::output;
use qrem::rng::{ensemble_seed, RNG_VERSION};
use qrem::thermo::phase_boundary;
use qrem::RemInstance;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Command, ExperimentConfig};

/// What a run produced: headline results for the summary and whether every
/// requested computation converged.
pub struct Outcome {
    pub results: Value,
    pub converged: bool,
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn finish(mut w: BufWriter<File>) -> Result<()> {
    w.flush()?;
    Ok(())
}

/// Runs a materialized, validated config and writes its data files, the
/// summary and the effective config into `out`.
pub fn run(config: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut w = create(out, "config.json")?;
    output::write_json(&mut w, config)?;
    finish(w)?;

    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let outcome = match config.command {
        Command::Spectrum => spectrum(config, out)?,
        Command::Gap => gap(config, out)?,
        Command::Scaling => scaling(config, out)?,
        Command::Anneal => anneal(config, out)?,
        Command::PhaseDiagram => phase_diagram(config, out)?,
        Command::Instanton => instanton(config, out)?,
    };
    let summary = json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "rng_version": RNG_VERSION,
        "command": config.command.name(),
        "converged": outcome.converged,
        "config_echo": config,
        "results": outcome.results,
        "metadata": {
            "started_unix_seconds": started,
            "elapsed_seconds": clock.elapsed().as_secs_f64(),
        },
    });
    let mut w = create(out, "summary.json")?;
    output::write_json(&mut w, &summary)?;
    finish(w)?;
    Ok(outcome)
}

fn sampled(n: usize, master_seed: u64, sample: u64) -> Result<RemInstance> {
    Ok(RemInstance::sample(n, ensemble_seed(master_seed, n, sample))?)
}

fn spectrum(config: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let s = config.spectrum.as_ref().expect("materialized");
    let inst = match &s.energies {
        Some(e) => RemInstance::from_energies(e.clone())?,
        None => sampled(s.n, config.master_seed, s.sample)?,
    };
    let curve = spectrum_vs_field(&inst, &s.gammas.values(), s.k, s.tol, s.warm_start)?;
    let mut w = create(out, "spectrum.csv")?;
    output::write_spectrum_csv(&mut w, &curve)?;
    finish(w)?;
    let gaps = curve.gaps();
    let (at, min_gap) = gaps
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, &d)| if d < best.1 { (i, d) } else { best });
    Ok(Outcome {
        results: json!({
            "n": inst.n(),
            "seed": inst.seed(),
            "e0": inst.ground_energy(),
            "points": curve.gammas.len(),
            "unconverged_points": curve.converged.iter().filter(|c| !**c).count(),
            "min_grid_gap": min_gap,
            "min_grid_gap_gamma": curve.gammas[at],
        }),
        converged: curve.all_converged(),
    })
}

fn gap(config: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let g = config.gap.as_ref().expect("materialized");
    let opts = g.search.options();
    let runs = g
        .samples
        .par_iter()
        .map(|&sample| {
            let inst = sampled(g.n, config.master_seed, sample)?;
            let r = minimal_gap(&inst, &opts)?;
            Ok((sample, inst.seed().expect("sampled"), inst.ground_energy(), r))
        })
        .collect::<Result<Vec<_>>>()?;
    let records: Vec<EnsembleRecord> = runs
        .iter()
        .map(|(sample, seed, e0, r)| EnsembleRecord {
            n: g.n,
            sample: *sample,
            seed: *seed,
            e0: *e0,
            gamma_star: r.gamma_star,
            delta_min: r.delta_min,
            unimodal: r.unimodal,
            converged: r.converged,
        })
        .collect();
    let mut w = create(out, "gap.csv")?;
    output::write_scaling_csv(&mut w, &records)?;
    finish(w)?;
    let results: Vec<Value> = runs
        .iter()
        .map(|(sample, seed, e0, r)| {
            json!({
                "sample": sample,
                "seed": seed,
                "e0": e0,
                "predicted_gamma": e0.abs() / g.n as f64,
                "search": r,
            })
        })
        .collect();
    Ok(Outcome {
        results: Value::Array(results),
        converged: runs.iter().all(|x| x.3.converged),
    })
}

fn scaling(config: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let s = config.scaling.as_ref().expect("materialized");
    let r = gap_scaling_ensemble(&s.ns, s.samples, config.master_seed, &s.search.options())?;
    let mut w = create(out, "scaling.csv")?;
    output::write_scaling_csv(&mut w, &r.records)?;
    finish(w)?;
    Ok(Outcome {
        results: json!({
            "stats": r.stats,
            "fit": r.fit,
            "excluded": r.excluded,
        }),
        converged: r.excluded == 0,
    })
}

fn anneal(config: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let a = config.anneal.as_ref().expect("materialized");
    let taus = a.taus.values();
    let instances = a
        .samples
        .iter()
        .map(|&s| sampled(a.n, config.master_seed, s))
        .collect::<Result<Vec<_>>>()?;
    let mut schedules = Vec::new();
    for inst in &instances {
        let start = a
            .gamma_start
            .unwrap_or_else(|| 5.0 * inst.ground_energy().abs() / a.n as f64);
        if !(a.gamma_end < start) {
            anyhow::bail!("gamma_end {} is not below gamma_start {start}", a.gamma_end);
        }
        schedules.push(Schedule::linear(start, a.gamma_end, 1.0)?);
    }
    let opts = EvolveOptions {
        checkpoint_every: a.checkpoint_every,
    };
    let jobs: Vec<(usize, usize)> = (0..instances.len())
        .flat_map(|i| (0..taus.len()).map(move |t| (i, t)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(i, t)| {
            let s = schedules[i].with_tau(taus[t]);
            let dt = default_dt(&instances[i], &s, a.dt_rule);
            Ok(evolve_with(&instances[i], &s, dt, &opts)?)
        })
        .collect::<Result<Vec<AnnealResult>>>()?;

    let mut w = create(out, "anneal.csv")?;
    output::write_anneal_csv(
        &mut w,
        jobs.iter()
            .zip(&runs)
            .map(|(&(i, _), r)| (a.n, instances[i].seed().expect("sampled"), r)),
    )?;
    finish(w)?;
    if a.checkpoint_every.is_some() {
        let dir = out.join("checkpoints");
        fs::create_dir_all(&dir)?;
        for (&(i, t), r) in jobs.iter().zip(&runs) {
            let mut w = create(&dir, &format!("sample{}_tau{t}.csv", a.samples[i]))?;
            output::write_checkpoint_csv(&mut w, &r.checkpoints)?;
            finish(w)?;
        }
    }
    let results: Vec<Value> = jobs
        .iter()
        .zip(&runs)
        .map(|(&(i, _), r)| {
            json!({
                "sample": a.samples[i],
                "seed": instances[i].seed(),
                "tau": r.schedule.tau,
                "gamma_start": r.schedule.gamma_start,
                "steps": r.steps,
                "fidelity": r.fidelity,
                "max_norm_drift": r.max_norm_drift,
                "initial": r.initial,
            })
        })
        .collect();
    Ok(Outcome {
        results: Value::Array(results),
        converged: runs.iter().all(|r| r.initial == InitialState::Ground),
    })
}

fn phase_diagram(config: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let p = config.phase_diagram.as_ref().expect("materialized");
    let points = p
        .temperatures
        .values()
        .into_iter()
        .map(|t| phase_boundary(t, p.tol))
        .collect::<qrem::Result<Vec<_>>>()?;
    let mut w = create(out, "phase.csv")?;
    output::write_phase_csv(&mut w, &points)?;
    finish(w)?;
    Ok(Outcome {
        results: json!({
            "gamma_c_zero_temperature": points.iter().find(|x| x.temperature == 0.0).map(|x| x.gamma_c),
            "points": points.len(),
            "frozen_points": points.iter().filter(|x| x.frozen).count(),
        }),
        converged: true,
    })
}

fn instanton(config: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let c = config.instanton.as_ref().expect("materialized");
    let mut w = create(out, "surface_cost.csv")?;
    writeln!(w, "n,g,gap_scale")?;
    for &n in &c.ns {
        let s = surface_cost_gap(n)?;
        writeln!(w, "{n},{},{}", s.g, s.gap_scale)?;
    }
    finish(w)?;
    let mut w = create(out, "action.csv")?;
    writeln!(w, "k,action")?;
    for &k in &c.jumps {
        let action = instanton_action(&InstantonParams {
            theta: c.theta,
            beta: c.beta,
            j: c.j,
            gamma: c.gamma,
            k,
            n: c.ns.iter().copied().max().unwrap_or(1),
        })?;
        writeln!(w, "{k},{action}")?;
    }
    finish(w)?;
    Ok(Outcome {
        results: json!({
            "jump_cost": jump_cost(),
            "balanced": balanced_theta_action(c.beta, c.j, c.gamma)?,
        }),
        converged: true,
    })
}
