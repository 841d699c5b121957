//! Experiment configuration: one JSON object with a `command` tag, shared
//! settings and a section per command. Missing fields take their defaults and
//! the materialized result is written back next to the outputs.

use std::fmt;
use std::path::PathBuf;

use qrem::rem::MAX_SPINS;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    Gap,
    Scaling,
    Anneal,
    PhaseDiagram,
    Instanton,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Gap => "gap",
            Command::Scaling => "scaling",
            Command::Anneal => "anneal",
            Command::PhaseDiagram => "phase-diagram",
            Command::Instanton => "instanton",
        }
    }
}

/// Either explicit values or `points` evenly spaced values from `start` to
/// `stop` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, points: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Values(v) => v.clone(),
            Grid::Range { start, stop, points } => match points {
                0 => Vec::new(),
                1 => vec![*start],
                p => (0..*p)
                    .map(|i| start + (stop - start) * i as f64 / (*p - 1) as f64)
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub n: usize,
    /// Instance index under the master seed.
    pub sample: u64,
    /// Crafted configuration energies (length `2^n`); replaces sampling and
    /// sets `n`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energies: Option<Vec<f64>>,
    pub gammas: Grid,
    pub k: usize,
    pub tol: f64,
    pub warm_start: bool,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            n: 10,
            sample: 0,
            energies: None,
            gammas: Grid::Range {
                start: 0.0,
                stop: 2.0,
                points: 41,
            },
            k: 4,
            tol: 1e-10,
            warm_start: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// `null` means `[0.6, 1.4] · |E0|/n`.
    pub bracket: Option<(f64, f64)>,
    /// `null` means `0.05 · Δ_pred / n`.
    pub tol_gamma: Option<f64>,
    /// `null` leaves the eigensolver tolerance adaptive.
    pub tol_eig: Option<f64>,
}

impl SearchConfig {
    pub fn options(&self) -> qrem::gap::GapOptions {
        qrem::gap::GapOptions {
            bracket: self.bracket,
            tol_gamma: self.tol_gamma,
            tol_eig: self.tol_eig,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GapConfig {
    pub n: usize,
    /// Instance indices under the master seed.
    pub samples: Vec<u64>,
    pub search: SearchConfig,
}

impl Default for GapConfig {
    fn default() -> Self {
        Self {
            n: 12,
            samples: vec![0],
            search: SearchConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    pub ns: Vec<usize>,
    pub samples: usize,
    pub search: SearchConfig,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            ns: vec![10, 12, 14, 16],
            samples: 25,
            search: SearchConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealConfig {
    pub n: usize,
    pub samples: Vec<u64>,
    pub taus: Grid,
    /// `null` means `5 · |E0|/n`, well inside the paramagnet.
    pub gamma_start: Option<f64>,
    pub gamma_end: f64,
    /// Largest phase `dt · ‖H‖` per step.
    pub dt_rule: f64,
    /// Record the instantaneous-ground-state fidelity every this many steps.
    pub checkpoint_every: Option<usize>,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            n: 8,
            samples: vec![0],
            taus: Grid::Values(vec![1.0, 10.0, 100.0]),
            gamma_start: None,
            gamma_end: 0.0,
            dt_rule: 0.1,
            checkpoint_every: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseDiagramConfig {
    pub temperatures: Grid,
    pub tol: f64,
}

impl Default for PhaseDiagramConfig {
    fn default() -> Self {
        Self {
            temperatures: Grid::Range {
                start: 0.0,
                stop: 1.5,
                points: 16,
            },
            tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InstantonConfig {
    /// Sizes for the surface-cost gap estimate.
    pub ns: Vec<usize>,
    pub theta: f64,
    pub beta: f64,
    pub j: f64,
    pub gamma: f64,
    /// Even jump counts at which the action is tabulated.
    pub jumps: Vec<u32>,
}

impl Default for InstantonConfig {
    fn default() -> Self {
        Self {
            ns: (2..=20).step_by(2).collect(),
            theta: 0.5,
            beta: 10.0,
            j: 1.0,
            gamma: 0.5,
            jumps: vec![0, 2, 4, 6, 8],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default = "default_master_seed")]
    pub master_seed: u64,
    /// Worker threads; `0` means all available cores. Results do not depend on it.
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<GapConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anneal: Option<AnnealConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_diagram: Option<PhaseDiagramConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instanton: Option<InstantonConfig>,
}

fn default_master_seed() -> u64 {
    1
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            master_seed: default_master_seed(),
            threads: 0,
            out: None,
            spectrum: None,
            gap: None,
            scaling: None,
            anneal: None,
            phase_diagram: None,
            instanton: None,
        }
    }

    /// Fills the active section with defaults and drops the others.
    pub fn materialize(mut self) -> Self {
        let c = self.command;
        self.spectrum = (c == Command::Spectrum).then(|| {
            let mut s = self.spectrum.take().unwrap_or_default();
            if let Some(e) = &s.energies {
                if e.len().is_power_of_two() {
                    s.n = e.len().trailing_zeros() as usize;
                }
            }
            s
        });
        self.gap = (c == Command::Gap).then(|| self.gap.take().unwrap_or_default());
        self.scaling = (c == Command::Scaling).then(|| self.scaling.take().unwrap_or_default());
        self.anneal = (c == Command::Anneal).then(|| self.anneal.take().unwrap_or_default());
        self.phase_diagram =
            (c == Command::PhaseDiagram).then(|| self.phase_diagram.take().unwrap_or_default());
        self.instanton = (c == Command::Instanton).then(|| self.instanton.take().unwrap_or_default());
        self
    }

    /// Checks every numeric field against what the target operation accepts.
    /// Call on a materialized config.
    pub fn validate(&self) -> Vec<Issue> {
        let mut v = Validator::default();
        match self.command {
            Command::Spectrum => {
                let s = self.spectrum.as_ref().expect("materialized");
                let section = "spectrum";
                let n = match &s.energies {
                    Some(e) => {
                        let ok = e.len() >= 2 && e.len().is_power_of_two() && e.iter().all(|x| x.is_finite());
                        v.check(ok, section, "energies", "need 2^n finite values with n >= 1");
                        e.len().max(1).trailing_zeros() as usize
                    }
                    None => {
                        v.spins(section, "n", s.n);
                        s.n
                    }
                };
                let gammas = s.gammas.values();
                v.grid(section, "gammas", &gammas, 0.0);
                v.check(
                    s.k >= 2 && n <= MAX_SPINS && s.k <= 1usize << n,
                    section,
                    "k",
                    "need 2 <= k <= 2^n",
                );
                v.positive(section, "tol", s.tol);
            }
            Command::Gap => {
                let g = self.gap.as_ref().expect("materialized");
                v.spins("gap", "n", g.n);
                v.check(!g.samples.is_empty(), "gap", "samples", "need at least one instance");
                v.search("gap", &g.search);
            }
            Command::Scaling => {
                let s = self.scaling.as_ref().expect("materialized");
                v.check(!s.ns.is_empty(), "scaling", "ns", "need at least one size");
                for &n in &s.ns {
                    v.spins("scaling", "ns", n);
                }
                v.check(
                    s.ns.windows(2).all(|w| w[0] < w[1]),
                    "scaling",
                    "ns",
                    "sizes must be strictly increasing",
                );
                v.check(s.samples >= 10, "scaling", "samples", "need at least 10 samples per size");
                v.search("scaling", &s.search);
            }
            Command::Anneal => {
                let a = self.anneal.as_ref().expect("materialized");
                let section = "anneal";
                v.spins(section, "n", a.n);
                v.check(!a.samples.is_empty(), section, "samples", "need at least one instance");
                let taus = a.taus.values();
                v.check(!taus.is_empty(), section, "taus", "need at least one annealing time");
                v.check(
                    taus.iter().all(|t| t.is_finite() && *t > 0.0),
                    section,
                    "taus",
                    "annealing times must be positive",
                );
                v.check(
                    taus.windows(2).all(|w| w[0] <= w[1]),
                    section,
                    "taus",
                    "annealing times must be ascending",
                );
                if let Some(g) = a.gamma_start {
                    v.check(g.is_finite() && g > 0.0, section, "gamma_start", "must be positive");
                }
                v.check(
                    a.gamma_end.is_finite() && a.gamma_end >= 0.0,
                    section,
                    "gamma_end",
                    "must be non-negative",
                );
                if let Some(g) = a.gamma_start {
                    v.check(a.gamma_end < g, section, "gamma_end", "must lie below gamma_start");
                }
                v.check(
                    a.dt_rule > 0.0 && a.dt_rule <= qrem::anneal::MAX_STEP_PHASE,
                    section,
                    "dt_rule",
                    &format!("must lie in (0, {}]", qrem::anneal::MAX_STEP_PHASE),
                );
                v.check(a.checkpoint_every != Some(0), section, "checkpoint_every", "must be positive");
            }
            Command::PhaseDiagram => {
                let p = self.phase_diagram.as_ref().expect("materialized");
                let temps = p.temperatures.values();
                v.grid("phase_diagram", "temperatures", &temps, 0.0);
                v.positive("phase_diagram", "tol", p.tol);
            }
            Command::Instanton => {
                let i = self.instanton.as_ref().expect("materialized");
                let section = "instanton";
                v.check(i.ns.iter().all(|&n| n >= 1), section, "ns", "sizes must be >= 1");
                v.check(
                    (0.0..=1.0).contains(&i.theta),
                    section,
                    "theta",
                    "glass fraction must lie in [0, 1]",
                );
                v.positive(section, "beta", i.beta);
                v.positive(section, "j", i.j);
                v.positive(section, "gamma", i.gamma);
                v.check(i.jumps.iter().all(|k| k % 2 == 0), section, "jumps", "jump counts must be even");
            }
        }
        v.issues
    }
}

/// A validation failure, located by its key path.
#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    pub section: &'static str,
    pub field: &'static str,
    pub message: String,
}

#[derive(Default)]
struct Validator {
    issues: Vec<Issue>,
}

impl Validator {
    fn check(&mut self, ok: bool, section: &'static str, field: &'static str, message: &str) {
        if !ok {
            self.issues.push(Issue {
                section,
                field,
                message: message.to_string(),
            });
        }
    }

    fn positive(&mut self, section: &'static str, field: &'static str, x: f64) {
        self.check(x.is_finite() && x > 0.0, section, field, "must be positive and finite");
    }

    fn spins(&mut self, section: &'static str, field: &'static str, n: usize) {
        self.check(
            (1..=MAX_SPINS).contains(&n),
            section,
            field,
            &format!("spin count {n} outside 1..={MAX_SPINS}"),
        );
    }

    fn grid(&mut self, section: &'static str, field: &'static str, values: &[f64], min: f64) {
        self.check(!values.is_empty(), section, field, "grid is empty");
        self.check(
            values.iter().all(|x| x.is_finite() && *x >= min),
            section,
            field,
            &format!("grid values must be finite and >= {min}"),
        );
        self.check(
            values.windows(2).all(|w| w[0] <= w[1]),
            section,
            field,
            "grid must be ascending",
        );
    }

    fn search(&mut self, section: &'static str, s: &SearchConfig) {
        if let Some((lo, hi)) = s.bracket {
            self.check(lo > 0.0 && lo < hi && hi.is_finite(), section, "bracket", "need 0 < lo < hi");
        }
        if let Some(t) = s.tol_gamma {
            self.positive(section, "tol_gamma", t);
        }
        if let Some(t) = s.tol_eig {
            self.positive(section, "tol_eig", t);
        }
    }
}

/// Byte offset of the first `"name":` key in `text`.
fn find_key(text: &str, name: &str) -> Option<usize> {
    let quoted = format!("\"{name}\"");
    text.match_indices(&quoted)
        .map(|(i, _)| i)
        .find(|&i| text[i + quoted.len()..].trim_start().starts_with(':'))
}

/// 1-based line of `section.field` in the config source, falling back to the
/// section, then to line 1 for values that came from defaults.
pub fn locate(source: &str, section: &str, field: &str) -> usize {
    let line_of = |pos: usize| source[..pos].matches('\n').count() + 1;
    match find_key(source, section) {
        Some(s) => match find_key(&source[s + 1..], field) {
            Some(f) if section != field => line_of(s + 1 + f),
            _ => line_of(s),
        },
        None => 1,
    }
}

pub struct ValidationError {
    pub origin: String,
    pub lines: Vec<(usize, Issue)>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration:")?;
        for (line, issue) in &self.lines {
            writeln!(
                f,
                "  {}:{}: {}.{}: {}",
                self.origin, line, issue.section, issue.field, issue.message
            )?;
        }
        Ok(())
    }
}
