//! Named, configured runs that write self-describing output directories.
//!
//! A run directory holds `manifest.json` (resolved config, library version,
//! artifact list), `config.toml` (the resolved config, runnable as is), the
//! result tables and `checks.json` with the invariant verdicts.

mod config;
mod output;
mod runners;

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dynamics::StateVector;
use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;

pub use config::{
    ExperimentConfig, FieldError, InitialState, ModelConfig, OutputConfig, OutputFormat, RunConfig,
    ValidationReport,
};
pub use output::{Check, Table};

/// File in an `evolve1d` run directory holding the projected state.
pub const MU_FILE: &str = "mu.json";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    #[default]
    Spectrum,
    LadderScan,
    E0VsOmega,
    Evolve1d,
    Evolve2d,
    PairEquivalence,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Spectrum,
        ExperimentKind::LadderScan,
        ExperimentKind::E0VsOmega,
        ExperimentKind::Evolve1d,
        ExperimentKind::Evolve2d,
        ExperimentKind::PairEquivalence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::LadderScan => "ladder_scan",
            ExperimentKind::E0VsOmega => "e0_vs_omega",
            ExperimentKind::Evolve1d => "evolve1d",
            ExperimentKind::Evolve2d => "evolve2d",
            ExperimentKind::PairEquivalence => "pair_equivalence",
        }
    }
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub experiment: ExperimentKind,
    /// The result this run reproduces.
    pub reproduces: String,
    /// Config overrides relative to the experiment defaults, as TOML.
    pub config: String,
}

/// Reproducible runs, each tied to the result it regenerates.
pub fn list_experiments() -> Vec<CatalogEntry> {
    let e = |name: &str, experiment, reproduces: &str, config: &str| CatalogEntry {
        name: name.to_string(),
        experiment,
        reproduces: reproduces.to_string(),
        config: config.to_string(),
    };
    vec![
        e(
            "dimer-spectrum",
            ExperimentKind::Spectrum,
            "complex spectrum of the J = 1, J' = i chain at omega = 0.2, with its localized eigenstates",
            "[model]\nkind = \"dimer1i\"\nn_sites = 60\nomega = 0.2\n",
        ),
        e(
            "complex-ladders",
            ExperimentKind::LadderScan,
            "two conjugate Wannier-Stark ladders E0 + 2 l omega and conj(E0) + 2 l omega, plus the T2, gauge and translation ladder operators",
            "[model]\nkind = \"dimer1i\"\nn_sites = 60\nomega = 0.2\n",
        ),
        e(
            "jjstar-ladders",
            ExperimentKind::LadderScan,
            "J/J* chain: the translation-by-one plus conjugation operator that maps E0 to conj(E0) + omega",
            "[model]\nkind = \"dimer_jjstar\"\nn_sites = 60\nomega = 0.2\nj_even = [1.0, 0.5]\nj_odd = [1.0, -0.5]\n",
        ),
        e(
            "e0-vs-omega",
            ExperimentKind::E0VsOmega,
            "dependence of the reference energy E0 on the slope, omega from 0.2 to 1.2",
            "[model]\nkind = \"dimer1i\"\nn_sites = 60\n",
        ),
        e(
            "bloch-gaussian",
            ExperimentKind::Evolve1d,
            "growing, periodic and damped Bloch oscillation of a Gaussian packet (alpha = 0.3) for lambda below, at and above Im E0, period pi / omega",
            "[run]\ninitial = \"gaussian\"\nalpha = 0.3\n",
        ),
        e(
            "bloch-site",
            ExperimentKind::Evolve1d,
            "breathing Bloch oscillation of a single-site initial state, same rescaling rates",
            "[run]\ninitial = \"site\"\n",
        ),
        e(
            "pair-oscillation-gaussian",
            ExperimentKind::Evolve2d,
            "two-particle density P(x, y, t) over one revival period and the fidelity revival, seeded by the projected Gaussian state",
            "[model]\nkind = \"pair2d_electron\"\nn_sites = 40\n[run]\ninitial = \"gaussian\"\n",
        ),
        e(
            "pair-oscillation-site",
            ExperimentKind::Evolve2d,
            "two-particle density and fidelity seeded by the projected single-site state",
            "[model]\nkind = \"pair2d_electron\"\nn_sites = 40\n[run]\ninitial = \"site\"\n",
        ),
        e(
            "pair-equivalence",
            ExperimentKind::PairEquivalence,
            "square-lattice images of electron, fermion and boson pairs against the second-quantized Hamiltonian, and the singlet/triplet sector split",
            "[run]\nsides = [4, 6, 8]\n",
        ),
    ]
}

/// Projected single-particle state written by `evolve1d`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MuRecord {
    pub lattice: LatticeSpec,
    pub e0: C64,
    pub t_late: f64,
    pub initial: InitialState,
    pub alpha: f64,
    pub j0: i64,
    pub seed: u64,
    pub mu: StateVector,
}

impl MuRecord {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MU_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub experiment: ExperimentKind,
    pub version: String,
    pub lattice: LatticeSpec,
    pub config: ExperimentConfig,
    pub artifacts: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub directory: PathBuf,
    pub artifacts: Vec<PathBuf>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl RunOutcome {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.informational)
    }
}

/// What a runner produced, before anything is written.
pub(crate) struct Results {
    pub tables: Vec<Table>,
    pub json: Vec<(String, serde_json::Value)>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl Results {
    fn new() -> Self {
        Self {
            tables: Vec::new(),
            json: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }
}

/// Validates, runs and writes one experiment.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome> {
    let report = config.validate();
    if !report.is_valid() {
        let msg = report.errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ");
        return Err(Error::Config(msg));
    }
    let resolved = config.resolved();
    let lattice = resolved.lattice()?;
    let results = match resolved.experiment {
        ExperimentKind::Spectrum => runners::spectrum(&resolved, &lattice)?,
        ExperimentKind::LadderScan => runners::ladder_scan(&resolved, &lattice)?,
        ExperimentKind::E0VsOmega => runners::e0_vs_omega(&resolved, &lattice)?,
        ExperimentKind::Evolve1d => runners::evolve1d(&resolved, &lattice)?,
        ExperimentKind::Evolve2d => runners::evolve2d(&resolved, &lattice)?,
        ExperimentKind::PairEquivalence => runners::pair_equivalence(&resolved, &lattice)?,
    };

    let dir = resolved.output.directory.clone();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut artifacts = Vec::new();
    for t in &results.tables {
        artifacts.push(t.write(&dir, resolved.output.format)?);
    }
    for (name, value) in &results.json {
        let path = dir.join(name);
        output::write_json(&path, value)?;
        artifacts.push(path);
    }
    let checks_path = dir.join("checks.json");
    output::write_json(&checks_path, &results.checks)?;
    artifacts.push(checks_path);
    let config_path = dir.join("config.toml");
    std::fs::write(&config_path, resolved.to_toml_string()?).map_err(|e| Error::io(&config_path, e))?;
    artifacts.push(config_path);

    let manifest = Manifest {
        experiment: resolved.experiment,
        version: env!("CARGO_PKG_VERSION").to_string(),
        lattice,
        config: resolved.clone(),
        artifacts: artifacts
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .chain(std::iter::once("manifest.json".to_string()))
            .collect(),
        notes: results.notes.clone(),
    };
    let manifest_path = dir.join("manifest.json");
    output::write_json(&manifest_path, &manifest)?;
    artifacts.push(manifest_path);

    Ok(RunOutcome {
        directory: dir,
        artifacts,
        checks: results.checks,
        notes: results.notes,
    })
}
