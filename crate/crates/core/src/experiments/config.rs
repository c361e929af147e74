use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeKind, LatticeSpec};
use crate::spectral::ImSign;

use super::ExperimentKind;

/// One run, as read from a TOML file. Every field may be omitted; see
/// [`ExperimentConfig::resolved`] for the defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Lattice parameters. `n_sites` is the side length `L` for pair kinds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// `dimer1i`, or `pair2d_electron` for `evolve2d` and `pair_equivalence`.
    pub kind: Option<LatticeKind>,
    /// 60 for chains, 40 for `evolve2d`, 8 for `pair_equivalence`.
    pub n_sites: Option<i64>,
    /// 0.2.
    pub omega: Option<f64>,
    /// `[re, im]`; the kind's default hopping when omitted.
    pub j_even: Option<C64>,
    pub j_odd: Option<C64>,
    /// `n_sites / 2`.
    pub origin_offset: Option<i64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    #[default]
    Gaussian,
    Site,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Explicit sample times; overrides `t_max` and `n_steps`.
    pub times: Option<Vec<f64>>,
    /// Default `2 pi / omega` (two single-particle periods) for `evolve1d`
    /// and three revival periods for `evolve2d`.
    pub t_max: Option<f64>,
    pub n_steps: usize,
    /// Rescaling rate of `evolve1d` probabilities; default `Im E0`.
    pub lambda: Option<f64>,
    pub alpha: f64,
    /// Packet center; default `n_sites / 2`.
    pub j0: Option<i64>,
    pub initial: InitialState,
    /// Project the `evolve1d` initial state onto the `Im E > 0` eigenvectors.
    pub project: bool,
    pub im_sign: ImSign,
    /// Default `max(10 / (2 Im E0), 3 pi / omega)`.
    pub t_late: Option<f64>,
    pub seed: u64,
    /// Ladder spacing; default `cell_length * omega`.
    pub spacing: Option<f64>,
    pub tolerance: f64,
    /// Default `0.2, 0.3, ..., 1.2`.
    pub omega_grid: Option<Vec<f64>>,
    /// Directory of an earlier `evolve1d` run whose `mu.json` seeds `evolve2d`.
    pub mu_from: Option<PathBuf>,
    /// Pair-lattice side lengths checked by `pair_equivalence`.
    pub sides: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            times: None,
            t_max: None,
            n_steps: 200,
            lambda: None,
            alpha: 0.3,
            j0: None,
            initial: InitialState::Gaussian,
            project: false,
            im_sign: ImSign::Positive,
            t_late: None,
            seed: 0,
            spacing: None,
            tolerance: 1e-6,
            omega_grid: None,
            mu_from: None,
            sides: vec![4, 6, 8],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!("output.format must be csv or json, got `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub format: OutputFormat,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

/// A problem with one config field.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for FieldError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<FieldError>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    fn push(&mut self, field: &str, message: impl Into<String>) {
        self.errors.push(FieldError {
            field: field.to_string(),
            message: message.into(),
        });
    }
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            model: ModelConfig::default(),
            run: RunConfig::default(),
            output: OutputConfig::default(),
        }
    }

    /// Parses TOML. Syntax errors and unknown keys carry line and column.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn default_kind(&self) -> LatticeKind {
        match self.experiment {
            ExperimentKind::Evolve2d | ExperimentKind::PairEquivalence => LatticeKind::Pair2DElectron,
            _ => LatticeKind::Dimer1i,
        }
    }

    fn default_sites(&self) -> i64 {
        match self.experiment {
            ExperimentKind::Evolve2d => 40,
            ExperimentKind::PairEquivalence => 8,
            _ => 60,
        }
    }

    /// Copy with every optional model field filled in.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        let kind = c.model.kind.unwrap_or_else(|| self.default_kind());
        let n = c.model.n_sites.unwrap_or_else(|| self.default_sites());
        let (je, jo) = kind.default_hopping();
        c.model.kind = Some(kind);
        c.model.n_sites = Some(n);
        c.model.omega = Some(c.model.omega.unwrap_or(0.2));
        c.model.j_even = Some(c.model.j_even.unwrap_or(je));
        c.model.j_odd = Some(c.model.j_odd.unwrap_or(jo));
        c.model.origin_offset = Some(c.model.origin_offset.unwrap_or(n.max(0) / 2));
        c
    }

    /// Lattice of the resolved model.
    pub fn lattice(&self) -> Result<LatticeSpec> {
        let r = self.resolved();
        let m = &r.model;
        let n = m.n_sites.expect("resolved");
        if n < 2 {
            return Err(Error::Config(format!("model.n_sites: must be at least 2, got {n}")));
        }
        let spec = LatticeSpec {
            kind: m.kind.expect("resolved"),
            n_sites: n as usize,
            omega: m.omega.expect("resolved"),
            j_even: m.j_even.expect("resolved"),
            j_odd: m.j_odd.expect("resolved"),
            origin_offset: m.origin_offset.expect("resolved"),
        };
        spec.validate().map_err(|e| Error::Config(format!("model: {e}")))?;
        Ok(spec)
    }

    /// Sample times from `run.times`, or `n_steps + 1` points on `[0, t_max]`.
    pub fn sample_times(&self, default_t_max: f64) -> Vec<f64> {
        if let Some(t) = &self.run.times {
            return t.clone();
        }
        let t_max = self.run.t_max.unwrap_or(default_t_max);
        let n = self.run.n_steps.max(1);
        (0..=n).map(|k| t_max * k as f64 / n as f64).collect()
    }

    pub fn omega_grid(&self) -> Vec<f64> {
        self.run
            .omega_grid
            .clone()
            .unwrap_or_else(|| (2..=12).map(|k| k as f64 / 10.0).collect())
    }

    /// Field-level checks without running anything.
    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        let m = &self.model;
        if let Some(n) = m.n_sites {
            if n < 2 {
                r.push("model.n_sites", format!("must be at least 2, got {n}"));
            }
        }
        if let Some(w) = m.omega {
            if !w.is_finite() {
                r.push("model.omega", "must be finite");
            } else if w <= 0.0 && self.experiment != ExperimentKind::Spectrum {
                r.push("model.omega", format!("must be positive for {}, got {w}", self.experiment));
            }
        }
        let kind = m.kind.unwrap_or_else(|| self.default_kind());
        let needs_pair = matches!(self.experiment, ExperimentKind::Evolve2d | ExperimentKind::PairEquivalence);
        let needs_chain = matches!(
            self.experiment,
            ExperimentKind::LadderScan | ExperimentKind::E0VsOmega | ExperimentKind::Evolve1d
        );
        if needs_pair && !kind.is_pair() {
            r.push("model.kind", format!("{} needs a pair lattice kind, got {kind}", self.experiment));
        }
        if needs_chain && kind.is_pair() {
            r.push("model.kind", format!("{} needs a 1D lattice kind, got {kind}", self.experiment));
        }
        if kind.is_pair() && m.n_sites.unwrap_or(4) < 4 {
            r.push("model.n_sites", "pair lattices need side length at least 4");
        }
        if r.errors.iter().all(|e| !e.field.starts_with("model.")) {
            if let Err(e) = self.lattice() {
                r.push("model", e.to_string().trim_start_matches("config error: ").to_string());
            }
        }

        let run = &self.run;
        if let Some(t) = &run.times {
            if t.is_empty() {
                r.push("run.times", "must not be empty");
            } else if t.iter().any(|v| !v.is_finite() || *v < 0.0) {
                r.push("run.times", "must be finite and non-negative");
            } else if t.windows(2).any(|w| w[1] <= w[0]) {
                r.push("run.times", "must be strictly ascending");
            } else if t[0] != 0.0 && matches!(self.experiment, ExperimentKind::Evolve2d) {
                r.push("run.times", "must start at 0 for fidelity");
            }
        }
        if let Some(t) = run.t_max {
            if !(t > 0.0 && t.is_finite()) {
                r.push("run.t_max", format!("must be positive, got {t}"));
            }
        }
        if run.n_steps == 0 {
            r.push("run.n_steps", "must be at least 1");
        }
        if let Some(l) = run.lambda {
            if !l.is_finite() {
                r.push("run.lambda", "must be finite");
            }
        }
        if !(run.alpha > 0.0 && run.alpha.is_finite()) {
            r.push("run.alpha", format!("must be positive, got {}", run.alpha));
        }
        if let (Some(j0), Some(n)) = (run.j0, m.n_sites) {
            if !(0..n).contains(&j0) {
                r.push("run.j0", format!("must lie in [0, {n}), got {j0}"));
            }
        }
        if let Some(t) = run.t_late {
            if !(t > 0.0 && t.is_finite()) {
                r.push("run.t_late", format!("must be positive, got {t}"));
            }
        }
        if let Some(s) = run.spacing {
            if !(s > 0.0 && s.is_finite()) {
                r.push("run.spacing", format!("must be positive, got {s}"));
            }
        }
        if !(run.tolerance > 0.0 && run.tolerance.is_finite()) {
            r.push("run.tolerance", format!("must be positive, got {}", run.tolerance));
        }
        if let Some(g) = &run.omega_grid {
            if g.is_empty() {
                r.push("run.omega_grid", "must not be empty");
            } else if g.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
                r.push("run.omega_grid", "entries must be positive");
            } else if g.windows(2).any(|w| w[1] <= w[0]) {
                r.push("run.omega_grid", "must be strictly ascending");
            }
        }
        if let Some(p) = &run.mu_from {
            if self.experiment != ExperimentKind::Evolve2d {
                r.push("run.mu_from", "only used by evolve2d");
            } else if !p.join(super::MU_FILE).is_file() {
                r.push("run.mu_from", format!("{} has no {}", p.display(), super::MU_FILE));
            }
        }
        if run.sides.is_empty() {
            r.push("run.sides", "must not be empty");
        } else if let Some(s) = run.sides.iter().find(|&&s| s < 4) {
            r.push("run.sides", format!("pair lattices need side length at least 4, got {s}"));
        }
        r
    }
}
