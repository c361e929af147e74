use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use starkladder_core::experiments::{self, ExperimentConfig, ExperimentKind, OutputFormat};
use starkladder_core::lattice::LatticeKind;
use starkladder_core::Error;

/// Wannier-Stark ladders and Bloch oscillations on tilted non-Hermitian lattices.
///
/// Settings are resolved as: built-in defaults, then the `--config` file,
/// then command-line flags.
#[derive(Parser)]
#[command(name = "starkladder", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues, eigenvector diagnostics and symmetry certificates.
    Spectrum(RunArgs),
    /// Ladder families, conjugate pairing and ladder-operator residuals.
    LadderScan(RunArgs),
    /// Reference energy E0 over a grid of slopes, with a linear fit.
    E0VsOmega(RunArgs),
    /// Single-particle evolution, rescaled probabilities and the projected state.
    Evolve1d(RunArgs),
    /// Pair evolution on the square lattice and its fidelity revival.
    Evolve2d(RunArgs),
    /// Pair lattices against the second-quantized oracle and the sector split.
    PairEquivalence(RunArgs),
    /// Runs whatever experiment the config file names.
    Run(RunArgs),
    /// Checks a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Lists the reproducible runs.
    List {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    omega: Option<f64>,
    /// Chain length, or side length of a pair lattice.
    #[arg(long, allow_negative_numbers = true)]
    sites: Option<i64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Lattice kind, e.g. dimer1i, dimer_jjstar, uniform1d, pair2d_electron.
    #[arg(long)]
    model: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Earlier evolve1d run directory providing mu (evolve2d).
    #[arg(long)]
    from: Option<PathBuf>,
    /// Exit with status 3 when any check fails.
    #[arg(long)]
    strict: bool,
}

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn exit_for(e: &Error) -> ExitCode {
    let code = if e.is_config() {
        EXIT_CONFIG
    } else if matches!(e, Error::Io { .. }) {
        EXIT_IO
    } else {
        EXIT_NUMERICAL
    };
    ExitCode::from(code)
}

fn build_config(kind: Option<ExperimentKind>, a: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::from_path(p)?,
        None => ExperimentConfig::new(kind.unwrap_or_default()),
    };
    if let Some(k) = kind {
        if a.config.is_some() && cfg.experiment != k {
            eprintln!("note: config names experiment {}, running {k}", cfg.experiment);
        }
        cfg.experiment = k;
    }
    if let Some(d) = &a.out {
        cfg.output.directory = d.clone();
    }
    if let Some(w) = a.omega {
        cfg.model.omega = Some(w);
    }
    if let Some(n) = a.sites {
        cfg.model.n_sites = Some(n);
    }
    if let Some(l) = a.lambda {
        cfg.run.lambda = Some(l);
    }
    if let Some(al) = a.alpha {
        cfg.run.alpha = al;
    }
    if let Some(m) = &a.model {
        let k: LatticeKind = m.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
        if cfg.model.kind != Some(k) {
            // hoppings from the file belong to the old kind
            cfg.model.j_even = None;
            cfg.model.j_odd = None;
        }
        cfg.model.kind = Some(k);
    }
    if let Some(f) = &a.format {
        cfg.output.format = f.parse::<OutputFormat>()?;
    }
    if let Some(d) = &a.from {
        cfg.run.mu_from = Some(d.clone());
    }
    Ok(cfg)
}

fn run(kind: Option<ExperimentKind>, a: &RunArgs) -> ExitCode {
    let cfg = match build_config(kind, a) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_for(&e);
        }
    };
    let report = cfg.validate();
    if !report.is_valid() {
        for e in &report.errors {
            eprintln!("error: {e}");
        }
        return ExitCode::from(EXIT_CONFIG);
    }
    match experiments::run(&cfg) {
        Ok(out) => {
            println!("{} -> {}", cfg.experiment, out.directory.display());
            for c in &out.checks {
                let verdict = match (c.informational, c.passed) {
                    (true, _) => "INFO",
                    (false, true) => "PASS",
                    (false, false) => "FAIL",
                };
                match (c.value, c.threshold) {
                    (Some(v), Some(t)) => println!("  {verdict} {}: {v:.3e} (threshold {t:.1e})", c.name),
                    _ => println!("  {verdict} {}", c.name),
                }
            }
            for n in &out.notes {
                println!("  note: {n}");
            }
            if a.strict && !out.all_passed() {
                return ExitCode::from(EXIT_NUMERICAL);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Spectrum(a) => run(Some(ExperimentKind::Spectrum), &a),
        Command::LadderScan(a) => run(Some(ExperimentKind::LadderScan), &a),
        Command::E0VsOmega(a) => run(Some(ExperimentKind::E0VsOmega), &a),
        Command::Evolve1d(a) => run(Some(ExperimentKind::Evolve1d), &a),
        Command::Evolve2d(a) => run(Some(ExperimentKind::Evolve2d), &a),
        Command::PairEquivalence(a) => run(Some(ExperimentKind::PairEquivalence), &a),
        Command::Run(a) => {
            if a.config.is_none() {
                eprintln!("error: run needs --config");
                return ExitCode::from(EXIT_CONFIG);
            }
            run(None, &a)
        }
        Command::Validate { config } => match ExperimentConfig::from_path(&config) {
            Ok(cfg) => {
                let r = cfg.validate();
                if r.is_valid() {
                    println!("valid");
                    ExitCode::SUCCESS
                } else {
                    for e in &r.errors {
                        println!("{e}");
                    }
                    ExitCode::from(EXIT_CONFIG)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                exit_for(&e)
            }
        },
        Command::List { json } => {
            let cat = experiments::list_experiments();
            if json {
                match serde_json::to_string_pretty(&cat) {
                    Ok(s) => println!("{s}"),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(EXIT_IO);
                    }
                }
            } else {
                for e in &cat {
                    println!("{:<28} {:<17} {}", e.name, e.experiment.name(), e.reproduces);
                }
            }
            ExitCode::SUCCESS
        }
    }
}
