use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde_json::{json, Value};

use super::config::{ExperimentConfig, InitialState};
use super::output::{Check, Table};
use super::{MuRecord, Results, MU_FILE};
use crate::dynamics::{
    build_pair_product_state, default_t_late, dirac_probability, extract_projected_mu, fidelity, gaussian_state,
    period_peak_pairs, periodicity_defect, random_state, revival_check, site_state, Propagator, StateVector,
    REVIVAL_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::lattice::{
    build_chain, build_pair_lattice, build_symmetry, gauge_conjugation_defect, pt_commutator_norm,
    ramped_translation_defect, translation_conjugation_defect, BasisLabel, InteriorWindow, LatticeKind,
    LatticeSpec, OperatorMatrix, SymmetryKind,
};
use crate::pairmap::{
    lift_1d_evolution, oracle_for_spec, sector_decompose, PairBasis, PairKind, REFLECTION_TOLERANCE,
};
use crate::spectral::{
    conjugation_closure_defect, detect_ladders, eigendecompose, multiset_distance, scan_e0_vs_omega,
    select_reference_state, verify_ladder_operator, ComplexSpectrum, ReferenceState, RESIDUAL_BOUND,
};

const CERTIFICATE_BOUND: f64 = 1e-12;
const PERIODICITY_BOUND: f64 = 1e-3;
const LINEARITY_BOUND: f64 = 1e-2;
const EVOLUTION_BOUND: f64 = 1e-8;
const MERGE_BOUND: f64 = 1e-9;
const MU_LEAKAGE_BOUND: f64 = 1e-4;

fn f(v: f64) -> Value {
    json!(v)
}

fn hamiltonian(spec: &LatticeSpec) -> Result<OperatorMatrix> {
    if spec.kind.is_pair() {
        build_pair_lattice(spec)
    } else {
        build_chain(spec)
    }
}

fn with_model_meta(t: Table, spec: &LatticeSpec) -> Table {
    t.meta("kind", spec.kind.name())
        .meta("n_sites", spec.n_sites)
        .meta("omega", spec.omega)
}

fn label_cells(l: &BasisLabel) -> Vec<Value> {
    match *l {
        BasisLabel::Site(j) => vec![json!(j)],
        BasisLabel::Pair(x, y) => vec![json!(x), json!(y)],
    }
}

/// Single-particle Bloch period `2 pi / (cell_length * omega)`.
fn bloch_period(spec: &LatticeSpec) -> f64 {
    2.0 * PI / (spec.kind.cell_length() as f64 * spec.omega)
}

fn reference(cfg: &ExperimentConfig, spectrum: &ComplexSpectrum, n: usize) -> Result<ReferenceState> {
    select_reference_state(spectrum, InteriorWindow::for_sites(n), cfg.run.im_sign)
}

fn symmetry_checks(spec: &LatticeSpec, h: &OperatorMatrix) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    if spec.kind.is_pair() {
        out.push(Check::below("pt_commutator", pt_commutator_norm(h)?, CERTIFICATE_BOUND));
        return Ok(out);
    }
    let window = InteriorWindow::for_sites(spec.n_sites);
    let cell = spec.kind.cell_length();
    out.push(Check::below(
        &format!("translation_T{cell}"),
        ramped_translation_defect(h, cell, spec.omega, window)?,
        CERTIFICATE_BOUND,
    ));
    match spec.kind {
        LatticeKind::Dimer1i => out.push(Check::below("gauge_conjugation", gauge_conjugation_defect(h)?, CERTIFICATE_BOUND)),
        LatticeKind::DimerJJstar => out.push(Check::below(
            "translation_T1_conjugation",
            translation_conjugation_defect(h, 1, spec.omega, window)?,
            CERTIFICATE_BOUND,
        )),
        _ => {}
    }
    Ok(out)
}

pub(crate) fn spectrum(_cfg: &ExperimentConfig, spec: &LatticeSpec) -> Result<Results> {
    let h = hamiltonian(spec)?;
    let s = eigendecompose(&h)?;
    let mut t = with_model_meta(
        Table::new("spectrum", &["index", "re", "im", "center", "participation", "residual"]),
        spec,
    );
    for (k, e) in s.eigenvalues().iter().enumerate() {
        t.push(vec![
            json!(k),
            f(e.re),
            f(e.im),
            f(s.localization_center(k)),
            f(s.participation_ratio(k)),
            f(s.residuals()[k]),
        ]);
    }
    let mut r = Results::new();
    r.checks.push(Check::below("max_residual", s.max_residual(), RESIDUAL_BOUND));
    r.checks.push(Check::below(
        "conjugation_closure",
        conjugation_closure_defect(s.eigenvalues()),
        1e-6,
    ));
    r.checks.extend(symmetry_checks(spec, &h)?);
    r.tables.push(t);
    Ok(r)
}

pub(crate) fn ladder_scan(cfg: &ExperimentConfig, spec: &LatticeSpec) -> Result<Results> {
    let h = build_chain(spec)?;
    let s = eigendecompose(&h)?;
    let cell = spec.kind.cell_length();
    let spacing = cfg.run.spacing.unwrap_or(cell as f64 * spec.omega);
    let tol = cfg.run.tolerance;
    let report = detect_ladders(&s, spacing, tol)?;
    let window = InteriorWindow::for_sites(spec.n_sites);

    let mut fam = with_model_meta(Table::new("families", &["family", "rung", "index", "re", "im"]), spec)
        .meta("spacing", spacing);
    for (i, fm) in report.families.iter().enumerate() {
        for (rung, &k) in fm.member_indices.iter().enumerate() {
            let e = s.eigenvalue(k);
            fam.push(vec![json!(i), json!(rung), json!(k), f(e.re), f(e.im)]);
        }
    }
    let mut pairs = with_model_meta(Table::new("pairs", &["plus", "minus", "deviation"]), spec);
    for p in &report.conjugate_pairing {
        pairs.push(vec![json!(p.plus), json!(p.minus), f(p.deviation)]);
    }

    let mut r = Results::new();
    r.checks.push(Check::at_least("families", report.families.len() as f64, 2.0));
    let spacing_dev = report
        .families
        .iter()
        .filter_map(|fm| fm.deviation_within(&s, window))
        .fold(0.0, f64::max);
    r.checks.push(Check::below("interior_spacing_deviation", spacing_dev, tol));
    if spec.kind == LatticeKind::Dimer1i {
        match report.max_pairing_deviation() {
            Some(d) => r.checks.push(Check::below("conjugate_pairing", d, tol)),
            None => r.checks.push(Check::flag("conjugate_pairing", false, "no conjugate pairs found")),
        }
    } else {
        r.notes.push(format!(
            "{} conjugate pair(s); pairing is only expected for dimer1i",
            report.conjugate_pairing.len()
        ));
    }

    let state = reference(cfg, &s, spec.n_sites)?;
    let mut ops: Vec<(String, SymmetryKind, f64)> =
        vec![(format!("T{cell}"), SymmetryKind::Translate(cell), cell as f64 * spec.omega)];
    match spec.kind {
        LatticeKind::Dimer1i => ops.push((
            "TR*g".into(),
            SymmetryKind::Composite(vec![SymmetryKind::TimeReversal, SymmetryKind::Gauge]),
            0.0,
        )),
        LatticeKind::DimerJJstar => ops.push((
            "TR*T1".into(),
            SymmetryKind::Composite(vec![SymmetryKind::TimeReversal, SymmetryKind::Translate(1)]),
            spec.omega,
        )),
        _ => {}
    }
    for (name, kind, shift) in ops {
        let op = build_symmetry(&kind, h.labels())?;
        let res = verify_ladder_operator(&h, &op, &state, shift, window)?;
        r.checks.push(Check::below(&format!("ladder_operator_{name}"), res, tol));
    }
    r.json.push((
        "reference.json".into(),
        json!({
            "index": state.index,
            "energy": [state.energy.re, state.energy.im],
            "localization_center": state.localization_center,
            "participation_ratio": state.participation_ratio,
            "residual": state.residual,
        }),
    ));
    r.tables.push(fam);
    r.tables.push(pairs);
    Ok(r)
}

pub(crate) fn e0_vs_omega(cfg: &ExperimentConfig, spec: &LatticeSpec) -> Result<Results> {
    let grid = cfg.omega_grid();
    let scan = scan_e0_vs_omega(spec, &grid, cfg.run.im_sign)?;
    let mut t = Table::new("e0", &["omega", "re", "im", "center", "participation", "error"])
        .meta("kind", spec.kind.name())
        .meta("n_sites", spec.n_sites);
    for row in &scan.rows {
        let e = row.e0;
        t.push(vec![
            f(row.omega),
            e.map_or(Value::Null, |e| f(e.re)),
            e.map_or(Value::Null, |e| f(e.im)),
            row.localization_center.map_or(Value::Null, f),
            row.participation_ratio.map_or(Value::Null, f),
            row.error.clone().map_or(Value::Null, Value::String),
        ]);
    }
    let mut r = Results::new();
    match scan.fit {
        Some(fit) => {
            r.checks.push(
                Check::below("linear_fit_max_residual", fit.max_residual, LINEARITY_BOUND)
                    .with_note(format!("slope {:.6}, intercept {:.6}", fit.slope, fit.intercept)),
            );
            r.json.push(("fit.json".into(), serde_json::to_value(fit)?));
        }
        None => r.checks.push(Check::flag("linear_fit_max_residual", false, scan.notes.join("; "))),
    }
    r.notes.extend(scan.notes);
    r.tables.push(t);
    Ok(r)
}

/// Initial state of a chain run, optionally projected onto `Im E > 0`.
fn initial_state(cfg: &ExperimentConfig, spec: &LatticeSpec, prop: &Propagator) -> Result<StateVector> {
    let labels = prop.hamiltonian().labels();
    let j0 = cfg.run.j0.unwrap_or(spec.n_sites as i64 / 2);
    let psi = match cfg.run.initial {
        InitialState::Gaussian => gaussian_state(cfg.run.alpha, j0, labels)?,
        InitialState::Site => site_state(j0, labels)?,
        InitialState::Random => random_state(cfg.run.seed, labels)?,
    };
    if !cfg.run.project {
        return Ok(psi);
    }
    let s = prop
        .spectrum()
        .ok_or_else(|| Error::Projection("no certified eigenbasis to project onto".into()))?;
    let keep = |k: usize| {
        let e = s.eigenvalue(k);
        e.im > RESIDUAL_BOUND * e.norm().max(1.0)
    };
    let amps = prop.project(psi.amplitudes(), keep)?;
    StateVector::new(amps, labels.to_vec())?.normalized()
}

struct MuRun {
    record: MuRecord,
    leakage: f64,
}

/// Long-time evolution of the configured initial state on `chain`, returning
/// the rephased, normalized state at `t_late`.
fn project_mu(cfg: &ExperimentConfig, chain: &LatticeSpec, prop: &Propagator, e0: C64) -> Result<MuRun> {
    if !(e0.im > 1e-12) {
        return Err(Error::Projection(format!(
            "Im E0 = {:.3e}: no growing branch to project onto",
            e0.im
        )));
    }
    let t_late = cfg.run.t_late.unwrap_or_else(|| default_t_late(e0.im, chain.omega));
    let psi0 = initial_state(cfg, chain, prop)?;
    let series = prop.evolve(&psi0, &[0.0, t_late])?;
    let mu = extract_projected_mu(&series, e0, t_late)?;
    // weight the eigenvectors with Im E < 0 still carry in mu
    let leakage = match prop.spectrum() {
        Some(s) => {
            let minus = prop.project(mu.amplitudes(), |k| s.eigenvalue(k).im < 0.0)?;
            minus.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
        }
        None => f64::NAN,
    };
    Ok(MuRun {
        record: MuRecord {
            lattice: chain.clone(),
            e0,
            t_late,
            initial: cfg.run.initial,
            alpha: cfg.run.alpha,
            j0: cfg.run.j0.unwrap_or(chain.n_sites as i64 / 2),
            seed: cfg.run.seed,
            mu,
        },
        leakage,
    })
}

fn is_hermitian(h: &OperatorMatrix) -> bool {
    let n = h.dim();
    (0..n).all(|r| (0..n).all(|c| (h.get(r, c) - h.get(c, r).conj()).norm() == 0.0))
}

pub(crate) fn evolve1d(cfg: &ExperimentConfig, spec: &LatticeSpec) -> Result<Results> {
    let h = build_chain(spec)?;
    let prop = Propagator::new(&h)?;
    let spectrum = prop
        .spectrum()
        .ok_or_else(|| Error::Eigensolver {
            dim: h.dim(),
            reason: "eigenvector matrix too ill-conditioned for a reference state".into(),
            max_residual: f64::NAN,
            max_entry: h.max_abs_entry(),
        })?
        .clone();
    let e0 = reference(cfg, &spectrum, spec.n_sites)?.energy;
    let lambda = cfg.run.lambda.unwrap_or(e0.im);
    let period = bloch_period(spec);
    let times = cfg.sample_times(2.0 * period);
    let psi0 = initial_state(cfg, spec, &prop)?;
    let series = prop.evolve(&psi0, &times)?;
    let p = dirac_probability(&series, lambda);

    let mut r = Results::new();
    r.notes.push(format!("propagation path: {:?}", series.path));
    let mut prob = with_model_meta(Table::new("probability", &["t", "site", "value"]), spec)
        .meta("lambda", lambda)
        .meta("e0_re", e0.re)
        .meta("e0_im", e0.im);
    for (ti, &t) in p.times.iter().enumerate() {
        for (n, l) in p.labels.iter().enumerate() {
            let mut row = vec![f(t)];
            row.extend(label_cells(l));
            row.push(f(p.values[ti][n]));
            prob.push(row);
        }
    }
    let mut norms = with_model_meta(Table::new("norm", &["t", "norm", "rescaled_total"]), spec).meta("lambda", lambda);
    for (ti, &t) in p.times.iter().enumerate() {
        norms.push(vec![f(t), f(series.states[ti].norm()), f(p.total(ti))]);
    }

    let window = InteriorWindow::for_sites(spec.n_sites);
    let interior = |n: usize| window.contains_index(n);
    match periodicity_defect(&p, period, interior) {
        Ok(d) => {
            let peaks = period_peak_pairs(&p, period, interior);
            let decaying = peaks.iter().all(|(a, b)| b < a);
            let graded = cfg.run.project && (lambda - e0.im).abs() <= 1e-12;
            r.checks.push(
                Check::below("periodicity", d, PERIODICITY_BOUND)
                    .with_note(format!("lambda {lambda}, period {period}"))
                    .informational(!graded),
            );
            r.checks.push(
                Check::flag("peak_decays_each_period", decaying, format!("lambda {lambda} vs Im E0 {}", e0.im))
                    .informational(lambda <= e0.im),
            );
        }
        Err(e) => r.notes.push(format!("periodicity not evaluated: {e}")),
    }
    if lambda == 0.0 && is_hermitian(&h) {
        let worst = (0..p.times.len()).map(|t| (p.total(t) - 1.0).abs()).fold(0.0, f64::max);
        r.checks.push(Check::below("probability_conservation", worst, 1e-10));
    }

    match project_mu(cfg, spec, &prop, e0) {
        Ok(run) => {
            let mut mt = with_model_meta(Table::new("mu", &["site", "re", "im"]), spec).meta("t_late", run.record.t_late);
            for (l, z) in run.record.mu.labels().iter().zip(run.record.mu.amplitudes()) {
                let mut row = label_cells(l);
                row.extend([f(z.re), f(z.im)]);
                mt.push(row);
            }
            r.tables.push(mt);
            r.checks.push(Check::below("mu_minus_weight", run.leakage, MU_LEAKAGE_BOUND));
            r.json.push((MU_FILE.into(), serde_json::to_value(&run.record)?));
        }
        Err(e) => r.notes.push(format!("mu not extracted: {e}")),
    }
    r.tables.push(prob);
    r.tables.push(norms);
    Ok(r)
}

fn load_mu(cfg: &ExperimentConfig, spec: &LatticeSpec, chain: &LatticeSpec) -> Result<MuRecord> {
    let dir = cfg.run.mu_from.as_ref().expect("caller checked");
    let rec = MuRecord::load(dir)?;
    let src = &rec.lattice;
    let mut diffs = Vec::new();
    if src.n_sites != spec.n_sites {
        diffs.push(format!("n_sites {} vs side {}", src.n_sites, spec.n_sites));
    }
    if src.omega != spec.omega {
        diffs.push(format!("omega {} vs {}", src.omega, spec.omega));
    }
    if (src.j_even, src.j_odd) != (chain.j_even, chain.j_odd) {
        diffs.push("hoppings differ".into());
    }
    if src.origin_offset != spec.origin_offset {
        diffs.push(format!("origin_offset {} vs {}", src.origin_offset, spec.origin_offset));
    }
    if !diffs.is_empty() {
        return Err(Error::Config(format!(
            "run.mu_from: {} was produced with different parameters ({})",
            dir.display(),
            diffs.join(", ")
        )));
    }
    Ok(rec)
}

pub(crate) fn evolve2d(cfg: &ExperimentConfig, spec: &LatticeSpec) -> Result<Results> {
    let kind = PairKind::from_lattice(spec.kind).expect("validated pair kind");
    let chain = spec.chain();
    let mut r = Results::new();
    let mu = match &cfg.run.mu_from {
        Some(dir) => {
            r.notes.push(format!("mu read from {}", dir.join(MU_FILE).display()));
            load_mu(cfg, spec, &chain)?
        }
        None => {
            let h1 = build_chain(&chain)?;
            let prop1 = Propagator::new(&h1)?;
            let s1 = prop1
                .spectrum()
                .ok_or_else(|| Error::Projection("chain eigenbasis too ill-conditioned".into()))?;
            let e0 = reference(cfg, s1, chain.n_sites)?.energy;
            let run = project_mu(cfg, &chain, &prop1, e0)?;
            r.notes.push(format!(
                "mu computed from a {:?} initial state on the {}-site chain, t_late = {}",
                cfg.run.initial, chain.n_sites, run.record.t_late
            ));
            run.record
        }
    };
    let basis = PairBasis::new(kind, spec.n_sites)?;
    let psi0 = build_pair_product_state(&mu.mu, &basis)?;
    let h = build_pair_lattice(spec)?;
    let prop = Propagator::new(&h)?;
    r.notes.push(format!("propagation path: {:?}", prop.path()));

    let revival = revival_check(&prop, &psi0, spec.omega, REVIVAL_THRESHOLD)?;
    let t_pair = match revival.matched_period() {
        Some(t) => t,
        None => {
            r.notes.push("no revival candidate reached the threshold; panels use pi / omega".into());
            PI / spec.omega
        }
    };
    for c in &revival.candidates {
        let matched = revival.matched.as_deref() == Some(c.name.as_str());
        r.checks.push(
            Check::at_least(&format!("fidelity_at_{}", c.name), c.fidelity, REVIVAL_THRESHOLD).informational(!matched),
        );
    }
    r.checks.push(Check::flag(
        "revival_matched",
        revival.matched.is_some(),
        format!("matched candidate: {}", revival.matched.as_deref().unwrap_or("none")),
    ));

    let panels: Vec<f64> = (0..=4).map(|k| t_pair * k as f64 / 4.0).collect();
    let panel_series = prop.evolve(&psi0, &panels)?;
    let mut p2 = with_model_meta(Table::new("probability2d", &["t", "x", "y", "value"]), spec)
        .meta("lambda", 0.0)
        .meta("t_pair", t_pair);
    let p = dirac_probability(&panel_series, 0.0);
    for (ti, &t) in p.times.iter().enumerate() {
        for (n, l) in p.labels.iter().enumerate() {
            let mut row = vec![f(t)];
            row.extend(label_cells(l));
            row.push(f(p.values[ti][n]));
            p2.push(row);
        }
    }
    let times = cfg.sample_times(3.0 * t_pair);
    let fs = fidelity(&prop.evolve(&psi0, &times)?)?;
    let mut ft = with_model_meta(Table::new("fidelity", &["t", "fidelity"]), spec).meta("t_pair", t_pair);
    for (t, v) in times.iter().zip(&fs) {
        ft.push(vec![f(*t), f(*v)]);
    }
    r.json.push(("revival.json".into(), serde_json::to_value(&revival)?));
    r.tables.push(p2);
    r.tables.push(ft);
    Ok(r)
}

pub(crate) fn pair_equivalence(cfg: &ExperimentConfig, spec: &LatticeSpec) -> Result<Results> {
    let mut r = Results::new();
    let mut t = Table::new(
        "equivalence",
        &["side", "kind", "matrix_deviation", "oracle_distance", "product_distance", "sector_distance"],
    )
    .meta("omega", spec.omega);
    let mut reports = Vec::new();
    let mut worst = [0.0f64; 3];
    let mut sector_worst = (0.0f64, 0.0f64);
    let period = PI / spec.omega;
    let times: Vec<f64> = (0..5).map(|k| period * k as f64 / 4.0).collect();
    for &side in &cfg.run.sides {
        let base = LatticeSpec {
            n_sites: side,
            origin_offset: (side / 2) as i64,
            ..spec.clone()
        };
        let chain = build_chain(&base.chain())?;
        let phi_x = random_state(cfg.run.seed, chain.labels())?;
        let phi_y = random_state(cfg.run.seed + 1, chain.labels())?;
        for kind in PairKind::ALL {
            let s = LatticeSpec {
                kind: kind.lattice_kind(),
                ..base.clone()
            };
            let rep = lift_1d_evolution(&s, &phi_x, &phi_y, &times)?;
            worst[0] = worst[0].max(rep.matrix_deviation);
            worst[1] = worst[1].max(rep.max_oracle_distance.max(rep.max_product_distance));
            worst[2] = worst[2].max(rep.max_sector_distance.unwrap_or(0.0));
            t.push(vec![
                json!(side),
                json!(kind),
                f(rep.matrix_deviation),
                f(rep.max_oracle_distance),
                f(rep.max_product_distance),
                rep.max_sector_distance.map_or(Value::Null, f),
            ]);
            reports.push(rep);
        }
        let electron = build_pair_lattice(&LatticeSpec {
            kind: LatticeKind::Pair2DElectron,
            ..base.clone()
        })?;
        let (sym, anti) = sector_decompose(&electron)?;
        let boson = oracle_for_spec(&LatticeSpec {
            kind: LatticeKind::Pair2DBoson,
            ..base.clone()
        })?;
        let fermion = oracle_for_spec(&LatticeSpec {
            kind: LatticeKind::Pair2DFermion,
            ..base.clone()
        })?;
        sector_worst.0 = sector_worst.0.max(sym.max_abs_diff(&boson)?.max(anti.max_abs_diff(&fermion)?));
        let mut merged: Vec<C64> = eigendecompose(&sym)?.eigenvalues().to_vec();
        merged.extend_from_slice(eigendecompose(&anti)?.eigenvalues());
        let full = eigendecompose(&electron)?;
        sector_worst.1 = sector_worst.1.max(multiset_distance(full.eigenvalues(), &merged)?);
    }
    r.checks.push(Check::below("lattice_vs_oracle", worst[0], CERTIFICATE_BOUND));
    r.checks.push(Check::below("evolution_routes", worst[1], EVOLUTION_BOUND));
    r.checks.push(Check::below("sector_reassembly", worst[2], EVOLUTION_BOUND));
    r.checks.push(Check::below("sectors_vs_oracle", sector_worst.0, REFLECTION_TOLERANCE));
    r.checks.push(Check::below("spectrum_merge", sector_worst.1, MERGE_BOUND));
    r.json.push(("equivalence_report.json".into(), serde_json::to_value(&reports)?));
    r.tables.push(t);
    Ok(r)
}
