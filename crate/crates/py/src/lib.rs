//! Python bindings. Matrices and states cross the boundary as nested lists of
//! `complex`; heavier results come back as JSON-shaped dicts.

use std::path::PathBuf;

use num_complex::Complex64 as C64;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use starkladder_core::dynamics::{self, Propagator, StateVector};
use starkladder_core::experiments::{self, ExperimentConfig};
use starkladder_core::lattice::{self as lat, BasisLabel, InteriorWindow, LatticeKind, LatticeSpec, OperatorMatrix};
use starkladder_core::pairmap::{self, PairKind};
use starkladder_core::spectral::{self, ComplexSpectrum, ImSign};
use starkladder_core::Error;

fn py_err(e: Error) -> PyErr {
    if e.is_config() {
        PyValueError::new_err(e.to_string())
    } else if matches!(e, Error::Io { .. }) {
        PyOSError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for starkladder_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

type Rows = Vec<Vec<C64>>;

fn label_tuple(l: &BasisLabel) -> Vec<i64> {
    match *l {
        BasisLabel::Site(j) => vec![j],
        BasisLabel::Pair(x, y) => vec![x, y],
    }
}

fn to_json<'py>(py: Python<'py>, v: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A lattice model: kind, size, slope and bond amplitudes.
#[pyclass(name = "Lattice", module = "starkladder", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyLattice {
    spec: LatticeSpec,
}

impl PyLattice {
    fn hamiltonian_matrix(&self) -> PyResult<OperatorMatrix> {
        if self.spec.kind.is_pair() {
            lat::build_pair_lattice(&self.spec).py()
        } else {
            lat::build_chain(&self.spec).py()
        }
    }

    fn state(&self, amplitudes: Vec<C64>) -> PyResult<StateVector> {
        let h = self.hamiltonian_matrix()?;
        StateVector::new(amplitudes, h.labels().to_vec()).py()
    }
}

#[pymethods]
impl PyLattice {
    /// `kind` is one of uniform1d, dimer_jjstar, dimer1i, pair2d_electron,
    /// pair2d_fermion, pair2d_boson. `n_sites` is the side length for pairs.
    #[new]
    #[pyo3(signature = (kind, n_sites, omega, j_even=None, j_odd=None))]
    fn new(kind: &str, n_sites: usize, omega: f64, j_even: Option<C64>, j_odd: Option<C64>) -> PyResult<Self> {
        let kind: LatticeKind = kind.parse().py()?;
        let mut spec = LatticeSpec::new(kind, n_sites, omega).py()?;
        if j_even.is_some() || j_odd.is_some() {
            let je = j_even.unwrap_or(spec.j_even);
            spec = spec.with_hopping(je, j_odd.unwrap_or(je)).py()?;
        }
        Ok(Self { spec })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.spec.kind.name()
    }

    #[getter]
    fn n_sites(&self) -> usize {
        self.spec.n_sites
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.spec.omega
    }

    #[getter]
    fn j_even(&self) -> C64 {
        self.spec.j_even
    }

    #[getter]
    fn j_odd(&self) -> C64 {
        self.spec.j_odd
    }

    fn with_omega(&self, omega: f64) -> PyResult<Self> {
        Ok(Self {
            spec: self.spec.clone().with_omega(omega).py()?,
        })
    }

    /// Site indices `(j,)` for chains, `(x, y)` for pair lattices.
    fn labels(&self) -> PyResult<Vec<Vec<i64>>> {
        Ok(self.hamiltonian_matrix()?.labels().iter().map(label_tuple).collect())
    }

    fn hamiltonian(&self) -> PyResult<Vec<Vec<C64>>> {
        Ok(self.hamiltonian_matrix()?.to_rows())
    }

    /// Symmetry defects of the Hamiltonian, keyed by certificate name.
    fn certificates<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let h = self.hamiltonian_matrix()?;
        let d = PyDict::new(py);
        let spec = &self.spec;
        if spec.kind.is_pair() {
            d.set_item("pt_commutator", lat::pt_commutator_norm(&h).py()?)?;
            d.set_item("swap_reflection", lat::swap_reflection_defect(&h).py()?)?;
            return Ok(d);
        }
        let window = InteriorWindow::for_sites(spec.n_sites);
        let cell = spec.kind.cell_length();
        d.set_item(
            format!("translation_T{cell}"),
            lat::ramped_translation_defect(&h, cell, spec.omega, window).py()?,
        )?;
        match spec.kind {
            LatticeKind::Dimer1i => d.set_item("gauge_conjugation", lat::gauge_conjugation_defect(&h).py()?)?,
            LatticeKind::DimerJJstar => d.set_item(
                "translation_T1_conjugation",
                lat::translation_conjugation_defect(&h, 1, spec.omega, window).py()?,
            )?,
            _ => {}
        }
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "Lattice('{}', n_sites={}, omega={}, j_even={}, j_odd={})",
            self.spec.kind, self.spec.n_sites, self.spec.omega, self.spec.j_even, self.spec.j_odd
        )
    }
}

/// Eigen-decomposition of a lattice Hamiltonian with per-pair residuals.
#[pyclass(name = "Spectrum", module = "starkladder", frozen)]
struct PySpectrum {
    inner: ComplexSpectrum,
    n_sites: usize,
}

#[pymethods]
impl PySpectrum {
    #[getter]
    fn eigenvalues(&self) -> Vec<C64> {
        self.inner.eigenvalues().to_vec()
    }

    #[getter]
    fn residuals(&self) -> Vec<f64> {
        self.inner.residuals().to_vec()
    }

    #[getter]
    fn max_residual(&self) -> f64 {
        self.inner.max_residual()
    }

    fn vector(&self, k: usize) -> PyResult<Vec<C64>> {
        self.check(k)?;
        Ok(self.inner.vector(k))
    }

    fn localization_center(&self, k: usize) -> PyResult<f64> {
        self.check(k)?;
        Ok(self.inner.localization_center(k))
    }

    fn participation_ratio(&self, k: usize) -> PyResult<f64> {
        self.check(k)?;
        Ok(self.inner.participation_ratio(k))
    }

    /// `(index, energy)` of the reference rung; `im_sign` is "+", "-" or "any".
    #[pyo3(signature = (im_sign="+"))]
    fn reference_state(&self, im_sign: &str) -> PyResult<(usize, C64)> {
        let sign: ImSign = im_sign.parse().py()?;
        let r = spectral::select_reference_state(&self.inner, InteriorWindow::for_sites(self.n_sites), sign).py()?;
        Ok((r.index, r.energy))
    }

    /// Ladder families with the given rung spacing, as a dict.
    #[pyo3(signature = (spacing, tol=spectral::DEFAULT_TOLERANCE))]
    fn ladders<'py>(&self, py: Python<'py>, spacing: f64, tol: f64) -> PyResult<Bound<'py, PyAny>> {
        to_json(py, &spectral::detect_ladders(&self.inner, spacing, tol).py()?)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

impl PySpectrum {
    fn check(&self, k: usize) -> PyResult<()> {
        if k < self.inner.len() {
            Ok(())
        } else {
            Err(PyValueError::new_err(format!("eigenpair {k} out of range")))
        }
    }
}

#[pyfunction]
fn eigendecompose(lattice: &PyLattice) -> PyResult<PySpectrum> {
    let h = lattice.hamiltonian_matrix()?;
    Ok(PySpectrum {
        inner: spectral::eigendecompose(&h).py()?,
        n_sites: lattice.spec.n_sites,
    })
}

/// Residual of `op` mapping the reference rung onto the rung shifted by `shift`.
/// `op` uses the symmetry syntax `T2`, `TR*g`, `TR*T1`.
#[pyfunction]
#[pyo3(signature = (lattice, op, shift, im_sign="+"))]
fn verify_ladder_operator(lattice: &PyLattice, op: &str, shift: f64, im_sign: &str) -> PyResult<f64> {
    let h = lattice.hamiltonian_matrix()?;
    let s = spectral::eigendecompose(&h).py()?;
    let window = InteriorWindow::for_sites(lattice.spec.n_sites);
    let state = spectral::select_reference_state(&s, window, im_sign.parse().py()?).py()?;
    let kind: lat::SymmetryKind = op.parse().py()?;
    let sym = lat::build_symmetry(&kind, h.labels()).py()?;
    spectral::verify_ladder_operator(&h, &sym, &state, shift, window).py()
}

/// `E0` for each slope in `omegas`; `None` where no reference state exists.
#[pyfunction]
#[pyo3(signature = (lattice, omegas, im_sign="+"))]
fn scan_e0_vs_omega(lattice: &PyLattice, omegas: Vec<f64>, im_sign: &str) -> PyResult<Vec<(f64, Option<C64>)>> {
    let scan = spectral::scan_e0_vs_omega(&lattice.spec, &omegas, im_sign.parse().py()?).py()?;
    Ok(scan.rows.iter().map(|r| (r.omega, r.e0)).collect())
}

/// Normalized Gaussian packet `exp(-alpha (j - j0)^2)` in the lattice basis.
#[pyfunction]
fn gaussian_state(lattice: &PyLattice, alpha: f64, j0: i64) -> PyResult<Vec<C64>> {
    let h = lattice.hamiltonian_matrix()?;
    Ok(dynamics::gaussian_state(alpha, j0, h.labels()).py()?.amplitudes().to_vec())
}

/// States `psi(t)` for each time, as rows.
#[pyfunction]
fn evolve(lattice: &PyLattice, psi0: Vec<C64>, times: Vec<f64>) -> PyResult<Vec<Vec<C64>>> {
    let psi = lattice.state(psi0)?;
    let prop = Propagator::new(&lattice.hamiltonian_matrix()?).py()?;
    let series = prop.evolve(&psi, &times).py()?;
    Ok(series.states.iter().map(|s| s.amplitudes().to_vec()).collect())
}

/// `exp(-2 lambda t) |psi_n(t)|^2`, one row per time.
#[pyfunction]
fn dirac_probability(lattice: &PyLattice, psi0: Vec<C64>, times: Vec<f64>, lam: f64) -> PyResult<Vec<Vec<f64>>> {
    let psi = lattice.state(psi0)?;
    let series = dynamics::evolve(&lattice.hamiltonian_matrix()?, &psi, &times).py()?;
    Ok(dynamics::dirac_probability(&series, lam).values)
}

/// `F(t)` for times starting at 0.
#[pyfunction]
fn fidelity(lattice: &PyLattice, psi0: Vec<C64>, times: Vec<f64>) -> PyResult<Vec<f64>> {
    let psi = lattice.state(psi0)?;
    let series = dynamics::evolve(&lattice.hamiltonian_matrix()?, &psi, &times).py()?;
    dynamics::fidelity(&series).py()
}

/// Second-quantized pair Hamiltonian in the lattice's pair basis.
#[pyfunction]
fn oracle_hamiltonian(lattice: &PyLattice) -> PyResult<Vec<Vec<C64>>> {
    Ok(pairmap::oracle_for_spec(&lattice.spec).py()?.to_rows())
}

/// Symmetric and antisymmetric blocks of an electron pair lattice.
#[pyfunction]
fn sector_decompose(lattice: &PyLattice) -> PyResult<(Rows, Rows)> {
    if PairKind::from_lattice(lattice.spec.kind) != Some(PairKind::Electron) {
        return Err(PyValueError::new_err("sector_decompose needs a pair2d_electron lattice"));
    }
    let (s, a) = pairmap::sector_decompose(&lattice.hamiltonian_matrix()?).py()?;
    Ok((s.to_rows(), a.to_rows()))
}

/// Field-level problems in a TOML config; empty when valid.
#[pyfunction]
fn validate_config(toml_text: &str) -> PyResult<Vec<String>> {
    let cfg = ExperimentConfig::from_toml_str(toml_text).py()?;
    Ok(cfg.validate().errors.iter().map(|e| e.to_string()).collect())
}

#[pyfunction]
fn list_experiments<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    to_json(py, &experiments::list_experiments())
}

/// Runs the experiment described by `toml_text` into `out`, returning the checks.
#[pyfunction]
#[pyo3(signature = (toml_text, out=None))]
fn run_experiment<'py>(py: Python<'py>, toml_text: &str, out: Option<PathBuf>) -> PyResult<Bound<'py, PyAny>> {
    let mut cfg = ExperimentConfig::from_toml_str(toml_text).py()?;
    if let Some(dir) = out {
        cfg.output.directory = dir;
    }
    let outcome = py.detach(|| experiments::run(&cfg)).py()?;
    to_json(py, &outcome.checks)
}

#[pymodule]
fn starkladder(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyLattice>()?;
    m.add_class::<PySpectrum>()?;
    m.add_function(wrap_pyfunction!(eigendecompose, m)?)?;
    m.add_function(wrap_pyfunction!(verify_ladder_operator, m)?)?;
    m.add_function(wrap_pyfunction!(scan_e0_vs_omega, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_state, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(dirac_probability, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_hamiltonian, m)?)?;
    m.add_function(wrap_pyfunction!(sector_decompose, m)?)?;
    m.add_function(wrap_pyfunction!(validate_config, m)?)?;
    m.add_function(wrap_pyfunction!(list_experiments, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
