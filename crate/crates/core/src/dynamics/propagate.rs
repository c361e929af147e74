use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, MatRef};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{StateVector, TimeSeries};
use crate::error::{Error, Result};
use crate::lattice::OperatorMatrix;
use crate::spectral::{eigendecompose, ComplexSpectrum};

/// Eigenvector matrices with a larger 1-norm condition number are not
/// trusted for spectral synthesis.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Relative local error target of the fallback integrator.
const RK_TOLERANCE: f64 = 1e-12;
const RK_MAX_STEPS: usize = 5_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "path", rename_all = "snake_case")]
pub enum PropagationPath {
    /// Expansion in right eigenvectors, `sum_k c_k e^{-i E_k t} |v_k>`.
    Spectral { condition: f64 },
    /// Adaptive fourth-order Runge-Kutta with step doubling.
    Integrator { reason: String },
}

/// `e^{-iHt}` for one Hamiltonian, reusable across initial states and times.
pub struct Propagator {
    h: OperatorMatrix,
    spectral: Option<SpectralParts>,
    path: PropagationPath,
}

struct SpectralParts {
    spectrum: ComplexSpectrum,
    inverse: Mat<C64>,
}

fn one_norm(m: MatRef<'_, C64>) -> f64 {
    (0..m.ncols())
        .map(|c| m.col(c).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

impl Propagator {
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        match eigendecompose(h) {
            Ok(spectrum) => Self::from_spectrum(h, spectrum),
            Err(e) => Ok(Self::integrator(h, format!("eigendecomposition unusable: {e}"))),
        }
    }

    /// Uses an already certified spectrum of `h`.
    pub fn from_spectrum(h: &OperatorMatrix, spectrum: ComplexSpectrum) -> Result<Self> {
        if spectrum.len() != h.dim() {
            return Err(Error::DimensionMismatch {
                expected: h.dim(),
                got: spectrum.len(),
            });
        }
        let v = spectrum.vectors();
        let inverse = v.partial_piv_lu().inverse();
        let condition = one_norm(v) * one_norm(inverse.as_ref());
        if !(condition.is_finite() && condition <= CONDITION_LIMIT) {
            return Ok(Self::integrator(
                h,
                format!("eigenvector condition number {condition:.3e} exceeds {CONDITION_LIMIT:e}"),
            ));
        }
        Ok(Self {
            h: h.clone(),
            spectral: Some(SpectralParts { spectrum, inverse }),
            path: PropagationPath::Spectral { condition },
        })
    }

    /// Forces the step-integrator path.
    pub fn integrator(h: &OperatorMatrix, reason: impl Into<String>) -> Self {
        Self {
            h: h.clone(),
            spectral: None,
            path: PropagationPath::Integrator { reason: reason.into() },
        }
    }

    pub fn path(&self) -> &PropagationPath {
        &self.path
    }

    pub fn hamiltonian(&self) -> &OperatorMatrix {
        &self.h
    }

    pub fn spectrum(&self) -> Option<&ComplexSpectrum> {
        self.spectral.as_ref().map(|s| &s.spectrum)
    }

    /// Expansion coefficients `c = V^-1 psi` in the right eigenbasis.
    pub fn coefficients(&self, psi: &[C64]) -> Result<Vec<C64>> {
        self.h.check_len(psi.len())?;
        let parts = self.spectral.as_ref().ok_or_else(|| {
            Error::Projection("no trusted eigenbasis on the integrator path".into())
        })?;
        Ok(matvec(parts.inverse.as_ref(), psi))
    }

    /// `sum_{k in keep} c_k |v_k>`: the component of `psi` in a spectral subspace.
    pub fn project(&self, psi: &[C64], keep: impl Fn(usize) -> bool) -> Result<Vec<C64>> {
        let c = self.coefficients(psi)?;
        let parts = self.spectral.as_ref().expect("coefficients checked the path");
        let masked: Vec<C64> = c
            .iter()
            .enumerate()
            .map(|(k, &ck)| if keep(k) { ck } else { C64::new(0.0, 0.0) })
            .collect();
        Ok(matvec(parts.spectrum.vectors(), &masked))
    }

    pub fn evolve(&self, psi0: &StateVector, times: &[f64]) -> Result<TimeSeries> {
        self.h.check_len(psi0.len())?;
        if psi0.labels() != self.h.labels() {
            return Err(Error::BasisMismatch("initial state and Hamiltonian bases differ".into()));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("times must be finite".into()));
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("times must be ascending".into()));
        }
        let amps = match &self.spectral {
            Some(parts) => {
                let c = matvec(parts.inverse.as_ref(), psi0.amplitudes());
                let e = parts.spectrum.eigenvalues();
                times
                    .iter()
                    .map(|&t| {
                        if t == 0.0 {
                            return psi0.amplitudes().to_vec();
                        }
                        let ct: Vec<C64> = c
                            .iter()
                            .zip(e)
                            .map(|(ck, ek)| ck * (C64::new(0.0, -t) * ek).exp())
                            .collect();
                        matvec(parts.spectrum.vectors(), &ct)
                    })
                    .collect()
            }
            None => integrate(&self.h, psi0.amplitudes(), times)?,
        };
        let states = amps
            .into_iter()
            .map(|a| StateVector::new(a, psi0.labels().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Ok(TimeSeries {
            times: times.to_vec(),
            states,
            path: self.path.clone(),
        })
    }

    pub fn evolve_to(&self, psi0: &StateVector, t: f64) -> Result<StateVector> {
        let mut s = self.evolve(psi0, &[t])?;
        Ok(s.states.pop().expect("one time"))
    }
}

/// Propagates `psi0` under `h` to each of `times` (ascending, starting at 0).
pub fn evolve(h: &OperatorMatrix, psi0: &StateVector, times: &[f64]) -> Result<TimeSeries> {
    Propagator::new(h)?.evolve(psi0, times)
}

fn matvec(m: MatRef<'_, C64>, v: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); m.nrows()];
    for (c, &vc) in v.iter().enumerate() {
        if vc == C64::new(0.0, 0.0) {
            continue;
        }
        for (o, &mij) in out.iter_mut().zip(m.col(c).iter()) {
            *o += mij * vc;
        }
    }
    out
}

fn rk4_step(h: MatRef<'_, C64>, y: &[C64], dt: f64) -> Vec<C64> {
    let f = |v: &[C64]| -> Vec<C64> { matvec(h, v).into_iter().map(|z| C64::new(z.im, -z.re)).collect() };
    let axpy = |a: &[C64], s: f64, b: &[C64]| -> Vec<C64> { a.iter().zip(b).map(|(x, y)| x + y * s).collect() };
    let k1 = f(y);
    let k2 = f(&axpy(y, dt / 2.0, &k1));
    let k3 = f(&axpy(y, dt / 2.0, &k2));
    let k4 = f(&axpy(y, dt, &k3));
    y.iter()
        .enumerate()
        .map(|(i, yi)| yi + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0))
        .collect()
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Step-doubling RK4 for `dy/dt = -i H y` with Richardson extrapolation.
fn integrate(h: &OperatorMatrix, psi0: &[C64], times: &[f64]) -> Result<Vec<Vec<C64>>> {
    let hm = h.entries();
    let scale = one_norm(hm).max(1e-12);
    let mut dt = 0.1 / scale;
    let mut t = 0.0f64;
    let mut y = psi0.to_vec();
    let mut steps = 0usize;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        if target < t {
            return Err(Error::Integrator(format!("time {target} precedes current time {t}")));
        }
        while t < target {
            let step = dt.min(target - t);
            let big = rk4_step(hm, &y, step);
            let half = rk4_step(hm, &y, step / 2.0);
            let small = rk4_step(hm, &half, step / 2.0);
            let err = norm(&small.iter().zip(&big).map(|(a, b)| a - b).collect::<Vec<_>>()) / 15.0;
            let allowed = RK_TOLERANCE * norm(&small).max(f64::MIN_POSITIVE) * (step * scale).max(1e-3);
            if err <= allowed {
                y = small.iter().zip(&big).map(|(s, b)| s + (s - b) / 15.0).collect();
                t += step;
            }
            let factor = if err == 0.0 { 4.0 } else { (0.9 * (allowed / err).powf(0.2)).clamp(0.1, 4.0) };
            dt = step * factor;
            steps += 1;
            if steps > RK_MAX_STEPS || !dt.is_finite() || dt < 1e-14 * target.abs().max(1.0) {
                return Err(Error::Integrator(format!(
                    "step control failed at t = {t} after {steps} steps"
                )));
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_chain, BasisLabel, LatticeSpec};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sites(n: i64) -> Vec<BasisLabel> {
        (0..n).map(BasisLabel::Site).collect()
    }

    #[test]
    fn rabi_flip() {
        let h = OperatorMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]])
            .unwrap();
        let psi = StateVector::new(vec![c(1.0, 0.0), c(0.0, 0.0)], sites(2)).unwrap();
        let s = evolve(&h, &psi, &[0.0, std::f64::consts::FRAC_PI_2]).unwrap();
        let a = s.states[1].amplitudes();
        assert!((a[0]).norm() < 1e-14);
        assert!((a[1] - c(0.0, -1.0)).norm() < 1e-14);
        assert!(matches!(s.path, PropagationPath::Spectral { .. }));
    }

    #[test]
    fn jordan_block_falls_back_to_integrator() {
        let h = OperatorMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]])
            .unwrap();
        let p = Propagator::new(&h).unwrap();
        assert!(matches!(p.path(), PropagationPath::Integrator { .. }), "{:?}", p.path());
        let psi = StateVector::new(vec![c(0.0, 0.0), c(1.0, 0.0)], sites(2)).unwrap();
        let s = p.evolve(&psi, &[0.0, 0.5, 2.0]).unwrap();
        // exp(-iHt) = 1 - iHt for a nilpotent H
        let a = s.states[2].amplitudes();
        assert!((a[0] - c(0.0, -2.0)).norm() < 1e-9, "{a:?}");
        assert!((a[1] - c(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn integrator_agrees_with_spectral_synthesis() {
        let spec = LatticeSpec::dimer_1i(16, 0.3).unwrap();
        let h = build_chain(&spec).unwrap();
        let psi = super::super::site_state(8, h.labels()).unwrap();
        let times = [0.0, 1.0, 3.5];
        let a = Propagator::new(&h).unwrap().evolve(&psi, &times).unwrap();
        let b = Propagator::integrator(&h, "test").evolve(&psi, &times).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            let d = x.distance(y).unwrap() / x.norm();
            assert!(d < 1e-8, "{d}");
        }
    }

    #[test]
    fn rejects_descending_times() {
        let h = build_chain(&LatticeSpec::dimer_1i(6, 0.3).unwrap()).unwrap();
        let psi = super::super::site_state(2, h.labels()).unwrap();
        assert!(evolve(&h, &psi, &[1.0, 0.5]).is_err());
    }
}
