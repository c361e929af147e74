//! Non-unitary time evolution and the Bloch-oscillation observables.
//!
//! Evolution is never renormalized: under a non-Hermitian `H` the norm grows
//! or decays, and every probability reported here records the rescaling rate
//! `lambda` it was computed with.

mod observables;
mod propagate;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::BasisLabel;

pub use observables::{
    build_pair_product_state, default_t_late, dirac_probability, dirac_probability_2d, extract_projected_mu,
    fidelity, period_peak_pairs, periodicity_defect, revival_check, ProbabilityTable, RevivalCandidate, RevivalCheck, REVIVAL_THRESHOLD,
};
pub use propagate::{evolve, PropagationPath, Propagator, CONDITION_LIMIT};

/// Amplitudes on a labelled basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    amplitudes: Vec<C64>,
    labels: Vec<BasisLabel>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>, labels: Vec<BasisLabel>) -> Result<Self> {
        if amplitudes.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                got: amplitudes.len(),
            });
        }
        if amplitudes.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidArgument("state amplitudes must be finite".into()));
        }
        Ok(Self { amplitudes, labels })
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroNorm("cannot normalize".into()));
        }
        Ok(Self {
            amplitudes: self.amplitudes.iter().map(|z| z / n).collect(),
            labels: self.labels.clone(),
        })
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_basis(other)?;
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_basis(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    fn check_basis(&self, other: &Self) -> Result<()> {
        if self.labels != other.labels {
            return Err(Error::BasisMismatch("states live on different bases".into()));
        }
        Ok(())
    }
}

/// State snapshots at ascending times.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub path: PropagationPath,
}

impl TimeSeries {
    pub fn labels(&self) -> &[BasisLabel] {
        self.states.first().map(|s| s.labels()).unwrap_or(&[])
    }

    /// Snapshot at `t`, matched to within `1e-9 max(1, |t|)`.
    pub fn state_at(&self, t: f64) -> Option<&StateVector> {
        let tol = 1e-9 * t.abs().max(1.0);
        self.times.iter().position(|s| (s - t).abs() <= tol).map(|i| &self.states[i])
    }
}

fn site_index(j0: i64, basis: &[BasisLabel]) -> Result<usize> {
    basis
        .iter()
        .position(|l| *l == BasisLabel::Site(j0))
        .ok_or_else(|| Error::InvalidArgument(format!("site {j0} is not in the basis")))
}

/// Normalized wave packet `sum_j exp(-alpha^2 (j - j0)^2) |j>`.
pub fn gaussian_state(alpha: f64, j0: i64, basis: &[BasisLabel]) -> Result<StateVector> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    site_index(j0, basis)?;
    let amps = basis
        .iter()
        .map(|l| {
            let j = l
                .site()
                .ok_or_else(|| Error::BasisMismatch("gaussian state needs a chain basis".into()))?;
            let d = (j - j0) as f64;
            Ok(C64::new((-alpha * alpha * d * d).exp(), 0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    StateVector::new(amps, basis.to_vec())?.normalized()
}

/// `|j0>`.
pub fn site_state(j0: i64, basis: &[BasisLabel]) -> Result<StateVector> {
    let i = site_index(j0, basis)?;
    let mut amps = vec![C64::new(0.0, 0.0); basis.len()];
    amps[i] = C64::new(1.0, 0.0);
    StateVector::new(amps, basis.to_vec())
}

/// Normalized state with independent standard-normal real and imaginary
/// parts, reproducible from `seed`.
pub fn random_state(seed: u64, basis: &[BasisLabel]) -> Result<StateVector> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = || -> f64 { rng.sample(rand_distr::StandardNormal) };
    let amps = (0..basis.len()).map(|_| C64::new(gauss(), gauss())).collect();
    StateVector::new(amps, basis.to_vec())?.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sites(n: i64) -> Vec<BasisLabel> {
        (0..n).map(BasisLabel::Site).collect()
    }

    #[test]
    fn gaussian_is_normalized_and_peaked() {
        let g = gaussian_state(0.3, 10, &sites(21)).unwrap();
        assert!((g.norm() - 1.0).abs() < 1e-14);
        let a = g.amplitudes();
        assert!(a[10].re > a[9].re && (a[9] - a[11]).norm() < 1e-15);
    }

    #[test]
    fn wide_alpha_limit_is_site_state() {
        let s = site_state(7, &sites(15)).unwrap();
        let g = gaussian_state(6.0, 7, &sites(15)).unwrap();
        assert!((s.inner(&g).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
        let g = gaussian_state(0.3, 7, &sites(15)).unwrap();
        assert!(s.inner(&g).unwrap().norm_sqr() < 0.5);
    }

    #[test]
    fn state_errors() {
        assert!(site_state(20, &sites(10)).is_err());
        assert!(gaussian_state(0.3, -1, &sites(10)).is_err());
        assert!(gaussian_state(0.0, 3, &sites(10)).is_err());
        assert!(StateVector::new(vec![C64::new(1.0, 0.0)], sites(2)).is_err());
    }

    #[test]
    fn random_state_is_reproducible() {
        let a = random_state(7, &sites(12)).unwrap();
        let b = random_state(7, &sites(12)).unwrap();
        let c = random_state(8, &sites(12)).unwrap();
        assert_eq!(a, b);
        assert!(a.distance(&c).unwrap() > 0.1);
    }
}
