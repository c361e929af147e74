use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{Propagator, StateVector, TimeSeries};
use crate::error::{Error, Result};
use crate::lattice::BasisLabel;
use crate::pairmap::{product_state, PairBasis};
#[cfg(test)]
use crate::pairmap::PairKind;

/// Fidelity a revival candidate must reach.
pub const REVIVAL_THRESHOLD: f64 = 0.99;

/// `values[t][n]` is the probability on `labels[n]` at `times[t]`.
#[derive(Clone, Debug, Serialize)]
pub struct ProbabilityTable {
    pub lambda: f64,
    pub times: Vec<f64>,
    pub labels: Vec<BasisLabel>,
    pub values: Vec<Vec<f64>>,
}

impl ProbabilityTable {
    pub fn total(&self, t: usize) -> f64 {
        self.values[t].iter().sum()
    }

    pub fn max(&self, t: usize) -> f64 {
        self.values[t].iter().copied().fold(0.0, f64::max)
    }
}

/// `P_n(t) = |<n| e^{-lambda t} |phi(t)>|^2`.
pub fn dirac_probability(series: &TimeSeries, lambda: f64) -> ProbabilityTable {
    let values = series
        .times
        .iter()
        .zip(&series.states)
        .map(|(&t, s)| {
            let scale = (-2.0 * lambda * t).exp();
            s.amplitudes().iter().map(|z| z.norm_sqr() * scale).collect()
        })
        .collect();
    ProbabilityTable {
        lambda,
        times: series.times.clone(),
        labels: series.labels().to_vec(),
        values,
    }
}

/// Sampled times `(i, j)` with `times[j] = times[i] + period`, for `times[i] <= period`.
fn period_pairs(times: &[f64], period: f64) -> Vec<(usize, usize)> {
    let tol = 1e-9 * period.abs().max(1.0);
    times
        .iter()
        .enumerate()
        .filter(|(_, &t)| t <= period + tol)
        .filter_map(|(i, &t)| {
            times
                .iter()
                .position(|&u| (u - t - period).abs() <= tol)
                .map(|j| (i, j))
        })
        .collect()
}

/// `max |P_n(t + period) - P_n(t)|` over sampled `t` in `[0, period]` and
/// labels `n` in `keep`.
pub fn periodicity_defect(table: &ProbabilityTable, period: f64, keep: impl Fn(usize) -> bool) -> Result<f64> {
    let pairs = period_pairs(&table.times, period);
    if pairs.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no sampled time pairs separated by the period {period}"
        )));
    }
    let mut worst = 0.0f64;
    for (i, j) in pairs {
        for n in (0..table.labels.len()).filter(|&n| keep(n)) {
            worst = worst.max((table.values[j][n] - table.values[i][n]).abs());
        }
    }
    Ok(worst)
}

/// `(max_n P_n(t), max_n P_n(t + period))` for each sampled pair in the first period.
pub fn period_peak_pairs(table: &ProbabilityTable, period: f64, keep: impl Fn(usize) -> bool) -> Vec<(f64, f64)> {
    let peak = |t: usize| {
        (0..table.labels.len())
            .filter(|&n| keep(n))
            .map(|n| table.values[t][n])
            .fold(0.0, f64::max)
    };
    period_pairs(&table.times, period)
        .into_iter()
        .map(|(i, j)| (peak(i), peak(j)))
        .collect()
}

/// `P(x, y, t) = |<x, y| phi(t)>|^2` on a pair lattice (no rescaling).
pub fn dirac_probability_2d(series: &TimeSeries) -> Result<ProbabilityTable> {
    if series.labels().iter().any(|l| l.pair().is_none()) {
        return Err(Error::BasisMismatch("2D probability needs a pair basis".into()));
    }
    Ok(dirac_probability(series, 0.0))
}

/// `F(t) = |<phi(0)|phi(t)>|^2 / (||phi(t)||^2 ||phi(0)||^2)`, clamped to `[0, 1]`.
pub fn fidelity(series: &TimeSeries) -> Result<Vec<f64>> {
    let first = series
        .states
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty time series".into()))?;
    if series.times[0] != 0.0 {
        return Err(Error::InvalidArgument("series must start at t = 0".into()));
    }
    let n0 = first.norm();
    series
        .states
        .iter()
        .zip(&series.times)
        .map(|(s, t)| {
            let nt = s.norm();
            if nt == 0.0 || n0 == 0.0 || !nt.is_finite() {
                return Err(Error::ZeroNorm(format!("evolved state at t = {t}")));
            }
            let ov = first.inner(s)?.norm_sqr();
            Ok((ov / (nt * nt * n0 * n0)).clamp(0.0, 1.0))
        })
        .collect()
}

/// `max(10 / (2 Im E0), 3 pi / omega)`.
pub fn default_t_late(im_e0: f64, omega: f64) -> f64 {
    (10.0 / (2.0 * im_e0)).max(3.0 * PI / omega)
}

/// Normalized `e^{i E0 t_late} |phi(t_late)>`.
///
/// Long evolution suppresses the decaying branch by `e^{-2 Im E0 t}`; the
/// suppression at `t_late` must exceed `1e6`.
pub fn extract_projected_mu(series: &TimeSeries, e0: C64, t_late: f64) -> Result<StateVector> {
    if !(e0.im > 1e-12) {
        return Err(Error::Projection(format!(
            "Im E0 = {:.3e}: without a growing branch time evolution does not project",
            e0.im
        )));
    }
    let suppression = 2.0 * e0.im * t_late;
    if suppression <= 1e6f64.ln() {
        return Err(Error::Projection(format!(
            "t_late = {t_late} gives relative suppression e^{suppression:.2} <= 1e6"
        )));
    }
    let state = series
        .state_at(t_late)
        .ok_or_else(|| Error::InvalidArgument(format!("t_late = {t_late} is not a sampled time")))?;
    let phase = (C64::new(0.0, 1.0) * e0 * t_late).exp();
    let amps: Vec<C64> = state.amplitudes().iter().map(|z| z * phase).collect();
    StateVector::new(amps, state.labels().to_vec())?
        .normalized()
        .map_err(|_| Error::ZeroNorm("projected state vanished".into()))
}

/// Pair state `mu(x) (-1)^[y/2] conj(mu(y))` restricted to `basis` and normalized.
///
/// The fermion sector takes `(a(x,y) - a(y,x)) / sqrt 2` on `x > y`, the boson
/// sector `(a(x,y) + a(y,x)) / sqrt 2` on `x > y` and `a(x,x)` on the diagonal.
pub fn build_pair_product_state(mu: &StateVector, basis: &PairBasis) -> Result<StateVector> {
    if mu.len() != basis.side() {
        return Err(Error::DimensionMismatch {
            expected: basis.side(),
            got: mu.len(),
        });
    }
    let m = mu.amplitudes();
    let phi_y: Vec<C64> = m
        .iter()
        .enumerate()
        .map(|(y, z)| if (y / 2) % 2 == 0 { z.conj() } else { -z.conj() })
        .collect();
    let amps = product_state(m, &phi_y, basis)?;
    StateVector::new(amps, basis.labels().to_vec())?
        .normalized()
        .map_err(|_| Error::ZeroNorm(format!("pair state vanishes in the {:?} sector", basis.kind())))
}

#[derive(Clone, Debug, Serialize)]
pub struct RevivalCandidate {
    pub name: String,
    pub period: f64,
    pub fidelity: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RevivalCheck {
    pub threshold: f64,
    pub candidates: Vec<RevivalCandidate>,
    /// Shortest candidate reaching the threshold.
    pub matched: Option<String>,
}

impl RevivalCheck {
    pub fn matched_period(&self) -> Option<f64> {
        let name = self.matched.as_ref()?;
        self.candidates.iter().find(|c| &c.name == name).map(|c| c.period)
    }
}

/// Evaluates `F(T)` for the two candidate pair revival periods `pi / (2 omega)`
/// (4-omega diagonal pair ladder) and `pi / omega` (2-omega pair ladder).
pub fn revival_check(prop: &Propagator, psi0: &StateVector, omega: f64, threshold: f64) -> Result<RevivalCheck> {
    let cands = [("pi/(2 omega)", PI / (2.0 * omega)), ("pi/omega", PI / omega)];
    let mut candidates = Vec::new();
    for (name, period) in cands {
        let series = prop.evolve(psi0, &[0.0, period])?;
        let f = fidelity(&series)?[1];
        candidates.push(RevivalCandidate {
            name: name.to_string(),
            period,
            fidelity: f,
        });
    }
    let matched = candidates.iter().find(|c| c.fidelity >= threshold).map(|c| c.name.clone());
    Ok(RevivalCheck {
        threshold,
        candidates,
        matched,
    })
}
