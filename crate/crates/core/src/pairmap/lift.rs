use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{oracle_for_spec, product_state, sector_decompose, PairBasis, PairKind, SectorProjector, SwapParity};
use crate::dynamics::{Propagator, StateVector, TimeSeries};
use crate::error::{Error, Result};
use crate::lattice::{build_chain, build_pair_lattice, LatticeSpec, OperatorMatrix};

/// Agreement between routes for evolving the same pair state.
///
/// Distances are `||a(t) - b(t)|| / ||a(t)||` with `a` the 2D-lattice state.
#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub kind: PairKind,
    pub side: usize,
    pub omega: f64,
    pub times: Vec<f64>,
    /// `max |H_lattice - H_oracle|`.
    pub matrix_deviation: f64,
    /// 2D lattice vs the second-quantized oracle.
    pub oracle_distance: Vec<f64>,
    /// 2D lattice vs the product of two independently evolved chain states.
    pub product_distance: Vec<f64>,
    /// Electron lattice vs its two sectors evolved separately and reassembled.
    pub sector_distance: Option<Vec<f64>>,
    pub max_oracle_distance: f64,
    pub max_product_distance: f64,
    pub max_sector_distance: Option<f64>,
}

impl EquivalenceReport {
    /// Largest deviation of any kind.
    pub fn max_deviation(&self) -> f64 {
        [
            self.max_oracle_distance,
            self.max_product_distance,
            self.max_sector_distance.unwrap_or(0.0),
        ]
        .into_iter()
        .fold(self.matrix_deviation, f64::max)
    }
}

fn relative_distance(a: &StateVector, b: &[C64]) -> f64 {
    let n = a.norm();
    let d = a
        .amplitudes()
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if n == 0.0 {
        d
    } else {
        d / n
    }
}

/// Evolves the pair state built from chain states `phi_x`, `phi_y` on the 2D
/// lattice of `spec`, and compares against the oracle Hamiltonian, the product
/// of the two 1D evolutions, and (electrons only) the sector decomposition.
pub fn lift_1d_evolution(
    spec: &LatticeSpec,
    phi_x: &StateVector,
    phi_y: &StateVector,
    times: &[f64],
) -> Result<EquivalenceReport> {
    let kind = PairKind::from_lattice(spec.kind)
        .ok_or_else(|| Error::InvalidLattice(format!("{} is not a pair lattice", spec.kind)))?;
    let chain = build_chain(&spec.chain())?;
    for phi in [phi_x, phi_y] {
        if phi.labels() != chain.labels() {
            return Err(Error::BasisMismatch(format!(
                "chain states must live on the {} sites of the pair lattice side",
                spec.n_sites
            )));
        }
    }
    let basis = PairBasis::new(kind, spec.n_sites)?;
    let h2d = build_pair_lattice(spec)?;
    basis.check_labels(h2d.labels())?;
    let oracle = oracle_for_spec(spec)?;
    basis.check_labels(oracle.labels())?;

    let psi0 = StateVector::new(
        product_state(phi_x.amplitudes(), phi_y.amplitudes(), &basis)?,
        basis.labels().to_vec(),
    )?;
    let lattice = Propagator::new(&h2d)?.evolve(&psi0, times)?;
    let by_oracle = Propagator::new(&oracle)?.evolve(&psi0, times)?;

    let chain_prop = Propagator::new(&chain)?;
    let xs = chain_prop.evolve(phi_x, times)?;
    let ys = chain_prop.evolve(phi_y, times)?;

    let compare = |other: &dyn Fn(usize) -> Result<Vec<C64>>| -> Result<Vec<f64>> {
        (0..times.len())
            .map(|k| Ok(relative_distance(&lattice.states[k], &other(k)?)))
            .collect()
    };
    let oracle_distance = compare(&|k| Ok(by_oracle.states[k].amplitudes().to_vec()))?;
    let product_distance =
        compare(&|k| product_state(xs.states[k].amplitudes(), ys.states[k].amplitudes(), &basis))?;
    let sector_distance = if kind == PairKind::Electron {
        let sectors = evolve_sectors(&h2d, spec.n_sites, &psi0, times)?;
        Some(compare(&|k| Ok(sectors[k].clone()))?)
    } else {
        None
    };

    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    Ok(EquivalenceReport {
        kind,
        side: spec.n_sites,
        omega: spec.omega,
        times: times.to_vec(),
        matrix_deviation: h2d.max_abs_diff(&oracle)?,
        max_oracle_distance: max(&oracle_distance),
        max_product_distance: max(&product_distance),
        max_sector_distance: sector_distance.as_deref().map(max),
        oracle_distance,
        product_distance,
        sector_distance,
    })
}

/// Electron-lattice states reassembled from independent sector evolutions.
fn evolve_sectors(h: &OperatorMatrix, side: usize, psi0: &StateVector, times: &[f64]) -> Result<Vec<Vec<C64>>> {
    let (h_sym, h_anti) = sector_decompose(h)?;
    let mut parts: Vec<(SectorProjector, TimeSeries)> = Vec::new();
    for (parity, hs) in [(SwapParity::Symmetric, h_sym), (SwapParity::Antisymmetric, h_anti)] {
        let p = SectorProjector::new(parity, side)?;
        let w0 = StateVector::new(p.restrict(psi0.amplitudes())?, hs.labels().to_vec())?;
        let series = Propagator::new(&hs)?.evolve(&w0, times)?;
        parts.push((p, series));
    }
    (0..times.len())
        .map(|k| {
            let mut v = vec![C64::new(0.0, 0.0); psi0.len()];
            for (p, s) in &parts {
                for (acc, z) in v.iter_mut().zip(p.embed(s.states[k].amplitudes())?) {
                    *acc += z;
                }
            }
            Ok(v)
        })
        .collect()
}
