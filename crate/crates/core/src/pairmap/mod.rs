//! Two particles on a chain as one particle on a square lattice.
//!
//! Two opposite-spin electrons map to the full `L x L` lattice, whose
//! reflection-symmetric sector is the two-boson lattice (`x >= y`) and whose
//! antisymmetric sector is the spinless-fermion lattice (`x > y`). The
//! hand-built lattices are certified against a small second-quantized
//! oracle in [`fock`].

mod fock;
mod lift;

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{pair_labels, swap_reflection_defect, BasisLabel, LatticeKind, OperatorMatrix};

pub use fock::{oracle_for_spec, oracle_pair_hamiltonian};
pub use lift::{lift_1d_evolution, EquivalenceReport};

/// Reflection defect above which [`sector_decompose`] refuses its input.
pub const REFLECTION_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    Electron,
    Fermion,
    Boson,
}

impl PairKind {
    pub const ALL: [PairKind; 3] = [PairKind::Electron, PairKind::Fermion, PairKind::Boson];

    pub fn lattice_kind(self) -> LatticeKind {
        match self {
            PairKind::Electron => LatticeKind::Pair2DElectron,
            PairKind::Fermion => LatticeKind::Pair2DFermion,
            PairKind::Boson => LatticeKind::Pair2DBoson,
        }
    }

    pub fn from_lattice(kind: LatticeKind) -> Option<Self> {
        match kind {
            LatticeKind::Pair2DElectron => Some(PairKind::Electron),
            LatticeKind::Pair2DFermion => Some(PairKind::Fermion),
            LatticeKind::Pair2DBoson => Some(PairKind::Boson),
            _ => None,
        }
    }

    pub fn dim(self, side: usize) -> usize {
        match self {
            PairKind::Electron => side * side,
            PairKind::Fermion => side * (side - 1) / 2,
            PairKind::Boson => side * (side + 1) / 2,
        }
    }
}

/// Ordered pair labels plus the normalization prefactor of each basis state.
///
/// `diagonal_weight` is `1 / sqrt 2` for the doubly occupied boson states
/// `(b_x^+)^2 |0> / sqrt 2` and `1` everywhere else.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairBasis {
    kind: PairKind,
    side: usize,
    labels: Vec<BasisLabel>,
    diagonal_weight: Vec<f64>,
}

impl PairBasis {
    pub fn new(kind: PairKind, side: usize) -> Result<Self> {
        if side < 2 {
            return Err(Error::InvalidLattice(format!("pair basis needs L >= 2, got {side}")));
        }
        let labels = pair_labels(kind.lattice_kind(), side)?;
        let diagonal_weight = labels
            .iter()
            .map(|l| {
                let (x, y) = l.pair().expect("pair label");
                if kind == PairKind::Boson && x == y {
                    std::f64::consts::FRAC_1_SQRT_2
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self {
            kind,
            side,
            labels,
            diagonal_weight,
        })
    }

    pub fn kind(&self) -> PairKind {
        self.kind
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn diagonal_weight(&self) -> &[f64] {
        &self.diagonal_weight
    }

    pub fn index_of(&self, x: i64, y: i64) -> Option<usize> {
        // lexicographic order lets us binary search
        self.labels.binary_search(&BasisLabel::Pair(x, y)).ok()
    }

    /// Basis check for matrices and states claimed to live on this basis.
    pub fn check_labels(&self, labels: &[BasisLabel]) -> Result<()> {
        if labels != self.labels.as_slice() {
            return Err(Error::BasisMismatch(format!(
                "expected the {:?} basis of side {}",
                self.kind, self.side
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwapParity {
    Symmetric,
    Antisymmetric,
}

impl SwapParity {
    pub fn sign(self) -> f64 {
        match self {
            SwapParity::Symmetric => 1.0,
            SwapParity::Antisymmetric => -1.0,
        }
    }

    /// Sector whose labels and matrix this parity reproduces.
    pub fn pair_kind(self) -> PairKind {
        match self {
            SwapParity::Symmetric => PairKind::Boson,
            SwapParity::Antisymmetric => PairKind::Fermion,
        }
    }
}

/// Isometry from the electron lattice onto one swap sector.
///
/// Row `(x, y)` with `x > y` is `(e_xy +- e_yx) / sqrt 2`; the symmetric
/// sector also has rows `e_xx`.
#[derive(Clone, Debug)]
pub struct SectorProjector {
    swap_parity: SwapParity,
    side: usize,
    sector_labels: Vec<BasisLabel>,
    electron_labels: Vec<BasisLabel>,
    matrix: Mat<C64>,
}

impl SectorProjector {
    pub fn new(swap_parity: SwapParity, side: usize) -> Result<Self> {
        let electron = PairBasis::new(PairKind::Electron, side)?;
        let sector = PairBasis::new(swap_parity.pair_kind(), side)?;
        let s = swap_parity.sign();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut matrix = Mat::<C64>::zeros(sector.dim(), electron.dim());
        for (row, l) in sector.labels().iter().enumerate() {
            let (x, y) = l.pair().expect("pair label");
            let a = electron.index_of(x, y).expect("electron basis is complete");
            if x == y {
                matrix[(row, a)] = C64::new(1.0, 0.0);
            } else {
                let b = electron.index_of(y, x).expect("electron basis is complete");
                matrix[(row, a)] = C64::new(r, 0.0);
                matrix[(row, b)] = C64::new(s * r, 0.0);
            }
        }
        Ok(Self {
            swap_parity,
            side,
            sector_labels: sector.labels,
            electron_labels: electron.labels,
            matrix,
        })
    }

    pub fn swap_parity(&self) -> SwapParity {
        self.swap_parity
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn sector_labels(&self) -> &[BasisLabel] {
        &self.sector_labels
    }

    pub fn matrix(&self) -> faer::MatRef<'_, C64> {
        self.matrix.as_ref()
    }

    /// `max |P P^T - 1|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let g: Mat<C64> = &self.matrix * self.matrix.adjoint();
        let mut worst = 0.0f64;
        for c in 0..g.ncols() {
            for r in 0..g.nrows() {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((g[(r, c)] - target).norm());
            }
        }
        worst
    }

    /// `P H P^T` on the sector labels.
    pub fn project_operator(&self, h: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.check_electron(h.labels())?;
        let m: Mat<C64> = &self.matrix * h.entries() * self.matrix.transpose();
        OperatorMatrix::new(m, self.sector_labels.clone())
    }

    /// Sector amplitudes `P v` of an electron-lattice vector.
    pub fn restrict(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.check_len(v.len(), self.electron_labels.len())?;
        Ok((0..self.matrix.nrows())
            .map(|r| (0..v.len()).map(|c| self.matrix[(r, c)] * v[c]).sum())
            .collect())
    }

    /// Electron-lattice vector `P^T w` of sector amplitudes.
    pub fn embed(&self, w: &[C64]) -> Result<Vec<C64>> {
        self.check_len(w.len(), self.sector_labels.len())?;
        Ok((0..self.matrix.ncols())
            .map(|c| (0..w.len()).map(|r| self.matrix[(r, c)] * w[r]).sum())
            .collect())
    }

    fn check_electron(&self, labels: &[BasisLabel]) -> Result<()> {
        if labels != self.electron_labels.as_slice() {
            return Err(Error::BasisMismatch(format!(
                "sector projection needs the electron basis of side {}",
                self.side
            )));
        }
        Ok(())
    }

    fn check_len(&self, got: usize, expected: usize) -> Result<()> {
        if got != expected {
            return Err(Error::DimensionMismatch { expected, got });
        }
        Ok(())
    }
}

/// Symmetric and antisymmetric sector matrices of an electron pair lattice,
/// in the boson and fermion label orderings respectively.
pub fn sector_decompose(h_electron: &OperatorMatrix) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let side = electron_side(h_electron.labels())?;
    let defect = swap_reflection_defect(h_electron)?;
    if !(defect < REFLECTION_TOLERANCE) {
        return Err(Error::ReflectionSymmetry(defect));
    }
    let sym = SectorProjector::new(SwapParity::Symmetric, side)?.project_operator(h_electron)?;
    let anti = SectorProjector::new(SwapParity::Antisymmetric, side)?.project_operator(h_electron)?;
    Ok((sym, anti))
}

fn electron_side(labels: &[BasisLabel]) -> Result<usize> {
    let side = (labels.len() as f64).sqrt().round() as usize;
    if side < 2 || side * side != labels.len() {
        return Err(Error::BasisMismatch("not an electron pair basis".into()));
    }
    PairBasis::new(PairKind::Electron, side)?.check_labels(labels)?;
    Ok(side)
}

/// Unnormalized pair state `phi_x (x) phi_y` on `basis`.
///
/// Electron amplitudes are `phi_x(x) phi_y(y)`; the fermion and boson
/// sectors take the antisymmetric and symmetric projections of that product.
pub fn product_state(phi_x: &[C64], phi_y: &[C64], basis: &PairBasis) -> Result<Vec<C64>> {
    for len in [phi_x.len(), phi_y.len()] {
        if len != basis.side() {
            return Err(Error::DimensionMismatch {
                expected: basis.side(),
                got: len,
            });
        }
    }
    let amp = |x: i64, y: i64| phi_x[x as usize] * phi_y[y as usize];
    let r2 = std::f64::consts::SQRT_2;
    Ok(basis
        .labels()
        .iter()
        .map(|l| {
            let (x, y) = l.pair().expect("pair label");
            match basis.kind() {
                PairKind::Electron => amp(x, y),
                PairKind::Fermion => (amp(x, y) - amp(y, x)) / r2,
                PairKind::Boson if x == y => amp(x, x),
                PairKind::Boson => (amp(x, y) + amp(y, x)) / r2,
            }
        })
        .collect())
}
