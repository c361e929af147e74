//! Finite open-boundary truncations of tilted tight-binding lattices.
//!
//! A 1D chain carries alternating bond amplitudes `j_even` (bond `2l, 2l+1`)
//! and `j_odd` (bond `2l-1, 2l`) plus the linear potential `omega * (j - origin)`.
//! The same complex amplitude sits on both `(i, j)` and `(j, i)`, so the
//! matrices are complex symmetric rather than Hermitian.
//!
//! The pair lattices are the single-particle square-lattice images of two
//! particles on such a chain: the full `L x L` lattice for two opposite-spin
//! electrons, the strict lower triangle `x > y` for two spinless fermions and
//! the closed triangle `x >= y` for two bosons.

mod operator;
mod symmetry;

use std::ops::Range;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use operator::{BasisLabel, OperatorMatrix};
pub use symmetry::{
    build_symmetry, gauge_conjugation_defect, pt_commutator_norm, ramped_translation_defect,
    swap_reflection_defect, translation_conjugation_defect, SymmetryKind, SymmetryOp,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LatticeKind {
    #[serde(rename = "uniform1d")]
    Uniform1D,
    #[serde(rename = "dimer_jjstar")]
    DimerJJstar,
    #[serde(rename = "dimer1i")]
    Dimer1i,
    #[serde(rename = "pair2d_electron")]
    Pair2DElectron,
    #[serde(rename = "pair2d_fermion")]
    Pair2DFermion,
    #[serde(rename = "pair2d_boson")]
    Pair2DBoson,
}

impl LatticeKind {
    pub const ALL: [LatticeKind; 6] = [
        LatticeKind::Uniform1D,
        LatticeKind::DimerJJstar,
        LatticeKind::Dimer1i,
        LatticeKind::Pair2DElectron,
        LatticeKind::Pair2DFermion,
        LatticeKind::Pair2DBoson,
    ];

    pub fn is_pair(self) -> bool {
        matches!(
            self,
            LatticeKind::Pair2DElectron | LatticeKind::Pair2DFermion | LatticeKind::Pair2DBoson
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            LatticeKind::Uniform1D => "uniform1d",
            LatticeKind::DimerJJstar => "dimer_jjstar",
            LatticeKind::Dimer1i => "dimer1i",
            LatticeKind::Pair2DElectron => "pair2d_electron",
            LatticeKind::Pair2DFermion => "pair2d_fermion",
            LatticeKind::Pair2DBoson => "pair2d_boson",
        }
    }

    /// Unit-cell length of the underlying chain.
    pub fn cell_length(self) -> i64 {
        match self {
            LatticeKind::Uniform1D => 1,
            _ => 2,
        }
    }

    /// Default `(j_even, j_odd)`.
    pub fn default_hopping(self) -> (C64, C64) {
        match self {
            LatticeKind::Uniform1D => (C64::new(1.0, 0.0), C64::new(1.0, 0.0)),
            LatticeKind::DimerJJstar => (C64::new(1.0, 0.5), C64::new(1.0, -0.5)),
            _ => (C64::new(1.0, 0.0), C64::new(0.0, 1.0)),
        }
    }
}

impl std::str::FromStr for LatticeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LatticeKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| {
                Error::InvalidLattice(format!(
                    "unknown lattice kind `{s}` (expected one of {})",
                    LatticeKind::ALL.map(LatticeKind::name).join(", ")
                ))
            })
    }
}

impl std::fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Declarative description of a tilted lattice.
///
/// For pair kinds `n_sites` is the side length `L` of the square lattice and
/// the hoppings are those of the chain each particle moves on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    pub n_sites: usize,
    pub omega: f64,
    pub j_even: C64,
    pub j_odd: C64,
    /// Index of the site that carries zero potential.
    pub origin_offset: i64,
}

impl LatticeSpec {
    /// Spec with the kind's default hoppings and a centered origin.
    pub fn new(kind: LatticeKind, n_sites: usize, omega: f64) -> Result<Self> {
        let (j_even, j_odd) = kind.default_hopping();
        let spec = Self {
            kind,
            n_sites,
            omega,
            j_even,
            j_odd,
            origin_offset: (n_sites / 2) as i64,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn uniform(n_sites: usize, hopping: C64, omega: f64) -> Result<Self> {
        Self::new(LatticeKind::Uniform1D, n_sites, omega)?.with_hopping(hopping, hopping)
    }

    pub fn dimer_jjstar(n_sites: usize, hopping: C64, omega: f64) -> Result<Self> {
        Self::new(LatticeKind::DimerJJstar, n_sites, omega)?.with_hopping(hopping, hopping.conj())
    }

    pub fn dimer_1i(n_sites: usize, omega: f64) -> Result<Self> {
        Self::new(LatticeKind::Dimer1i, n_sites, omega)
    }

    pub fn pair(kind: LatticeKind, side: usize, omega: f64) -> Result<Self> {
        if !kind.is_pair() {
            return Err(Error::InvalidLattice(format!("{kind} is not a pair lattice")));
        }
        Self::new(kind, side, omega)
    }

    pub fn with_hopping(mut self, j_even: C64, j_odd: C64) -> Result<Self> {
        self.j_even = j_even;
        self.j_odd = j_odd;
        self.validate()?;
        Ok(self)
    }

    pub fn with_origin_offset(mut self, origin_offset: i64) -> Self {
        self.origin_offset = origin_offset;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Result<Self> {
        self.omega = omega;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(Error::InvalidLattice(format!(
                "n_sites must be at least 2, got {}",
                self.n_sites
            )));
        }
        if !self.omega.is_finite() {
            return Err(Error::InvalidLattice(format!("omega must be finite, got {}", self.omega)));
        }
        for (name, z) in [("j_even", self.j_even), ("j_odd", self.j_odd)] {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::InvalidLattice(format!("{name} must be finite")));
            }
        }
        match self.kind {
            LatticeKind::Uniform1D if self.j_even != self.j_odd => Err(Error::InvalidLattice(
                "uniform1d needs j_even == j_odd".into(),
            )),
            LatticeKind::DimerJJstar if self.j_odd != self.j_even.conj() => Err(
                Error::InvalidLattice("dimer_jjstar needs j_odd == conj(j_even)".into()),
            ),
            LatticeKind::Dimer1i
                if (self.j_even, self.j_odd) != (C64::new(1.0, 0.0), C64::new(0.0, 1.0)) =>
            {
                Err(Error::InvalidLattice("dimer1i needs (j_even, j_odd) = (1, i)".into()))
            }
            _ => Ok(()),
        }
    }

    /// Amplitude on the bond between `j` and `j + 1`.
    pub fn bond(&self, j: i64) -> C64 {
        if j.rem_euclid(2) == 0 {
            self.j_even
        } else {
            self.j_odd
        }
    }

    pub fn potential(&self, j: i64) -> f64 {
        self.omega * (j - self.origin_offset) as f64
    }

    /// The 1D chain a pair lattice is built from.
    pub fn chain(&self) -> Self {
        let kind = if self.kind.is_pair() {
            if self.j_even == self.j_odd {
                LatticeKind::Uniform1D
            } else if (self.j_even, self.j_odd) == (C64::new(1.0, 0.0), C64::new(0.0, 1.0)) {
                LatticeKind::Dimer1i
            } else {
                LatticeKind::DimerJJstar
            }
        } else {
            self.kind
        };
        Self { kind, ..self.clone() }
    }
}

/// Index range `[start, end)` where infinite-lattice identities are checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteriorWindow {
    pub start: usize,
    pub end: usize,
}

impl InteriorWindow {
    /// Drops `ceil(n / 6)` sites at each end.
    pub fn for_sites(n: usize) -> Self {
        let trim = n.div_ceil(6);
        Self {
            start: trim.min(n / 2),
            end: n.saturating_sub(trim).max(n / 2),
        }
    }

    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains_index(&self, j: usize) -> bool {
        (self.start..self.end).contains(&j)
    }

    /// Whether a (fractional) localization center lies inside the window.
    pub fn contains_center(&self, c: f64) -> bool {
        c >= self.start as f64 && c <= (self.end as f64 - 1.0)
    }
}

/// Open-boundary matrix of a 1D chain.
pub fn build_chain(spec: &LatticeSpec) -> Result<OperatorMatrix> {
    spec.validate()?;
    if spec.kind.is_pair() {
        return Err(Error::InvalidLattice(format!(
            "build_chain needs a 1D kind, got {}",
            spec.kind
        )));
    }
    let n = spec.n_sites;
    let labels = (0..n as i64).map(BasisLabel::Site).collect();
    let mut h = OperatorMatrix::zeros(labels)?;
    for j in 0..n {
        h.set(j, j, C64::new(spec.potential(j as i64), 0.0));
        if j + 1 < n {
            let t = spec.bond(j as i64);
            h.set(j, j + 1, t);
            h.set(j + 1, j, t);
        }
    }
    Ok(h)
}

/// Lexicographically ordered labels of a pair lattice of side `side`.
pub fn pair_labels(kind: LatticeKind, side: usize) -> Result<Vec<BasisLabel>> {
    let l = side as i64;
    let keep: fn(i64, i64) -> bool = match kind {
        LatticeKind::Pair2DElectron => |_, _| true,
        LatticeKind::Pair2DFermion => |x, y| x > y,
        LatticeKind::Pair2DBoson => |x, y| x >= y,
        other => {
            return Err(Error::InvalidLattice(format!("{other} is not a pair lattice")));
        }
    };
    Ok((0..l)
        .flat_map(|x| (0..l).map(move |y| (x, y)))
        .filter(|&(x, y)| keep(x, y))
        .map(|(x, y)| BasisLabel::Pair(x, y))
        .collect())
}

/// Square-lattice image of a particle pair on the chain described by `spec`.
///
/// Each hopping family is generated with the explicit summation bounds of the
/// two-particle lattice formulas. Bonds that leave the `L x L` square are
/// dropped (open boundary); a bond that stays in the square but leaves the
/// sector's triangle is a transcription error and is reported as such.
pub fn build_pair_lattice(spec: &LatticeSpec) -> Result<OperatorMatrix> {
    spec.validate()?;
    if !spec.kind.is_pair() {
        return Err(Error::InvalidLattice(format!(
            "build_pair_lattice needs a pair kind, got {}",
            spec.kind
        )));
    }
    let side = spec.n_sites;
    if side < 4 {
        return Err(Error::InvalidLattice(format!(
            "pair lattices need side length L >= 4, got {side}"
        )));
    }
    let mut b = PairBuilder::new(spec.kind, side)?;
    let (t_even, t_odd) = (spec.j_even, spec.j_odd);
    let l = side as i64;
    // Coordinate sweep generous enough that every in-square bond is visited.
    let sweep = -2..=l + 1;
    let half = |v: i64| v.div_euclid(2);

    match spec.kind {
        LatticeKind::Pair2DElectron => {
            for x in sweep.clone() {
                for y in sweep.clone() {
                    b.bond((2 * x, y), (2 * x + 1, y), t_even)?;
                    b.bond((2 * x - 1, y), (2 * x, y), t_odd)?;
                    b.bond((x, 2 * y + 1), (x, 2 * y), t_even)?;
                    b.bond((x, 2 * y - 1), (x, 2 * y), t_odd)?;
                }
            }
        }
        LatticeKind::Pair2DFermion | LatticeKind::Pair2DBoson => {
            for y in sweep.clone() {
                for x in (half(y) + 1)..=l {
                    b.bond((2 * x, y), (2 * x + 1, y), t_even)?;
                }
                for x in (half(y + 1) + 1)..=l {
                    b.bond((2 * x - 1, y), (2 * x, y), t_odd)?;
                }
            }
            for x in sweep.clone() {
                for y in -1..=(half(x) - 1) {
                    b.bond((x, 2 * y), (x, 2 * y + 1), t_even)?;
                }
                for y in 0..=half(x - 1) {
                    b.bond((x, 2 * y - 1), (x, 2 * y), t_odd)?;
                }
            }
            if spec.kind == LatticeKind::Pair2DBoson {
                let r2 = std::f64::consts::SQRT_2;
                for k in sweep.clone() {
                    // Doubly occupied sites couple to their neighbours with a
                    // sqrt(2) enhancement: one term per bond touching site d.
                    b.bond((2 * k, 2 * k), (2 * k + 1, 2 * k), t_even * r2)?;
                    b.bond((2 * k + 1, 2 * k + 1), (2 * k + 1, 2 * k), t_even * r2)?;
                    b.bond((2 * k + 1, 2 * k + 1), (2 * k + 2, 2 * k + 1), t_odd * r2)?;
                    b.bond((2 * k, 2 * k), (2 * k, 2 * k - 1), t_odd * r2)?;
                }
            }
        }
        _ => unreachable!(),
    }

    let labels: Vec<BasisLabel> = b.h.labels().to_vec();
    for (i, label) in labels.into_iter().enumerate() {
        let (x, y) = label.pair().expect("pair label");
        let v = spec.potential(x) + spec.potential(y);
        b.h.set(i, i, C64::new(v, 0.0));
    }
    Ok(b.h)
}

struct PairBuilder {
    h: OperatorMatrix,
    side: i64,
}

impl PairBuilder {
    fn new(kind: LatticeKind, side: usize) -> Result<Self> {
        Ok(Self {
            h: OperatorMatrix::zeros(pair_labels(kind, side)?)?,
            side: side as i64,
        })
    }

    fn in_square(&self, (x, y): (i64, i64)) -> bool {
        (0..self.side).contains(&x) && (0..self.side).contains(&y)
    }

    /// Adds `t (|a><b| + |b><a|)`.
    fn bond(&mut self, a: (i64, i64), b: (i64, i64), t: C64) -> Result<()> {
        if !(self.in_square(a) && self.in_square(b)) {
            return Ok(());
        }
        let ia = self.h.index_of(BasisLabel::Pair(a.0, a.1));
        let ib = self.h.index_of(BasisLabel::Pair(b.0, b.1));
        match (ia, ib) {
            (Some(ia), Some(ib)) => {
                self.h.add(ia, ib, t);
                self.h.add(ib, ia, t);
                Ok(())
            }
            _ => Err(Error::InvalidLattice(format!(
                "bond {a:?}-{b:?} leaves the sector basis"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn two_site_uniform_hop() {
        let spec = LatticeSpec::uniform(2, c(1.0, 0.0), 0.0).unwrap();
        let h = build_chain(&spec).unwrap();
        assert_eq!(
            h.to_rows(),
            vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]
        );
    }

    #[test]
    fn three_site_dimer_1i_with_tilt() {
        let spec = LatticeSpec::dimer_1i(3, 1.0).unwrap().with_origin_offset(1);
        let h = build_chain(&spec).unwrap();
        let expect = vec![
            vec![c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)],
        ];
        assert_eq!(h.to_rows(), expect);
    }

    #[test]
    fn chain_errors() {
        assert!(LatticeSpec::dimer_1i(1, 0.2).is_err());
        assert!(LatticeSpec::dimer_1i(10, f64::NAN).is_err());
        assert!(LatticeSpec::dimer_1i(10, f64::INFINITY).is_err());
        let bad = LatticeSpec::new(LatticeKind::DimerJJstar, 10, 0.2)
            .unwrap()
            .with_hopping(c(1.0, 0.5), c(1.0, 0.5));
        assert!(bad.is_err());
        let bad = LatticeSpec::dimer_1i(10, 0.2).unwrap().with_hopping(c(1.0, 0.0), c(1.0, 0.0));
        assert!(bad.is_err());
        let pair = LatticeSpec::pair(LatticeKind::Pair2DElectron, 6, 0.2).unwrap();
        assert!(build_chain(&pair).is_err());
        let chain = LatticeSpec::dimer_1i(6, 0.2).unwrap();
        assert!(build_pair_lattice(&chain).is_err());
    }

    #[test]
    fn chain_is_tridiagonal_and_symmetric() {
        for spec in [
            LatticeSpec::dimer_1i(17, 0.3).unwrap(),
            LatticeSpec::dimer_jjstar(12, c(0.7, -0.4), 0.5).unwrap(),
            LatticeSpec::uniform(9, c(1.0, 0.2), 0.1).unwrap(),
        ] {
            let h = build_chain(&spec).unwrap();
            assert!(h.bandwidth() <= 1);
            for r in 0..h.dim() {
                for col in 0..h.dim() {
                    assert_eq!(h.get(r, col), h.get(col, r));
                }
                assert_eq!(h.get(r, r).re, spec.omega * (r as f64 - spec.origin_offset as f64));
            }
        }
    }

    #[test]
    fn electron_lattice_bond_amplitudes() {
        let spec = LatticeSpec::pair(LatticeKind::Pair2DElectron, 6, 0.0).unwrap();
        let h = build_pair_lattice(&spec).unwrap();
        assert_eq!(h.dim(), 36);
        let p = BasisLabel::Pair;
        for y in 0..6 {
            assert_eq!(h.element(p(0, y), p(1, y)), Some(c(1.0, 0.0)));
            // bond (2x-1, 2x) with x = 1
            assert_eq!(h.element(p(1, y), p(2, y)), Some(c(0.0, 1.0)));
            assert_eq!(h.element(p(y, 0), p(y, 1)), Some(c(1.0, 0.0)));
            assert_eq!(h.element(p(y, 1), p(y, 2)), Some(c(0.0, 1.0)));
        }
    }

    #[test]
    fn pair_dimensions_and_potential() {
        let spec = LatticeSpec::pair(LatticeKind::Pair2DFermion, 6, 0.3).unwrap();
        let h = build_pair_lattice(&spec).unwrap();
        assert_eq!(h.dim(), 15);
        let spec = LatticeSpec::pair(LatticeKind::Pair2DBoson, 6, 0.3).unwrap();
        let h = build_pair_lattice(&spec).unwrap();
        assert_eq!(h.dim(), 21);
        let i = h.index_of(BasisLabel::Pair(4, 1)).unwrap();
        assert!((h.get(i, i).re - 0.3 * (4.0 + 1.0 - 6.0)).abs() < 1e-15);
        assert!(build_pair_lattice(&LatticeSpec::pair(LatticeKind::Pair2DBoson, 3, 0.3).unwrap())
            .is_err());
    }

    #[test]
    fn boson_diagonal_coupling_is_sqrt2() {
        let spec = LatticeSpec::pair(LatticeKind::Pair2DBoson, 8, 0.0).unwrap();
        let h = build_pair_lattice(&spec).unwrap();
        let p = BasisLabel::Pair;
        let r2 = std::f64::consts::SQRT_2;
        for y in 0..4 {
            let d = 2 * y;
            assert_eq!(h.element(p(d, d), p(d + 1, d)), Some(c(r2, 0.0)));
        }
        // odd diagonal site: one bond of each parity
        assert_eq!(h.element(p(3, 3), p(3, 2)), Some(c(r2, 0.0)));
        assert_eq!(h.element(p(3, 3), p(4, 3)), Some(c(0.0, r2)));
        assert_eq!(h.element(p(2, 2), p(2, 1)), Some(c(0.0, r2)));
    }

    #[test]
    fn interior_window_trims_a_sixth() {
        let w = InteriorWindow::for_sites(60);
        assert_eq!((w.start, w.end), (10, 50));
        let w = InteriorWindow::for_sites(40);
        assert_eq!((w.start, w.end), (7, 33));
        assert!(w.contains_center(7.0) && w.contains_center(32.0) && !w.contains_center(32.5));
    }

    #[test]
    fn kind_parse_round_trip() {
        for k in LatticeKind::ALL {
            assert_eq!(k.name().parse::<LatticeKind>().unwrap(), k);
        }
        assert!("hexagonal".parse::<LatticeKind>().is_err());
    }
}
