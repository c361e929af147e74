use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::operator::{BasisLabel, OperatorMatrix};
use super::InteriorWindow;
use crate::error::{Error, Result};

/// Symmetry and ladder operators acting on a finite lattice basis.
///
/// `Composite` is an operator product: `Composite([A, B])` is `A B`, so `B`
/// acts first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryKind {
    /// Site `j` moves to `j + n0`.
    Translate(i64),
    /// Diagonal gauge `(-1)^[j/2]` on a chain.
    Gauge,
    /// Complex conjugation.
    TimeReversal,
    /// Pair-lattice parity `(-1)^([x/2] + [y/2])`.
    Parity,
    Composite(Vec<SymmetryKind>),
}

impl SymmetryKind {
    fn name(&self) -> String {
        match self {
            SymmetryKind::Translate(n) => format!("T{n}"),
            SymmetryKind::Gauge => "g".into(),
            SymmetryKind::TimeReversal => "TR".into(),
            SymmetryKind::Parity => "P".into(),
            SymmetryKind::Composite(parts) => {
                parts.iter().map(|p| p.name()).collect::<Vec<_>>().join("*")
            }
        }
    }
}

impl std::fmt::Display for SymmetryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}

/// Parses `T2`, `T-1`, `g`, `TR`, `P` and products such as `TR*g` or `TR*T1`.
impl std::str::FromStr for SymmetryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('*').map(str::trim).collect();
        if parts.len() > 1 {
            return parts
                .into_iter()
                .map(str::parse)
                .collect::<Result<Vec<_>>>()
                .map(SymmetryKind::Composite);
        }
        let s = parts[0];
        match s {
            "g" | "gauge" => Ok(SymmetryKind::Gauge),
            "TR" | "time_reversal" => Ok(SymmetryKind::TimeReversal),
            "P" | "parity" => Ok(SymmetryKind::Parity),
            _ => s
                .strip_prefix('T')
                .and_then(|n| n.parse::<i64>().ok())
                .map(SymmetryKind::Translate)
                .ok_or_else(|| Error::UnknownSymmetry(s.to_string())),
        }
    }
}

/// A symmetry operator in the form `M K^a`: a real linear part `M` (identity
/// when absent) after an optional complex conjugation `K`.
///
/// Every linear factor built here is a real partial isometry, so conjugation
/// commutes with it and any product collapses to this form.
#[derive(Clone, Debug)]
pub struct SymmetryOp {
    kind: SymmetryKind,
    dim: usize,
    matrix: Option<OperatorMatrix>,
    antiunitary: bool,
}

impl SymmetryOp {
    pub fn kind(&self) -> &SymmetryKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Linear part, `None` for pure conjugation.
    pub fn matrix_part(&self) -> Option<&OperatorMatrix> {
        self.matrix.as_ref()
    }

    pub fn is_antiunitary(&self) -> bool {
        self.antiunitary
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        let w: Vec<C64> = if self.antiunitary {
            v.iter().map(|z| z.conj()).collect()
        } else {
            v.to_vec()
        };
        match &self.matrix {
            Some(m) => m.apply(&w),
            None => Ok(w),
        }
    }

    /// `O H O^+`, with `O^+` the pseudo-inverse (transpose of the real part).
    pub fn transform(&self, h: &OperatorMatrix) -> Result<OperatorMatrix> {
        if h.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: h.dim(),
            });
        }
        let base = if self.antiunitary { h.conj() } else { h.clone() };
        let Some(m) = &self.matrix else {
            return Ok(base);
        };
        let m = m.entries();
        let prod: Mat<C64> = m * base.entries() * m.transpose();
        Ok(base.with_entries(prod))
    }
}

/// Builds the finite-basis representation of `kind` on `basis`.
pub fn build_symmetry(kind: &SymmetryKind, basis: &[BasisLabel]) -> Result<SymmetryOp> {
    let dim = basis.len();
    let diag = |f: &dyn Fn(&BasisLabel) -> Result<f64>| -> Result<OperatorMatrix> {
        let mut m = OperatorMatrix::zeros(basis.to_vec())?;
        for (i, l) in basis.iter().enumerate() {
            m.set(i, i, C64::new(f(l)?, 0.0));
        }
        Ok(m)
    };
    let unsupported = |reason: &str| Error::UnsupportedSymmetry {
        kind: kind.to_string(),
        reason: reason.to_string(),
    };
    let sign = |v: i64| if v.rem_euclid(2) == 0 { 1.0 } else { -1.0 };

    let op = match kind {
        SymmetryKind::Translate(n0) => {
            let mut m = OperatorMatrix::zeros(basis.to_vec())?;
            for (i, l) in basis.iter().enumerate() {
                let j = l.site().ok_or_else(|| unsupported("translation needs a chain basis"))?;
                if let Some(target) = m.index_of(BasisLabel::Site(j + n0)) {
                    m.set(target, i, C64::new(1.0, 0.0));
                }
            }
            SymmetryOp {
                kind: kind.clone(),
                dim,
                matrix: Some(m),
                antiunitary: false,
            }
        }
        SymmetryKind::Gauge => {
            let m = diag(&|l| {
                let j = l.site().ok_or_else(|| unsupported("gauge needs a chain basis"))?;
                Ok(sign(j.div_euclid(2)))
            })?;
            SymmetryOp {
                kind: kind.clone(),
                dim,
                matrix: Some(m),
                antiunitary: false,
            }
        }
        SymmetryKind::Parity => {
            let m = diag(&|l| {
                let (x, y) = l.pair().ok_or_else(|| unsupported("parity needs a pair basis"))?;
                Ok(sign(x.div_euclid(2) + y.div_euclid(2)))
            })?;
            SymmetryOp {
                kind: kind.clone(),
                dim,
                matrix: Some(m),
                antiunitary: false,
            }
        }
        SymmetryKind::TimeReversal => SymmetryOp {
            kind: kind.clone(),
            dim,
            matrix: None,
            antiunitary: true,
        },
        SymmetryKind::Composite(parts) => {
            if parts.is_empty() {
                return Err(unsupported("empty product"));
            }
            let mut matrix: Option<Mat<C64>> = None;
            let mut antiunitary = false;
            for part in parts {
                let op = build_symmetry(part, basis)?;
                antiunitary ^= op.antiunitary;
                if let Some(m) = op.matrix {
                    matrix = Some(match matrix {
                        None => m.entries().to_owned(),
                        Some(acc) => acc * m.entries(),
                    });
                }
            }
            let matrix = matrix
                .map(|m| OperatorMatrix::new(m, basis.to_vec()))
                .transpose()?;
            SymmetryOp {
                kind: kind.clone(),
                dim,
                matrix,
                antiunitary,
            }
        }
    };
    Ok(op)
}

fn shifted(h: &OperatorMatrix, shift: f64) -> OperatorMatrix {
    let n = h.dim();
    let e = h.entries();
    h.with_entries(Mat::from_fn(n, n, |r, c| {
        if r == c {
            e[(r, c)] - shift
        } else {
            e[(r, c)]
        }
    }))
}

/// Interior block of a chain where a shift by `n0` does not touch the edge.
fn shift_block(window: InteriorWindow, n: usize, n0: i64) -> std::ops::Range<usize> {
    let k = n0.unsigned_abs() as usize;
    window.start.max(k)..window.end.min(n.saturating_sub(k))
}

/// `|| T_n0 H T_n0^-1 - (H - n0 omega) ||_F` on the interior block.
pub fn ramped_translation_defect(
    h: &OperatorMatrix,
    n0: i64,
    omega: f64,
    window: InteriorWindow,
) -> Result<f64> {
    let t = build_symmetry(&SymmetryKind::Translate(n0), h.labels())?;
    let lhs = t.transform(h)?;
    let rhs = shifted(h, n0 as f64 * omega);
    lhs.frobenius_diff_on(&rhs, shift_block(window, h.dim(), n0))
}

/// `|| T_n0 H T_n0^-1 - (H* - n0 omega) ||_F` on the interior block. For the
/// J/J* chain this vanishes at `n0 = 1`.
pub fn translation_conjugation_defect(
    h: &OperatorMatrix,
    n0: i64,
    omega: f64,
    window: InteriorWindow,
) -> Result<f64> {
    let t = build_symmetry(&SymmetryKind::Translate(n0), h.labels())?;
    let lhs = t.transform(h)?;
    let rhs = shifted(&h.conj(), n0 as f64 * omega);
    lhs.frobenius_diff_on(&rhs, shift_block(window, h.dim(), n0))
}

/// `|| g H g^-1 - H* ||_F` over the whole chain.
pub fn gauge_conjugation_defect(h: &OperatorMatrix) -> Result<f64> {
    let g = build_symmetry(&SymmetryKind::Gauge, h.labels())?;
    g.transform(h)?.frobenius_diff_on(&h.conj(), 0..h.dim())
}

/// `|| PT H - H PT ||_F` for a pair lattice with `PT = P K`.
///
/// Acting on any vector, `PT H v - H PT v = (P H* - H P) v*`, so the
/// commutator norm is the Frobenius norm of `P H* - H P`.
pub fn pt_commutator_norm(h: &OperatorMatrix) -> Result<f64> {
    let p = build_symmetry(&SymmetryKind::Parity, h.labels())?;
    let pm = p.matrix_part().expect("parity is linear").entries();
    let hc = h.conj();
    let lhs: Mat<C64> = pm * hc.entries();
    let rhs: Mat<C64> = h.entries() * pm;
    let diff = lhs - rhs;
    Ok(diff.norm_l2())
}

/// `|| H - S H S ||_F`, with `S` the reflection `(x, y) -> (y, x)`.
pub fn swap_reflection_defect(h: &OperatorMatrix) -> Result<f64> {
    let labels = h.labels();
    let mut perm = Vec::with_capacity(labels.len());
    for l in labels {
        let (x, y) = l
            .pair()
            .ok_or_else(|| Error::BasisMismatch("reflection needs a pair basis".into()))?;
        let j = h.index_of(BasisLabel::Pair(y, x)).ok_or_else(|| {
            Error::BasisMismatch(format!("basis is not closed under (x,y)->(y,x) at {l}"))
        })?;
        perm.push(j);
    }
    let n = h.dim();
    let mut acc = 0.0;
    for c in 0..n {
        for r in 0..n {
            acc += (h.get(r, c) - h.get(perm[r], perm[c])).norm_sqr();
        }
    }
    Ok(acc.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_chain, build_pair_lattice, LatticeKind, LatticeSpec};

    fn sites(n: i64) -> Vec<BasisLabel> {
        (0..n).map(BasisLabel::Site).collect()
    }

    fn diag_of(op: &SymmetryOp) -> Vec<f64> {
        let m = op.matrix_part().unwrap();
        (0..m.dim()).map(|i| m.get(i, i).re).collect()
    }

    #[test]
    fn gauge_pattern() {
        let g = build_symmetry(&SymmetryKind::Gauge, &sites(4)).unwrap();
        assert_eq!(diag_of(&g), vec![1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn translate_is_partial_isometry() {
        let t = build_symmetry(&SymmetryKind::Translate(2), &sites(4)).unwrap();
        let m = t.matrix_part().unwrap();
        let one = C64::new(1.0, 0.0);
        for r in 0..4 {
            for c in 0..4 {
                let expect = if r == c + 2 { one } else { C64::new(0.0, 0.0) };
                assert_eq!(m.get(r, c), expect);
            }
        }
        // rows 0 and 1 are empty
        assert!((0..4).all(|c| m.get(0, c).norm() == 0.0 && m.get(1, c).norm() == 0.0));
    }

    #[test]
    fn parity_sign_at_2_3() {
        let basis = crate::lattice::pair_labels(LatticeKind::Pair2DElectron, 4).unwrap();
        let p = build_symmetry(&SymmetryKind::Parity, &basis).unwrap();
        let m = p.matrix_part().unwrap();
        let i = m.index_of(BasisLabel::Pair(2, 3)).unwrap();
        assert_eq!(m.get(i, i).re, 1.0);
        let i = m.index_of(BasisLabel::Pair(2, 1)).unwrap();
        assert_eq!(m.get(i, i).re, -1.0);
    }

    #[test]
    fn kind_errors() {
        assert!(matches!("Q".parse::<SymmetryKind>(), Err(Error::UnknownSymmetry(_))));
        assert_eq!(
            "TR*g".parse::<SymmetryKind>().unwrap(),
            SymmetryKind::Composite(vec![SymmetryKind::TimeReversal, SymmetryKind::Gauge])
        );
        assert_eq!("T-1".parse::<SymmetryKind>().unwrap(), SymmetryKind::Translate(-1));
        let pair = crate::lattice::pair_labels(LatticeKind::Pair2DElectron, 4).unwrap();
        assert!(build_symmetry(&SymmetryKind::Gauge, &pair).is_err());
        assert!(build_symmetry(&SymmetryKind::Parity, &sites(4)).is_err());
    }

    #[test]
    fn composite_with_time_reversal_is_antiunitary() {
        let k = SymmetryKind::Composite(vec![SymmetryKind::TimeReversal, SymmetryKind::Gauge]);
        let op = build_symmetry(&k, &sites(4)).unwrap();
        assert!(op.is_antiunitary());
        let v = vec![C64::new(0.0, 1.0); 4];
        let w = op.apply(&v).unwrap();
        assert_eq!(w[0], C64::new(0.0, -1.0));
        assert_eq!(w[2], C64::new(0.0, 1.0));
        let k2 = SymmetryKind::Composite(vec![SymmetryKind::TimeReversal; 2]);
        assert!(!build_symmetry(&k2, &sites(4)).unwrap().is_antiunitary());
    }

    #[test]
    fn chain_identities() {
        let spec = LatticeSpec::dimer_1i(60, 0.2).unwrap();
        let h = build_chain(&spec).unwrap();
        let w = InteriorWindow::for_sites(60);
        assert!(ramped_translation_defect(&h, 2, 0.2, w).unwrap() < 1e-12);
        assert!(gauge_conjugation_defect(&h).unwrap() < 1e-12);
        // n0 = 1 is not a symmetry of the 1/i chain
        assert!(ramped_translation_defect(&h, 1, 0.2, w).unwrap() > 0.1);

        let spec = LatticeSpec::dimer_jjstar(60, C64::new(0.8, 0.6), 0.3).unwrap();
        let h = build_chain(&spec).unwrap();
        assert!(translation_conjugation_defect(&h, 1, 0.3, w).unwrap() < 1e-12);
        assert!(ramped_translation_defect(&h, 2, 0.3, w).unwrap() < 1e-12);
    }

    #[test]
    fn electron_lattice_pt_and_reflection() {
        let spec = LatticeSpec::pair(LatticeKind::Pair2DElectron, 8, 0.2).unwrap();
        let h = build_pair_lattice(&spec).unwrap();
        assert!(pt_commutator_norm(&h).unwrap() < 1e-12);
        assert!(swap_reflection_defect(&h).unwrap() < 1e-12);
    }
}
