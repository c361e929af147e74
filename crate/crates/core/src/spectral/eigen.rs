use faer::{Mat, MatRef};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{BasisLabel, OperatorMatrix};

/// Every certified eigenpair satisfies `||H v - E v|| / ||v|| < RESIDUAL_BOUND`.
pub const RESIDUAL_BOUND: f64 = 1e-9;

/// Relative width within which two real parts count as tied when ordering.
const ORDER_TIE: f64 = 1e-9;

/// Certified right eigendecomposition of a (generally non-normal) matrix.
///
/// Eigenvalues are sorted by real part; eigenvalues whose real parts agree to
/// `1e-9 max(1, |E|)` are ordered by imaginary part. Each eigenvector has unit
/// 2-norm with its largest-magnitude amplitude real and positive.
#[derive(Clone, Debug)]
pub struct ComplexSpectrum {
    eigenvalues: Vec<C64>,
    vectors: Mat<C64>,
    residuals: Vec<f64>,
    labels: Vec<BasisLabel>,
}

impl ComplexSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, k: usize) -> C64 {
        self.eigenvalues[k]
    }

    /// Matrix whose `k`-th column is the eigenvector of `eigenvalue(k)`.
    pub fn vectors(&self) -> MatRef<'_, C64> {
        self.vectors.as_ref()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.col(k).iter().copied().collect()
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    /// Dirac-weighted mean basis index `sum_j j |v_j|^2`.
    pub fn localization_center(&self, k: usize) -> f64 {
        localization_center(self.vectors.col(k).iter().copied())
    }

    /// `(sum |v_j|^2)^2 / sum |v_j|^4`, in basis sites.
    pub fn participation_ratio(&self, k: usize) -> f64 {
        participation_ratio(self.vectors.col(k).iter().copied())
    }

    pub fn summary(&self) -> Vec<EigenSummary> {
        (0..self.len())
            .map(|k| EigenSummary {
                index: k,
                re: self.eigenvalues[k].re,
                im: self.eigenvalues[k].im,
                residual: self.residuals[k],
                center: self.localization_center(k),
                participation_ratio: self.participation_ratio(k),
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenSummary {
    pub index: usize,
    pub re: f64,
    pub im: f64,
    pub residual: f64,
    pub center: f64,
    pub participation_ratio: f64,
}

pub(crate) fn localization_center(v: impl Iterator<Item = C64>) -> f64 {
    let (num, den) = v
        .enumerate()
        .fold((0.0, 0.0), |(n, d), (j, z)| (n + j as f64 * z.norm_sqr(), d + z.norm_sqr()));
    if den > 0.0 {
        num / den
    } else {
        f64::NAN
    }
}

pub(crate) fn participation_ratio(v: impl Iterator<Item = C64>) -> f64 {
    let (s2, s4) = v.fold((0.0, 0.0), |(a, b), z| {
        let p = z.norm_sqr();
        (a + p, b + p * p)
    });
    if s4 > 0.0 {
        s2 * s2 / s4
    } else {
        f64::NAN
    }
}

/// Unit 2-norm with the largest amplitude rotated onto the positive real axis.
pub(crate) fn fix_phase(v: &mut [C64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-12))
        .expect("non-empty vector");
    let phase = v[pivot].conj() / v[pivot].norm();
    for z in v.iter_mut() {
        *z = *z * phase / norm;
    }
}

fn order(eigenvalues: &[C64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eigenvalues[a].re.total_cmp(&eigenvalues[b].re));
    let mut start = 0;
    while start < idx.len() {
        let head = eigenvalues[idx[start]];
        let tie = ORDER_TIE * head.norm().max(1.0);
        let mut end = start + 1;
        while end < idx.len() && eigenvalues[idx[end]].re - head.re <= tie {
            end += 1;
        }
        idx[start..end].sort_by(|&a, &b| eigenvalues[a].im.total_cmp(&eigenvalues[b].im));
        start = end;
    }
    idx
}

/// Full right eigendecomposition with a residual certificate.
pub fn eigendecompose(h: &OperatorMatrix) -> Result<ComplexSpectrum> {
    let n = h.dim();
    let fail = |reason: String, max_residual: f64| Error::Eigensolver {
        dim: n,
        reason,
        max_residual,
        max_entry: h.max_abs_entry(),
    };
    if n < 2 {
        return Err(fail(format!("need dim >= 2, got {n}"), f64::NAN));
    }
    let evd = h
        .entries()
        .eigen()
        .map_err(|e| fail(format!("eigensolver did not converge ({e:?}); possible exceptional point"), f64::NAN))?;
    let raw_values: Vec<C64> = evd.S().column_vector().iter().copied().collect();
    let raw_vectors = evd.U();

    let perm = order(&raw_values);
    let eigenvalues: Vec<C64> = perm.iter().map(|&k| raw_values[k]).collect();
    let mut vectors = Mat::<C64>::zeros(n, n);
    for (dst, &src) in perm.iter().enumerate() {
        let mut col: Vec<C64> = raw_vectors.col(src).iter().copied().collect();
        fix_phase(&mut col);
        for (r, z) in col.into_iter().enumerate() {
            vectors[(r, dst)] = z;
        }
    }

    let hv: Mat<C64> = h.entries() * vectors.as_ref();
    let residuals: Vec<f64> = (0..n)
        .map(|k| {
            let e = eigenvalues[k];
            let (r2, v2) = (0..n).fold((0.0, 0.0), |(r2, v2), i| {
                let v = vectors[(i, k)];
                (r2 + (hv[(i, k)] - e * v).norm_sqr(), v2 + v.norm_sqr())
            });
            (r2 / v2).sqrt()
        })
        .collect();
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    if !(max_residual < RESIDUAL_BOUND) {
        return Err(fail(
            format!("residual certificate failed (bound {RESIDUAL_BOUND:e})"),
            max_residual,
        ));
    }

    Ok(ComplexSpectrum {
        eigenvalues,
        vectors,
        residuals,
        labels: h.labels().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn two_site_real_hop() {
        let h = OperatorMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]])
            .unwrap();
        let s = eigendecompose(&h).unwrap();
        assert!((s.eigenvalue(0) - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((s.eigenvalue(1) - c(1.0, 0.0)).norm() < 1e-14);
        assert!(s.max_residual() < RESIDUAL_BOUND);
    }

    #[test]
    fn two_site_imaginary_hop() {
        let h = OperatorMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, 1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]])
            .unwrap();
        let s = eigendecompose(&h).unwrap();
        // equal real parts: ordered by imaginary part
        assert!((s.eigenvalue(0) - c(0.0, -1.0)).norm() < 1e-14);
        assert!((s.eigenvalue(1) - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn phase_convention() {
        let h = OperatorMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(0.3, 0.2), c(0.0, 0.0)],
            vec![c(0.3, 0.2), c(1.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, 0.0), c(0.0, 1.0), c(2.5, 0.0)],
        ])
        .unwrap();
        let s = eigendecompose(&h).unwrap();
        for k in 0..s.len() {
            let v = s.vector(k);
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-13);
            let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let pivot = v.iter().find(|z| z.norm() >= max * (1.0 - 1e-12)).unwrap();
            assert!(pivot.im.abs() < 1e-15 && pivot.re > 0.0);
        }
    }

    #[test]
    fn rejects_one_by_one() {
        let h = OperatorMatrix::from_rows(&[vec![c(1.0, 0.0)]]).unwrap();
        assert!(matches!(eigendecompose(&h), Err(Error::Eigensolver { .. })));
    }

    #[test]
    fn ordering_groups_ties() {
        let v = [c(1.0, 0.5), c(1.0 + 1e-13, -0.5), c(-2.0, 0.0)];
        assert_eq!(order(&v), vec![2, 1, 0]);
    }
}
