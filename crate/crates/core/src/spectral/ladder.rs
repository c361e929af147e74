use num_complex::Complex64 as C64;
use serde::Serialize;

use super::eigen::ComplexSpectrum;
use crate::error::{Error, Result};
use crate::lattice::{build_symmetry, InteriorWindow, SymmetryKind};

/// Base detection tolerance; the effective tolerance at energy `E` is
/// `DEFAULT_TOLERANCE * max(1, |E|)`.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Minimum number of rungs for a sequence to count as a ladder.
pub const MIN_RUNGS: usize = 3;

fn scaled(tol: f64, e: C64) -> f64 {
    tol * e.norm().max(1.0)
}

/// One equally spaced sequence `E_k = E_ref + k * spacing`.
#[derive(Clone, Debug, Serialize)]
pub struct LadderFamily {
    pub reference_energy: C64,
    pub spacing: f64,
    pub rung_count: usize,
    /// Indices into the spectrum, in rung order.
    pub member_indices: Vec<usize>,
    /// Largest `|(E_{k+1} - E_k) - spacing|` over consecutive rungs.
    pub max_spacing_deviation: f64,
    /// Largest `|Im(E_{k+1} - E_k)|`.
    pub max_imag_step: f64,
    pub mean_imag: f64,
}

impl LadderFamily {
    /// Largest spacing deviation over links whose two rungs are both
    /// localized inside `window`; `None` if no such link exists.
    pub fn deviation_within(&self, spectrum: &ComplexSpectrum, window: InteriorWindow) -> Option<f64> {
        self.member_indices
            .windows(2)
            .filter(|w| {
                window.contains_center(spectrum.localization_center(w[0]))
                    && window.contains_center(spectrum.localization_center(w[1]))
            })
            .map(|w| (spectrum.eigenvalue(w[1]) - spectrum.eigenvalue(w[0]) - self.spacing).norm())
            .reduce(f64::max)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjugatePair {
    pub plus: usize,
    pub minus: usize,
    /// `|E+ - conj(E-)|`.
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LadderReport {
    pub expected_spacing: f64,
    pub tolerance: f64,
    pub families: Vec<LadderFamily>,
    pub conjugate_pairing: Vec<ConjugatePair>,
    /// Levels not in any family of at least `MIN_RUNGS` rungs.
    pub unassigned: Vec<usize>,
    /// Near-degenerate clusters excluded from detection.
    pub excluded_clusters: Vec<Vec<usize>>,
    pub diagnostics: Vec<String>,
}

impl LadderReport {
    pub fn max_pairing_deviation(&self) -> Option<f64> {
        self.conjugate_pairing.iter().map(|p| p.deviation).reduce(f64::max)
    }

    pub fn families_with_imag_sign(&self, positive: bool) -> impl Iterator<Item = &LadderFamily> {
        self.families
            .iter()
            .filter(move |f| if positive { f.mean_imag > 0.0 } else { f.mean_imag < 0.0 })
    }
}

/// Groups eigenvalues into arithmetic progressions `E, E + s, E + 2s, ...`
/// with real step `s = expected_spacing`.
///
/// Rungs are linked when `|E_m - (E_k + s)|` is below the scaled tolerance,
/// which forces both the real step and the imaginary parts to agree.
/// Near-degenerate levels and ambiguous links are excluded and reported
/// rather than assigned.
pub fn detect_ladders(spectrum: &ComplexSpectrum, expected_spacing: f64, tol: f64) -> Result<LadderReport> {
    if spectrum.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    if !(expected_spacing > 0.0 && expected_spacing.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "expected_spacing must be positive, got {expected_spacing}"
        )));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let e = spectrum.eigenvalues();
    let n = e.len();
    let mut diagnostics = Vec::new();

    // The spectrum is sorted by real part; scan forward only while the real
    // parts can still be within reach.
    let reach = |k: usize, target: C64| {
        let t = scaled(tol, target);
        let lo = e.partition_point(|z| z.re < target.re - t);
        (lo..n).take_while(move |&m| e[m].re <= target.re + t).filter(move |&m| m != k && (e[m] - target).norm() < t)
    };

    // Near-degenerate clusters via union-find.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut degenerate = vec![false; n];
    for k in 0..n {
        for m in reach(k, e[k]).collect::<Vec<_>>() {
            degenerate[k] = true;
            degenerate[m] = true;
            let (a, b) = (find(&mut parent, k), find(&mut parent, m));
            parent[a] = b;
        }
    }
    let mut clusters: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for k in (0..n).filter(|&k| degenerate[k]) {
        let root = find(&mut parent, k);
        clusters.entry(root).or_default().push(k);
    }
    let excluded_clusters: Vec<Vec<usize>> = clusters.into_values().collect();
    for c in &excluded_clusters {
        diagnostics.push(format!(
            "near-degenerate cluster {c:?} around E = {:.6}{:+.6}i excluded",
            e[c[0]].re, e[c[0]].im
        ));
    }

    let mut succ: Vec<Option<usize>> = vec![None; n];
    let mut pred_count = vec![0usize; n];
    for k in (0..n).filter(|&k| !degenerate[k]) {
        let cands: Vec<usize> = reach(k, e[k] + expected_spacing).filter(|&m| !degenerate[m]).collect();
        match cands.as_slice() {
            [] => {}
            [m] => {
                succ[k] = Some(*m);
                pred_count[*m] += 1;
            }
            many => diagnostics.push(format!("ambiguous successors {many:?} for level {k}")),
        }
    }
    for (k, link) in succ.iter_mut().enumerate() {
        if let Some(m) = *link {
            if pred_count[m] > 1 {
                diagnostics.push(format!("level {m} has {} predecessors; link from {k} dropped", pred_count[m]));
                *link = None;
            }
        }
    }
    let mut has_pred = vec![false; n];
    for m in succ.iter().flatten() {
        has_pred[*m] = true;
    }

    let mut families = Vec::new();
    let mut assigned = vec![false; n];
    for start in (0..n).filter(|&k| !has_pred[k] && succ[k].is_some()) {
        let mut chain = vec![start];
        let mut cur = start;
        while let Some(next) = succ[cur] {
            chain.push(next);
            cur = next;
        }
        if chain.len() < MIN_RUNGS {
            continue;
        }
        let steps: Vec<C64> = chain.windows(2).map(|w| e[w[1]] - e[w[0]]).collect();
        let max_spacing_deviation =
            steps.iter().map(|d| (d - expected_spacing).norm()).fold(0.0, f64::max);
        let max_imag_step = steps.iter().map(|d| d.im.abs()).fold(0.0, f64::max);
        let mean_imag = chain.iter().map(|&k| e[k].im).sum::<f64>() / chain.len() as f64;
        for &k in &chain {
            assigned[k] = true;
        }
        families.push(LadderFamily {
            reference_energy: e[chain[0]],
            spacing: expected_spacing,
            rung_count: chain.len(),
            member_indices: chain,
            max_spacing_deviation,
            max_imag_step,
            mean_imag,
        });
    }
    families.sort_by(|a, b| b.rung_count.cmp(&a.rung_count).then(a.member_indices[0].cmp(&b.member_indices[0])));
    let unassigned = (0..n).filter(|&k| !assigned[k]).collect();

    Ok(LadderReport {
        expected_spacing,
        tolerance: tol,
        families,
        conjugate_pairing: conjugate_pairs(e, tol),
        unassigned,
        excluded_clusters,
        diagnostics,
    })
}

/// Matches each level with `Im > 0` to the nearest unused level with
/// `Im < 0` whose conjugate lies within tolerance.
pub fn conjugate_pairs(e: &[C64], tol: f64) -> Vec<ConjugatePair> {
    let mut used = vec![false; e.len()];
    let mut pairs = Vec::new();
    for plus in (0..e.len()).filter(|&k| e[k].im > scaled(tol, e[k])) {
        let best = (0..e.len())
            .filter(|&m| !used[m] && e[m].im < -scaled(tol, e[m]))
            .map(|m| (m, (e[plus] - e[m].conj()).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((minus, deviation)) = best {
            if deviation < scaled(tol, e[plus]) {
                used[minus] = true;
                pairs.push(ConjugatePair { plus, minus, deviation });
            }
        }
    }
    pairs
}

/// Largest distance from each `conj(E)` to the nearest eigenvalue. Zero
/// for a spectrum closed under complex conjugation.
pub fn conjugation_closure_defect(e: &[C64]) -> f64 {
    e.iter()
        .map(|z| e.iter().map(|w| (z.conj() - w).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Distance between two spectra as multisets: each level of `a`, in order,
/// claims the nearest unclaimed level of `b`; returns the largest such gap.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for z in a {
        let (m, d) = (0..b.len())
            .filter(|&m| !used[m])
            .map(|m| (m, (z - b[m]).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("equal lengths");
        used[m] = true;
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Squared overlap of `T_n0 |v_from>` with `|v_to>`, both normalized.
pub fn closure_overlap(spectrum: &ComplexSpectrum, from: usize, to: usize, n0: i64) -> Result<f64> {
    let t = build_symmetry(&SymmetryKind::Translate(n0), spectrum.labels())?;
    let w = t.apply(&spectrum.vector(from))?;
    let v = spectrum.vector(to);
    let nw: f64 = w.iter().map(|z| z.norm_sqr()).sum();
    let nv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let ov: C64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
    Ok(ov.norm_sqr() / (nw * nv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_chain, LatticeSpec};
    use crate::spectral::eigendecompose;

    #[test]
    fn argument_checks() {
        let spec = LatticeSpec::dimer_1i(8, 0.2).unwrap();
        let s = eigendecompose(&build_chain(&spec).unwrap()).unwrap();
        assert!(detect_ladders(&s, 0.0, 1e-6).is_err());
        assert!(detect_ladders(&s, 0.4, -1.0).is_err());
    }

    #[test]
    fn no_tilt_no_ladder() {
        let spec = LatticeSpec::dimer_1i(40, 0.0).unwrap();
        let s = eigendecompose(&build_chain(&spec).unwrap()).unwrap();
        let r = detect_ladders(&s, 0.4, DEFAULT_TOLERANCE).unwrap();
        assert!(r.families.is_empty(), "{:?}", r.families);
        let excluded: usize = r.excluded_clusters.iter().map(Vec::len).sum();
        assert_eq!(r.unassigned.len(), s.len());
        assert!(excluded <= s.len());
    }

    #[test]
    fn pairing_on_synthetic_levels() {
        let e = [C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(2.0, 0.0), C64::new(3.0, 0.5)];
        let p = conjugate_pairs(&e, 1e-6);
        assert_eq!(p.len(), 1);
        assert_eq!((p[0].plus, p[0].minus), (1, 0));
        assert!((conjugation_closure_defect(&e) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn multiset_distance_ignores_order() {
        let a = [C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(-2.0, 0.5)];
        let b = [C64::new(-2.0, 0.5), C64::new(1.0, 1e-12), C64::new(1.0, 0.0)];
        assert!(multiset_distance(&a, &b).unwrap() < 2e-12);
        let c = [C64::new(-2.0, 0.5), C64::new(-2.0, 0.5), C64::new(1.0, 0.0)];
        assert!(multiset_distance(&a, &c).unwrap() > 1.0);
        assert!(multiset_distance(&a, &b[..2]).is_err());
    }
}
