use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::eigen::{localization_center, ComplexSpectrum, RESIDUAL_BOUND};
use crate::error::{Error, Result};
use crate::lattice::{InteriorWindow, OperatorMatrix, SymmetryOp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ImSign {
    #[default]
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
    #[serde(rename = "any")]
    Any,
}

impl std::str::FromStr for ImSign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "positive" => Ok(ImSign::Positive),
            "-" | "negative" => Ok(ImSign::Negative),
            "any" => Ok(ImSign::Any),
            _ => Err(Error::InvalidArgument(format!("im_sign must be +, - or any, got `{s}`"))),
        }
    }
}

/// The starting rung `(E0, |psi0>)` of a ladder, in the site basis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReferenceState {
    pub index: usize,
    pub energy: C64,
    pub amplitudes: Vec<C64>,
    pub localization_center: f64,
    pub participation_ratio: f64,
    pub residual: f64,
}

impl ReferenceState {
    pub fn from_spectrum(spectrum: &ComplexSpectrum, k: usize) -> Self {
        Self {
            index: k,
            energy: spectrum.eigenvalue(k),
            amplitudes: spectrum.vector(k),
            localization_center: spectrum.localization_center(k),
            participation_ratio: spectrum.participation_ratio(k),
            residual: spectrum.residuals()[k],
        }
    }
}

fn imag_threshold(e: C64) -> f64 {
    RESIDUAL_BOUND * e.norm().max(1.0)
}

/// Picks the eigenstate that serves as the reference rung.
///
/// Candidates are localized inside `window` and have the requested sign of
/// `Im E`; the one whose center is nearest the lattice midpoint wins (ties go
/// to the lower real part). When the whole spectrum is real the sign is
/// ignored.
pub fn select_reference_state(
    spectrum: &ComplexSpectrum,
    window: InteriorWindow,
    im_sign: ImSign,
) -> Result<ReferenceState> {
    if spectrum.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let e = spectrum.eigenvalues();
    let all_real = e.iter().all(|z| z.im.abs() <= imag_threshold(*z));
    let sign_ok = |z: C64| match (im_sign, all_real) {
        (ImSign::Any, _) | (_, true) => true,
        (ImSign::Positive, false) => z.im > imag_threshold(z),
        (ImSign::Negative, false) => z.im < -imag_threshold(z),
    };
    let mid = (spectrum.len() as f64 - 1.0) / 2.0;
    let best = (0..spectrum.len())
        .filter(|&k| sign_ok(e[k]))
        .map(|k| (k, spectrum.localization_center(k)))
        .filter(|&(_, c)| window.contains_center(c))
        .min_by(|a, b| {
            let (da, db) = ((a.1 - mid).abs(), (b.1 - mid).abs());
            if (da - db).abs() <= 1e-9 {
                e[a.0].re.total_cmp(&e[b.0].re).then(a.0.cmp(&b.0))
            } else {
                da.total_cmp(&db)
            }
        });
    match best {
        Some((k, _)) => Ok(ReferenceState::from_spectrum(spectrum, k)),
        None => Err(Error::NoReferenceState(format!(
            "no eigenstate with sign(Im E) = {im_sign:?} localized in sites [{}, {}); \
             omega may be too small for this truncation, increase n_sites",
            window.start, window.end
        ))),
    }
}

/// Residual `||H w - E' w||` on the interior window for `w = op |psi0>`
/// (normalized), with `E' = E0 + shift` for unitary `op` and
/// `conj(E0) + shift` when `op` contains an odd number of conjugations.
pub fn verify_ladder_operator(
    h: &OperatorMatrix,
    op: &SymmetryOp,
    state: &ReferenceState,
    expected_shift: f64,
    window: InteriorWindow,
) -> Result<f64> {
    if op.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: op.dim(),
        });
    }
    h.check_len(state.amplitudes.len())?;
    if !(state.residual < RESIDUAL_BOUND) {
        return Err(Error::InvalidArgument(format!(
            "reference state is not certified (residual {:.3e})",
            state.residual
        )));
    }
    if !window.contains_center(state.localization_center) {
        return Err(Error::EdgeState(format!(
            "reference state centered at {:.2} outside window [{}, {})",
            state.localization_center, window.start, window.end
        )));
    }
    let mut w = op.apply(&state.amplitudes)?;
    let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::EdgeState("shifted state has zero norm".into()));
    }
    for z in &mut w {
        *z /= norm;
    }
    let center = localization_center(w.iter().copied());
    if !window.contains_center(center) {
        return Err(Error::EdgeState(format!(
            "shifted state centered at {center:.2} leaves window [{}, {})",
            window.start, window.end
        )));
    }
    let base = if op.is_antiunitary() {
        state.energy.conj()
    } else {
        state.energy
    };
    let target = base + expected_shift;
    let hw = h.apply(&w)?;
    let r2: f64 = window.range().map(|j| (hw[j] - target * w[j]).norm_sqr()).sum();
    Ok(r2.sqrt())
}
