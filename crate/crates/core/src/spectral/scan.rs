use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{eigendecompose, select_reference_state, ImSign};
use crate::error::{Error, Result};
use crate::lattice::{build_chain, InteriorWindow, LatticeSpec};

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub omega: f64,
    pub e0: Option<C64>,
    pub localization_center: Option<f64>,
    pub participation_ratio: Option<f64>,
    pub error: Option<String>,
}

/// Least-squares line `Re E0 = slope * omega + intercept`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
    pub rms_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct E0Scan {
    pub rows: Vec<ScanRow>,
    /// `None` when fewer than two grid points produced a reference energy.
    pub fit: Option<LinearFit>,
    pub notes: Vec<String>,
}

pub fn fit_line(points: &[(f64, f64)]) -> Option<LinearFit> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res: Vec<f64> = points.iter().map(|p| p.1 - (slope * p.0 + intercept)).collect();
    Some(LinearFit {
        slope,
        intercept,
        max_residual: res.iter().map(|r| r.abs()).fold(0.0, f64::max),
        rms_residual: (res.iter().map(|r| r * r).sum::<f64>() / n).sqrt(),
    })
}

/// Reference energy along a grid of slopes, with a linear fit of `Re E0`.
pub fn scan_e0_vs_omega(template: &LatticeSpec, omega_grid: &[f64], im_sign: ImSign) -> Result<E0Scan> {
    if omega_grid.is_empty() {
        return Err(Error::InvalidArgument("omega grid is empty".into()));
    }
    if omega_grid.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidArgument("omega grid must be strictly positive".into()));
    }
    if omega_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("omega grid must be ascending".into()));
    }
    let window = InteriorWindow::for_sites(template.n_sites);
    let rows: Vec<ScanRow> = omega_grid
        .iter()
        .map(|&omega| {
            let attempt = || -> Result<_> {
                let spec = template.clone().with_omega(omega)?;
                let spectrum = eigendecompose(&build_chain(&spec)?)?;
                select_reference_state(&spectrum, window, im_sign)
            };
            match attempt() {
                Ok(r) => ScanRow {
                    omega,
                    e0: Some(r.energy),
                    localization_center: Some(r.localization_center),
                    participation_ratio: Some(r.participation_ratio),
                    error: None,
                },
                Err(e) => ScanRow {
                    omega,
                    e0: None,
                    localization_center: None,
                    participation_ratio: None,
                    error: Some(format!("omega = {omega}: {e}")),
                },
            }
        })
        .collect();
    let points: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.e0.map(|e| (r.omega, e.re))).collect();
    let fit = fit_line(&points);
    let mut notes = Vec::new();
    if fit.is_none() {
        notes.push(format!(
            "linear fit undefined: {} usable grid point(s), need at least 2",
            points.len()
        ));
    }
    Ok(E0Scan { rows, fit, notes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_line() {
        let pts: Vec<_> = (0..5).map(|i| (i as f64, 2.0 * i as f64 - 1.0)).collect();
        let f = fit_line(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept + 1.0).abs() < 1e-14);
        assert!(f.max_residual < 1e-14);
        assert!(fit_line(&pts[..1]).is_none());
    }

    #[test]
    fn grid_validation() {
        let t = LatticeSpec::dimer_1i(20, 0.2).unwrap();
        assert!(scan_e0_vs_omega(&t, &[], ImSign::Positive).is_err());
        assert!(scan_e0_vs_omega(&t, &[0.3, 0.2], ImSign::Positive).is_err());
        assert!(scan_e0_vs_omega(&t, &[0.0, 0.2], ImSign::Positive).is_err());
    }

    #[test]
    fn single_point_flags_fit() {
        let t = LatticeSpec::dimer_1i(30, 0.5).unwrap();
        let s = scan_e0_vs_omega(&t, &[0.5], ImSign::Positive).unwrap();
        assert_eq!(s.rows.len(), 1);
        assert!(s.fit.is_none() && !s.notes.is_empty());
    }
}
