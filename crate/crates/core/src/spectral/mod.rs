//! Diagonalization, ladder detection and ladder-operator certificates.

mod eigen;
mod ladder;
mod reference;
mod scan;

pub use eigen::{eigendecompose, ComplexSpectrum, EigenSummary, RESIDUAL_BOUND};
pub use ladder::{
    closure_overlap, conjugate_pairs, conjugation_closure_defect, detect_ladders, multiset_distance, ConjugatePair,
    LadderFamily, LadderReport, DEFAULT_TOLERANCE, MIN_RUNGS,
};
pub use reference::{select_reference_state, verify_ladder_operator, ImSign, ReferenceState};
pub use scan::{fit_line, scan_e0_vs_omega, E0Scan, LinearFit, ScanRow};
