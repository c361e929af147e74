use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use starkladder_core::dynamics::{fidelity, random_state, Propagator};
use starkladder_core::lattice::{
    build_chain, build_pair_lattice, gauge_conjugation_defect, pt_commutator_norm, ramped_translation_defect,
    swap_reflection_defect, translation_conjugation_defect, InteriorWindow, LatticeKind, LatticeSpec,
};
use starkladder_core::pairmap::{sector_decompose, PairBasis, PairKind, SectorProjector, SwapParity};
use starkladder_core::spectral::{conjugation_closure_defect, eigendecompose, RESIDUAL_BOUND};

fn even_sites() -> impl Strategy<Value = usize> {
    (10usize..=30).prop_map(|h| 2 * h)
}

fn hopping() -> impl Strategy<Value = C64> {
    (-1.5f64..1.5, -1.5f64..1.5)
        .prop_filter("nonzero hopping", |(a, b)| a.hypot(*b) > 0.1)
        .prop_map(|(a, b)| C64::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eigenpairs_are_certified(n in even_sites(), omega in 0.2f64..1.2) {
        let h = build_chain(&LatticeSpec::dimer_1i(n, omega).unwrap()).unwrap();
        let s = eigendecompose(&h).unwrap();
        prop_assert_eq!(s.len(), n);
        prop_assert!(s.max_residual() < RESIDUAL_BOUND, "{}", s.max_residual());
    }

    #[test]
    fn dimer_spectrum_closed_under_conjugation(n in even_sites(), omega in 0.2f64..1.2) {
        let h = build_chain(&LatticeSpec::dimer_1i(n, omega).unwrap()).unwrap();
        prop_assert!(gauge_conjugation_defect(&h).unwrap() < 1e-12);
        let s = eigendecompose(&h).unwrap();
        prop_assert!(conjugation_closure_defect(s.eigenvalues()) < 1e-6);
    }

    #[test]
    fn jjstar_certificates_hold_for_any_hopping(n in even_sites(), omega in 0.05f64..2.0, j in hopping()) {
        let h = build_chain(&LatticeSpec::dimer_jjstar(n, j, omega).unwrap()).unwrap();
        let window = InteriorWindow::for_sites(n);
        prop_assert!(ramped_translation_defect(&h, 2, omega, window).unwrap() < 1e-12);
        prop_assert!(translation_conjugation_defect(&h, 1, omega, window).unwrap() < 1e-12);
    }

    #[test]
    fn fidelity_is_a_probability(n in even_sites(), omega in 0.2f64..1.2, seed in 0u64..1000, t in 0.0f64..40.0) {
        let h = build_chain(&LatticeSpec::dimer_1i(n, omega).unwrap()).unwrap();
        let psi = random_state(seed, h.labels()).unwrap();
        let series = Propagator::new(&h).unwrap().evolve(&psi, &[0.0, t / 2.0, t]).unwrap();
        let f = fidelity(&series).unwrap();
        prop_assert!((f[0] - 1.0).abs() < 1e-12);
        prop_assert!(f.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn propagation_composes(n in even_sites(), omega in 0.2f64..1.2, seed in 0u64..1000,
                            t1 in 0.0f64..5.0, t2 in 0.0f64..5.0) {
        let h = build_chain(&LatticeSpec::dimer_1i(n, omega).unwrap()).unwrap();
        let prop = Propagator::new(&h).unwrap();
        let psi = random_state(seed, h.labels()).unwrap();
        let direct = prop.evolve_to(&psi, t1 + t2).unwrap();
        let chained = prop.evolve_to(&prop.evolve_to(&psi, t1).unwrap(), t2).unwrap();
        let rel = direct.distance(&chained).unwrap() / direct.norm();
        prop_assert!(rel < 1e-8, "{rel}");
    }

    #[test]
    fn uniform_chain_matches_dense_hermitian_solver(n in 8usize..50, j in 0.2f64..2.0, omega in 0.1f64..1.5) {
        let h = build_chain(&LatticeSpec::uniform(n, C64::new(j, 0.0), omega).unwrap()).unwrap();
        let dense = DMatrix::from_fn(n, n, |r, c| h.get(r, c).re);
        let mut exact: Vec<f64> = dense.symmetric_eigenvalues().iter().copied().collect();
        exact.sort_by(f64::total_cmp);
        let s = eigendecompose(&h).unwrap();
        prop_assert!(s.eigenvalues().iter().all(|e| e.im.abs() < 1e-10));
        let mut ours: Vec<f64> = s.eigenvalues().iter().map(|e| e.re).collect();
        ours.sort_by(f64::total_cmp);
        for (a, b) in exact.iter().zip(&ours) {
            prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn sector_dimensions_add_up(side in 2usize..12) {
        let dims = PairKind::ALL.map(|k| PairBasis::new(k, side).unwrap().dim());
        prop_assert_eq!(dims[0], side * side);
        prop_assert_eq!(dims[1], side * (side - 1) / 2);
        prop_assert_eq!(dims[2], side * (side + 1) / 2);
        prop_assert_eq!(dims[1] + dims[2], dims[0]);
        for parity in [SwapParity::Symmetric, SwapParity::Antisymmetric] {
            let p = SectorProjector::new(parity, side).unwrap();
            prop_assert_eq!(p.sector_labels().len(), parity.pair_kind().dim(side));
            prop_assert!(p.orthonormality_defect() < 1e-14);
        }
    }

    #[test]
    fn pair_lattices_keep_their_symmetries(side in 2usize..=7, omega in 0.1f64..1.2) {
        let side = 2 * side;
        let spec = LatticeSpec::pair(LatticeKind::Pair2DElectron, side, omega).unwrap();
        let h = build_pair_lattice(&spec).unwrap();
        prop_assert!(swap_reflection_defect(&h).unwrap() < 1e-12);
        prop_assert!(pt_commutator_norm(&h).unwrap() < 1e-12);
        let (sym, anti) = sector_decompose(&h).unwrap();
        prop_assert_eq!(sym.dim() + anti.dim(), h.dim());
    }
}
