//! Brute-force second quantization for two particles on a chain.
//!
//! Fock states are occupation vectors over modes `species * n + site`.
//! Fermionic products are kept in descending mode order,
//! `c_{m1}^+ c_{m2}^+ ... |0>` with `m1 > m2 > ...`, and every operator picks
//! up the Jordan-Wigner sign of the modes standing to its left. For electrons
//! spin up is species 1, so `c_{x,up}^+ c_{y,down}^+ |0>` is already ordered.

use std::collections::BTreeMap;

use faer::Mat;
use num_complex::Complex64 as C64;

use super::{PairBasis, PairKind};
use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, OperatorMatrix};

type Occupation = Vec<u8>;
type FockVector = BTreeMap<Occupation, C64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Statistics {
    Fermi,
    Bose,
}

struct Fock {
    stats: Statistics,
    modes: usize,
}

impl Fock {
    fn vacuum(&self) -> FockVector {
        FockVector::from([(vec![0; self.modes], C64::new(1.0, 0.0))])
    }

    /// Sign and amplitude factor of `a_q` or `a_q^+` acting on `occ`.
    fn factor(&self, occ: &[u8], mode: usize, create: bool) -> Option<f64> {
        let n = occ[mode];
        match self.stats {
            Statistics::Fermi => {
                if (create && n == 1) || (!create && n == 0) {
                    return None;
                }
                let left: u32 = occ[mode + 1..].iter().map(|&k| k as u32).sum();
                Some(if left.is_multiple_of(2) { 1.0 } else { -1.0 })
            }
            Statistics::Bose => {
                if create {
                    Some((n as f64 + 1.0).sqrt())
                } else if n == 0 {
                    None
                } else {
                    Some((n as f64).sqrt())
                }
            }
        }
    }

    fn ladder(&self, mode: usize, create: bool, v: &FockVector) -> FockVector {
        let mut out = FockVector::new();
        for (occ, &amp) in v {
            if let Some(f) = self.factor(occ, mode, create) {
                let mut next = occ.clone();
                if create {
                    next[mode] += 1;
                } else {
                    next[mode] -= 1;
                }
                *out.entry(next).or_insert(C64::new(0.0, 0.0)) += amp * f;
            }
        }
        out
    }

    fn create(&self, mode: usize, v: &FockVector) -> FockVector {
        self.ladder(mode, true, v)
    }

    /// `t a_p^+ a_q v`.
    fn hop(&self, p: usize, q: usize, t: C64, v: &FockVector) -> FockVector {
        let mut out = self.create(p, &self.ladder(q, false, v));
        for a in out.values_mut() {
            *a *= t;
        }
        out
    }
}

fn accumulate(into: &mut FockVector, v: FockVector) {
    for (occ, a) in v {
        *into.entry(occ).or_insert(C64::new(0.0, 0.0)) += a;
    }
}

fn inner(a: &FockVector, b: &FockVector) -> C64 {
    a.iter()
        .filter_map(|(occ, x)| b.get(occ).map(|y| x.conj() * y))
        .sum()
}

/// Pair Hamiltonian of the chain in `spec` computed by applying
/// `sum_j t_j (a_j^+ a_{j+1} + h.c.) + sum_j omega (j - origin) n_j`
/// to every basis state of the pair sector and re-expanding.
pub fn oracle_for_spec(spec: &LatticeSpec) -> Result<OperatorMatrix> {
    spec.validate()?;
    let kind = PairKind::from_lattice(spec.kind)
        .ok_or_else(|| Error::InvalidLattice(format!("{} is not a pair lattice", spec.kind)))?;
    let n = spec.n_sites;
    if n < 4 {
        return Err(Error::InvalidLattice(format!("pair lattices need side length L >= 4, got {n}")));
    }
    let (stats, species) = match kind {
        PairKind::Electron => (Statistics::Fermi, 2),
        PairKind::Fermion => (Statistics::Fermi, 1),
        PairKind::Boson => (Statistics::Bose, 1),
    };
    let fock = Fock {
        stats,
        modes: species * n,
    };
    let mode = |s: usize, j: usize| s * n + j;
    let spin_up = 1;
    let spin_down = 0;

    let basis = PairBasis::new(kind, n)?;
    let states: Vec<FockVector> = basis
        .labels()
        .iter()
        .zip(basis.diagonal_weight())
        .map(|(l, &w)| {
            let (x, y) = l.pair().expect("pair label");
            let (x, y) = (x as usize, y as usize);
            let vac = fock.vacuum();
            let mut v = match kind {
                PairKind::Electron => fock.create(mode(spin_up, x), &fock.create(mode(spin_down, y), &vac)),
                _ => fock.create(x, &fock.create(y, &vac)),
            };
            for a in v.values_mut() {
                *a *= w;
            }
            v
        })
        .collect();

    let mut terms: Vec<(usize, usize, C64)> = Vec::new();
    for s in 0..species {
        for j in 0..n {
            terms.push((mode(s, j), mode(s, j), C64::new(spec.potential(j as i64), 0.0)));
            if j + 1 < n {
                let t = spec.bond(j as i64);
                terms.push((mode(s, j), mode(s, j + 1), t));
                terms.push((mode(s, j + 1), mode(s, j), t));
            }
        }
    }

    let dim = states.len();
    let mut m = Mat::<C64>::zeros(dim, dim);
    for (c, ket) in states.iter().enumerate() {
        let mut h_ket = FockVector::new();
        for &(p, q, t) in &terms {
            accumulate(&mut h_ket, fock.hop(p, q, t, ket));
        }
        for (r, bra) in states.iter().enumerate() {
            m[(r, c)] = inner(bra, &h_ket);
        }
    }
    OperatorMatrix::new(m, basis.labels().to_vec())
}

/// Oracle pair Hamiltonian of the `J = 1`, `J' = i` dimer chain on `L` sites.
pub fn oracle_pair_hamiltonian(kind: PairKind, side: usize, omega: f64) -> Result<OperatorMatrix> {
    oracle_for_spec(&LatticeSpec::pair(kind.lattice_kind(), side, omega)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BasisLabel;
    use crate::pairmap::{SectorProjector, SwapParity};

    #[test]
    fn fermion_signs_follow_descending_order() {
        let f = Fock {
            stats: Statistics::Fermi,
            modes: 4,
        };
        let vac = f.vacuum();
        // c2^+ c0^+ |0> is ordered; c0^+ c2^+ |0> is its negative
        let a = f.create(2, &f.create(0, &vac));
        let b = f.create(0, &f.create(2, &vac));
        let occ = vec![1, 0, 1, 0];
        assert_eq!(a[&occ], C64::new(1.0, 0.0));
        assert_eq!(b[&occ], C64::new(-1.0, 0.0));
        assert!(f.create(2, &a).is_empty());
    }

    #[test]
    fn boson_double_occupation_normalizes() {
        let f = Fock {
            stats: Statistics::Bose,
            modes: 3,
        };
        let v = f.create(1, &f.create(1, &f.vacuum()));
        assert!((v[&vec![0, 2, 0]].re - 2f64.sqrt()).abs() < 1e-15);
        // b_0^+ b_1 |0,2,0> = sqrt 2 |1,1,0>
        let h = f.hop(0, 1, C64::new(1.0, 0.0), &FockVector::from([(vec![0, 2, 0], C64::new(1.0, 0.0))]));
        assert!((h[&vec![1, 1, 0]].re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn boson_oracle_has_sqrt2_next_to_diagonal() {
        let h = oracle_pair_hamiltonian(PairKind::Boson, 6, 0.2).unwrap();
        for y in [0i64, 2] {
            let e = h.element(BasisLabel::Pair(2 * y + 1, 2 * y), BasisLabel::Pair(2 * y, 2 * y)).unwrap();
            assert!((e - C64::new(2f64.sqrt(), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn electron_oracle_diagonal_is_potential_sum() {
        let omega = 0.37;
        let h = oracle_pair_hamiltonian(PairKind::Electron, 6, omega).unwrap();
        for (i, l) in h.labels().iter().enumerate() {
            let (x, y) = l.pair().unwrap();
            assert!((h.get(i, i) - C64::new(omega * (x + y - 6) as f64, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn fermion_oracle_is_antisymmetric_projection_of_electron_oracle() {
        let e = oracle_pair_hamiltonian(PairKind::Electron, 4, 0.0).unwrap();
        let f = oracle_pair_hamiltonian(PairKind::Fermion, 4, 0.0).unwrap();
        assert_eq!(f.dim(), 6);
        let p = SectorProjector::new(SwapParity::Antisymmetric, 4).unwrap();
        assert!(p.project_operator(&e).unwrap().max_abs_diff(&f).unwrap() < 1e-14);
        let b = oracle_pair_hamiltonian(PairKind::Boson, 4, 0.0).unwrap();
        let p = SectorProjector::new(SwapParity::Symmetric, 4).unwrap();
        assert!(p.project_operator(&e).unwrap().max_abs_diff(&b).unwrap() < 1e-14);
    }

    #[test]
    fn oracle_rejects_chain_kind() {
        assert!(oracle_for_spec(&LatticeSpec::dimer_1i(6, 0.2).unwrap()).is_err());
        assert!(oracle_pair_hamiltonian(PairKind::Fermion, 3, 0.2).is_err());
    }
}
