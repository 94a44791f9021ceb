//! Molecular integrals, orbital ordering and classification, Fock matrices.
//!
//! Two-body convention: the Hamiltonian is
//! `H = Σ h1[a,b] f†_aσ f_bσ + ½ Σ h2[a,b,c,d] f†_aσ f†_bσ' f_cσ' f_dσ`
//! with `h2[a,b,c,d] = (ad|bc)` in chemist notation. The outer creator is paired
//! with the outer annihilator, so both share spin σ. Chemist-ordered input is
//! converted once at the I/O boundary.

mod fcidump;

pub use fcidump::{parse_fcidump, write_fcidump, FcidumpData};

use crate::error::{Error, Result};
use crate::tensor::Tensor4;
use alloc::vec::Vec;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// System metadata for a closed-shell molecule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MolecularSystem {
    pub n_spatial: usize,
    pub n_electrons: usize,
    /// Orbital energies in Hartree, one per spatial orbital.
    pub mo_energies: Vec<f64>,
    pub ms2: i32,
    pub orbsym: Vec<u32>,
    pub isym: u32,
}

impl MolecularSystem {
    pub fn new(n_spatial: usize, n_electrons: usize, mo_energies: Vec<f64>) -> Result<Self> {
        if n_electrons % 2 != 0 {
            return Err(Error::Unsupported("odd electron count (closed-shell only)".into()));
        }
        if mo_energies.len() != n_spatial || mo_energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::Invalid("mo_energies must be finite with one entry per orbital".into()));
        }
        Ok(Self { n_spatial, n_electrons, mo_energies, ms2: 0, orbsym: alloc::vec![1; n_spatial], isym: 1 })
    }

    pub fn n_occupied(&self) -> usize {
        self.n_electrons / 2
    }
}

/// One-electron integrals `h1[a,b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneBodyTensor {
    pub h1: DMatrix<f64>,
}

impl OneBodyTensor {
    pub fn n(&self) -> usize {
        self.h1.nrows()
    }

    pub fn symmetry_error(&self) -> f64 {
        (&self.h1 - self.h1.transpose()).abs().max()
    }
}

/// Two-electron integrals in operator ordering, `h2[a,b,c,d] ↔ f†_a f†_b f_c f_d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoBodyTensor {
    pub h2: Tensor4,
}

impl TwoBodyTensor {
    pub fn zeros(n: usize) -> Self {
        Self { h2: Tensor4::zeros(n) }
    }

    /// Build from a chemist-notation tensor `eri[p,q,r,s] = (pq|rs)`.
    pub fn from_chemist(eri: &Tensor4) -> Self {
        Self { h2: Tensor4::from_fn(eri.n, |a, b, c, d| eri[[a, d, b, c]]) }
    }

    pub fn to_chemist(&self) -> Tensor4 {
        Tensor4::from_fn(self.n(), |p, q, r, s| self.chemist(p, q, r, s))
    }

    /// `(pq|rs)` read through the operator ordering.
    #[inline]
    pub fn chemist(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.h2[[p, r, s, q]]
    }

    pub fn n(&self) -> usize {
        self.h2.n
    }

    /// Largest deviation from the 8-fold real-orbital symmetry of `(pq|rs)`.
    pub fn symmetry_error(&self) -> f64 {
        let n = self.n();
        let mut err: f64 = 0.0;
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = self.chemist(p, q, r, s);
                        for w in [
                            self.chemist(q, p, r, s),
                            self.chemist(p, q, s, r),
                            self.chemist(q, p, s, r),
                            self.chemist(r, s, p, q),
                            self.chemist(s, r, p, q),
                            self.chemist(r, s, q, p),
                            self.chemist(s, r, q, p),
                        ] {
                            err = err.max((v - w).abs());
                        }
                    }
                }
            }
        }
        err
    }
}

/// Orbital label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitalClass {
    Virtual,
    Core,
    Active,
}

/// Permutation that sorts orbital energies ascending, ties by original index.
pub fn order_orbitals(sys: &MolecularSystem) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..sys.n_spatial).collect();
    // A stable sort keeps equal energies in original index order.
    perm.sort_by(|&a, &b| sys.mo_energies[a].total_cmp(&sys.mo_energies[b]));
    perm
}

/// Aufbau labels on an energy-ordered basis. The optional inclusive window
/// `(lo, hi)` marks orbitals as active.
pub fn classify_orbitals(
    n_spatial: usize,
    n_electrons: usize,
    active: Option<(usize, usize)>,
) -> Result<Vec<OrbitalClass>> {
    if n_electrons > 2 * n_spatial {
        return Err(Error::Invalid("more electrons than spin orbitals".into()));
    }
    let nocc = n_electrons / 2;
    let mut labels: Vec<OrbitalClass> =
        (0..n_spatial).map(|k| if k < nocc { OrbitalClass::Core } else { OrbitalClass::Virtual }).collect();
    if let Some((lo, hi)) = active {
        if lo > hi || hi >= n_spatial {
            return Err(Error::Invalid("active window out of range".into()));
        }
        for l in &mut labels[lo..=hi] {
            *l = OrbitalClass::Active;
        }
    }
    Ok(labels)
}

/// Restricted closed-shell Fock matrix for the given doubly occupied set.
///
/// Written for a general (possibly non-symmetric, renormalized) `h2`; for
/// symmetric input it equals `h1 + Σ_i 2(pq|ii) − (pi|iq)`.
pub fn fock_matrix(h1: &OneBodyTensor, h2: &TwoBodyTensor, occupied: &[usize]) -> DMatrix<f64> {
    let n = h1.n();
    let g = &h2.h2;
    DMatrix::from_fn(n, n, |p, q| {
        let mut f = h1.h1[(p, q)];
        for &i in occupied {
            f += g[[p, i, i, q]] + g[[i, p, q, i]] - 0.5 * g[[i, p, i, q]] - 0.5 * g[[p, i, q, i]];
        }
        f
    })
}

/// Closed-shell determinant energy (electronic part only).
pub fn determinant_energy(h1: &OneBodyTensor, h2: &TwoBodyTensor, occupied: &[usize]) -> f64 {
    let g = &h2.h2;
    let mut e = 0.0;
    for &i in occupied {
        e += 2.0 * h1.h1[(i, i)];
        for &j in occupied {
            e += 2.0 * g[[i, j, j, i]] - g[[i, j, i, j]];
        }
    }
    e
}

/// Reorder orbitals so that new index `k` is old index `perm[k]`.
pub fn permute_integrals(h1: &OneBodyTensor, h2: &TwoBodyTensor, perm: &[usize]) -> (OneBodyTensor, TwoBodyTensor) {
    let n = perm.len();
    let h1p = DMatrix::from_fn(n, n, |a, b| h1.h1[(perm[a], perm[b])]);
    (OneBodyTensor { h1: h1p }, TwoBodyTensor { h2: h2.h2.restrict(perm) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(e: &[f64]) -> MolecularSystem {
        MolecularSystem::new(e.len(), 2, e.to_vec()).unwrap()
    }

    #[test]
    fn ordering_examples() {
        assert_eq!(order_orbitals(&sys(&[-0.5, -1.2, 0.3])), [1, 0, 2]);
        assert_eq!(order_orbitals(&sys(&[-1.0, 0.0, 2.0])), [0, 1, 2]);
        assert_eq!(order_orbitals(&sys(&[-1.0, -1.0, 0.2])), [0, 1, 2]);
        assert_eq!(order_orbitals(&sys(&[0.2, -1.0, -1.0])), [1, 2, 0]);
    }

    #[test]
    fn classification_examples() {
        use OrbitalClass::*;
        assert_eq!(classify_orbitals(4, 4, None).unwrap(), [Core, Core, Virtual, Virtual]);
        assert_eq!(classify_orbitals(2, 2, None).unwrap(), [Core, Virtual]);
        assert_eq!(classify_orbitals(4, 4, Some((1, 2))).unwrap(), [Core, Active, Active, Virtual]);
        assert!(classify_orbitals(2, 6, None).is_err());
    }

    #[test]
    fn fock_without_two_body_is_h1() {
        let h1 = OneBodyTensor { h1: DMatrix::from_fn(3, 3, |a, b| (a + b) as f64) };
        assert_eq!(fock_matrix(&h1, &TwoBodyTensor::zeros(3), &[0, 1]), h1.h1);
        let mut h2 = TwoBodyTensor::zeros(3);
        h2.h2[[0, 1, 1, 0]] = 0.7;
        assert_eq!(fock_matrix(&h1, &h2, &[]), h1.h1);
    }

    #[test]
    fn chemist_round_trip() {
        let eri = Tensor4::from_fn(3, |p, q, r, s| (p * 27 + q * 9 + r * 3 + s) as f64);
        let t = TwoBodyTensor::from_chemist(&eri);
        assert_eq!(t.to_chemist(), eri);
        assert_eq!(t.h2[[0, 1, 2, 0]], eri[[0, 0, 1, 2]]);
    }

    #[test]
    fn odd_electrons_rejected() {
        assert!(MolecularSystem::new(2, 3, alloc::vec![0.0, 1.0]).is_err());
    }
}
