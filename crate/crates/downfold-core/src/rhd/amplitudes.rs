//! Amplitudes of the single-reference singles/doubles generator for one step.
//!
//! With `N` the outermost orbital, occupied `i, j` and virtual `b ≠ N`:
//!
//! ```text
//! η = Σ_iσ      t1[i]      (1 − n_{N,−σ}) f†_Nσ f_iσ
//!   + Σ_bijσσ'  t2m[b,i,j] (1 − n_{N,−σ}) f†_Nσ f†_bσ' f_jσ' f_iσ
//!   + Σ_ij      t2p[i,j]   f†_N↑ f†_N↓ f_j↓ f_i↑
//! ```
//!
//! The projector factors are identity on states with `N` empty and annihilate
//! every other state, so `η = η_bare · P`. The `aN` block is the spin-adapted
//! image `t²_{aNij} = t2m[a,j,i]`.

use crate::fermion::{ann, cre, Spin, Term};
use crate::tensor::Tensor3;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// How the `aN` and `Nb` doubles blocks relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BlockMode {
    /// `aN` is the image of `Nb` (one tensor).
    #[default]
    SpinAdapted,
    /// Separate unknowns for both blocks. The two operator sets coincide, so
    /// the equations are redundant.
    Independent,
}

/// Orbital roles for one downfolding step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepLayout {
    /// Orbitals in the current Hamiltonian.
    pub n: usize,
    /// The orbital being decoupled.
    pub outer: usize,
    pub occ: Vec<usize>,
    /// Virtual orbitals other than `outer`.
    pub virt: Vec<usize>,
}

impl StepLayout {
    /// Aufbau layout with `n_occ` doubly occupied orbitals and `outer = n − 1`.
    pub fn aufbau(n: usize, n_occ: usize) -> Self {
        let outer = n - 1;
        Self { n, outer, occ: (0..n_occ).collect(), virt: (n_occ..outer).collect() }
    }

    pub fn n_occ(&self) -> usize {
        self.occ.len()
    }

    pub fn n_virt(&self) -> usize {
        self.virt.len()
    }
}

/// Amplitudes `t1`, mixed doubles `t2m` and paired doubles `t2p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSet {
    pub layout: StepLayout,
    pub mode: BlockMode,
    pub t1: Vec<f64>,
    /// `t2m[b,i,j] = t²_{Nbij}`, `b` indexing `layout.virt`.
    pub t2m: Tensor3,
    /// `t2p[i,j] = t³_{NNij}` stored row-major.
    pub t2p: Vec<f64>,
    /// Separate `t²_{aNij}` block in [`BlockMode::Independent`].
    pub t2a: Option<Tensor3>,
}

impl AmplitudeSet {
    pub fn zeros(layout: StepLayout, mode: BlockMode) -> Self {
        let (o, v) = (layout.n_occ(), layout.n_virt());
        Self {
            t1: vec![0.0; o],
            t2m: Tensor3::zeros(v, o, o),
            t2p: vec![0.0; o * o],
            t2a: (mode == BlockMode::Independent).then(|| Tensor3::zeros(v, o, o)),
            layout,
            mode,
        }
    }

    pub fn len(&self) -> usize {
        self.t1.len() + self.t2m.data.len() + self.t2p.len() + self.t2a.as_ref().map_or(0, |t| t.data.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flatten in the order t1, t2m, t2p, t2a.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(&self.t1);
        v.extend_from_slice(&self.t2m.data);
        v.extend_from_slice(&self.t2p);
        if let Some(t) = &self.t2a {
            v.extend_from_slice(&t.data);
        }
        v
    }

    pub fn set_from_slice(&mut self, x: &[f64]) {
        let (a, rest) = x.split_at(self.t1.len());
        self.t1.copy_from_slice(a);
        let (b, rest) = rest.split_at(self.t2m.data.len());
        self.t2m.data.copy_from_slice(b);
        let (c, rest) = rest.split_at(self.t2p.len());
        self.t2p.copy_from_slice(c);
        if let Some(t) = &mut self.t2a {
            t.data.copy_from_slice(rest);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.to_vec().iter().fold(0.0, |m, x| f64::max(m, x.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.to_vec().iter().all(|x| x.is_finite())
    }

    /// `t³_{NNij}`.
    pub fn paired(&self, i: usize, j: usize) -> f64 {
        self.t2p[i * self.layout.n_occ() + j]
    }

    /// `t²_{aNij}` for virtual position `a`.
    pub fn t2_an(&self, a: usize, i: usize, j: usize) -> f64 {
        match &self.t2a {
            Some(t) => t[[a, i, j]],
            None => self.t2m[[a, j, i]],
        }
    }

    /// Generator terms (without the projector, which is the identity on `P`).
    pub fn eta_terms(&self) -> Vec<Term> {
        let l = &self.layout;
        let nn = l.outer;
        let mut terms = Vec::new();
        for (ii, &i) in l.occ.iter().enumerate() {
            for s in Spin::BOTH {
                terms.push(Term { coef: self.t1[ii], ops: vec![cre(nn, s), ann(i, s)] });
            }
        }
        for (bi, &b) in l.virt.iter().enumerate() {
            for (ii, &i) in l.occ.iter().enumerate() {
                for (ji, &j) in l.occ.iter().enumerate() {
                    for s in Spin::BOTH {
                        for sp in Spin::BOTH {
                            let t = self.t2m[[bi, ii, ji]];
                            terms.push(Term { coef: t, ops: vec![cre(nn, s), cre(b, sp), ann(j, sp), ann(i, s)] });
                            if let Some(ta) = &self.t2a {
                                let t = ta[[bi, ii, ji]];
                                terms.push(Term { coef: t, ops: vec![cre(b, s), cre(nn, sp), ann(j, sp), ann(i, s)] });
                            }
                        }
                    }
                }
            }
        }
        for (ii, &i) in l.occ.iter().enumerate() {
            for (ji, &j) in l.occ.iter().enumerate() {
                let t = self.paired(ii, ji);
                terms.push(Term { coef: t, ops: vec![cre(nn, Spin::Up), cre(nn, Spin::Down), ann(j, Spin::Down), ann(i, Spin::Up)] });
            }
        }
        terms.retain(|t| t.coef != 0.0);
        terms
    }

    /// `t1` on the full orbital range (zero off the occupied set).
    pub fn t1_full(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.layout.n];
        for (ii, &i) in self.layout.occ.iter().enumerate() {
            v[i] = self.t1[ii];
        }
        v
    }

    /// Spin-adapted `t2[b,i,j]` on the full orbital range. In independent mode the
    /// `aN` block is folded in through its image.
    pub fn t2_full(&self) -> Tensor3 {
        let n = self.layout.n;
        let mut t = Tensor3::zeros(n, n, n);
        for (bi, &b) in self.layout.virt.iter().enumerate() {
            for (ii, &i) in self.layout.occ.iter().enumerate() {
                for (ji, &j) in self.layout.occ.iter().enumerate() {
                    let extra = self.t2a.as_ref().map_or(0.0, |ta| ta[[bi, ji, ii]]);
                    t[[b, i, j]] = self.t2m[[bi, ii, ji]] + extra;
                }
            }
        }
        t
    }

    /// Paired doubles on the full orbital range.
    pub fn t2p_full(&self) -> DMatrix<f64> {
        let n = self.layout.n;
        let mut m = DMatrix::zeros(n, n);
        for (ii, &i) in self.layout.occ.iter().enumerate() {
            for (ji, &j) in self.layout.occ.iter().enumerate() {
                m[(i, j)] = self.paired(ii, ji);
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flatten_round_trip() {
        let mut a = AmplitudeSet::zeros(StepLayout::aufbau(4, 2), BlockMode::Independent);
        let x: Vec<f64> = (0..a.len()).map(|k| k as f64).collect();
        a.set_from_slice(&x);
        assert_eq!(a.to_vec(), x);
        assert_eq!(a.len(), 2 + 4 + 4 + 4);
    }

    #[test]
    fn zero_amplitudes_have_no_terms() {
        let a = AmplitudeSet::zeros(StepLayout::aufbau(4, 2), BlockMode::SpinAdapted);
        assert!(a.eta_terms().is_empty());
    }
}
