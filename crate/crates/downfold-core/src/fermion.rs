//! Occupation-number strings and fermionic operator strings.
//!
//! Spin orbital `(i, σ)` is bit `2i + σ` with σ = 0 for ↑ and 1 for ↓. A
//! creator or annihilator on bit `b` picks up the sign `(−1)^k`, where `k` is
//! the number of occupied bits below `b`.

use crate::integrals::{OneBodyTensor, TwoBodyTensor};
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

/// Spin label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Spin {
    Up = 0,
    Down = 1,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    pub fn flip(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

/// Bit index of a spin orbital.
#[inline]
pub fn bit(orbital: usize, spin: Spin) -> u32 {
    (2 * orbital + spin as usize) as u32
}

/// Mask with both spin orbitals of a spatial orbital set.
pub fn spatial_mask(orbitals: impl IntoIterator<Item = usize>) -> u64 {
    orbitals.into_iter().fold(0, |m, i| m | (3u64 << (2 * i)))
}

/// A single creation (`dagger`) or annihilation operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Op {
    pub bit: u32,
    pub dagger: bool,
}

pub fn cre(orbital: usize, spin: Spin) -> Op {
    Op { bit: bit(orbital, spin), dagger: true }
}

pub fn ann(orbital: usize, spin: Spin) -> Op {
    Op { bit: bit(orbital, spin), dagger: false }
}

/// Apply an operator string (written left to right, acting right to left).
/// Returns the sign and the resulting string, or `None` if it vanishes.
#[inline]
pub fn apply(state: u64, ops: &[Op]) -> Option<(f64, u64)> {
    let mut s = state;
    let mut sign = 1.0;
    for op in ops.iter().rev() {
        let m = 1u64 << op.bit;
        if (s & m != 0) == op.dagger {
            return None;
        }
        if (s & (m - 1)).count_ones() % 2 == 1 {
            sign = -sign;
        }
        s ^= m;
    }
    Some((sign, s))
}

/// Hermitian conjugate of an operator string.
pub fn adjoint(ops: &[Op]) -> Vec<Op> {
    ops.iter().rev().map(|o| Op { bit: o.bit, dagger: !o.dagger }).collect()
}

/// A weighted operator string.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub ops: Vec<Op>,
}

/// Second-quantized Hamiltonian terms for the stored two-body ordering.
pub fn hamiltonian_terms(h1: &OneBodyTensor, h2: &TwoBodyTensor) -> Vec<Term> {
    let n = h1.n();
    let mut terms = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let v = h1.h1[(a, b)];
            if v != 0.0 {
                for s in Spin::BOTH {
                    terms.push(Term { coef: v, ops: alloc::vec![cre(a, s), ann(b, s)] });
                }
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let v = 0.5 * h2.h2[[a, b, c, d]];
                    if v == 0.0 {
                        continue;
                    }
                    for s in Spin::BOTH {
                        for sp in Spin::BOTH {
                            terms.push(Term { coef: v, ops: alloc::vec![cre(a, s), cre(b, sp), ann(c, sp), ann(d, s)] });
                        }
                    }
                }
            }
        }
    }
    terms
}

/// Sparse many-body vector over occupation strings.
pub type SparseState = BTreeMap<u64, f64>;

/// `Σ_t coef_t · ops_t |v⟩`.
pub fn apply_terms(terms: &[Term], v: &SparseState) -> SparseState {
    let mut out = SparseState::new();
    for (&s, &c) in v {
        if c == 0.0 {
            continue;
        }
        for t in terms {
            if let Some((sg, s2)) = apply(s, &t.ops) {
                *out.entry(s2).or_insert(0.0) += sg * t.coef * c;
            }
        }
    }
    out
}

/// All strings over `n_spatial` orbitals with `n_elec` electrons, ascending.
pub fn sector_states(n_spatial: usize, n_elec: usize) -> Vec<u64> {
    let nbits = 2 * n_spatial as u32;
    (0u64..1u64 << nbits).filter(|s| s.count_ones() as usize == n_elec).collect()
}

/// Closed-shell reference with the listed spatial orbitals doubly occupied.
pub fn reference_state(occupied: &[usize]) -> u64 {
    spatial_mask(occupied.iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anticommutation() {
        // {f_p, f†_q} = δ_pq on every basis string of two orbitals
        for s in 0u64..16 {
            for p in 0..4u32 {
                for q in 0..4u32 {
                    let a = Op { bit: p, dagger: false };
                    let c = Op { bit: q, dagger: true };
                    let mut v = SparseState::new();
                    for ops in [[a, c], [c, a]] {
                        if let Some((sg, t)) = apply(s, &ops) {
                            *v.entry(t).or_insert(0.0) += sg;
                        }
                    }
                    v.retain(|_, x| *x != 0.0);
                    if p == q {
                        assert_eq!(v.get(&s), Some(&1.0));
                        assert_eq!(v.len(), 1);
                    } else {
                        assert!(v.is_empty());
                    }
                }
            }
        }
    }

    #[test]
    fn sign_counts_lower_bits() {
        assert_eq!(apply(0b011, &[Op { bit: 2, dagger: true }]), Some((1.0, 0b111)));
        assert_eq!(apply(0b001, &[Op { bit: 2, dagger: true }]), Some((-1.0, 0b101)));
        assert_eq!(apply(0b001, &[Op { bit: 0, dagger: true }]), None);
    }

    #[test]
    fn sector_size() {
        assert_eq!(sector_states(3, 2).len(), 15);
        assert_eq!(reference_state(&[0, 1]), 0b1111);
    }
}
