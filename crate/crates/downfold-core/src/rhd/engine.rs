//! Residuals by direct projection of `Q (1 − η) H (1 + η) P |Φ⟩` on the
//! excited determinants that carry each amplitude.
//!
//! Bras, with `N` the outer orbital:
//!
//! ```text
//! r1[i]     ⟵ f†_N↑ f_i↑ Φ
//! r2m[b,i,j] ⟵ f†_N↑ f†_b↓ f_j↓ f_i↑ Φ
//! r2p[i,j]  ⟵ f†_N↑ f†_N↓ f_j↓ f_i↑ Φ
//! r2a[a,i,j] ⟵ f†_a↑ f†_N↓ f_j↓ f_i↑ Φ      (independent blocks only)
//! ```

use super::amplitudes::AmplitudeSet;
use crate::fermion::{ann, apply, apply_terms, cre, reference_state, spatial_mask, Op, SparseState, Spin, Term};
use alloc::vec;
use alloc::vec::Vec;

/// Residuals share the amplitude layout.
pub type ResidualSet = AmplitudeSet;

/// Bra operator strings in the flattened amplitude order.
pub fn bra_ops(amps: &AmplitudeSet) -> Vec<Vec<Op>> {
    let l = &amps.layout;
    let nn = l.outer;
    let (up, dn) = (Spin::Up, Spin::Down);
    let mut out = Vec::with_capacity(amps.len());
    for &i in &l.occ {
        out.push(vec![cre(nn, up), ann(i, up)]);
    }
    for &b in &l.virt {
        for &i in &l.occ {
            for &j in &l.occ {
                out.push(vec![cre(nn, up), cre(b, dn), ann(j, dn), ann(i, up)]);
            }
        }
    }
    for &i in &l.occ {
        for &j in &l.occ {
            out.push(vec![cre(nn, up), cre(nn, dn), ann(j, dn), ann(i, up)]);
        }
    }
    if amps.t2a.is_some() {
        for &a in &l.virt {
            for &i in &l.occ {
                for &j in &l.occ {
                    out.push(vec![cre(a, up), cre(nn, dn), ann(j, dn), ann(i, up)]);
                }
            }
        }
    }
    out
}

/// Projected residuals for Hamiltonian terms `h` (see [`crate::fermion::hamiltonian_terms`]).
pub fn projected_residual(h: &[Term], amps: &AmplitudeSet) -> ResidualSet {
    let l = &amps.layout;
    let phi = reference_state(&l.occ);
    let eta = amps.eta_terms();
    let outer = spatial_mask([l.outer]);

    let mut v = SparseState::new();
    v.insert(phi, 1.0);
    for (s, c) in apply_terms(&eta, &v) {
        *v.entry(s).or_insert(0.0) += c;
    }
    let w = apply_terms(h, &v);
    // η = η·P, so only the P-part of Hv feeds the second term.
    let wp: SparseState = w.iter().filter(|(s, _)| *s & outer == 0).map(|(&s, &c)| (s, c)).collect();
    let z = apply_terms(&eta, &wp);

    let vals: Vec<f64> = bra_ops(amps)
        .iter()
        .map(|ops| match apply(phi, ops) {
            Some((sg, det)) => sg * (w.get(&det).copied().unwrap_or(0.0) - z.get(&det).copied().unwrap_or(0.0)),
            None => 0.0,
        })
        .collect();
    let mut r = AmplitudeSet::zeros(l.clone(), amps.mode);
    r.set_from_slice(&vals);
    r
}
