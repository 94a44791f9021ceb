//! Renormalization of the integrals after an orbital is decoupled.
//!
//! With `t1`, `t2[b,i,j]` and `t3[i,j]` on the full orbital range and `N` the
//! decoupled orbital, the one-body update is `h1'[a,b] = h1[a,b] + h1[a,N] t1[b]`
//! and the two-body update collects
//!
//! ```text
//! h2[a,b,c,N] t1[d] + h2[a,b,N,d] t1[c]
//! s[a,b] t3s[d,c]                      s = sym(h2[·,·,N,N]), t3s = sym(t3)
//! h1[a,N] t2[b,d,c] + h1[b,N] t2[a,c,d]
//! G[a,b,c,d] + G[b,a,d,c]              G[a,b,c,d] = Σ_e h2[a,b,e,N] t2[e,d,c]
//! ```
//!
//! followed by removal of `N`. [`RgFlow::Printed`] drops the `G` terms.

use super::amplitudes::AmplitudeSet;
use crate::integrals::{OneBodyTensor, TwoBodyTensor};
use crate::tensor::Tensor4;
use alloc::vec::Vec;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Which two-body renormalization terms to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RgFlow {
    /// All terms of `P S⁻¹ H S P` that stay within one- and two-body rank.
    #[default]
    Complete,
    /// Only the terms written out in the closed-form flow equations.
    Printed,
}

fn others(n: usize, outer: usize) -> Vec<usize> {
    (0..n).filter(|&k| k != outer).collect()
}

/// Renormalized integrals on the orbitals other than `amps.layout.outer`.
pub fn rg_update(h1: &OneBodyTensor, h2: &TwoBodyTensor, amps: &AmplitudeSet, flow: RgFlow) -> (OneBodyTensor, TwoBodyTensor) {
    let n = h1.n();
    let nn = amps.layout.outer;
    let t1 = amps.t1_full();
    let t2 = amps.t2_full();
    let t3 = amps.t2p_full();
    let g = &h2.h2;
    let hn: Vec<f64> = (0..n).map(|a| h1.h1[(a, nn)]).collect();

    let h1p = DMatrix::from_fn(n, n, |a, b| h1.h1[(a, b)] + hn[a] * t1[b]);
    let s = DMatrix::from_fn(n, n, |a, b| 0.5 * (g[[a, b, nn, nn]] + g[[b, a, nn, nn]]));
    let t3s = (&t3 + t3.transpose()) * 0.5;
    let mut gt = Tensor4::zeros(n);
    if flow == RgFlow::Complete {
        for a in 0..n {
            for b in 0..n {
                for e in 0..n {
                    let v = g[[a, b, e, nn]];
                    if v == 0.0 {
                        continue;
                    }
                    for c in 0..n {
                        for d in 0..n {
                            gt[[a, b, c, d]] += v * t2[[e, d, c]];
                        }
                    }
                }
            }
        }
    }
    let h2p = Tensor4::from_fn(n, |a, b, c, d| {
        g[[a, b, c, d]]
            + g[[a, b, c, nn]] * t1[d]
            + g[[a, b, nn, d]] * t1[c]
            + s[(a, b)] * t3s[(d, c)]
            + hn[a] * t2[[b, d, c]]
            + hn[b] * t2[[a, c, d]]
            + gt[[a, b, c, d]]
            + gt[[b, a, d, c]]
    });
    let keep = others(n, nn);
    let m = keep.len();
    (
        OneBodyTensor { h1: DMatrix::from_fn(m, m, |a, b| h1p[(keep[a], keep[b])]) },
        TwoBodyTensor { h2: h2p.restrict(&keep) },
    )
}

/// Decouple a doubly occupied orbital `outer`. Returns its energy
/// `2 h1[N,N] + h2[N,N,N,N]` and the integrals with its mean field folded into
/// the one-body part.
pub fn occupied_step(h1: &OneBodyTensor, h2: &TwoBodyTensor, outer: usize) -> (f64, OneBodyTensor, TwoBodyTensor) {
    let n = h1.n();
    let nn = outer;
    let g = &h2.h2;
    let e = 2.0 * h1.h1[(nn, nn)] + g[[nn, nn, nn, nn]];
    let keep = others(n, nn);
    let m = keep.len();
    let h1p = DMatrix::from_fn(m, m, |a, b| {
        let (a, b) = (keep[a], keep[b]);
        h1.h1[(a, b)] + g[[a, nn, nn, b]] + g[[nn, a, b, nn]] - 0.5 * g[[a, nn, b, nn]] - 0.5 * g[[nn, a, nn, b]]
    });
    (e, OneBodyTensor { h1: h1p }, TwoBodyTensor { h2: g.restrict(&keep) })
}
