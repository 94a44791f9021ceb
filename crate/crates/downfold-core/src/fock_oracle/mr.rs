//! Coefficients of the singles/paired-doubles multireference Bloch equation.
//!
//! The generator for outer orbital `N` is
//!
//! ```text
//! η = Σ_{i≠N,σ} t1[i] (1 − n_{i,−σ})(1 − n_{N,−σ}) f†_Nσ f_iσ
//!   + Σ_{i,j≠N}  t2[i,j] f†_N↑ f†_N↓ f_i↓ f_j↑
//! ```
//!
//! acting on `P`. With `R = Q (1 − η) H (1 + η) P` on the full Fock space the
//! coefficients are vacuum matrix elements of `−R`:
//!
//! ```text
//! A[i]        = −⟨N↑| R |i↑⟩
//! B^{↑ν}[j,k,l] = −⟨N↑ jν| R |k↑ lν⟩
//! C[i,j]      = −⟨N↑ N↓| R |j↑ i↓⟩
//! D^σ[i,j,k,l] = −⟨N↑ N↓ lσ| R |i↑ j↓ kσ⟩
//! ```
//!
//! where `|a b …⟩ = f†_a f†_b … |0⟩`. Indices run over the orbitals other than
//! `N` in ascending order.

use super::{build_hamiltonian, p_diagonal, projectors, Basis, FockSpaceOperator};
use crate::error::Result;
use crate::fermion::{apply, cre, Op, Spin};
use crate::integrals::{OneBodyTensor, TwoBodyTensor};
use crate::tensor::{Tensor3, Tensor4};
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;

/// Singles and paired-doubles amplitudes for one outer orbital.
#[derive(Debug, Clone, PartialEq)]
pub struct MrAmplitudes {
    pub n: usize,
    pub outer: usize,
    /// One entry per orbital other than `outer`.
    pub t1: Vec<f64>,
    /// `t2[i,j]` over the orbitals other than `outer`.
    pub t2: DMatrix<f64>,
}

impl MrAmplitudes {
    pub fn zeros(n: usize, outer: usize) -> Self {
        Self { n, outer, t1: vec![0.0; n - 1], t2: DMatrix::zeros(n - 1, n - 1) }
    }

    pub fn others(&self) -> Vec<usize> {
        (0..self.n).filter(|&k| k != self.outer).collect()
    }
}

/// Coefficient tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct MrCoefficients {
    pub a: Vec<f64>,
    /// `B^{↑↑}`.
    pub b_same: Tensor3,
    /// `B^{↑↓}`.
    pub b_opposite: Tensor3,
    pub c: DMatrix<f64>,
    pub d_up: Tensor4,
    pub d_down: Tensor4,
}

fn occ(s: u64, orbital: usize, spin: Spin) -> bool {
    s >> crate::fermion::bit(orbital, spin) & 1 == 1
}

/// The generator as a dense operator on the full Fock space.
pub fn mr_eta(basis: &Basis, amps: &MrAmplitudes) -> FockSpaceOperator {
    let d = basis.dim();
    let nn = amps.outer;
    let others = amps.others();
    let pd = p_diagonal(basis, nn);
    let mut m = DMatrix::zeros(d, d);
    for (col, &s) in basis.states.iter().enumerate() {
        if pd[col] == 0.0 {
            continue;
        }
        for (ii, &i) in others.iter().enumerate() {
            for sg in Spin::BOTH {
                let t = amps.t1[ii];
                if t == 0.0 || occ(s, i, sg.flip()) || occ(s, nn, sg.flip()) {
                    continue;
                }
                if let Some((sign, s2)) = apply(s, &[cre(nn, sg), crate::fermion::ann(i, sg)]) {
                    m[(basis.index(s2).expect("full basis"), col)] += sign * t;
                }
            }
        }
        for (ii, &i) in others.iter().enumerate() {
            for (ji, &j) in others.iter().enumerate() {
                let t = amps.t2[(ii, ji)];
                if t == 0.0 {
                    continue;
                }
                let ops = [cre(nn, Spin::Up), cre(nn, Spin::Down), crate::fermion::ann(i, Spin::Down), crate::fermion::ann(j, Spin::Up)];
                if let Some((sign, s2)) = apply(s, &ops) {
                    m[(basis.index(s2).expect("full basis"), col)] += sign * t;
                }
            }
        }
    }
    FockSpaceOperator { basis: basis.clone(), matrix: m }
}

/// `Q (1 − η) H (1 + η) P` on the full Fock space.
pub fn mr_bloch(h1: &OneBodyTensor, h2: &TwoBodyTensor, amps: &MrAmplitudes) -> Result<FockSpaceOperator> {
    let h = build_hamiltonian(h1, h2)?;
    let eta = mr_eta(&h.basis, amps);
    let (p, q) = projectors(&h.basis, amps.outer);
    let d = h.dim();
    let id = DMatrix::<f64>::identity(d, d);
    let r = q * (&id - &eta.matrix) * &h.matrix * (&id + &eta.matrix) * p;
    Ok(FockSpaceOperator { basis: h.basis, matrix: r })
}

/// `⟨0| (ops_bra)† R ops_ket |0⟩`, the operator strings written as creators.
fn element(r: &FockSpaceOperator, bra: &[Op], ket: &[Op]) -> f64 {
    match (apply(0, bra), apply(0, ket)) {
        (Some((sb, b)), Some((sk, k))) => sb * sk * r.matrix[(r.basis.index(b).unwrap(), r.basis.index(k).unwrap())],
        _ => 0.0,
    }
}

/// All coefficient tensors from the dense Bloch operator.
pub fn evaluate_mr_coefficients(h1: &OneBodyTensor, h2: &TwoBodyTensor, amps: &MrAmplitudes) -> Result<MrCoefficients> {
    let r = mr_bloch(h1, h2, amps)?;
    let nn = amps.outer;
    let o = amps.others();
    let m = o.len();
    let (up, dn) = (Spin::Up, Spin::Down);
    let a = o.iter().map(|&i| -element(&r, &[cre(nn, up)], &[cre(i, up)])).collect();
    let b = |nu: Spin| {
        Tensor3::from_fn(m, m, m, |j, k, l| -element(&r, &[cre(nn, up), cre(o[j], nu)], &[cre(o[k], up), cre(o[l], nu)]))
    };
    let c = DMatrix::from_fn(m, m, |i, j| -element(&r, &[cre(nn, up), cre(nn, dn)], &[cre(o[j], up), cre(o[i], dn)]));
    let d = |sg: Spin| {
        Tensor4::from_fn(m, |i, j, k, l| {
            -element(&r, &[cre(nn, up), cre(nn, dn), cre(o[l], sg)], &[cre(o[i], up), cre(o[j], dn), cre(o[k], sg)])
        })
    };
    Ok(MrCoefficients { a, b_same: b(up), b_opposite: b(dn), c, d_up: d(up), d_down: d(dn) })
}

/// The closed-form singles coefficient
/// `A = (t1·h1_N) t1 + t1·h1 − h1_NN t1 − h1_N`.
pub fn printed_a(h1: &OneBodyTensor, amps: &MrAmplitudes) -> Vec<f64> {
    let nn = amps.outer;
    let o = amps.others();
    let h = &h1.h1;
    let t = &amps.t1;
    let th: f64 = o.iter().zip(t).map(|(&k, tk)| tk * h[(nn, k)]).sum();
    o.iter()
        .enumerate()
        .map(|(ii, &i)| {
            let t_dot_h: f64 = o.iter().zip(t).map(|(&k, tk)| tk * h[(k, i)]).sum();
            th * t[ii] + t_dot_h - h[(nn, nn)] * t[ii] - h[(nn, i)]
        })
        .collect()
}

/// The closed-form paired-doubles coefficient, read with `·` as a single
/// contraction between matrices and a double contraction of a matrix with a
/// rank-4 tensor, `⊗` as the outer product, and `(X)_{2143}[a,b,c,d] = X[b,a,d,c]`.
pub fn printed_c(h1: &OneBodyTensor, h2: &TwoBodyTensor, amps: &MrAmplitudes) -> DMatrix<f64> {
    let nn = amps.outer;
    let o = amps.others();
    let m = o.len();
    let h = &h1.h1;
    let g = &h2.h2;
    let t1 = &amps.t1;
    let t2 = &amps.t2;
    let hn = |a: usize| h[(nn, o[a])];
    let mm = DMatrix::from_fn(m, m, |k, d| hn(k) * t1[d] + h[(o[k], o[d])]);
    let pair: f64 = (0..m).flat_map(|a| (0..m).map(move |b| (a, b))).map(|(a, b)| t2[(a, b)] * g[[nn, nn, o[a], o[b]]]).sum();
    DMatrix::from_fn(m, m, |c, d| {
        let mut v = 0.0;
        for k in 0..m {
            v += t2[(c, k)] * mm[(k, d)] + t2[(k, d)] * mm[(k, c)];
        }
        v -= 2.0 * hn(c) * t1[d];
        for a in 0..m {
            for b in 0..m {
                let x = g[[nn, o[a], o[b], o[c]]] * t1[d]
                    + g[[nn, o[b], o[a], o[d]]] * t1[c]
                    + g[[o[a], o[b], o[c], o[d]]]
                    + g[[o[b], o[a], o[d], o[c]]];
                v += t2[(a, b)] * x;
            }
        }
        v += pair * t2[(c, d)];
        v - g[[nn, nn, nn, nn]] * t2[(c, d)] - g[[nn, nn, o[c], o[d]]] - 2.0 * h[(nn, nn)] * t2[(c, d)]
    })
}
