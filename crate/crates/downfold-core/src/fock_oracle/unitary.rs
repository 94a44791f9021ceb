//! Unitary counterpart of the similarity transformation.
//!
//! With `K = η − η†` and `η² = 0`, `(1 − K)(1 + K) = 1 + η†η + ηη† = M`, so
//! `U = (1 + K) M^{-1/2}` is unitary. On each two-state excitation subspace
//! this is the rotation with `s = t/√(1 + t²)`.

use super::{build_eta, p_diagonal, FockSpaceOperator};
use crate::rhd::amplitudes::AmplitudeSet;
use nalgebra::DMatrix;

fn inv_sqrt_spd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let e = m.clone().symmetric_eigen();
    let d = e.eigenvalues.map(|x| 1.0 / libm::sqrt(x));
    &e.eigenvectors * DMatrix::from_diagonal(&d) * e.eigenvectors.transpose()
}

/// `U = (1 + η − η†)(1 + η†η + ηη†)^{-1/2}`.
pub fn build_unitary(eta: &FockSpaceOperator) -> FockSpaceOperator {
    let e = &eta.matrix;
    let d = e.nrows();
    let id = DMatrix::<f64>::identity(d, d);
    let k = e - e.transpose();
    let m = &id + e.transpose() * e + e * e.transpose();
    FockSpaceOperator { basis: eta.basis.clone(), matrix: (&id + k) * inv_sqrt_spd(&m) }
}

/// Product of the unitaries of the individual excitations, singles first.
pub fn build_unitary_product(amps: &AmplitudeSet, basis: &super::Basis) -> FockSpaceOperator {
    let d = basis.dim();
    let pd = p_diagonal(basis, amps.layout.outer);
    let mut u = DMatrix::<f64>::identity(d, d);
    for t in amps.eta_terms() {
        let mut e = super::operator_from_terms(basis, core::slice::from_ref(&t));
        for (col, &p) in pd.iter().enumerate() {
            if p == 0.0 {
                e.matrix.column_mut(col).fill(0.0);
            }
        }
        u *= build_unitary(&e).matrix;
    }
    FockSpaceOperator { basis: basis.clone(), matrix: u }
}

/// `‖U†U − I‖_F`.
pub fn unitarity_error(u: &FockSpaceOperator) -> f64 {
    let d = u.dim();
    (u.matrix.transpose() * &u.matrix - DMatrix::<f64>::identity(d, d)).norm()
}

/// Hermiticity diagnostics of `U† H U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedHermiticity {
    /// `‖A − A†‖_F` for `A = U†HU`.
    pub asymmetry: f64,
    /// `‖P A Q‖_F`.
    pub pq: f64,
    /// `‖Q A P‖_F`.
    pub qp: f64,
}

pub fn transformed_hermiticity(h: &FockSpaceOperator, u: &FockSpaceOperator, outer: usize) -> TransformedHermiticity {
    let a = u.matrix.transpose() * &h.matrix * &u.matrix;
    let (p, q) = super::projectors(&h.basis, outer);
    TransformedHermiticity { asymmetry: (&a - a.transpose()).norm(), pq: (&p * &a * &q).norm(), qp: (&q * &a * &p).norm() }
}

/// `U` for the given amplitudes, and the distance to the ordered product form.
pub fn unitary_with_product_gap(amps: &AmplitudeSet, basis: &super::Basis) -> (FockSpaceOperator, f64) {
    let u = build_unitary(&build_eta(basis, amps));
    let gap = (&u.matrix - build_unitary_product(amps, basis).matrix).norm();
    (u, gap)
}

/// Entries of `U` on the pair `{|a⟩, |b⟩}` as `[[U_aa, U_ab], [U_ba, U_bb]]`.
pub fn restrict_pair(u: &FockSpaceOperator, a: u64, b: u64) -> Option<[[f64; 2]; 2]> {
    let (ia, ib) = (u.basis.index(a)?, u.basis.index(b)?);
    let m = &u.matrix;
    Some([[m[(ia, ia)], m[(ia, ib)]], [m[(ib, ia)], m[(ib, ib)]]])
}
