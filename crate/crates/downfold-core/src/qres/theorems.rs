//! Circuits for products and contractions of encoded tensors, checked by
//! dense simulation against the closed-form overlaps.
//!
//! Inputs are scaled by their max-abs-entry norm and zero-padded to powers
//! of two; `P̄`, `R̄`, … below denote padded extents. Only in-shape indices
//! are read out.

use super::encoder::{encoder_gate, normalize, prep_angle, EncoderWiring};
use super::ir::{basis_index, CircuitBuilder, Gate, GateIR};
use super::layout::ceil_log2;
use crate::error::{Error, Result};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Matrix-product circuit flavour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatmulVariant {
    /// `U = H (2TT† − 1) H` with the isometry `T` prepared by a unitary.
    Isometry,
    /// `U = H V_A† R V_B H`.
    UnitaryOnly,
}

/// Simulated and closed-form overlaps, row-major over `shape`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub shape: Vec<usize>,
    pub simulated: Vec<f64>,
    pub expected: Vec<f64>,
    pub max_error: f64,
    pub circuit: GateIR,
}

impl OverlapReport {
    fn new(shape: Vec<usize>, simulated: Vec<f64>, expected: Vec<f64>, circuit: GateIR) -> Self {
        let max_error = simulated.iter().zip(&expected).fold(0.0, |m: f64, (s, e)| m.max((s - e).abs()));
        Self { shape, simulated, expected, max_error, circuit }
    }
}

fn pow2(w: usize) -> f64 {
    (1usize << w) as f64
}

/// All index tuples of `shape` in row-major order.
fn tuples(shape: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &n in shape {
        out = out.into_iter().flat_map(|t| (0..n).map(move |k| [t.as_slice(), &[k]].concat())).collect();
    }
    out
}

/// Overlap of `(A B)_ij`, `A` being `N×P` and `B` `P×M`, read as
/// `⟨0_c, i, 0, 0|U|0_c, j, 1, 0⟩ = (AB)_ij / (P̄ · max(N̄, M̄) · ‖A‖‖B‖)`.
pub fn verify_matmul(a: &DMatrix<f64>, b: &DMatrix<f64>, variant: MatmulVariant) -> Result<OverlapReport> {
    if a.ncols() != b.nrows() {
        return Err(Error::Shape(format!("{}×{} times {}×{}", a.nrows(), a.ncols(), b.nrows(), b.ncols())));
    }
    let (an, na) = normalize(a);
    let (bn, nb) = normalize(b);
    let wp = ceil_log2(a.ncols());
    let wr = ceil_log2(a.nrows()).max(ceil_log2(b.ncols()));
    let mut cb = CircuitBuilder::new();
    let c = cb.register("c", wp);
    let r = cb.register("r", wr);
    let a1 = cb.register("a1", 1)[0];
    let a2 = cb.register("a2", 1)[0];
    let mut rest = r.clone();
    rest.extend([a1, a2]);
    cb.hadamard("c", &c);
    match variant {
        MatmulVariant::UnitaryOnly => {
            let va = encoder_gate(&an, EncoderWiring { rows: &r, cols: &c, selector: a1, data: a2, branch: 0 }, "A", &["r", "c"])?;
            let vb = encoder_gate(&bn, EncoderWiring { rows: &r, cols: &c, selector: a1, data: a2, branch: 1 }, "B", &["r", "c"])?;
            cb.push(vb);
            cb.hadamard("r", &r);
            cb.hadamard("a1", &[a1]);
            cb.push(Gate::Reflector { qubits: rest });
            cb.hadamard("r", &r);
            cb.hadamard("a1", &[a1]);
            cb.push(va.adjoint());
        }
        MatmulVariant::Isometry => {
            let entry = |m: &DMatrix<f64>, i: usize, j: usize| if i < m.nrows() && j < m.ncols() { m[(i, j)] } else { 0.0 };
            let mut angles = Vec::with_capacity(1 << (wp + wr + 1));
            for ci in 0..1usize << wp {
                for ri in 0..1usize << wr {
                    angles.push(prep_angle(entry(&an, ri, ci)));
                    angles.push(prep_angle(entry(&bn, ci, ri)));
                }
            }
            let mut controls = c.clone();
            controls.extend(&r);
            controls.push(a1);
            let mut s = CircuitBuilder::new();
            s.register("all", wp + wr + 2);
            s.hadamard("r", &r);
            s.push(Gate::Ry { qubit: a1, theta: core::f64::consts::FRAC_PI_2 });
            s.push(Gate::Multiplexor { controls, target: a2, angles, tag: None });
            let s = s.finish()?;
            cb.extend(&s.adjoint().gates);
            cb.push(Gate::Reflector { qubits: rest });
            cb.extend(&s.gates);
        }
    }
    cb.hadamard("c", &c);
    let ir = cb.finish()?;
    let widths = [wp, wr, 1, 1];
    let scale = pow2(wp) * pow2(wr) * na * nb;
    let prod = a * b;
    let (n, m) = (a.nrows(), b.ncols());
    let mut sim = vec![0.0; n * m];
    for j in 0..m {
        let psi = ir.run(basis_index(&widths, &[0, j, 1, 0]))?;
        for i in 0..n {
            sim[i * m + j] = psi[basis_index(&widths, &[0, i, 0, 0])];
        }
    }
    let exp = (0..n * m).map(|k| prod[(k / m, k % m)] / scale).collect();
    Ok(OverlapReport::new(vec![n, m], sim, exp, ir))
}

fn check_count(mats: &[&DMatrix<f64>]) -> Result<()> {
    if !(2..=3).contains(&mats.len()) {
        return Err(Error::Invalid(format!("expected 2 or 3 tensors, got {}", mats.len())));
    }
    Ok(())
}

/// Overlap of `A_ij B_kl [C_ef]` at `⟨i,j,k,l,[e,f],0,0|U|0⟩`, equal to the
/// normalized product over `√(M̄ N̄ Q̄ R̄ [P̄ S̄])`.
pub fn verify_tensor_product(mats: &[&DMatrix<f64>]) -> Result<OverlapReport> {
    check_count(mats)?;
    let names = ["A", "B", "C"];
    let reg = [["I", "J"], ["K", "L"], ["E", "F"]];
    let mut cb = CircuitBuilder::new();
    let mut idx = Vec::new();
    let mut widths = Vec::new();
    for (k, m) in mats.iter().enumerate() {
        let wr = ceil_log2(m.nrows());
        let wc = ceil_log2(m.ncols());
        idx.push((cb.register(reg[k][0], wr), cb.register(reg[k][1], wc)));
        widths.extend([wr, wc]);
    }
    let s = cb.register("A1", 1)[0];
    let d = cb.register("D", mats.len());
    widths.extend([1, mats.len()]);
    for (k, (ri, ci)) in idx.iter().enumerate() {
        cb.hadamard(reg[k][0], ri);
        cb.hadamard(reg[k][1], ci);
    }
    let mut expected_scale = 1.0;
    for (k, m) in mats.iter().enumerate() {
        let (mn, nm) = normalize(m);
        let (ri, ci) = &idx[k];
        cb.push(encoder_gate(&mn, EncoderWiring { rows: ri, cols: ci, selector: s, data: d[k], branch: 0 }, names[k], &reg[k])?);
        expected_scale *= nm * libm::sqrt(pow2(ri.len()) * pow2(ci.len()));
    }
    let ir = cb.finish()?;
    let psi = ir.run(0)?;
    let shape: Vec<usize> = mats.iter().flat_map(|m| [m.nrows(), m.ncols()]).collect();
    let mut sim = Vec::new();
    let mut exp = Vec::new();
    for t in tuples(&shape) {
        let mut v = t.clone();
        v.extend([0, 0]);
        sim.push(psi[basis_index(&widths, &v)]);
        exp.push(mats.iter().enumerate().map(|(k, m)| m[(t[2 * k], t[2 * k + 1])]).product::<f64>() / expected_scale);
    }
    Ok(OverlapReport::new(shape, sim, exp, ir))
}

/// Overlap of `Σ_i A_ij B_ik [C_il]` at `⟨0_I, j, k, [l], 0, 0|U|0⟩`, equal to
/// the normalized contraction over `M̄ √(R̄ Q̄ [S̄])`.
pub fn verify_tensor_contraction(mats: &[&DMatrix<f64>]) -> Result<OverlapReport> {
    check_count(mats)?;
    let m0 = mats[0].nrows();
    if mats.iter().any(|m| m.nrows() != m0) {
        return Err(Error::Shape("contracted extents differ".into()));
    }
    let names = ["A", "B", "C"];
    let regs = ["J", "K", "L"];
    let mut cb = CircuitBuilder::new();
    let wi = ceil_log2(m0);
    let i = cb.register("I", wi);
    let mut widths = vec![wi];
    let cols: Vec<Vec<usize>> = mats
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let w = ceil_log2(m.ncols());
            widths.push(w);
            cb.register(regs[k], w)
        })
        .collect();
    let s = cb.register("A1", 1)[0];
    let d = cb.register("D", mats.len());
    widths.extend([1, mats.len()]);
    cb.hadamard("I", &i);
    for (k, c) in cols.iter().enumerate() {
        cb.hadamard(regs[k], c);
    }
    let mut scale = pow2(wi);
    for (k, m) in mats.iter().enumerate() {
        let (mn, nm) = normalize(m);
        cb.push(encoder_gate(&mn, EncoderWiring { rows: &i, cols: &cols[k], selector: s, data: d[k], branch: 0 }, names[k], &["I", regs[k]])?);
        scale *= nm * libm::sqrt(pow2(cols[k].len()));
    }
    cb.hadamard("I", &i);
    let ir = cb.finish()?;
    let psi = ir.run(0)?;
    let shape: Vec<usize> = mats.iter().map(|m| m.ncols()).collect();
    let mut sim = Vec::new();
    let mut exp = Vec::new();
    for t in tuples(&shape) {
        let mut v = vec![0];
        v.extend(&t);
        v.extend([0, 0]);
        sim.push(psi[basis_index(&widths, &v)]);
        let c: f64 = (0..m0).map(|r| mats.iter().zip(&t).map(|(m, &j)| m[(r, j)]).product::<f64>()).sum();
        exp.push(c / scale);
    }
    Ok(OverlapReport::new(shape, sim, exp, ir))
}

/// Overlap of `Σ_x A_ix B_jx` at `⟨i, j, 0_K, 0, 0|U|0⟩` for
/// `U = H_K V_IK(A) V_JK(B) H_I H_J H_K`, equal to the normalized sum over
/// `√(Ī J̄ K̄²)`.
pub fn verify_dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<OverlapReport> {
    if a.ncols() != b.ncols() {
        return Err(Error::Shape(format!("contracted extents {} and {}", a.ncols(), b.ncols())));
    }
    let (an, na) = normalize(a);
    let (bn, nb) = normalize(b);
    let (wi, wj, wk) = (ceil_log2(a.nrows()), ceil_log2(b.nrows()), ceil_log2(a.ncols()));
    let mut cb = CircuitBuilder::new();
    let i = cb.register("I", wi);
    let j = cb.register("J", wj);
    let k = cb.register("K", wk);
    let s = cb.register("A1", 1)[0];
    let d = cb.register("D", 2);
    cb.hadamard("I", &i);
    cb.hadamard("J", &j);
    cb.hadamard("K", &k);
    cb.push(encoder_gate(&bn, EncoderWiring { rows: &j, cols: &k, selector: s, data: d[1], branch: 0 }, "B", &["J", "K"])?);
    cb.push(encoder_gate(&an, EncoderWiring { rows: &i, cols: &k, selector: s, data: d[0], branch: 0 }, "A", &["I", "K"])?);
    cb.hadamard("K", &k);
    let ir = cb.finish()?;
    let psi = ir.run(0)?;
    let widths = [wi, wj, wk, 1, 2];
    let scale = na * nb * libm::sqrt(pow2(wi) * pow2(wj)) * pow2(wk);
    let dot = a * b.transpose();
    let (n, m) = (a.nrows(), b.nrows());
    let sim = (0..n * m).map(|q| psi[basis_index(&widths, &[q / m, q % m, 0, 0, 0])]).collect();
    let exp = (0..n * m).map(|q| dot[(q / m, q % m)] / scale).collect();
    Ok(OverlapReport::new(vec![n, m], sim, exp, ir))
}

/// Overlap of `A_ix B_ix` at `⟨i, x, 0, 0|U|0⟩` for `U = V_IX(A) V_IX(B) H_I H_X`,
/// equal to the normalized product over `√(Ī X̄)`.
pub fn verify_hadamard(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<OverlapReport> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!("{:?} and {:?}", a.shape(), b.shape())));
    }
    let (an, na) = normalize(a);
    let (bn, nb) = normalize(b);
    let (wi, wx) = (ceil_log2(a.nrows()), ceil_log2(a.ncols()));
    let mut cb = CircuitBuilder::new();
    let i = cb.register("I", wi);
    let x = cb.register("X", wx);
    let s = cb.register("A1", 1)[0];
    let d = cb.register("D", 2);
    cb.hadamard("I", &i);
    cb.hadamard("X", &x);
    cb.push(encoder_gate(&bn, EncoderWiring { rows: &i, cols: &x, selector: s, data: d[1], branch: 0 }, "B", &["I", "X"])?);
    cb.push(encoder_gate(&an, EncoderWiring { rows: &i, cols: &x, selector: s, data: d[0], branch: 0 }, "A", &["I", "X"])?);
    let ir = cb.finish()?;
    let psi = ir.run(0)?;
    let widths = [wi, wx, 1, 2];
    let scale = na * nb * libm::sqrt(pow2(wi) * pow2(wx));
    let (n, m) = a.shape();
    let sim = (0..n * m).map(|q| psi[basis_index(&widths, &[q / m, q % m, 0, 0])]).collect();
    let exp = (0..n * m).map(|q| a[(q / m, q % m)] * b[(q / m, q % m)] / scale).collect();
    Ok(OverlapReport::new(vec![n, m], sim, exp, ir))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_matmul_quarter() {
        let id = DMatrix::<f64>::identity(2, 2);
        for v in [MatmulVariant::Isometry, MatmulVariant::UnitaryOnly] {
            let r = verify_matmul(&id, &id, v).unwrap();
            assert!(r.max_error < 1e-14);
            assert!((r.simulated[0] - 0.25).abs() < 1e-15 && r.simulated[1].abs() < 1e-15);
        }
    }

    #[test]
    fn shape_mismatch() {
        let a = DMatrix::<f64>::zeros(2, 3);
        assert!(matches!(verify_matmul(&a, &a, MatmulVariant::UnitaryOnly), Err(Error::Shape(_))));
    }
}
