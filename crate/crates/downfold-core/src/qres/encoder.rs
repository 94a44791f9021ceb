//! Block encoders `V^a_{IJ}(A)`.
//!
//! On the branch where the selector reads `a`, the data qubit is rotated by
//! `A_ij I + i√(1 − A_ij²) Y` (or `A_ji` when `a = 1`); the other branch is the
//! identity. `A_ij I + i√(1 − A_ij²) Y` is the real rotation `Ry(−2 arccos A_ij)`,
//! so `⟨i,j,a,0|V|i,j,a,0⟩ = A_ij`.

use super::ir::{CircuitBuilder, EncoderTag, Gate, GateIR};
use super::layout::ceil_log2;
use crate::error::{Error, Result};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use nalgebra::DMatrix;

/// Slack allowed above 1 in the max-abs-entry norm.
const NORM_SLACK: f64 = 1e-12;

/// `Ry` angle of `x I + i√(1 − x²) Y`.
pub fn encode_angle(x: f64) -> f64 {
    -2.0 * libm::acos(x.clamp(-1.0, 1.0))
}

/// `Ry` angle taking `|0⟩` to `x|0⟩ + √(1 − x²)|1⟩`.
pub fn prep_angle(x: f64) -> f64 {
    2.0 * libm::acos(x.clamp(-1.0, 1.0))
}

/// Largest absolute entry.
pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `A / ‖A‖` under the max-abs-entry norm, with the norm. A zero matrix is
/// returned unchanged with norm 1.
pub fn normalize(a: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let n = max_abs(a);
    if n == 0.0 {
        (a.clone(), 1.0)
    } else {
        (a / n, n)
    }
}

/// Where an encoder sits in a circuit.
#[derive(Debug, Clone, Copy)]
pub struct EncoderWiring<'a> {
    pub rows: &'a [usize],
    pub cols: &'a [usize],
    pub selector: usize,
    pub data: usize,
    /// Branch carrying the data; `1` encodes the transpose.
    pub branch: u8,
}

/// The multiplexor realizing `V^a(A)`. Entries beyond the shape of `A` encode 0.
pub fn encoder_gate(a: &DMatrix<f64>, w: EncoderWiring<'_>, tensor: &str, registers: &[&str]) -> Result<Gate> {
    if max_abs(a) > 1.0 + NORM_SLACK {
        return Err(Error::Invalid(format!("unnormalized input: max |entry| = {}", max_abs(a))));
    }
    let (nr, nc) = if w.branch == 0 { (a.nrows(), a.ncols()) } else { (a.ncols(), a.nrows()) };
    if nr > 1 << w.rows.len() || nc > 1 << w.cols.len() {
        return Err(Error::Shape(format!("{nr}×{nc} does not fit {}+{} index qubits", w.rows.len(), w.cols.len())));
    }
    let value = |i: usize, j: usize| {
        let (r, c) = if w.branch == 0 { (i, j) } else { (j, i) };
        if r < a.nrows() && c < a.ncols() {
            a[(r, c)]
        } else {
            0.0
        }
    };
    let wc = w.cols.len();
    let mut angles = Vec::with_capacity(1 << (w.rows.len() + wc + 1));
    for i in 0..1usize << w.rows.len() {
        for j in 0..1usize << wc {
            for s in 0..2u8 {
                angles.push(if s == w.branch { encode_angle(value(i, j)) } else { 0.0 });
            }
        }
    }
    let mut controls = w.rows.to_vec();
    controls.extend_from_slice(w.cols);
    controls.push(w.selector);
    let tag = EncoderTag {
        tensor: tensor.into(),
        registers: registers.iter().map(|s| String::from(*s)).collect(),
        selector: w.branch,
        adjoint: false,
    };
    Ok(Gate::Multiplexor { controls, target: w.data, angles, tag: Some(tag) })
}

/// `V^a_{IJÂD}(A)` alone, on registers `I, J, Â, D`.
pub fn build_block_encoder(a: &DMatrix<f64>, branch: u8) -> Result<GateIR> {
    if branch > 1 {
        return Err(Error::Invalid(format!("selector value {branch} is not 0 or 1")));
    }
    let (nr, nc) = if branch == 0 { (a.nrows(), a.ncols()) } else { (a.ncols(), a.nrows()) };
    let mut b = CircuitBuilder::new();
    let i = b.register("I", ceil_log2(nr));
    let j = b.register("J", ceil_log2(nc));
    let s = b.register("A", 1);
    let d = b.register("D", 1);
    let w = EncoderWiring { rows: &i, cols: &j, selector: s[0], data: d[0], branch };
    b.push(encoder_gate(a, w, "A", &["I", "J"])?);
    b.finish()
}

/// `⟨i,j,a,0|V|i,j,a,0⟩` for every in-shape `(i, j)` of an encoder built by
/// [`build_block_encoder`].
pub fn encoder_readout(ir: &GateIR, nr: usize, nc: usize, branch: u8) -> Result<DMatrix<f64>> {
    let wi = ir.register("I").map_or(0, |r| r.width);
    let wj = ir.register("J").map_or(0, |r| r.width);
    let widths = [wi, wj, 1, 1];
    let mut m = DMatrix::zeros(nr, nc);
    for i in 0..nr {
        for j in 0..nc {
            let k = super::ir::basis_index(&widths, &[i, j, usize::from(branch), 0]);
            m[(i, j)] = ir.amplitude(k, k)?;
        }
    }
    Ok(m)
}
