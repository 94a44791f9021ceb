//! Pre-synthesis gate list and its dense simulation.
//!
//! Qubit `q` of an `n`-qubit circuit is bit `n − 1 − q` of a basis index, so
//! registers read most significant first. All gates are real orthogonal and
//! states are real vectors.

use crate::error::{Error, Result};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Largest circuit [`GateIR::densify`] will expand.
pub const DENSIFY_CAP: usize = 12;

/// Largest circuit the state-vector simulator accepts.
pub const SIMULATE_CAP: usize = 24;

/// Which block encoder a multiplexor realizes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderTag {
    /// Data tensor name.
    pub tensor: String,
    /// Index registers, in control order.
    pub registers: Vec<String>,
    /// Selector value whose branch carries the data.
    pub selector: u8,
    pub adjoint: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum Gate {
    /// Hadamard on every listed qubit.
    H { register: String, qubits: Vec<usize> },
    Ry { qubit: usize, theta: f64 },
    /// `Ry(angles[k])` on `target` when the controls read `k`.
    Multiplexor { controls: Vec<usize>, target: usize, angles: Vec<f64>, tag: Option<EncoderTag> },
    /// `2|0⟩⟨0| − 1` on the listed qubits.
    Reflector { qubits: Vec<usize> },
}

impl Gate {
    fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::H { qubits, .. } | Gate::Reflector { qubits } => qubits.clone(),
            Gate::Ry { qubit, .. } => vec![*qubit],
            Gate::Multiplexor { controls, target, .. } => {
                let mut q = controls.clone();
                q.push(*target);
                q
            }
        }
    }

    pub fn adjoint(&self) -> Gate {
        match self {
            Gate::Ry { qubit, theta } => Gate::Ry { qubit: *qubit, theta: -theta },
            Gate::Multiplexor { controls, target, angles, tag } => Gate::Multiplexor {
                controls: controls.clone(),
                target: *target,
                angles: angles.iter().map(|a| -a).collect(),
                tag: tag.clone().map(|t| EncoderTag { adjoint: !t.adjoint, ..t }),
            },
            g => g.clone(),
        }
    }
}

/// A contiguous named block of qubits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedRegister {
    pub name: String,
    pub start: usize,
    pub width: usize,
}

/// An immutable circuit: registers plus gates in application order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateIR {
    pub qubits: usize,
    pub registers: Vec<NamedRegister>,
    pub gates: Vec<Gate>,
}

/// Incremental construction of a [`GateIR`].
#[derive(Debug, Clone, Default)]
pub struct CircuitBuilder {
    registers: Vec<NamedRegister>,
    gates: Vec<Gate>,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append a register and return its qubits.
    pub fn register(&mut self, name: &str, width: usize) -> Vec<usize> {
        let start = self.registers.last().map_or(0, |r| r.start + r.width);
        self.registers.push(NamedRegister { name: name.into(), start, width });
        (start..start + width).collect()
    }

    pub fn hadamard(&mut self, name: &str, qubits: &[usize]) {
        if !qubits.is_empty() {
            self.gates.push(Gate::H { register: name.into(), qubits: qubits.to_vec() });
        }
    }

    pub fn push(&mut self, g: Gate) {
        self.gates.push(g);
    }

    pub fn extend(&mut self, gates: &[Gate]) {
        self.gates.extend_from_slice(gates);
    }

    pub fn finish(self) -> Result<GateIR> {
        let qubits = self.registers.last().map_or(0, |r| r.start + r.width);
        let ir = GateIR { qubits, registers: self.registers, gates: self.gates };
        ir.validate()?;
        Ok(ir)
    }
}

/// Basis index of the given per-register values.
pub fn basis_index(widths: &[usize], values: &[usize]) -> usize {
    widths.iter().zip(values).fold(0, |acc, (&w, &v)| (acc << w) | v)
}

impl GateIR {
    /// Every gate acts on existing, distinct qubits with a full angle table.
    pub fn validate(&self) -> Result<()> {
        for (k, g) in self.gates.iter().enumerate() {
            let q = g.qubits();
            if q.iter().any(|&x| x >= self.qubits) {
                return Err(Error::Invalid(alloc::format!("gate {k} addresses a qubit outside the {}-qubit layout", self.qubits)));
            }
            let mut s = q.clone();
            s.sort_unstable();
            s.dedup();
            if s.len() != q.len() {
                return Err(Error::Invalid(alloc::format!("gate {k} repeats a qubit")));
            }
            if let Gate::Multiplexor { controls, angles, .. } = g {
                if angles.len() != 1 << controls.len() {
                    return Err(Error::Invalid(alloc::format!("gate {k} has {} angles for {} controls", angles.len(), controls.len())));
                }
            }
        }
        Ok(())
    }

    pub fn register(&self, name: &str) -> Option<&NamedRegister> {
        self.registers.iter().find(|r| r.name == name)
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    fn bit(&self, q: usize) -> usize {
        1 << (self.qubits - 1 - q)
    }

    /// The inverse circuit.
    pub fn adjoint(&self) -> GateIR {
        GateIR { qubits: self.qubits, registers: self.registers.clone(), gates: self.gates.iter().rev().map(Gate::adjoint).collect() }
    }

    /// Apply every gate to `psi` in order.
    pub fn apply(&self, psi: &mut [f64]) {
        for g in &self.gates {
            match g {
                Gate::H { qubits, .. } => {
                    let r = core::f64::consts::FRAC_1_SQRT_2;
                    for &q in qubits {
                        let b = self.bit(q);
                        for i in (0..psi.len()).filter(|i| i & b == 0) {
                            let (x, y) = (psi[i], psi[i | b]);
                            psi[i] = r * (x + y);
                            psi[i | b] = r * (x - y);
                        }
                    }
                }
                Gate::Ry { qubit, theta } => {
                    let b = self.bit(*qubit);
                    let (c, s) = (libm::cos(theta / 2.0), libm::sin(theta / 2.0));
                    for i in (0..psi.len()).filter(|i| i & b == 0) {
                        let (x, y) = (psi[i], psi[i | b]);
                        psi[i] = c * x - s * y;
                        psi[i | b] = s * x + c * y;
                    }
                }
                Gate::Multiplexor { controls, target, angles, .. } => {
                    let b = self.bit(*target);
                    let cs: Vec<(f64, f64)> = angles.iter().map(|t| (libm::cos(t / 2.0), libm::sin(t / 2.0))).collect();
                    let cbits: Vec<usize> = controls.iter().map(|&q| self.bit(q)).collect();
                    for i in (0..psi.len()).filter(|i| i & b == 0) {
                        let k = cbits.iter().fold(0, |acc, &cb| (acc << 1) | usize::from(i & cb != 0));
                        let (c, s) = cs[k];
                        let (x, y) = (psi[i], psi[i | b]);
                        psi[i] = c * x - s * y;
                        psi[i | b] = s * x + c * y;
                    }
                }
                Gate::Reflector { qubits } => {
                    let mask: usize = qubits.iter().map(|&q| self.bit(q)).sum();
                    for (i, a) in psi.iter_mut().enumerate() {
                        if i & mask != 0 {
                            *a = -*a;
                        }
                    }
                }
            }
        }
    }

    /// `U|index⟩`.
    pub fn run(&self, index: usize) -> Result<Vec<f64>> {
        if self.qubits > SIMULATE_CAP {
            return Err(Error::TooLarge { n: self.qubits, cap: SIMULATE_CAP });
        }
        let mut psi = vec![0.0; self.dim()];
        psi[index] = 1.0;
        self.apply(&mut psi);
        Ok(psi)
    }

    /// `⟨bra|U|ket⟩`.
    pub fn amplitude(&self, bra: usize, ket: usize) -> Result<f64> {
        Ok(self.run(ket)?[bra])
    }

    /// The full unitary, column `k` being `U|k⟩`.
    pub fn densify(&self) -> Result<DMatrix<f64>> {
        if self.qubits > DENSIFY_CAP {
            return Err(Error::TooLarge { n: self.qubits, cap: DENSIFY_CAP });
        }
        let d = self.dim();
        let mut u = DMatrix::zeros(d, d);
        for k in 0..d {
            let col = self.run(k)?;
            u.column_mut(k).copy_from_slice(&col);
        }
        Ok(u)
    }

    /// `‖U†U − I‖_F`.
    pub fn unitarity_error(&self) -> Result<f64> {
        let u = self.densify()?;
        let d = u.nrows();
        Ok((u.transpose() * &u - DMatrix::<f64>::identity(d, d)).norm())
    }

    /// Encoders, single-qubit rotations and CX gates, each multiplexor of
    /// `2^c` branches costing `2^c` of each.
    pub fn gate_counts(&self) -> GateCounts {
        let mut n = GateCounts::default();
        for g in &self.gates {
            match g {
                Gate::H { qubits, .. } => n.hadamards += qubits.len(),
                Gate::Ry { .. } => n.rotations += 1,
                Gate::Multiplexor { angles, .. } => {
                    n.rotations += angles.len();
                    n.cx += angles.len();
                }
                Gate::Reflector { .. } => n.reflectors += 1,
            }
        }
        n
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    pub hadamards: usize,
    pub rotations: usize,
    pub cx: usize,
    pub reflectors: usize,
}
