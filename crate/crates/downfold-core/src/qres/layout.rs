//! Named qubit registers of the residual circuits.

use crate::rhd::factorized::FactorDims;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// Width of the data-qubit register, independent of the expression.
pub const DATA_QUBITS: usize = 12;

/// Register symbols in layout order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Register {
    P,
    Q,
    R,
    S,
    I,
    J,
    K,
    L,
    A,
    B,
    C,
    D,
    X,
    /// Branch selector `Â₁`.
    Selector,
    /// Data qubits `D̂`.
    Data,
}

impl Register {
    pub const ALL: [Register; 15] = [
        Register::P,
        Register::Q,
        Register::R,
        Register::S,
        Register::I,
        Register::J,
        Register::K,
        Register::L,
        Register::A,
        Register::B,
        Register::C,
        Register::D,
        Register::X,
        Register::Selector,
        Register::Data,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Register::P => "P",
            Register::Q => "Q",
            Register::R => "R",
            Register::S => "S",
            Register::I => "I",
            Register::J => "J",
            Register::K => "K",
            Register::L => "L",
            Register::A => "A",
            Register::B => "B",
            Register::C => "C",
            Register::D => "D",
            Register::X => "X",
            Register::Selector => "A1",
            Register::Data => "Dhat",
        }
    }

    /// The extent indexed by the register.
    pub fn extent(self, d: &FactorDims) -> usize {
        match self {
            Register::P | Register::Q => d.n_htf,
            Register::R | Register::S => d.n_ttf,
            Register::I | Register::J | Register::K | Register::L => d.n_o,
            Register::A | Register::B | Register::C | Register::D => d.n_v,
            Register::X => d.n_aux,
            Register::Selector => 2,
            Register::Data => 1 << DATA_QUBITS,
        }
    }
}

/// `⌈log₂ n⌉`, with `0` for `n ≤ 1`.
pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Qubit counts per register, contiguous in [`Register::ALL`] order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    pub registers: Vec<(Register, usize)>,
}

impl RegisterLayout {
    pub fn from_dims(d: &FactorDims) -> Self {
        let registers = Register::ALL
            .iter()
            .map(|&r| {
                let w = match r {
                    Register::Selector => 1,
                    Register::Data => DATA_QUBITS,
                    _ => ceil_log2(r.extent(d)),
                };
                (r, w)
            })
            .collect();
        Self { registers }
    }

    pub fn width(&self, r: Register) -> usize {
        self.registers.iter().find(|(s, _)| *s == r).map_or(0, |&(_, w)| w)
    }

    /// First qubit of `r`.
    pub fn offset(&self, r: Register) -> usize {
        self.registers.iter().take_while(|(s, _)| *s != r).map(|&(_, w)| w).sum()
    }

    /// Qubit indices of `r`, most significant first.
    pub fn qubits(&self, r: Register) -> core::ops::Range<usize> {
        let o = self.offset(r);
        o..o + self.width(r)
    }

    pub fn total(&self) -> usize {
        self.registers.iter().map(|&(_, w)| w).sum()
    }
}
