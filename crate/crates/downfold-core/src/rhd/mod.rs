//! Recursive Hamiltonian downfolding: amplitude equations, solver, RG flow and
//! the per-orbital recursion.

pub mod amplitudes;
pub mod downfold;
pub mod engine;
pub mod factorized;
pub mod printed;
pub mod rg;
pub mod solver;

pub use amplitudes::{AmplitudeSet, BlockMode, StepLayout};
pub use downfold::{
    downfold, solve_step, DownfoldConfig, EnergyTrace, FactorizedConfig, HtfRank, ResidualKind, StepFactorization,
    StepRecord,
};
pub use engine::{projected_residual, ResidualSet};
pub use printed::{printed_residual, printed_residual_t1, printed_residual_t2};
pub use rg::{occupied_step, rg_update, RgFlow};
pub use solver::{solve_amplitudes, SolverConfig, StepSolution};

use crate::integrals::{fock_matrix, OneBodyTensor, TwoBodyTensor};
use alloc::vec::Vec;
use nalgebra::DMatrix;

/// Integrals over the orbitals not yet decoupled.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    pub h1: OneBodyTensor,
    pub h2: TwoBodyTensor,
    /// Doubly occupied orbitals `0..n_occ` (capped at the active count).
    pub n_occ: usize,
    /// Input index of every active orbital.
    pub orbitals: Vec<usize>,
    /// Fock matrix of the current integrals.
    pub fock: DMatrix<f64>,
    /// Energy removed with each decoupled orbital.
    pub energy_ledger: Vec<f64>,
}

impl EffectiveHamiltonian {
    pub fn new(h1: OneBodyTensor, h2: TwoBodyTensor, n_occ: usize, orbitals: Vec<usize>) -> Self {
        let n_occ = n_occ.min(h1.n());
        let occ: Vec<usize> = (0..n_occ).collect();
        let fock = fock_matrix(&h1, &h2, &occ);
        Self { h1, h2, n_occ, orbitals, fock, energy_ledger: Vec::new() }
    }

    pub fn n_active(&self) -> usize {
        self.h1.n()
    }

    /// Replace the integrals after the last orbital is removed.
    pub fn reduced(&self, h1: OneBodyTensor, h2: TwoBodyTensor, e_step: f64) -> Self {
        let mut orbitals = self.orbitals.clone();
        orbitals.pop();
        let mut next = Self::new(h1, h2, self.n_occ, orbitals);
        next.energy_ledger = self.energy_ledger.clone();
        next.energy_ledger.push(e_step);
        next
    }
}
