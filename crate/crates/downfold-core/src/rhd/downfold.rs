//! The recursive driver: order orbitals, decouple the highest remaining one,
//! renormalize, repeat.

use super::amplitudes::{AmplitudeSet, BlockMode, StepLayout};
use super::engine::projected_residual;
use super::printed::printed_residual;
use super::rg::{occupied_step, rg_update, RgFlow};
use super::solver::{solve_amplitudes, SolverConfig, StepSolution};
use super::EffectiveHamiltonian;
use crate::error::{Error, Result};
use crate::fermion::hamiltonian_terms;
use crate::integrals::{determinant_energy, order_orbitals, permute_integrals, MolecularSystem, OneBodyTensor, TwoBodyTensor};
use crate::tensorfactor::{factorize_eri, factorize_eri_exact, factorize_t2, CpConfig, DEFAULT_CHOLESKY_DELTA};
use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// Which residual evaluator drives the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ResidualKind {
    /// Direct projection of the transformed Hamiltonian.
    #[default]
    Projected,
    /// The closed-form term lists, transcribed as written.
    Printed,
}

/// CP rank of the integral factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HtfRank {
    /// `N_htf = round(mult · N_aux)`.
    Multiple(f64),
    /// Exact CP at `N_htf = N_orb²`.
    Exact,
}

/// Settings for the factorized path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorizedConfig {
    pub htf: HtfRank,
    /// CP rank of the doubles; `None` keeps them dense.
    pub ttf_rank: Option<usize>,
    pub cholesky_delta: f64,
    pub seed: u64,
}

impl Default for FactorizedConfig {
    fn default() -> Self {
        Self { htf: HtfRank::Multiple(2.0), ttf_rank: None, cholesky_delta: DEFAULT_CHOLESKY_DELTA, seed: 7 }
    }
}

/// Recursion controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DownfoldConfig {
    pub solver: SolverConfig,
    pub mode: BlockMode,
    pub flow: RgFlow,
    pub residual: ResidualKind,
    /// Orbitals left undecoupled at the end (0 downfolds everything).
    pub keep: usize,
    /// Continue past a step that hit the iteration limit.
    pub allow_unconverged: bool,
    pub factorized: Option<FactorizedConfig>,
}

impl Default for DownfoldConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            mode: BlockMode::default(),
            flow: RgFlow::default(),
            residual: ResidualKind::default(),
            keep: 0,
            allow_unconverged: false,
            factorized: None,
        }
    }
}

/// Factorization diagnostics of one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFactorization {
    pub n_aux: usize,
    pub n_htf: usize,
    /// Frobenius error of the Cholesky/cross cut.
    pub cholesky_error: f64,
    /// Frobenius error of the CP-reconstructed integrals.
    pub eri_error: f64,
    pub n_ttf: Option<usize>,
    pub t2_error: Option<f64>,
}

/// One decoupled orbital.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    /// Index in the input orbital basis.
    pub orbital: usize,
    pub occupied: bool,
    pub iters: usize,
    pub residual_norm: f64,
    pub e_step: f64,
    pub e_cum: f64,
    pub wall_ms: f64,
    pub converged: bool,
    pub quasi_degenerate: bool,
    pub factorization: Option<StepFactorization>,
}

/// Per-step record of a full recursion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyTrace {
    pub steps: Vec<StepRecord>,
    /// Reference determinant energy (electronic).
    pub e_reference: f64,
    /// Determinant energy of the orbitals left undecoupled.
    pub e_remaining: f64,
    /// `Σ e_step + e_remaining`.
    pub e_total: f64,
    pub correlation_energy: f64,
}

/// Solve one virtual step on `(h1, h2)` with orbital `n − 1` as the outer one.
pub fn solve_step(
    h1: &OneBodyTensor,
    h2: &TwoBodyTensor,
    n_occ: usize,
    cfg: &DownfoldConfig,
) -> Result<StepSolution> {
    let layout = StepLayout::aufbau(h1.n(), n_occ);
    let occ = layout.occ.clone();
    let fock = crate::integrals::fock_matrix(h1, h2, &occ);
    let init = AmplitudeSet::zeros(layout, cfg.mode);
    match cfg.residual {
        ResidualKind::Projected => {
            let terms = hamiltonian_terms(h1, h2);
            solve_amplitudes(init, &fock, &cfg.solver, |a| projected_residual(&terms, a))
        }
        ResidualKind::Printed => {
            if cfg.mode != BlockMode::SpinAdapted {
                return Err(Error::Invalid("closed-form residuals need spin-adapted blocks".into()));
            }
            solve_amplitudes(init, &fock, &cfg.solver, |a| printed_residual(h2, &fock, a))
        }
    }
}

fn step_failed(step: usize, orbital: usize, e: Error) -> Error {
    Error::StepFailed { step, orbital, reason: format!("{e}") }
}

/// Downfold a closed-shell system. `clock` returns milliseconds.
pub fn downfold(
    sys: &MolecularSystem,
    h1: &OneBodyTensor,
    h2: &TwoBodyTensor,
    cfg: &DownfoldConfig,
    clock: &mut dyn FnMut() -> f64,
) -> Result<EnergyTrace> {
    let perm = order_orbitals(sys);
    let (h1, h2) = permute_integrals(h1, h2, &perm);
    let n_occ = sys.n_occupied();
    let occ: Vec<usize> = (0..n_occ).collect();
    let e_reference = determinant_energy(&h1, &h2, &occ);
    let mut ham = EffectiveHamiltonian::new(h1, h2, n_occ, perm);
    let mut steps = Vec::new();
    let mut e_cum = 0.0;
    // The last orbital is never decoupled; its determinant energy closes the sum.
    while ham.n_active() > cfg.keep.max(1) {
        let n = ham.n_active();
        let outer = n - 1;
        let orbital = ham.orbitals[outer];
        let step = steps.len();
        let t0 = clock();
        let record = if outer >= ham.n_occ {
            let (sol, fact) = virtual_step(&ham, cfg).map_err(|e| step_failed(step, orbital, e))?;
            if !sol.converged && !cfg.allow_unconverged {
                return Err(step_failed(
                    step,
                    orbital,
                    Error::Invalid(format!("no convergence in {} iterations (residual {:e})", sol.iterations, sol.residual_norm)),
                ));
            }
            let (h1n, h2n) = rg_update(&ham.h1, &ham.h2, &sol.amps, cfg.flow);
            ham = ham.reduced(h1n, h2n, 0.0);
            StepRecord {
                step,
                orbital,
                occupied: false,
                iters: sol.iterations,
                residual_norm: sol.residual_norm,
                e_step: 0.0,
                e_cum,
                wall_ms: clock() - t0,
                converged: sol.converged,
                quasi_degenerate: sol.quasi_degenerate,
                factorization: fact,
            }
        } else {
            let (e, h1n, h2n) = occupied_step(&ham.h1, &ham.h2, outer);
            e_cum += e;
            ham = ham.reduced(h1n, h2n, e);
            StepRecord {
                step,
                orbital,
                occupied: true,
                iters: 0,
                residual_norm: 0.0,
                e_step: e,
                e_cum,
                wall_ms: clock() - t0,
                converged: true,
                quasi_degenerate: false,
                factorization: None,
            }
        };
        steps.push(record);
    }
    let remaining: Vec<usize> = (0..ham.n_occ.min(ham.n_active())).collect();
    let e_remaining = determinant_energy(&ham.h1, &ham.h2, &remaining);
    let e_total = e_cum + e_remaining;
    Ok(EnergyTrace { steps, e_reference, e_remaining, e_total, correlation_energy: e_total - e_reference })
}

fn virtual_step(ham: &EffectiveHamiltonian, cfg: &DownfoldConfig) -> Result<(StepSolution, Option<StepFactorization>)> {
    let Some(fc) = cfg.factorized else {
        return Ok((solve_step(&ham.h1, &ham.h2, ham.n_occ, cfg)?, None));
    };
    let fe = match fc.htf {
        HtfRank::Exact => factorize_eri_exact(&ham.h2, fc.cholesky_delta)?,
        HtfRank::Multiple(m) => {
            let n_aux = crate::tensorfactor::factor_eri(&ham.h2, fc.cholesky_delta)?.n_aux();
            let rank = libm::round(m * n_aux as f64) as usize;
            factorize_eri(&ham.h2, fc.cholesky_delta, Some(rank.max(1)), fc.seed)?
        }
    };
    let h2f = fe.reconstruct();
    let mut sol = solve_step(&ham.h1, &h2f, ham.n_occ, cfg)?;
    let mut fact = StepFactorization {
        n_aux: fe.n_aux(),
        n_htf: fe.n_htf(),
        cholesky_error: fe.cholesky.reconstruct().h2.distance(&ham.h2.h2),
        eri_error: h2f.h2.distance(&ham.h2.h2),
        n_ttf: None,
        t2_error: None,
    };
    if let Some(r) = fc.ttf_rank {
        if sol.amps.t2m.max_abs() > 0.0 && sol.amps.mode == BlockMode::SpinAdapted {
            let af = factorize_t2(&sol.amps.t2m, &CpConfig { seed: fc.seed, ..CpConfig::new(r.max(1)) })?;
            let t = af.reconstruct();
            fact.t2_error = Some(t.distance(&sol.amps.t2m));
            sol.amps.t2m = t;
        }
        fact.n_ttf = Some(r);
    }
    Ok((sol, Some(fact)))
}
