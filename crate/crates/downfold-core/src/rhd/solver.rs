//! Preconditioned fixed-point amplitude solver with DIIS.
//!
//! Each iteration takes `t ← t + r/D` with the usual orbital-energy
//! denominators built from the current Fock matrix, then extrapolates over
//! the last few iterates.

use super::amplitudes::AmplitudeSet;
use super::engine::ResidualSet;
use crate::error::{Error, Result};
use alloc::collections::VecDeque;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Solver controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Convergence threshold on the residual ∞-norm.
    pub tol: f64,
    pub max_iter: usize,
    /// DIIS subspace size; 0 disables extrapolation.
    pub diis: usize,
    /// Residual norm treated as divergence.
    pub diverge: f64,
    /// Smallest denominator magnitude before clamping.
    pub min_denominator: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 200, diis: 8, diverge: 1e3, min_denominator: 1e-6 }
    }
}

/// Outcome of one amplitude solve.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSolution {
    pub amps: AmplitudeSet,
    /// Residual evaluations performed.
    pub iterations: usize,
    /// ∞-norm of the residual at `amps`.
    pub residual_norm: f64,
    pub converged: bool,
    /// Some denominator was clamped.
    pub quasi_degenerate: bool,
}

/// Denominators in flattened amplitude order, and whether any was clamped.
pub fn denominators(amps: &AmplitudeSet, fock: &DMatrix<f64>, min_abs: f64) -> (Vec<f64>, bool) {
    let l = &amps.layout;
    let f = |p: usize| fock[(p, p)];
    let fnn = f(l.outer);
    let mut d = Vec::with_capacity(amps.len());
    for &i in &l.occ {
        d.push(f(i) - fnn);
    }
    let doubles = |d: &mut Vec<f64>| {
        for &b in &l.virt {
            for &i in &l.occ {
                for &j in &l.occ {
                    d.push(f(i) + f(j) - f(b) - fnn);
                }
            }
        }
    };
    doubles(&mut d);
    for &i in &l.occ {
        for &j in &l.occ {
            d.push(f(i) + f(j) - 2.0 * fnn);
        }
    }
    if amps.t2a.is_some() {
        doubles(&mut d);
    }
    let mut clamped = false;
    for x in &mut d {
        if x.abs() < min_abs {
            *x = if *x < 0.0 { -min_abs } else { min_abs };
            clamped = true;
        }
    }
    (d, clamped)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| if x.is_nan() { f64::NAN } else { f64::max(m, x.abs()) })
}

/// Largest DIIS coefficient magnitude accepted. Larger ones signal nearly
/// dependent error vectors.
const DIIS_MAX_COEFF: f64 = 1e2;

/// DIIS extrapolation from iterates and their error vectors. Oldest entries
/// are dropped until the bordered system gives bounded coefficients.
fn diis_extrapolate(hist: &VecDeque<(Vec<f64>, Vec<f64>)>) -> Option<Vec<f64>> {
    (2..=hist.len()).rev().find_map(|m| diis_window(hist.range(hist.len() - m..).collect()))
}

fn diis_window(hist: Vec<&(Vec<f64>, Vec<f64>)>) -> Option<Vec<f64>> {
    let m = hist.len();
    let mut b = DMatrix::<f64>::zeros(m + 1, m + 1);
    for (p, (_, ep)) in hist.iter().enumerate() {
        for (q, (_, eq)) in hist.iter().enumerate() {
            b[(p, q)] = ep.iter().zip(eq).map(|(x, y)| x * y).sum();
        }
        b[(p, m)] = -1.0;
        b[(m, p)] = -1.0;
    }
    // Scale the error block to keep the bordered system well conditioned.
    let scale = (0..m).map(|p| b[(p, p)]).fold(0.0, f64::max);
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }
    for p in 0..m {
        for q in 0..m {
            b[(p, q)] /= scale;
        }
    }
    let mut rhs = DVector::<f64>::zeros(m + 1);
    rhs[m] = -1.0;
    let c = b.lu().solve(&rhs)?;
    if c.iter().take(m).any(|x| !x.is_finite() || x.abs() > DIIS_MAX_COEFF) {
        return None;
    }
    let n = hist[0].0.len();
    let mut out = alloc::vec![0.0; n];
    for (p, (t, _)) in hist.iter().enumerate() {
        for (o, x) in out.iter_mut().zip(t) {
            *o += c[p] * x;
        }
    }
    Some(out)
}

/// Solve `r(t) = 0` starting from `init`.
pub fn solve_amplitudes(
    init: AmplitudeSet,
    fock: &DMatrix<f64>,
    cfg: &SolverConfig,
    mut residual: impl FnMut(&AmplitudeSet) -> ResidualSet,
) -> Result<StepSolution> {
    let (den, quasi_degenerate) = denominators(&init, fock, cfg.min_denominator);
    let mut amps = init;
    let mut x = amps.to_vec();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>)> = VecDeque::new();
    for it in 1..=cfg.max_iter.max(1) {
        amps.set_from_slice(&x);
        let r = residual(&amps).to_vec();
        let norm = inf_norm(&r);
        if !norm.is_finite() || norm > cfg.diverge {
            return Err(Error::Diverged { iter: it, norm });
        }
        if best.as_ref().is_none_or(|(b, _)| norm < *b) {
            best = Some((norm, x.clone()));
        }
        if norm <= cfg.tol {
            return Ok(StepSolution { amps, iterations: it, residual_norm: norm, converged: true, quasi_degenerate });
        }
        if it == cfg.max_iter.max(1) {
            break;
        }
        let dx: Vec<f64> = r.iter().zip(&den).map(|(r, d)| r / d).collect();
        let next: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
        if cfg.diis >= 2 {
            hist.push_back((next.clone(), dx));
            while hist.len() > cfg.diis {
                hist.pop_front();
            }
        }
        x = if hist.len() >= 2 { diis_extrapolate(&hist).unwrap_or(next) } else { next };
    }
    let (norm, xb) = best.expect("at least one iteration ran");
    amps.set_from_slice(&xb);
    Ok(StepSolution { amps, iterations: cfg.max_iter.max(1), residual_norm: norm, converged: false, quasi_degenerate })
}
