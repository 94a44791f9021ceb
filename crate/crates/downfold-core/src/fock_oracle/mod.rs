//! Dense Fock-space operators for brute-force checks on small systems.
//!
//! Basis strings are ordered by binary value. Spin orbital `(i, σ)` is bit
//! `2i + σ` (↓ = 1), and fermionic signs use the parity of the occupied bits
//! below the one acted on.

pub mod mr;
pub mod unitary;

use crate::error::{Error, Result};
use crate::fermion::{apply, hamiltonian_terms, reference_state, sector_states, spatial_mask, Term};
use crate::integrals::{fock_matrix, MolecularSystem, OneBodyTensor, TwoBodyTensor};
use crate::rhd::amplitudes::AmplitudeSet;
use crate::rhd::engine::{bra_ops, ResidualSet};
use crate::tensor::Tensor4;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use nalgebra::linalg::Schur;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest number of spatial orbitals the dense oracle accepts.
pub const MAX_SPATIAL: usize = 5;

/// A set of occupation strings with a reverse index.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub n_spatial: usize,
    pub states: Vec<u64>,
    index: BTreeMap<u64, usize>,
}

impl Basis {
    fn from_states(n_spatial: usize, states: Vec<u64>) -> Result<Self> {
        if n_spatial > MAX_SPATIAL {
            return Err(Error::TooLarge { n: n_spatial, cap: MAX_SPATIAL });
        }
        let index = states.iter().enumerate().map(|(k, &s)| (s, k)).collect();
        Ok(Self { n_spatial, states, index })
    }

    /// Every string over `n_spatial` orbitals (dimension `4^n`).
    pub fn full(n_spatial: usize) -> Result<Self> {
        if n_spatial > MAX_SPATIAL {
            return Err(Error::TooLarge { n: n_spatial, cap: MAX_SPATIAL });
        }
        Self::from_states(n_spatial, (0..1u64 << (2 * n_spatial)).collect())
    }

    /// Strings with exactly `n_elec` electrons.
    pub fn sector(n_spatial: usize, n_elec: usize) -> Result<Self> {
        if n_spatial > MAX_SPATIAL {
            return Err(Error::TooLarge { n: n_spatial, cap: MAX_SPATIAL });
        }
        Self::from_states(n_spatial, sector_states(n_spatial, n_elec))
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn index(&self, s: u64) -> Option<usize> {
        self.index.get(&s).copied()
    }

    /// Basis vector of string `s` (zero if `s` is outside the basis).
    pub fn unit(&self, s: u64) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim());
        if let Some(k) = self.index(s) {
            v[k] = 1.0;
        }
        v
    }
}

/// A dense operator on a [`Basis`].
#[derive(Debug, Clone, PartialEq)]
pub struct FockSpaceOperator {
    pub basis: Basis,
    pub matrix: DMatrix<f64>,
}

impl FockSpaceOperator {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// `‖A − Aᵀ‖_F`.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).norm()
    }

    fn with(&self, matrix: DMatrix<f64>) -> Self {
        Self { basis: self.basis.clone(), matrix }
    }
}

/// Matrix of `Σ coef · ops` on `basis`. Terms that leave the basis are dropped.
pub fn operator_from_terms(basis: &Basis, terms: &[Term]) -> FockSpaceOperator {
    let d = basis.dim();
    let mut m = DMatrix::zeros(d, d);
    for (col, &s) in basis.states.iter().enumerate() {
        for t in terms {
            if let Some((sg, s2)) = apply(s, &t.ops) {
                if let Some(row) = basis.index(s2) {
                    m[(row, col)] += sg * t.coef;
                }
            }
        }
    }
    FockSpaceOperator { basis: basis.clone(), matrix: m }
}

/// Hamiltonian on the full Fock space.
pub fn build_hamiltonian(h1: &OneBodyTensor, h2: &TwoBodyTensor) -> Result<FockSpaceOperator> {
    Ok(operator_from_terms(&Basis::full(h1.n())?, &hamiltonian_terms(h1, h2)))
}

/// Hamiltonian on an arbitrary basis.
pub fn build_hamiltonian_on(basis: &Basis, h1: &OneBodyTensor, h2: &TwoBodyTensor) -> FockSpaceOperator {
    operator_from_terms(basis, &hamiltonian_terms(h1, h2))
}

/// Diagonal of `P = (1 − n_{N↑})(1 − n_{N↓})`.
pub fn p_diagonal(basis: &Basis, outer: usize) -> Vec<f64> {
    let m = spatial_mask([outer]);
    basis.states.iter().map(|&s| if s & m == 0 { 1.0 } else { 0.0 }).collect()
}

/// The projectors `P` and `Q = 1 − P`.
pub fn projectors(basis: &Basis, outer: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let p = DMatrix::from_diagonal(&DVector::from_vec(p_diagonal(basis, outer)));
    let q = DMatrix::identity(basis.dim(), basis.dim()) - &p;
    (p, q)
}

/// Generator `η` of the amplitude set, restricted to act on `P`.
pub fn build_eta(basis: &Basis, amps: &AmplitudeSet) -> FockSpaceOperator {
    let mut e = operator_from_terms(basis, &amps.eta_terms());
    for (col, p) in p_diagonal(basis, amps.layout.outer).into_iter().enumerate() {
        if p == 0.0 {
            e.matrix.column_mut(col).fill(0.0);
        }
    }
    e
}

/// `(S, S⁻¹) = (1 + η, 1 − η)`.
pub fn build_similarity(eta: &FockSpaceOperator) -> (FockSpaceOperator, FockSpaceOperator) {
    let id = DMatrix::identity(eta.dim(), eta.dim());
    (eta.with(&id + &eta.matrix), eta.with(&id - &eta.matrix))
}

/// `S⁻¹ H S`.
pub fn transformed(h: &FockSpaceOperator, eta: &FockSpaceOperator) -> DMatrix<f64> {
    let (s, si) = build_similarity(eta);
    &si.matrix * &h.matrix * &s.matrix
}

/// `Q S⁻¹ H S P` as a dense matrix.
pub fn bloch_operator(h: &FockSpaceOperator, eta: &FockSpaceOperator, outer: usize) -> DMatrix<f64> {
    let (p, q) = projectors(&h.basis, outer);
    q * transformed(h, eta) * p
}

/// `‖Q S⁻¹ H S P‖_F` over the operators' basis.
pub fn bloch_residual_norm(h: &FockSpaceOperator, eta: &FockSpaceOperator, outer: usize) -> f64 {
    bloch_operator(h, eta, outer).norm()
}

/// `‖Q S⁻¹ H S P |Φ⟩‖` for the reference string `phi`.
pub fn reference_bloch_norm(h: &FockSpaceOperator, eta: &FockSpaceOperator, outer: usize, phi: u64) -> f64 {
    (bloch_operator(h, eta, outer) * h.basis.unit(phi)).norm()
}

/// Oracle residuals: `⟨X| Q S⁻¹ H S P |Φ⟩` on the amplitude bras, with
/// every operator built densely on the `N_e` sector.
pub fn projected_residuals(h1: &OneBodyTensor, h2: &TwoBodyTensor, amps: &AmplitudeSet) -> Result<ResidualSet> {
    let l = &amps.layout;
    let basis = Basis::sector(l.n, 2 * l.n_occ())?;
    let h = build_hamiltonian_on(&basis, h1, h2);
    let eta = build_eta(&basis, amps);
    let phi = reference_state(&l.occ);
    let col = bloch_operator(&h, &eta, l.outer) * basis.unit(phi);
    let vals: Vec<f64> = bra_ops(amps)
        .iter()
        .map(|ops| match apply(phi, ops) {
            Some((sg, s)) => basis.index(s).map_or(0.0, |k| sg * col[k]),
            None => 0.0,
        })
        .collect();
    let mut r = AmplitudeSet::zeros(l.clone(), amps.mode);
    r.set_from_slice(&vals);
    Ok(r)
}

/// One matched eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenMatch {
    /// Eigenvalue of the `P` block (real part).
    pub effective: f64,
    /// Imaginary part of the `P`-block eigenvalue.
    pub imag: f64,
    /// Nearest unused eigenvalue of `H`.
    pub exact: f64,
    pub deviation: f64,
}

/// Outcome of a spectrum comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub bloch_norm: f64,
    pub tol: f64,
    pub pairs: Vec<EigenMatch>,
    /// Pairs whose deviation (or imaginary part) exceeds `tol`.
    pub mismatches: Vec<EigenMatch>,
}

impl SpectrumReport {
    pub fn is_subset(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn max_deviation(&self) -> f64 {
        self.pairs.iter().map(|p| p.deviation.max(p.imag.abs())).fold(0.0, f64::max)
    }
}

/// Iteration cap of each nonsymmetric eigenvalue attempt.
const SCHUR_MAX_ITER: usize = 20_000;

/// Real Schur form with a bounded iteration count, loosening the deflation
/// threshold once before giving up.
fn bounded_schur(block: DMatrix<f64>) -> Option<Schur<f64, nalgebra::Dyn>> {
    Schur::try_new(block.clone(), f64::EPSILON, SCHUR_MAX_ITER).or_else(|| Schur::try_new(block, 1e-13, SCHUR_MAX_ITER))
}

/// Compare the eigenvalues of the `P` block of `S⁻¹HS` with those of `H`,
/// greedily pairing each with the nearest unused eigenvalue of `H`.
/// Meaningful only when the Bloch residual vanishes.
pub fn spectrum_compare(h: &FockSpaceOperator, eta: &FockSpaceOperator, outer: usize, tol: f64) -> SpectrumReport {
    let pd = p_diagonal(&h.basis, outer);
    let keep: Vec<usize> = (0..pd.len()).filter(|&k| pd[k] == 1.0).collect();
    let full = transformed(h, eta);
    let block = DMatrix::from_fn(keep.len(), keep.len(), |a, b| full[(keep[a], keep[b])]);
    let exact = h.matrix.clone().symmetric_eigen().eigenvalues;
    let mut used = alloc::vec![false; exact.len()];
    let Some(schur) = bounded_schur(block) else {
        // No convergence: report one infinitely bad pair.
        let bad = EigenMatch { effective: f64::NAN, imag: 0.0, exact: f64::NAN, deviation: f64::INFINITY };
        return SpectrumReport { bloch_norm: bloch_residual_norm(h, eta, outer), tol, pairs: alloc::vec![bad], mismatches: alloc::vec![bad] };
    };
    let mut eff: Vec<(f64, f64)> = schur.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect();
    eff.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut pairs = Vec::with_capacity(eff.len());
    for (re, im) in eff {
        let mut best: Option<(usize, f64)> = None;
        for (k, &e) in exact.iter().enumerate() {
            let d = (e - re).abs();
            if !used[k] && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((k, d));
            }
        }
        if let Some((k, d)) = best {
            used[k] = true;
            pairs.push(EigenMatch { effective: re, imag: im, exact: exact[k], deviation: d });
        }
    }
    let mismatches = pairs.iter().copied().filter(|p| p.deviation > tol || p.imag.abs() > tol).collect();
    SpectrumReport { bloch_norm: bloch_residual_norm(h, eta, outer), tol, pairs, mismatches }
}

/// [`spectrum_compare`] that refuses when `‖Q S⁻¹HS P‖_F > bloch_threshold`.
pub fn spectrum_check(
    h: &FockSpaceOperator,
    eta: &FockSpaceOperator,
    outer: usize,
    tol: f64,
    bloch_threshold: f64,
) -> Result<SpectrumReport> {
    let b = bloch_residual_norm(h, eta, outer);
    if b > bloch_threshold {
        return Err(Error::NotDecoupled(b));
    }
    Ok(spectrum_compare(h, eta, outer, tol))
}

/// A random closed-shell test system with 8-fold symmetric, positive
/// semidefinite integrals and a clear occupied/virtual gap.
pub fn random_system(seed: u64, n: usize, n_elec: usize) -> (MolecularSystem, OneBodyTensor, TwoBodyTensor) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_occ = n_elec / 2;
    let mut h1 = DMatrix::from_fn(n, n, |_, _| 0.1 * rng.random_range(-1.0..1.0));
    h1 = (&h1 + h1.transpose()) * 0.5;
    for p in 0..n {
        let base = if p < n_occ { -2.0 + 0.4 * p as f64 } else { 0.5 + 0.4 * (p - n_occ) as f64 };
        h1[(p, p)] += base;
    }
    let n_aux = n + 1;
    let mut ls = Vec::with_capacity(n_aux);
    for _ in 0..n_aux {
        let mut l = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        l = (&l + l.transpose()) * 0.5;
        ls.push(l);
    }
    let eri = Tensor4::from_fn(n, |p, q, r, s| 0.1 * ls.iter().map(|l| l[(p, q)] * l[(r, s)]).sum::<f64>());
    let h1 = OneBodyTensor { h1 };
    let h2 = TwoBodyTensor::from_chemist(&eri);
    let occ: Vec<usize> = (0..n_occ).collect();
    let f = fock_matrix(&h1, &h2, &occ);
    let mo: Vec<f64> = (0..n).map(|p| f[(p, p)]).collect();
    let sys = MolecularSystem::new(n, n_elec, mo).expect("even electron count");
    (sys, h1, h2)
}
