//! Canonical polyadic decomposition `A[i,j,k] ≈ Σ_r X[i,r] Y[j,r] Z[k,r]`
//! by alternating least squares.
//!
//! Each sweep updates Z, then X, then Y. An update solves the normal
//! equations with `P = (FᵀF) ∘ (GᵀG) + λI`, `λ = 1e-10·tr(P)/rank`. An update
//! that would raise the error is rejected, so the error history is monotone.
//! Two steps of iterative refinement against the unshifted `P` remove the
//! bias of the shift whenever `P` is well conditioned.

use crate::error::{Error, Result};
use crate::tensor::Tensor3;
use alloc::vec::Vec;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// ALS controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpConfig {
    pub rank: usize,
    pub max_sweeps: usize,
    /// Stop once the squared error falls to this value.
    pub tol: f64,
    /// Stop once the relative change of the squared error falls below this.
    pub rel_change: f64,
    pub seed: u64,
}

impl CpConfig {
    pub fn new(rank: usize) -> Self {
        Self { rank, max_sweeps: 500, tol: 0.0, rel_change: 1e-8, seed: 7 }
    }
}

/// Three factor matrices and the squared error after every sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CpFactors {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub z: DMatrix<f64>,
    /// `E = Σ|A − Â|²` after each sweep; empty for the zero tensor.
    pub history: Vec<f64>,
}

impl CpFactors {
    pub fn rank(&self) -> usize {
        self.x.ncols()
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.x.nrows(), self.y.nrows(), self.z.nrows()]
    }

    /// Final squared error, zero when no sweep ran.
    pub fn squared_error(&self) -> f64 {
        self.history.last().copied().unwrap_or(0.0)
    }
}

/// `Σ_r X[i,r] Y[j,r] Z[k,r]`.
pub fn cp_reconstruct(f: &CpFactors) -> Tensor3 {
    let [ni, nj, nk] = f.dims();
    let mut t = Tensor3::zeros(ni, nj, nk);
    for r in 0..f.rank() {
        for i in 0..ni {
            let xi = f.x[(i, r)];
            if xi == 0.0 {
                continue;
            }
            for j in 0..nj {
                let xy = xi * f.y[(j, r)];
                for k in 0..nk {
                    t[[i, j, k]] += xy * f.z[(k, r)];
                }
            }
        }
    }
    t
}

/// Frobenius distance between the factorization and a reference tensor.
pub fn cp_error(f: &CpFactors, reference: &Tensor3) -> Result<f64> {
    if f.dims() != reference.dims {
        return Err(Error::Shape(alloc::format!("factors {:?} vs tensor {:?}", f.dims(), reference.dims)));
    }
    Ok(cp_reconstruct(f).distance(reference))
}

/// Exact CP of rank `d1·d2`: `X` is the mode-0 unfolding, `Y` and `Z` select
/// the column index pair.
pub fn cp_exact(a: &Tensor3) -> CpFactors {
    let [ni, nj, nk] = a.dims;
    let rank = nj * nk;
    let x = DMatrix::from_fn(ni, rank, |i, r| a[[i, r / nk, r % nk]]);
    let y = DMatrix::from_fn(nj, rank, |j, r| if r / nk == j { 1.0 } else { 0.0 });
    let z = DMatrix::from_fn(nk, rank, |k, r| if r % nk == k { 1.0 } else { 0.0 });
    CpFactors { x, y, z, history: alloc::vec![0.0] }
}

fn sq_error(a: &Tensor3, x: &DMatrix<f64>, y: &DMatrix<f64>, z: &DMatrix<f64>) -> f64 {
    let f = CpFactors { x: x.clone(), y: y.clone(), z: z.clone(), history: Vec::new() };
    let d = cp_reconstruct(&f).distance(a);
    d * d
}

/// Which tensor mode a factor belongs to.
#[derive(Clone, Copy)]
enum Mode {
    I,
    J,
    K,
}

/// Least-squares update of the factor for `mode`, holding the other two.
fn solve_mode(a: &Tensor3, mode: Mode, f: &DMatrix<f64>, g: &DMatrix<f64>) -> DMatrix<f64> {
    let [ni, nj, nk] = a.dims;
    let rank = f.ncols();
    let n = match mode {
        Mode::I => ni,
        Mode::J => nj,
        Mode::K => nk,
    };
    // Contract A with the other two factors (matricized tensor times Khatri-Rao).
    let mut c = DMatrix::<f64>::zeros(n, rank);
    for i in 0..ni {
        for j in 0..nj {
            for k in 0..nk {
                let v = a[[i, j, k]];
                if v == 0.0 {
                    continue;
                }
                let (row, p, q) = match mode {
                    Mode::I => (i, j, k),
                    Mode::J => (j, i, k),
                    Mode::K => (k, i, j),
                };
                for r in 0..rank {
                    c[(row, r)] += v * f[(p, r)] * g[(q, r)];
                }
            }
        }
    }
    let p0 = (f.transpose() * f).component_mul(&(g.transpose() * g));
    let lambda = 1e-10 * p0.trace() / rank as f64;
    let mut p = p0.clone();
    for r in 0..rank {
        p[(r, r)] += lambda.max(f64::MIN_POSITIVE);
    }
    match p.clone().cholesky() {
        Some(ch) => {
            // Iterative refinement strips the bias of λ where P itself is well conditioned.
            let rhs = c.transpose();
            let mut sol = ch.solve(&rhs);
            for _ in 0..2 {
                let res = &rhs - &p0 * &sol;
                sol += ch.solve(&res);
            }
            sol.transpose()
        }
        None => {
            let pinv = p.pseudo_inverse(1e-14).unwrap_or_else(|_| DMatrix::zeros(rank, rank));
            c * pinv
        }
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// CP-ALS of a rank-3 tensor.
pub fn cp_als(a: &Tensor3, cfg: &CpConfig) -> Result<CpFactors> {
    if cfg.rank == 0 {
        return Err(Error::Invalid("CP rank must be at least 1".into()));
    }
    let [ni, nj, nk] = a.dims;
    if a.max_abs() == 0.0 {
        return Ok(CpFactors {
            x: DMatrix::zeros(ni, cfg.rank),
            y: DMatrix::zeros(nj, cfg.rank),
            z: DMatrix::zeros(nk, cfg.rank),
            history: Vec::new(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x = random_matrix(&mut rng, ni, cfg.rank);
    let mut y = random_matrix(&mut rng, nj, cfg.rank);
    let mut z = random_matrix(&mut rng, nk, cfg.rank);
    let mut err = sq_error(a, &x, &y, &z);
    let mut history = Vec::new();
    for _ in 0..cfg.max_sweeps.max(1) {
        let before = err;
        let cand = solve_mode(a, Mode::K, &x, &y);
        let e = sq_error(a, &x, &y, &cand);
        if e <= err {
            z = cand;
            err = e;
        }
        let cand = solve_mode(a, Mode::I, &y, &z);
        let e = sq_error(a, &cand, &y, &z);
        if e <= err {
            x = cand;
            err = e;
        }
        let cand = solve_mode(a, Mode::J, &x, &z);
        let e = sq_error(a, &x, &cand, &z);
        if e <= err {
            y = cand;
            err = e;
        }
        history.push(err);
        if err <= cfg.tol || (before - err).abs() <= cfg.rel_change * before.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(CpFactors { x, y, z, history })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_tensor(seed: u64, d: [usize; 3]) -> Tensor3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Tensor3::from_fn(d[0], d[1], d[2], |_, _, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn rank_one_recovery() {
        let (u, v, w) = ([1.0, -2.0, 0.5], [0.3, 1.2], [2.0, -1.0, 0.7, 0.1]);
        let a = Tensor3::from_fn(3, 2, 4, |i, j, k| u[i] * v[j] * w[k]);
        let f = cp_als(&a, &CpConfig::new(1)).unwrap();
        assert!(cp_error(&f, &a).unwrap() < 1e-10);
    }

    #[test]
    fn zero_tensor_has_zero_error() {
        let a = Tensor3::zeros(3, 3, 3);
        for rank in [1, 4] {
            let f = cp_als(&a, &CpConfig::new(rank)).unwrap();
            assert_eq!(cp_error(&f, &a).unwrap(), 0.0);
        }
    }

    #[test]
    fn zero_factors_error_is_norm() {
        let a = random_tensor(1, [2, 3, 2]);
        let f = CpFactors { x: DMatrix::zeros(2, 2), y: DMatrix::zeros(3, 2), z: DMatrix::zeros(2, 2), history: Vec::new() };
        assert!((cp_error(&f, &a).unwrap() - a.norm()).abs() < 1e-15);
    }

    #[test]
    fn full_rank_beats_half_rank() {
        let a = random_tensor(2, [8, 6, 6]);
        let full = cp_als(&a, &CpConfig::new(36)).unwrap();
        let half = cp_als(&a, &CpConfig::new(18)).unwrap();
        let (ef, eh) = (cp_error(&full, &a).unwrap(), cp_error(&half, &a).unwrap());
        assert!(ef < 1e-6, "{ef}");
        assert!(ef <= eh);
    }

    #[test]
    fn monotone_history() {
        let a = random_tensor(3, [5, 4, 4]);
        let f = cp_als(&a, &CpConfig { max_sweeps: 60, ..CpConfig::new(6) }).unwrap();
        assert!(f.history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn exact_factors_reconstruct() {
        let a = random_tensor(5, [4, 3, 2]);
        assert!(cp_reconstruct(&cp_exact(&a)).distance(&a) < 1e-14);
    }

    #[test]
    fn shape_mismatch() {
        let f = cp_als(&random_tensor(4, [2, 2, 2]), &CpConfig::new(1)).unwrap();
        assert!(cp_error(&f, &Tensor3::zeros(2, 2, 3)).is_err());
    }
}
