//! Factorized representations: pivoted Cholesky of the integrals, CP-ALS of
//! the Cholesky factors, and CP of the doubles amplitudes.

mod cholesky;
mod cp;

pub use cholesky::{cross_decomposition, factor_eri, pivoted_cholesky, reconstruct_pair, CholeskyFactors};
pub use cp::{cp_als, cp_error, cp_exact, cp_reconstruct, CpConfig, CpFactors};

use crate::error::{Error, Result};
use crate::integrals::TwoBodyTensor;
use crate::tensor::Tensor3;

/// Default Cholesky termination threshold.
pub const DEFAULT_CHOLESKY_DELTA: f64 = 1e-6;

/// Default CP rank of the Cholesky factors, `N_htf = 2·N_aux`.
pub fn default_htf_rank(n_aux: usize) -> usize {
    2 * n_aux
}

/// Default CP rank of the doubles amplitudes, `N_ttf = max(N_v, 2·N_o)`.
pub fn default_ttf_rank(n_v: usize, n_o: usize) -> usize {
    n_v.max(2 * n_o)
}

/// The expected rank ordering `N_htf > N_aux > N_ttf > N_v > N_o`.
pub fn check_rank_ordering(n_o: usize, n_v: usize, n_aux: usize, n_htf: usize, n_ttf: usize) -> Result<()> {
    if n_htf > n_aux && n_aux > n_ttf && n_ttf > n_v && n_v > n_o {
        Ok(())
    } else {
        Err(Error::Invalid(alloc::format!(
            "rank ordering violated: N_htf={n_htf} N_aux={n_aux} N_ttf={n_ttf} N_v={n_v} N_o={n_o}"
        )))
    }
}

/// Doubles amplitudes `t2[a,i,j] ≈ Σ_r T[a,r] U[i,r] V[j,r]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeFactors(pub CpFactors);

impl AmplitudeFactors {
    pub fn t(&self) -> &nalgebra::DMatrix<f64> {
        &self.0.x
    }
    pub fn u(&self) -> &nalgebra::DMatrix<f64> {
        &self.0.y
    }
    pub fn v(&self) -> &nalgebra::DMatrix<f64> {
        &self.0.z
    }
    pub fn reconstruct(&self) -> Tensor3 {
        cp_reconstruct(&self.0)
    }
}

/// CP of a doubles tensor shaped `(N_v, N_o, N_o)` with the shared ALS kernel.
pub fn factorize_t2(t2: &Tensor3, cfg: &CpConfig) -> Result<AmplitudeFactors> {
    if t2.dims[1] != t2.dims[2] {
        return Err(Error::Shape("doubles tensor must be (N_v, N_o, N_o)".into()));
    }
    cp_als(t2, cfg).map(AmplitudeFactors)
}

/// Cholesky (or cross) factors with a CP decomposition of each factor tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizedEri {
    pub cholesky: CholeskyFactors,
    pub left: CpFactors,
    /// `None` when the factorization is symmetric.
    pub right: Option<CpFactors>,
}

impl FactorizedEri {
    /// Integrals rebuilt from the CP factors.
    pub fn reconstruct(&self) -> TwoBodyTensor {
        let l = cp_reconstruct(&self.left);
        match &self.right {
            Some(r) => reconstruct_pair(&l, &cp_reconstruct(r)),
            None => reconstruct_pair(&l, &l),
        }
    }

    pub fn n_aux(&self) -> usize {
        self.cholesky.n_aux()
    }

    pub fn n_htf(&self) -> usize {
        self.left.rank()
    }
}

/// Factor the integrals and compress the factor tensors at `rank` (default `2·N_aux`).
pub fn factorize_eri(h2: &TwoBodyTensor, delta: f64, rank: Option<usize>, seed: u64) -> Result<FactorizedEri> {
    let cholesky = factor_eri(h2, delta)?;
    let rank = rank.unwrap_or_else(|| default_htf_rank(cholesky.n_aux())).max(1);
    let cfg = CpConfig { seed, ..CpConfig::new(rank) };
    let left = cp_als(&cholesky.l, &cfg)?;
    let right = match &cholesky.right {
        Some(r) => Some(cp_als(r, &cfg)?),
        None => None,
    };
    Ok(FactorizedEri { cholesky, left, right })
}

/// Factor the integrals and represent the factor tensors by their exact CP
/// (`N_htf = N_orb²`), so the only approximation left is the Cholesky cut.
pub fn factorize_eri_exact(h2: &TwoBodyTensor, delta: f64) -> Result<FactorizedEri> {
    let cholesky = factor_eri(h2, delta)?;
    let left = cp_exact(&cholesky.l);
    let right = cholesky.right.as_ref().map(cp_exact);
    Ok(FactorizedEri { cholesky, left, right })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        assert_eq!(default_htf_rank(10), 20);
        assert_eq!(default_ttf_rank(3, 5), 10);
        assert!(check_rank_ordering(2, 4, 12, 24, 6).is_ok());
        assert!(check_rank_ordering(5, 2, 12, 24, 10).is_err());
    }

    #[test]
    fn zero_amplitudes() {
        let f = factorize_t2(&Tensor3::zeros(2, 3, 3), &CpConfig::new(2)).unwrap();
        assert_eq!(f.reconstruct(), Tensor3::zeros(2, 3, 3));
        assert!(factorize_t2(&Tensor3::zeros(2, 3, 2), &CpConfig::new(1)).is_err());
    }

    #[test]
    fn separable_amplitudes() {
        let t2 = Tensor3::from_fn(2, 3, 3, |a, i, j| (a as f64 + 1.0) * (i as f64 - 1.0) * (0.5 + j as f64));
        let f = factorize_t2(&t2, &CpConfig::new(1)).unwrap();
        assert!(f.reconstruct().distance(&t2) < 1e-10);
    }
}
