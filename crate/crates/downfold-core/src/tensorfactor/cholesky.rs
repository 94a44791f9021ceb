//! Low-rank factorizations of the two-body tensor viewed as the matrix
//! `M[(a,d),(b,c)] = h2[a,b,c,d]`, so that `h2[a,b,c,d] = Σ_x L[x,a,d] R[x,b,c]`.

use crate::error::{Error, Result};
use crate::integrals::TwoBodyTensor;
use crate::tensor::{Tensor3, Tensor4};
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// Rank-3 factors `L[x,a,i]`. `right` is `None` for a symmetric
/// (Cholesky) factorization and holds the second factor for a cross one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CholeskyFactors {
    pub l: Tensor3,
    pub right: Option<Tensor3>,
}

impl CholeskyFactors {
    pub fn n_aux(&self) -> usize {
        self.l.dims[0]
    }

    pub fn n_orb(&self) -> usize {
        self.l.dims[1]
    }

    /// The factor paired with `l`.
    pub fn r(&self) -> &Tensor3 {
        self.right.as_ref().unwrap_or(&self.l)
    }

    /// Dense `h2[a,b,c,d] = Σ_x L[x,a,d] R[x,b,c]`.
    pub fn reconstruct(&self) -> TwoBodyTensor {
        reconstruct_pair(&self.l, self.r())
    }
}

/// `h2[a,b,c,d] = Σ_x L[x,a,d] R[x,b,c]` for arbitrary factors.
pub fn reconstruct_pair(l: &Tensor3, r: &Tensor3) -> TwoBodyTensor {
    let [naux, n, _] = l.dims;
    let mut h2 = Tensor4::zeros(n);
    for x in 0..naux {
        for a in 0..n {
            for d in 0..n {
                let lv = l[[x, a, d]];
                if lv == 0.0 {
                    continue;
                }
                for b in 0..n {
                    for c in 0..n {
                        h2[[a, b, c, d]] += lv * r[[x, b, c]];
                    }
                }
            }
        }
    }
    TwoBodyTensor { h2 }
}

fn pair_matrix(h2: &TwoBodyTensor) -> (usize, Vec<f64>) {
    let n = h2.n();
    let m = n * n;
    let mut a = vec![0.0; m * m];
    for p in 0..n {
        for d in 0..n {
            for b in 0..n {
                for c in 0..n {
                    a[(p * n + d) * m + b * n + c] = h2.h2[[p, b, c, d]];
                }
            }
        }
    }
    (m, a)
}

fn to_tensor(vectors: &[Vec<f64>], n: usize) -> Tensor3 {
    let mut t = Tensor3::zeros(vectors.len(), n, n);
    for (x, v) in vectors.iter().enumerate() {
        t.data[x * n * n..(x + 1) * n * n].copy_from_slice(v);
    }
    t
}

/// Diagonal-pivoted Cholesky. Stops once the trace of the residual falls
/// below `delta`, which bounds the Frobenius reconstruction error by `delta`.
pub fn pivoted_cholesky(h2: &TwoBodyTensor, delta: f64) -> Result<CholeskyFactors> {
    if !(delta > 0.0) {
        return Err(Error::Invalid("cholesky tolerance must be positive".into()));
    }
    let n = h2.n();
    let (m, a) = pair_matrix(h2);
    let mut diag: Vec<f64> = (0..m).map(|k| a[k * m + k]).collect();
    let mut vecs: Vec<Vec<f64>> = Vec::new();
    loop {
        if let Some(&neg) = diag.iter().find(|&&d| d < -10.0 * delta) {
            return Err(Error::NotPsd(neg));
        }
        let trace: f64 = diag.iter().map(|d| d.max(0.0)).sum();
        if trace < delta || vecs.len() == m {
            break;
        }
        let (p, &dp) = diag.iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)).unwrap();
        if dp <= 0.0 {
            break;
        }
        let s = libm::sqrt(dp);
        let mut v: Vec<f64> = (0..m).map(|k| a[k * m + p]).collect();
        for u in &vecs {
            let up = u[p];
            for (vk, uk) in v.iter_mut().zip(u) {
                *vk -= up * uk;
            }
        }
        v.iter_mut().for_each(|x| *x /= s);
        for (d, x) in diag.iter_mut().zip(&v) {
            *d -= x * x;
        }
        diag[p] = 0.0;
        vecs.push(v);
    }
    Ok(CholeskyFactors { l: to_tensor(&vecs, n), right: None })
}

/// Fully pivoted cross (adaptive cross approximation) for tensors that are
/// not symmetric positive semidefinite, such as renormalized integrals.
/// Stops when the largest residual entry is below `delta`.
pub fn cross_decomposition(h2: &TwoBodyTensor, delta: f64) -> CholeskyFactors {
    let n = h2.n();
    let (m, mut r) = pair_matrix(h2);
    let mut left = Vec::new();
    let mut right = Vec::new();
    while left.len() < m {
        let (k, &piv) = r.iter().enumerate().max_by(|x, y| x.1.abs().total_cmp(&y.1.abs())).unwrap();
        if piv.abs() < delta {
            break;
        }
        let (i, j) = (k / m, k % m);
        let s = libm::sqrt(piv.abs());
        let u: Vec<f64> = (0..m).map(|q| r[q * m + j] / s).collect();
        let v: Vec<f64> = (0..m).map(|q| r[i * m + q] * s / piv).collect();
        for q in 0..m {
            for w in 0..m {
                r[q * m + w] -= u[q] * v[w];
            }
        }
        left.push(u);
        right.push(v);
    }
    CholeskyFactors { l: to_tensor(&left, n), right: Some(to_tensor(&right, n)) }
}

/// Cholesky when the tensor admits it, cross decomposition otherwise.
pub fn factor_eri(h2: &TwoBodyTensor, delta: f64) -> Result<CholeskyFactors> {
    let n = h2.n();
    let mut asym: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    asym = asym.max((h2.h2[[a, b, c, d]] - h2.h2[[b, a, d, c]]).abs());
                }
            }
        }
    }
    if asym <= 1e-12 {
        match pivoted_cholesky(h2, delta) {
            Err(Error::NotPsd(_)) => {}
            other => return other,
        }
    }
    Ok(cross_decomposition(h2, delta))
}
