//! Dense row-major tensors of rank 3 and 4.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};
use serde::{Deserialize, Serialize};

/// Rank-3 tensor with arbitrary extents, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor3 {
    pub dims: [usize; 3],
    pub data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(d0: usize, d1: usize, d2: usize) -> Self {
        Self { dims: [d0, d1, d2], data: vec![0.0; d0 * d1 * d2] }
    }

    pub fn from_fn(d0: usize, d1: usize, d2: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(d0, d1, d2);
        for a in 0..d0 {
            for b in 0..d1 {
                for c in 0..d2 {
                    t[[a, b, c]] = f(a, b, c);
                }
            }
        }
        t
    }

    #[inline]
    fn offset(&self, [a, b, c]: [usize; 3]) -> usize {
        debug_assert!(a < self.dims[0] && b < self.dims[1] && c < self.dims[2]);
        (a * self.dims[1] + b) * self.dims[2] + c
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|x| x * x).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    /// Frobenius distance to another tensor of the same shape.
    pub fn distance(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dims, other.dims);
        libm::sqrt(self.data.iter().zip(&other.data).map(|(a, b)| (a - b) * (a - b)).sum())
    }
}

impl Index<[usize; 3]> for Tensor3 {
    type Output = f64;
    #[inline]
    fn index(&self, i: [usize; 3]) -> &f64 {
        &self.data[self.offset(i)]
    }
}

impl IndexMut<[usize; 3]> for Tensor3 {
    #[inline]
    fn index_mut(&mut self, i: [usize; 3]) -> &mut f64 {
        let o = self.offset(i);
        &mut self.data[o]
    }
}

/// Rank-4 tensor with equal extents `n`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor4 {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        t[[a, b, c, d]] = f(a, b, c, d);
                    }
                }
            }
        }
        t
    }

    #[inline]
    fn offset(&self, [a, b, c, d]: [usize; 4]) -> usize {
        let n = self.n;
        debug_assert!(a < n && b < n && c < n && d < n);
        ((a * n + b) * n + c) * n + d
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|x| x * x).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
    }

    pub fn distance(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.n, other.n);
        libm::sqrt(self.data.iter().zip(&other.data).map(|(a, b)| (a - b) * (a - b)).sum())
    }

    /// Restriction to the listed indices along every axis.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        Self::from_fn(keep.len(), |a, b, c, d| self[[keep[a], keep[b], keep[c], keep[d]]])
    }

    /// Axis permutation: `out[i0,i1,i2,i3] = self[i_{p0}, i_{p1}, i_{p2}, i_{p3}]`.
    pub fn permuted(&self, p: [usize; 4]) -> Self {
        Self::from_fn(self.n, |a, b, c, d| {
            let i = [a, b, c, d];
            self[[i[p[0]], i[p[1]], i[p[2]], i[p[3]]]]
        })
    }
}

impl Index<[usize; 4]> for Tensor4 {
    type Output = f64;
    #[inline]
    fn index(&self, i: [usize; 4]) -> &f64 {
        &self.data[self.offset(i)]
    }
}

impl IndexMut<[usize; 4]> for Tensor4 {
    #[inline]
    fn index_mut(&mut self, i: [usize; 4]) -> &mut f64 {
        let o = self.offset(i);
        &mut self.data[o]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_layout() {
        let t = Tensor3::from_fn(2, 3, 4, |a, b, c| (a * 100 + b * 10 + c) as f64);
        assert_eq!(t.data[1 * 12 + 2 * 4 + 3], 123.0);
        let u = Tensor4::from_fn(3, |a, b, c, d| (a * 1000 + b * 100 + c * 10 + d) as f64);
        assert_eq!(u[[2, 1, 0, 2]], 2102.0);
        assert_eq!(u.permuted([1, 0, 3, 2])[[2, 1, 0, 2]], 1220.0);
        assert_eq!(u.restrict(&[0, 2])[[1, 1, 0, 1]], 2202.0);
    }
}
