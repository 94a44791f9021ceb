//! Closed-form residual term lists (singles `T1..T11`, doubles `T1..T13`),
//! transcribed as written.
//!
//! Index ranges: `k, l` run over occupied orbitals; an unrestricted `c` or `d`
//! runs over the virtuals including `N`; `c ≠ N` or `d ≠ N` excludes it. The
//! block `t²_{cNkl}` is `t3[k,l]` for `c = N` and the spin image
//! `t2[c,l,k]` otherwise; `t²_{Ndkl}` is `t2[d,k,l]` (`t3[k,l]` for `d = N`).
//! `w[i,j,a,b] = 2h[i,j,a,b] − h[i,j,b,a]` and `𝒫{X}_{abij} = X_{abij} + X_{baji}`.
//! A dummy index that appears in a summand but not under its sum sign is
//! summed too.
//!
//! The exact projection in [`super::engine`] is authoritative. These lists are
//! kept so their deviations from it can be measured.

use super::amplitudes::AmplitudeSet;
use super::engine::ResidualSet;
use crate::integrals::TwoBodyTensor;
use crate::tensor::{Tensor3, Tensor4};
use alloc::vec::Vec;
use nalgebra::DMatrix;

struct Ctx<'a> {
    h: &'a Tensor4,
    f: &'a DMatrix<f64>,
    t1: Vec<f64>,
    /// `t²_{Nbij}` on the full orbital range.
    tnb: Tensor3,
    /// `t²_{aNij}` on the full orbital range.
    tan: Tensor3,
    t3: DMatrix<f64>,
    occ: Vec<usize>,
    virt: Vec<usize>,
    /// Virtuals including `N`.
    vn: Vec<usize>,
    nn: usize,
}

fn sum(ix: &[usize], f: impl FnMut(usize) -> f64) -> f64 {
    ix.iter().copied().map(f).sum()
}

impl<'a> Ctx<'a> {
    fn new(h2: &'a TwoBodyTensor, f: &'a DMatrix<f64>, amps: &AmplitudeSet) -> Self {
        let l = &amps.layout;
        let n = l.n;
        let mut tan = Tensor3::zeros(n, n, n);
        for (ai, &a) in l.virt.iter().enumerate() {
            for (ii, &i) in l.occ.iter().enumerate() {
                for (ji, &j) in l.occ.iter().enumerate() {
                    tan[[a, i, j]] = amps.t2_an(ai, ii, ji);
                }
            }
        }
        let mut tnb = Tensor3::zeros(n, n, n);
        for (bi, &b) in l.virt.iter().enumerate() {
            for (ii, &i) in l.occ.iter().enumerate() {
                for (ji, &j) in l.occ.iter().enumerate() {
                    tnb[[b, i, j]] = amps.t2m[[bi, ii, ji]];
                }
            }
        }
        let mut vn = l.virt.clone();
        vn.push(l.outer);
        Self {
            h: &h2.h2,
            f,
            t1: amps.t1_full(),
            tnb,
            tan,
            t3: amps.t2p_full(),
            occ: l.occ.clone(),
            virt: l.virt.clone(),
            vn,
            nn: l.outer,
        }
    }

    fn h(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.h[[a, b, c, d]]
    }
    fn w(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        2.0 * self.h[[a, b, c, d]] - self.h[[a, b, d, c]]
    }
    fn f(&self, a: usize, b: usize) -> f64 {
        self.f[(a, b)]
    }
    fn t1(&self, k: usize) -> f64 {
        self.t1[k]
    }
    fn t3(&self, k: usize, l: usize) -> f64 {
        self.t3[(k, l)]
    }
    /// `t²_{cNkl}`.
    fn tcn(&self, c: usize, k: usize, l: usize) -> f64 {
        if c == self.nn {
            self.t3(k, l)
        } else {
            self.tan[[c, k, l]]
        }
    }
    /// `t²_{Ndkl}`.
    fn tnd(&self, d: usize, k: usize, l: usize) -> f64 {
        if d == self.nn {
            self.t3(k, l)
        } else {
            self.tnb[[d, k, l]]
        }
    }

    fn r1(&self, i: usize) -> f64 {
        let (o, v, vn, n) = (&self.occ, &self.virt, &self.vn, self.nn);
        let ti = self.t1(i);
        let t1 = self.f(n, i);
        let t2 = -2.0 * sum(o, |k| self.f(k, n) * self.t1(k) * ti);
        let t3 = self.f(n, n) * ti
            - sum(o, |k| sum(o, |l| self.w(k, l, n, n) * self.tnd(n, k, l) * ti))
            - sum(o, |k| sum(o, |l| sum(v, |d| self.w(k, l, n, d) * self.tnd(d, k, l) * ti)));
        let t4 = -sum(o, |k| self.f(k, i) * self.t1(k))
            - sum(o, |k| sum(o, |l| sum(vn, |c| self.w(k, l, c, n) * self.tcn(c, i, l) * self.t1(k))))
            - sum(o, |k| sum(o, |l| sum(v, |d| self.w(k, l, n, d) * self.tnd(d, i, l) * self.t1(k))));
        let t5 = 2.0 * sum(o, |k| sum(vn, |c| self.f(k, c) * self.tcn(c, k, i)))
            + 2.0 * sum(o, |k| sum(o, |l| sum(vn, |c| self.w(k, l, c, n) * self.t1(l) * self.tcn(c, k, i))))
            - sum(o, |k| sum(vn, |c| self.f(k, c) * self.tcn(c, i, k)))
            - sum(o, |k| sum(o, |l| sum(vn, |c| self.w(k, l, c, n) * self.t1(l) * self.tcn(c, i, k))));
        let t6 = sum(o, |k| self.f(k, n) * ti * self.t1(k));
        let t7 = sum(o, |k| self.w(n, k, i, n) * self.t1(k));
        let t8 = sum(o, |k| sum(vn, |c| self.w(n, k, c, n) * self.tcn(c, i, k)))
            + sum(o, |k| sum(v, |d| self.w(n, k, n, d) * self.tnd(d, i, k)));
        let t9 = sum(o, |k| self.w(n, k, n, n) * ti * self.t1(k));
        let t10 = -sum(o, |k| sum(o, |l| self.w(k, l, i, n) * self.t3(k, l)))
            - sum(o, |k| sum(o, |l| sum(v, |c| self.w(k, l, i, c) * self.tnd(c, k, l))));
        let t11 = -sum(o, |k| sum(o, |l| self.w(k, l, i, n) * self.t1(k) * self.t1(l)));
        t1 + t2 + t3 + t4 + t5 + t6 + t7 + t8 + t9 + t10 + t11
    }

    /// Terms `T1..T5` of the doubles residual.
    fn r2_plain(&self, a: usize, b: usize, i: usize, j: usize) -> f64 {
        let (o, v, vn, n) = (&self.occ, &self.virt, &self.vn, self.nn);
        let (ti, tj) = (self.t1(i), self.t1(j));
        let t1 = self.h(i, j, a, n) + self.h(i, j, n, b);
        let t2 = sum(o, |k| {
            sum(o, |l| {
                let amp = self.tcn(a, k, l) + self.tnd(b, k, l);
                amp * (self.h(k, l, i, j)
                    + self.h(k, l, i, n) * tj
                    + self.h(k, l, n, j) * ti
                    + sum(vn, |c| self.h(k, l, c, n) * self.tcn(c, i, j))
                    + sum(v, |c| self.h(k, l, n, c) * self.tnd(c, i, j)))
            })
        });
        let t3 = sum(o, |k| sum(o, |l| self.h(k, l, i, j) * self.t1(k) * self.t1(l)));
        let t4 = sum(vn, |c| (self.h(a, n, c, n) + self.h(n, b, c, n)) * self.tcn(c, i, j))
            + sum(v, |d| (self.h(a, n, n, d) + self.h(n, b, n, d)) * self.tnd(d, i, j))
            - sum(o, |k| sum(vn, |c| (self.h(a, k, c, n) + self.h(k, b, c, n)) * self.t1(k) * self.tcn(c, i, j)))
            - sum(o, |k| sum(v, |d| (self.h(a, k, n, d) + self.h(k, b, n, d)) * self.t1(k) * self.tnd(d, i, j)));
        let t5 = (self.h(a, n, n, n) + self.h(n, b, n, n)) * ti * tj;
        t1 + t2 + t3 + t4 + t5
    }

    /// The bracket of `T6..T13`, to be symmetrized by `𝒫`.
    fn r2_sym(&self, a: usize, b: usize, i: usize, j: usize) -> f64 {
        let (o, v, vn, n) = (&self.occ, &self.virt, &self.vn, self.nn);
        let (ti, tj) = (self.t1(i), self.t1(j));
        let tnb = self.tnd(b, i, j);
        let t3ij = self.t3(i, j);

        let t6 = sum(vn, |c| self.f(a, c) * self.tcn(c, i, j)) + self.f(n, n) * tnb
            - sum(o, |k| sum(o, |l| sum(vn, |c| self.w(k, l, c, n) * self.tcn(a, k, l) * self.tcn(c, i, j))))
            - sum(o, |k| sum(o, |l| self.w(k, l, n, n) * self.t3(k, l) * tnb))
            - sum(o, |k| sum(o, |l| sum(v, |d| self.w(k, l, n, d) * self.tnd(d, k, l) * t3ij)))
            - sum(o, |k| sum(o, |l| sum(v, |d| self.w(k, l, n, d) * self.tnd(d, k, l) * tnb)))
            - sum(o, |k| self.f(k, n) * self.t1(k) * t3ij)
            - sum(o, |k| self.f(k, n) * self.t1(k) * tnb)
            + sum(o, |k| sum(vn, |c| self.w(a, k, c, n) * self.t1(k) * self.tcn(c, i, j)))
            + sum(o, |k| self.w(n, k, n, n) * self.t1(k) * tnb);

        let t7 = -sum(o, |k| {
            let amp = self.tcn(a, k, j) + self.tnd(b, k, j);
            amp * (self.f(k, i)
                + sum(o, |l| sum(vn, |c| self.w(k, l, c, n) * self.tcn(c, i, l)))
                + sum(o, |l| sum(v, |d| self.w(k, l, n, d) * self.tnd(d, i, l)))
                + self.f(k, n) * ti
                + sum(o, |l| self.w(k, l, i, n) * self.t1(l)))
        });

        let t8 = (self.h(a, n, i, n) + self.h(n, b, i, n)) * tj - sum(o, |k| self.h(k, b, i, n) * self.t1(k) * tj);
        let t9 = -sum(o, |k| self.h(a, k, i, j) * self.t1(k)) - sum(o, |k| self.h(a, k, i, n) * tj * self.t1(k));

        let t10 = 2.0 * sum(o, |k| sum(vn, |c| self.h(a, k, i, c) * self.tcn(c, k, j)))
            + 2.0 * sum(o, |k| self.h(n, k, i, n) * self.tnd(b, k, j))
            - 2.0 * sum(o, |k| sum(o, |l| self.h(l, k, i, n) * self.t1(l) * self.t3(k, j)))
            - 2.0 * sum(o, |k| sum(o, |l| self.h(l, k, i, n) * self.t1(l) * self.tnd(b, k, j)))
            + 2.0 * sum(o, |k| sum(vn, |c| self.h(a, k, n, c) * ti * self.tcn(c, k, j)))
            + 2.0 * sum(o, |k| self.h(n, k, n, n) * ti * self.tnd(b, k, j))
            - sum(o, |k| sum(o, |l| sum(vn, |c| self.h(l, k, n, c) * self.t3(i, l) * self.tcn(c, k, j))))
            - sum(o, |k| sum(o, |l| sum(v, |d| self.h(l, k, d, n) * self.tcn(d, i, l) * self.t3(k, j))))
            - sum(o, |k| sum(o, |l| sum(vn, |d| self.h(l, k, d, n) * self.tcn(d, i, l) * self.tnd(b, k, j))))
            - sum(o, |k| sum(o, |l| sum(vn, |c| self.h(l, k, n, c) * self.tnd(a, i, l) * self.tcn(c, k, j))))
            - sum(o, |k| sum(o, |l| self.h(l, k, n, n) * self.tnd(a, i, l) * self.tnd(b, k, j)))
            + sum(o, |k| sum(o, |l| sum(vn, |c| self.w(l, k, n, c) * self.tcn(a, i, l) * self.tcn(c, k, j))))
            + sum(o, |k| sum(o, |l| self.w(l, k, n, n) * self.t3(i, l) * self.tnd(b, k, j)))
            + sum(o, |k| sum(o, |l| sum(v, |d| self.w(l, k, d, n) * self.tnd(d, i, l) * self.t3(k, j))))
            + sum(o, |k| sum(o, |l| sum(v, |d| self.w(l, k, d, n) * self.tnd(d, i, l) * self.tnd(b, k, j))));

        let t11 = -sum(o, |k| self.h(a, k, i, n) * self.t3(k, j))
            - sum(o, |k| self.h(n, k, i, n) * self.tcn(b, k, j))
            - sum(o, |k| sum(v, |c| self.h(a, k, i, c) * self.tnd(c, k, j)))
            + sum(o, |k| sum(o, |l| self.h(l, k, i, n) * self.t1(l) * self.tcn(b, k, j)))
            + sum(o, |k| sum(o, |l| self.h(l, k, i, n) * self.t1(l) * self.t3(k, j)))
            - sum(o, |k| self.h(a, k, n, n) * ti * self.t3(k, j))
            - sum(o, |k| self.h(n, k, n, n) * ti * self.tcn(b, k, j))
            - sum(o, |k| sum(v, |c| self.h(a, k, n, c) * ti * self.tnd(c, k, j)))
            + 0.5 * sum(o, |k| sum(o, |l| sum(vn, |d| self.h(l, k, d, n) * self.tcn(d, i, l) * self.tcn(b, k, j))))
            + 0.5 * sum(o, |k| sum(o, |l| sum(vn, |d| self.h(l, k, d, n) * self.tcn(d, i, l) * self.t3(k, j))))
            + 0.5 * sum(o, |k| sum(o, |l| sum(v, |c| self.h(l, k, n, c) * self.t3(i, l) * self.tnd(c, k, j))))
            + 0.5 * sum(o, |k| sum(o, |l| self.h(l, k, n, n) * self.tnd(a, i, l) * self.t3(k, j)))
            + 0.5 * sum(o, |k| sum(o, |l| sum(v, |c| self.h(l, k, n, c) * self.tnd(a, i, l) * self.tnd(c, k, j))))
            - 0.5 * sum(o, |k| sum(o, |l| self.w(l, k, n, n) * self.tcn(a, i, l) * self.t3(k, j)))
            - 0.5 * sum(o, |k| sum(o, |l| self.w(l, k, n, n) * self.t3(i, l) * self.tcn(b, k, j)))
            - 0.5 * sum(o, |k| sum(o, |l| sum(v, |c| self.w(l, k, n, c) * self.tcn(a, i, l) * self.tnd(c, k, j))))
            - 0.5 * sum(o, |k| sum(o, |l| sum(v, |d| self.w(l, k, d, n) * self.tnd(d, i, l) * self.tcn(b, k, j))))
            - 0.5 * sum(o, |k| sum(o, |l| sum(v, |d| self.w(l, k, d, n) * self.tnd(d, i, l) * self.t3(k, j))));

        let t12 = -sum(o, |k| self.h(n, k, n, i) * self.tcn(a, k, j))
            - sum(o, |k| self.h(b, k, n, i) * self.t3(k, j))
            - sum(o, |k| sum(v, |c| self.h(b, k, c, i) * self.tnd(c, k, j)))
            + sum(o, |k| sum(o, |l| self.h(l, k, n, i) * self.t1(l) * self.tcn(a, k, j)))
            - sum(o, |k| self.h(n, k, n, n) * ti * self.tcn(a, k, j))
            - sum(o, |k| self.h(b, k, n, n) * ti * self.t3(k, j))
            - sum(o, |k| sum(v, |c| self.h(b, k, c, n) * ti * self.tnd(c, k, j)))
            + 0.5 * sum(o, |k| sum(o, |l| sum(vn, |d| self.h(l, k, n, d) * self.tcn(d, i, l) * self.tcn(a, k, j))))
            + 0.5 * sum(o, |k| sum(o, |l| sum(v, |c| self.h(l, k, c, n) * self.t3(i, l) * self.tnd(c, k, j))))
            + 0.5 * sum(o, |k| sum(o, |l| self.h(l, k, n, n) * self.tnd(b, i, l) * self.t3(k, j)))
            + 0.5 * sum(o, |k| sum(o, |l| sum(v, |c| self.h(l, k, c, n) * self.tnd(b, i, l) * self.tnd(c, k, j))));

        let t13 = -sum(o, |k| sum(vn, |c| self.h(a, k, c, i) * self.tcn(c, k, j)))
            - sum(o, |k| self.h(n, k, n, i) * self.tnd(b, k, j))
            + sum(o, |k| sum(o, |l| self.h(l, k, n, i) * self.t1(l) * self.t3(k, j)))
            + sum(o, |k| sum(o, |l| self.h(l, k, n, i) * self.t1(l) * self.tnd(b, k, j)))
            - sum(o, |k| sum(vn, |c| self.h(a, k, c, n) * ti * self.tcn(c, k, j)))
            - sum(o, |k| self.h(n, k, n, n) * ti * self.tnd(b, k, j))
            + 0.5 * sum(o, |k| sum(o, |l| sum(vn, |c| self.h(l, k, c, n) * self.t3(i, l) * self.tcn(c, k, j))))
            + 0.5 * sum(o, |k| sum(o, |l| sum(v, |d| self.h(l, k, n, d) * self.tcn(d, i, l) * self.t3(k, j))))
            + 0.5 * sum(o, |k| sum(o, |l| sum(vn, |d| self.h(l, k, n, d) * self.tcn(d, i, l) * self.tnd(b, k, j))))
            + 0.5 * sum(o, |k| sum(o, |l| sum(vn, |c| self.h(l, k, c, n) * self.tnd(a, i, l) * self.tcn(c, k, j))));

        t6 + t7 + t8 + t9 + t10 + t11 + t12 + t13
    }

    fn r2(&self, a: usize, b: usize, i: usize, j: usize) -> f64 {
        self.r2_plain(a, b, i, j) + self.r2_sym(a, b, i, j) + self.r2_sym(b, a, j, i)
    }
}

/// Singles residual `Σ T1..T11` for every occupied `i`.
pub fn printed_residual_t1(h2: &TwoBodyTensor, fock: &DMatrix<f64>, amps: &AmplitudeSet) -> Vec<f64> {
    let c = Ctx::new(h2, fock, amps);
    c.occ.iter().map(|&i| c.r1(i)).collect()
}

/// Doubles residuals `Σ T1..T13`: the mixed channel at `a = b` for every
/// virtual `b ≠ N`, and the paired channel at `a = b = N`.
pub fn printed_residual_t2(h2: &TwoBodyTensor, fock: &DMatrix<f64>, amps: &AmplitudeSet) -> (Tensor3, DMatrix<f64>) {
    let c = Ctx::new(h2, fock, amps);
    let (no, nv) = (c.occ.len(), c.virt.len());
    let r2 = Tensor3::from_fn(nv, no, no, |b, i, j| c.r2(c.virt[b], c.virt[b], c.occ[i], c.occ[j]));
    let r2p = DMatrix::from_fn(no, no, |i, j| c.r2(c.nn, c.nn, c.occ[i], c.occ[j]));
    (r2, r2p)
}

/// Both closed-form residuals in the amplitude layout.
pub fn printed_residual(h2: &TwoBodyTensor, fock: &DMatrix<f64>, amps: &AmplitudeSet) -> ResidualSet {
    let mut r = AmplitudeSet::zeros(amps.layout.clone(), amps.mode);
    r.t1 = printed_residual_t1(h2, fock, amps);
    let (r2, r2p) = printed_residual_t2(h2, fock, amps);
    r.t2m = r2;
    let no = amps.layout.n_occ();
    for i in 0..no {
        for j in 0..no {
            r.t2p[i * no + j] = r2p[(i, j)];
        }
    }
    r
}
