//! Residual terms evaluated directly on tensor factors.
//!
//! The integrals enter as `g(a,b,i,j) = Σ_x L[x,a,i] R[x,b,j]` with
//! `L[x,a,i] = Σ_p X[x,p] Y[a,p] Z[i,p]` (and `R` from its own CP, or `L`
//! again when symmetric). Doubles enter as `t2[a,i,j] = Σ_r T[a,r] U[i,r] V[j,r]`.
//! Orbital rows of `Y` and `Z` are ordered occupied, virtual, then the outer
//! orbital `N`, so they can be sliced directly.
//!
//! Each kernel follows one fixed pairwise contraction path and records the
//! multiplies of every step. The irreducible result is expanded to a dense
//! output only for comparison, and that expansion is not counted.

use super::amplitudes::{AmplitudeSet, BlockMode};
use super::engine::{projected_residual, ResidualSet};
use crate::error::{Error, Result};
use crate::fermion::hamiltonian_terms;
use crate::integrals::OneBodyTensor;
use crate::tensor::Tensor3;
use crate::tensorfactor::{cp_reconstruct, AmplitudeFactors, CpFactors, FactorizedEri};
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Extents entering the cost formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorDims {
    pub n_o: usize,
    pub n_v: usize,
    pub n_aux: usize,
    pub n_htf: usize,
    pub n_ttf: usize,
}

/// The eleven representative terms of the singles and doubles residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Expression {
    E1,
    E2,
    E3,
    E4,
    E5,
    E6,
    E7,
    E8,
    E9,
    E10,
    E11,
}

impl Expression {
    pub const ALL: [Expression; 11] = [
        Expression::E1,
        Expression::E2,
        Expression::E3,
        Expression::E4,
        Expression::E5,
        Expression::E6,
        Expression::E7,
        Expression::E8,
        Expression::E9,
        Expression::E10,
        Expression::E11,
    ];

    pub fn number(self) -> usize {
        self as usize + 1
    }

    /// The term it represents.
    pub fn term(self) -> &'static str {
        match self {
            Expression::E1 => "A1_i = f_Ni",
            Expression::E2 => "Σ_j A2_ji t1_j via g(j,N,N,i)",
            Expression::E3 => "Σ_jk A3_jki t1_j t1_k via g(j,k,i,N)",
            Expression::E4 => "Σ_kla A4_klia t2_akl via g(k,l,i,a)",
            Expression::E5 => "Σ_klc A5_klc t1_l t2_cik via g(k,l,c,N)",
            Expression::E6 => "g(a,N,i,j)",
            Expression::E7 => "Σ_kl B1_klij t2_akl via g(k,l,i,j)",
            Expression::E8 => "Σ_b B2_ab t2_bij via g(a,N,N,b)",
            Expression::E9 => "Σ_kb B3_akb t2_bij t1_k via g(a,k,b,N)",
            Expression::E10 => "B4_a t1_i t1_j via g(a,N,N,N)",
            Expression::E11 => "Σ_klc B5_klc t2_cil t2_akj via g(k,l,c,N)",
        }
    }

    /// Multiplies of the contraction path used by the kernel.
    pub fn path_cost(self, d: &FactorDims) -> u64 {
        let (o, v, x, h, t) = (d.n_o as u64, d.n_v as u64, d.n_aux as u64, d.n_htf as u64, d.n_ttf as u64);
        match self {
            Expression::E1 => 0,
            Expression::E2 => 2 * h * x + 3 * h * o + h,
            Expression::E3 => 2 * h * x + 4 * h * o + h,
            Expression::E4 => 2 * h * t * x + 2 * h * t * o + h * t * v + h * x + h * t + h * o,
            Expression::E5 => h * t * o + h * t * v + h * o + 2 * h * t + 2 * h * x + t * o + h,
            Expression::E6 => 2 * h * x * o + h * o,
            Expression::E7 => h * h * x + 2 * h * t * o,
            Expression::E8 => 2 * h * x * v + x * v * v + t * v * v + 2 * h * v,
            Expression::E9 => 2 * h * t * v + 2 * h * x + h * v + h * o + h,
            Expression::E10 => 2 * h * v + 2 * h * x + h,
            Expression::E11 => 2 * h * t * x + h * t * v + 4 * h * t * o + h * t + h * o,
        }
    }

    /// The closed-form operation count quoted for the path.
    pub fn printed_cost(self, d: &FactorDims) -> f64 {
        let (o, v, x, h, t) = (d.n_o as f64, d.n_v as f64, d.n_aux as f64, d.n_htf as f64, d.n_ttf as f64);
        match self {
            Expression::E1 => 0.0,
            Expression::E2 => 2.0 * h * x + 3.0 * h * o + h,
            Expression::E3 => 2.0 * h * x + 4.0 * h * o + h,
            Expression::E4 => 2.0 * h * t * x + 2.0 * h * t * o + h * t * v + h * x + h * t + h * o,
            Expression::E5 => h * t * o + h * t * v + h * o + 2.0 * h * t + 2.0 * h * x + t * o + h,
            Expression::E6 => 2.0 * h * x * o + h * o,
            Expression::E7 => h * t * x + 2.0 * h * t * o,
            Expression::E8 => 2.0 * h * x * v + x * v * v + t * v * v + 2.0 * h * v,
            Expression::E9 => 2.0 * h * t * v + 2.0 * h * x + h * v + h * o + v,
            Expression::E10 => 2.0 * h * v + 2.0 * h * x + h,
            Expression::E11 => 2.0 * h * t * x + h * t * v + 4.0 * h * t * o + h * t + h * o,
        }
    }
}

/// Multiplies per contraction step.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MulCounter {
    pub steps: Vec<u64>,
}

impl MulCounter {
    pub fn total(&self) -> u64 {
        self.steps.iter().sum()
    }

    fn add(&mut self, n: usize) {
        self.steps.push(n as u64);
    }

    /// `a · b`.
    fn mm(&mut self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.add(a.nrows() * a.ncols() * b.ncols());
        a * b
    }

    /// `aᵀ · b`.
    fn tm(&mut self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.add(a.nrows() * a.ncols() * b.ncols());
        a.tr_mul(b)
    }

    /// `a · bᵀ`.
    fn mt(&mut self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.add(a.nrows() * a.ncols() * b.nrows());
        a * b.transpose()
    }

    fn mv(&mut self, a: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
        self.add(a.nrows() * a.ncols());
        a * v
    }

    fn tv(&mut self, a: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
        self.add(a.nrows() * a.ncols());
        a.tr_mul(v)
    }

    fn had(&mut self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.add(a.len());
        a.component_mul(b)
    }

    fn hadv(&mut self, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        self.add(a.len());
        a.component_mul(b)
    }

    /// `a[i,p] · v[p]` for every row.
    fn scale_cols(&mut self, a: &DMatrix<f64>, v: &DVector<f64>) -> DMatrix<f64> {
        self.add(a.len());
        DMatrix::from_fn(a.nrows(), a.ncols(), |i, p| a[(i, p)] * v[p])
    }
}

/// Orbital-row views of one CP factor of a Cholesky tensor.
#[derive(Debug, Clone)]
struct Side {
    x: DMatrix<f64>,
    y_occ: DMatrix<f64>,
    y_virt: DMatrix<f64>,
    y_n: DVector<f64>,
    z_occ: DMatrix<f64>,
    z_virt: DMatrix<f64>,
    z_n: DVector<f64>,
}

impl Side {
    fn new(f: &CpFactors, n_o: usize, n_v: usize) -> Self {
        let n = n_o + n_v;
        let rows = |m: &DMatrix<f64>, s: usize, k: usize| m.rows(s, k).into_owned();
        let last = |m: &DMatrix<f64>| m.row(n).transpose();
        Self {
            x: f.x.clone(),
            y_occ: rows(&f.y, 0, n_o),
            y_virt: rows(&f.y, n_o, n_v),
            y_n: last(&f.y),
            z_occ: rows(&f.z, 0, n_o),
            z_virt: rows(&f.z, n_o, n_v),
            z_n: last(&f.z),
        }
    }
}

/// Everything the kernels read.
#[derive(Debug, Clone)]
pub struct FactorInputs {
    left: Side,
    right: Side,
    /// Fock row of the outer orbital over the occupied orbitals.
    f_n_occ: DVector<f64>,
    t1: DVector<f64>,
    t: DMatrix<f64>,
    u: DMatrix<f64>,
    v: DMatrix<f64>,
    pub dims: FactorDims,
}

impl FactorInputs {
    /// `eri` is over `n_o + n_v + 1` orbitals with the outer one last;
    /// `amps` are `(N_v, N_o, N_o)` doubles factors.
    pub fn new(eri: &FactorizedEri, fock: &DMatrix<f64>, t1: &[f64], amps: &AmplitudeFactors) -> Result<Self> {
        let n_o = t1.len();
        let n_v = amps.t().nrows();
        let n = n_o + n_v + 1;
        if eri.cholesky.n_orb() != n || fock.nrows() != n || amps.u().nrows() != n_o || amps.v().nrows() != n_o {
            return Err(Error::Shape("factor extents disagree with the step layout".into()));
        }
        let left = Side::new(&eri.left, n_o, n_v);
        let right = eri.right.as_ref().map_or_else(|| left.clone(), |r| Side::new(r, n_o, n_v));
        Ok(Self {
            left,
            right,
            f_n_occ: DVector::from_fn(n_o, |i, _| fock[(n - 1, i)]),
            t1: DVector::from_row_slice(t1),
            t: amps.t().clone(),
            u: amps.u().clone(),
            v: amps.v().clone(),
            dims: FactorDims { n_o, n_v, n_aux: eri.n_aux(), n_htf: eri.n_htf(), n_ttf: amps.0.rank() },
        })
    }
}

/// A kernel result: a vector over occupied `i` or a tensor over `(a, i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprValue {
    Singles(Vec<f64>),
    Doubles(Tensor3),
}

impl ExprValue {
    pub fn as_slice(&self) -> &[f64] {
        match self {
            ExprValue::Singles(v) => v,
            ExprValue::Doubles(t) => &t.data,
        }
    }
}

/// `Σ_s A[a,s] B[i,s] C[j,s]`.
fn expand_cp(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> Tensor3 {
    cp_reconstruct(&CpFactors { x: a.clone(), y: b.clone(), z: c.clone(), history: Vec::new() })
}

/// Evaluate one expression along its contraction path.
pub fn evaluate_expression(e: Expression, inp: &FactorInputs) -> (ExprValue, MulCounter) {
    let mut c = MulCounter::default();
    let (l, r) = (&inp.left, &inp.right);
    let (t, u, v, t1) = (&inp.t, &inp.u, &inp.v, &inp.t1);
    let value = match e {
        Expression::E1 => ExprValue::Singles(inp.f_n_occ.iter().copied().collect()),
        Expression::E2 => {
            let a = c.tv(&l.y_occ, t1);
            let b = c.scale_cols(&r.z_occ, &r.y_n);
            let cp = c.hadv(&a, &l.z_n);
            let d = c.mv(&l.x, &cp);
            let e = c.tv(&r.x, &d);
            ExprValue::Singles(c.mv(&b, &e).iter().copied().collect())
        }
        Expression::E3 => {
            let a = c.tv(&l.y_occ, t1);
            let b = c.tv(&r.y_occ, t1);
            let ci = c.scale_cols(&l.z_occ, &a);
            let d = c.hadv(&b, &r.z_n);
            let e = c.mv(&r.x, &d);
            let g = c.tv(&l.x, &e);
            ExprValue::Singles(c.mv(&ci, &g).iter().copied().collect())
        }
        Expression::E4 => {
            let m1 = c.tm(&l.y_occ, u);
            let m2 = c.tm(&r.y_occ, v);
            let m3 = c.tm(&r.z_virt, t);
            let m = c.had(&m2, &m3);
            let nx = c.mm(&r.x, &m);
            let p = c.mt(&nx, &m1);
            let s = {
                let s = DVector::from_fn(p.ncols(), |q, _| p.column(q).dot(&l.x.column(q)));
                c.add(p.len());
                s
            };
            ExprValue::Singles(c.mv(&l.z_occ, &s).iter().copied().collect())
        }
        Expression::E5 => {
            let a = c.tm(&l.y_occ, v);
            let b = c.tm(&l.z_virt, t);
            let cq = c.tv(&r.y_occ, t1);
            let cc = c.had(&a, &b);
            let d = c.hadv(&cq, &r.z_n);
            let e = c.mv(&r.x, &d);
            let g = c.tv(&l.x, &e);
            let k = c.tv(&cc, &g);
            ExprValue::Singles(c.mv(u, &k).iter().copied().collect())
        }
        Expression::E6 => {
            let b = c.scale_cols(&r.z_occ, &r.y_n);
            let cx = c.mt(&b, &r.x);
            let d = c.mm(&cx, &l.x);
            ExprValue::Doubles(expand_cp(&l.y_virt, &l.z_occ, &d))
        }
        Expression::E7 => {
            let g = c.tm(&l.x, &r.x);
            let a = c.tm(&l.y_occ, u);
            let b = c.tm(&r.y_occ, v);
            // out[a,i,j] = Σ_pqr G_pq A_pr B_qr Z_ip Z'_jq T_ar
            let (nv, no, nr) = (t.nrows(), u.nrows(), t.ncols());
            let mut out = Tensor3::zeros(nv, no, no);
            for rr in 0..nr {
                let zi = &l.z_occ * DMatrix::from_diagonal(&a.column(rr).into_owned());
                let zj = &r.z_occ * DMatrix::from_diagonal(&b.column(rr).into_owned());
                let m = &zi * &g * zj.transpose();
                for aa in 0..nv {
                    for i in 0..no {
                        for j in 0..no {
                            out[[aa, i, j]] += t[(aa, rr)] * m[(i, j)];
                        }
                    }
                }
            }
            ExprValue::Doubles(out)
        }
        Expression::E8 => {
            let a = c.scale_cols(&l.y_virt, &l.z_n);
            let b = c.scale_cols(&r.z_virt, &r.y_n);
            let ca = c.mt(&a, &l.x);
            let db = c.mt(&b, &r.x);
            let e = c.mt(&ca, &db);
            let f = c.mm(&e, t);
            ExprValue::Doubles(expand_cp(&f, u, v))
        }
        Expression::E9 => {
            let a = c.tm(&l.z_virt, t);
            let b = c.tv(&r.y_occ, t1);
            let cq = c.hadv(&b, &r.z_n);
            let d = c.mv(&r.x, &cq);
            let e = c.tv(&l.x, &d);
            let g = c.scale_cols(&l.y_virt, &e);
            let hh = c.mm(&g, &a);
            ExprValue::Doubles(expand_cp(&hh, u, v))
        }
        Expression::E10 => {
            let a = c.scale_cols(&l.y_virt, &l.z_n);
            let b = c.hadv(&r.y_n, &r.z_n);
            let cx = c.mv(&r.x, &b);
            let d = c.tv(&l.x, &cx);
            let e = c.mv(&a, &d);
            let col = |w: &DVector<f64>| DMatrix::from_column_slice(w.len(), 1, w.as_slice());
            ExprValue::Doubles(expand_cp(&col(&e), &col(t1), &col(t1)))
        }
        Expression::E11 => {
            let a = c.tm(&l.y_occ, u);
            let b = c.tm(&l.z_virt, t);
            let cl = c.scale_cols(&r.y_occ, &r.z_n);
            let d = c.tm(&cl, v);
            let ex = c.mm(&r.x, &d);
            let f = c.tm(&l.x, &ex);
            let g = c.had(&f, &b);
            let hh = c.mt(&g, u);
            let k = c.tm(&hh, &a);
            ExprValue::Doubles(expand_cp(t, &k, v))
        }
    };
    (value, c)
}

/// Dense evaluation of the same terms from the reconstructed factors.
pub fn dense_expression(e: Expression, eri: &FactorizedEri, fock: &DMatrix<f64>, t1: &[f64], amps: &AmplitudeFactors) -> ExprValue {
    let lt = cp_reconstruct(&eri.left);
    let rt = eri.right.as_ref().map_or_else(|| lt.clone(), cp_reconstruct);
    let naux = lt.dims[0];
    let g = |a: usize, b: usize, i: usize, j: usize| (0..naux).map(|x| lt[[x, a, i]] * rt[[x, b, j]]).sum::<f64>();
    let t2 = amps.reconstruct();
    let no = t1.len();
    let nv = t2.dims[0];
    let nn = no + nv;
    let (occ, virt) = (0..no, no..nn);
    let va = |a: usize| no + a;
    let singles = |f: &dyn Fn(usize) -> f64| ExprValue::Singles((0..no).map(f).collect());
    let doubles = |f: &dyn Fn(usize, usize, usize) -> f64| ExprValue::Doubles(Tensor3::from_fn(nv, no, no, f));
    match e {
        Expression::E1 => singles(&|i| fock[(nn, i)]),
        Expression::E2 => singles(&|i| occ.clone().map(|j| g(j, nn, nn, i) * t1[j]).sum()),
        Expression::E3 => singles(&|i| {
            occ.clone().flat_map(|j| occ.clone().map(move |k| (j, k))).map(|(j, k)| g(j, k, i, nn) * t1[j] * t1[k]).sum()
        }),
        Expression::E4 => singles(&|i| {
            let mut s = 0.0;
            for k in occ.clone() {
                for l in occ.clone() {
                    for a in 0..nv {
                        s += g(k, l, i, va(a)) * t2[[a, k, l]];
                    }
                }
            }
            s
        }),
        Expression::E5 => singles(&|i| {
            let mut s = 0.0;
            for k in occ.clone() {
                for l in occ.clone() {
                    for c in 0..nv {
                        s += g(k, l, va(c), nn) * t1[l] * t2[[c, i, k]];
                    }
                }
            }
            s
        }),
        Expression::E6 => doubles(&|a, i, j| g(va(a), nn, i, j)),
        Expression::E7 => doubles(&|a, i, j| {
            occ.clone().flat_map(|k| occ.clone().map(move |l| (k, l))).map(|(k, l)| g(k, l, i, j) * t2[[a, k, l]]).sum()
        }),
        Expression::E8 => doubles(&|a, i, j| (0..nv).map(|b| g(va(a), nn, nn, va(b)) * t2[[b, i, j]]).sum()),
        Expression::E9 => doubles(&|a, i, j| {
            let mut s = 0.0;
            for k in occ.clone() {
                for b in 0..nv {
                    s += g(va(a), k, va(b), nn) * t2[[b, i, j]] * t1[k];
                }
            }
            s
        }),
        Expression::E10 => doubles(&|a, i, j| g(va(a), nn, nn, nn) * t1[i] * t1[j]),
        Expression::E11 => doubles(&|a, i, j| {
            let mut s = 0.0;
            for k in occ.clone() {
                for l in occ.clone() {
                    for c in virt.clone() {
                        s += g(k, l, c, nn) * t2[[c - no, i, l]] * t2[[a, k, j]];
                    }
                }
            }
            s
        }),
    }
}

/// Per-expression bookkeeping of one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpressionCount {
    pub expression: Expression,
    pub counted: u64,
    pub printed: f64,
}

impl ExpressionCount {
    /// `counted / printed`; `1` when both vanish.
    pub fn ratio(&self) -> f64 {
        if self.printed == 0.0 {
            if self.counted == 0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            self.counted as f64 / self.printed
        }
    }

    /// Within a factor of two either way.
    pub fn within_two(&self) -> bool {
        let r = self.ratio();
        (0.5..=2.0).contains(&r)
    }
}

/// Evaluate all eleven kernels.
pub fn count_expressions(inp: &FactorInputs) -> Vec<(ExprValue, ExpressionCount)> {
    Expression::ALL
        .iter()
        .map(|&e| {
            let (val, c) = evaluate_expression(e, inp);
            (val, ExpressionCount { expression: e, counted: c.total(), printed: e.printed_cost(&inp.dims) })
        })
        .collect()
}

/// The full residual on factorized integrals and, optionally, factorized
/// mixed doubles. The factors are contracted back to the integral slices and
/// amplitudes the projection needs; the error against the dense residual is
/// bounded by the factorization error.
pub fn residual_factorized(
    h1: &OneBodyTensor,
    eri: &FactorizedEri,
    amps: &AmplitudeSet,
    t2_factors: Option<&AmplitudeFactors>,
) -> Result<ResidualSet> {
    if eri.cholesky.n_orb() != amps.layout.n {
        return Err(Error::Shape("factorized integrals do not match the step".into()));
    }
    let mut a = amps.clone();
    if let Some(f) = t2_factors {
        if a.mode != BlockMode::SpinAdapted {
            return Err(Error::Invalid("factorized doubles need spin-adapted blocks".into()));
        }
        let t = f.reconstruct();
        if t.dims != a.t2m.dims {
            return Err(Error::Shape("doubles factors do not match the step".into()));
        }
        a.t2m = t;
    }
    Ok(projected_residual(&hamiltonian_terms(h1, &eri.reconstruct()), &a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e1_has_no_multiplies() {
        let d = FactorDims { n_o: 3, n_v: 4, n_aux: 5, n_htf: 6, n_ttf: 7 };
        assert_eq!(Expression::E1.path_cost(&d), 0);
        assert_eq!(Expression::E2.path_cost(&d) as f64, Expression::E2.printed_cost(&d));
    }

    #[test]
    fn numbering() {
        assert_eq!(Expression::ALL.iter().map(|e| e.number()).collect::<Vec<_>>(), (1..=11).collect::<Vec<_>>());
    }
}
