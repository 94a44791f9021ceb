//! Qubit and depth accounting for the eleven residual expressions.
//!
//! Each encoder of an `N×M` data tensor costs `MN` CX gates and `MN`
//! rotations, so an expression whose encoders hold `poly` entries in total
//! has depth `2·poly·λ`, where `λ` is the synthesis cost of one rotation:
//! `⌈log₂(1/ε)⌉` under the Diophantine model and `⌈log₂(1/ε)⌉^3.97` under
//! Solovay-Kitaev. T counts per rotation are `3⌈log₂(1/ε)⌉` and
//! `⌈⌈log₂(1/ε)⌉^3.97⌉` respectively.

use super::layout::{Register, RegisterLayout};
use crate::error::{Error, Result};
use crate::rhd::factorized::{Expression, FactorDims};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// Exponent of the Solovay-Kitaev sequence length.
pub const SK_EXPONENT: f64 = 3.97;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostModel {
    SolovayKitaev,
    #[default]
    Diophantine,
}

impl CostModel {
    /// Rotation cost `λ` entering the depth formulas.
    pub fn rotation_factor(self, log_factor: u64) -> u64 {
        match self {
            CostModel::Diophantine => log_factor,
            CostModel::SolovayKitaev => sk_length(log_factor),
        }
    }

    /// T gates per single-qubit rotation.
    pub fn t_per_rotation(self, log_factor: u64) -> u64 {
        match self {
            CostModel::Diophantine => 3 * log_factor,
            CostModel::SolovayKitaev => sk_length(log_factor),
        }
    }
}

fn sk_length(l: u64) -> u64 {
    libm::ceil(libm::pow(l as f64, SK_EXPONENT)) as u64
}

/// `⌈log₂(1/ε)⌉` for `0 < ε < 1`.
pub fn log_factor(eps: f64) -> Result<u64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Invalid(format!("precision {eps} outside (0, 1)")));
    }
    // Exact powers of two must not round up through the reciprocal.
    let l = libm::log2(1.0 / eps);
    let r = libm::round(l);
    Ok(if (l - r).abs() < 1e-12 { r as u64 } else { libm::ceil(l) as u64 })
}

fn expression(id: usize) -> Result<Expression> {
    Expression::ALL.get(id.wrapping_sub(1)).copied().ok_or(Error::UnknownExpression(id))
}

/// Bracketed polynomial of the depth formula for expression `id`.
pub fn expression_polynomial(id: usize, d: &FactorDims) -> Result<u64> {
    let (o, v, x, h, t) = (d.n_o as u64, d.n_v as u64, d.n_aux as u64, d.n_htf as u64, d.n_ttf as u64);
    Ok(match expression(id)? {
        Expression::E1 => o,
        Expression::E2 => 2 * x * h + 2 * o * h + 2 * h + o,
        Expression::E3 => 2 * x * h + 3 * o * h + h + 2 * o,
        Expression::E4 => 2 * x * h + 3 * o * h + v * h + 2 * o * t + v * t,
        Expression::E5 => 2 * x * h + 2 * o * h + v * h + h + o + 2 * o * t + v * t,
        Expression::E6 => 2 * x * h + 2 * o * h + v * h + h,
        Expression::E7 => 2 * x * h + 4 * o * h + 2 * o * t + v * t,
        Expression::E8 => 2 * x * h + 2 * v * h + 2 * h + 2 * o * t + v * t,
        Expression::E9 => 2 * x * h + 2 * v * h + h * o + h + o + 2 * o * t + v * t,
        Expression::E10 => 2 * x * h + v * h + 2 * h + 2 * o,
        Expression::E11 => 2 * x * h + 2 * o * h + v * h + h + 4 * o * t + 2 * v * t,
    })
}

/// Depth `2·poly·λ` of expression `id`.
pub fn estimate_expression(id: usize, d: &FactorDims, eps: f64, model: CostModel) -> Result<u64> {
    Ok(2 * expression_polynomial(id, d)? * model.rotation_factor(log_factor(eps)?))
}

/// Index registers of each encoder in the circuit of an expression, with the
/// loaded tensor. Encoders of a fixed `N` index drop that register.
pub fn expression_encoders(id: usize) -> Result<Vec<(&'static str, Vec<Register>)>> {
    use Register::*;
    let cp = |y: Option<Register>, z: Option<Register>, y2: Option<Register>, z2: Option<Register>| {
        let opt = |r: Option<Register>, p: Register| r.map_or(alloc::vec![p], |r| alloc::vec![r, p]);
        alloc::vec![("X", alloc::vec![X, P]), ("Y", opt(y, P)), ("Z", opt(z, P)), ("X", alloc::vec![X, Q]), ("Y", opt(y2, Q)), ("Z", opt(z2, Q))]
    };
    let t2 = |a: Register, i: Register, j: Register, r: Register| {
        alloc::vec![("T", alloc::vec![a, r]), ("U", alloc::vec![i, r]), ("V", alloc::vec![j, r])]
    };
    let t1 = |i: Register| ("t1", alloc::vec![i]);
    Ok(match expression(id)? {
        Expression::E1 => alloc::vec![("f", alloc::vec![I])],
        Expression::E2 => [cp(Some(J), None, None, Some(I)), alloc::vec![t1(J)]].concat(),
        Expression::E3 => [cp(Some(J), Some(I), Some(K), None), alloc::vec![t1(J), t1(K)]].concat(),
        Expression::E4 => [cp(Some(K), Some(I), Some(L), Some(A)), t2(A, K, L, R)].concat(),
        Expression::E5 => [cp(Some(K), Some(C), Some(L), None), alloc::vec![t1(L)], t2(C, I, K, R)].concat(),
        Expression::E6 => cp(Some(A), Some(I), None, Some(J)),
        Expression::E7 => [cp(Some(K), Some(I), Some(L), Some(J)), t2(A, K, L, R)].concat(),
        Expression::E8 => [cp(Some(A), Some(B), None, None), t2(B, I, J, R)].concat(),
        Expression::E9 => [cp(Some(A), Some(B), Some(K), None), alloc::vec![t1(K)], t2(B, I, J, R)].concat(),
        Expression::E10 => [cp(Some(A), None, None, None), alloc::vec![t1(I), t1(J)]].concat(),
        Expression::E11 => [cp(Some(K), Some(C), Some(L), None), t2(C, I, L, R), t2(A, K, J, S)].concat(),
    })
}

/// Total entries loaded by the encoders of [`expression_encoders`].
pub fn encoder_entries(id: usize, d: &FactorDims) -> Result<u64> {
    Ok(expression_encoders(id)?.iter().map(|(_, regs)| regs.iter().map(|r| r.extent(d) as u64).product::<u64>()).sum())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpressionEstimate {
    pub expression: usize,
    pub polynomial: u64,
    pub depth: u64,
    pub t_depth: u64,
    pub cnot_depth: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub dims: FactorDims,
    pub eps: f64,
    pub log_factor: u64,
    pub cost_model: CostModel,
    pub layout: RegisterLayout,
    pub qubits: usize,
    pub depth: u64,
    pub t_depth: u64,
    pub cnot_depth: u64,
    pub breakdown: Vec<ExpressionEstimate>,
}

/// Layout qubits and the summed depths of all eleven expressions.
pub fn estimate_total(d: &FactorDims, eps: f64, model: CostModel) -> Result<ResourceEstimate> {
    let l = log_factor(eps)?;
    let layout = RegisterLayout::from_dims(d);
    let breakdown = (1..=11)
        .map(|id| {
            let poly = expression_polynomial(id, d)?;
            Ok(ExpressionEstimate {
                expression: id,
                polynomial: poly,
                depth: 2 * poly * model.rotation_factor(l),
                t_depth: poly * model.t_per_rotation(l),
                cnot_depth: poly,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResourceEstimate {
        dims: *d,
        eps,
        log_factor: l,
        cost_model: model,
        qubits: layout.total(),
        layout,
        depth: breakdown.iter().map(|e| e.depth).sum(),
        t_depth: breakdown.iter().map(|e| e.t_depth).sum(),
        cnot_depth: breakdown.iter().map(|e| e.cnot_depth).sum(),
        breakdown,
    })
}

/// A published large-molecule row at 1e-2 precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TabulatedRow {
    pub name: &'static str,
    pub norbs: usize,
    pub dims: FactorDims,
    pub qubits: usize,
    pub depth: f64,
}

/// Doubles rank used when the table gives none.
pub fn default_ttf(n_o: usize, n_v: usize) -> usize {
    n_v.max(2 * n_o)
}

/// Retinol (C20H30O, 158 electrons in 1071 orbitals) and β-carotene at the
/// smallest tabulated factor count.
pub fn tabulated_rows() -> [TabulatedRow; 2] {
    let row = |name, norbs, n_o: usize, n_tf, qubits, depth| TabulatedRow {
        name,
        norbs,
        dims: FactorDims { n_o, n_v: norbs - n_o, n_aux: n_tf, n_htf: n_tf, n_ttf: default_ttf(n_o, norbs - n_o) },
        qubits,
        depth,
    };
    [row("retinol", 1071, 79, 2496, 108, 1.17e8), row("beta-carotene", 840, 148, 6816, 117, 6.71e8)]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisterDelta {
    pub register: String,
    pub qubits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpressionShare {
    pub expression: usize,
    pub depth: u64,
    /// `depth / tabulated depth`.
    pub ratio_to_table: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableComparison {
    pub name: String,
    pub dims: FactorDims,
    pub qubits: usize,
    pub table_qubits: usize,
    pub qubit_delta: i64,
    pub registers: Vec<RegisterDelta>,
    pub depth: u64,
    pub table_depth: f64,
    pub depth_ratio: f64,
    pub expressions: Vec<ExpressionShare>,
}

impl TableComparison {
    pub fn qubits_within(&self, rel: f64) -> bool {
        (self.qubits as f64 - self.table_qubits as f64).abs() <= rel * self.table_qubits as f64
    }

    pub fn depth_within(&self, factor: f64) -> bool {
        self.depth_ratio <= factor && self.depth_ratio >= 1.0 / factor
    }
}

pub fn compare_tabulated(row: &TabulatedRow, model: CostModel) -> Result<TableComparison> {
    let est = estimate_total(&row.dims, 1e-2, model)?;
    Ok(TableComparison {
        name: row.name.to_string(),
        dims: row.dims,
        qubits: est.qubits,
        table_qubits: row.qubits,
        qubit_delta: est.qubits as i64 - row.qubits as i64,
        registers: est.layout.registers.iter().map(|&(r, w)| RegisterDelta { register: r.symbol().to_string(), qubits: w }).collect(),
        depth: est.depth,
        table_depth: row.depth,
        depth_ratio: est.depth as f64 / row.depth,
        expressions: est
            .breakdown
            .iter()
            .map(|e| ExpressionShare { expression: e.expression, depth: e.depth, ratio_to_table: e.depth as f64 / row.depth })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_factor_rounding() {
        assert_eq!(log_factor(0.5).unwrap(), 1);
        assert_eq!(log_factor(0.25).unwrap(), 2);
        assert_eq!(log_factor(1e-3).unwrap(), 10);
        assert!(log_factor(1.0).is_err() && log_factor(0.0).is_err());
    }

    #[test]
    fn unknown_expression() {
        let d = FactorDims { n_o: 1, n_v: 1, n_aux: 1, n_htf: 1, n_ttf: 1 };
        assert_eq!(estimate_expression(12, &d, 0.1, CostModel::Diophantine), Err(Error::UnknownExpression(12)));
        assert_eq!(estimate_expression(0, &d, 0.1, CostModel::Diophantine), Err(Error::UnknownExpression(0)));
    }
}
