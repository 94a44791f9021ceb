//! The `estimate` command.

use crate::config::EstimateArgs;
use crate::error::{CliError, CliResult};
use crate::io::read_json;
use downfold_core::qres::estimate::{default_ttf, TabulatedRow};
use downfold_core::qres::{compare_tabulated, estimate_total, tabulated_rows, CostModel, TableComparison, ResourceEstimate};
use downfold_core::rhd::factorized::FactorDims;
use serde::Serialize;

/// Precision of the tabulated depths.
pub const TABLE_EPS: f64 = 1e-2;

#[derive(Debug, Clone, Serialize)]
pub struct TableReference {
    pub name: String,
    pub eps: f64,
    pub qubits: usize,
    pub depth: f64,
    pub comparison: TableComparison,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    /// How per-expression depths combine into the total.
    pub aggregation: &'static str,
    pub estimate: ResourceEstimate,
    pub table_reference: Option<TableReference>,
}

pub fn tabulated_row(name: &str) -> Option<TabulatedRow> {
    let key = name.to_lowercase().replace(['_', ' '], "-").replace('β', "beta");
    tabulated_rows().into_iter().find(|r| r.name == key)
}

pub fn estimate_report(d: &FactorDims, eps: f64, model: CostModel) -> CliResult<EstimateReport> {
    let estimate = estimate_total(d, eps, model).map_err(|e| CliError::Usage(e.to_string()))?;
    let table_reference = match tabulated_rows().into_iter().find(|r| r.dims == *d) {
        Some(r) => Some(TableReference {
            name: r.name.into(),
            eps: TABLE_EPS,
            qubits: r.qubits,
            depth: r.depth,
            comparison: compare_tabulated(&r, model)?,
        }),
        None => None,
    };
    Ok(EstimateReport { aggregation: "sum", estimate, table_reference })
}

fn positive(name: &str, v: Option<usize>) -> CliResult<usize> {
    match v {
        Some(0) => Err(CliError::Usage(format!("--{name} must be >= 1"))),
        Some(x) => Ok(x),
        None => Err(CliError::Usage(format!("missing dims: --{name} is required"))),
    }
}

pub fn resolve_dims(a: &EstimateArgs) -> CliResult<FactorDims> {
    if let Some(dir) = &a.dims_from {
        let v = read_json(&dir.join("dims.json"))?;
        return serde_json::from_value(v).map_err(|e| CliError::Input(format!("{}/dims.json: {e}", dir.display())));
    }
    if let Some(name) = &a.molecule {
        return tabulated_row(name)
            .map(|r| r.dims)
            .ok_or_else(|| CliError::Usage(format!("unknown molecule {name:?} (retinol, beta-carotene)")));
    }
    if a.n_o.is_none() {
        return Err(CliError::Usage("missing dims: pass --dims-from, --molecule or --n-o/--n-v/--n-aux".into()));
    }
    let n_o = positive("n-o", a.n_o)?;
    let n_v = positive("n-v", a.n_v)?;
    let n_aux = positive("n-aux", a.n_aux)?;
    let n_htf = positive("n-htf", a.n_htf.or(Some(n_aux)))?;
    let n_ttf = positive("n-ttf", a.n_ttf.or(Some(default_ttf(n_o, n_v))))?;
    Ok(FactorDims { n_o, n_v, n_aux, n_htf, n_ttf })
}

pub fn cmd_estimate(a: &EstimateArgs) -> CliResult<EstimateReport> {
    let d = resolve_dims(a)?;
    estimate_report(&d, a.eps, a.model.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn molecule_names() {
        assert_eq!(tabulated_row("Retinol").unwrap().qubits, 108);
        assert_eq!(tabulated_row("beta_carotene").unwrap().qubits, 117);
        assert!(tabulated_row("aspirin").is_none());
    }

    #[test]
    fn reference_block_only_for_tabulated_dims() {
        let r = tabulated_row("retinol").unwrap();
        let rep = estimate_report(&r.dims, 1e-3, CostModel::Diophantine).unwrap();
        assert_eq!(rep.table_reference.unwrap().qubits, 108);
        let d = FactorDims { n_o: 2, n_v: 3, n_aux: 9, n_htf: 18, n_ttf: 4 };
        assert!(estimate_report(&d, 1e-3, CostModel::Diophantine).unwrap().table_reference.is_none());
    }
}
