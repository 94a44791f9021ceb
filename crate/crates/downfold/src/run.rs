//! The `run` and `factorize` commands.

use crate::config::{FactorizeArgs, ModeArg, RunConfig};
use crate::error::{CliError, CliResult};
use crate::estimate::{estimate_report, EstimateReport};
use crate::io::{csv_float, read_fcidump, sibling_reference, write_json};
use downfold_core::integrals::{FcidumpData, TwoBodyTensor};
use downfold_core::rhd::factorized::FactorDims;
use downfold_core::rhd::{downfold, EnergyTrace, StepFactorization};
use downfold_core::tensor::Tensor3;
use downfold_core::tensorfactor::{default_ttf_rank, factor_eri, factorize_eri, factorize_eri_exact, CpFactors, FactorizedEri};
use nalgebra::DMatrix;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

/// HF energies may differ from the fixture by this much.
pub const HF_CHECK_TOL: f64 = 1e-6;

/// Integral factorization of the input at the run's rank policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputFactorization {
    pub cholesky_delta: f64,
    pub symmetric: bool,
    pub n_aux: usize,
    pub n_htf: usize,
    pub cholesky_error: f64,
    pub eri_error: f64,
    /// `eri_error / ‖h2‖_F`.
    pub eri_relative_error: f64,
    pub cp_sweeps: usize,
}

pub fn factorize_input(h2: &TwoBodyTensor, delta: f64, htf_mult: f64, exact: bool, seed: u64) -> CliResult<(FactorizedEri, InputFactorization)> {
    let fe = if exact {
        factorize_eri_exact(h2, delta)?
    } else {
        let n_aux = factor_eri(h2, delta)?.n_aux();
        let rank = ((htf_mult * n_aux as f64).round() as usize).max(1);
        factorize_eri(h2, delta, Some(rank), seed)?
    };
    let eri_error = fe.reconstruct().h2.distance(&h2.h2);
    let norm = h2.h2.norm();
    let rep = InputFactorization {
        cholesky_delta: delta,
        symmetric: fe.cholesky.right.is_none(),
        n_aux: fe.n_aux(),
        n_htf: fe.n_htf(),
        cholesky_error: fe.cholesky.reconstruct().h2.distance(&h2.h2),
        eri_error,
        eri_relative_error: if norm > 0.0 { eri_error / norm } else { 0.0 },
        cp_sweeps: fe.left.history.len(),
    };
    Ok((fe, rep))
}

#[derive(Debug, Serialize)]
struct TraceStep {
    step: usize,
    orbital: usize,
    occupied: bool,
    iters: usize,
    residual_norm: f64,
    e_step: f64,
    e_cum: f64,
    converged: bool,
    quasi_degenerate: bool,
}

#[derive(Debug, Serialize)]
struct TraceFile {
    core_energy: f64,
    e_reference: f64,
    e_remaining: f64,
    e_total: f64,
    correlation_energy: f64,
    steps: Vec<TraceStep>,
}

#[derive(Debug, Serialize)]
pub struct HfCheck {
    /// Electronic reference energy plus the core constant.
    pub computed: f64,
    pub reference: Option<f64>,
    pub difference: Option<f64>,
    pub passed: Option<bool>,
}

#[derive(Debug, Serialize)]
pub struct StepResidual {
    pub step: usize,
    pub orbital: usize,
    pub residual_norm: f64,
    pub converged: bool,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub input: String,
    pub n_orbitals: usize,
    pub n_electrons: usize,
    pub mode: ModeArg,
    pub hf_check: HfCheck,
    pub correlation_energy: f64,
    /// Total energy including the core constant.
    pub total_energy: f64,
    pub steps: usize,
    pub all_converged: bool,
    pub max_residual_norm: f64,
    pub residuals: Vec<StepResidual>,
    pub config: RunConfig,
}

#[derive(Debug, Serialize)]
struct FactorizationFile {
    input: InputFactorization,
    steps: Vec<Option<StepFactorization>>,
}

#[derive(Debug, Serialize)]
struct Metadata {
    tool: &'static str,
    version: &'static str,
    generated_unix_ms: u128,
    wall_ms_total: f64,
    step_wall_ms: Vec<f64>,
}

/// What a run produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub trace: EnergyTrace,
    pub summary: Summary,
    pub dims: FactorDims,
    pub out: PathBuf,
}

fn hf_check(input: &Path, data: &FcidumpData, trace: &EnergyTrace) -> HfCheck {
    let computed = trace.e_reference + data.core_energy;
    let reference = sibling_reference(input).and_then(|v| v.get("e_hf").and_then(|e| e.as_f64()));
    let difference = reference.map(|r| computed - r);
    HfCheck { computed, reference, difference, passed: difference.map(|d| d.abs() < HF_CHECK_TOL) }
}

fn write_trace_csv(path: &Path, trace: &EnergyTrace) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Input(e.to_string()))?;
    let err = |e: csv::Error| CliError::Input(e.to_string());
    w.write_record(["step", "orbital", "iters", "residual_norm", "e_step", "e_cum", "wall_ms"]).map_err(err)?;
    for s in &trace.steps {
        w.write_record([
            s.step.to_string(),
            s.orbital.to_string(),
            s.iters.to_string(),
            csv_float(s.residual_norm),
            csv_float(s.e_step),
            csv_float(s.e_cum),
            format!("{:.3}", s.wall_ms),
        ])
        .map_err(err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_run(cfg: &RunConfig) -> CliResult<RunOutcome> {
    let data = read_fcidump(&cfg.input)?;
    let (_, input_fact) = factorize_input(&data.h2, cfg.cholesky_delta, cfg.htf_mult, cfg.exact_rank, cfg.seed)?;
    let start = Instant::now();
    let mut clock = || start.elapsed().as_secs_f64() * 1e3;
    let trace = downfold(&data.system, &data.h1, &data.h2, &cfg.downfold_config(), &mut clock)?;
    let wall_ms_total = clock();

    let n_o = data.system.n_occupied();
    let n_v = data.system.n_spatial - n_o;
    let dims = FactorDims {
        n_o,
        n_v,
        n_aux: input_fact.n_aux,
        n_htf: input_fact.n_htf,
        n_ttf: cfg.ttf_rank.unwrap_or_else(|| default_ttf_rank(n_v, n_o)),
    };
    let summary = Summary {
        input: cfg.input.display().to_string(),
        n_orbitals: data.system.n_spatial,
        n_electrons: data.system.n_electrons,
        mode: cfg.mode,
        hf_check: hf_check(&cfg.input, &data, &trace),
        correlation_energy: trace.correlation_energy,
        total_energy: trace.e_total + data.core_energy,
        steps: trace.steps.len(),
        all_converged: trace.steps.iter().all(|s| s.converged),
        max_residual_norm: trace.steps.iter().map(|s| s.residual_norm).fold(0.0, f64::max),
        residuals: trace
            .steps
            .iter()
            .map(|s| StepResidual { step: s.step, orbital: s.orbital, residual_norm: s.residual_norm, converged: s.converged })
            .collect(),
        config: cfg.clone(),
    };

    let out = &cfg.out;
    fs::create_dir_all(out)?;
    write_trace_csv(&out.join("trace.csv"), &trace)?;
    let tf = TraceFile {
        core_energy: data.core_energy,
        e_reference: trace.e_reference,
        e_remaining: trace.e_remaining,
        e_total: trace.e_total,
        correlation_energy: trace.correlation_energy,
        steps: trace
            .steps
            .iter()
            .map(|s| TraceStep {
                step: s.step,
                orbital: s.orbital,
                occupied: s.occupied,
                iters: s.iters,
                residual_norm: s.residual_norm,
                e_step: s.e_step,
                e_cum: s.e_cum,
                converged: s.converged,
                quasi_degenerate: s.quasi_degenerate,
            })
            .collect(),
    };
    write_json(&out.join("trace.json"), &tf)?;
    write_json(
        &out.join("factorization.json"),
        &FactorizationFile { input: input_fact, steps: trace.steps.iter().map(|s| s.factorization.clone()).collect() },
    )?;
    write_json(&out.join("summary.json"), &summary)?;
    write_json(&out.join("dims.json"), &dims)?;
    let est: EstimateReport = estimate_report(&dims, cfg.eps, cfg.model.into())?;
    write_json(&out.join("estimate.json"), &est)?;
    let meta = Metadata {
        tool: "downfold",
        version: env!("CARGO_PKG_VERSION"),
        generated_unix_ms: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis()),
        wall_ms_total,
        step_wall_ms: trace.steps.iter().map(|s| s.wall_ms).collect(),
    };
    fs::write(out.join("metadata.json"), serde_json::to_string_pretty(&meta).unwrap_or_default() + "\n")?;
    Ok(RunOutcome { trace, summary, dims, out: out.clone() })
}

/// Column-major dense matrix.
#[derive(Debug, Serialize)]
struct MatrixFile {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl From<&DMatrix<f64>> for MatrixFile {
    fn from(m: &DMatrix<f64>) -> Self {
        Self { rows: m.nrows(), cols: m.ncols(), data: m.as_slice().to_vec() }
    }
}

#[derive(Debug, Serialize)]
struct CpFile {
    rank: usize,
    dims: [usize; 3],
    x: MatrixFile,
    y: MatrixFile,
    z: MatrixFile,
    history: Vec<f64>,
}

impl From<&CpFactors> for CpFile {
    fn from(f: &CpFactors) -> Self {
        Self { rank: f.rank(), dims: f.dims(), x: (&f.x).into(), y: (&f.y).into(), z: (&f.z).into(), history: f.history.clone() }
    }
}

/// Factors `h2[a,b,c,d] = Σ_x L[x,a,d] R[x,b,c]` and the CP of each.
#[derive(Debug, Serialize)]
struct FactorContainer<'a> {
    convention: &'static str,
    cholesky_l: &'a Tensor3,
    cholesky_r: Option<&'a Tensor3>,
    cp_left: CpFile,
    cp_right: Option<CpFile>,
}

pub fn cmd_factorize(a: &FactorizeArgs) -> CliResult<InputFactorization> {
    if !(a.delta > 0.0) || !(a.htf_mult >= 0.5) {
        return Err(CliError::Usage("delta must be > 0 and htf_mult >= 0.5".into()));
    }
    let data = read_fcidump(&a.input)?;
    let (fe, rep) = factorize_input(&data.h2, a.delta, a.htf_mult, a.exact_rank, a.seed)?;
    fs::create_dir_all(&a.out)?;
    let c = FactorContainer {
        convention: "h2[a,b,c,d] = sum_x L[x,a,d] R[x,b,c]; R = L when cholesky_r is null",
        cholesky_l: &fe.cholesky.l,
        cholesky_r: fe.cholesky.right.as_ref(),
        cp_left: (&fe.left).into(),
        cp_right: fe.right.as_ref().map(Into::into),
    };
    write_json(&a.out.join("factors.json"), &c)?;
    write_json(&a.out.join("report.json"), &rep)?;
    Ok(rep)
}
