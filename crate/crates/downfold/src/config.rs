//! Command-line arguments, the TOML run configuration and their merge.
//! Every config key can be overridden by a flag; flags win.

use crate::error::{CliError, CliResult};
use clap::{Args, Parser, Subcommand, ValueEnum};
use downfold_core::qres::CostModel;
use downfold_core::rhd::{BlockMode, DownfoldConfig, FactorizedConfig, HtfRank, ResidualKind, RgFlow, SolverConfig};
use downfold_core::tensorfactor::DEFAULT_CHOLESKY_DELTA;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "downfold", version, about = "Recursive Hamiltonian downfolding with factorized integrals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Downfold an FCIDUMP and write the energy trace and reports.
    Run(RunArgs),
    /// Run a seeded property suite.
    Verify(VerifyArgs),
    /// Block-encoding resource estimate for a set of factor dimensions.
    Estimate(EstimateArgs),
    /// Factorize the two-electron integrals of an FCIDUMP.
    Factorize(FactorizeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowArg {
    Complete,
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualArg {
    Projected,
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlocksArg {
    SpinAdapted,
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    Diophantine,
    SolovayKitaev,
}

impl From<ModelArg> for CostModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Diophantine => CostModel::Diophantine,
            ModelArg::SolovayKitaev => CostModel::SolovayKitaev,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Dense,
    Factorized,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// FCIDUMP file (same as --fcidump).
    pub input: Option<PathBuf>,
    #[arg(long, conflicts_with = "input")]
    pub fcidump: Option<PathBuf>,
    /// TOML file with any of the keys below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Residual ∞-norm convergence threshold.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// DIIS subspace size (0 disables).
    #[arg(long)]
    pub diis: Option<usize>,
    /// Integral CP rank as a multiple of N_aux.
    #[arg(long, visible_alias = "rank-mult")]
    pub htf_mult: Option<f64>,
    /// Exact integral CP (N_htf = N_orb²).
    #[arg(long)]
    pub exact_rank: bool,
    /// CP rank of the mixed doubles; dense doubles when absent.
    #[arg(long)]
    pub ttf_rank: Option<usize>,
    #[arg(long)]
    pub cholesky_delta: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, conflicts_with = "factorized")]
    pub dense_only: bool,
    #[arg(long)]
    pub factorized: bool,
    #[arg(long, value_enum)]
    pub flow: Option<FlowArg>,
    #[arg(long, value_enum)]
    pub residual: Option<ResidualArg>,
    #[arg(long, value_enum)]
    pub blocks: Option<BlocksArg>,
    /// Orbitals left undecoupled.
    #[arg(long)]
    pub keep: Option<usize>,
    #[arg(long)]
    pub allow_unconverged: bool,
    /// Precision of the resource estimate written with the run.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Oracle,
    Blockenc,
    Factorization,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Spatial orbitals (oracle, factorization) or largest matrix extent (blockenc).
    #[arg(long)]
    pub size: Option<usize>,
    /// Random cases to draw.
    #[arg(long, default_value_t = 20)]
    pub cases: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Run directory holding dims.json.
    #[arg(long, conflicts_with_all = ["molecule", "n_o"])]
    pub dims_from: Option<PathBuf>,
    /// A tabulated molecule: retinol or beta-carotene.
    #[arg(long, conflicts_with = "n_o")]
    pub molecule: Option<String>,
    #[arg(long, requires_all = ["n_v", "n_aux"])]
    pub n_o: Option<usize>,
    #[arg(long)]
    pub n_v: Option<usize>,
    #[arg(long)]
    pub n_aux: Option<usize>,
    /// Defaults to N_aux.
    #[arg(long)]
    pub n_htf: Option<usize>,
    /// Defaults to max(N_v, 2·N_o).
    #[arg(long)]
    pub n_ttf: Option<usize>,
    #[arg(long, default_value_t = 1e-2)]
    pub eps: f64,
    #[arg(long, value_enum, default_value = "diophantine")]
    pub model: ModelArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FactorizeArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_CHOLESKY_DELTA)]
    pub delta: f64,
    #[arg(long, default_value_t = 2.0)]
    pub htf_mult: f64,
    #[arg(long)]
    pub exact_rank: bool,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Keys accepted in a run configuration file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub diis: Option<usize>,
    pub htf_mult: Option<f64>,
    pub exact_rank: Option<bool>,
    pub ttf_rank: Option<usize>,
    pub cholesky_delta: Option<f64>,
    pub seed: Option<u64>,
    pub mode: Option<ModeArg>,
    pub flow: Option<FlowArg>,
    pub residual: Option<ResidualArg>,
    pub blocks: Option<BlocksArg>,
    pub keep: Option<usize>,
    pub allow_unconverged: Option<bool>,
    pub eps: Option<f64>,
    pub model: Option<ModelArg>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = crate::io::read_text(path)?;
        toml::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub input: PathBuf,
    pub out: PathBuf,
    pub tol: f64,
    pub max_iter: usize,
    pub diis: usize,
    pub htf_mult: f64,
    pub exact_rank: bool,
    pub ttf_rank: Option<usize>,
    pub cholesky_delta: f64,
    pub seed: u64,
    pub mode: ModeArg,
    pub flow: FlowArg,
    pub residual: ResidualArg,
    pub blocks: BlocksArg,
    pub keep: usize,
    pub allow_unconverged: bool,
    pub eps: f64,
    pub model: ModelArg,
}

impl RunConfig {
    pub fn defaults(input: PathBuf) -> Self {
        let s = SolverConfig::default();
        Self {
            input,
            out: PathBuf::from("downfold-run"),
            tol: s.tol,
            max_iter: s.max_iter,
            diis: s.diis,
            htf_mult: 2.0,
            exact_rank: false,
            ttf_rank: None,
            cholesky_delta: DEFAULT_CHOLESKY_DELTA,
            seed: 7,
            mode: ModeArg::Dense,
            flow: FlowArg::Complete,
            residual: ResidualArg::Projected,
            blocks: BlocksArg::SpinAdapted,
            keep: 0,
            allow_unconverged: false,
            eps: 1e-2,
            model: ModelArg::Diophantine,
        }
    }

    /// Defaults, then the config file, then the flags.
    pub fn resolve(a: &RunArgs) -> CliResult<Self> {
        let file = match &a.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let input = a
            .input
            .clone()
            .or_else(|| a.fcidump.clone())
            .or(file.input.clone())
            .ok_or_else(|| CliError::Usage("no input: pass INPUT, --fcidump or `input` in --config".into()))?;
        let mut c = Self::defaults(input);
        macro_rules! set {
            ($($f:ident),*) => {$(
                if let Some(v) = file.$f.clone() { c.$f = v; }
                if let Some(v) = a.$f.clone() { c.$f = v; }
            )*};
        }
        set!(out, tol, max_iter, diis, htf_mult, cholesky_delta, seed, flow, residual, blocks, keep, eps, model);
        c.ttf_rank = a.ttf_rank.or(file.ttf_rank);
        c.exact_rank = a.exact_rank || file.exact_rank.unwrap_or(false);
        c.allow_unconverged = a.allow_unconverged || file.allow_unconverged.unwrap_or(false);
        if let Some(m) = file.mode {
            c.mode = m;
        }
        if a.factorized {
            c.mode = ModeArg::Factorized;
        } else if a.dense_only {
            c.mode = ModeArg::Dense;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Usage(m));
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad(format!("tol must be > 0, got {}", self.tol));
        }
        if !(self.cholesky_delta > 0.0 && self.cholesky_delta.is_finite()) {
            return bad(format!("cholesky_delta must be > 0, got {}", self.cholesky_delta));
        }
        if !(self.htf_mult >= 0.5 && self.htf_mult.is_finite()) {
            return bad(format!("htf_mult must be >= 0.5, got {}", self.htf_mult));
        }
        if self.ttf_rank == Some(0) {
            return bad("ttf_rank must be >= 1".into());
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad(format!("eps must lie in (0, 1), got {}", self.eps));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be >= 1".into());
        }
        Ok(())
    }

    pub fn downfold_config(&self) -> DownfoldConfig {
        let factorized = (self.mode == ModeArg::Factorized).then(|| FactorizedConfig {
            htf: if self.exact_rank { HtfRank::Exact } else { HtfRank::Multiple(self.htf_mult) },
            ttf_rank: self.ttf_rank,
            cholesky_delta: self.cholesky_delta,
            seed: self.seed,
        });
        DownfoldConfig {
            solver: SolverConfig { tol: self.tol, max_iter: self.max_iter, diis: self.diis, ..SolverConfig::default() },
            mode: match self.blocks {
                BlocksArg::SpinAdapted => BlockMode::SpinAdapted,
                BlocksArg::Independent => BlockMode::Independent,
            },
            flow: match self.flow {
                FlowArg::Complete => RgFlow::Complete,
                FlowArg::Printed => RgFlow::Printed,
            },
            residual: match self.residual {
                ResidualArg::Projected => ResidualKind::Projected,
                ResidualArg::Printed => ResidualKind::Printed,
            },
            keep: self.keep,
            allow_unconverged: self.allow_unconverged,
            factorized,
        }
    }
}
