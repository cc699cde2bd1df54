//! Run configuration: optional TOML file, environment, then flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use neumann_core::experiments::GridSpec;
use neumann_core::{DomainMode, SolverOptions};
use serde::{Deserialize, Serialize};

pub const SEED_VAR: &str = "NEUMANN_LAB_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Interval,
    Ball,
}

impl From<Mode> for DomainMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Interval => DomainMode::Interval,
            Mode::Ball => DomainMode::Ball,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileGrid {
    pub dim: Option<usize>,
    pub n: Option<usize>,
    pub mode: Option<Mode>,
    pub length: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSweep {
    pub path: Option<String>,
    pub samples: Option<usize>,
    pub warm_start: Option<bool>,
}

/// Contents of `--config`.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub jobs: Option<usize>,
    #[serde(default)]
    pub grid: FileGrid,
    pub solver: Option<SolverOptions>,
    #[serde(default)]
    pub sweep: FileSweep,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct CommonArgs {
    /// TOML configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Format of tabular output
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for sweeps
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Args, Clone, Debug, Default)]
pub struct GridArgs {
    #[arg(long)]
    pub dim: Option<usize>,
    /// Number of grid intervals
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Interval length or ball radius
    #[arg(long)]
    pub length: Option<f64>,
}

#[derive(Args, Clone, Debug, Default)]
pub struct SolverArgs {
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Disable step damping in the dual iteration
    #[arg(long)]
    pub no_damping: bool,
}

/// Fully merged settings; serialized into every JSON summary.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub grid: GridSpec,
    pub solver: SolverOptions,
    pub out: PathBuf,
    pub format: Format,
    pub jobs: Option<usize>,
}

pub fn env_seed() -> anyhow::Result<Option<u64>> {
    match std::env::var(SEED_VAR) {
        Ok(s) => Ok(Some(s.trim().parse().with_context(|| format!("{SEED_VAR}={s:?} is not an integer"))?)),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => bail!("{SEED_VAR}: {e}"),
    }
}

impl RunConfig {
    pub fn merge(
        command: &str,
        file: &FileConfig,
        common: &CommonArgs,
        grid: &GridArgs,
        solver: &SolverArgs,
        default_n: usize,
    ) -> anyhow::Result<Self> {
        let mut opts = file.solver.clone().unwrap_or_default();
        if let Some(seed) = env_seed()? {
            opts.seed = seed;
        }
        if let Some(seed) = solver.seed {
            opts.seed = seed;
        }
        if let Some(tol) = solver.tol {
            opts.tol = tol;
        }
        if let Some(m) = solver.max_iter {
            opts.max_iter = m;
        }
        if solver.no_damping {
            opts.damping = false;
        }
        if !(opts.tol > 0.0) || opts.max_iter == 0 {
            bail!("solver needs tol > 0 and max_iter > 0");
        }
        let dim = grid.dim.or(file.grid.dim).unwrap_or(1);
        let mode = grid.mode.or(file.grid.mode).unwrap_or(if dim == 1 { Mode::Interval } else { Mode::Ball });
        let spec = GridSpec {
            dim,
            intervals: grid.n.or(file.grid.n).unwrap_or(default_n),
            mode: mode.into(),
            length: grid.length.or(file.grid.length).unwrap_or(1.0),
        };
        spec.build()?;
        let jobs = common.jobs.or(file.jobs);
        if jobs == Some(0) {
            bail!("--jobs must be positive");
        }
        Ok(Self {
            command: command.into(),
            p: None,
            q: None,
            grid: spec,
            solver: opts,
            out: common.out.clone().or_else(|| file.out.clone()).unwrap_or_else(|| ".".into()),
            format: common.format.or(file.format).unwrap_or(Format::Csv),
            jobs,
        })
    }
}
