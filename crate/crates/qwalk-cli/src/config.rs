//! Job specification: CLI flags merged over an optional JSON config file,
//! validated against the library's parameter constraints before execution.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use qwalk_core::{DisorderMode, DisorderParams, RunConfig, SweepConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Static,
    Dynamic,
}

impl From<ModeArg> for DisorderMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Static => DisorderMode::Static,
            ModeArg::Dynamic => DisorderMode::Dynamic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Csv,
    Json,
}

/// Flags shared by the run-shaped commands. Every physics flag is optional
/// here; required ones are enforced after merging with the config file.
#[derive(Debug, Clone, Args)]
pub struct RunFlags {
    /// Disorder mode: static (one jump set per run) or dynamic (fresh each step)
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Cycle size (channels); defaults to 2T+16
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Jump size, 0 < j < N
    #[arg(long)]
    pub j: Option<usize>,
    /// Pair-error probability in [0, 1]
    #[arg(long)]
    pub p: Option<f64>,
    /// Timesteps
    #[arg(long = "T")]
    pub steps: Option<usize>,
    /// Monte Carlo runs
    #[arg(long = "R")]
    pub runs: Option<usize>,
    /// Master seed (default 0)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Snapshot stride (default 1)
    #[arg(long = "record-every")]
    pub record_every: Option<usize>,
    /// Injection channel as a half-integer (default 0.5)
    #[arg(long = "initial-channel", allow_hyphen_values = true)]
    pub initial_channel: Option<f64>,
    /// Output path prefix
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format (default csv)
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Worker threads (default: all cores)
    #[arg(long, env = "QWALK_THREADS")]
    pub threads: Option<usize>,
    /// JSON config file; flags override file values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Permit N < 2T+2
    #[arg(long)]
    pub allow_wraparound: bool,
}

/// JSON config file mirror of the flags (all optional).
#[derive(Debug, Clone, Default, Deserialize)]
pub struct FileConfig {
    pub mode: Option<ModeArg>,
    #[serde(alias = "N")]
    pub n: Option<usize>,
    pub j: Option<usize>,
    pub p: Option<f64>,
    #[serde(alias = "T")]
    pub steps: Option<usize>,
    #[serde(alias = "R")]
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub record_every: Option<usize>,
    pub initial_channel: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<FormatArg>,
    pub threads: Option<usize>,
    pub allow_wraparound: Option<bool>,
    pub grid: Option<PathBuf>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read config file {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::Validation(format!("invalid config file {}: {e}", path.display()))
        })
    }
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| {
        CliError::Validation(format!(
            "missing required parameter --{flag} (flag or config file)"
        ))
    })
}

/// Fully resolved simulate job. Serialized verbatim into output metadata,
/// so two invocations with the same spec write identical files;
/// thread count is deliberately not part of the spec.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SimulateSpec {
    pub mode: ModeArg,
    pub n: usize,
    pub j: usize,
    pub p: f64,
    pub steps: usize,
    pub runs: usize,
    pub seed: u64,
    pub record_every: usize,
    pub initial_channel: f64,
    pub allow_wraparound: bool,
    pub out: PathBuf,
    pub format: FormatArg,
}

impl SimulateSpec {
    pub fn resolve(flags: &RunFlags) -> Result<(Self, Option<usize>), CliError> {
        let file = FileConfig::load(flags.config.as_deref())?;
        let steps = require(flags.steps.or(file.steps), "T")?;
        let spec = SimulateSpec {
            mode: require(flags.mode.or(file.mode), "mode")?,
            n: flags
                .n
                .or(file.n)
                .unwrap_or_else(|| RunConfig::default_n(steps)),
            j: require(flags.j.or(file.j), "j")?,
            p: require(flags.p.or(file.p), "p")?,
            steps,
            runs: require(flags.runs.or(file.runs), "R")?,
            seed: flags.seed.or(file.seed).unwrap_or(0),
            record_every: flags.record_every.or(file.record_every).unwrap_or(1),
            initial_channel: flags
                .initial_channel
                .or(file.initial_channel)
                .unwrap_or(0.5),
            allow_wraparound: flags.allow_wraparound
                || file.allow_wraparound.unwrap_or(false),
            out: require(flags.out.clone().or(file.out), "out")?,
            format: flags.format.or(file.format).unwrap_or(FormatArg::Csv),
        };
        let threads = flags.threads.or(file.threads);
        Ok((spec, threads))
    }

    /// Build and validate the engine configuration.
    pub fn run_config(&self) -> Result<RunConfig, CliError> {
        let disorder = DisorderParams::new(self.n, self.j, self.p, self.mode.into())
            .map_err(|e| CliError::Validation(e.to_string()))?;
        let config = RunConfig {
            disorder,
            steps: self.steps,
            runs: self.runs,
            initial_channel: self.initial_channel,
            master_seed: self.seed,
            record_every: self.record_every,
            allow_wraparound: self.allow_wraparound,
        };
        config
            .validate()
            .map_err(|e| CliError::Validation(e.to_string()))?;
        Ok(config)
    }
}

/// Grid file for sweeps: lists of p and j values.
#[derive(Debug, Clone, Deserialize)]
pub struct GridFile {
    pub p: Vec<f64>,
    pub j: Vec<usize>,
}

impl GridFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read grid file {}: {e}", path.display()))
        })?;
        let grid: GridFile = serde_json::from_str(&text).map_err(|e| {
            CliError::Validation(format!("invalid grid file {}: {e}", path.display()))
        })?;
        if grid.p.is_empty() && grid.j.is_empty() {
            return Ok(grid);
        }
        if grid.p.is_empty() || grid.j.is_empty() {
            return Err(CliError::Validation(
                "grid file must list both p values and j values (or neither)".into(),
            ));
        }
        Ok(grid)
    }
}

/// Fully resolved sweep job.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SweepSpec {
    pub mode: ModeArg,
    pub n: usize,
    pub steps: usize,
    pub runs: usize,
    pub seed: u64,
    pub initial_channel: f64,
    pub allow_wraparound: bool,
    pub alpha: f64,
    pub beta: f64,
    pub p_values: Vec<f64>,
    pub j_values: Vec<usize>,
    pub out: PathBuf,
    pub format: FormatArg,
}

impl SweepSpec {
    pub fn resolve(
        flags: &RunFlags,
        grid: Option<&Path>,
        alpha: Option<f64>,
        beta: Option<f64>,
    ) -> Result<(Self, Option<usize>), CliError> {
        let file = FileConfig::load(flags.config.as_deref())?;
        let grid_path = grid
            .map(Path::to_path_buf)
            .or(file.grid.clone())
            .ok_or_else(|| CliError::Validation("missing required parameter --grid".into()))?;
        let grid = GridFile::load(&grid_path)?;
        let steps = require(flags.steps.or(file.steps), "T")?;
        let spec = SweepSpec {
            mode: require(flags.mode.or(file.mode), "mode")?,
            n: flags
                .n
                .or(file.n)
                .unwrap_or_else(|| RunConfig::default_n(steps)),
            steps,
            runs: require(flags.runs.or(file.runs), "R")?,
            seed: flags.seed.or(file.seed).unwrap_or(0),
            initial_channel: flags
                .initial_channel
                .or(file.initial_channel)
                .unwrap_or(0.5),
            allow_wraparound: flags.allow_wraparound
                || file.allow_wraparound.unwrap_or(false),
            alpha: alpha
                .or(file.alpha)
                .unwrap_or(qwalk_core::stats::DEFAULT_ALPHA),
            beta: beta
                .or(file.beta)
                .unwrap_or(qwalk_core::stats::DEFAULT_BETA),
            p_values: grid.p,
            j_values: grid.j,
            out: require(flags.out.clone().or(file.out), "out")?,
            format: flags.format.or(file.format).unwrap_or(FormatArg::Csv),
        };
        let threads = flags.threads.or(file.threads);
        Ok((spec, threads))
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            n: self.n,
            mode: self.mode.into(),
            steps: self.steps,
            runs: self.runs,
            initial_channel: self.initial_channel,
            master_seed: self.seed,
            allow_wraparound: self.allow_wraparound,
            alpha: self.alpha,
            beta: self.beta,
        }
    }
}
