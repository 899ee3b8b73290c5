//! The `franson` command line.
//!
//! ```text
//! franson <subcommand> [--config FILE] [--seed N] [--out PATH] [--format csv|json]
//! ```
//!
//! Parameter files are flat `key = value` text (see [`crate::config`]);
//! unknown keys are rejected. Outputs go to stdout unless `--out` is given,
//! in which case they are written to a temporary file and renamed into
//! place. JSON reports carry `schema_version`; CSV tables start with a
//! `# schema_version=N` comment.
//!
//! Exit codes: 0 on success, 2 for usage, configuration, input or I/O
//! errors, 3 for numerical failures.

mod commands;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, ParamFile};
use crate::report::SCHEMA_VERSION;

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "franson",
    version,
    about = "Frequency-shifted Franson interferometry toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Parameter file (flat key = value).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a fringe scan and estimate its visibility.
    FringeScan {
        #[command(flatten)]
        common: Common,
    },
    /// Simulate a coincidence stream and histogram successive gaps.
    BeatHistogram {
        #[command(flatten)]
        common: Common,
        /// Also write the raw timestamps here.
        #[arg(long)]
        stream_out: Option<PathBuf>,
    },
    /// Fit an inter-arrival histogram for the beat frequency.
    BeatFit {
        #[command(flatten)]
        common: Common,
        /// Histogram CSV written by `beat-histogram`.
        #[arg(long)]
        input: PathBuf,
    },
    /// Visibility versus which-path information over a range of resolutions.
    EraserTable {
        #[command(flatten)]
        common: Common,
    },
    /// Acousto-optic modulator quantities.
    AomCalc {
        #[command(flatten)]
        common: Common,
    },
    /// Visibility versus path offset under QM and multisimultaneity.
    RelativityScan {
        #[command(flatten)]
        common: Common,
    },
    /// Classify the time ordering of the two detections.
    TimingCheck {
        #[command(flatten)]
        common: Common,
    },
    /// Run a key-distribution simulation.
    QkdSim {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "phase")]
        scheme: String,
        #[arg(long, default_value_t = 10_000)]
        rounds: usize,
        /// Write the per-round trace as CSV here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] crate::Error),
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(e) if !e.is_input_error() => EXIT_NUMERICAL,
            _ => EXIT_INPUT,
        }
    }

    fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            reason: err.to_string(),
        }
    }
}

/// Parse `argv` (program name first), run the subcommand and return the
/// process exit code. Diagnostics go to stderr.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Resolved common options handed to each subcommand.
pub(crate) struct RunConfig {
    pub params: ParamFile,
    pub seed: u64,
    out: Option<PathBuf>,
    format: Option<Format>,
}

impl RunConfig {
    fn new(common: Common) -> Result<Self, CliError> {
        let params = match &common.config {
            Some(path) => ParamFile::load(path)?,
            None => ParamFile::default(),
        };
        Ok(RunConfig {
            params,
            seed: common.seed.unwrap_or(DEFAULT_SEED),
            out: common.out,
            format: common.format,
        })
    }

    /// Resolve the output format, rejecting one the subcommand lacks.
    fn format(
        &self,
        default: Format,
        supported: &[Format],
        name: &str,
    ) -> Result<Format, CliError> {
        let f = self.format.unwrap_or(default);
        if supported.contains(&f) {
            Ok(f)
        } else {
            Err(CliError::Usage(
                format!("{name} does not support --format {f:?}").to_lowercase(),
            ))
        }
    }

    pub fn emit(&self, bytes: &[u8]) -> Result<(), CliError> {
        match &self.out {
            Some(path) => write_atomic(path, bytes),
            None => std::io::stdout()
                .write_all(bytes)
                .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
        }
    }
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema_version: u32,
    #[serde(flatten)]
    body: &'a T,
}

pub(crate) fn json_bytes<T: Serialize>(body: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(&Versioned {
        schema_version: SCHEMA_VERSION,
        body,
    })
    .map_err(|e| CliError::Usage(format!("cannot serialize report: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Write `bytes` to a sibling temporary file, then rename it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::FringeScan { common } => commands::fringe_scan(RunConfig::new(common)?),
        Command::BeatHistogram { common, stream_out } => {
            commands::beat_histogram(RunConfig::new(common)?, stream_out.as_deref())
        }
        Command::BeatFit { common, input } => commands::beat_fit(RunConfig::new(common)?, &input),
        Command::EraserTable { common } => commands::eraser_table(RunConfig::new(common)?),
        Command::AomCalc { common } => commands::aom_calc(RunConfig::new(common)?),
        Command::RelativityScan { common } => commands::relativity_scan(RunConfig::new(common)?),
        Command::TimingCheck { common } => commands::timing_check(RunConfig::new(common)?),
        Command::QkdSim {
            common,
            scheme,
            rounds,
            trace,
        } => commands::qkd_sim(RunConfig::new(common)?, &scheme, rounds, trace.as_deref()),
    }
}
