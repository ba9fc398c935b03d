//! Configuration ingestion, experiment subcommands and CSV/SVG emission for
//! the `kelly-market` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

pub use commands::{batch, ensure_passed, fit_gamma, simulate, verify, RunManifest, VerifySource};
pub use config::{AnalysisConfig, ExperimentConfig};
pub use error::{CliError, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "KELLY_MARKET_OUT";
