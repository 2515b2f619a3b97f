//! Command-line front end for the nested interferometer library: config
//! parsing, command execution and text/CSV reports.

pub mod commands;
pub mod config;
pub mod report;

use thiserror::Error;

pub use commands::{
    parse_channels, parse_detector_groups, parse_time, run_report, Command, Outcome, Status,
};
pub use config::{parse_config, Format, RunConfig};
pub use report::{fmt_g, Report, Row};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {key}: {reason}")]
    Config { key: String, reason: String },
    #[error("usage error: {0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Domain(#[from] nested_mzi::Error),
}

impl CliError {
    /// 2 for configuration and usage problems, 1 for anything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config { .. } | Self::Usage(_) | Self::Io { .. } => 2,
            Self::Domain(_) => 1,
        }
    }
}
