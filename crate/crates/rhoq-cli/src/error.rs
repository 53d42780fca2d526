//! Error classification for process exit codes: 2 for configuration problems,
//! 3 for data problems, 4 for numerical failures.

use rhoq_core::detrended::DetrendError;
use rhoq_core::ingest::IngestError;
use rhoq_core::rolling::RollingError;
use rhoq_core::stats::StatsError;
use rhoq_core::synth::SynthError;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    Config = 2,
    Data = 3,
    Numeric = 4,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical error: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::Config,
            CliError::Data(_) => ExitCode::Data,
            CliError::Numeric(_) => ExitCode::Numeric,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        CliError::Numeric(msg.into())
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::InvalidInterval(_) | IngestError::InvalidCalendar(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<DetrendError> for CliError {
    fn from(e: DetrendError) -> Self {
        match e {
            // Wrong shapes and bounds are data problems (series too short for
            // the requested grid); failed numerics are numerical.
            DetrendError::DegenerateVariance { .. } | DetrendError::NonPositiveFluctuation { .. } => {
                CliError::Numeric(e.to_string())
            }
            DetrendError::InvalidQ(_) | DetrendError::EmptyQ | DetrendError::EmptyGrid => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::ConstantInput | StatsError::SingularRegression => {
                CliError::Numeric(e.to_string())
            }
            StatsError::TooFewRealizations(_) => CliError::Config(e.to_string()),
            StatsError::StatisticFailed { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<RollingError> for CliError {
    fn from(e: RollingError) -> Self {
        match e {
            RollingError::Detrend(inner) => inner.into(),
            RollingError::InvalidWindow(_) | RollingError::InvalidStep { .. } | RollingError::NoScales => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
