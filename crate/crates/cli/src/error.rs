use std::path::PathBuf;

use bktc_core::PricingError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("ConfigError{}: {reason}", .field.as_deref().map(|f| format!(" in `{f}`")).unwrap_or_default())]
    Config {
        field: Option<String>,
        reason: String,
    },

    #[error("WellPosednessViolation: {0}")]
    WellPosedness(PricingError),

    #[error("NonFiniteValue: {0}")]
    NonFinite(PricingError),

    #[error("IoError at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config { .. } => 3,
            CliError::WellPosedness(_) => 4,
            CliError::NonFinite(_) => 5,
        }
    }
}

impl From<PricingError> for CliError {
    fn from(e: PricingError) -> Self {
        match e {
            PricingError::WellPosednessViolation { .. } => CliError::WellPosedness(e),
            PricingError::NonFiniteValue { .. } => CliError::NonFinite(e),
            PricingError::InvalidParams { field, .. } | PricingError::InvalidSpec { field, .. } => {
                CliError::Config {
                    field: Some(field.into()),
                    reason: e.to_string(),
                }
            }
            PricingError::MissingPayoff | PricingError::PayoffLength { .. } => CliError::Config {
                field: Some("instrument.custom_payoff".into()),
                reason: e.to_string(),
            },
            PricingError::InvalidSweep(_) => CliError::Config {
                field: Some("sweep".into()),
                reason: e.to_string(),
            },
        }
    }
}
