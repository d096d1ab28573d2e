// Copyright 2026 The Veracity Bond Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;
use veracity_core::{AnalysisError, ContestError, SimulationError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("reference table mismatch in {cells} cell(s):\n{details}")]
    Mismatch { cells: usize, details: String },
    #[error("replay divergence: {0}")]
    Divergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Mismatch { .. } => 2,
            CliError::Divergence(_) => 3,
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ContestError> for CliError {
    fn from(e: ContestError) -> Self {
        match e {
            ContestError::ReplayDivergence => CliError::Divergence(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<SimulationError> for CliError {
    fn from(e: SimulationError) -> Self {
        match e {
            SimulationError::Contest(c) => c.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}
