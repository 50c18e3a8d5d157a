// Copyright 2026 The qslkit Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QslError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("not a density matrix: {0}")]
    InvalidState(String),

    #[error(
        "quadrature did not converge on [{a}, {b}]: value {value:e}, error estimate {err_estimate:e}"
    )]
    QuadratureFailed {
        a: f64,
        b: f64,
        value: f64,
        err_estimate: f64,
    },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<QslError>,
    },
}

impl QslError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        QslError::InvalidInput(msg.into())
    }

    pub(crate) fn context(self, context: impl Into<String>) -> Self {
        QslError::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping any context wrappers.
    pub fn root(&self) -> &QslError {
        match self {
            QslError::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// Stable short code used in machine-readable error records.
    pub fn code(&self) -> &'static str {
        match self.root() {
            QslError::InvalidInput(_) => "invalid_input",
            QslError::InvalidState(_) => "invalid_state",
            QslError::QuadratureFailed { .. } => "quadrature_failed",
            QslError::Unsupported(_) => "unsupported",
            QslError::Context { .. } => unreachable!(),
        }
    }
}

pub type Result<T> = std::result::Result<T, QslError>;
