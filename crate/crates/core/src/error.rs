//! Crate-wide error type.

use std::fmt;

/// One violated invariant found while validating a network model.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    /// Which arc/node the problem was found on.
    pub context: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.context, self.message)
    }
}

fn join_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| format!("  - {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{what} (got {value})")]
    Domain { what: &'static str, value: f64 },

    #[error("vacuum state carries nonzero momentum (rho = 0, q = {q})")]
    VacuumMomentum { q: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("network validation failed:\n{}", join_diagnostics(.0))]
    Validation(Vec<Diagnostic>),

    #[error("CFL violation on arc {arc}: dt*lambda/dx = {ratio}")]
    CflViolation { arc: String, ratio: f64 },

    #[error("negative density on arc {arc}, cell {cell}: rho = {rho}")]
    NegativeDensity { arc: String, cell: usize, rho: f64 },

    #[error("junction solver reported an unsupported case: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(what: &'static str, value: f64) -> Self {
        Error::Domain { what, value }
    }

    /// True for errors caused by a bad configuration rather than a failing run.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Validation(_) | Error::Usage(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
