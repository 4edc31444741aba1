use std::fmt;

use kp_core::Error;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Config = 2,
    Solver = 3,
    Range = 4,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub kind: ExitKind,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Config,
            message: message.into(),
        }
    }

    pub fn range(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Range,
            message: message.into(),
        }
    }

    /// Wraps a library error raised while running `operation`.
    pub fn from_core(operation: &str, error: &Error) -> Self {
        Self {
            kind: classify(error),
            message: format!("{operation}: {error}"),
        }
    }

    pub fn code(&self) -> i32 {
        self.kind as i32
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn classify(error: &Error) -> ExitKind {
    match error {
        Error::AtParameter { source, .. } => classify(source),
        Error::NonPositiveLength(_)
        | Error::LengthMismatch { .. }
        | Error::NonMonotonePositions { .. }
        | Error::PositionOutOfBox { .. }
        | Error::InvalidParameter(_)
        | Error::GridTooCoarse { .. } => ExitKind::Config,
        Error::OutOfDomain { .. } => ExitKind::Range,
        _ => ExitKind::Solver,
    }
}
