//! Process exit codes and the mapping from library errors onto them.

use std::fmt;

use fblsched::io::DocumentError;
use fblsched::Error;

pub const OK: u8 = 0;
/// Anything not covered below.
pub const INTERNAL: u8 = 1;
// 2 is clap's code for bad flags.
pub const IO: u8 = 3;
/// Malformed or rejected instance, schedule or plan document.
pub const INVALID_DOCUMENT: u8 = 4;
pub const INFEASIBLE: u8 = 5;
/// `τ` outside the convexity range, or a convex-only solver on a general instance.
pub const NOT_CONVEX: u8 = 6;
/// The solver hit its iteration cap or stalled above the KKT tolerance.
pub const NO_CONVERGENCE: u8 = 7;

/// An error paired with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Self {
            code,
            error: error.into(),
        }
    }

    pub fn context(self, what: impl fmt::Display) -> Self {
        Self {
            code: self.code,
            error: self.error.context(what.to_string()),
        }
    }
}

pub fn code_of(e: &Error) -> u8 {
    match e {
        Error::Infeasible(_) | Error::InfeasiblePower { .. } => INFEASIBLE,
        Error::TauOutOfRange { .. } | Error::NotConvexMode => NOT_CONVEX,
        Error::InvalidPacket { .. }
        | Error::InvalidLink(_)
        | Error::EmptyInstance
        | Error::FirstArrivalNotZero(_)
        | Error::NotFifo { .. }
        | Error::NotSingleSchedulingInterval { .. }
        | Error::InvalidModel(_)
        | Error::Domain { .. } => INVALID_DOCUMENT,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::new(code_of(&e), e)
    }
}

impl From<DocumentError> for Failure {
    fn from(e: DocumentError) -> Self {
        let code = match &e {
            DocumentError::Io { .. } => IO,
            DocumentError::Parse { .. } => INVALID_DOCUMENT,
            DocumentError::Invalid { source, .. } => code_of(source),
        };
        Self::new(code, e)
    }
}
