//! JSON documents, CSV tables and SVG plots.

pub mod documents;
pub mod svg;
pub mod tables;

use std::path::{Path, PathBuf};

use crate::error::Error;

pub use documents::{
    parse_instance, parse_plan, parse_schedule, read_instance, read_plan, read_schedule, to_json,
    write_json, InstanceDocument, LinkDocument, PacketDocument, ScheduleDocument,
};
pub use svg::{LinePlot, PlotSeries};
pub use tables::{
    bounds_csv, events_csv, policies_csv, policy_trials_csv, sweep_csv, sweep_trials_csv,
    write_text,
};

/// Failure while reading, validating or writing a document.
#[derive(Debug, thiserror::Error)]
pub enum DocumentError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// Malformed JSON or a field of the wrong shape.
    #[error("{pointer}: {message}")]
    Parse { pointer: String, message: String },
    /// Well-formed but rejected by validation.
    #[error("{pointer}: {source}")]
    Invalid { pointer: String, source: Error },
}

impl DocumentError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// The validation error behind this failure, if any.
    pub fn validation(&self) -> Option<&Error> {
        match self {
            Self::Invalid { source, .. } => Some(source),
            _ => None,
        }
    }
}

/// JSON pointer (RFC 6901) of a serde path.
pub(crate) fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}
