use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use mpquic_pns::netsim::TraceSchedule;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("cannot read trace {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: {source}")]
    Invalid {
        path: PathBuf,
        line: usize,
        source: mpquic_pns::Error,
    },
}

/// Reads a trace file with one millisecond timestamp per line.
pub fn load_trace(path: &Path) -> Result<TraceSchedule, TraceError> {
    let text = fs::read_to_string(path).map_err(|source| TraceError::Io {
        path: path.to_owned(),
        source,
    })?;
    TraceSchedule::parse(&text).map_err(|(line, source)| TraceError::Invalid {
        path: path.to_owned(),
        line,
        source,
    })
}
