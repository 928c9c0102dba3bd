//! JSONL files: traces hold one event per line, linearization files one op id
//! per line.

use std::fs;
use std::path::Path;

use crate::types::{Event, History, Linearization, OpId};

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("linearization names {0}, which is not in the trace")]
    UnknownOp(OpId),
}

pub fn history_to_jsonl(h: &History) -> String {
    let mut s = String::new();
    for e in h.events() {
        s.push_str(&serde_json::to_string(e).expect("events serialize"));
        s.push('\n');
    }
    s
}

pub fn history_from_jsonl(text: &str) -> Result<History, TraceError> {
    let mut events = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let e: Event = serde_json::from_str(line).map_err(|err| TraceError::Parse {
            line: i + 1,
            msg: err.to_string(),
        })?;
        events.push(e);
    }
    Ok(History::from_events(events))
}

pub fn lin_to_jsonl(lin: &Linearization) -> String {
    lin.op_ids().iter().map(|id| format!("{}\n", id.0)).collect()
}

pub fn lin_from_jsonl(h: &History, text: &str) -> Result<Linearization, TraceError> {
    let mut ids = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let id: u64 = serde_json::from_str(line).map_err(|err| TraceError::Parse {
            line: i + 1,
            msg: err.to_string(),
        })?;
        ids.push(OpId(id));
    }
    Linearization::from_ids(h, &ids).map_err(TraceError::UnknownOp)
}

fn read(path: &Path) -> Result<String, TraceError> {
    fs::read_to_string(path).map_err(|source| TraceError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_file(path: &Path, text: &str) -> Result<(), TraceError> {
    fs::write(path, text).map_err(|source| TraceError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_trace(path: &Path) -> Result<History, TraceError> {
    history_from_jsonl(&read(path)?)
}

pub fn write_trace(path: &Path, h: &History) -> Result<(), TraceError> {
    write_file(path, &history_to_jsonl(h))
}

pub fn read_lin(path: &Path, h: &History) -> Result<Linearization, TraceError> {
    lin_from_jsonl(h, &read(path)?)
}
