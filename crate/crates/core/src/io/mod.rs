//! File formats: config JSON, trace JSONL, metrics CSV, summary JSON, sweep
//! specs and SVG plots. Every writer emits UTF-8 with LF line endings, fixed
//! field order and shortest round-trip floats.

pub mod plot;
pub mod report;
pub mod sweep;
pub mod trace;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::GameConfig;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Format(String),
}

impl IoError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }

    pub fn parse(path: &Path, message: impl ToString) -> Self {
        Self::Parse { path: path.to_path_buf(), message: message.to_string() }
    }

    /// Parse errors mean bad input; the rest are filesystem failures.
    pub fn is_parse(&self) -> bool {
        matches!(self, IoError::Parse { .. } | IoError::Format(_))
    }
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|e| IoError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| IoError::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| IoError::io(path, e))
}

pub fn parse_config(text: &str, path: &Path) -> Result<GameConfig, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::parse(path, e))
}

pub fn load_config(path: &Path) -> Result<GameConfig, IoError> {
    parse_config(&read_text(path)?, path)
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

/// Shortest round-trip decimal for a float, as JSON would print it.
pub fn fmt_f64(x: f64) -> String {
    serde_json::to_string(&x).unwrap_or_else(|_| "null".into())
}
