//! JSON space files and report writers.
//!
//! A space file looks like
//!
//! ```json
//! { "name": "path3", "labels": ["a", "b", "c"],
//!   "d": [[0, 1, 2], [1, 0, 1], [2, 1, 0]],
//!   "tau": [0, 1, 0], "zero_set": ["a", "c"] }
//! ```
//!
//! `tau` and `zero_set` are optional. Numbers are written in shortest
//! round-trip form and parsed exactly, so write-then-read is the identity.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tml_core::{FiniteMetricSpace, TimedMetricSpace, ValidationError, DEFAULT_TOL};

use crate::report::{ReportFormat, ReportRow};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invalid space: {0}")]
    Validation(#[from] ValidationError),
}

impl IoError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io { path: path.to_path_buf(), source }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceFile {
    name: String,
    labels: Vec<String>,
    d: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    zero_set: Option<Vec<String>>,
}

/// Contents of a space file.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedSpace {
    Metric { name: String, space: FiniteMetricSpace },
    Timed { name: String, space: TimedMetricSpace },
}

impl LoadedSpace {
    pub fn name(&self) -> &str {
        match self {
            LoadedSpace::Metric { name, .. } | LoadedSpace::Timed { name, .. } => name,
        }
    }

    pub fn metric(&self) -> &FiniteMetricSpace {
        match self {
            LoadedSpace::Metric { space, .. } => space,
            LoadedSpace::Timed { space, .. } => space.base(),
        }
    }

    pub fn is_timed(&self) -> bool {
        matches!(self, LoadedSpace::Timed { .. })
    }

    /// The timed space, with `tau = 0` when the file has no time function.
    pub fn into_timed(self) -> TimedMetricSpace {
        match self {
            LoadedSpace::Metric { space, .. } => TimedMetricSpace::untimed(space),
            LoadedSpace::Timed { space, .. } => space,
        }
    }
}

fn from_serde(e: serde_json::Error) -> IoError {
    use serde_json::error::Category;
    match e.classify() {
        Category::Data => IoError::Schema(e.to_string()),
        _ => IoError::Parse { line: e.line(), column: e.column(), message: e.to_string() },
    }
}

/// Parses and validates a space file held in memory.
pub fn parse_space(text: &str, tol: f64) -> Result<LoadedSpace, IoError> {
    let file: SpaceFile = serde_json::from_str(text).map_err(from_serde)?;
    let n = file.labels.len();
    if file.d.len() != n {
        return Err(IoError::Schema(format!("{} labels but {} rows in `d`", n, file.d.len())));
    }
    let space = FiniteMetricSpace::new(file.labels, file.d, tol)?;
    let Some(tau) = file.tau else {
        if file.zero_set.is_some() {
            return Err(IoError::Schema("`zero_set` given without `tau`".into()));
        }
        return Ok(LoadedSpace::Metric { name: file.name, space });
    };
    let timed = TimedMetricSpace::new(space, tau, tol)?;
    if let Some(zero) = file.zero_set {
        let expected = zero_labels(&timed, tol);
        let mut given = zero.clone();
        given.sort();
        let mut want = expected.clone();
        want.sort();
        if given != want {
            return Err(IoError::Schema(format!(
                "`zero_set` lists {zero:?} but the zeros of `tau` are {expected:?}"
            )));
        }
    }
    Ok(LoadedSpace::Timed { name: file.name, space: timed })
}

fn zero_labels(t: &TimedMetricSpace, tol: f64) -> Vec<String> {
    t.zero_set(tol).into_iter().map(|i| t.base().label(i).to_string()).collect()
}

pub fn read_space(path: &Path) -> Result<LoadedSpace, IoError> {
    read_space_with_tol(path, DEFAULT_TOL)
}

pub fn read_space_with_tol(path: &Path, tol: f64) -> Result<LoadedSpace, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    parse_space(&text, tol)
}

/// Serializes a space. Timed spaces also record their zero set.
pub fn space_to_json(space: &LoadedSpace) -> String {
    let (x, tau) = match space {
        LoadedSpace::Metric { space, .. } => (space, None),
        LoadedSpace::Timed { space, .. } => (space.base(), Some(space)),
    };
    let file = SpaceFile {
        name: space.name().to_string(),
        labels: x.labels().to_vec(),
        d: x.to_matrix(),
        tau: tau.map(|t| t.times().to_vec()),
        zero_set: tau.map(|t| zero_labels(t, DEFAULT_TOL)),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("space files serialize");
    s.push('\n');
    s
}

pub fn write_space(space: &LoadedSpace, path: &Path) -> Result<(), IoError> {
    fs::write(path, space_to_json(space)).map_err(|e| IoError::io(path, e))
}

pub fn write_report(rows: &[ReportRow], path: &Path, format: ReportFormat) -> Result<(), IoError> {
    let bytes = crate::report::render(rows, format);
    let mut f = fs::File::create(path).map_err(|e| IoError::io(path, e))?;
    f.write_all(&bytes).map_err(|e| IoError::io(path, e))
}
