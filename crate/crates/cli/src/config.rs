//! Loading graphs, groups and assignments from built-in names or JSON files, and the
//! mapping from failures to exit codes.

use std::path::Path;

use loopsoup::covering::MAssignment;
use loopsoup::{RepresentedGroup, WeightedGraph};

use crate::{EXIT_IO, EXIT_VALIDATION};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] loopsoup::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } => EXIT_IO,
            CliError::Core(loopsoup::Error::Io(_)) | CliError::Core(loopsoup::Error::Parse(_)) => EXIT_IO,
            CliError::Validation(_) | CliError::Core(_) => EXIT_VALIDATION,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// A value that names a file rather than a built-in.
fn is_file_spec(spec: &str) -> bool {
    spec.ends_with(".json") || spec.contains('/') || Path::new(spec).is_file()
}

fn read(path: &str) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_string(), source })
}

/// JSON syntax and schema errors carry their line and column; anything else is a
/// validation failure of well-formed input.
fn from_file<T>(path: &str, parse: impl FnOnce(&str) -> loopsoup::Result<T>) -> CliResult<T> {
    let text = read(path)?;
    parse(&text).map_err(|e| match e {
        loopsoup::Error::Parse(j) => {
            CliError::Parse { path: path.to_string(), message: format!("line {}, column {}: {j}", j.line(), j.column()) }
        }
        other => CliError::Core(other),
    })
}

pub fn load_graph(spec: &str) -> CliResult<WeightedGraph> {
    if is_file_spec(spec) {
        from_file(spec, WeightedGraph::from_json)
    } else {
        Ok(WeightedGraph::builtin(spec)?)
    }
}

pub fn load_group(spec: &str) -> CliResult<RepresentedGroup> {
    if is_file_spec(spec) {
        from_file(spec, RepresentedGroup::from_json)
    } else {
        Ok(RepresentedGroup::builtin(spec)?)
    }
}

pub fn load_assignment(spec: &str, g: &WeightedGraph, rg: &RepresentedGroup, seed: Option<u64>) -> CliResult<MAssignment> {
    match spec {
        "identity" => Ok(MAssignment::identity(g, &rg.group)),
        "random" => {
            let seed = seed.ok_or_else(|| CliError::Validation("--assignment random needs --seed".into()))?;
            Ok(MAssignment::random(g, &rg.group, seed))
        }
        path => from_file(path, |text| MAssignment::from_json(text, g, &rg.group)),
    }
}

pub fn require_seed(seed: Option<u64>, command: &str) -> CliResult<u64> {
    seed.ok_or_else(|| CliError::Validation(format!("{command} is stochastic and needs --seed")))
}
