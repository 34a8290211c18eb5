use thiserror::Error;

use crate::model::Diagnostic;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("model failed validation with {} diagnostic(s):\n{}", .0.len(), render_diagnostics(.0))]
    Validation(Vec<Diagnostic>),
}

fn render_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Error, PartialEq)]
pub enum FitnessError {
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("{0} clusters exceed the maximum of {1} layers")]
    TooManyLayers(usize, usize),
    #[error("assignment and graph disagree: {0}")]
    InconsistentInputs(String),
    #[error("edge {from} -> {to} is not an architecture violation")]
    NotAViolation { from: String, to: String },
}

#[derive(Debug, Error, PartialEq)]
pub enum ReconstructionError {
    #[error("cannot reconstruct an architecture for a model without units")]
    EmptyModel,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Fitness(#[from] FitnessError),
}

#[derive(Debug, Error, PartialEq)]
pub enum RefactorError {
    #[error("no member {0}")]
    NoSuchMember(String),
    #[error("no method {0}")]
    NoSuchMethod(String),
    #[error("no unit {0}")]
    NoSuchUnit(String),
    #[error("{0} already lives in the target unit")]
    TargetIsSource(String),
    #[error("parameter index {index} out of range for {method} ({count} parameters)")]
    BadParamIndex {
        method: String,
        index: usize,
        count: usize,
    },
    #[error("the violation report lists no violations")]
    NoViolations,
    #[error("cannot select from an empty candidate population")]
    EmptyPopulation,
    #[error("architecture does not match the model: {0}")]
    ArchitectureMismatch(String),
    #[error("behavior ledger mismatch after {transformation}: {detail}")]
    LedgerViolation {
        transformation: String,
        detail: String,
    },
}

#[derive(Debug, Error, PartialEq)]
pub enum LabError {
    #[error("model is not an MVC fixture: {0}")]
    NotAFixture(String),
    #[error("exhaustive search supports at most {limit} units, got {units}")]
    TooLarge { units: usize, limit: usize },
    #[error("no fresh upward unit pair left for injection {0}")]
    InjectionExhausted(usize),
    #[error(transparent)]
    Reconstruction(#[from] ReconstructionError),
    #[error(transparent)]
    Refactor(#[from] RefactorError),
}
