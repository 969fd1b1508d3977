use thiserror::Error;

use cutleak_core::transcript::TranscriptError;
use cutleak_eval::EvalError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const CONFIG: i32 = 3;
    pub const PARSE: i32 = 4;
    pub const EVAL: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("config error in `{field}`: {msg}")]
    Config { field: String, msg: String },
    #[error("parse error at {source_name} line {line}: {msg}")]
    Parse { source_name: String, line: usize, msg: String },
    #[error("evaluation failed: {0}")]
    Eval(String),
}

impl CliError {
    pub fn config(field: &str, msg: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            msg: msg.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => exit::IO,
            CliError::Config { .. } => exit::CONFIG,
            CliError::Parse { .. } => exit::PARSE,
            CliError::Eval(_) => exit::EVAL,
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Eval(e.to_string())
    }
}

impl From<TranscriptError> for CliError {
    fn from(e: TranscriptError) -> Self {
        match e {
            TranscriptError::Io(io) => CliError::Io(io),
            TranscriptError::Parse { line, msg } => CliError::Parse {
                source_name: "corpus".into(),
                line,
                msg,
            },
            TranscriptError::Version { found, expected } => CliError::Parse {
                source_name: "corpus".into(),
                line: 1,
                msg: format!("schema version {found}, expected {expected}"),
            },
            other => CliError::Eval(other.to_string()),
        }
    }
}
