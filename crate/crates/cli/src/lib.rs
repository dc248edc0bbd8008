//! Command-line front end for the `tscalc` kernel: parses time-scale specs
//! and coefficient expressions, runs the kernel and prints CSV tables or
//! verification reports.

pub mod expr;
pub mod job;
pub mod run;
pub mod tsspec;
pub mod verify;

use thiserror::Error;

pub use expr::{parse_expr, Expr, ExprError};
pub use job::{Command, Job, JobSpec};
pub use run::{run, Outcome};
pub use tsspec::{parse_timescale, SpecError};

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status for failures not covered by the other codes.
pub const EXIT_OTHER: i32 = 1;
/// Exit status for malformed input: flags, spec files, expressions, clauses.
pub const EXIT_PARSE: i32 = 2;
/// Exit status for well-formed input that violates a precondition.
pub const EXIT_VALIDATION: i32 = 3;
/// Exit status for infinite products that fail to converge.
pub const EXIT_DIVERGENCE: i32 = 4;

/// Every failure the front end reports, grouped by exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{what}: {message}")]
    Parse { what: String, message: String },
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Divergence(tscalc::Error),
    #[error("{0}")]
    Kernel(tscalc::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn parse(what: impl Into<String>, message: impl ToString) -> Self {
        CliError::Parse { what: what.into(), message: message.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } => EXIT_PARSE,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Divergence(_) => EXIT_DIVERGENCE,
            CliError::Kernel(_) | CliError::Io { .. } => EXIT_OTHER,
        }
    }
}

impl From<tscalc::Error> for CliError {
    fn from(e: tscalc::Error) -> Self {
        use tscalc::Error as E;
        match e {
            E::Divergent { .. } | E::FactorCap(_) => CliError::Divergence(e),
            E::InvalidSegment(_)
            | E::InvalidTimeScale(_)
            | E::NotInTimeScale(_)
            | E::NotRegular(_)
            | E::InvalidAlpha(_)
            | E::OutsideKappa { .. }
            | E::Unbounded { .. }
            | E::DenseSpan(_)
            | E::AccumulationInSpan(_)
            | E::NotRegressive { .. }
            | E::DegenerateAlpha(_)
            | E::NotScattered(_)
            | E::Backward { .. }
            | E::Unsupported(_) => CliError::Validation(e.to_string()),
            _ => CliError::Kernel(e),
        }
    }
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        if e.is_syntax() {
            CliError::parse("--ts", e)
        } else {
            CliError::Validation(e.to_string())
        }
    }
}
