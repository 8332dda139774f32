//! Command-line front end: symbol expression parsing, the sequence
//! descriptor mini-language, and the experiment runner.

pub mod descriptor;
pub mod expr;
pub mod runner;

use diagsym_core::Error as CoreError;

/// CLI-level error with its process exit code: 2 for usage and configuration
/// problems, 1 for computational negatives (failed extractions, violated
/// preconditions and the like). Verdict failures are not errors; they only
/// set the exit code.
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub kind: &'static str,
    pub exit_code: i32,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { message: message.into(), kind: "usage", exit_code: 2 }
    }

    pub fn expr(context: &str) -> impl Fn(crate::expr::ParseError) -> CliError + '_ {
        move |e| CliError {
            message: format!("in `{context}`: {e}"),
            kind: "syntax",
            exit_code: 2,
        }
    }

    /// Errors emitted as JSON on standard error.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.message, "kind": self.kind }).to_string()
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        let (kind, exit_code) = match &err {
            // Negative computational outcomes.
            CoreError::ExtractionFailure { .. } => ("extraction-failure", 1),
            CoreError::ApproximantStall { .. } => ("approximant-stall", 1),
            CoreError::PreconditionFailed { .. } => ("precondition", 1),
            CoreError::NotMonotone { .. } => ("monotonicity", 1),
            CoreError::RealnessViolation { .. } => ("realness", 1),
            CoreError::NotHermitian { .. } => ("hermitian", 1),
            CoreError::EigensolveDiverged { .. } => ("eigensolve", 1),
            // Configuration and environment problems.
            _ => ("config", 2),
        };
        CliError { message: err.to_string(), kind, exit_code }
    }
}
