//! Error types shared across the crate.

use thiserror::Error;

/// What went wrong while parsing a rule file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParseErrorKind {
    Syntax,
    UnknownAlphabet,
    UnknownSymbol,
    BadRotation,
    NonExhaustive,
    Overlap,
    NegativeLetter,
    Continuity,
    ArityMismatch,
    EmptyRhs,
    DuplicateAlphabet,
    MissingAlphabet,
}

/// Parse error with a 1-based source position.
#[derive(Debug, Clone, Error, serde::Serialize)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
    pub message: String,
}

impl ParseError {
    pub fn new(
        line: usize,
        column: usize,
        kind: ParseErrorKind,
        message: impl Into<String>,
    ) -> Self {
        ParseError {
            line,
            column,
            kind,
            message: message.into(),
        }
    }
}

/// Errors from structural operations on specs and letters.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpecError {
    #[error("letter {0} does not belong to the declared alphabet")]
    ForeignLetter(String),
    #[error("letters from different alphabet families: {0} vs {1}")]
    MixedFamilies(String, String),
    #[error("no rule matches letter {0}")]
    NoRuleMatch(String),
    #[error("cutoff {0} too small; need at least {1}")]
    CutoffTooSmall(u64, u64),
    #[error("operation not supported for this alphabet family: {0}")]
    Unsupported(String),
}

/// Errors from supertile expansion.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum EngineError {
    #[error("expansion budget exceeded: {estimated} letters estimated, budget {budget}")]
    BudgetExceeded { estimated: u128, budget: u128 },
    #[error(transparent)]
    Spec(#[from] SpecError),
}

/// Errors from language-table construction.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum LangError {
    #[error(
        "no valid supertile depth: min |rho^k| stays below {target} (non-growing substitution)"
    )]
    NoValidP { target: usize, max_checked: usize },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Spec(#[from] SpecError),
}
