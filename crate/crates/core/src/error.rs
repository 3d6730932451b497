use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("unknown {kind} token {token:?}")]
    UnknownToken { kind: &'static str, token: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed corpus JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported schema_version {0:?} (expected \"1\")")]
    Version(String),
    #[error("paper id {0:?} is not an identifier")]
    PaperId(String),
    #[error("paper {paper}, pair {index}, {side} spec: {source}")]
    InvalidSpec {
        paper: String,
        index: usize,
        side: &'static str,
        #[source]
        source: SpecError,
    },
    #[error("paper {paper}, pair {index}: positive and negative specs are identical")]
    IdenticalPair { paper: String, index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleErrorKind {
    Syntax(String),
    DuplicateName(String),
    UnknownAttribute(String),
    TypeMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct RuleError {
    pub line: usize,
    pub kind: RuleErrorKind,
}

impl fmt::Display for RuleErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            RuleErrorKind::DuplicateName(n) => write!(f, "duplicate constraint name {n}"),
            RuleErrorKind::UnknownAttribute(m) => write!(f, "unknown attribute: {m}"),
            RuleErrorKind::TypeMismatch(m) => write!(f, "type mismatch: {m}"),
        }
    }
}

/// Every problem found in one rule source.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct RuleErrors(pub Vec<RuleError>);

impl fmt::Display for RuleErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LayoutError {
    #[error("layout mismatch: expected {expected} soft constraints, found {found}")]
    Length { expected: usize, found: usize },
    #[error("layout mismatch at index {index}: {expected} vs {found}")]
    Name {
        index: usize,
        expected: String,
        found: String,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnError {
    #[error("no training pairs")]
    EmptyPairs,
    #[error("pair list is empty")]
    EmptyEvaluation,
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("training pair {index} violates hard constraints: {violations:?}")]
    HardInvalid {
        index: usize,
        violations: Vec<String>,
    },
    #[error("training pair {index} is not statistically significant")]
    NotSignificant { index: usize },
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("unknown trainer {0:?}")]
    UnknownTrainer(String),
    #[error("training produced non-finite weights")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecommendError {
    #[error("unknown field {0:?}")]
    UnknownField(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("shift vector kind {found} where {expected} is required")]
    WrongKind {
        expected: &'static str,
        found: &'static str,
    },
    #[error("need at least {needed} inputs, found {found}")]
    TooFew { needed: usize, found: usize },
    #[error("vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("zero variance: correlation is undefined")]
    ZeroVariance,
    #[error("no model for paper {0:?}")]
    UnknownPaper(String),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Recommend(#[from] RecommendError),
}

/// Umbrella error for the pipelines that touch every module.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Rules(#[from] RuleErrors),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Recommend(#[from] RecommendError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("unknown analysis {0:?}")]
    UnknownAnalysis(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Validation problems are the caller's fault; everything else is ours.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
