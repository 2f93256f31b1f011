use thiserror::Error;

/// Position of a token in model source text, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lexical,
    Syntax,
    UnboundSymbol,
    Semantic,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {kind:?} error: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub pos: Pos,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate mode {0}")]
    DuplicateMode(String),
    #[error("zero occupancy in mode {0}")]
    ZeroOccupancy(String),
    #[error("invalid cutoffs: {0}")]
    InvalidCutoffs(String),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unknown builtin model `{0}`")]
    UnknownBuiltin(String),
    #[error("unknown particle `{0}`")]
    UnknownParticle(String),
    #[error("sector has {size} states, above the cap of {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("interpreter: {0}")]
    Interpreter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
