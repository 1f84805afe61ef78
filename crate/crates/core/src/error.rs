use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("zero polynomial has an undefined root set")]
    ZeroPolynomial,
    #[error("requires integer spectrum")]
    NonIntegerSpectrum,
    #[error("non-rational spectrum; run qdlts_reflection first")]
    NonRationalSpectrum,
    #[error("apply even/odd split first (non-positive base {0})")]
    NonPositiveBase(String),
    #[error("quantified formula; run QE first")]
    Quantified,
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("transition system is not deterministic")]
    NotDeterministic,
    #[error("transition relation is empty")]
    EmptyRelation,
    #[error("state lies outside the integer-spectrum subspace")]
    OutsideSubspace,
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("undeclared variable `{0}`")]
    Undeclared(String),
    #[error("nonlinear expression: {0}")]
    Nonlinear(String),
}

pub type Result<T> = std::result::Result<T, Error>;
