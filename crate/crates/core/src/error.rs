use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("field shape {found:?} does not match grid shape {expected:?}")]
    GridMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("coefficient vector of length {found} does not fit a basis of {expected} modes")]
    SizeMismatch { expected: usize, found: usize },

    #[error("could only bracket {found} of {requested} roots for angular order {n} below sigma = {ceiling}")]
    RootBracketing {
        n: u32,
        requested: usize,
        found: usize,
        ceiling: f64,
    },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("duplicate mode request (n = {n}, {parity}, k = {k})")]
    DuplicateMode {
        n: u32,
        parity: &'static str,
        k: u32,
    },

    #[error("non-finite state at t = {t} (step {step}){}", path.map(|p| format!(", path {p}")).unwrap_or_default())]
    BlowUp {
        t: f64,
        step: usize,
        path: Option<usize>,
    },

    #[error("linear solve failed: {0}")]
    Solver(String),

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
