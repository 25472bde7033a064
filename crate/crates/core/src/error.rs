use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by every module of the crate.
///
/// The CLI maps each variant onto a process exit code with [`Error::exit_code`].
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad magic: expected MMK1, found {0:?}")]
    BadMagic(Vec<u8>),
    #[error("truncated container: {0}")]
    Truncated(String),
    #[error("header mismatch: {0}")]
    HeaderMismatch(String),
    #[error("unsupported dtype {0:?}")]
    UnsupportedDtype(String),
    #[error("invalid tensor name: {0}")]
    InvalidName(String),
    #[error("tensor name collision: {0}")]
    NameCollision(String),
    #[error("tensor name sets differ: {0}")]
    NameMismatch(String),
    #[error("shape mismatch for {name}: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        name: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("base digest mismatch: task vector built from {expected}, base is {found}")]
    DigestMismatch { expected: String, found: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("zero-norm vector: {0}")]
    ZeroNorm(String),
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("no convergence after {iterations} iterations (achieved ratio {achieved_ratio})")]
    NonConvergence { iterations: usize, achieved_ratio: f64 },
    #[error("numerical fault: {0}")]
    NumericalFault(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("csv error: {0}")]
    Csv(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// 2 for input validation, 3 for numerical non-convergence, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 4,
            Error::NonConvergence { .. } | Error::NumericalFault(_) => 3,
            _ => 2,
        }
    }

    /// Short machine-readable tag used in `ERR:` lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::BadMagic(_) => "bad_magic",
            Error::Truncated(_) => "truncated",
            Error::HeaderMismatch(_) => "header_mismatch",
            Error::UnsupportedDtype(_) => "unsupported_dtype",
            Error::InvalidName(_) => "invalid_name",
            Error::NameCollision(_) => "name_collision",
            Error::NameMismatch(_) => "name_mismatch",
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::DigestMismatch { .. } => "digest_mismatch",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::ZeroNorm(_) => "zero_norm",
            Error::UndefinedRatio(_) => "undefined_ratio",
            Error::Degenerate(_) => "degenerate",
            Error::NonConvergence { .. } => "non_convergence",
            Error::NumericalFault(_) => "numerical_fault",
            Error::Config(_) => "config",
            Error::Csv(_) => "csv",
        }
    }
}
