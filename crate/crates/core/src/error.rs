use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("empty expression")]
    EmptyInput,

    #[error("domain error in `{node}` at t = {t}")]
    Domain { node: String, t: f64 },

    #[error("caustic at t = {t}: beta = {beta:e}, alpha = {alpha:e}")]
    Caustic { t: f64, beta: f64, alpha: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("time {t} outside [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("mode index {0} outside 0..=60")]
    ModeOutOfRange(usize),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid too coarse: 2nd/4th-order derivative mismatch {mismatch:e} exceeds {limit:e}")]
    GridTooCoarse { mismatch: f64, limit: f64 },

    #[error("grid too small: envelope {envelope:e} at the boundary exceeds 1e-10")]
    GridTooSmall { envelope: f64 },

    #[error("field does not decay at the boundary (|f| = {value:e} at t = {t})")]
    BoundaryDecay { value: f64, t: f64 },

    #[error("singular band: pivot {pivot:e} at row {row}")]
    SingularBand { pivot: f64, row: usize },

    #[error("non-hermitian residue {residue:e} in a real expectation value")]
    NonHermitianResidue { residue: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("adaptive quadrature did not converge on [{start}, {end}]")]
    QuadratureNonConvergence { start: f64, end: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Syntax { .. }
            | Error::UnknownIdentifier { .. }
            | Error::EmptyInput
            | Error::Config(_)
            | Error::Precondition(_)
            | Error::ModeOutOfRange(_)
            | Error::InvalidGrid(_)
            | Error::Io(_) => 2,
            Error::Caustic { .. } => 3,
            _ => 4,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
