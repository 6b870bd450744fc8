use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("kronecker product of an empty factor list")]
    EmptyKron,

    #[error("matrix is not Hermitian (max |H - H^dag| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max |U^dag U - I| = {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("qubit count {0} out of supported range")]
    QubitRange(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("decomposition failed validation: {0}")]
    Decomposition(String),

    #[error("channel is not CPTP: {0}")]
    NotCptp(String),

    #[error("integration failed: trace drift {drift:.3e} exceeds {limit:.1e}")]
    TraceDrift { drift: f64, limit: f64 },

    #[error("time {t:.6e} s outside the pulse schedule [0, {total:.6e}]")]
    OutsideSchedule { t: f64, total: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
