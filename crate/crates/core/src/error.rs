use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operator has {got} axes but the system has {expected} spins")]
    AxesLength { expected: usize, got: usize },

    #[error("spin count mismatch: expected {expected}, got {got}")]
    SpinCount { expected: usize, got: usize },

    #[error("matrix dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("dense backend supports at most {max} spins, got {got}")]
    TooManySpins { max: usize, got: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("operator is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("density operator trace is {0}, expected 1")]
    TraceNotUnit(f64),

    #[error("expectation value has imaginary residue {0:.3e}")]
    ImaginaryResidue(f64),

    #[error("term {0} is not a product of I_z factors")]
    NonZTerm(String),

    #[error("operator is not diagonal (max off-diagonal {0:.3e})")]
    NotDiagonal(f64),

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown variable `{name}` at position {pos}")]
    UnknownVariable { name: String, pos: usize },

    #[error("variable x{index} at position {pos} is out of range (expected x2..x{max})")]
    VariableOutOfRange { index: usize, pos: usize, max: usize },

    #[error("invalid truth table: {0}")]
    InvalidTable(String),

    #[error("unknown spin `{0}`")]
    UnknownSpin(String),

    #[error("spins must be distinct (got {0} twice)")]
    SameSpin(usize),

    #[error("term {0} has weight above 3 and cannot be compiled")]
    TermWeight(String),

    #[error("spins {0} and {1} are not coupled and no relay spin couples to both")]
    NoRelay(usize, usize),

    #[error("spin {relay} cannot relay the {k}-{l} coupling")]
    InvalidRelay { k: usize, l: usize, relay: usize },

    #[error("no pivot spin for trilinear term on spins {0:?}")]
    UnsupportedTopology(Vec<usize>),

    #[error("invalid spin system: {0}")]
    InvalidSystem(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("exhaustive sweep limited to n <= {max}, got {got}")]
    SweepTooLarge { max: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
