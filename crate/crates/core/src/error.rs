use alloc::string::String;

/// Errors produced by the simulator core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("subsystem dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("register of size {size} exceeds the limit of {limit} amplitudes")]
    RegisterTooLarge { size: usize, limit: usize },

    #[error("cannot normalize a zero vector")]
    ZeroVector,

    #[error("subsystem `{0}` not found")]
    SubsystemNotFound(String),

    #[error("subsystem `{0}` appears more than once")]
    DuplicateSubsystem(String),

    #[error("operator is not unitary")]
    NotUnitary,

    #[error("basis vectors are not orthonormal")]
    NotOrthonormal,

    #[error("invalid POVM: {0}")]
    InvalidPovm(&'static str),

    #[error("every outcome has probability below 1e-14")]
    ZeroProbability,

    #[error("partial trace needs at least one kept subsystem")]
    EmptyKeepSet,

    #[error("{what} = {value} is out of range (bound {bound})")]
    OutOfRange { what: &'static str, value: i64, bound: i64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid Pauli string `{0}`")]
    PauliParse(String),

    #[error("stabilizer generators {0} and {1} do not commute")]
    NonCommuting(usize, usize),

    #[error("stabilizer generators are not independent")]
    DependentGenerators,

    #[error("stabilizer group contains -I")]
    ContainsMinusIdentity,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("party `{party}` does not own subsystem `{subsystem}`")]
    Locality { party: String, subsystem: String },

    #[error("party `{party}` acted on an outcome it has not received")]
    Causality { party: String },

    #[error("unknown party `{0}`")]
    UnknownParty(String),

    #[error("vertex {0} was already measured")]
    AlreadyMeasured(usize),

    #[error("malformed program: {0}")]
    MalformedProgram(String),
}

pub type Result<T> = core::result::Result<T, Error>;
