use thiserror::Error;

use crate::gates::InteractionKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("cannot form a product state from an empty list of qubits")]
    EmptyProduct,

    #[error("register of {0} qubits exceeds the supported maximum of {max}", max = crate::statevec::MAX_QUBITS)]
    TooManyQubits(usize),

    #[error("qubit index {index} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("two-qubit gate needs distinct qubits, got {0} twice")]
    QubitCollision(usize),

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("invalid amplitude vector: {0}")]
    InvalidAmplitudes(String),

    #[error("state dimensions differ: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },

    #[error("forced measurement outcome {outcome} on qubit {qubit} has probability {probability:.3e}")]
    ImpossibleBranch {
        qubit: usize,
        outcome: u8,
        probability: f64,
    },

    #[error("measurement outcome must be 0 or 1, got {0}")]
    InvalidOutcome(u8),

    #[error("Bloch angle out of range: theta0 = {theta0}, phi0 = {phi0}")]
    InvalidOrientation { theta0: f64, phi0: f64 },

    #[error("chain length must be odd, got N = {0} (the byproduct rule only holds for odd N)")]
    EvenChainLength(usize),

    #[error("chain length must be at least 3, got N = {0}")]
    ChainTooShort(usize),

    #[error("builder for {expected:?} called with a {found:?} chain")]
    KindMismatch {
        expected: InteractionKind,
        found: InteractionKind,
    },

    #[error("explicit error list has {found} entries but the chain has {expected} bonds")]
    BondCountMismatch { expected: usize, found: usize },

    #[error("invalid error model parameter: {0}")]
    InvalidErrorModel(String),

    #[error("refresh window must hold at least 3 qubits, got {0}")]
    WindowTooSmall(usize),

    #[error("refresh window of {window} qubits cannot realize the {kind:?} build order")]
    WindowUnschedulable { window: usize, kind: InteractionKind },

    #[error("second-order coefficient is only derived for CP and ZZ, not {0:?}")]
    UnsupportedKind(InteractionKind),

    #[error("|theta / 16 pi| = {0} exceeds 1; no default X-pulse angle exists")]
    GammaOutOfRange(f64),

    #[error("invalid sweep configuration: {0}")]
    InvalidSweep(String),

    #[error("csv serialization failed: {0}")]
    Csv(String),

    #[error("i/o failure: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Csv(err.to_string())
    }
}
