use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid `{field}`: {message}")]
    InvalidField { field: String, message: String },

    #[error("graph is not bipartite; odd cycle {cycle:?}")]
    NotBipartite { cycle: Vec<usize> },

    #[error("no simple path of {length} qubits found after {attempts} attempts")]
    NoChain { length: usize, attempts: usize },

    #[error("pattern construction failed: {0}")]
    Pattern(String),

    #[error("unsupported gate kind {0} in this context")]
    UnsupportedGate(String),

    #[error("cluster {qubits:?} has {} qubits, above the cap of {cap}", qubits.len())]
    ClusterTooLarge { qubits: Vec<usize>, cap: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("qubit {qubit} is not part of the cluster {cluster:?}")]
    QubitOutsideCluster { qubit: usize, cluster: Vec<usize> },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("fidelity group is empty")]
    EmptyGroup,

    #[error("qubit {0} is not among the measured qubits")]
    NotMeasured(usize),

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("tau = {tau_us} us is not on the series grid")]
    MissingTau { tau_us: f64 },

    #[error("pair ({0}, {1}) is not split across the two checkerboard partitions")]
    PairNotSplit(usize, usize),

    #[error("missing frequency data for qubit {0}")]
    MissingFrequency(usize),

    #[error("malformed record at line {line}: {message}")]
    MalformedRecord { line: usize, message: String },

    #[error("record `{record}` histogram sums to {found}, expected {expected} shots")]
    ShotMismatch {
        record: String,
        expected: u64,
        found: u64,
    },

    #[error("no recorded counts for pattern `{pattern}` at tau = {tau_us} us")]
    RecordNotFound { pattern: String, tau_us: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidField {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line runner: 2 for data errors, 3
    /// for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) | Error::ClusterTooLarge { .. } => 3,
            _ => 2,
        }
    }
}
