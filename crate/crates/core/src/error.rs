use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("invalid post-processing function: {0}")]
    InvalidPost(String),
    #[error("unknown Pauli label '{0}'")]
    UnknownLabel(char),
    #[error("invalid clustering: {0}")]
    InvalidClustering(String),
    #[error("oracle limited to {limit} qubits, network has {n}")]
    OracleTooLarge { n: usize, limit: usize },
    #[error("tensor shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("exact contraction complexity limited to {limit} vertices, graph has {n}")]
    GraphTooLarge { n: usize, limit: usize },
    #[error("clusters are joined through the general observable; tensor contraction needs separable clusters")]
    ClustersNotSeparable,
    #[error("cut index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("fragment width {width} exceeds engine width {max}")]
    WidthExceeded { width: usize, max: usize },
    #[error("work budget exceeded: {needed} > {budget}")]
    BudgetExceeded { needed: f64, budget: f64 },
    #[error("post-processing function is not decomposable over the clusters")]
    NotDecomposable,
    #[error("parameter length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid Hamiltonian: {0}")]
    InvalidHamiltonian(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable code, used by the command-line frontend.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidCircuit(_) => "invalid_circuit",
            Error::InvalidPost(_) => "invalid_post",
            Error::UnknownLabel(_) => "unknown_label",
            Error::InvalidClustering(_) => "invalid_clustering",
            Error::OracleTooLarge { .. } => "oracle_too_large",
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::GraphTooLarge { .. } => "graph_too_large",
            Error::ClustersNotSeparable => "clusters_not_separable",
            Error::IndexOutOfRange(_) => "index_out_of_range",
            Error::WidthExceeded { .. } => "width_exceeded",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::NotDecomposable => "not_decomposable",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::InvalidHamiltonian(_) => "invalid_hamiltonian",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Parse(_) => "parse_error",
        }
    }
}
