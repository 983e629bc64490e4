//! Cluster simulation of quantum circuits.
//!
//! A circuit whose qubits and gates split into loosely coupled clusters is
//! evaluated on a narrow simulated backend: every wire (or gate) crossing a
//! cluster boundary is replaced by a signed sum of local measure/prepare
//! settings, each cluster becomes a small fragment circuit, and the fragment
//! results are recombined by exact enumeration, Monte Carlo sampling over cut
//! settings, or tensor-network contraction over the cluster graph.
//!
//! Module map:
//! - [`circuit`]: gates, circuits, post-processing functions.
//! - [`network`]: the tensor-network view, clusterings, cluster parameters,
//!   contraction complexity, and the brute-force oracle.
//! - [`cutting`]: wire/gate cut rules and fragment construction.
//! - [`backend`]: exact and shot-based fragment engines.
//! - [`estimator`]: the three recombination modes and sample planning.
//! - [`hamsim`]: nested Trotter circuits for clustered Hamiltonians.
//! - [`vqe`]: hardware-efficient ansatz, SPSA and entangler pruning.

pub mod backend;
pub mod circuit;
pub mod cutting;
pub mod error;
pub mod estimator;
pub mod hamsim;
pub mod linalg;
pub mod network;
pub mod rng;
pub mod tensor;
pub mod vqe;

pub use circuit::{
    pauli_observable_expectation_post, validate, Block, Circuit, Gate, GateKind, GeneralFn, PostProcess,
    QcAlgorithm, ValidationReport,
};
pub use cutting::{cut_rule_table, cz_decomposition, plan_cuts, CutPlan};
pub use error::{Error, Result};
pub use estimator::{plan_samples, Estimate, Mode, SamplePlan};
pub use linalg::{Pauli, C64};
pub use network::{build_network, cluster_params, exact_value, ClusterParams, Clustering, TensorNetwork};
