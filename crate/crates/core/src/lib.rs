//! One-shot testing of large graph states under IID depolarizing noise.
//!
//! A handful of stabilizer generators `S_v = X_v ⊗ Z_{Nbd(v)}`, chosen on
//! vertices of equal degree and pairwise distance at least three, are
//! measured once; the state is accepted iff every parity is `+1`. The number
//! of tested generators depends only on the significance level and the
//! threshold error rate, not on the size of the graph.
//!
//! - [`pauli`]: phase-free Pauli operators, commutation and enumeration.
//! - [`graph`]: graphs, RHG lattices, stabilizer generators, file formats.
//! - [`noise`]: depolarizing sampling and parity-flip probabilities.
//! - [`protocol`]: parameters, test-vertex selection, accept/reject.
//! - [`oracle`]: small statevector cross-check.
//! - [`sweep`]: Monte Carlo acceptance rates with Wilson intervals.

pub mod graph;
pub mod noise;
pub mod oracle;
pub mod pauli;
pub mod protocol;
pub mod sweep;

pub use graph::{build_rhg, Boundary, Distance, Graph, GraphError, RhgSpec};
pub use noise::{DepolarizingModel, FlipStats, NoiseError};
pub use pauli::{anticommutes, anticommutes_single, SinglePauli, SparsePauli};
pub use protocol::{
    compute_params, required_tests, select_test_vertices, Outcome, Parity, ProtocolError, ProtocolParams, TestPlan,
};
