//! Fault-tolerant `(s,t)`-flow families and sensitivity oracles for
//! unit-capacity directed multigraphs.
//!
//! The crate answers max-flow and min-cut queries after one, two, or `k`
//! edge failures without recomputing a flow per query:
//!
//! * [`family`] builds the calibrated subgraph, the auxiliary network `H`,
//!   and the flow families `A` (`λ+1` max-flows) and `B` (`2λ+1` flows) with
//!   their null-set dictionaries.
//! * [`mincut`] holds the min-cut class structure and the compact
//!   `O(λn)`-word min-cut oracle.
//! * [`ftscc`] answers strong-connectivity queries on residual graphs under
//!   one arc-pair deletion.
//! * [`oracle`] combines these into the single, dual, and `k`-failure query
//!   oracles.
//! * [`harness`] has instance generators, an independent brute-force
//!   reference, and verification drivers.

pub mod error;
pub mod family;
pub mod flow;
pub mod ftscc;
pub mod graph;
pub mod harness;
pub mod mincut;
pub mod oracle;

pub use error::{Error, Result};
pub use graph::{parse_network, DirectedMultigraph, EdgeId, EdgeSet, FlowNetwork, VertexId};
pub use oracle::SensitivityOracle;
