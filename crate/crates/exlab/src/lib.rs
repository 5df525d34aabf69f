//! Electric network reduction, Dirichlet forms for random-walk, exclusion,
//! and interchange processes on finite weighted graphs, and a verification
//! laboratory that numerically certifies the associated identities and
//! inequalities at desk scale.

pub mod error;
pub mod graph;
pub mod network;
pub mod report;
pub mod resistance;
pub mod sg;
pub mod states;

pub mod dirichlet;
pub mod lab;
pub mod sim;
pub mod spectral;
pub mod suite;

pub use error::{ExlabError, Result};
pub use graph::{TorusGraph, WeightedGraph};
pub use report::{BatchSummary, VerificationReport};
pub use sg::{sg_graph, SgGraph};
