//! Continuous-time quantum walks on graphs and oriented graphs: spectral
//! decompositions, density-matrix evolution, periodicity and state-transfer
//! certificates, uniform mixing, and a brute-force oracle for checking them.

pub mod arithmetic;
pub mod corpus;
pub mod detectors;
pub mod error;
pub mod graph;
pub mod invariants;
pub mod linalg;
pub mod oracle;
pub mod search;
pub mod spectral;
pub mod state;

pub use error::{Error, Result};
pub use graph::{Graph, OrientedGraph, WalkGraph};
pub use spectral::SpectralDecomposition;
pub use state::DensityMatrix;
