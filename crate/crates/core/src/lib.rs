//! Graph clustering by minimizing a Potts-model Hamiltonian with a learned
//! resolution parameter.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! filesystem or the command line lives in the `pmn` companion crate.
//!
//! The pipeline is:
//!
//! 1. build a [`Graph`] (from an edge list or one of the [`generators`]),
//! 2. normalize it with [`normalized_adjacency`],
//! 3. train the encoder with [`trainer::train`] under one of the
//!    [`LossKind`]s,
//! 4. score the hard partition with [`metrics::evaluate`].

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dense;
pub mod error;
pub mod generators;
pub mod graph;
pub mod losses;
pub mod metrics;
pub mod model;
pub mod trainer;

pub use dense::Matrix;
pub use error::{Error, Result};
pub use graph::{normalized_adjacency, spmm, FeatureMatrix, Graph, NormalizedAdjacency};
pub use losses::{LossBreakdown, LossWeights};
pub use metrics::{MetricsReport, Partition};
pub use model::{ModelParams, SoftAssignment};
pub use trainer::{LossKind, RunTrace, TrainConfig};
