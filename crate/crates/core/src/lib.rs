//! Shuffled two-sample network hypothesis testing.
//!
//! Two graphs on a shared vertex set are compared while some vertex labels
//! may have been shuffled. The crate provides the random graph models, the
//! spectral estimators, five test statistics, Monte Carlo and bootstrap power
//! estimation, analytic power for the adjacency test, and seeded graph
//! matching to undo the shuffle before testing.

pub mod error;
pub mod experiments;
pub mod graph;
pub mod inference;
pub mod matching;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
