//! Spectral estimation: adjacency spectral embedding, dimension selection,
//! omnibus embedding and Procrustes alignment.

mod ase;
mod dimension;
pub mod eigen;
mod joint;

pub use ase::{ase, ase_graph, ase_with, low_rank_distance, probability_estimate, Embedding};
pub use dimension::{
    common_dimension, default_dimension_cap, profile_log_likelihood, select_dimension, ScreeProfile,
};
pub use eigen::EigenSolver;
pub use joint::{omnibus_embed, omnibus_matrix, procrustes_align};
