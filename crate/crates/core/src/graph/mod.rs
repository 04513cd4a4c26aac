//! Graphs, permutations, random models and reproducible random streams.

mod adjacency;
mod models;
mod permutation;
mod rng;

pub use adjacency::{shuffle_graph, Graph};
pub use models::{
    expectation_matrix, sample_dirichlet_latents, sample_edge_independent, sample_from_probabilities,
    sample_model, sample_rdpg, sample_sbm, validate_probabilities, ErrorSpec, LatentPositions, ModelSpec,
    SbmSpec,
};
pub use permutation::{
    block_shuffle_permutation, nested_permutation_sequence, random_derangement, random_order, Permutation,
};
pub use rng::StreamKey;
