//! Test statistics and their population-level moments.

mod moments;
mod normal;
mod statistics;

pub use moments::{
    adjacency_moments, analytic_power_adjacency, analytic_power_sbm, population_shuffle_gap,
    power_from_moments, sbm_shuffle_distance_sq, MomentPair,
};
#[allow(unused_imports)]
pub(crate) use moments::{sbm_block_swaps, sbm_probability_matrix};
pub use normal::{normal_tail, upper_quantile};
pub use statistics::{t_adjacency, t_normalized, t_omni, t_phat, t_semipar, Prepared, Statistic};
