//! Critical values and power estimation: direct simulation, parametric
//! bootstrap and the two-level RDPG harness.

mod bootstrap;
mod direct;
mod null;
mod setup;
pub(crate) use setup::par_indexed;
mod two_tier;

pub use bootstrap::{bootstrap_power_grid, fitted_probabilities, parametric_bootstrap_null, BootstrapSettings};
pub use direct::{direct_mc_grid, direct_mc_power, direct_null_distribution, Alternative, DirectMcSettings, GridRow};
pub use null::{empirical_critical_value, rejects, NullDistribution, NullSource, PowerEstimate};
pub use setup::{DimensionMode, Model, ShuffleGrid, ShuffleScheme};
pub use two_tier::{two_tier_rdpg_power, TwoTierSettings};
