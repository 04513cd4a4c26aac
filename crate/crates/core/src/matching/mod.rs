//! Seeded graph matching and the match-then-test pipeline.

mod lap;
mod pipeline;
mod sgm;

pub use lap::solve_lap;
pub use pipeline::{match_power_grid, match_then_test, matched_statistic, MatchPowerSettings, MatchScope, MatchTestOutcome};
pub use sgm::{sgm, sgm_observed, MatchResult, SeedSet, SgmOptions};
