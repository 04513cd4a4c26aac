//! Power by direct simulation from known models.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Permutation, StreamKey};
use crate::inference::null::{empirical_critical_value, NullDistribution, NullSource, PowerEstimate};
use crate::inference::setup::{par_indexed, DimensionMode, Model, ShuffleGrid, ShuffleScheme};
use crate::stats::Statistic;

const NULL_ARM: u64 = 0;
const ALT_ARM: u64 = 1;
const LEVEL_ARM: u64 = 2;
const PERM_STREAM: u64 = 9;

/// One alternative model tagged with the effect size reported in tables.
#[derive(Debug, Clone)]
pub struct Alternative {
    pub effect: f64,
    pub model: Model,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectMcSettings {
    pub alpha: f64,
    /// Replicates per arm.
    pub n_mc: usize,
    pub dimension: DimensionMode,
    pub shuffle: ShuffleScheme,
}

/// One `(statistic, effect, k, ell)` result.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub statistic: Statistic,
    pub effect: f64,
    pub k: usize,
    pub ell: usize,
    pub critical_value: f64,
    pub power: PowerEstimate,
    pub level: PowerEstimate,
}

/// `stats x budgets` values of `T(g1, Q_h g2 Q_h^T)`.
pub(crate) fn arm_statistics(
    stats: &[Statistic],
    g1: &Graph,
    g2: &Graph,
    budgets: &[usize],
    perms: &BTreeMap<usize, Permutation>,
    dimension: &DimensionMode,
) -> Result<Vec<Vec<f64>>> {
    let d = if stats.iter().any(|s| s.uses_embedding()) { dimension.resolve(&[g1, g2])? } else { 1 };
    let p1 = Statistic::prepare_all(stats, g1, d)?;
    let p2 = Statistic::prepare_all(stats, g2, d)?;
    stats
        .iter()
        .zip(p1.iter().zip(&p2))
        .map(|(s, (a, b))| budgets.iter().map(|h| s.evaluate_shuffled(a, b, &perms[h])).collect())
        .collect()
}

struct ArmSamples {
    /// `[replicate][statistic][budget]`.
    values: Vec<Vec<Vec<f64>>>,
}

impl ArmSamples {
    fn column(&self, stat: usize, budget: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[stat][budget]).collect()
    }
}

fn run_arm(
    first: &Model,
    second: &Model,
    stats: &[Statistic],
    budgets: &[usize],
    settings: &DirectMcSettings,
    key: &StreamKey,
) -> Result<ArmSamples> {
    let n = first.n();
    let fixed = if settings.shuffle.is_random() { None } else { Some(settings.shuffle.draw(n, budgets, key)?) };
    let values = par_indexed(settings.n_mc, |r| {
        let rep = key.child(r as u64);
        let g1 = first.sample(&rep.child(1));
        let g2 = second.sample(&rep.child(2));
        let drawn;
        let perms = match &fixed {
            Some(p) => p,
            None => {
                drawn = settings.shuffle.draw(n, budgets, &rep.child(PERM_STREAM))?;
                &drawn
            }
        };
        arm_statistics(stats, &g1, &g2, budgets, perms, &settings.dimension)
    })?;
    Ok(ArmSamples { values })
}

fn check_settings(null: &Model, alternatives: &[Alternative], stats: &[Statistic], grid: &ShuffleGrid, s: &DirectMcSettings) -> Result<()> {
    if !(s.alpha > 0.0 && s.alpha < 1.0) {
        return Err(Error::InvalidLevel(s.alpha));
    }
    if s.n_mc == 0 {
        return Err(Error::InvalidInput("n_mc must be positive".into()));
    }
    if stats.is_empty() || alternatives.is_empty() {
        return Err(Error::InvalidInput("need at least one statistic and one alternative".into()));
    }
    if let Some(a) = alternatives.iter().find(|a| a.model.n() != null.n()) {
        return Err(Error::SizeMismatch { expected: null.n(), found: a.model.n() });
    }
    s.shuffle.check(null.n(), &grid.all_budgets())
}

/// Power and level over a grid. Each replicate draws its graphs once and
/// evaluates every budget on them; the null arm sets critical values at each
/// `k`, the alternative arm gives power at each `ell` and an independent null
/// arm gives the level at each `ell`. Rows are ordered by alternative, then
/// statistic, then grid cell.
pub fn direct_mc_grid(
    null: &Model,
    alternatives: &[Alternative],
    stats: &[Statistic],
    grid: &ShuffleGrid,
    settings: &DirectMcSettings,
    key: &StreamKey,
) -> Result<Vec<GridRow>> {
    check_settings(null, alternatives, stats, grid, settings)?;
    let ks = grid.k_budgets();
    let ells = grid.ell_budgets();
    let null_arm = run_arm(null, null, stats, &ks, settings, &key.child(NULL_ARM))?;
    let level_arm = run_arm(null, null, stats, &ells, settings, &key.child(LEVEL_ARM))?;
    let mut critical = vec![Vec::with_capacity(ks.len()); stats.len()];
    for (si, crit) in critical.iter_mut().enumerate() {
        for ki in 0..ks.len() {
            let dist = NullDistribution::new(null_arm.column(si, ki), NullSource::DirectMc)?;
            crit.push(empirical_critical_value(&dist, settings.alpha)?);
        }
    }
    let mut rows = Vec::new();
    for (ai, alt) in alternatives.iter().enumerate() {
        let alt_arm = run_arm(null, &alt.model, stats, &ells, settings, &key.descend(&[ALT_ARM, ai as u64]))?;
        for (si, &stat) in stats.iter().enumerate() {
            for (k, ell) in grid.cells() {
                let ki = ks.binary_search(&k).expect("k budget listed");
                let li = ells.binary_search(&ell).expect("ell budget listed");
                let c = critical[si][ki];
                rows.push(GridRow {
                    statistic: stat,
                    effect: alt.effect,
                    k,
                    ell,
                    critical_value: c,
                    power: PowerEstimate::from_statistics(&alt_arm.column(si, li), c)?,
                    level: PowerEstimate::from_statistics(&level_arm.column(si, li), c)?,
                });
            }
        }
    }
    Ok(rows)
}

/// Power of one statistic at a single `(k, ell)` cell.
pub fn direct_mc_power(
    null: &Model,
    alternative: &Model,
    stat: Statistic,
    k: usize,
    ell: usize,
    settings: &DirectMcSettings,
    key: &StreamKey,
) -> Result<PowerEstimate> {
    if ell > k {
        return Err(Error::InvalidInput(format!("ell = {ell} exceeds k = {k}")));
    }
    let alt = [Alternative { effect: 0.0, model: alternative.clone() }];
    let rows = direct_mc_grid(null, &alt, &[stat], &ShuffleGrid::single(k, ell)?, settings, key)?;
    Ok(rows[0].power)
}

/// Null samples of `T(A_1, Q_k A_2 Q_k^T)` with both graphs from `null`.
pub fn direct_null_distribution(
    null: &Model,
    stat: Statistic,
    k: usize,
    settings: &DirectMcSettings,
    key: &StreamKey,
) -> Result<NullDistribution> {
    let arm = run_arm(null, null, &[stat], &[k], settings, &key.child(NULL_ARM))?;
    NullDistribution::new(arm.column(0, 0), NullSource::DirectMc)
}
