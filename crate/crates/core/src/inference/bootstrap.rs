//! Parametric bootstrap from fitted latent positions.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{sample_from_probabilities, Graph, Permutation, StreamKey};
use crate::inference::direct::{arm_statistics, GridRow};
use crate::inference::null::{empirical_critical_value, NullDistribution, NullSource, PowerEstimate};
use crate::inference::setup::{par_indexed, DimensionMode, ShuffleGrid};
use crate::spectral::probability_estimate;
use crate::stats::Statistic;

const CRIT_ARM: u64 = 0;
const POWER_ARM: u64 = 1;
const LEVEL_ARM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSettings {
    pub alpha: f64,
    /// Bootstrap replicates per arm.
    pub replicates: usize,
    pub statistic: Statistic,
}

/// `X̂ X̂^T` for `X̂ = ASE(g, d)`, clipped into `[0, 1]` so it can be sampled.
pub fn fitted_probabilities(g: &Graph, d: usize) -> Result<DMatrix<f64>> {
    Ok(probability_estimate(g, d)?.map(|v| v.clamp(0.0, 1.0)))
}

fn bootstrap_arm(
    p1: &DMatrix<f64>,
    p2: &DMatrix<f64>,
    stat: Statistic,
    d: usize,
    budgets: &[usize],
    perms: &BTreeMap<usize, Permutation>,
    replicates: usize,
    key: &StreamKey,
) -> Result<Vec<Vec<f64>>> {
    let fixed = DimensionMode::Fixed(d);
    par_indexed(replicates, |b| {
        let rep = key.child(b as u64);
        let g1 = sample_from_probabilities(p1, &rep.child(1));
        let g2 = sample_from_probabilities(p2, &rep.child(2));
        Ok(arm_statistics(&[stat], &g1, &g2, budgets, perms, &fixed)?.remove(0))
    })
}

fn column(values: &[Vec<f64>], j: usize) -> Vec<f64> {
    values.iter().map(|r| r[j]).collect()
}

/// `B` bootstrap values of `T(A_{1,b}, Q_k A_{2,b} Q_k^T)` where
/// `A_{i,b} ~ Bernoulli(clip(X̂_i X̂_i^T))` and all embeddings use dimension `d`.
pub fn parametric_bootstrap_null(
    a1: &Graph,
    a2: &Graph,
    qk: &Permutation,
    stat: Statistic,
    d: usize,
    replicates: usize,
    key: &StreamKey,
) -> Result<NullDistribution> {
    if replicates == 0 {
        return Err(Error::EmptySample);
    }
    a1.check_same_size(a2)?;
    let (p1, p2) = (fitted_probabilities(a1, d)?, fitted_probabilities(a2, d)?);
    let perms = BTreeMap::from([(0, qk.clone())]);
    let values = bootstrap_arm(&p1, &p2, stat, d, &[0], &perms, replicates, &key.child(CRIT_ARM))?;
    NullDistribution::new(column(&values, 0), NullSource::Bootstrap)
}

/// Bootstrap level and power over a grid of shuffles. `perms` must hold a
/// relabeling for every budget in the grid. The critical value at each `k`
/// comes from resampling `(A_1, A_2)` under `Q_k`; the level at `ell` from an
/// independent resample of `(A_1, A_2)` under `Q_ell`; the power from
/// resampling `(A_1, A_3)` under `Q_ell`.
pub fn bootstrap_power_grid(
    a1: &Graph,
    a2: &Graph,
    a3: &Graph,
    grid: &ShuffleGrid,
    perms: &BTreeMap<usize, Permutation>,
    d: usize,
    settings: &BootstrapSettings,
    key: &StreamKey,
) -> Result<Vec<GridRow>> {
    if settings.replicates == 0 {
        return Err(Error::EmptySample);
    }
    if !(settings.alpha > 0.0 && settings.alpha < 1.0) {
        return Err(Error::InvalidLevel(settings.alpha));
    }
    a1.check_same_size(a2)?;
    a1.check_same_size(a3)?;
    if let Some(h) = grid.all_budgets().into_iter().find(|h| !perms.contains_key(h)) {
        return Err(Error::InvalidInput(format!("no relabeling supplied for budget {h}")));
    }
    let p1 = fitted_probabilities(a1, d)?;
    let p2 = fitted_probabilities(a2, d)?;
    let p3 = fitted_probabilities(a3, d)?;
    let (ks, ells) = (grid.k_budgets(), grid.ell_budgets());
    let b = settings.replicates;
    let stat = settings.statistic;
    let crit_vals = bootstrap_arm(&p1, &p2, stat, d, &ks, perms, b, &key.child(CRIT_ARM))?;
    let level_vals = bootstrap_arm(&p1, &p2, stat, d, &ells, perms, b, &key.child(LEVEL_ARM))?;
    let power_vals = bootstrap_arm(&p1, &p3, stat, d, &ells, perms, b, &key.child(POWER_ARM))?;
    let critical: Vec<f64> = (0..ks.len())
        .map(|j| {
            let dist = NullDistribution::new(column(&crit_vals, j), NullSource::Bootstrap)?;
            empirical_critical_value(&dist, settings.alpha)
        })
        .collect::<Result<_>>()?;
    grid.cells()
        .into_iter()
        .map(|(k, ell)| {
            let c = critical[ks.binary_search(&k).expect("k listed")];
            let li = ells.binary_search(&ell).expect("ell listed");
            Ok(GridRow {
                statistic: stat,
                effect: 0.0,
                k,
                ell,
                critical_value: c,
                power: PowerEstimate::from_statistics(&column(&power_vals, li), c)?,
                level: PowerEstimate::from_statistics(&column(&level_vals, li), c)?,
            })
        })
        .collect()
}
