//! Match first, then test with the unshuffled statistic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{random_order, Graph, Permutation, StreamKey};
use crate::inference::{
    empirical_critical_value, rejects, Alternative, DimensionMode, GridRow, Model, NullDistribution, NullSource,
    PowerEstimate, ShuffleGrid, ShuffleScheme,
};
use crate::matching::sgm::{sgm, MatchResult, SeedSet, SgmOptions};
use crate::stats::Statistic;

#[derive(Debug, Clone)]
pub struct MatchTestOutcome {
    pub reject: bool,
    pub statistic: f64,
    pub critical_value: f64,
    pub matching: MatchResult,
}

/// Aligns `b` to `a` and evaluates the statistic on the aligned pair.
pub fn matched_statistic(
    a: &Graph,
    b: &Graph,
    seeds: &SeedSet,
    stat: Statistic,
    d: usize,
    opts: &SgmOptions,
    key: &StreamKey,
) -> Result<(f64, MatchResult)> {
    let m = sgm(a, b, seeds, opts, key)?;
    let t = stat.evaluate(a, &b.shuffle(&m.permutation)?, d)?;
    Ok((t, m))
}

/// Matches `b2` to `a1`, tests with the unshuffled statistic and sets the
/// critical value by running the same protocol on `replicates` null pairs:
/// each null `B` has its free vertices relabeled at random (consistently
/// with the seeds) and is then matched exactly like the observed pair.
#[allow(clippy::too_many_arguments)]
pub fn match_then_test(
    a1: &Graph,
    b2: &Graph,
    seeds: &SeedSet,
    stat: Statistic,
    d: usize,
    null_model: &Model,
    alpha: f64,
    replicates: usize,
    opts: &SgmOptions,
    key: &StreamKey,
) -> Result<MatchTestOutcome> {
    if null_model.n() != a1.n() {
        return Err(Error::SizeMismatch { expected: a1.n(), found: null_model.n() });
    }
    if replicates == 0 {
        return Err(Error::EmptySample);
    }
    let (statistic, matching) = matched_statistic(a1, b2, seeds, stat, d, opts, &key.child(0))?;
    let n = a1.n();
    let a_free = free_vertices(n, seeds.pairs().iter().map(|p| p.0));
    let b_free = free_vertices(n, seeds.pairs().iter().map(|p| p.1));
    let null_key = key.child(1);
    let samples = crate::inference::par_indexed(replicates, |r| {
        let rep = null_key.child(r as u64);
        let g1 = null_model.sample(&rep.child(1));
        let g2 = null_model.sample(&rep.child(2));
        // relabel so that B vertex truth(i) is A vertex i
        let mut truth = vec![usize::MAX; n];
        for &(av, bv) in seeds.pairs() {
            truth[av] = bv;
        }
        let images = random_order(&b_free, &rep.child(3));
        for (&av, &bv) in a_free.iter().zip(&images) {
            truth[av] = bv;
        }
        let g2 = g2.shuffle(&Permutation::from_mapping(truth)?)?;
        Ok(matched_statistic(&g1, &g2, seeds, stat, d, opts, &rep.child(4))?.0)
    })?;
    let null = NullDistribution::new(samples, NullSource::DirectMc)?;
    let critical_value = empirical_critical_value(&null, alpha)?;
    Ok(MatchTestOutcome { reject: rejects(statistic, critical_value), statistic, critical_value, matching })
}

fn free_vertices(n: usize, seeded: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut taken = vec![false; n];
    seeded.for_each(|v| taken[v] = true);
    (0..n).filter(|&v| !taken[v]).collect()
}

/// Which vertices the alternative and level arms unshuffle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchScope {
    /// All `k` vertices that may have been shuffled (what is possible in practice).
    #[default]
    AllUnknown,
    /// Only the `ell` vertices that actually were shuffled.
    TrulyShuffled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchPowerSettings {
    pub alpha: f64,
    pub n_mc: usize,
    pub dimension: DimensionMode,
    pub shuffle: ShuffleScheme,
    pub sgm: SgmOptions,
    pub scope: MatchScope,
}

const NULL_ARM: u64 = 0;
const ALT_ARM: u64 = 1;
const LEVEL_ARM: u64 = 2;

/// Direct simulation of the match-then-test pipeline over a grid. The null
/// arm shuffles by `Q_k` and matches the `k` unknown vertices; the
/// alternative and level arms shuffle by `Q_ell` and match the vertices
/// chosen by `scope`.
pub fn match_power_grid(
    null: &Model,
    alternatives: &[Alternative],
    stat: Statistic,
    grid: &ShuffleGrid,
    settings: &MatchPowerSettings,
    key: &StreamKey,
) -> Result<Vec<GridRow>> {
    if !(settings.alpha > 0.0 && settings.alpha < 1.0) {
        return Err(Error::InvalidLevel(settings.alpha));
    }
    if settings.n_mc == 0 {
        return Err(Error::InvalidInput("n_mc must be positive".into()));
    }
    let n = null.n();
    settings.shuffle.check(n, &grid.all_budgets())?;
    let ks = grid.k_budgets();
    let cells = grid.cells();
    let budgets = grid.all_budgets();

    let d_for = |g1: &Graph, g2: &Graph| -> Result<usize> {
        if stat.uses_embedding() {
            settings.dimension.resolve(&[g1, g2])
        } else {
            Ok(1)
        }
    };
    let matched = |g1: &Graph, g2: &Graph, shuffle: &Permutation, free: &[usize], d: usize, k: &StreamKey| {
        let b = g2.shuffle(shuffle)?;
        if free.is_empty() {
            return stat.evaluate(g1, &b, d);
        }
        Ok(matched_statistic(g1, &b, &SeedSet::complement_of(n, free), stat, d, &settings.sgm, k)?.0)
    };

    let null_key = key.child(NULL_ARM);
    let null_vals: Vec<Vec<f64>> = crate::inference::par_indexed(settings.n_mc, |r| {
        let rep = null_key.child(r as u64);
        let (g1, g2) = (null.sample(&rep.child(1)), null.sample(&rep.child(2)));
        let perms = settings.shuffle.draw(n, &budgets, &rep.child(9))?;
        let d = d_for(&g1, &g2)?;
        ks.iter()
            .enumerate()
            .map(|(i, k)| {
                let q = &perms[k];
                matched(&g1, &g2, q, &q.support(), d, &rep.descend(&[5, i as u64]))
            })
            .collect()
    })?;
    let critical: Vec<f64> = (0..ks.len())
        .map(|i| {
            let dist = NullDistribution::new(null_vals.iter().map(|r| r[i]).collect(), NullSource::DirectMc)?;
            empirical_critical_value(&dist, settings.alpha)
        })
        .collect::<Result<_>>()?;

    let cell_arm = |second: &Model, arm_key: StreamKey| -> Result<Vec<Vec<f64>>> {
        crate::inference::par_indexed(settings.n_mc, |r| {
            let rep = arm_key.child(r as u64);
            let (g1, g2) = (null.sample(&rep.child(1)), second.sample(&rep.child(2)));
            let perms = settings.shuffle.draw(n, &budgets, &rep.child(9))?;
            let d = d_for(&g1, &g2)?;
            cells
                .iter()
                .enumerate()
                .map(|(i, &(k, ell))| {
                    let q = &perms[&ell];
                    let free = match settings.scope {
                        MatchScope::AllUnknown => perms[&k].support(),
                        MatchScope::TrulyShuffled => q.support(),
                    };
                    matched(&g1, &g2, q, &free, d, &rep.descend(&[5, i as u64]))
                })
                .collect()
        })
    };

    let level_vals = cell_arm(null, key.child(LEVEL_ARM))?;
    let mut rows = Vec::new();
    for (ai, alt) in alternatives.iter().enumerate() {
        let alt_vals = cell_arm(&alt.model, key.descend(&[ALT_ARM, ai as u64]))?;
        for (ci, &(k, ell)) in cells.iter().enumerate() {
            let c = critical[ks.binary_search(&k).expect("k listed")];
            let col = |v: &[Vec<f64>]| v.iter().map(|r| r[ci]).collect::<Vec<_>>();
            rows.push(GridRow {
                statistic: stat,
                effect: alt.effect,
                k,
                ell,
                critical_value: c,
                power: PowerEstimate::from_statistics(&col(&alt_vals), c)?,
                level: PowerEstimate::from_statistics(&col(&level_vals), c)?,
            });
        }
    }
    Ok(rows)
}
