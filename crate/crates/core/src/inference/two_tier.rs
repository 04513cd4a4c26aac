//! Two-level Monte Carlo for RDPG alternatives with perturbed latent rows:
//! the outer level redraws the latent positions, the inner level redraws
//! shuffles and graphs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{sample_dirichlet_latents, sample_rdpg, LatentPositions, StreamKey};
use crate::inference::direct::{arm_statistics, GridRow};
use crate::inference::null::{empirical_critical_value, NullDistribution, NullSource, PowerEstimate};
use crate::inference::setup::{par_indexed, DimensionMode, ShuffleGrid, ShuffleScheme};
use crate::stats::Statistic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoTierSettings {
    pub n: usize,
    /// Dirichlet concentration of the free latent rows.
    pub dirichlet: Vec<f64>,
    /// The first `perturbed_rows` rows are pinned to `base_row` in `X` and to
    /// `(1 - lambda) base_row + lambda target_row` in `Y`.
    pub perturbed_rows: usize,
    pub base_row: Vec<f64>,
    pub target_row: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub statistics: Vec<Statistic>,
    pub grid: ShuffleGrid,
    pub alpha: f64,
    pub n_outer: usize,
    pub n_inner: usize,
    pub dimension: DimensionMode,
    /// Vertices that may be shuffled; all vertices when absent.
    #[serde(default)]
    pub unknown: Option<Vec<usize>>,
}

impl TwoTierSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidLevel(self.alpha));
        }
        if self.n_outer == 0 || self.n_inner == 0 {
            return Err(Error::InvalidInput("Monte Carlo counts must be positive".into()));
        }
        if self.statistics.is_empty() || self.lambdas.is_empty() {
            return Err(Error::InvalidInput("need at least one statistic and one lambda".into()));
        }
        if self.perturbed_rows > self.n {
            return Err(Error::InvalidSpec("more perturbed rows than vertices".into()));
        }
        let d = self.dirichlet.len();
        if self.base_row.len() != d || self.target_row.len() != d {
            return Err(Error::InvalidSpec("latent rows must match the Dirichlet dimension".into()));
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return Err(Error::InvalidSpec(format!("lambda {l} outside [0, 1]")));
        }
        self.scheme().check(self.n, &self.grid.all_budgets())
    }

    fn scheme(&self) -> ShuffleScheme {
        ShuffleScheme::Nested { unknown: self.unknown.clone() }
    }

    fn mixed_row(&self, lambda: f64) -> Vec<f64> {
        self.base_row.iter().zip(&self.target_row).map(|(b, t)| (1.0 - lambda) * b + lambda * t).collect()
    }

    fn latents(&self, key: &StreamKey) -> Result<(LatentPositions, Vec<LatentPositions>)> {
        let pinned: Vec<(usize, Vec<f64>)> =
            (0..self.perturbed_rows).map(|i| (i, self.base_row.clone())).collect();
        let x = sample_dirichlet_latents(self.n, &self.dirichlet, &pinned, key)?;
        let ys = self
            .lambdas
            .iter()
            .map(|&l| {
                let row = self.mixed_row(l);
                x.with_rows(&(0..self.perturbed_rows).map(|i| (i, row.clone())).collect::<Vec<_>>())
            })
            .collect::<Result<_>>()?;
        Ok((x, ys))
    }
}

/// Values from one inner iterate: `[statistic][budget]` per arm.
struct Inner {
    null: Vec<Vec<f64>>,
    level: Vec<Vec<f64>>,
    /// One entry per lambda.
    alt: Vec<Vec<Vec<f64>>>,
}

/// Average power and level over outer iterates; one row per
/// `(lambda, statistic, cell)`. Latent draws and graph draws do not depend on
/// lambda, so all lambdas share random numbers. Pooled trial counts are
/// `n_outer * n_inner`.
pub fn two_tier_rdpg_power(settings: &TwoTierSettings, key: &StreamKey) -> Result<Vec<GridRow>> {
    settings.validate()?;
    let stats = &settings.statistics;
    let (ks, ells) = (settings.grid.k_budgets(), settings.grid.ell_budgets());
    let mut budgets = ks.clone();
    budgets.extend(&ells);
    budgets.sort_unstable();
    budgets.dedup();
    let scheme = settings.scheme();
    let n = settings.n;

    // [outer][lambda][stat][cell] -> (power hits, level hits)
    let per_outer = (0..settings.n_outer)
        .map(|i| {
            let outer = key.child(i as u64);
            let (x, ys) = settings.latents(&outer.child(0))?;
            let inner: Vec<Inner> = par_indexed(settings.n_inner, |j| {
                let rep = outer.descend(&[1, j as u64]);
                let perms = scheme.draw(n, &budgets, &rep.child(0))?;
                let a1 = sample_rdpg(&x, &rep.child(1));
                let a2 = sample_rdpg(&x, &rep.child(2));
                let null = arm_statistics(stats, &a1, &a2, &ks, &perms, &settings.dimension)?;
                let b1 = sample_rdpg(&x, &rep.child(4));
                let b2 = sample_rdpg(&x, &rep.child(5));
                let level = arm_statistics(stats, &b1, &b2, &ells, &perms, &settings.dimension)?;
                let alt = ys
                    .iter()
                    .map(|y| {
                        let a3 = sample_rdpg(y, &rep.child(3));
                        arm_statistics(stats, &a1, &a3, &ells, &perms, &settings.dimension)
                    })
                    .collect::<Result<_>>()?;
                Ok(Inner { null, level, alt })
            })?;
            tally(settings, &inner, &ks, &ells)
        })
        .collect::<Result<Vec<_>>>()?;

    let total = settings.n_outer * settings.n_inner;
    let cells = settings.grid.cells();
    let mut rows = Vec::new();
    for (li, &lambda) in settings.lambdas.iter().enumerate() {
        for (si, &stat) in stats.iter().enumerate() {
            for (ci, &(k, ell)) in cells.iter().enumerate() {
                let (mut power, mut level, mut crit) = (0, 0, 0.0);
                for o in &per_outer {
                    let t = &o[li][si][ci];
                    power += t.0;
                    level += t.1;
                    crit += t.2;
                }
                rows.push(GridRow {
                    statistic: stat,
                    effect: lambda,
                    k,
                    ell,
                    critical_value: crit / settings.n_outer as f64,
                    power: PowerEstimate::from_counts(power, total)?,
                    level: PowerEstimate::from_counts(level, total)?,
                });
            }
        }
    }
    Ok(rows)
}

/// Per outer iterate: `[lambda][stat][cell] -> (power hits, level hits, critical value)`.
fn tally(
    settings: &TwoTierSettings,
    inner: &[Inner],
    ks: &[usize],
    ells: &[usize],
) -> Result<Vec<Vec<Vec<(usize, usize, f64)>>>> {
    let cells = settings.grid.cells();
    let count = |vals: Vec<f64>, c: f64| vals.into_iter().filter(|&t| t > c).count();
    let mut crit: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for si in 0..settings.statistics.len() {
        for (ki, &k) in ks.iter().enumerate() {
            let dist =
                NullDistribution::new(inner.iter().map(|r| r.null[si][ki]).collect(), NullSource::DirectMc)?;
            crit.insert((si, k), empirical_critical_value(&dist, settings.alpha)?);
        }
    }
    Ok((0..settings.lambdas.len())
        .map(|li| {
            (0..settings.statistics.len())
                .map(|si| {
                    cells
                        .iter()
                        .map(|&(k, ell)| {
                            let c = crit[&(si, k)];
                            let e = ells.binary_search(&ell).expect("ell listed");
                            let p = count(inner.iter().map(|r| r.alt[li][si][e]).collect(), c);
                            let l = count(inner.iter().map(|r| r.level[si][e]).collect(), c);
                            (p, l, c)
                        })
                        .collect()
                })
                .collect()
        })
        .collect())
}
