//! Dispatch from a validated config to the harnesses.

use log::info;

use crate::error::Result;
use crate::experiments::config::{alternatives, Experiment, ExperimentConfig, GraphSource};
use crate::experiments::edgelist::{load_edge_list, prepare_multilayer, Layer};
use crate::experiments::table::PowerTable;
use crate::graph::{ErrorSpec, Graph, StreamKey};
use crate::inference::{
    bootstrap_power_grid, direct_mc_grid, two_tier_rdpg_power, BootstrapSettings, DirectMcSettings, Model,
};
use crate::matching::{match_power_grid, MatchPowerSettings};

/// Runs the experiment with master seed `seed`. The table is a pure function
/// of `(config, seed)`.
pub fn run_experiment(cfg: &ExperimentConfig, seed: u64) -> Result<PowerTable> {
    let key = StreamKey::new(seed);
    info!("running {} experiment `{}` with seed {seed}", cfg.experiment.kind(), cfg.name);
    let (alpha, rows) = match &cfg.experiment {
        Experiment::Simulate(c) => {
            let null = Model::new(c.null.to_spec()?, None)?;
            let alts = alternatives(&c.null, &c.alternatives)?;
            let settings =
                DirectMcSettings { alpha: c.alpha, n_mc: c.n_mc, dimension: c.dimension, shuffle: c.shuffle.clone() };
            (c.alpha, direct_mc_grid(&null, &alts, &c.statistics, &c.grid, &settings, &key)?)
        }
        Experiment::Bootstrap(c) => {
            let [a1, a2, a3] = bootstrap_graphs(cfg, &c.source, &key)?;
            let d = c.dimension.resolve(&[&a1, &a2, &a3])?;
            info!("bootstrap on n = {} vertices with d = {d}", a1.n());
            let perm_key = c.permutation_seed.map_or_else(|| key.child(3), StreamKey::new);
            c.shuffle.check(a1.n(), &c.grid.all_budgets())?;
            let perms = c.shuffle.draw(a1.n(), &c.grid.all_budgets(), &perm_key)?;
            let settings = BootstrapSettings { alpha: c.alpha, replicates: c.replicates, statistic: c.statistic };
            let mut rows = bootstrap_power_grid(&a1, &a2, &a3, &c.grid, &perms, d, &settings, &key.child(4))?;
            if let GraphSource::Sampled { error: Some(ErrorSpec::ConstantShift { eps }), .. } = &c.source {
                rows.iter_mut().for_each(|r| r.effect = *eps);
            }
            (c.alpha, rows)
        }
        Experiment::TwoTier(c) => (c.alpha, two_tier_rdpg_power(c, &key)?),
        Experiment::Match(c) => {
            let null = Model::new(c.null.to_spec()?, None)?;
            let alts = alternatives(&c.null, &c.alternatives)?;
            let settings = MatchPowerSettings {
                alpha: c.alpha,
                n_mc: c.n_mc,
                dimension: c.dimension,
                shuffle: c.shuffle.clone(),
                sgm: c.sgm,
                scope: c.scope,
            };
            (c.alpha, match_power_grid(&null, &alts, c.statistic, &c.grid, &settings, &key)?)
        }
    };
    info!("{} rows", rows.len());
    Ok(PowerTable::from_grid(&cfg.name, alpha, seed, &rows))
}

fn bootstrap_graphs(cfg: &ExperimentConfig, source: &GraphSource, key: &StreamKey) -> Result<[Graph; 3]> {
    match source {
        GraphSource::Sampled { null, error } => {
            let spec = null.to_spec()?;
            let base = Model::new(spec.clone(), None)?;
            let alt = Model::new(spec, error.clone())?;
            Ok([base.sample(&key.child(0)), base.sample(&key.child(1)), alt.sample(&key.child(2))])
        }
        GraphSource::Files { a1, a2, a3, options } => {
            let layers = [("a1", a1), ("a2", a2), ("a3", a3)]
                .into_iter()
                .map(|(name, p)| {
                    let path = cfg.resolve(p);
                    Ok(Layer { name: name.into(), graph: load_edge_list(&path, options)?, source: Some(path) })
                })
                .collect::<Result<Vec<_>>>()?;
            let ds = prepare_multilayer(&layers)?;
            let mut graphs = ds.layers.into_iter().map(|(_, g)| g);
            let mut next = || graphs.next().expect("three layers");
            Ok([next(), next(), next()])
        }
    }
}
