use std::collections::BTreeMap;

use netshuffle::graph::*;
use netshuffle::inference::*;
use netshuffle::stats::Statistic;
use proptest::prelude::*;

fn eq_aande(n1: usize, n2: usize) -> SbmSpec {
    SbmSpec::new(vec![vec![0.55, 0.4], vec![0.4, 0.45]], vec![n1, n2], 1.0).unwrap()
}

fn sbm_model(n1: usize, n2: usize, eps: Option<f64>) -> Model {
    Model::new(ModelSpec::Sbm(eq_aande(n1, n2)), eps.map(ErrorSpec::constant)).unwrap()
}

fn settings(n_mc: usize, n1: usize, n2: usize) -> DirectMcSettings {
    DirectMcSettings {
        alpha: 0.05,
        n_mc,
        dimension: DimensionMode::Fixed(2),
        shuffle: ShuffleScheme::Block { n1, n2 },
    }
}

proptest! {
    #[test]
    fn critical_value_is_nonincreasing_in_alpha(
        samples in proptest::collection::vec(-1e3f64..1e3, 1..200),
        a in 0.001f64..0.999,
        b in 0.001f64..0.999,
    ) {
        let null = NullDistribution::new(samples, NullSource::DirectMc).unwrap();
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(empirical_critical_value(&null, lo).unwrap() >= empirical_critical_value(&null, hi).unwrap());
    }

    #[test]
    fn rejection_survives_monotone_transforms(
        samples in proptest::collection::vec(-5.0f64..5.0, 1..100),
        observed in -6.0f64..6.0,
        alpha in 0.01f64..0.5,
    ) {
        let f = |x: f64| x.exp() + x.powi(3);
        let raw = NullDistribution::new(samples.clone(), NullSource::DirectMc).unwrap();
        let moved = NullDistribution::new(samples.into_iter().map(f).collect(), NullSource::DirectMc).unwrap();
        let before = rejects(observed, empirical_critical_value(&raw, alpha).unwrap());
        let after = rejects(f(observed), empirical_critical_value(&moved, alpha).unwrap());
        prop_assert_eq!(before, after);
    }

    #[test]
    fn power_se_is_binomial(hits in 0usize..500, extra in 0usize..500) {
        let n = hits + extra.max(1);
        let p = PowerEstimate::from_counts(hits, n).unwrap();
        prop_assert_eq!(p.n_reps, n);
        prop_assert!((p.se - (p.power * (1.0 - p.power) / n as f64).sqrt()).abs() < 1e-15);
    }
}

#[test]
fn level_is_controlled_for_every_statistic() {
    let null = sbm_model(30, 30, None);
    let alt = [Alternative { effect: 0.0, model: null.clone() }];
    let grid = ShuffleGrid::new(vec![0, 10], vec![vec![0], vec![10]]).unwrap();
    let n_mc = 400;
    let rows = direct_mc_grid(&null, &alt, &Statistic::ALL, &grid, &settings(n_mc, 30, 30), &StreamKey::new(3)).unwrap();
    let se = (0.05f64 * 0.95 / n_mc as f64).sqrt();
    for r in rows {
        for (arm, est) in [("alternative", r.power), ("level", r.level)] {
            assert!(
                (est.power - 0.05).abs() <= 4.0 * se,
                "{} {arm} at k = ell = {}: {}",
                r.statistic,
                r.k,
                est.power
            );
        }
    }
}

#[test]
fn single_cell_power_matches_the_grid() {
    let null = sbm_model(30, 30, None);
    let alt = sbm_model(30, 30, Some(0.05));
    let s = settings(100, 30, 30);
    let key = StreamKey::new(12);
    let single = direct_mc_power(&null, &alt, Statistic::Adjacency, 10, 4, &s, &key).unwrap();
    let grid = ShuffleGrid::single(10, 4).unwrap();
    let rows =
        direct_mc_grid(&null, &[Alternative { effect: 0.05, model: alt }], &[Statistic::Adjacency], &grid, &s, &key)
            .unwrap();
    assert_eq!(single, rows[0].power);
    assert!(direct_mc_power(&null, &null, Statistic::Adjacency, 2, 4, &s, &key).is_err());
}

#[test]
fn grid_output_does_not_depend_on_thread_count() {
    let null = sbm_model(20, 20, None);
    let alts = [Alternative { effect: 0.04, model: sbm_model(20, 20, Some(0.04)) }];
    let grid = ShuffleGrid::triangular(&[0, 6], &[0, 6]).unwrap();
    let s = DirectMcSettings { shuffle: ShuffleScheme::Nested { unknown: None }, ..settings(60, 20, 20) };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| direct_mc_grid(&null, &alts, &Statistic::ALL, &grid, &s, &StreamKey::new(5)).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn bootstrap_returns_the_requested_number_of_positive_values() {
    let spec = eq_aande(40, 40);
    let key = StreamKey::new(17);
    let a1 = sample_sbm(&spec, &key.child(0));
    let null = parametric_bootstrap_null(&a1, &a1, &Permutation::identity(80), Statistic::Phat, 2, 5, &key).unwrap();
    assert_eq!(null.len(), 5);
    assert_eq!(null.source(), NullSource::Bootstrap);
    assert!(null.samples().iter().all(|v| v.is_finite() && *v > 0.0));
    assert!(parametric_bootstrap_null(&a1, &a1, &Permutation::identity(80), Statistic::Phat, 2, 0, &key).is_err());
}

#[test]
fn bootstrap_null_mean_grows_with_the_shuffle() {
    let spec = eq_aande(250, 250);
    let increasing = (0..20)
        .filter(|&s| {
            let key = StreamKey::new(800 + s);
            let (a1, a2) = (sample_sbm(&spec, &key.child(0)), sample_sbm(&spec, &key.child(1)));
            let means: Vec<f64> = [0, 10, 20]
                .iter()
                .map(|&k| {
                    let q = block_shuffle_permutation(250, 250, 0, k).unwrap();
                    parametric_bootstrap_null(&a1, &a2, &q, Statistic::Phat, 2, 20, &key.child(2)).unwrap().mean()
                })
                .collect();
            means.windows(2).all(|w| w[0] <= w[1])
        })
        .count();
    assert!(increasing >= 18, "nondecreasing in {increasing}/20 seeds");
}

#[test]
fn bootstrap_grid_level_and_power() {
    let spec = eq_aande(50, 50);
    let key = StreamKey::new(33);
    let (a1, a2) = (sample_sbm(&spec, &key.child(0)), sample_sbm(&spec, &key.child(1)));
    let grid = ShuffleGrid::triangular(&[0, 20], &[0, 20]).unwrap();
    let perms: BTreeMap<usize, Permutation> =
        [0, 20].into_iter().map(|k| (k, block_shuffle_permutation(50, 50, 0, k).unwrap())).collect();
    let s = BootstrapSettings { alpha: 0.05, replicates: 200, statistic: Statistic::Phat };
    let rows = bootstrap_power_grid(&a1, &a2, &a2, &grid, &perms, 2, &s, &key.child(2)).unwrap();
    for r in &rows {
        if r.k == r.ell {
            assert!((r.level.power - 0.05).abs() <= 0.05, "diagonal ({}, {}) level {}", r.k, r.ell, r.level.power);
        } else {
            assert!(r.level.power < 0.05, "off-diagonal ({}, {}) level {}", r.k, r.ell, r.level.power);
        }
        let spread = 4.0 * (r.power.se.powi(2) + r.level.se.powi(2)).sqrt().max(0.01);
        assert!((r.power.power - r.level.power).abs() <= spread, "a3 == a2 at ({}, {})", r.k, r.ell);
    }
    let mut missing = perms.clone();
    missing.remove(&20);
    assert!(bootstrap_power_grid(&a1, &a2, &a2, &grid, &missing, 2, &s, &key).is_err());
}

fn two_tier(lambdas: Vec<f64>) -> TwoTierSettings {
    TwoTierSettings {
        n: 50,
        dirichlet: vec![1.0, 1.0, 1.0],
        perturbed_rows: 5,
        base_row: vec![0.8, 0.1, 0.1],
        target_row: vec![0.1, 0.1, 0.8],
        lambdas,
        statistics: vec![Statistic::Phat, Statistic::Omni],
        grid: ShuffleGrid::triangular(&[0, 10, 20], &[0, 10, 20]).unwrap(),
        alpha: 0.05,
        n_outer: 4,
        n_inner: 50,
        dimension: DimensionMode::Fixed(3),
        unknown: None,
    }
}

#[test]
fn two_tier_without_signal_stays_near_alpha() {
    let rows = two_tier_rdpg_power(&two_tier(vec![0.0]), &StreamKey::new(21)).unwrap();
    assert_eq!(rows.len(), 2 * 6);
    for r in rows {
        assert_eq!(r.power.n_reps, 200);
        assert!((r.power.power - 0.05).abs() <= 0.05, "{} ({}, {}): {}", r.statistic, r.k, r.ell, r.power.power);
    }
}

#[test]
fn two_tier_settings_are_validated() {
    let mut s = two_tier(vec![1.5]);
    assert!(s.validate().is_err());
    s.lambdas = vec![0.5];
    s.grid = ShuffleGrid::single(60, 0).unwrap();
    assert!(s.validate().is_err());
    s.grid = ShuffleGrid::single(0, 0).unwrap();
    s.target_row = vec![1.0];
    assert!(s.validate().is_err());
}
