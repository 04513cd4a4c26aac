use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use netshuffle::experiments::config::Experiment;
use netshuffle::experiments::*;
use netshuffle::graph::{Graph, StreamKey};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn bundled(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(configs().join(name)).unwrap()
}

fn edge_set(g: &LabeledGraph) -> BTreeSet<(String, String)> {
    g.graph
        .edges()
        .map(|(u, v)| {
            let (a, b) = (g.labels[u].clone(), g.labels[v].clone());
            if a < b {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect()
}

fn write_to_string(g: &LabeledGraph) -> String {
    let mut buf = Vec::new();
    write_edge_list(&mut buf, g).unwrap();
    String::from_utf8(buf).unwrap()
}

proptest! {
    #[test]
    fn write_then_read_preserves_labeled_edges(
        n in 2usize..25,
        edges in proptest::collection::vec((0usize..25, 0usize..25), 1..80),
    ) {
        let edges: Vec<_> = edges.into_iter().map(|(u, v)| (u % n, v % n)).filter(|(u, v)| u != v).collect();
        prop_assume!(!edges.is_empty());
        let raw = LabeledGraph {
            graph: Graph::from_edges(n, edges.iter().copied()).unwrap(),
            labels: (0..n).map(|i| format!("v{i}")).collect(),
        };
        let labels_in_edges: BTreeSet<String> = edge_set(&raw).into_iter().flat_map(|(a, b)| [a, b]).collect();
        let back = read_edge_list(write_to_string(&raw).as_bytes(), &EdgeListOptions::default()).unwrap();
        prop_assert_eq!(edge_set(&back), edge_set(&raw));
        prop_assert_eq!(back.labels.iter().cloned().collect::<BTreeSet<_>>(), labels_in_edges);
        prop_assert_eq!(back.labels.len(), back.graph.n());
        prop_assert!((0..back.graph.n()).all(|v| back.graph.degree(v) > 0));
    }
}

fn write_layer(dir: &Path, name: &str, edges: &[(String, String)]) -> PathBuf {
    let path = dir.join(format!("{name}.txt"));
    let body: String = edges.iter().map(|(u, v)| format!("{u} {v}\n")).collect();
    std::fs::write(&path, format!("# layer {name}\n{body}")).unwrap();
    path
}

fn tokens(path: &Path) -> HashSet<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .flat_map(|l| l.split_whitespace().map(str::to_owned).collect::<Vec<_>>())
        .collect()
}

#[test]
fn three_layer_intersection_matches_set_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = StreamKey::new(11).rng();
    let common: Vec<String> = (0..422).map(|i| format!("user{i}")).collect();
    let mut paths = Vec::new();
    for (li, name) in ["youtube", "twitter", "friendfeed"].into_iter().enumerate() {
        // Private ids plus ids shared with exactly one other layer.
        let mut ids = common.clone();
        ids.extend((0..150).map(|i| format!("{name}_{i}")));
        ids.extend((0..60).map(|i| format!("pair{}_{i}", (li + 1) % 3)));
        ids.extend((0..60).map(|i| format!("pair{li}_{i}")));
        ids.shuffle(&mut rng);
        let mut edges: Vec<_> = ids.iter().zip(ids.iter().cycle().skip(1)).map(|(a, b)| (a.clone(), b.clone())).collect();
        for _ in 0..400 {
            let (a, b) = (rng.random_range(0..ids.len()), rng.random_range(0..ids.len()));
            edges.push((ids[a].clone(), ids[b].clone()));
        }
        paths.push((name, write_layer(dir.path(), name, &edges)));
    }
    let opts = EdgeListOptions::default();
    let layers: Vec<Layer> = paths
        .iter()
        .map(|(name, p)| Layer { name: (*name).into(), graph: load_edge_list(p, &opts).unwrap(), source: Some(p.clone()) })
        .collect();
    let sets: Vec<HashSet<String>> = paths.iter().map(|(_, p)| tokens(p)).collect();
    let oracle: BTreeSet<String> = sets[0].iter().filter(|s| sets[1].contains(*s) && sets[2].contains(*s)).cloned().collect();
    assert_eq!(oracle.len(), 422);
    let ds = prepare_multilayer(&layers).unwrap();
    assert_eq!(ds.labels, oracle.into_iter().collect::<Vec<_>>());
    assert_eq!(ds.provenance.len(), 3);
    for (name, g) in &ds.layers {
        assert_eq!(g.n(), 422, "layer {name}");
    }
}

#[test]
fn planted_core_of_ten_survives_alone() {
    let core: Vec<String> = (0..10).map(|i| format!("c{i}")).collect();
    let layers: Vec<Layer> = (0..3)
        .map(|li| {
            let mut edges: Vec<(String, String)> = (0..10).map(|i| (core[i].clone(), core[(i + li + 1) % 10].clone())).collect();
            edges.extend((0..30).map(|i| (format!("p{li}_{i}"), format!("p{li}_{}", i + 1))));
            edges.extend((0..10).map(|i| (core[i].clone(), format!("p{li}_{}", 3 * i))));
            let text: String = edges.iter().map(|(u, v)| format!("{u} {v}\n")).collect();
            let graph = read_edge_list(text.as_bytes(), &EdgeListOptions::default()).unwrap();
            Layer { name: format!("layer{li}"), graph, source: None }
        })
        .collect();
    let ds = prepare_multilayer(&layers).unwrap();
    assert_eq!(ds.labels, core);
    assert!(ds.layers.iter().all(|(_, g)| g.n() == 10 && g.edge_count() == 10));
}

#[test]
fn vertices_isolated_everywhere_after_restriction_are_dropped() {
    let layer = |name: &str, text: &str| Layer {
        name: name.into(),
        graph: read_edge_list(text.as_bytes(), &EdgeListOptions::default()).unwrap(),
        source: None,
    };
    let ds = prepare_multilayer(&[layer("a", "x y\nz q\n"), layer("b", "x y\nz r\n")]).unwrap();
    assert_eq!(ds.labels, ["x", "y"]);
    assert_eq!(ds.layer("b").unwrap().edge_count(), 1);
    let ds = prepare_multilayer(&[layer("a", "x y\nz q\n"), layer("b", "x z\ny r\n")]).unwrap();
    assert_eq!(ds.labels, ["x", "y", "z"]);
}

#[test]
fn fig3_desk_has_one_row_per_effect_and_cell() {
    let cfg = bundled("fig3_desk.cfg");
    let table = run_experiment(&cfg, cfg.seed).unwrap();
    let Experiment::Simulate(sim) = &cfg.experiment else { panic!("fig3 is a simulate config") };
    let effects: BTreeSet<String> = table.rows.iter().map(|r| r.effect.to_string()).collect();
    let want: BTreeSet<String> = ["-0.03", "-0.02", "-0.01", "0.01", "0.02", "0.03"].map(String::from).into();
    assert_eq!(effects, want);
    let keys: HashSet<(String, usize, usize)> = table.rows.iter().map(|r| (r.effect.to_string(), r.k, r.ell)).collect();
    assert_eq!(keys.len(), table.rows.len());
    assert_eq!(table.rows.len(), 6 * sim.grid.cells().len());
    for r in &table.rows {
        assert_eq!(r.statistic, "adjacency");
        assert!(r.ell <= r.k);
        assert!((0.0..=1.0).contains(&r.power) && (0.0..=1.0).contains(&r.level));
        let se = (r.power * (1.0 - r.power) / r.n_mc as f64).sqrt();
        assert!((r.power_se - se).abs() < 1e-12);
    }
}

#[test]
fn fig5_desk_covers_all_four_statistics() {
    let cfg = bundled("fig5_desk.cfg");
    let table = run_experiment(&cfg, cfg.seed).unwrap();
    let stats: BTreeSet<&str> = table.rows.iter().map(|r| r.statistic.as_str()).collect();
    assert_eq!(stats, BTreeSet::from(["adjacency", "omni", "phat", "semipar"]));
    let ks: BTreeSet<usize> = table.rows.iter().map(|r| r.k).collect();
    assert_eq!(ks, BTreeSet::from([20, 50, 75, 100]));
    let lambdas: BTreeSet<String> = table.rows.iter().map(|r| r.effect.to_string()).collect();
    assert_eq!(lambdas.len(), 5);
    assert_eq!(table.rows.len(), 4 * 5 * 8);
}

#[test]
fn reruns_are_byte_identical() {
    for name in ["fig3_desk.cfg", "bootstrap_desk.cfg", "match_desk.cfg"] {
        let cfg = bundled(name);
        let first = run_experiment(&cfg, cfg.seed).unwrap().to_csv_string().unwrap();
        let second = run_experiment(&cfg, cfg.seed).unwrap().to_csv_string().unwrap();
        assert_eq!(first, second, "{name}");
        let other = run_experiment(&cfg, cfg.seed + 1).unwrap().to_csv_string().unwrap();
        assert_ne!(first, other, "{name}");
    }
}

#[test]
fn bundled_configs_round_trip_through_serde() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "cfg") {
            let cfg = ExperimentConfig::load(&path).unwrap();
            let text = serde_json::to_string(&cfg).unwrap();
            let back = ExperimentConfig::from_json(&text, cfg.base_dir.clone()).unwrap();
            assert_eq!(back, cfg, "{}", path.display());
        }
    }
}

#[test]
fn bootstrap_from_edge_list_files() {
    let dir = tempfile::tempdir().unwrap();
    let key = StreamKey::new(12);
    for (i, name) in ["a1", "a2", "a3"].into_iter().enumerate() {
        let g = netshuffle::graph::sample_edge_independent(60, &key.child(i as u64), |_, _| 0.3);
        let labeled = LabeledGraph { graph: g, labels: (0..60).map(|v| format!("n{v}")).collect() };
        save_edge_list(dir.path().join(format!("{name}.edges")), &labeled).unwrap();
    }
    let text = r#"{"schema_version": 1, "name": "files", "seed": 5, "experiment": {
        "kind": "bootstrap",
        "source": {"kind": "files", "a1": "a1.edges", "a2": "a2.edges", "a3": "a3.edges"},
        "statistic": "phat", "grid": {"k_values": [0, 10], "ell_values": [0, 10]},
        "alpha": 0.05, "replicates": 10, "dimension": {"fixed": 1},
        "shuffle": {"kind": "nested"}, "permutation_seed": 3}}"#;
    std::fs::write(dir.path().join("files.cfg"), text).unwrap();
    let cfg = ExperimentConfig::load(dir.path().join("files.cfg")).unwrap();
    let table = run_experiment(&cfg, cfg.seed).unwrap();
    assert_eq!(table.rows.len(), 3);
    assert!(table.rows.iter().all(|r| r.n_mc == 10));

    std::fs::remove_file(dir.path().join("a3.edges")).unwrap();
    let err = ExperimentConfig::load(dir.path().join("files.cfg")).unwrap_err();
    assert!(matches!(err, netshuffle::Error::Config { ref path, .. } if path == "experiment.source.a3"), "{err}");
}
