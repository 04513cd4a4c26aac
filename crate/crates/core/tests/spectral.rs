use nalgebra::DMatrix;
use netshuffle::graph::*;
use netshuffle::spectral::*;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn gaussian(rows: usize, cols: usize, key: &StreamKey) -> DMatrix<f64> {
    let mut rng = key.rng();
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn random_orthogonal(d: usize, key: &StreamKey) -> DMatrix<f64> {
    let qr = gaussian(d, d, key).qr();
    let (q, r) = (qr.q(), qr.r());
    // fix column signs so the draw is Haar distributed
    let signs = DMatrix::from_diagonal(&r.diagonal().map(|v| v.signum()));
    q * signs
}

fn random_graph(n: usize, seed: u64) -> Graph {
    let lat = sample_dirichlet_latents(n, &[1.0, 1.0, 1.0], &[], &StreamKey::new(seed)).unwrap();
    sample_rdpg(&lat, &StreamKey::new(seed).child(1))
}

/// Independent elbow oracle: scan every split point and keep the first
/// maximizer of the pooled-variance two-group Gaussian likelihood.
fn elbow_oracle(values: &[f64]) -> usize {
    let p = values.len() as f64;
    let mut best = (0, f64::NEG_INFINITY);
    for q in 1..values.len() {
        let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
        let (m1, m2) = (mean(&values[..q]), mean(&values[q..]));
        let ss: f64 = values.iter().enumerate().map(|(i, v)| (v - if i < q { m1 } else { m2 }).powi(2)).sum();
        let ll = -0.5 * p * (ss / p).ln();
        if ll > best.1 {
            best = (q, ll);
        }
    }
    best.0
}

#[test]
fn elbow_examples_match_the_oracle() {
    let planted = [10.0, 9.5, 9.0, 1.0, 0.9, 0.8];
    assert_eq!(elbow_oracle(&planted), 3);
    assert_eq!(select_dimension(&ScreeProfile::new(planted.to_vec()).unwrap(), 5).unwrap(), 3);
    let flat = [5.0, 4.0, 3.0, 2.0, 1.0];
    assert_eq!(select_dimension(&ScreeProfile::new(flat.to_vec()).unwrap(), 4).unwrap(), elbow_oracle(&flat));
}

#[test]
fn embedding_columns_are_orthogonal() {
    for (n, d) in [(30, 3), (80, 2), (60, 5)] {
        let e = ase_graph(&random_graph(n, n as u64), d).unwrap();
        let gram = e.x().transpose() * e.x();
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    assert!(gram[(i, j)].abs() < 1e-8, "gram ({i},{j}) = {}", gram[(i, j)]);
                }
            }
        }
    }
}

#[test]
fn truncation_of_psd_matrix_does_not_grow_the_norm() {
    let key = StreamKey::new(41);
    let z = gaussian(25, 6, &key);
    let m = &z * z.transpose();
    for d in 1..=6 {
        let p = ase(&m, d).unwrap().probability_matrix();
        assert!(p.norm() <= m.norm() + 1e-9);
    }
    let exact = ase(&m, 6).unwrap().probability_matrix();
    assert!((exact.norm() - m.norm()).abs() < 1e-8 * m.norm());
}

#[test]
fn dense_and_lanczos_agree_on_graphs() {
    let m = random_graph(150, 3).to_matrix();
    let dense = top_pairs(&m, EigenSolver::Dense);
    let lanczos = top_pairs(&m, EigenSolver::Lanczos);
    for (a, b) in dense.iter().zip(&lanczos) {
        assert!((a - b).abs() < 1e-8 * a.abs().max(1.0));
    }
}

fn top_pairs(m: &DMatrix<f64>, solver: EigenSolver) -> Vec<f64> {
    eigen::top_eigenpairs(m, 4, solver).unwrap().values
}

#[test]
fn procrustes_beats_random_search() {
    let key = StreamKey::new(8);
    let x = gaussian(5, 2, &key.child(0));
    let y = gaussian(5, 2, &key.child(1));
    let (w, residual) = procrustes_align(&x, &y).unwrap();
    assert!((&w.transpose() * &w - DMatrix::identity(2, 2)).norm() < 1e-10);
    let search_key = key.child(2);
    let best = (0..10_000)
        .map(|t| (&x * random_orthogonal(2, &search_key.child(t)) - &y).norm())
        .fold(f64::INFINITY, f64::min);
    assert!(residual <= best + 1e-12, "{residual} vs {best}");
}

#[test]
fn omnibus_is_symmetric_and_vanishes_on_identical_graphs() {
    let (a, b) = (random_graph(40, 1), random_graph(40, 2));
    let m = omnibus_matrix(&a, &b).unwrap();
    assert_eq!(m, m.transpose());
    let (x, y) = omnibus_embed(&a, &a, 3).unwrap();
    assert_eq!((x - y).norm(), 0.0);
}

#[test]
fn probability_estimate_error_shrinks_with_n() {
    let rel_errors = |n: usize| -> Vec<f64> {
        (0..20)
            .map(|r| {
                let key = StreamKey::new(500 + n as u64).child(r);
                let lat = sample_dirichlet_latents(n, &[1.0, 1.0, 1.0], &[], &key.child(0)).unwrap();
                let p = lat.x() * lat.x().transpose();
                let g = sample_rdpg(&lat, &key.child(1));
                (probability_estimate(&g, 3).unwrap() - &p).norm() / p.norm()
            })
            .collect()
    };
    let (small, large) = (rel_errors(100), rel_errors(400));
    let wins = small.iter().zip(&large).filter(|(s, l)| l < s).count();
    assert!(wins >= 18, "n = 400 better in {wins}/20 paired trials");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn procrustes_value_ignores_rotations_of_x(seed in any::<u64>(), n in 3usize..12, d in 1usize..4) {
        let key = StreamKey::new(seed);
        let x = gaussian(n, d, &key.child(0));
        let y = gaussian(n, d, &key.child(1));
        let r = random_orthogonal(d, &key.child(2));
        let (_, base) = procrustes_align(&x, &y).unwrap();
        let (_, rotated) = procrustes_align(&(&x * r), &y).unwrap();
        prop_assert!((base - rotated).abs() < 1e-8);
    }

    #[test]
    fn elbow_is_scale_invariant(
        mut values in proptest::collection::vec(0.01f64..100.0, 3..20),
        scale in 1e-3f64..1e3,
    ) {
        values.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let cap = values.len() - 1;
        let base = select_dimension(&ScreeProfile::new(values.clone()).unwrap(), cap).unwrap();
        let scaled = select_dimension(&ScreeProfile::new(values.iter().map(|v| v * scale).collect()).unwrap(), cap).unwrap();
        prop_assert_eq!(base, scaled);
    }

    #[test]
    fn elbow_matches_the_oracle(mut values in proptest::collection::vec(0.0f64..50.0, 2..16)) {
        values.sort_by(|a, b| b.partial_cmp(a).unwrap());
        prop_assume!(values.windows(2).any(|w| w[0] > w[1]));
        let chosen = select_dimension(&ScreeProfile::new(values.clone()).unwrap(), values.len() - 1).unwrap();
        prop_assert_eq!(chosen, elbow_oracle(&values));
    }

    #[test]
    fn embedding_is_equivariant_in_probability(seed in any::<u64>()) {
        let g = random_graph(30, seed % 1000);
        let q = random_derangement(30, &(0..30).collect::<Vec<_>>(), &StreamKey::new(seed)).unwrap();
        let direct = probability_estimate(&g.shuffle(&q).unwrap(), 2).unwrap();
        let moved = q.conjugate(&probability_estimate(&g, 2).unwrap()).unwrap();
        prop_assert!((direct - moved).norm() < 1e-8);
    }
}
