//! Seeded graph matching: Frank-Wolfe on the doubly stochastic relaxation of
//! `min_Q ||A - Q B Q^T||_F^2` with the seeded vertices held fixed.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Permutation, StreamKey};
use crate::matching::lap::solve_lap;

/// Known correspondences `(vertex of A, vertex of B)`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SeedSet {
    pairs: Vec<(usize, usize)>,
}

impl SeedSet {
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut a: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let mut b: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        a.sort_unstable();
        b.sort_unstable();
        if a.windows(2).any(|w| w[0] == w[1]) || b.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::SeedInconsistency("a vertex appears in two seed pairs".into()));
        }
        Ok(Self { pairs })
    }

    /// Every listed vertex matched to itself.
    pub fn identity(vertices: impl IntoIterator<Item = usize>) -> Self {
        Self { pairs: vertices.into_iter().map(|v| (v, v)).collect() }
    }

    /// Identity seeds on every vertex outside `free`.
    pub fn complement_of(n: usize, free: &[usize]) -> Self {
        let mut is_free = vec![false; n];
        for &v in free {
            if v < n {
                is_free[v] = true;
            }
        }
        Self::identity((0..n).filter(|&v| !is_free[v]))
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `(seeds of A, seeds of B, free of A, free of B)`, free sets ascending.
    fn split(&self, n: usize) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>, Vec<usize>)> {
        if let Some(p) = self.pairs.iter().find(|p| p.0 >= n || p.1 >= n) {
            return Err(Error::SeedInconsistency(format!("seed pair {p:?} out of range for n = {n}")));
        }
        let a_seed: Vec<usize> = self.pairs.iter().map(|p| p.0).collect();
        let b_seed: Vec<usize> = self.pairs.iter().map(|p| p.1).collect();
        let free = |seeds: &[usize]| {
            let mut taken = vec![false; n];
            seeds.iter().for_each(|&v| taken[v] = true);
            (0..n).filter(|&v| !taken[v]).collect::<Vec<_>>()
        };
        let (a_free, b_free) = (free(&a_seed), free(&b_seed));
        Ok((a_seed, b_seed, a_free, b_free))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgmOptions {
    pub max_iters: usize,
    /// Relative objective improvement (and step size) below which iteration stops.
    pub tol: f64,
    /// Extra starts from random doubly stochastic points, beyond the barycenter.
    pub restarts: usize,
}

impl Default for SgmOptions {
    fn default() -> Self {
        Self { max_iters: 50, tol: 1e-6, restarts: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// Relabeling of `B`: `shuffle(b, permutation)` is aligned to `a`.
    pub permutation: Permutation,
    /// `||A - Q B Q^T||_F^2` at the rounded solution.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Relaxed objective after each Frank-Wolfe step of the winning start,
    /// starting with the initial point.
    pub relaxed_history: Vec<f64>,
}

struct Blocks {
    a22: DMatrix<f64>,
    b22: DMatrix<f64>,
    /// `A_21 B_21^T`, the seeded contribution.
    linear: DMatrix<f64>,
}

impl Blocks {
    /// `-(2 <linear, P> + <A22, P B22 P^T>)`.
    fn objective(&self, p: &DMatrix<f64>) -> f64 {
        let pb = p * &self.b22;
        let quad = (&self.a22 * &pb).dot(p);
        -(2.0 * self.linear.dot(p) + quad)
    }

    fn gradient(&self, p: &DMatrix<f64>) -> DMatrix<f64> {
        (&self.linear + &self.a22 * p * &self.b22) * -2.0
    }
}

fn sub_matrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| m[(rows[r], cols[c])])
}

/// Random doubly stochastic matrix by Sinkhorn balancing of uniform entries.
fn random_doubly_stochastic(m: usize, key: &StreamKey) -> DMatrix<f64> {
    let mut rng = key.rng();
    let mut k = DMatrix::from_fn(m, m, |_, _| rng.random::<f64>() + 1e-3);
    for _ in 0..1000 {
        for mut row in k.row_iter_mut() {
            let s = row.sum();
            row /= s;
        }
        for mut col in k.column_iter_mut() {
            let s = col.sum();
            col /= s;
        }
        if k.row_iter().all(|r| (r.sum() - 1.0).abs() < 1e-13) {
            break;
        }
    }
    k
}

struct Run {
    p: DMatrix<f64>,
    iterations: usize,
    converged: bool,
    history: Vec<f64>,
}

fn frank_wolfe(
    blocks: &Blocks,
    mut p: DMatrix<f64>,
    opts: &SgmOptions,
    observer: &mut dyn FnMut(&DMatrix<f64>, f64),
) -> Result<Run> {
    let mut f = blocks.objective(&p);
    let mut history = vec![f];
    observer(&p, f);
    let (mut iterations, mut converged) = (0, false);
    while iterations < opts.max_iters {
        iterations += 1;
        let grad = blocks.gradient(&p);
        let (assign, _) = solve_lap(&grad)?;
        let mut dir = -p.clone();
        for (r, &c) in assign.iter().enumerate() {
            dir[(r, c)] += 1.0;
        }
        let slope = grad.dot(&dir);
        if slope >= 0.0 {
            converged = true;
            break;
        }
        let curvature = -(&blocks.a22 * &dir * &blocks.b22).dot(&dir);
        // f(P + tD) = f + slope t + curvature t^2
        let mut t = if curvature > 0.0 { (-slope / (2.0 * curvature)).min(1.0) } else { 1.0 };
        if t > 1.0 - 1e-12 {
            t = 1.0;
        }
        p += &dir * t;
        let next = blocks.objective(&p);
        history.push(next);
        observer(&p, next);
        let improvement = f - next;
        f = next;
        if t < opts.tol || improvement <= opts.tol * f.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    Ok(Run { p, iterations, converged, history })
}

pub fn sgm(a: &Graph, b: &Graph, seeds: &SeedSet, opts: &SgmOptions, key: &StreamKey) -> Result<MatchResult> {
    sgm_observed(a, b, seeds, opts, key, &mut |_, _| {})
}

/// [`sgm`] that reports every Frank-Wolfe iterate (free block of the relaxed
/// matching, rows indexed by free vertices of `a`, columns by free vertices
/// of `b`) and its relaxed objective.
pub fn sgm_observed(
    a: &Graph,
    b: &Graph,
    seeds: &SeedSet,
    opts: &SgmOptions,
    key: &StreamKey,
    observer: &mut dyn FnMut(&DMatrix<f64>, f64),
) -> Result<MatchResult> {
    a.check_same_size(b)?;
    let n = a.n();
    let (a_seed, b_seed, a_free, b_free) = seeds.split(n)?;
    let mut mapping = vec![usize::MAX; n];
    for (&av, &bv) in a_seed.iter().zip(&b_seed) {
        mapping[bv] = av;
    }
    let m = a_free.len();
    if m == 0 {
        let permutation = Permutation::from_mapping(mapping)?;
        let objective = 2.0 * a.hamming(&b.shuffle(&permutation)?)? as f64;
        return Ok(MatchResult { permutation, objective, iterations: 0, converged: true, relaxed_history: vec![] });
    }
    let am = a.to_matrix();
    let bm = b.to_matrix();
    let blocks = Blocks {
        a22: sub_matrix(&am, &a_free, &a_free),
        b22: sub_matrix(&bm, &b_free, &b_free),
        linear: sub_matrix(&am, &a_free, &a_seed) * sub_matrix(&bm, &b_free, &b_seed).transpose(),
    };
    let barycenter = DMatrix::from_element(m, m, 1.0 / m as f64);
    let mut best: Option<(f64, Permutation, Run)> = None;
    for start in 0..=opts.restarts {
        let p0 = if start == 0 {
            barycenter.clone()
        } else {
            (&barycenter + random_doubly_stochastic(m, &key.child(start as u64))) * 0.5
        };
        let run = frank_wolfe(&blocks, p0, opts, observer)?;
        let (assign, _) = solve_lap(&(-&run.p))?;
        let mut full = mapping.clone();
        for (r, &c) in assign.iter().enumerate() {
            full[b_free[c]] = a_free[r];
        }
        let q = Permutation::from_mapping(full)?;
        let objective = 2.0 * a.hamming(&b.shuffle(&q)?)? as f64;
        if best.as_ref().is_none_or(|(o, _, _)| objective < *o) {
            best = Some((objective, q, run));
        }
    }
    let (objective, permutation, run) = best.expect("at least one start");
    Ok(MatchResult {
        permutation,
        objective,
        iterations: run.iterations,
        converged: run.converged,
        relaxed_history: run.history,
    })
}
