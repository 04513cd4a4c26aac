//! Edge-independent random graph models: stochastic block models, random dot
//! product graphs and the structured perturbations used as alternatives.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Permutation, StreamKey};

const PROB_TOL: f64 = 1e-12;

/// Stochastic block model with contiguous blocks: vertices `0..n_1` form
/// block 0, the next `n_2` block 1, and so on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SbmSpecRaw", into = "SbmSpecRaw")]
pub struct SbmSpec {
    lambda: DMatrix<f64>,
    sizes: Vec<usize>,
    nu: f64,
    block_of: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SbmSpecRaw {
    lambda: Vec<Vec<f64>>,
    sizes: Vec<usize>,
    #[serde(default = "one")]
    nu: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<SbmSpecRaw> for SbmSpec {
    type Error = Error;
    fn try_from(raw: SbmSpecRaw) -> Result<Self> {
        SbmSpec::new(raw.lambda, raw.sizes, raw.nu)
    }
}

impl From<SbmSpec> for SbmSpecRaw {
    fn from(spec: SbmSpec) -> Self {
        let k = spec.blocks();
        SbmSpecRaw {
            lambda: (0..k).map(|i| (0..k).map(|j| spec.lambda[(i, j)]).collect()).collect(),
            sizes: spec.sizes,
            nu: spec.nu,
        }
    }
}

impl SbmSpec {
    pub fn new(lambda: Vec<Vec<f64>>, sizes: Vec<usize>, nu: f64) -> Result<Self> {
        let k = lambda.len();
        if k == 0 || lambda.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidSpec("block matrix must be square and nonempty".into()));
        }
        if sizes.len() != k {
            return Err(Error::InvalidSpec(format!(
                "{} block sizes given for {k} blocks",
                sizes.len()
            )));
        }
        if !(0.0..=1.0).contains(&nu) {
            return Err(Error::InvalidSpec(format!("sparsity {nu} outside [0, 1]")));
        }
        let lambda = DMatrix::from_fn(k, k, |i, j| lambda[i][j]);
        for i in 0..k {
            for j in 0..k {
                let v = lambda[(i, j)];
                if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidSpec(format!(
                        "block probability {v} at ({i}, {j}) outside [0, 1]"
                    )));
                }
                if (v - lambda[(j, i)]).abs() > 0.0 {
                    return Err(Error::InvalidSpec("block matrix must be symmetric".into()));
                }
            }
        }
        let block_of = sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat_n(b, s)).collect();
        Ok(Self { lambda, sizes, nu, block_of })
    }

    /// Arbitrary memberships: returns the contiguous spec plus the relabeling
    /// that maps an original vertex to its position in the contiguous layout.
    pub fn from_memberships(
        lambda: Vec<Vec<f64>>,
        membership: &[usize],
        nu: f64,
    ) -> Result<(Self, Permutation)> {
        let k = lambda.len();
        if let Some(&bad) = membership.iter().find(|&&b| b >= k) {
            return Err(Error::InvalidSpec(format!("membership {bad} with {k} blocks")));
        }
        let mut sizes = vec![0usize; k];
        for &b in membership {
            sizes[b] += 1;
        }
        let mut next: Vec<usize> = sizes
            .iter()
            .scan(0, |acc, &s| {
                let start = *acc;
                *acc += s;
                Some(start)
            })
            .collect();
        let mapping = membership
            .iter()
            .map(|&b| {
                let pos = next[b];
                next[b] += 1;
                pos
            })
            .collect();
        Ok((Self::new(lambda, sizes, nu)?, Permutation::from_mapping(mapping)?))
    }

    pub fn n(&self) -> usize {
        self.block_of.len()
    }

    pub fn blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn lambda(&self, a: usize, b: usize) -> f64 {
        self.lambda[(a, b)]
    }

    pub fn block_of(&self, v: usize) -> usize {
        self.block_of[v]
    }

    #[inline]
    pub fn edge_probability(&self, u: usize, v: usize) -> f64 {
        self.nu * self.lambda[(self.block_of[u], self.block_of[v])]
    }

    /// Same model with `delta` added to every block probability.
    pub fn shifted(&self, delta: f64) -> Result<Self> {
        let k = self.blocks();
        let lambda = (0..k).map(|i| (0..k).map(|j| self.lambda[(i, j)] + delta).collect()).collect();
        Self::new(lambda, self.sizes.clone(), self.nu)
    }
}

/// Latent positions of a random dot product graph.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentPositions {
    x: DMatrix<f64>,
    nu: f64,
}

impl LatentPositions {
    pub fn new(x: DMatrix<f64>, nu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&nu) {
            return Err(Error::InvalidSpec(format!("sparsity {nu} outside [0, 1]")));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        // Nonnegative rows with nu * max |X_i|^2 <= 1 are valid by Cauchy-Schwarz;
        // anything else gets the pairwise check.
        let max_norm_sq = x.row_iter().map(|r| r.norm_squared()).fold(0.0, f64::max);
        if x.iter().any(|&v| v < 0.0) || nu * max_norm_sq > 1.0 + PROB_TOL {
            for i in 0..x.nrows() {
                for j in i..x.nrows() {
                    let p = nu * x.row(i).dot(&x.row(j));
                    if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&p) {
                        return Err(Error::ProbabilityOutOfRange { row: i, col: j, value: p });
                    }
                }
            }
        }
        Ok(Self { x, nu })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// Copy with the given rows replaced.
    pub fn with_rows(&self, rows: &[(usize, Vec<f64>)]) -> Result<Self> {
        let mut x = self.x.clone();
        for (i, row) in rows {
            if *i >= x.nrows() || row.len() != x.ncols() {
                return Err(Error::InvalidSpec(format!("replacement row {i} has wrong shape")));
            }
            for (c, &v) in row.iter().enumerate() {
                x[(*i, c)] = v;
            }
        }
        Self::new(x, self.nu)
    }
}

/// Structured additive perturbation `E` of an expectation matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ErrorSpec {
    /// `E = eps * J`.
    ConstantShift { eps: f64 },
    /// `E = [[E_r, E_r'], [E_r'^T, 0]]`: only the first `r` rows and columns
    /// are perturbed. `core` is `r x r` (symmetric), `border` is `r x (n - r)`.
    BlockBordered {
        eps: f64,
        c1: f64,
        c2: f64,
        core: Vec<Vec<f64>>,
        border: Vec<Vec<f64>>,
    },
}

impl ErrorSpec {
    pub fn constant(eps: f64) -> Self {
        ErrorSpec::ConstantShift { eps }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ErrorSpec::ConstantShift { eps } if !eps.is_finite() => Err(Error::NonFinite),
            ErrorSpec::ConstantShift { .. } => Ok(()),
            ErrorSpec::BlockBordered { eps, c1, c2, core, border } => {
                if !(c1 < c2) || *c1 < 0.0 {
                    return Err(Error::InvalidSpec("need 0 <= c1 < c2".into()));
                }
                let r = core.len();
                if core.iter().any(|row| row.len() != r) || border.len() != r {
                    return Err(Error::InvalidSpec("core must be r x r and border r x (n-r)".into()));
                }
                let width = border.first().map_or(0, Vec::len);
                if border.iter().any(|row| row.len() != width) {
                    return Err(Error::InvalidSpec("ragged border".into()));
                }
                for i in 0..r {
                    for j in 0..r {
                        if core[i][j] != core[j][i] {
                            return Err(Error::InvalidSpec("core block must be symmetric".into()));
                        }
                    }
                }
                let (lo, hi) = (c1 * eps.abs(), c2 * eps.abs());
                let bad = core.iter().chain(border).flatten().find(|e| {
                    let m = e.abs();
                    m < lo - PROB_TOL || m > hi + PROB_TOL
                });
                if let Some(e) = bad {
                    return Err(Error::InvalidSpec(format!(
                        "perturbation {e} outside [c1*eps, c2*eps] = [{lo}, {hi}]"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Perturbation entry `e_uv` for an `n`-vertex graph.
    pub fn entry(&self, n: usize, u: usize, v: usize) -> f64 {
        match self {
            ErrorSpec::ConstantShift { eps } => *eps,
            ErrorSpec::BlockBordered { core, border, .. } => {
                let r = core.len();
                debug_assert!(border.first().is_none_or(|b| b.len() + r == n));
                match (u < r, v < r) {
                    (true, true) => core[u][v],
                    (true, false) => border[u][v - r],
                    (false, true) => border[v][u - r],
                    (false, false) => 0.0,
                }
            }
        }
    }

    pub fn matrix(&self, n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |u, v| self.entry(n, u, v))
    }
}

/// Any base model the crate can sample.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Sbm(SbmSpec),
    Rdpg(LatentPositions),
}

impl ModelSpec {
    pub fn n(&self) -> usize {
        match self {
            ModelSpec::Sbm(s) => s.n(),
            ModelSpec::Rdpg(l) => l.n(),
        }
    }

    fn nu(&self) -> f64 {
        match self {
            ModelSpec::Sbm(s) => s.nu(),
            ModelSpec::Rdpg(l) => l.nu(),
        }
    }
}

/// `P = E[A]`: `nu * Lambda[b(u), b(v)]` for an SBM, `nu * X X^T` for an RDPG,
/// plus `nu * e_uv` when a perturbation is supplied. The diagonal is kept as
/// computed.
pub fn expectation_matrix(model: &ModelSpec, err: Option<&ErrorSpec>) -> Result<DMatrix<f64>> {
    let n = model.n();
    let mut p = match model {
        ModelSpec::Sbm(s) => DMatrix::from_fn(n, n, |u, v| s.edge_probability(u, v)),
        ModelSpec::Rdpg(l) => l.x() * l.x().transpose() * l.nu(),
    };
    if let Some(err) = err {
        err.validate()?;
        let nu = model.nu();
        for v in 0..n {
            for u in 0..n {
                p[(u, v)] += nu * err.entry(n, u, v);
            }
        }
    }
    validate_probabilities(&p)?;
    Ok(p)
}

/// Checks a symmetric matrix lies in `[0, 1]` (tiny rounding excursions are
/// tolerated) and names the first offending pair.
pub fn validate_probabilities(p: &DMatrix<f64>) -> Result<()> {
    if p.nrows() != p.ncols() {
        return Err(Error::NotSquare { rows: p.nrows(), cols: p.ncols() });
    }
    for i in 0..p.nrows() {
        for j in i..p.ncols() {
            let v = p[(i, j)];
            if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&v) || !v.is_finite() {
                return Err(Error::ProbabilityOutOfRange { row: i, col: j, value: v });
            }
        }
    }
    Ok(())
}

/// Draws every unordered pair `{i, j}`, `i < j`, independently with
/// probability `prob(i, j)`, in lexicographic pair order.
pub fn sample_edge_independent<F>(n: usize, key: &StreamKey, prob: F) -> Graph
where
    F: Fn(usize, usize) -> f64,
{
    let mut rng = key.rng();
    let mut g = Graph::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < prob(i, j) {
                g.set_edge(i, j, true);
            }
        }
    }
    g
}

pub fn sample_sbm(spec: &SbmSpec, key: &StreamKey) -> Graph {
    sample_edge_independent(spec.n(), key, |i, j| spec.edge_probability(i, j))
}

pub fn sample_rdpg(lat: &LatentPositions, key: &StreamKey) -> Graph {
    let p = lat.x() * lat.x().transpose() * lat.nu();
    sample_edge_independent(lat.n(), key, |i, j| p[(i, j)])
}

/// Samples from an arbitrary probability matrix (only the strict upper
/// triangle is read).
pub fn sample_from_probabilities(p: &DMatrix<f64>, key: &StreamKey) -> Graph {
    sample_edge_independent(p.nrows(), key, |i, j| p[(i, j)])
}

pub fn sample_model(model: &ModelSpec, err: Option<&ErrorSpec>, key: &StreamKey) -> Result<Graph> {
    match (model, err) {
        (ModelSpec::Sbm(s), None) => Ok(sample_sbm(s, key)),
        (ModelSpec::Rdpg(l), None) => Ok(sample_rdpg(l, key)),
        (m, Some(e)) => Ok(sample_from_probabilities(&expectation_matrix(m, Some(e))?, key)),
    }
}

/// `n` latent rows: rows listed in `fixed` take the given value, all others are
/// i.i.d. Dirichlet(`alpha`).
pub fn sample_dirichlet_latents(
    n: usize,
    alpha: &[f64],
    fixed: &[(usize, Vec<f64>)],
    key: &StreamKey,
) -> Result<LatentPositions> {
    let d = alpha.len();
    if d == 0 || alpha.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
        return Err(Error::InvalidSpec("Dirichlet concentrations must be positive".into()));
    }
    let mut is_fixed = vec![None; n];
    for (i, row) in fixed {
        if *i >= n || row.len() != d {
            return Err(Error::InvalidSpec(format!("fixed row {i} has wrong shape")));
        }
        let sum: f64 = row.iter().sum();
        if row.iter().any(|&v| v < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSpec(format!("fixed row {i} is not on the simplex")));
        }
        is_fixed[*i] = Some(row);
    }
    let gammas: Vec<Gamma<f64>> = alpha
        .iter()
        .map(|&a| Gamma::new(a, 1.0).map_err(|e| Error::InvalidSpec(e.to_string())))
        .collect::<Result<_>>()?;
    let mut rng = key.rng();
    let mut x = DMatrix::zeros(n, d);
    for i in 0..n {
        match is_fixed[i] {
            Some(row) => {
                for c in 0..d {
                    x[(i, c)] = row[c];
                }
            }
            None => {
                let draws: Vec<f64> = gammas.iter().map(|g| g.sample(&mut rng)).collect();
                let total: f64 = draws.iter().sum();
                for c in 0..d {
                    x[(i, c)] = draws[c] / total;
                }
            }
        }
    }
    LatentPositions::new(x, 1.0)
}
