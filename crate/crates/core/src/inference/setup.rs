//! Shared experiment ingredients: shuffle grids, shuffle schemes, dimension
//! selection and simulated models.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    block_shuffle_permutation, expectation_matrix, nested_permutation_sequence, random_order,
    sample_from_probabilities, ErrorSpec, Graph, ModelSpec, Permutation, StreamKey,
};
use crate::spectral::{common_dimension, default_dimension_cap};

/// `(k, ell)` cells: null shuffle budget `k` and alternative budget `ell <= k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GridRaw", into = "GridRaw")]
pub struct ShuffleGrid {
    k_values: Vec<usize>,
    ell_values: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridRaw {
    k_values: Vec<usize>,
    ell_values: EllValues,
}

/// Either one list applied to every `k` (keeping `ell <= k`) or one list per `k`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EllValues {
    Shared(Vec<usize>),
    PerK(Vec<Vec<usize>>),
}

impl TryFrom<GridRaw> for ShuffleGrid {
    type Error = Error;
    fn try_from(raw: GridRaw) -> Result<Self> {
        match raw.ell_values {
            EllValues::Shared(ells) => ShuffleGrid::triangular(&raw.k_values, &ells),
            EllValues::PerK(ells) => ShuffleGrid::new(raw.k_values, ells),
        }
    }
}

impl From<ShuffleGrid> for GridRaw {
    fn from(g: ShuffleGrid) -> Self {
        GridRaw { k_values: g.k_values, ell_values: EllValues::PerK(g.ell_values) }
    }
}

impl ShuffleGrid {
    /// Explicit cells; each `k` lists its own `ell` values.
    pub fn new(k_values: Vec<usize>, ell_values: Vec<Vec<usize>>) -> Result<Self> {
        if k_values.is_empty() || k_values.len() != ell_values.len() {
            return Err(Error::InvalidInput("grid needs one ell list per k".into()));
        }
        for (k, ells) in k_values.iter().zip(&ell_values) {
            if ells.is_empty() {
                return Err(Error::InvalidInput(format!("no ell values for k = {k}")));
            }
            if let Some(l) = ells.iter().find(|&&l| l > *k) {
                return Err(Error::InvalidInput(format!("ell = {l} exceeds k = {k}")));
            }
        }
        Ok(Self { k_values, ell_values })
    }

    /// Every `ell` from `ells` that does not exceed `k`, for each `k`.
    pub fn triangular(ks: &[usize], ells: &[usize]) -> Result<Self> {
        let mut ells = ells.to_vec();
        ells.sort_unstable();
        ells.dedup();
        let per_k = ks.iter().map(|&k| ells.iter().copied().filter(|&l| l <= k).collect()).collect();
        Self::new(ks.to_vec(), per_k)
    }

    pub fn single(k: usize, ell: usize) -> Result<Self> {
        Self::new(vec![k], vec![vec![ell]])
    }

    pub fn k_values(&self) -> &[usize] {
        &self.k_values
    }

    /// Cells in row order.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        self.k_values
            .iter()
            .zip(&self.ell_values)
            .flat_map(|(&k, ells)| ells.iter().map(move |&l| (k, l)))
            .collect()
    }

    /// Distinct alternative budgets, ascending.
    pub fn ell_budgets(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.ell_values.iter().flatten().copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Distinct null budgets, ascending.
    pub fn k_budgets(&self) -> Vec<usize> {
        let mut v = self.k_values.clone();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Every budget that appears anywhere, ascending.
    pub fn all_budgets(&self) -> Vec<usize> {
        let mut v = self.k_budgets();
        v.extend(self.ell_budgets());
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// How a budget `h` becomes a concrete relabeling `Q_h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShuffleScheme {
    /// Swap `h/2` vertices of block 0 with `h/2` vertices of block 1; blocks
    /// are the contiguous ranges of the given sizes.
    Block { n1: usize, n2: usize },
    /// Nested derangements of a random ordering of the unknown vertices
    /// (all vertices when `unknown` is absent).
    Nested {
        #[serde(default)]
        unknown: Option<Vec<usize>>,
    },
}

impl ShuffleScheme {
    /// Checks every budget can be realized on `n` vertices.
    pub fn check(&self, n: usize, budgets: &[usize]) -> Result<()> {
        let max = budgets.iter().copied().max().unwrap_or(0);
        match self {
            ShuffleScheme::Block { n1, n2 } => {
                if n1 + n2 > n {
                    return Err(Error::InvalidSpec(format!("blocks {n1} + {n2} exceed n = {n}")));
                }
                for &h in budgets {
                    block_shuffle_permutation(*n1, *n2, n - n1 - n2, h)?;
                }
                Ok(())
            }
            ShuffleScheme::Nested { unknown } => {
                let size = unknown.as_ref().map_or(n, Vec::len);
                if budgets.contains(&1) {
                    return Err(Error::NoDerangement);
                }
                if max > size {
                    return Err(Error::BudgetTooLarge { budget: max, limit: size });
                }
                if let Some(u) = unknown {
                    if u.iter().any(|&v| v >= n) {
                        return Err(Error::InvalidSpec("unknown vertex out of range".into()));
                    }
                }
                Ok(())
            }
        }
    }

    /// `Q_h` for every budget. Block swaps are deterministic; nested
    /// derangements are drawn from `key`.
    pub fn draw(&self, n: usize, budgets: &[usize], key: &StreamKey) -> Result<BTreeMap<usize, Permutation>> {
        let mut sorted = budgets.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut out = BTreeMap::new();
        match self {
            ShuffleScheme::Block { n1, n2 } => {
                if n1 + n2 > n {
                    return Err(Error::InvalidSpec(format!("blocks {n1} + {n2} exceed n = {n}")));
                }
                for h in sorted {
                    out.insert(h, block_shuffle_permutation(*n1, *n2, n - n1 - n2, h)?);
                }
            }
            ShuffleScheme::Nested { unknown } => {
                let all: Vec<usize>;
                let pool = match unknown {
                    Some(u) => u.as_slice(),
                    None => {
                        all = (0..n).collect();
                        &all
                    }
                };
                let order = random_order(pool, &key.child(0));
                let positive: Vec<usize> = sorted.iter().copied().filter(|&h| h > 0).collect();
                let seq = nested_permutation_sequence(n, &order, &positive, &key.child(1))?;
                if sorted.first() == Some(&0) {
                    out.insert(0, Permutation::identity(n));
                }
                out.extend(positive.into_iter().zip(seq));
            }
        }
        Ok(out)
    }

    pub fn is_random(&self) -> bool {
        matches!(self, ShuffleScheme::Nested { .. })
    }
}

/// Embedding dimension used by the spectral statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DimensionMode {
    Fixed(usize),
    /// Largest scree elbow among the graphs being compared, searched up to
    /// `max` (default `ceil(n/2)`).
    Elbow { max: Option<usize> },
}

impl DimensionMode {
    pub fn resolve(&self, graphs: &[&Graph]) -> Result<usize> {
        match *self {
            DimensionMode::Fixed(d) => {
                let n = graphs.first().map_or(0, |g| g.n());
                if d == 0 || d > n {
                    return Err(Error::InvalidDimension { d, n });
                }
                Ok(d)
            }
            DimensionMode::Elbow { max } => {
                let cap = max.or_else(|| graphs.first().map(|g| default_dimension_cap(g.n())));
                common_dimension(graphs, cap)
            }
        }
    }
}

/// A model plus optional perturbation, with its probability matrix cached.
#[derive(Debug, Clone)]
pub struct Model {
    base: ModelSpec,
    error: Option<ErrorSpec>,
    probabilities: DMatrix<f64>,
}

impl Model {
    pub fn new(base: ModelSpec, error: Option<ErrorSpec>) -> Result<Self> {
        let probabilities = expectation_matrix(&base, error.as_ref())?;
        Ok(Self { base, error, probabilities })
    }

    pub fn base(&self) -> &ModelSpec {
        &self.base
    }

    pub fn error(&self) -> Option<&ErrorSpec> {
        self.error.as_ref()
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn probabilities(&self) -> &DMatrix<f64> {
        &self.probabilities
    }

    pub fn sample(&self, key: &StreamKey) -> Graph {
        sample_from_probabilities(&self.probabilities, key)
    }
}

/// Runs `f(0..count)` on the rayon pool and returns results in index order.
pub(crate) fn par_indexed<T, F>(count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}
