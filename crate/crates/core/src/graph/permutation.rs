use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::StreamKey;

/// A bijection on `0..n`. `apply(i)` is the new label of vertex `i`; applied
/// to a graph this is the matrix conjugation `Q A Q^T` with `Q[q(i)][i] = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self { mapping: (0..n).collect() }
    }

    pub fn from_mapping(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &m in &mapping {
            if m >= n || seen[m] {
                return Err(Error::InvalidPermutation(format!(
                    "mapping is not a bijection on 0..{n}"
                )));
            }
            seen[m] = true;
        }
        Ok(Self { mapping })
    }

    /// Product of disjoint cycles, e.g. `[[0, 3], [1, 4]]`.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut mapping: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for (idx, &v) in cycle.iter().enumerate() {
                if v >= n || touched[v] {
                    return Err(Error::InvalidPermutation("cycles are not disjoint".into()));
                }
                touched[v] = true;
                mapping[v] = cycle[(idx + 1) % cycle.len()];
            }
        }
        Self::from_mapping(mapping)
    }

    pub fn n(&self) -> usize {
        self.mapping.len()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.mapping[i]
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.n()];
        for (i, &m) in self.mapping.iter().enumerate() {
            inv[m] = i;
        }
        Self { mapping: inv }
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &Permutation) -> Result<Self> {
        if self.n() != first.n() {
            return Err(Error::SizeMismatch { expected: self.n(), found: first.n() });
        }
        Ok(Self { mapping: first.mapping.iter().map(|&i| self.mapping[i]).collect() })
    }

    /// Vertices moved by the permutation, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.mapping.iter().enumerate().filter(|(i, m)| *i != **m).map(|(i, _)| i).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &m)| i == m)
    }

    /// Permutes the rows of an `n x d` matrix the same way graphs are
    /// relabeled: row `i` moves to row `q(i)`.
    pub fn permute_rows(&self, x: &nalgebra::DMatrix<f64>) -> Result<nalgebra::DMatrix<f64>> {
        if x.nrows() != self.n() {
            return Err(Error::SizeMismatch { expected: self.n(), found: x.nrows() });
        }
        let inv = self.inverse();
        Ok(nalgebra::DMatrix::from_fn(x.nrows(), x.ncols(), |r, c| x[(inv.apply(r), c)]))
    }

    /// `Q M Q^T` for a square matrix.
    pub fn conjugate(&self, m: &nalgebra::DMatrix<f64>) -> Result<nalgebra::DMatrix<f64>> {
        if m.nrows() != self.n() || m.ncols() != self.n() {
            return Err(Error::SizeMismatch { expected: self.n(), found: m.nrows() });
        }
        let inv = self.inverse();
        Ok(nalgebra::DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| {
            m[(inv.apply(r), inv.apply(c))]
        }))
    }
}

/// The between-block swap `Q_k`: vertex `i` trades places with `n1 + i` for
/// `i < k/2`. Blocks occupy the contiguous ranges `0..n1` and `n1..n1+n2`,
/// the remaining `rest` vertices are fixed.
pub fn block_shuffle_permutation(n1: usize, n2: usize, rest: usize, k: usize) -> Result<Permutation> {
    if k % 2 != 0 {
        return Err(Error::OddBudget(k));
    }
    let half = k / 2;
    let limit = n1.min(n2);
    if half > limit {
        return Err(Error::BudgetTooLarge { budget: k, limit: 2 * limit });
    }
    let mut mapping: Vec<usize> = (0..n1 + n2 + rest).collect();
    for i in 0..half {
        mapping.swap(i, n1 + i);
    }
    Ok(Permutation { mapping })
}

/// Derangement of the vertex subset `unknown` inside a permutation of
/// `0..n`: every vertex of `unknown` moves, every other vertex is fixed.
/// Drawn uniformly by rejection from uniform shuffles.
pub fn random_derangement(n: usize, unknown: &[usize], key: &StreamKey) -> Result<Permutation> {
    if unknown.len() == 1 {
        return Err(Error::NoDerangement);
    }
    check_subset(n, unknown)?;
    let mut mapping: Vec<usize> = (0..n).collect();
    if unknown.is_empty() {
        return Ok(Permutation { mapping });
    }
    let mut rng = key.rng();
    let mut images = unknown.to_vec();
    loop {
        images.shuffle(&mut rng);
        if unknown.iter().zip(&images).all(|(u, v)| u != v) {
            break;
        }
    }
    for (&u, &v) in unknown.iter().zip(&images) {
        mapping[u] = v;
    }
    Ok(Permutation { mapping })
}

/// A uniformly random ordering of `vertices`.
pub fn random_order(vertices: &[usize], key: &StreamKey) -> Vec<usize> {
    let mut order = vertices.to_vec();
    order.shuffle(&mut key.rng());
    order
}

/// For each budget `k`, a derangement of the first `k` entries of
/// `unknown_order`. The moved sets are nested; the maps themselves are drawn
/// independently per budget.
pub fn nested_permutation_sequence(
    n: usize,
    unknown_order: &[usize],
    budgets: &[usize],
    key: &StreamKey,
) -> Result<Vec<Permutation>> {
    check_subset(n, unknown_order)?;
    for w in budgets.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidInput("budgets must be strictly increasing".into()));
        }
    }
    budgets
        .iter()
        .enumerate()
        .map(|(idx, &k)| {
            if k == 1 {
                return Err(Error::NoDerangement);
            }
            if k > unknown_order.len() {
                return Err(Error::BudgetTooLarge { budget: k, limit: unknown_order.len() });
            }
            random_derangement(n, &unknown_order[..k], &key.child(idx as u64))
        })
        .collect()
}

fn check_subset(n: usize, vertices: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    for &v in vertices {
        if v >= n || seen[v] {
            return Err(Error::InvalidInput(format!(
                "vertex set must be distinct vertices of 0..{n}"
            )));
        }
        seen[v] = true;
    }
    Ok(())
}
