//! Embedding dimension from the scree plot via the two-group Gaussian
//! profile likelihood elbow.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::spectral::eigen::magnitudes;

/// Nonincreasing, nonnegative singular values.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreeProfile {
    values: Vec<f64>,
}

impl ScreeProfile {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput("scree values must be finite and nonnegative".into()));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidInput("scree values must be nonincreasing".into()));
        }
        Ok(Self { values })
    }

    /// Singular values of a symmetric matrix, i.e. its eigenvalue magnitudes.
    pub fn of_matrix(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(magnitudes(m)?)
    }

    pub fn of_graph(g: &Graph) -> Result<Self> {
        Self::of_matrix(&g.to_matrix())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// First `count` values.
    pub fn truncated(&self, count: usize) -> Self {
        Self { values: self.values[..count.min(self.values.len())].to_vec() }
    }
}

/// Log-likelihood of splitting the values into a leading group of size `q`
/// and a trailing group, each Gaussian with its own mean and a shared
/// variance, at the maximum-likelihood parameters.
pub fn profile_log_likelihood(values: &[f64], q: usize) -> f64 {
    let p = values.len();
    assert!(q >= 1 && q < p, "split must leave both groups nonempty");
    let (head, tail) = values.split_at(q);
    let ss = |xs: &[f64]| {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
    };
    let within = ss(head) + ss(tail);
    let variance = within / p as f64;
    if variance <= 0.0 {
        return f64::INFINITY;
    }
    -0.5 * p as f64 * ((2.0 * std::f64::consts::PI * variance).ln() + 1.0)
}

/// Elbow of the scree plot: the split maximizing the profile likelihood,
/// searched over `1..=min(d_max, len - 1)`; ties go to the smaller dimension.
pub fn select_dimension(scree: &ScreeProfile, d_max: usize) -> Result<usize> {
    let p = scree.values.len();
    if p < 2 {
        return Err(Error::InvalidInput("need at least two scree values".into()));
    }
    if d_max == 0 {
        return Err(Error::InvalidDimension { d: 0, n: p });
    }
    let mut best = (1, f64::NEG_INFINITY);
    for q in 1..=d_max.min(p - 1) {
        let ll = profile_log_likelihood(&scree.values, q);
        if ll > best.1 {
            best = (q, ll);
        }
    }
    Ok(best.0)
}

/// Default cap `ceil(n / 2)`.
pub fn default_dimension_cap(n: usize) -> usize {
    n.div_ceil(2).max(1)
}

/// One dimension shared by several graphs: the largest per-graph elbow.
pub fn common_dimension(graphs: &[&Graph], d_max: Option<usize>) -> Result<usize> {
    let mut d = 0;
    for g in graphs {
        let cap = d_max.unwrap_or_else(|| default_dimension_cap(g.n()));
        d = d.max(select_dimension(&ScreeProfile::of_graph(g)?, cap)?);
    }
    if d == 0 {
        return Err(Error::InvalidInput("no graphs given".into()));
    }
    Ok(d)
}
