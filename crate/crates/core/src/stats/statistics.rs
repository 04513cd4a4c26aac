//! Two-sample graph test statistics.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Permutation};
use crate::spectral::{ase_graph, low_rank_distance, omnibus_embed, procrustes_align, Embedding};

/// `½ ||A - B||_F^2`, the number of vertex pairs on which the graphs disagree.
pub fn t_adjacency(a: &Graph, b: &Graph) -> Result<f64> {
    Ok(a.hamming(b)? as f64)
}

/// `||P̂_a - P̂_b||_F` with both estimates from rank-`d` embeddings.
pub fn t_phat(a: &Graph, b: &Graph, d: usize) -> Result<f64> {
    a.check_same_size(b)?;
    if a == b {
        ase_graph(a, d)?;
        return Ok(0.0);
    }
    low_rank_distance(ase_graph(a, d)?.x(), ase_graph(b, d)?.x())
}

fn density(g: &Graph) -> f64 {
    let n = g.n() as f64;
    g.frobenius_sq() / (n * (n - 1.0))
}

/// Disagreement rate divided by the sum of the two Bernoulli variances of the
/// edge densities.
pub fn t_normalized(a: &Graph, b: &Graph) -> Result<f64> {
    let hamming = a.hamming(b)? as f64;
    normalized_from_parts(hamming, a, b)
}

fn normalized_from_parts(hamming: f64, a: &Graph, b: &Graph) -> Result<f64> {
    let n = a.n() as f64;
    let pairs2 = n * (n - 1.0);
    let (da, db) = (density(a), density(b));
    let denom = da * (1.0 - da) + db * (1.0 - db);
    if !(denom > 0.0) {
        return Err(Error::DegenerateDensity);
    }
    Ok(2.0 * hamming / pairs2 / denom)
}

/// `min_W ||X̂ W - Ŷ||_F` over orthogonal `W` (unscaled).
pub fn t_semipar(a: &Graph, b: &Graph, d: usize) -> Result<f64> {
    a.check_same_size(b)?;
    let xa = ase_graph(a, d)?;
    if a == b {
        return Ok(0.0);
    }
    semipar_from_embeddings(xa.x(), ase_graph(b, d)?.x())
}

fn semipar_from_embeddings(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
    if x == y {
        return Ok(0.0);
    }
    Ok(procrustes_align(x, y)?.1)
}

/// `||X̃ - Ỹ||_F` between the two halves of the omnibus embedding.
pub fn t_omni(a: &Graph, b: &Graph, d: usize) -> Result<f64> {
    let (x, y) = omnibus_embed(a, b, d)?;
    Ok((x - y).norm())
}

/// Selector for the five statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Adjacency,
    Phat,
    Normalized,
    Semipar,
    Omni,
}

impl Statistic {
    pub const ALL: [Statistic; 5] =
        [Statistic::Adjacency, Statistic::Phat, Statistic::Normalized, Statistic::Semipar, Statistic::Omni];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::Adjacency => "adjacency",
            Statistic::Phat => "phat",
            Statistic::Normalized => "normalized",
            Statistic::Semipar => "semipar",
            Statistic::Omni => "omni",
        }
    }

    /// Whether the statistic embeds the graphs (and so needs `d`).
    pub fn uses_embedding(self) -> bool {
        matches!(self, Statistic::Phat | Statistic::Semipar | Statistic::Omni)
    }

    pub fn evaluate(self, a: &Graph, b: &Graph, d: usize) -> Result<f64> {
        match self {
            Statistic::Adjacency => t_adjacency(a, b),
            Statistic::Phat => t_phat(a, b, d),
            Statistic::Normalized => t_normalized(a, b),
            Statistic::Semipar => t_semipar(a, b, d),
            Statistic::Omni => t_omni(a, b, d),
        }
    }

    /// Precomputes whatever the statistic needs from one graph, so the same
    /// graph can be compared under many relabelings.
    pub fn prepare(self, g: Graph, d: usize) -> Result<Prepared> {
        let embedding = match self {
            Statistic::Phat | Statistic::Semipar => Some(ase_graph(&g, d)?),
            _ => None,
        };
        Ok(Prepared { stat: self, d, graph: g, embedding })
    }

    /// [`Statistic::prepare`] for several statistics at once; the embedding
    /// is computed a single time and shared.
    pub fn prepare_all(stats: &[Statistic], g: &Graph, d: usize) -> Result<Vec<Prepared>> {
        let embedding = if stats.iter().any(|s| matches!(s, Statistic::Phat | Statistic::Semipar)) {
            Some(ase_graph(g, d)?)
        } else {
            None
        };
        Ok(stats
            .iter()
            .map(|&stat| Prepared {
                stat,
                d,
                graph: g.clone(),
                embedding: match stat {
                    Statistic::Phat | Statistic::Semipar => embedding.clone(),
                    _ => None,
                },
            })
            .collect())
    }

    /// `T(a, q b q^T)` from prepared inputs. Embedding statistics reuse the
    /// embedding of `b` through `ASE(Q B Q^T) = Q ASE(B)`.
    pub fn evaluate_shuffled(self, a: &Prepared, b: &Prepared, q: &Permutation) -> Result<f64> {
        if a.stat != self || b.stat != self || a.d != b.d {
            return Err(Error::InvalidInput("prepared inputs do not match the statistic".into()));
        }
        a.graph.check_same_size(&b.graph)?;
        let d = a.d;
        match self {
            Statistic::Adjacency => Ok(a.graph.hamming(&b.graph.shuffle(q)?)? as f64),
            Statistic::Normalized => {
                let h = a.graph.hamming(&b.graph.shuffle(q)?)? as f64;
                normalized_from_parts(h, &a.graph, &b.graph)
            }
            Statistic::Omni => t_omni(&a.graph, &b.graph.shuffle(q)?, d),
            Statistic::Phat | Statistic::Semipar => {
                let (ea, eb) = (a.embedding(), b.embedding());
                let qb = if q.is_identity() { eb.x().clone() } else { q.permute_rows(eb.x())? };
                if self == Statistic::Phat {
                    if ea.x() == &qb {
                        return Ok(0.0);
                    }
                    low_rank_distance(ea.x(), &qb)
                } else {
                    semipar_from_embeddings(ea.x(), &qb)
                }
            }
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Statistic::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown statistic '{s}'")))
    }
}

/// A graph with the per-graph work for one statistic already done.
#[derive(Debug, Clone)]
pub struct Prepared {
    stat: Statistic,
    d: usize,
    graph: Graph,
    embedding: Option<Embedding>,
}

impl Prepared {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    fn embedding(&self) -> &Embedding {
        self.embedding.as_ref().expect("embedding statistics always prepare an embedding")
    }
}
