use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{Graph, Permutation};
use crate::spectral::eigen::{top_eigenpairs, EigenSolver};

/// Adjacency spectral embedding `U |S|^{1/2}` of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct Embedding {
    x: DMatrix<f64>,
    singular_values: Vec<f64>,
    ambiguous: bool,
}

impl Embedding {
    /// `n x d` latent position estimate; column `c` is scaled by the square
    /// root of the `c`-th largest singular value.
    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn into_x(self) -> DMatrix<f64> {
        self.x
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Set when the d-th and (d+1)-th singular values coincide, so the
    /// embedded subspace is not uniquely determined.
    pub fn is_ambiguous(&self) -> bool {
        self.ambiguous
    }

    /// `X̂ X̂^T`.
    pub fn probability_matrix(&self) -> DMatrix<f64> {
        &self.x * self.x.transpose()
    }

    /// Embedding of the relabeled graph `Q A Q^T`, which is `Q X̂`.
    pub fn permuted(&self, q: &Permutation) -> Result<Embedding> {
        Ok(Embedding {
            x: q.permute_rows(&self.x)?,
            singular_values: self.singular_values.clone(),
            ambiguous: self.ambiguous,
        })
    }
}

pub fn ase(m: &DMatrix<f64>, d: usize) -> Result<Embedding> {
    ase_with(m, d, EigenSolver::Auto)
}

pub fn ase_with(m: &DMatrix<f64>, d: usize, solver: EigenSolver) -> Result<Embedding> {
    let n = m.nrows();
    if d == 0 || d > n {
        return Err(Error::InvalidDimension { d, n });
    }
    let extra = usize::from(d < n);
    let pairs = top_eigenpairs(m, d + extra, solver)?;
    let singular: Vec<f64> = pairs.values.iter().map(|v| v.abs()).collect();
    let ambiguous = extra == 1 && (singular[d - 1] - singular[d]).abs() <= 1e-9 * singular[0].max(1.0);
    if ambiguous {
        log::debug!("ASE: singular values {} and {} tie at d = {d}", singular[d - 1], singular[d]);
    }
    let mut x = DMatrix::zeros(n, d);
    for c in 0..d {
        let col = pairs.vectors.column(c);
        let mut pivot = 0;
        for r in 1..n {
            if col[r].abs() > col[pivot].abs() {
                pivot = r;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        let scale = sign * singular[c].sqrt();
        for r in 0..n {
            x[(r, c)] = col[r] * scale;
        }
    }
    Ok(Embedding { x, singular_values: singular[..d].to_vec(), ambiguous })
}

pub fn ase_graph(g: &Graph, d: usize) -> Result<Embedding> {
    ase(&g.to_matrix(), d)
}

/// `P̂ = X̂ X̂^T` for `X̂ = ASE(g, d)`; entries are not clipped.
pub fn probability_estimate(g: &Graph, d: usize) -> Result<DMatrix<f64>> {
    Ok(ase_graph(g, d)?.probability_matrix())
}

/// `||X X^T - Y Y^T||_F` computed through `d x d` Gram matrices.
pub fn low_rank_distance(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
    if x.nrows() != y.nrows() {
        return Err(Error::SizeMismatch { expected: x.nrows(), found: y.nrows() });
    }
    let xx = x.transpose() * x;
    let yy = y.transpose() * y;
    let xy = x.transpose() * y;
    let sq = xx.norm_squared() + yy.norm_squared() - 2.0 * xy.norm_squared();
    Ok(sq.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_matrix_embeds_to_constant_column() {
        let n = 12;
        let m = DMatrix::from_element(n, n, 0.25);
        let e = ase(&m, 1).unwrap();
        for r in 0..n {
            assert!((e.x()[(r, 0)] - 0.5).abs() < 1e-12);
        }
        assert!((e.probability_matrix() - m).amax() < 1e-12);
    }

    #[test]
    fn exact_low_rank_recovery() {
        let x = DMatrix::from_fn(40, 3, |i, j| 0.1 + ((i * 7 + j * 3) % 11) as f64 / 30.0);
        let p = &x * x.transpose();
        let e = ase(&p, 3).unwrap();
        assert!((e.probability_matrix() - &p).norm() <= 1e-8);
        let gram = e.x().transpose() * e.x();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(gram[(i, j)].abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn complete_graph_phat() {
        let n = 50;
        let p = probability_estimate(&Graph::complete(n), 1).unwrap();
        // top eigenvalue of J - I is n - 1
        let expected = (n - 1) as f64 / n as f64;
        assert!((p[(0, 1)] - expected).abs() < 1e-10);
        assert!((p[(3, 3)] - expected).abs() < 1e-10);
        assert!(p.iter().all(|v| (v - 1.0).abs() < 2.0 / n as f64));
    }

    #[test]
    fn empty_graph_phat_is_zero() {
        let p = probability_estimate(&Graph::empty(6), 2).unwrap();
        assert_eq!(p.amax(), 0.0);
    }

    #[test]
    fn dimension_errors_and_ambiguity() {
        let m = DMatrix::<f64>::identity(4, 4);
        assert!(matches!(ase(&m, 0), Err(Error::InvalidDimension { .. })));
        assert!(matches!(ase(&m, 5), Err(Error::InvalidDimension { .. })));
        assert!(ase(&m, 2).unwrap().is_ambiguous());
        assert!(!ase(&m, 4).unwrap().is_ambiguous());
    }

    #[test]
    fn sign_convention_largest_entry_positive() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 2)]).unwrap();
        let e = ase_graph(&g, 2).unwrap();
        for c in 0..2 {
            let col = e.x().column(c);
            let (mut best, mut pos) = (0.0f64, 0);
            for r in 0..5 {
                if col[r].abs() > best {
                    best = col[r].abs();
                    pos = r;
                }
            }
            assert!(col[pos] > 0.0);
        }
    }

    #[test]
    fn low_rank_distance_matches_dense() {
        let x = DMatrix::from_fn(9, 2, |i, j| ((i + 2 * j) % 5) as f64 / 5.0);
        let y = DMatrix::from_fn(9, 2, |i, j| ((2 * i + j) % 7) as f64 / 7.0);
        let dense = (&x * x.transpose() - &y * y.transpose()).norm();
        assert!((low_rank_distance(&x, &y).unwrap() - dense).abs() < 1e-12);
        assert_eq!(low_rank_distance(&x, &x).unwrap(), 0.0);
    }
}
