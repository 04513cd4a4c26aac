use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Permutation;

/// Simple undirected graph stored as a dense, bit-packed symmetric adjacency
/// matrix. The diagonal is always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edge_count())
            .finish()
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64);
        Self { n, words, bits: vec![0; n * words] }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                g.set_edge(i, j, true);
            }
        }
        g
    }

    /// Builds a graph from an edge iterator. Self-loops are dropped and
    /// duplicates collapse.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::empty(n);
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidInput(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u != v {
                g.set_edge(u, v, true);
            }
        }
        Ok(g)
    }

    /// Reads a 0/1 symmetric hollow matrix.
    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        let n = m.nrows();
        let mut g = Self::empty(n);
        for i in 0..n {
            if m[(i, i)] != 0.0 {
                return Err(Error::InvalidInput(format!("nonzero diagonal at {i}")));
            }
            for j in (i + 1)..n {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                if a != b {
                    return Err(Error::InvalidInput(format!("asymmetric at ({i}, {j})")));
                }
                match a {
                    0.0 => {}
                    1.0 => g.set_edge(i, j, true),
                    _ => {
                        return Err(Error::InvalidInput(format!(
                            "non-binary entry {a} at ({i}, {j})"
                        )))
                    }
                }
            }
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        (self.bits[i * self.words + j / 64] >> (j % 64)) & 1 == 1
    }

    /// Sets or clears the edge {i, j}. Setting a loop is a no-op.
    #[inline]
    pub fn set_edge(&mut self, i: usize, j: usize, present: bool) {
        if i == j {
            return;
        }
        for (a, b) in [(i, j), (j, i)] {
            let w = &mut self.bits[a * self.words + b / 64];
            let mask = 1u64 << (b % 64);
            if present {
                *w |= mask;
            } else {
                *w &= !mask;
            }
        }
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum::<usize>() / 2
    }

    /// Edges {u, v} with u < v in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            ((i + 1)..self.n).filter_map(move |j| self.has_edge(i, j).then_some((i, j)))
        })
    }

    /// `||A||_F^2`, i.e. twice the edge count.
    pub fn frobenius_sq(&self) -> f64 {
        2.0 * self.edge_count() as f64
    }

    /// Number of unordered pairs on which the two graphs disagree.
    pub fn hamming(&self, other: &Graph) -> Result<usize> {
        self.check_same_size(other)?;
        let ones: usize = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum();
        Ok(ones / 2)
    }

    pub(crate) fn check_same_size(&self, other: &Graph) -> Result<()> {
        if self.n != other.n {
            return Err(Error::SizeMismatch { expected: self.n, found: other.n });
        }
        Ok(())
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| if self.has_edge(i, j) { 1.0 } else { 0.0 })
    }

    /// Relabels vertices so that `output[q(i)][q(j)] == self[i][j]`, i.e. the
    /// matrix `Q A Q^T`.
    pub fn shuffle(&self, q: &Permutation) -> Result<Graph> {
        if q.n() != self.n {
            return Err(Error::SizeMismatch { expected: self.n, found: q.n() });
        }
        if q.is_identity() {
            return Ok(self.clone());
        }
        let mut out = Graph::empty(self.n);
        for (i, j) in self.edges() {
            out.set_edge(q.apply(i), q.apply(j), true);
        }
        Ok(out)
    }

    /// Induced subgraph on `vertices`, in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut out = Graph::empty(vertices.len());
        for (a, &u) in vertices.iter().enumerate() {
            for (b, &v) in vertices.iter().enumerate().skip(a + 1) {
                if self.has_edge(u, v) {
                    out.set_edge(a, b, true);
                }
            }
        }
        out
    }
}

/// Free-function form of [`Graph::shuffle`].
pub fn shuffle_graph(g: &Graph, q: &Permutation) -> Result<Graph> {
    g.shuffle(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_and_hollow() {
        let mut g = Graph::empty(70);
        g.set_edge(3, 65, true);
        g.set_edge(5, 5, true);
        assert!(g.has_edge(65, 3));
        assert!(!g.has_edge(5, 5));
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degree(65), 1);
        g.set_edge(65, 3, false);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn path_relabel_by_transposition() {
        // path 0-1-2 relabeled by (0 2) has edges {2,1} and {1,0}
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let q = Permutation::from_mapping(vec![2, 1, 0]).unwrap();
        let h = g.shuffle(&q).unwrap();
        let edges: Vec<_> = h.edges().collect();
        assert_eq!(edges, vec![(0, 1), (1, 2)]);
        assert_eq!(h, g);
        let star = Graph::from_edges(3, [(0, 1), (0, 2)]).unwrap();
        let moved = star.shuffle(&q).unwrap();
        assert_eq!(moved.edges().collect::<Vec<_>>(), vec![(0, 2), (1, 2)]);
    }

    #[test]
    fn shuffle_then_inverse_is_identity() {
        let g = Graph::from_edges(5, [(0, 1), (1, 3), (2, 4), (0, 4)]).unwrap();
        let q = Permutation::from_mapping(vec![3, 0, 4, 1, 2]).unwrap();
        let back = g.shuffle(&q).unwrap().shuffle(&q.inverse()).unwrap();
        assert_eq!(back, g);
        assert_eq!(g.shuffle(&Permutation::identity(5)).unwrap(), g);
    }

    #[test]
    fn shuffle_size_mismatch() {
        let g = Graph::empty(4);
        assert!(matches!(
            g.shuffle(&Permutation::identity(3)),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn matrix_round_trip() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3), (1, 3)]).unwrap();
        assert_eq!(Graph::from_matrix(&g.to_matrix()).unwrap(), g);
        let mut bad = g.to_matrix();
        bad[(0, 2)] = 1.0;
        assert!(Graph::from_matrix(&bad).is_err());
    }

    #[test]
    fn complete_hamming_to_empty() {
        let n = 9;
        assert_eq!(Graph::complete(n).hamming(&Graph::empty(n)).unwrap(), n * (n - 1) / 2);
    }
}
