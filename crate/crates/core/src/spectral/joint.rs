//! Omnibus joint embedding and orthogonal Procrustes alignment.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::spectral::ase::ase;

/// `M = [[A, (A+B)/2], [(A+B)/2, B]]`.
pub fn omnibus_matrix(a: &Graph, b: &Graph) -> Result<DMatrix<f64>> {
    a.check_same_size(b)?;
    let n = a.n();
    Ok(DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, bj) = (i / n, j / n);
        let (u, v) = (i % n, j % n);
        let ea = f64::from(u8::from(a.has_edge(u, v)));
        let eb = f64::from(u8::from(b.has_edge(u, v)));
        match (bi, bj) {
            (0, 0) => ea,
            (1, 1) => eb,
            _ => 0.5 * (ea + eb),
        }
    }))
}

/// Embeds the omnibus matrix and splits the rows into the two graphs'
/// estimates `(X̃, Ỹ)`.
pub fn omnibus_embed(a: &Graph, b: &Graph, d: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = a.n();
    if a == b {
        // [[A, A], [A, A]] has eigenpairs (2 lambda, [u; u] / sqrt 2), so both
        // halves equal ASE(A).
        let x = ase(&a.to_matrix(), d)?.into_x();
        return Ok((x.clone(), x));
    }
    let z = ase(&omnibus_matrix(a, b)?, d)?.into_x();
    let top = z.rows(0, n).into_owned();
    let bottom = z.rows(n, n).into_owned();
    Ok((top, bottom))
}

/// Orthogonal `W` minimizing `||x W - y||_F`, from the polar factor of
/// `x^T y`, together with the attained residual.
pub fn procrustes_align(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    if x.shape() != y.shape() {
        return Err(Error::SizeMismatch { expected: x.nrows() * x.ncols(), found: y.nrows() * y.ncols() });
    }
    let cross = x.transpose() * y;
    let svd = cross.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::InvalidInput("SVD failed in Procrustes alignment".into())),
    };
    let w = u * v_t;
    let residual = (x * &w - y).norm();
    Ok((w, residual))
}
