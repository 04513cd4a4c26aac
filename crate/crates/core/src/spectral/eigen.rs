//! Truncated symmetric eigendecomposition.
//!
//! Matrices up to [`DENSE_LIMIT`] go through a full dense decomposition;
//! larger ones use Lanczos with full reorthogonalization, restarted with a
//! doubled Krylov dimension until the requested Ritz pairs converge.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub const DENSE_LIMIT: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenSolver {
    /// Dense up to [`DENSE_LIMIT`], Lanczos above.
    #[default]
    Auto,
    Dense,
    Lanczos,
}

/// Eigenpairs ordered by decreasing `|value|` (ties: larger value first).
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// `n x count`, orthonormal columns.
    pub vectors: DMatrix<f64>,
}

pub fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    let scale = m.amax().max(1.0);
    for j in 0..m.ncols() {
        for i in 0..j {
            let (a, b) = (m[(i, j)], m[(j, i)]);
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::NonFinite);
            }
            if (a - b).abs() > 1e-12 * scale {
                return Err(Error::InvalidInput(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Top `count` eigenpairs of a symmetric matrix by magnitude.
pub fn top_eigenpairs(m: &DMatrix<f64>, count: usize, solver: EigenSolver) -> Result<EigenPairs> {
    check_symmetric(m)?;
    let n = m.nrows();
    if count > n {
        return Err(Error::InvalidDimension { d: count, n });
    }
    if count == 0 {
        return Ok(EigenPairs { values: Vec::new(), vectors: DMatrix::zeros(n, 0) });
    }
    match solver {
        EigenSolver::Dense => Ok(dense(m, count)),
        EigenSolver::Lanczos => Ok(lanczos(m, count)),
        EigenSolver::Auto if n <= DENSE_LIMIT => Ok(dense(m, count)),
        EigenSolver::Auto => Ok(lanczos(m, count)),
    }
}

/// All eigenvalue magnitudes, descending.
pub fn magnitudes(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_symmetric(m)?;
    let n = m.nrows();
    let f = faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    let vals = f
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::InvalidInput(format!("eigenvalue solver failed: {e:?}")))?;
    let mut mags: Vec<f64> = vals.into_iter().map(f64::abs).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    Ok(mags)
}

fn order_by_magnitude(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[b].abs().total_cmp(&values[a].abs()).then(values[b].total_cmp(&values[a]))
    });
    idx
}

fn dense(m: &DMatrix<f64>, count: usize) -> EigenPairs {
    let n = m.nrows();
    let f = faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    match f.self_adjoint_eigen(faer::Side::Lower) {
        Ok(evd) => {
            let s = evd.S().column_vector();
            let u = evd.U();
            let values: Vec<f64> = (0..n).map(|i| s[i]).collect();
            let order = order_by_magnitude(&values);
            let pick = &order[..count];
            EigenPairs {
                values: pick.iter().map(|&i| values[i]).collect(),
                vectors: DMatrix::from_fn(n, count, |r, c| u[(r, pick[c])]),
            }
        }
        // faer only fails on non-convergence; nalgebra is the fallback.
        Err(_) => {
            let evd = SymmetricEigen::new(m.clone());
            let values: Vec<f64> = evd.eigenvalues.iter().copied().collect();
            let order = order_by_magnitude(&values);
            let pick = &order[..count];
            EigenPairs {
                values: pick.iter().map(|&i| values[i]).collect(),
                vectors: DMatrix::from_fn(n, count, |r, c| evd.eigenvectors[(r, pick[c])]),
            }
        }
    }
}

fn start_vector(n: usize, salt: usize) -> DVector<f64> {
    let v = DVector::from_fn(n, |i, _| {
        let h = (i.wrapping_mul(2654435761) ^ salt.wrapping_mul(40503)) % 1009;
        1.0 + h as f64 / 1009.0
    });
    v.normalize()
}

fn orthogonalize(v: &mut DVector<f64>, basis: &[DVector<f64>]) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(v);
            v.axpy(-c, b, 1.0);
        }
    }
}

fn lanczos(m: &DMatrix<f64>, count: usize) -> EigenPairs {
    let n = m.nrows();
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let mut kdim = n.min((2 * count + 40).max(80));
    loop {
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(kdim);
        let mut alpha = Vec::with_capacity(kdim);
        let mut beta: Vec<f64> = Vec::with_capacity(kdim);
        let mut v = start_vector(n, 0);
        let mut salt = 1;
        let mut last_beta = 0.0;
        while basis.len() < kdim {
            basis.push(v.clone());
            let mut w = m * &v;
            let a = v.dot(&w);
            alpha.push(a);
            orthogonalize(&mut w, &basis);
            let b = w.norm();
            if basis.len() == kdim {
                last_beta = b;
                break;
            }
            if b <= 1e-13 * scale {
                // invariant subspace: continue from a fresh orthogonal direction
                beta.push(0.0);
                let mut fresh = start_vector(n, salt);
                salt += 1;
                orthogonalize(&mut fresh, &basis);
                let norm = fresh.norm();
                if norm < 1e-8 {
                    // basis spans everything reachable; stop early
                    beta.pop();
                    last_beta = 0.0;
                    break;
                }
                v = fresh / norm;
            } else {
                beta.push(b);
                v = w / b;
            }
        }
        let k = basis.len();
        let t = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let evd = SymmetricEigen::new(t);
        let theta: Vec<f64> = evd.eigenvalues.iter().copied().collect();
        let order = order_by_magnitude(&theta);
        let take = count.min(k);
        let pick = &order[..take];
        let top = theta[order[0]].abs().max(f64::MIN_POSITIVE);
        let converged = take == count
            && pick.iter().all(|&j| (last_beta * evd.eigenvectors[(k - 1, j)]).abs() <= 1e-12 * top);
        if converged || k >= n || kdim >= n {
            let mut vectors = DMatrix::zeros(n, take);
            for (c, &j) in pick.iter().enumerate() {
                let mut col = DVector::zeros(n);
                for (i, b) in basis.iter().enumerate() {
                    col.axpy(evd.eigenvectors[(i, j)], b, 1.0);
                }
                let col = col.normalize();
                vectors.set_column(c, &col);
            }
            return EigenPairs { values: pick.iter().map(|&j| theta[j]).collect(), vectors };
        }
        kdim = n.min(kdim * 2);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_matrix(n: usize) -> DMatrix<f64> {
        // low-rank signal plus deterministic "noise"
        let mut m = DMatrix::from_fn(n, n, |i, j| {
            let h = ((i * 31 + j * 17) ^ (i * j)) % 97;
            let h2 = ((j * 31 + i * 17) ^ (i * j)) % 97;
            (h + h2) as f64 / 970.0
        });
        for i in 0..n {
            for j in 0..n {
                let a = if i < n / 2 { 0.6 } else { 0.3 };
                let b = if j < n / 2 { 0.6 } else { 0.3 };
                m[(i, j)] += a * b * 4.0;
            }
        }
        m
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        let m = test_matrix(300);
        let d = dense(&m, 4);
        let l = lanczos(&m, 4);
        for c in 0..4 {
            assert!((d.values[c] - l.values[c]).abs() < 1e-8, "{} vs {}", d.values[c], l.values[c]);
        }
        // compare spectral projectors (sign-free)
        let pd = &d.vectors * d.vectors.transpose();
        let pl = &l.vectors * l.vectors.transpose();
        assert!((pd - pl).amax() < 1e-8);
    }

    #[test]
    fn magnitude_order() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -5.0, 3.0, 5.0]));
        for solver in [EigenSolver::Dense, EigenSolver::Lanczos] {
            let p = top_eigenpairs(&m, 3, solver).unwrap();
            for (a, b) in p.values.iter().zip([5.0, -5.0, 3.0]) {
                assert!((a - b).abs() < 1e-10, "{solver:?}: {:?}", p.values);
            }
        }
        for (a, b) in magnitudes(&m).unwrap().iter().zip([5.0, 5.0, 3.0, 1.0]) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(top_eigenpairs(&m, 1, EigenSolver::Auto).is_err());
        let m = DMatrix::<f64>::identity(3, 3);
        assert!(matches!(top_eigenpairs(&m, 4, EigenSolver::Auto), Err(Error::InvalidDimension { .. })));
        assert!(matches!(
            top_eigenpairs(&DMatrix::zeros(2, 3), 1, EigenSolver::Auto),
            Err(Error::NotSquare { .. })
        ));
    }
}
