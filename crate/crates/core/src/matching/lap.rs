//! Dense linear assignment by shortest augmenting paths with potentials.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Minimum-cost perfect assignment: `assignment[row] = column`.
pub fn solve_lap(cost: &DMatrix<f64>) -> Result<(Vec<usize>, f64)> {
    let (m, cols) = cost.shape();
    if m != cols {
        return Err(Error::NotSquare { rows: m, cols });
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite);
    }
    if m == 0 {
        return Ok((Vec::new(), 0.0));
    }
    // 1-based arrays; column 0 is the virtual start
    let mut u = vec![0.0; m + 1];
    let mut v = vec![0.0; m + 1];
    let mut row_of = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=m {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; m];
    for j in 1..=m {
        assignment[row_of[j] - 1] = j - 1;
    }
    let total = assignment.iter().enumerate().map(|(r, &c)| cost[(r, c)]).sum();
    Ok((assignment, total))
}
