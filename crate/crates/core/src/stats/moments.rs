//! Population-level quantities for edge-independent models: the closed-form
//! SBM shuffle distance, exact moments of the adjacency statistic and its
//! normal-approximation power.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{block_shuffle_permutation, ErrorSpec, Permutation, SbmSpec};
use crate::stats::normal::{normal_tail, upper_quantile};

/// Mean and variance of a statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentPair {
    mean: f64,
    variance: f64,
}

impl MomentPair {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() || !variance.is_finite() {
            return Err(Error::NonFinite);
        }
        if variance < 0.0 {
            return Err(Error::InvalidInput(format!("negative variance {variance}")));
        }
        Ok(Self { mean, variance })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// `||P - Q_k P Q_k^T||_F^2` for the between-block swap of `k/2` vertices of
/// block 0 with `k/2` vertices of block 1, over the full matrix (diagonal
/// included).
pub fn sbm_shuffle_distance_sq(spec: &SbmSpec, k: usize) -> Result<f64> {
    if k % 2 != 0 {
        return Err(Error::OddBudget(k));
    }
    if spec.blocks() < 2 {
        return Err(Error::InvalidSpec("need at least two blocks".into()));
    }
    let limit = spec.sizes()[0].min(spec.sizes()[1]);
    if k / 2 > limit {
        return Err(Error::BudgetTooLarge { budget: k, limit: 2 * limit });
    }
    let l = |a, b| spec.lambda(a, b);
    let nu2 = spec.nu() * spec.nu();
    let kf = k as f64;
    let cross: f64 = spec
        .sizes()
        .iter()
        .enumerate()
        .map(|(i, &ni)| ni as f64 * (l(i, 0) - l(i, 1)).powi(2))
        .sum();
    Ok(kf * kf * nu2 * (l(0, 0) - l(1, 1)).powi(2) / 2.0 + 2.0 * kf * nu2 * cross
        - kf * kf * nu2 * (l(0, 0) - l(0, 1)).powi(2)
        - kf * kf * nu2 * (l(1, 1) - l(0, 1)).powi(2))
}

fn check_probability_matrix(p: &DMatrix<f64>) -> Result<()> {
    if p.nrows() != p.ncols() {
        return Err(Error::NotSquare { rows: p.nrows(), cols: p.ncols() });
    }
    for j in 0..p.ncols() {
        for i in 0..j {
            let v = p[(i, j)];
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::ProbabilityOutOfRange { row: i, col: j, value: v });
            }
        }
    }
    Ok(())
}

/// Exact mean and variance of `½ ||A_1 - Q A_2 Q^T||_F^2` with independent
/// `A_1 ~ Bernoulli(p1)` and `A_2 ~ Bernoulli(p2)`.
pub fn adjacency_moments(p1: &DMatrix<f64>, p2: &DMatrix<f64>, q: &Permutation) -> Result<MomentPair> {
    check_probability_matrix(p1)?;
    check_probability_matrix(p2)?;
    let n = p1.nrows();
    if p2.nrows() != n {
        return Err(Error::SizeMismatch { expected: n, found: p2.nrows() });
    }
    if q.n() != n {
        return Err(Error::SizeMismatch { expected: n, found: q.n() });
    }
    let inv = q.inverse();
    let (mut mean, mut var) = (0.0, 0.0);
    for j in 0..n {
        for i in 0..j {
            let a = p1[(i, j)];
            let b = p2[(inv.apply(i), inv.apply(j))];
            let m = a * (1.0 - b) + b * (1.0 - a);
            mean += m;
            var += m * (1.0 - m);
        }
    }
    MomentPair::new(mean, var.max(0.0))
}

/// Normal-approximation power of the adjacency test that rejects above the
/// level-`alpha` quantile of the null moments.
pub fn power_from_moments(null: MomentPair, alt: MomentPair, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidLevel(alpha));
    }
    if alt.variance() <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let z = upper_quantile(alpha);
    Ok(normal_tail((z * null.sd() + null.mean() - alt.mean()) / alt.sd()))
}

/// Power of the adjacency test of `p1` against `p1 + E`, with the null graph
/// relabeled by `qk` and the alternative by `ql`. The perturbation is added
/// unscaled.
pub fn analytic_power_adjacency(
    p1: &DMatrix<f64>,
    err: &ErrorSpec,
    qk: &Permutation,
    ql: &Permutation,
    alpha: f64,
) -> Result<f64> {
    err.validate()?;
    let p2 = p1 + err.matrix(p1.nrows());
    let null = adjacency_moments(p1, p1, qk)?;
    let alt = adjacency_moments(p1, &p2, ql)?;
    power_from_moments(null, alt, alpha)
}

/// [`analytic_power_adjacency`] for an SBM, with the block swaps `Q_k`, `Q_l`
/// and the perturbation scaled by the sparsity factor.
pub fn analytic_power_sbm(spec: &SbmSpec, err: &ErrorSpec, k: usize, l: usize, alpha: f64) -> Result<f64> {
    let (qk, ql) = sbm_block_swaps(spec, k, l)?;
    let p1 = sbm_probability_matrix(spec);
    err.validate()?;
    let n = spec.n();
    let p2 = DMatrix::from_fn(n, n, |u, v| p1[(u, v)] + spec.nu() * err.entry(n, u, v));
    let null = adjacency_moments(&p1, &p1, &qk)?;
    let alt = adjacency_moments(&p1, &p2, &ql)?;
    power_from_moments(null, alt, alpha)
}

pub(crate) fn sbm_probability_matrix(spec: &SbmSpec) -> DMatrix<f64> {
    let n = spec.n();
    DMatrix::from_fn(n, n, |u, v| spec.edge_probability(u, v))
}

pub(crate) fn sbm_block_swaps(spec: &SbmSpec, k: usize, l: usize) -> Result<(Permutation, Permutation)> {
    if spec.blocks() < 2 {
        return Err(Error::InvalidSpec("block swaps need at least two blocks".into()));
    }
    let (n1, n2) = (spec.sizes()[0], spec.sizes()[1]);
    let rest = spec.n() - n1 - n2;
    Ok((block_shuffle_permutation(n1, n2, rest, k)?, block_shuffle_permutation(n1, n2, rest, l)?))
}

fn shuffle_distance_sq(p: &DMatrix<f64>, q: &Permutation) -> Result<f64> {
    Ok((p - q.conjugate(p)?).norm_squared())
}

/// `||P - Q_a P Q_a^T||_F^2 - ||P - Q_b P Q_b^T||_F^2`.
pub fn population_shuffle_gap(p: &DMatrix<f64>, qa: &Permutation, qb: &Permutation) -> Result<f64> {
    if qa.n() != qb.n() {
        return Err(Error::SizeMismatch { expected: qa.n(), found: qb.n() });
    }
    if qa == qb {
        qa.conjugate(p)?;
        return Ok(0.0);
    }
    Ok(shuffle_distance_sq(p, qa)? - shuffle_distance_sq(p, qb)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn aande(n_half: usize) -> SbmSpec {
        SbmSpec::new(vec![vec![0.55, 0.4], vec![0.4, 0.45]], vec![n_half, n_half], 1.0).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let spec = aande(250);
        assert_eq!(sbm_shuffle_distance_sq(&spec, 0).unwrap(), 0.0);
        assert!((sbm_shuffle_distance_sq(&spec, 4).unwrap() - 49.68).abs() < 1e-9);
        assert!(matches!(sbm_shuffle_distance_sq(&spec, 3), Err(Error::OddBudget(3))));
        let flat = SbmSpec::new(vec![vec![0.3, 0.3], vec![0.3, 0.3]], vec![5, 5], 1.0).unwrap();
        assert_eq!(sbm_shuffle_distance_sq(&flat, 6).unwrap(), 0.0);
    }

    #[test]
    fn gap_matches_closed_form() {
        let spec = aande(250);
        let p = sbm_probability_matrix(&spec);
        let id = Permutation::identity(500);
        let mut last = 0.0;
        for k in (0..=20).step_by(2) {
            let (qk, _) = sbm_block_swaps(&spec, k, 0).unwrap();
            let gap = population_shuffle_gap(&p, &qk, &id).unwrap();
            assert!((gap - sbm_shuffle_distance_sq(&spec, k).unwrap()).abs() < 1e-9);
            assert!(gap >= last);
            last = gap;
        }
        let (q4, _) = sbm_block_swaps(&spec, 4, 0).unwrap();
        assert_eq!(population_shuffle_gap(&p, &q4, &q4).unwrap(), 0.0);
    }

    #[test]
    fn erdos_renyi_mean() {
        let (n, p) = (20, 0.3);
        let m = DMatrix::from_element(n, n, p);
        let mp = adjacency_moments(&m, &m, &Permutation::identity(n)).unwrap();
        let pairs = (n * (n - 1) / 2) as f64;
        assert!((mp.mean() - pairs * 2.0 * p * (1.0 - p)).abs() < 1e-9);
    }

    #[test]
    fn deterministic_graphs_have_zero_variance() {
        let m = DMatrix::from_fn(6, 6, |i, j| if (i + j) % 2 == 0 { 1.0 } else { 0.0 });
        let z = DMatrix::zeros(6, 6);
        let mp = adjacency_moments(&m, &z, &Permutation::identity(6)).unwrap();
        assert_eq!(mp.variance(), 0.0);
        assert_eq!(mp.mean(), 6.0);
        let bad = DMatrix::from_element(3, 3, 1.2);
        assert!(matches!(
            adjacency_moments(&bad, &bad, &Permutation::identity(3)),
            Err(Error::ProbabilityOutOfRange { .. })
        ));
    }

    #[test]
    fn power_equals_level_without_signal() {
        let spec = aande(30);
        for k in [0, 10] {
            let pw = analytic_power_sbm(&spec, &ErrorSpec::constant(0.0), k, k, 0.05).unwrap();
            assert!((pw - 0.05).abs() < 1e-9, "{pw}");
        }
    }

    #[test]
    fn negative_shift_fails_to_reject() {
        let spec = aande(250);
        let pw = analytic_power_sbm(&spec, &ErrorSpec::constant(-0.03), 0, 0, 0.05).unwrap();
        assert!(pw < 0.05, "{pw}");
        let pw = analytic_power_sbm(&spec, &ErrorSpec::constant(0.03), 0, 0, 0.05).unwrap();
        assert!(pw > 0.05, "{pw}");
    }

    #[test]
    fn zero_alternative_variance_is_an_error() {
        let z = DMatrix::zeros(4, 4);
        let id = Permutation::identity(4);
        assert!(matches!(
            analytic_power_adjacency(&z, &ErrorSpec::constant(0.0), &id, &id, 0.05),
            Err(Error::ZeroVariance)
        ));
    }
}
