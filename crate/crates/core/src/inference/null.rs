use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where the null samples came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullSource {
    DirectMc,
    Bootstrap,
}

/// Sorted sample of a statistic drawn under the null hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct NullDistribution {
    samples: Vec<f64>,
    source: NullSource,
}

impl NullDistribution {
    pub fn new(mut samples: Vec<f64>, source: NullSource) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySample);
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { samples, source })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn source(&self) -> NullSource {
        self.source
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }
}

/// The `ceil((1 - alpha)(B + 1))`-th smallest sample, or the largest sample
/// when that index exceeds `B`.
pub fn empirical_critical_value(null: &NullDistribution, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidLevel(alpha));
    }
    let b = null.len();
    if b == 0 {
        return Err(Error::EmptySample);
    }
    let raw = (1.0 - alpha) * (b as f64 + 1.0);
    // (1 - 0.05) * 20 is 18.999999999999996 in binary; snap near-integers
    let index = if (raw - raw.round()).abs() < 1e-9 { raw.round() } else { raw.ceil() } as usize;
    Ok(null.samples[index.clamp(1, b) - 1])
}

/// The test rejects only when the statistic strictly exceeds the critical value.
pub fn rejects(statistic: f64, critical: f64) -> bool {
    statistic > critical
}

/// Rejection proportion with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerEstimate {
    pub power: f64,
    pub se: f64,
    pub n_reps: usize,
}

impl PowerEstimate {
    pub fn from_counts(rejections: usize, n_reps: usize) -> Result<Self> {
        if n_reps == 0 {
            return Err(Error::EmptySample);
        }
        if rejections > n_reps {
            return Err(Error::InvalidInput("more rejections than trials".into()));
        }
        let power = rejections as f64 / n_reps as f64;
        Ok(Self { power, se: (power * (1.0 - power) / n_reps as f64).sqrt(), n_reps })
    }

    /// Share of `statistics` strictly above `critical`.
    pub fn from_statistics(statistics: &[f64], critical: f64) -> Result<Self> {
        let hits = statistics.iter().filter(|&&t| rejects(t, critical)).count();
        Self::from_counts(hits, statistics.len())
    }
}
