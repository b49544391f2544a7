//! Response-time statistics: mean, variance, 95% confidence half-width and a
//! quantile-downsampled empirical CDF.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::ModelError;

/// Batch count for the batch-means confidence interval.
pub const BATCH_COUNT: usize = 30;

/// Replication-means CI is used from this many replications upward.
pub const MIN_REPLICATIONS_FOR_T: usize = 5;

pub const DEFAULT_ECDF_POINTS: usize = 512;

/// One point of a step ECDF: `fraction` of samples are `<= time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcdfPoint {
    pub time: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSummary {
    pub sample_count: usize,
    pub mean: f64,
    /// Unbiased sample variance of the pooled samples.
    pub variance: f64,
    pub ci95_halfwidth: f64,
    pub ecdf: Vec<EcdfPoint>,
    /// Per-replication means in replication order (empty for a plain sample).
    pub replication_means: Vec<f64>,
}

impl SimSummary {
    /// Standard error of the mean treating samples as independent.
    pub fn iid_std_error(&self) -> f64 {
        (self.variance / self.sample_count as f64).sqrt()
    }

    pub fn ecdf_at(&self, t: f64) -> f64 {
        ecdf_at(self, t)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn mean_of(xs: &[f64]) -> f64 {
    let mut acc = Accumulator::default();
    xs.iter().for_each(|&x| acc.add(x));
    acc.value() / xs.len() as f64
}

fn unbiased_variance(xs: &[f64], mean: f64) -> f64 {
    let mut acc = Accumulator::default();
    xs.iter().for_each(|&x| acc.add((x - mean) * (x - mean)));
    acc.value() / (xs.len() - 1) as f64
}

/// Two-sided 95% Student-t quantile with `df` degrees of freedom.
pub fn t_quantile_975(df: usize) -> f64 {
    StudentsT::new(0.0, 1.0, df as f64)
        .map(|t| t.inverse_cdf(0.975))
        .unwrap_or(1.959_963_984_540_054)
}

/// Half-width of a 95% t-interval around the mean of `means`.
fn t_halfwidth(means: &[f64]) -> f64 {
    if means.len() < 2 {
        return 0.0;
    }
    let m = mean_of(means);
    let sd = unbiased_variance(means, m).sqrt();
    t_quantile_975(means.len() - 1) * sd / (means.len() as f64).sqrt()
}

/// Batch-means half-width over contiguous batches of `samples`.
pub fn batch_means_halfwidth(samples: &[f64], batches: usize) -> f64 {
    let b = batches.min(samples.len());
    if b < 2 {
        return 0.0;
    }
    let n = samples.len();
    let means: Vec<f64> = (0..b).map(|i| mean_of(&samples[i * n / b..(i + 1) * n / b])).collect();
    t_halfwidth(&means)
}

/// Downsamples sorted samples to at most `points` quantile-spaced ECDF points.
/// The final point always carries fraction 1.
fn downsample_ecdf(sorted: &[f64], points: usize) -> Vec<EcdfPoint> {
    let n = sorted.len();
    let m = points.clamp(1, n);
    (1..=m)
        .map(|j| {
            let idx = (j * n).div_ceil(m);
            EcdfPoint {
                time: sorted[idx - 1],
                fraction: idx as f64 / n as f64,
            }
        })
        .collect()
}

fn build(pooled: &[f64], ecdf_points: usize, ci95_halfwidth: f64, replication_means: Vec<f64>) -> SimSummary {
    let mean = mean_of(pooled);
    let variance = unbiased_variance(pooled, mean);
    let mut sorted = pooled.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    SimSummary {
        sample_count: pooled.len(),
        mean,
        variance,
        ci95_halfwidth,
        ecdf: downsample_ecdf(&sorted, ecdf_points),
        replication_means,
    }
}

/// Summary of a single ordered sample stream. The confidence interval uses
/// batch means over [`BATCH_COUNT`] contiguous batches.
pub fn collect_summary(samples: &[f64], ecdf_points: usize) -> Result<SimSummary, ModelError> {
    if samples.len() < 2 {
        return Err(ModelError::TooFewSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    let hw = batch_means_halfwidth(samples, BATCH_COUNT);
    Ok(build(samples, ecdf_points, hw, Vec::new()))
}

/// Pools replications (in the given order). With at least
/// [`MIN_REPLICATIONS_FOR_T`] replications the interval comes from the
/// replication means; otherwise from batch means over the concatenation.
pub fn summarize_replications(replications: &[Vec<f64>], ecdf_points: usize) -> Result<SimSummary, ModelError> {
    let pooled: Vec<f64> = replications.iter().flatten().copied().collect();
    if pooled.len() < 2 {
        return Err(ModelError::TooFewSamples {
            needed: 2,
            got: pooled.len(),
        });
    }
    let means: Vec<f64> = replications
        .iter()
        .filter(|r| !r.is_empty())
        .map(|r| mean_of(r))
        .collect();
    let hw = if means.len() >= MIN_REPLICATIONS_FOR_T {
        t_halfwidth(&means)
    } else {
        batch_means_halfwidth(&pooled, BATCH_COUNT)
    };
    Ok(build(&pooled, ecdf_points, hw, means))
}

/// Right-continuous step evaluation of the summary's ECDF; 0 below the first
/// point.
pub fn ecdf_at(summary: &SimSummary, t: f64) -> f64 {
    let idx = summary.ecdf.partition_point(|p| p.time <= t);
    if idx == 0 {
        0.0
    } else {
        summary.ecdf[idx - 1].fraction
    }
}
