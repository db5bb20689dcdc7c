//! Point estimates, plug-in variances, normal-theory confidence intervals and
//! work-normalized comparisons.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::estimators::GradientSampleBatch;

/// Summary of one estimator run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimator: String,
    pub model: String,
    /// Problem size: customers for the queue, arcs for an activity network.
    pub size: usize,
    pub theta: f64,
    pub n: usize,
    pub mean: f64,
    /// Plug-in variance (divisor `n`).
    pub sample_variance: f64,
    pub std_error: f64,
    pub confidence: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Seconds.
    pub wall_time: f64,
    pub model_evaluations: u64,
    /// `1 / (std_error² · wall_time)`, i.e. inverse sample variance per
    /// second of work per replication; infinite when either is zero.
    pub efficiency: f64,
    pub config_fingerprint: String,
}

/// Two-sided standard normal quantile for the given confidence level.
pub fn z_value(confidence: f64) -> f64 {
    Normal::standard().inverse_cdf(0.5 * (1.0 + confidence))
}

pub fn summarize(batch: &GradientSampleBatch, confidence: f64) -> Result<EstimateReport> {
    let n = batch.samples.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            got: n,
        });
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidParameter {
            name: "confidence",
            reason: format!("must lie in (0, 1), got {confidence}"),
        });
    }
    let nf = n as f64;
    // Accumulate around the first sample so a constant batch is exactly
    // constant and large offsets do not cancel.
    let pivot = batch.samples[0];
    let mean = pivot + batch.samples.iter().map(|s| s - pivot).sum::<f64>() / nf;
    let sample_variance = batch.samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / nf;
    let std_error = (sample_variance / nf).sqrt();
    let half = z_value(confidence) * std_error;
    Ok(EstimateReport {
        estimator: batch.estimator_name.clone(),
        model: String::new(),
        size: 0,
        theta: f64::NAN,
        n,
        mean,
        sample_variance,
        std_error,
        confidence,
        ci_low: mean - half,
        ci_high: mean + half,
        wall_time: batch.wall_time,
        model_evaluations: batch.model_evaluations,
        efficiency: 1.0 / (std_error * std_error * batch.wall_time),
        config_fingerprint: batch.config_fingerprint.clone(),
    })
}

impl EstimateReport {
    /// Attaches the model labels that appear in the CSV row.
    pub fn labeled(mut self, model: &str, size: usize, theta: f64) -> Self {
        self.model = model.to_string();
        self.size = size;
        self.theta = theta;
        self
    }

    pub fn ci_width(&self) -> f64 {
        self.ci_high - self.ci_low
    }

    pub fn contains(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }

    pub fn overlaps(&self, other: &EstimateReport) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

/// Column order of [`EstimateReport::csv_row`].
pub const CSV_HEADER: &str =
    "estimator,model,N,theta,n,mean,variance,ci_low,ci_high,wall_time_s,model_evals,efficiency";

impl EstimateReport {
    /// One CSV line without a trailing newline. `redact_timing` leaves the
    /// wall-time and efficiency fields empty.
    pub fn csv_row(&self, redact_timing: bool) -> String {
        let (wall, eff) = if redact_timing {
            (String::new(), String::new())
        } else {
            (self.wall_time.to_string(), self.efficiency.to_string())
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.estimator,
            self.model,
            self.size,
            self.theta,
            self.n,
            self.mean,
            self.sample_variance,
            self.ci_low,
            self.ci_high,
            wall,
            self.model_evaluations,
            eff
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonVerdict {
    /// CI width of `a` over CI width of `b`.
    pub ci_width_ratio: f64,
    /// Same ratio after scaling each width by `sqrt(wall_time)`, i.e. as if
    /// both had run for equal time.
    pub time_normalized_width_ratio: f64,
    /// Efficiency of `a` over efficiency of `b`.
    pub efficiency_ratio: f64,
    /// `a`'s time-normalized CI is strictly narrower.
    pub a_dominates: bool,
}

pub fn compare(a: &EstimateReport, b: &EstimateReport) -> Result<ComparisonVerdict> {
    if a.config_fingerprint != b.config_fingerprint {
        return Err(Error::ConfigMismatch {
            left: a.config_fingerprint.clone(),
            right: b.config_fingerprint.clone(),
        });
    }
    let ci_width_ratio = a.ci_width() / b.ci_width();
    let time_normalized_width_ratio = ci_width_ratio * (a.wall_time / b.wall_time).sqrt();
    Ok(ComparisonVerdict {
        ci_width_ratio,
        time_normalized_width_ratio,
        efficiency_ratio: a.efficiency / b.efficiency,
        a_dominates: time_normalized_width_ratio < 1.0,
    })
}
