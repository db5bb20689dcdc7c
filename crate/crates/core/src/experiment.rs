//! Experiment configuration and the runner behind the command-line tool.

use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::distributions::ParametricDistribution;
use crate::error::{Error, Result};
use crate::estimators::{run_estimator, Budget, EstimatorKind, Execution};
use crate::models::{InputDistributions, Model, ModelSpec};
use crate::rng::ReplicationStreams;
use crate::stats::{summarize, EstimateReport, CSV_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Mm1,
    SanBridge,
}

impl std::str::FromStr for ModelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mm1" => Ok(ModelName::Mm1),
            "san_bridge" => Ok(ModelName::SanBridge),
            other => Err(config_err(
                "model",
                format!("unknown model `{other}` (expected mm1 or san_bridge)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(config_err(
                "format",
                format!("unknown format `{other}` (expected csv or json)"),
            )),
        }
    }
}

fn config_err(field: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn default_confidence() -> f64 {
    0.95
}

/// A fully resolved experiment.
///
/// `service_dist` / `arrival_dist` override the exponential distributions
/// implied by `service_mean` / `arrival_mean`. For the activity network every
/// arc uses the service distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_customers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub service_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrival_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub service_dist: Option<ParametricDistribution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrival_dist: Option<ParametricDistribution>,
    /// Comma-separated list of `wd`, `iswd`, `sf`, `fd`.
    pub estimator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_budget_s: Option<f64>,
    pub seed: u64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
    #[serde(default)]
    pub parallel: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

/// The model and input distributions an experiment resolves to.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub model: ModelSpec,
    pub inputs: InputDistributions,
    pub size: usize,
    pub theta: f64,
}

fn positive_field(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(config_err(field, format!("must be positive, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn estimators(&self) -> Result<Vec<EstimatorKind>> {
        let kinds = self
            .estimator
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| EstimatorKind::parse(s, self.fd_step))
            .collect::<Result<Vec<_>>>()?;
        if kinds.is_empty() {
            return Err(config_err("estimator", "at least one estimator is required"));
        }
        Ok(kinds)
    }

    pub fn budget(&self) -> Result<Budget> {
        match (self.n, self.time_budget_s) {
            (Some(_), Some(_)) | (None, None) => Err(config_err(
                "n",
                "exactly one of n and time_budget_s must be given",
            )),
            (Some(n), None) if n < 2 => Err(config_err("n", "must be at least 2")),
            (Some(n), None) => Ok(Budget::Replications(n)),
            (None, Some(t)) => Ok(Budget::WallTime(Duration::from_secs_f64(positive_field(
                "time_budget_s",
                t,
            )?))),
        }
    }

    fn distribution(
        &self,
        dist: Option<ParametricDistribution>,
        mean: Option<f64>,
        mean_field: &str,
    ) -> Result<ParametricDistribution> {
        if let Some(d) = dist {
            return Ok(d);
        }
        let mean = mean.ok_or_else(|| config_err(mean_field, "required"))?;
        ParametricDistribution::exponential(positive_field(mean_field, mean)?)
            .map_err(|e| config_err(mean_field, e.to_string()))
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let service = self.distribution(self.service_dist, self.service_mean, "service_mean")?;
        let theta = service.theta().ok_or_else(|| {
            config_err(
                "service_dist",
                format!("the {} family has no sensitivity parameter", service.name()),
            )
        })?;
        let (model, inputs, size) = match self.model {
            ModelName::Mm1 => {
                let n = self
                    .n_customers
                    .ok_or_else(|| config_err("n_customers", "required for model mm1"))?;
                if n == 0 {
                    return Err(config_err("n_customers", "must be at least 1"));
                }
                let arrival =
                    self.distribution(self.arrival_dist, self.arrival_mean, "arrival_mean")?;
                let model = ModelSpec::mm1(n)?;
                let inputs = model.input_distributions(service, arrival);
                (model, inputs, n)
            }
            ModelName::SanBridge => {
                let model = ModelSpec::san_bridge();
                let inputs = model.input_distributions(service, service);
                let size = model.dimension();
                (model, inputs, size)
            }
        };
        model.check_inputs(&inputs)?;
        Ok(Scenario {
            model,
            inputs,
            size,
            theta,
        })
    }

    /// Checks every field without running anything.
    pub fn validate(&self) -> Result<()> {
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(config_err(
                "confidence",
                format!("must lie in (0, 1), got {}", self.confidence),
            ));
        }
        if let Some(h) = self.fd_step {
            positive_field("fd_step", h)?;
        }
        self.estimators()?;
        self.budget()?;
        self.scenario()?;
        Ok(())
    }
}

/// Runs each configured estimator as its own cell and summarizes it.
///
/// Cell `k` (the k-th estimator in the list) draws from substreams
/// `(k << 40) | r`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<EstimateReport>> {
    config.validate()?;
    let scenario = config.scenario()?;
    let budget = config.budget()?;
    let execution = if config.parallel {
        Execution::Parallel
    } else {
        Execution::Serial
    };
    let mut reports = Vec::new();
    for (cell, kind) in config.estimators()?.into_iter().enumerate() {
        let batch = run_estimator(
            kind,
            &scenario.model,
            &scenario.inputs,
            budget,
            ReplicationStreams::new(config.seed, cell as u32),
            execution,
        )?;
        reports.push(
            summarize(&batch, config.confidence)?.labeled(
                scenario.model.name(),
                scenario.size,
                scenario.theta,
            ),
        );
    }
    Ok(reports)
}

/// CSV output: two `#` comment lines echoing the seed and resolved config,
/// the header, then one row per report.
pub fn render_csv(config: &ExperimentConfig, reports: &[EstimateReport], redact_timing: bool) -> String {
    let mut out = String::new();
    out.push_str(&format!("# seed={}\n", config.seed));
    out.push_str(&format!(
        "# config={}\n",
        serde_json::to_string(config).expect("config serializes")
    ));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row(redact_timing));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct JsonOutput<'a> {
    config: &'a ExperimentConfig,
    reports: Vec<serde_json::Value>,
}

/// JSON output: `{"config": …, "reports": […]}`. Non-finite numbers become
/// `null`.
pub fn render_json(config: &ExperimentConfig, reports: &[EstimateReport], redact_timing: bool) -> String {
    let reports = reports
        .iter()
        .map(|r| {
            let mut v = serde_json::to_value(r).expect("report serializes");
            if redact_timing {
                if let Some(obj) = v.as_object_mut() {
                    obj.insert("wall_time".into(), serde_json::Value::Null);
                    obj.insert("efficiency".into(), serde_json::Value::Null);
                }
            }
            v
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&JsonOutput { config, reports })
        .expect("output serializes");
    s.push('\n');
    s
}

pub fn render(config: &ExperimentConfig, reports: &[EstimateReport], redact_timing: bool) -> String {
    match config.format {
        OutputFormat::Csv => render_csv(config, reports, redact_timing),
        OutputFormat::Json => render_json(config, reports, redact_timing),
    }
}
