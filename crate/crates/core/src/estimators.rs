//! Per-replication gradient estimators of `dE[Y(X)]/dθ`.
//!
//! * `wd` — classical weak derivative: for each sensitive coordinate `i`,
//!   resimulate with `Xᵢ` replaced by independent draws from `f⁺` and `f⁻`
//!   and accumulate `c(θ)·(Y⁺ᵢ − Y⁻ᵢ)`. Costs `2·|sensitive|` model
//!   evaluations per replication.
//! * `iswd` — importance-sampling weak derivative: one run, weighted by
//!   `Σᵢ c(θ)·(f⁺(Xᵢ) − f⁻(Xᵢ)) / f(Xᵢ)`. One model evaluation.
//! * `sf` — score function: one run, weighted by `Σᵢ ∂ln f(Xᵢ)/∂θ`.
//! * `fd` — central finite difference in θ with common random numbers.
//!
//! Replication `r` always reads substream `r` of its cell, so serial and
//! parallel runs produce the same samples in the same order.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::distributions::{DecompositionTriple, ParametricDistribution, WeightKernel};
use crate::error::{invalid, Error, Result};
use crate::models::{InputDistributions, Model};
use crate::rng::{ReplicationStreams, UniformStream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Wd,
    Iswd,
    Sf,
    /// `step = None` picks `1e-3 · max(1, θ)`.
    Fd {
        step: Option<f64>,
    },
}

impl EstimatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::Wd => "wd",
            EstimatorKind::Iswd => "iswd",
            EstimatorKind::Sf => "sf",
            EstimatorKind::Fd { .. } => "fd",
        }
    }

    /// Parses `wd | iswd | sf | fd`; `fd` takes the supplied step.
    pub fn parse(name: &str, fd_step: Option<f64>) -> Result<Self> {
        match name.trim() {
            "wd" => Ok(EstimatorKind::Wd),
            "iswd" => Ok(EstimatorKind::Iswd),
            "sf" => Ok(EstimatorKind::Sf),
            "fd" => Ok(EstimatorKind::Fd { step: fd_step }),
            other => Err(Error::Config {
                field: "estimator".into(),
                reason: format!("unknown estimator `{other}` (expected wd, iswd, sf or fd)"),
            }),
        }
    }
}

/// How many replications to run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    Replications(usize),
    /// Run until the budget elapses, checked between replications. At least
    /// two replications always run.
    WallTime(Duration),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Serial,
    /// Replications spread over the rayon pool. Only applies to
    /// [`Budget::Replications`].
    Parallel,
}

/// One estimator's per-replication gradient samples plus cost accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientSampleBatch {
    pub samples: Vec<f64>,
    pub n: usize,
    /// Seconds.
    pub wall_time: f64,
    pub model_evaluations: u64,
    pub estimator_name: String,
    pub config_fingerprint: String,
}

/// Hash of the model and its input distributions. Estimator choice and
/// replication count are deliberately excluded so that reports from
/// different estimators on the same problem can be compared.
pub fn config_fingerprint<M: Model + ?Sized>(model: &M, inputs: &InputDistributions) -> String {
    let mut h = Sha256::new();
    h.update(model.describe().as_bytes());
    h.update(b"|");
    h.update(
        serde_json::to_string(inputs)
            .expect("distributions serialize")
            .as_bytes(),
    );
    hex::encode(&h.finalize()[..16])
}

enum Plan {
    Wd(Vec<DecompositionTriple>),
    Iswd(Vec<WeightKernel>),
    Sf,
    Fd {
        up: InputDistributions,
        down: InputDistributions,
        step: f64,
    },
}

struct Prepared<'a, M: ?Sized> {
    model: &'a M,
    inputs: &'a InputDistributions,
    sensitive: &'a [usize],
    plan: Plan,
}

fn sensitive_dists<'a>(
    inputs: &'a InputDistributions,
    sensitive: &'a [usize],
) -> impl Iterator<Item = &'a ParametricDistribution> + 'a {
    sensitive.iter().map(move |&i| &inputs.as_slice()[i])
}

/// Default central-difference step for parameter value `theta`.
pub fn default_fd_step(theta: f64) -> f64 {
    1e-3 * theta.abs().max(1.0)
}

impl<'a, M: Model + ?Sized> Prepared<'a, M> {
    fn new(kind: EstimatorKind, model: &'a M, inputs: &'a InputDistributions) -> Result<Self> {
        if inputs.len() != model.dimension() {
            return Err(Error::Shape {
                expected: model.dimension(),
                got: inputs.len(),
            });
        }
        let sensitive = model.sensitive_inputs();
        if sensitive.is_empty() {
            return Err(Error::Model("model declares no sensitive inputs".into()));
        }
        if let Some(&i) = sensitive.iter().find(|&&i| i >= inputs.len()) {
            return Err(Error::Index {
                index: i,
                dimension: inputs.len(),
            });
        }
        let plan = match kind {
            EstimatorKind::Wd => Plan::Wd(
                sensitive_dists(inputs, sensitive)
                    .map(|d| d.decomposition())
                    .collect::<Result<_>>()?,
            ),
            EstimatorKind::Iswd => Plan::Iswd(
                sensitive_dists(inputs, sensitive)
                    .map(|d| Ok(d.decomposition()?.weight_kernel(d)))
                    .collect::<Result<_>>()?,
            ),
            EstimatorKind::Sf => {
                for d in sensitive_dists(inputs, sensitive) {
                    if d.theta().is_none() {
                        return Err(Error::NotImplemented {
                            operation: "score",
                            family: d.name(),
                        });
                    }
                }
                Plan::Sf
            }
            EstimatorKind::Fd { step } => {
                let theta = sensitive_dists(inputs, sensitive)
                    .next()
                    .and_then(|d| d.theta())
                    .ok_or(Error::NotImplemented {
                        operation: "sensitivity parameter",
                        family: inputs.as_slice()[sensitive[0]].name(),
                    })?;
                let step = step.unwrap_or_else(|| default_fd_step(theta));
                if !(step.is_finite() && step > 0.0) {
                    return Err(invalid("fd_step", format!("must be positive, got {step}")));
                }
                Plan::Fd {
                    up: inputs.with_theta(sensitive, theta + step)?,
                    down: inputs.with_theta(sensitive, theta - step)?,
                    step,
                }
            }
        };
        Ok(Self {
            model,
            inputs,
            sensitive,
            plan,
        })
    }

    fn evaluations_per_replication(&self) -> u64 {
        match self.plan {
            Plan::Wd(_) => 2 * self.sensitive.len() as u64,
            Plan::Iswd(_) | Plan::Sf => 1,
            Plan::Fd { .. } => 2,
        }
    }

    /// One gradient sample. `x` is scratch space for the input vector.
    fn replicate(&self, stream: &mut UniformStream, x: &mut Vec<f64>) -> Result<f64> {
        match &self.plan {
            Plan::Wd(triples) => {
                draw(self.inputs, stream, x);
                let mut total = 0.0;
                for (&i, t) in self.sensitive.iter().zip(triples) {
                    let base = x[i];
                    x[i] = t.plus.sample(stream);
                    let y_plus = self.model.evaluate(x)?;
                    x[i] = t.minus.sample(stream);
                    let y_minus = self.model.evaluate(x)?;
                    x[i] = base;
                    total += t.c * (y_plus - y_minus);
                }
                Ok(total)
            }
            Plan::Iswd(kernels) => {
                draw(self.inputs, stream, x);
                let y = self.model.evaluate(x)?;
                let mut weight = 0.0;
                for (&i, k) in self.sensitive.iter().zip(kernels) {
                    weight += k
                        .weight(x[i])
                        .ok_or(Error::SupportViolation {
                            coordinate: i,
                            x: x[i],
                        })?;
                }
                Ok(y * weight)
            }
            Plan::Sf => {
                draw(self.inputs, stream, x);
                let y = self.model.evaluate(x)?;
                let mut score = 0.0;
                for &i in self.sensitive {
                    score += self.inputs.as_slice()[i].score(x[i])?;
                }
                Ok(y * score)
            }
            Plan::Fd { up, down, step } => {
                let mut twin = stream.clone();
                draw(up, &mut twin, x);
                let y_up = self.model.evaluate(x)?;
                draw(down, stream, x);
                let y_down = self.model.evaluate(x)?;
                Ok((y_up - y_down) / (2.0 * step))
            }
        }
    }
}

fn draw(inputs: &InputDistributions, stream: &mut UniformStream, x: &mut Vec<f64>) {
    x.clear();
    x.extend(inputs.iter().map(|d| d.sample(stream)));
}

/// Runs `kind` under `budget` and collects its samples.
pub fn run_estimator<M: Model + ?Sized>(
    kind: EstimatorKind,
    model: &M,
    inputs: &InputDistributions,
    budget: Budget,
    streams: ReplicationStreams,
    execution: Execution,
) -> Result<GradientSampleBatch> {
    let prepared = Prepared::new(kind, model, inputs)?;
    let dim = model.dimension();
    let start = Instant::now();

    let samples = match budget {
        Budget::Replications(0) => {
            return Err(Error::InsufficientData {
                required: 1,
                got: 0,
            })
        }
        Budget::Replications(n) => match execution {
            Execution::Serial => {
                let mut x = Vec::with_capacity(dim);
                (0..n as u64)
                    .map(|r| prepared.replicate(&mut streams.stream(r), &mut x))
                    .collect::<Result<Vec<_>>>()?
            }
            Execution::Parallel => (0..n as u64)
                .into_par_iter()
                .map_init(
                    || Vec::with_capacity(dim),
                    |x, r| prepared.replicate(&mut streams.stream(r), x),
                )
                .collect::<Result<Vec<_>>>()?,
        },
        Budget::WallTime(limit) => {
            let mut x = Vec::with_capacity(dim);
            let mut out = Vec::new();
            let mut r = 0u64;
            while out.len() < 2 || start.elapsed() < limit {
                out.push(prepared.replicate(&mut streams.stream(r), &mut x)?);
                r += 1;
            }
            out
        }
    };

    let wall_time = start.elapsed().as_secs_f64();
    let n = samples.len();
    Ok(GradientSampleBatch {
        samples,
        n,
        wall_time,
        model_evaluations: prepared.evaluations_per_replication() * n as u64,
        estimator_name: kind.name().to_string(),
        config_fingerprint: config_fingerprint(model, inputs),
    })
}

pub fn wd_classical<M: Model + ?Sized>(
    model: &M,
    inputs: &InputDistributions,
    n: usize,
    streams: ReplicationStreams,
) -> Result<GradientSampleBatch> {
    run_estimator(
        EstimatorKind::Wd,
        model,
        inputs,
        Budget::Replications(n),
        streams,
        Execution::Serial,
    )
}

pub fn iswd<M: Model + ?Sized>(
    model: &M,
    inputs: &InputDistributions,
    n: usize,
    streams: ReplicationStreams,
) -> Result<GradientSampleBatch> {
    run_estimator(
        EstimatorKind::Iswd,
        model,
        inputs,
        Budget::Replications(n),
        streams,
        Execution::Serial,
    )
}

pub fn score_function<M: Model + ?Sized>(
    model: &M,
    inputs: &InputDistributions,
    n: usize,
    streams: ReplicationStreams,
) -> Result<GradientSampleBatch> {
    run_estimator(
        EstimatorKind::Sf,
        model,
        inputs,
        Budget::Replications(n),
        streams,
        Execution::Serial,
    )
}

pub fn finite_difference<M: Model + ?Sized>(
    model: &M,
    inputs: &InputDistributions,
    n: usize,
    step: f64,
    streams: ReplicationStreams,
) -> Result<GradientSampleBatch> {
    run_estimator(
        EstimatorKind::Fd { step: Some(step) },
        model,
        inputs,
        Budget::Replications(n),
        streams,
        Execution::Serial,
    )
}
