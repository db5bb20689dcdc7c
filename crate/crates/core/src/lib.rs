//! Simulation-based gradient estimation for stochastic networks.
//!
//! The crate estimates `dE[Y(X)]/dθ`, where `Y` is a deterministic
//! performance map (an M/M/1 system time, an activity-network longest path)
//! and the inputs `X` are independent draws whose distributions share a
//! parameter θ. Four estimators are provided:
//!
//! * classical weak derivative (`wd`), which resimulates once per sensitive
//!   input for each side of the decomposition `∂f/∂θ = c(θ)(f⁺ − f⁻)`;
//! * the importance-sampling weak derivative (`iswd`), which reuses a single
//!   run and reweights it by `c(θ)(f⁺ − f⁻)/f`;
//! * the score function (`sf`);
//! * central finite differences with common random numbers (`fd`), used as
//!   an oracle.
//!
//! ```
//! use weakgrad::{iswd, summarize, ModelSpec, ParametricDistribution, ReplicationStreams};
//!
//! let model = ModelSpec::mm1(1).unwrap();
//! let inputs = model.input_distributions(
//!     ParametricDistribution::exponential(1.0).unwrap(),
//!     ParametricDistribution::exponential(2.0).unwrap(),
//! );
//! let batch = iswd(&model, &inputs, 10_000, ReplicationStreams::new(42, 0)).unwrap();
//! let report = summarize(&batch, 0.99).unwrap();
//! assert!(report.contains(1.0));
//! ```

pub mod distributions;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod models;
pub mod rng;
pub mod stats;

pub use distributions::{DecompositionTriple, DensityRatio, Family, ParametricDistribution, WeightKernel};
pub use error::{Error, Result};
pub use estimators::{
    config_fingerprint, default_fd_step, finite_difference, iswd, run_estimator, score_function,
    wd_classical, Budget, EstimatorKind, Execution, GradientSampleBatch,
};
pub use experiment::{run_experiment, ExperimentConfig, ModelName, OutputFormat, Scenario};
pub use models::{ActivityNetwork, InputDistributions, InputVector, Model, ModelKind, ModelSpec};
pub use rng::{make_stream, ReplicationStreams, StreamSpec, UniformStream};
pub use stats::{compare, summarize, ComparisonVerdict, EstimateReport, CSV_HEADER};
