//! Benchmark fixtures shared by the criterion benches.

use weakgrad::{InputDistributions, ModelSpec, ParametricDistribution};

/// M/M/1 with `customers` customers, exponential service mean `theta` and
/// exponential interarrival mean 2.
pub fn mm1_fixture(customers: usize, theta: f64) -> (ModelSpec, InputDistributions) {
    let model = ModelSpec::mm1(customers).expect("customers >= 1");
    let inputs = model.input_distributions(
        ParametricDistribution::exponential(theta).expect("positive mean"),
        ParametricDistribution::exponential(2.0).expect("positive mean"),
    );
    (model, inputs)
}
