//! Runs iswd and classical wd on the same queue for the same wall-clock
//! budget and prints how their confidence intervals compare.
//!
//! cargo run --release -p weakgrad --example equal_time -- [customers] [seconds] [seed]

use std::time::Duration;

use weakgrad::{
    compare, run_estimator, summarize, Budget, EstimatorKind, Execution, ModelSpec,
    ParametricDistribution, ReplicationStreams,
};

fn main() -> weakgrad::Result<()> {
    let mut args = std::env::args().skip(1);
    let customers: usize = args.next().map_or(50, |a| a.parse().expect("customers"));
    let seconds: f64 = args.next().map_or(10.0, |a| a.parse().expect("seconds"));
    let seed: u64 = args.next().map_or(2024, |a| a.parse().expect("seed"));

    let model = ModelSpec::mm1(customers)?;
    let inputs = model.input_distributions(
        ParametricDistribution::exponential(1.0)?,
        ParametricDistribution::exponential(2.0)?,
    );
    let budget = Budget::WallTime(Duration::from_secs_f64(seconds));

    let mut reports = Vec::new();
    for (cell, kind) in [EstimatorKind::Iswd, EstimatorKind::Wd].into_iter().enumerate() {
        let batch = run_estimator(
            kind,
            &model,
            &inputs,
            budget,
            ReplicationStreams::new(seed, cell as u32),
            Execution::Serial,
        )?;
        let r = summarize(&batch, 0.95)?;
        println!(
            "{:>4}: n={:<9} mean={:.4} CI=[{:.4}, {:.4}] width={:.4} time={:.2}s",
            r.estimator,
            r.n,
            r.mean,
            r.ci_low,
            r.ci_high,
            r.ci_width(),
            r.wall_time
        );
        reports.push(r);
    }

    let v = compare(&reports[0], &reports[1])?;
    println!(
        "iswd vs wd: width ratio {:.3}, time-normalized {:.3}, efficiency ratio {:.3}, iswd dominates: {}",
        v.ci_width_ratio, v.time_normalized_width_ratio, v.efficiency_ratio, v.a_dominates
    );
    Ok(())
}
