//! Shared fixtures for the benchmark targets.

use qepf::{QuantileModel, SampleArm};

pub fn bench_models() -> Vec<QuantileModel> {
    [
        "exponential lambda=1",
        "weibull k=2 lambda=1",
        "gamma k=2 theta=1",
        "pareto alpha=2.5 sigma=1",
        "lmrqd alpha=0.5 mu=5",
    ]
    .iter()
    .map(|s| s.parse().expect("valid model spec"))
    .collect()
}

pub fn bench_arm(n: usize, seed: u64) -> SampleArm {
    let model: QuantileModel = "gamma k=2 theta=1".parse().expect("valid model spec");
    model.sample(n, seed).expect("sampling succeeds")
}
