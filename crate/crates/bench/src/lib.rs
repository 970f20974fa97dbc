//! Benchmark fixtures.

use blockmix::{generate, scenario_spec, DataMatrix, Partitions, Scenario, SigmaReading};

/// A `Sim1` dataset at the given size.
pub fn sim1(n: usize, p: usize, seed: u64) -> (DataMatrix, Partitions) {
    generate(
        &scenario_spec(Scenario::Sim1, SigmaReading::Variance)
            .with_size(n, p)
            .with_seed(seed),
    )
}
