//! Seeded inputs shared by the benchmarks.

use mec_core::{generate_scenario, DpCandidate, Scenario, ScenarioConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A default-parameter scenario with `users` users and `subcarriers`
/// subcarriers.
pub fn scenario(users: usize, subcarriers: usize, seed: u64) -> Scenario {
    let config = ScenarioConfig {
        num_users: users,
        num_subcarriers: subcarriers,
        rng_seed: seed,
        ..ScenarioConfig::default()
    };
    generate_scenario(&config, &mut ChaCha8Rng::seed_from_u64(seed)).expect("default parameters are valid")
}

/// `count` random scheduling candidates with loose enough deadlines that
/// most subsets are feasible.
pub fn dp_candidates(count: usize, seed: u64) -> Vec<DpCandidate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| DpCandidate {
            saving_j: rng.random_range(0.01..0.5),
            tx_time_s: rng.random_range(0.001..0.02),
            exec_time_s: rng.random_range(0.02..0.04),
            deadline_s: rng.random_range(0.05..0.6),
        })
        .collect()
}

/// Subcarrier gains for one user, spread over two orders of magnitude.
pub fn gains(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| 10f64.powf(rng.random_range(6.0..8.0))).collect()
}
