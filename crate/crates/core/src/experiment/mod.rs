//! Monte Carlo sweeps over one scenario parameter.
//!
//! Every (sweep point, trial) pair draws one scenario that all requested
//! policies share. The scenario seed depends on the master seed and the
//! trial index only, so trial `k` sees the same user draws at every sweep
//! point and differences along the sweep come from the swept parameter
//! rather than from resampling.

mod output;
mod presets;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use output::{emit_results, summarize, write_detail, write_summary, SummaryRow, DETAIL_HEADER, SUMMARY_HEADER};
pub use presets::{figure_presets, preset, Preset};

use crate::error::{Error, Result};
use crate::scenario::{generate_scenario, ScenarioConfig};
use crate::schedulers::{
    evaluate, exhaustive_optimal, joint_allocate, min_group_allocate, per_resource_allocate, Assignment, CpuModel,
    ScheduleOutcome,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Policy {
    MinGroup,
    PerResource,
    Joint,
    OptUnconstrained,
    OptConstrained,
    LocalOnly,
}

impl Policy {
    pub const ALL: [Policy; 6] = [
        Policy::MinGroup,
        Policy::PerResource,
        Policy::Joint,
        Policy::OptUnconstrained,
        Policy::OptConstrained,
        Policy::LocalOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Policy::MinGroup => "min_group",
            Policy::PerResource => "per_resource",
            Policy::Joint => "joint",
            Policy::OptUnconstrained => "opt_unconstrained",
            Policy::OptConstrained => "opt_constrained",
            Policy::LocalOnly => "local_only",
        }
    }

    pub fn is_exhaustive(self) -> bool {
        matches!(self, Policy::OptUnconstrained | Policy::OptConstrained)
    }

    /// CPU model the policy's output is checked against.
    pub fn cpu_model(self) -> CpuModel {
        match self {
            Policy::MinGroup | Policy::OptUnconstrained => CpuModel::Unlimited,
            _ => CpuModel::Shared,
        }
    }

    pub fn run(self, scenario: &crate::scenario::Scenario) -> Result<(Assignment, ScheduleOutcome)> {
        match self {
            Policy::MinGroup => min_group_allocate(scenario),
            Policy::PerResource => per_resource_allocate(scenario),
            Policy::Joint => joint_allocate(scenario),
            Policy::OptUnconstrained => exhaustive_optimal(scenario, CpuModel::Unlimited),
            Policy::OptConstrained => exhaustive_optimal(scenario, CpuModel::Shared),
            Policy::LocalOnly => {
                let a = Assignment::all_local(scenario.num_users(), scenario.num_subcarriers());
                let out = evaluate(&a, scenario, CpuModel::Shared)?;
                Ok((a, out))
            }
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::config(format!("unknown policy '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVariable {
    NumUsers,
    CellRadiusKm,
    CloudletFreqHz,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::NumUsers => "num_users",
            SweepVariable::CellRadiusKm => "cell_radius_km",
            SweepVariable::CloudletFreqHz => "cloudlet_freq_hz",
        }
    }

    /// `base` with the swept field set to `value`.
    pub fn apply(self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut config = base.clone();
        match self {
            SweepVariable::NumUsers => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::config(format!("num_users must be a positive integer, got {value}")));
                }
                config.num_users = value as usize;
            }
            SweepVariable::CellRadiusKm => config.cell_radius_km = value,
            SweepVariable::CloudletFreqHz => config.cloudlet_freq_hz = value,
        }
        config.validate()?;
        Ok(config)
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [SweepVariable::NumUsers, SweepVariable::CellRadiusKm, SweepVariable::CloudletFreqHz]
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::config(format!("unknown sweep variable '{s}'")))
    }
}

/// Largest instance the exhaustive baselines may be asked to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExhaustiveCap {
    pub max_users: usize,
    pub max_subcarriers: usize,
}

impl Default for ExhaustiveCap {
    fn default() -> Self {
        ExhaustiveCap {
            max_users: 4,
            max_subcarriers: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// Names the output files.
    pub label: String,
    pub base_config: ScenarioConfig,
    pub sweep_variable: SweepVariable,
    pub sweep_values: Vec<f64>,
    pub policies: Vec<Policy>,
    pub trials: usize,
    pub master_seed: u64,
    pub exhaustive_cap: ExhaustiveCap,
    /// Record per-policy wall time. Off by default so that output files are
    /// byte-reproducible.
    pub record_wall_time: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sweep_values.is_empty() {
            return Err(Error::config("no sweep values"));
        }
        if self.policies.is_empty() {
            return Err(Error::config("no policies"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        let exhaustive = self.policies.iter().any(|p| p.is_exhaustive());
        for &value in &self.sweep_values {
            let config = self.sweep_variable.apply(&self.base_config, value)?;
            let cap = self.exhaustive_cap;
            if exhaustive && (config.num_users > cap.max_users || config.num_subcarriers > cap.max_subcarriers) {
                return Err(Error::Refused(format!(
                    "exhaustive policy requested for M={}, N={} (cap M<={}, N<={})",
                    config.num_users, config.num_subcarriers, cap.max_users, cap.max_subcarriers
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_value: f64,
    pub policy: Policy,
    pub trial_index: usize,
    pub total_energy_j: f64,
    pub total_saving_j: f64,
    pub offload_count: usize,
    pub wall_time_s: f64,
}

/// Seed of the scenario used by trial `trial` (SplitMix64 finalizer over the
/// master seed and trial index).
pub fn trial_seed(master_seed: u64, trial: usize) -> u64 {
    let mut z = master_seed ^ (trial as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs every policy on every (sweep value, trial) scenario. Rows come back
/// ordered by sweep value (as listed), policy (as listed) and trial.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let points: Vec<(usize, usize)> = (0..spec.sweep_values.len())
        .flat_map(|s| (0..spec.trials).map(move |t| (s, t)))
        .collect();

    let per_point: Vec<Vec<(usize, usize, ResultRow)>> = points
        .par_iter()
        .map(|&(s, trial)| -> Result<Vec<(usize, usize, ResultRow)>> {
            let value = spec.sweep_values[s];
            let mut config = spec.sweep_variable.apply(&spec.base_config, value)?;
            config.rng_seed = trial_seed(spec.master_seed, trial);
            let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
            let scenario = generate_scenario(&config, &mut rng)?;
            spec.policies
                .iter()
                .enumerate()
                .map(|(k, &policy)| {
                    let start = Instant::now();
                    let (_, outcome) = policy.run(&scenario)?;
                    let elapsed = start.elapsed().as_secs_f64();
                    Ok((
                        s,
                        k,
                        ResultRow {
                            sweep_value: value,
                            policy,
                            trial_index: trial,
                            total_energy_j: outcome.total_energy_j,
                            total_saving_j: outcome.total_saving_j,
                            offload_count: outcome.offload_count,
                            wall_time_s: if spec.record_wall_time { elapsed } else { 0.0 },
                        },
                    ))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut rows: Vec<(usize, usize, ResultRow)> = per_point.into_iter().flatten().collect();
    rows.sort_by_key(|(s, k, row)| (*s, *k, row.trial_index));
    Ok(rows.into_iter().map(|(_, _, row)| row).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> ExperimentSpec {
        ExperimentSpec {
            label: "t".into(),
            base_config: ScenarioConfig::default(),
            sweep_variable: SweepVariable::NumUsers,
            sweep_values: vec![2.0, 3.0],
            policies: vec![Policy::Joint, Policy::LocalOnly],
            trials: 3,
            master_seed: 7,
            exhaustive_cap: ExhaustiveCap::default(),
            record_wall_time: false,
        }
    }

    #[test]
    fn row_count_and_order() {
        let rows = run_experiment(&spec()).unwrap();
        assert_eq!(rows.len(), 12);
        assert_eq!(rows[0].policy, Policy::Joint);
        assert_eq!((rows[3].sweep_value, rows[3].policy, rows[3].trial_index), (2.0, Policy::LocalOnly, 0));
        assert_eq!(rows[11].sweep_value, 3.0);
    }

    #[test]
    fn deterministic() {
        assert_eq!(run_experiment(&spec()).unwrap(), run_experiment(&spec()).unwrap());
    }

    #[test]
    fn exhaustive_beyond_cap_is_refused() {
        let mut s = spec();
        s.sweep_values = vec![5.0];
        s.policies = vec![Policy::OptConstrained];
        assert!(matches!(run_experiment(&s), Err(Error::Refused(_))));
    }

    #[test]
    fn bad_specs_are_rejected() {
        let mut s = spec();
        s.trials = 0;
        assert!(run_experiment(&s).is_err());
        let mut s = spec();
        s.sweep_values.clear();
        assert!(run_experiment(&s).is_err());
        let mut s = spec();
        s.sweep_values = vec![2.5];
        assert!(run_experiment(&s).is_err());
    }

    #[test]
    fn names_round_trip() {
        for p in Policy::ALL {
            assert_eq!(p.name().parse::<Policy>().unwrap(), p);
        }
        assert_eq!("cell_radius_km".parse::<SweepVariable>().unwrap(), SweepVariable::CellRadiusKm);
        assert!("radius".parse::<SweepVariable>().is_err());
    }
}
