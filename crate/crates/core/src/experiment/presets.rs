use super::{ExhaustiveCap, ExperimentSpec, Policy, SweepVariable};
use crate::scenario::ScenarioConfig;

pub const DEFAULT_TRIALS: usize = 200;
pub const DEFAULT_MASTER_SEED: u64 = 20_160_822;

/// A named figure reproduction, made of one or more sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub specs: Vec<ExperimentSpec>,
}

fn spec(
    label: &str,
    base_config: ScenarioConfig,
    sweep_variable: SweepVariable,
    sweep_values: Vec<f64>,
    policies: &[Policy],
) -> ExperimentSpec {
    ExperimentSpec {
        label: label.to_owned(),
        base_config,
        sweep_variable,
        sweep_values,
        policies: policies.to_vec(),
        trials: DEFAULT_TRIALS,
        master_seed: DEFAULT_MASTER_SEED,
        exhaustive_cap: ExhaustiveCap::default(),
        record_wall_time: false,
    }
}

const HEURISTICS: [Policy; 4] = [Policy::MinGroup, Policy::PerResource, Policy::Joint, Policy::LocalOnly];

/// Sweeps over the number of users with `N = 4`, `r = 0.2 km` and a 600 MHz
/// cloudlet. The exhaustive baselines only run on the small-M half.
fn users_sweep(prefix: &str) -> Vec<ExperimentSpec> {
    let base = ScenarioConfig {
        num_subcarriers: 4,
        cell_radius_km: 0.2,
        cloudlet_freq_hz: 600e6,
        ..ScenarioConfig::default()
    };
    vec![
        spec(
            &format!("{prefix}_small"),
            base.clone(),
            SweepVariable::NumUsers,
            vec![1.0, 2.0, 3.0, 4.0],
            &Policy::ALL,
        ),
        spec(
            &format!("{prefix}_large"),
            base,
            SweepVariable::NumUsers,
            vec![5.0, 6.0, 7.0, 8.0],
            &HEURISTICS,
        ),
    ]
}

/// The four figure reproductions: energy and offload count versus users,
/// saving versus cell radius, and saving versus cloudlet frequency for 3 and
/// 7 users.
pub fn figure_presets() -> Vec<Preset> {
    let fig4_base = ScenarioConfig {
        num_users: 4,
        num_subcarriers: 4,
        cloudlet_freq_hz: 600e6,
        ..ScenarioConfig::default()
    };
    let freqs: Vec<f64> = (1..=6).map(|k| k as f64 * 200e6).collect();
    let fig5 = |m: usize, policies: &[Policy]| {
        spec(
            &format!("fig5_m{m}"),
            ScenarioConfig {
                num_users: m,
                num_subcarriers: 3,
                ..ScenarioConfig::default()
            },
            SweepVariable::CloudletFreqHz,
            freqs.clone(),
            policies,
        )
    };
    vec![
        Preset {
            name: "fig2",
            specs: users_sweep("fig2"),
        },
        Preset {
            name: "fig3",
            specs: users_sweep("fig3"),
        },
        Preset {
            name: "fig4",
            specs: vec![spec(
                "fig4",
                fig4_base,
                SweepVariable::CellRadiusKm,
                vec![0.1, 0.2, 0.3, 0.4],
                &Policy::ALL,
            )],
        },
        Preset {
            name: "fig5",
            specs: vec![fig5(3, &Policy::ALL), fig5(7, &HEURISTICS)],
        },
    ]
}

pub fn preset(name: &str) -> Option<Preset> {
    figure_presets().into_iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig2_settings() {
        let p = preset("fig2").unwrap();
        for s in &p.specs {
            assert_eq!(s.sweep_variable, SweepVariable::NumUsers);
            assert_eq!(s.base_config.num_subcarriers, 4);
            assert_eq!(s.base_config.cell_radius_km, 0.2);
            assert_eq!(s.base_config.cloudlet_freq_hz, 6e8);
            s.validate().unwrap();
        }
    }

    #[test]
    fn fig4_settings() {
        let p = preset("fig4").unwrap();
        let s = &p.specs[0];
        assert_eq!(s.sweep_variable, SweepVariable::CellRadiusKm);
        assert_eq!((s.base_config.num_users, s.base_config.num_subcarriers), (4, 4));
        s.validate().unwrap();
    }

    #[test]
    fn fig5_settings() {
        let p = preset("fig5").unwrap();
        let users: Vec<usize> = p.specs.iter().map(|s| s.base_config.num_users).collect();
        assert_eq!(users, vec![3, 7]);
        for s in &p.specs {
            assert_eq!(s.sweep_variable, SweepVariable::CloudletFreqHz);
            assert_eq!(s.base_config.num_subcarriers, 3);
            s.validate().unwrap();
        }
        assert!(!p.specs[1].policies.iter().any(|p| p.is_exhaustive()));
    }

    #[test]
    fn four_presets() {
        let names: Vec<&str> = figure_presets().iter().map(|p| p.name).collect();
        assert_eq!(names, ["fig2", "fig3", "fig4", "fig5"]);
        assert!(preset("fig9").is_none());
    }
}
