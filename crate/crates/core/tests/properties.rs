use mec_core::schedulers::dp_table;
use mec_core::{
    aggregate_rate, energy_optimal_power, exhaustive_optimal, generate_scenario, local_energy, optimal_transmit_power,
    threshold_power, water_fill, CpuModel, DpCandidate, LinkBudget, Policy, Scenario, ScenarioConfig, SubcarrierGroup,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scenario(users: usize, subcarriers: usize, seed: u64) -> Scenario {
    let config = ScenarioConfig {
        num_users: users,
        num_subcarriers: subcarriers,
        rng_seed: seed,
        ..ScenarioConfig::default()
    };
    generate_scenario(&config, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn gains() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-1.0f64..3.0).prop_map(|e| 10f64.powf(e)), 1..6)
}

fn link() -> impl Strategy<Value = LinkBudget> {
    (900.0f64..1100.0, 0.01f64..0.15, 0.01f64..0.1).prop_map(|(data_bits, deadline_s, circuit_power_w)| LinkBudget {
        bandwidth_hz: 18_750.0,
        data_bits,
        deadline_s,
        max_power_w: 1.0,
        circuit_power_w,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn water_fill_spends_budget_and_rate_grows(g in gains(), p in 0.001f64..1.0, extra in 0.0f64..1.0) {
        let low = water_fill(&g, p).unwrap();
        let high = water_fill(&g, p + extra).unwrap();
        prop_assert!((low.total_w() - p).abs() <= 1e-12 * p.max(1.0));
        prop_assert!(low.per_subcarrier_w.iter().all(|&x| x >= 0.0));
        let r_low = aggregate_rate(&low.per_subcarrier_w, &g, 1.0).unwrap();
        let r_high = aggregate_rate(&high.per_subcarrier_w, &g, 1.0).unwrap();
        prop_assert!(r_high >= r_low * (1.0 - 1e-12));
    }

    #[test]
    fn more_subcarriers_never_lower_the_rate(g in gains(), extra in 0.1f64..1000.0, p in 0.001f64..1.0) {
        let mut wider = g.clone();
        wider.push(extra);
        let narrow = aggregate_rate(&water_fill(&g, p).unwrap().per_subcarrier_w, &g, 1.0).unwrap();
        let wide = aggregate_rate(&water_fill(&wider, p).unwrap().per_subcarrier_w, &wider, 1.0).unwrap();
        prop_assert!(wide >= narrow * (1.0 - 1e-12));
    }

    #[test]
    fn transmit_power_is_larger_of_optimum_and_threshold(g in gains(), link in link()) {
        let group = SubcarrierGroup::new((0..g.len()).collect()).unwrap();
        match optimal_transmit_power(group, &g, &link).unwrap() {
            Some(plan) => {
                let p_t = threshold_power(&g, &link).unwrap().unwrap();
                let p_star = energy_optimal_power(&g, &link).unwrap();
                prop_assert_eq!(plan.total_power_w, p_star.max(p_t));
                prop_assert!(plan.tx_time_s <= link.deadline_s * (1.0 + 1e-9));
                prop_assert!((plan.tx_time_s - link.data_bits / plan.rate_bps).abs() <= 1e-15);
                let energy = (plan.total_power_w + link.circuit_power_w) * plan.tx_time_s;
                prop_assert!((plan.tx_energy_j - energy).abs() <= 1e-15);
            }
            None => prop_assert!(threshold_power(&g, &link).unwrap().is_none()),
        }
    }

    #[test]
    fn dp_table_is_monotone_under_inclusion(
        raw in prop::collection::vec((0.01f64..1.0, 0.0f64..0.05, 0.01f64..0.05, 0.03f64..0.2), 0..8)
    ) {
        let candidates: Vec<DpCandidate> = raw
            .into_iter()
            .map(|(saving_j, tx_time_s, exec_time_s, deadline_s)| DpCandidate { saving_j, tx_time_s, exec_time_s, deadline_s })
            .collect();
        let table = dp_table(&candidates).unwrap();
        prop_assert_eq!((table.saving(0), table.time(0)), (0.0, 0.0));
        for mask in 0..(1usize << candidates.len()) {
            for i in 0..candidates.len() {
                prop_assert!(table.saving(mask | 1 << i) >= table.saving(mask));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn policies_are_feasible_and_ranked(seed in any::<u64>(), users in 1usize..=4, subcarriers in 1usize..=4) {
        let s = scenario(users, subcarriers, seed);
        let local: f64 = s.jobs.iter().map(|j| local_energy(j, &s.energy_model)).sum();
        for policy in Policy::ALL {
            let (a, out) = policy.run(&s).unwrap();
            prop_assert!(out.feasible, "{} {:?}", policy, out.violations);
            prop_assert!(out.total_saving_j >= 0.0);
            prop_assert!((out.total_energy_j + out.total_saving_j - local).abs() <= 1e-9 * local);
            let mut ranks: Vec<usize> = a.exec_order.iter().flatten().copied().collect();
            ranks.sort_unstable();
            prop_assert_eq!(ranks, (1..=out.offload_count).collect::<Vec<_>>());
            for i in (0..users).filter(|&i| a.offload_flags[i]) {
                prop_assert!(out.per_user_energy_j[i] < out.local_energy_j[i]);
            }
            if policy == Policy::LocalOnly {
                prop_assert_eq!(out.total_saving_j, 0.0);
            }
            // Same scenario, same answer.
            prop_assert_eq!(policy.run(&s).unwrap().0, a);
        }
    }

    #[test]
    fn optima_dominate(seed in any::<u64>(), users in 1usize..=3, subcarriers in 1usize..=3) {
        let s = scenario(users, subcarriers, seed);
        let opt1 = exhaustive_optimal(&s, CpuModel::Unlimited).unwrap().1.total_saving_j;
        let opt2 = exhaustive_optimal(&s, CpuModel::Shared).unwrap().1.total_saving_j;
        prop_assert!(opt1 >= opt2 - 1e-12);
        for policy in [Policy::PerResource, Policy::Joint] {
            prop_assert!(opt2 >= policy.run(&s).unwrap().1.total_saving_j - 1e-12);
        }
        prop_assert!(opt1 >= Policy::MinGroup.run(&s).unwrap().1.total_saving_j - 1e-12);
    }

    #[test]
    fn extra_subcarrier_never_lowers_the_optimum(seed in any::<u64>(), users in 1usize..=3) {
        let s = scenario(users, 4, seed);
        let fewer = s.restrict_subcarriers(&[0, 1, 2]).unwrap();
        for cpu in [CpuModel::Unlimited, CpuModel::Shared] {
            let all = exhaustive_optimal(&s, cpu).unwrap().1.total_saving_j;
            let some = exhaustive_optimal(&fewer, cpu).unwrap().1.total_saving_j;
            prop_assert!(all >= some - 1e-12);
        }
    }
}
