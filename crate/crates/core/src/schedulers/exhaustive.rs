use super::dp::{dp_cpu_schedule, DpCandidate};
use super::{check_scenario, finish, plan_for, Assignment, CpuModel, Decision, ScheduleOutcome, UserTerms};
use crate::error::{Error, Result};
use crate::phy::{SubcarrierGroup, TransmissionPlan};
use crate::scenario::Scenario;

/// Default cap on the number of subcarrier maps enumerated.
pub const DEFAULT_MAX_MAPS: u128 = 1 << 24;

/// Optimal allocation by enumerating every subcarrier map.
///
/// Each subcarrier goes to one of the users or stays unassigned, giving
/// `(M + 1)^N` maps. Every user's plan over its group is the energy-minimal
/// one; with [`CpuModel::Unlimited`] all beneficial users offload, with
/// [`CpuModel::Shared`] the dynamic program picks the accepted set and order.
pub fn exhaustive_optimal(scenario: &Scenario, cpu: CpuModel) -> Result<(Assignment, ScheduleOutcome)> {
    exhaustive_optimal_with_budget(scenario, cpu, DEFAULT_MAX_MAPS)
}

pub fn exhaustive_optimal_with_budget(
    scenario: &Scenario,
    cpu: CpuModel,
    max_maps: u128,
) -> Result<(Assignment, ScheduleOutcome)> {
    check_scenario(scenario)?;
    let m = scenario.num_users();
    let n = scenario.num_subcarriers();
    let maps = (m as u128 + 1).checked_pow(n as u32).unwrap_or(u128::MAX);
    if maps > max_maps {
        return Err(Error::SearchBudget { maps, budget: max_maps });
    }

    let terms = UserTerms::new(scenario);
    // Plans and savings for every (user, group mask) pair.
    let mut plans: Vec<Vec<Option<TransmissionPlan>>> = Vec::with_capacity(m);
    let mut savings: Vec<Vec<f64>> = Vec::with_capacity(m);
    for user in 0..m {
        let mut user_plans = vec![None; 1 << n];
        let mut user_savings = vec![0.0; 1 << n];
        for mask in 1u64..(1 << n) {
            let plan = plan_for(scenario, &terms, user, &SubcarrierGroup::from_mask(mask), cpu)?;
            if let Some(plan) = plan.filter(|p| p.tx_energy_j < terms.local_energy[user]) {
                user_savings[mask as usize] = terms.local_energy[user] - plan.tx_energy_j;
                user_plans[mask as usize] = Some(plan);
            }
        }
        plans.push(user_plans);
        savings.push(user_savings);
    }

    let mut digits = vec![0usize; n];
    let mut masks = vec![0usize; m];
    let mut best_saving = f64::NEG_INFINITY;
    let mut best: Option<(Vec<usize>, Vec<usize>)> = None;
    loop {
        masks.iter_mut().for_each(|k| *k = 0);
        for (j, &d) in digits.iter().enumerate() {
            if d > 0 {
                masks[d - 1] |= 1 << j;
            }
        }
        let beneficial: Vec<usize> = (0..m).filter(|&u| savings[u][masks[u]] > 0.0).collect();
        let (saving, order) = match cpu {
            CpuModel::Unlimited => (beneficial.iter().map(|&u| savings[u][masks[u]]).sum(), beneficial),
            CpuModel::Shared => {
                let candidates: Vec<DpCandidate> = beneficial
                    .iter()
                    .map(|&u| {
                        let plan = plans[u][masks[u]].as_ref().expect("beneficial users hold a plan");
                        DpCandidate {
                            saving_j: savings[u][masks[u]],
                            tx_time_s: plan.tx_time_s,
                            exec_time_s: terms.exec_time[u],
                            deadline_s: scenario.jobs[u].deadline_s,
                        }
                    })
                    .collect();
                let schedule = dp_cpu_schedule(&candidates)?;
                let order = schedule.order.iter().map(|&k| beneficial[k]).collect();
                (schedule.total_saving_j, order)
            }
        };
        if saving > best_saving {
            best_saving = saving;
            best = Some((masks.clone(), order));
        }

        // Next map in base (M + 1).
        let mut j = 0;
        while j < n {
            digits[j] += 1;
            if digits[j] <= m {
                break;
            }
            digits[j] = 0;
            j += 1;
        }
        if j == n {
            break;
        }
    }

    let (masks, order) = best.expect("at least the empty map is enumerated");
    let mut decision = Decision::empty(m);
    for &u in &order {
        decision.plans[u] = plans[u][masks[u]].clone();
        decision.offloaded[u] = true;
    }
    decision.order = order;
    finish(decision, scenario, cpu)
}
