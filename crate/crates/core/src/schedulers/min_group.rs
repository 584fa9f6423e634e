use super::{
    argmax_first, check_scenario, finish, plan_for, Assignment, CpuModel, Decision, ScheduleOutcome, UserTerms,
};
use crate::error::{Error, Result};
use crate::phy::{meets_deadline, SubcarrierGroup, TransmissionPlan};
use crate::scenario::Scenario;

use super::dp::{dp_cpu_schedule, DpCandidate};

/// Smallest group of the `available` subcarriers under which offloading
/// saves energy and meets the deadline.
///
/// Subcarriers are added in descending gain order for this user, so the
/// result is the shortest qualifying prefix of that ranking. With
/// `include_exec_time` the upload is planned to leave room for remote
/// execution and the test is `max(T_t, busy_until) + T_c <= T`; otherwise it
/// is `T_t <= T`. Returns `None` when no prefix qualifies.
pub fn find_minimum_group(
    scenario: &Scenario,
    user: usize,
    available: &[usize],
    busy_until_s: f64,
    include_exec_time: bool,
) -> Result<Option<TransmissionPlan>> {
    check_scenario(scenario)?;
    if user >= scenario.num_users() {
        return Err(Error::domain(format!("user {user} out of range")));
    }
    if let Some(j) = available.iter().find(|&&j| j >= scenario.num_subcarriers()) {
        return Err(Error::domain(format!("subcarrier {j} out of range")));
    }
    let terms = UserTerms::new(scenario);
    let cpu = if include_exec_time {
        CpuModel::Shared
    } else {
        CpuModel::Unlimited
    };
    minimum_group(scenario, &terms, user, available, busy_until_s, cpu)
}

pub(crate) fn minimum_group(
    scenario: &Scenario,
    terms: &UserTerms,
    user: usize,
    available: &[usize],
    busy_until_s: f64,
    cpu: CpuModel,
) -> Result<Option<TransmissionPlan>> {
    let deadline = scenario.jobs[user].deadline_s;
    let exec = terms.exec_time[user];
    if cpu == CpuModel::Shared && !meets_deadline(busy_until_s + exec, deadline) {
        return Ok(None);
    }
    let row = scenario.channel.row(user);
    let mut ranked = available.to_vec();
    ranked.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));

    let mut group = SubcarrierGroup::default();
    for &j in &ranked {
        group = group.with(j);
        let Some(plan) = plan_for(scenario, terms, user, &group, cpu)? else {
            continue;
        };
        let on_time = match cpu {
            CpuModel::Unlimited => meets_deadline(plan.tx_time_s, deadline),
            CpuModel::Shared => meets_deadline(plan.tx_time_s.max(busy_until_s) + exec, deadline),
        };
        if on_time && plan.tx_energy_j < terms.local_energy[user] {
            return Ok(Some(plan));
        }
    }
    Ok(None)
}

/// Greedy minimum-group offloading followed by leftover-subcarrier
/// distribution, ignoring the cloudlet CPU queue. Execution ranks follow the
/// order in which users were admitted.
pub fn min_group_allocate(scenario: &Scenario) -> Result<(Assignment, ScheduleOutcome)> {
    check_scenario(scenario)?;
    let terms = UserTerms::new(scenario);
    let decision = greedy_groups(scenario, &terms, CpuModel::Unlimited)?;
    finish(decision, scenario, CpuModel::Unlimited)
}

/// Two-stage baseline: subcarriers first (minimum groups sized with the
/// remote execution time but no queue), then the CPU order by dynamic
/// programming. Users the dynamic program rejects run locally and their
/// subcarriers stay assigned but unused.
pub fn per_resource_allocate(scenario: &Scenario) -> Result<(Assignment, ScheduleOutcome)> {
    check_scenario(scenario)?;
    let terms = UserTerms::new(scenario);
    let mut decision = greedy_groups(scenario, &terms, CpuModel::Shared)?;

    let users: Vec<usize> = (0..scenario.num_users()).filter(|&i| decision.offloaded[i]).collect();
    let candidates: Vec<DpCandidate> = users
        .iter()
        .map(|&i| {
            let plan = decision.plans[i].as_ref().expect("offloaded users hold a plan");
            DpCandidate {
                saving_j: terms.local_energy[i] - plan.tx_energy_j,
                tx_time_s: plan.tx_time_s,
                exec_time_s: terms.exec_time[i],
                deadline_s: scenario.jobs[i].deadline_s,
            }
        })
        .collect();
    let schedule = dp_cpu_schedule(&candidates)?;

    decision.offloaded = vec![false; scenario.num_users()];
    decision.order = schedule.order.iter().map(|&k| users[k]).collect();
    for &i in &decision.order {
        decision.offloaded[i] = true;
    }
    finish(decision, scenario, CpuModel::Shared)
}

fn greedy_groups(scenario: &Scenario, terms: &UserTerms, cpu: CpuModel) -> Result<Decision> {
    let m = scenario.num_users();
    let mut decision = Decision::empty(m);
    let mut waiting = vec![true; m];
    let mut available: Vec<usize> = (0..scenario.num_subcarriers()).collect();

    while waiting.iter().any(|&w| w) && !available.is_empty() {
        let mut found: Vec<Option<TransmissionPlan>> = vec![None; m];
        for i in (0..m).filter(|&i| waiting[i]) {
            found[i] = minimum_group(scenario, terms, i, &available, 0.0, cpu)?;
        }
        let pick = argmax_first(
            found
                .iter()
                .enumerate()
                .filter_map(|(i, p)| p.as_ref().map(|p| (i, terms.local_energy[i] - p.tx_energy_j))),
        );
        let Some(m_star) = pick else { break };
        let plan = found[m_star].take().expect("picked user has a plan");
        available.retain(|j| !plan.group.contains(*j));
        waiting[m_star] = false;
        decision.offloaded[m_star] = true;
        decision.order.push(m_star);
        decision.plans[m_star] = Some(plan);
    }

    // Each leftover subcarrier goes to the admitted user it helps most.
    for j in available {
        let mut best: Option<(usize, f64, TransmissionPlan)> = None;
        for i in (0..m).filter(|&i| decision.offloaded[i]) {
            let current = decision.plans[i].as_ref().expect("admitted users hold a plan");
            let Some(next) = plan_for(scenario, terms, i, &current.group.with(j), cpu)? else {
                continue;
            };
            let drop = current.tx_energy_j - next.tx_energy_j;
            if best.as_ref().is_none_or(|(_, d, _)| drop > *d) {
                best = Some((i, drop, next));
            }
        }
        if let Some((i, _, plan)) = best {
            decision.plans[i] = Some(plan);
        }
    }
    Ok(decision)
}
