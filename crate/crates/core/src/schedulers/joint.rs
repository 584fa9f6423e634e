use super::min_group::minimum_group;
use super::{argmax_first, check_scenario, finish, plan_for, Assignment, CpuModel, Decision, ScheduleOutcome, UserTerms};
use crate::error::Result;
use crate::phy::{meets_deadline, TransmissionPlan};
use crate::scenario::Scenario;

/// Allocates subcarriers and cloudlet CPU time together.
///
/// Each round finds every waiting user's minimum group against the current
/// CPU busy-until time and admits the one with the highest saving per second
/// of CPU time. Leftover subcarriers then go to the admitted user whose
/// energy drops most, as long as the committed timeline still meets every
/// deadline.
pub fn joint_allocate(scenario: &Scenario) -> Result<(Assignment, ScheduleOutcome)> {
    check_scenario(scenario)?;
    let terms = UserTerms::new(scenario);
    let m = scenario.num_users();
    let mut decision = Decision::empty(m);
    let mut waiting = vec![true; m];
    let mut available: Vec<usize> = (0..scenario.num_subcarriers()).collect();
    let mut busy_until = 0.0f64;

    while waiting.iter().any(|&w| w) && !available.is_empty() {
        let mut found: Vec<Option<TransmissionPlan>> = vec![None; m];
        for i in (0..m).filter(|&i| waiting[i]) {
            found[i] = minimum_group(scenario, &terms, i, &available, busy_until, CpuModel::Shared)?;
        }
        let pick = argmax_first(found.iter().enumerate().filter_map(|(i, p)| {
            p.as_ref()
                .map(|p| (i, (terms.local_energy[i] - p.tx_energy_j) / terms.exec_time[i]))
        }));
        let Some(chosen) = pick else { break };
        let plan = found[chosen].take().expect("picked user has a plan");
        available.retain(|j| !plan.group.contains(*j));
        waiting[chosen] = false;
        busy_until = plan.tx_time_s.max(busy_until) + terms.exec_time[chosen];
        decision.offloaded[chosen] = true;
        decision.order.push(chosen);
        decision.plans[chosen] = Some(plan);
    }

    for j in available {
        let mut best: Option<(usize, f64, TransmissionPlan)> = None;
        for i in (0..m).filter(|&i| decision.offloaded[i]) {
            let current = decision.plans[i].as_ref().expect("admitted users hold a plan");
            let Some(next) = plan_for(scenario, &terms, i, &current.group.with(j), CpuModel::Shared)? else {
                continue;
            };
            if !timeline_holds(scenario, &terms, &decision, i, next.tx_time_s) {
                continue;
            }
            let drop = current.tx_energy_j - next.tx_energy_j;
            if best.as_ref().is_none_or(|(_, d, _)| drop > *d) {
                best = Some((i, drop, next));
            }
        }
        if let Some((i, _, plan)) = best {
            decision.plans[i] = Some(plan);
        }
    }
    finish(decision, scenario, CpuModel::Shared)
}

/// Replays the committed execution order with `user`'s upload time replaced.
fn timeline_holds(scenario: &Scenario, terms: &UserTerms, decision: &Decision, user: usize, tx_time_s: f64) -> bool {
    let mut busy = 0.0f64;
    decision.order.iter().all(|&i| {
        let tx = if i == user {
            tx_time_s
        } else {
            decision.plans[i].as_ref().map_or(0.0, |p| p.tx_time_s)
        };
        busy = tx.max(busy) + terms.exec_time[i];
        meets_deadline(busy, scenario.jobs[i].deadline_s)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Job;
    use crate::schedulers::test_support::hand_scenario;
    use crate::schedulers::{min_group_allocate, per_resource_allocate};

    #[test]
    fn single_user_matches_min_group() {
        let s = hand_scenario(vec![Job::new(1000.0, 0.1).unwrap()], &[vec![1e5, 1e3]], 6e8);
        let (a, out) = joint_allocate(&s).unwrap();
        let (b, reference) = min_group_allocate(&s).unwrap();
        assert_eq!(a.subcarrier_map, b.subcarrier_map);
        assert_eq!(a.offload_flags, b.offload_flags);
        assert!(out.feasible);
        assert!((out.total_saving_j - reference.total_saving_j).abs() < 1e-12);
    }

    #[test]
    fn stringent_deadlines_free_subcarriers_for_others() {
        let s = hand_scenario(
            vec![Job::new(1000.0, 0.05).unwrap(), Job::new(1050.0, 0.05).unwrap(), Job::new(1000.0, 0.15).unwrap()],
            &[vec![1e6, 1.0], vec![1.0, 1e6], vec![1e6, 1e6]],
            6e8,
        );
        let (ja, joint) = joint_allocate(&s).unwrap();
        let (_, per) = per_resource_allocate(&s).unwrap();
        assert!(joint.feasible, "{:?}", joint.violations);
        assert!(ja.subcarrier_map[0].iter().all(|&w| !w), "user 0 never gets a subcarrier");
        assert_eq!(ja.offload_flags, vec![false, true, true]);
        assert_eq!(ja.exec_order, vec![None, Some(1), Some(2)]);
        assert!(joint.total_saving_j > per.total_saving_j);
    }

    #[test]
    fn busy_until_never_decreases() {
        let s = hand_scenario(
            vec![
                Job::new(900.0, 0.15).unwrap(),
                Job::new(1100.0, 0.12).unwrap(),
                Job::new(1000.0, 0.06).unwrap(),
            ],
            &[vec![1e6, 2e6, 3e6], vec![3e6, 1e6, 2e6], vec![2e6, 3e6, 1e6]],
            6e8,
        );
        let (a, out) = joint_allocate(&s).unwrap();
        assert!(out.feasible);
        let mut ranked: Vec<(usize, f64)> = (0..3)
            .filter_map(|i| a.exec_order[i].map(|r| (r, out.per_user_completion_s[i].unwrap())))
            .collect();
        ranked.sort_by_key(|&(r, _)| r);
        assert!(ranked.windows(2).all(|w| w[0].1 <= w[1].1));
    }
}
