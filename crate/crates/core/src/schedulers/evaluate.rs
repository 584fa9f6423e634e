use super::{Assignment, CpuModel, ScheduleOutcome, UserTerms, Violation};
use crate::error::{Error, Result};
use crate::phy::{aggregate_rate, meets_deadline};
use crate::scenario::Scenario;

const POWER_SLACK_W: f64 = 1e-9;

/// Recomputes every energy and time of `assignment` from the scenario and
/// lists the constraints it breaks.
pub fn evaluate(assignment: &Assignment, scenario: &Scenario, cpu: CpuModel) -> Result<ScheduleOutcome> {
    scenario.validate()?;
    let m = scenario.num_users();
    let n = scenario.num_subcarriers();
    let shape_ok = |rows: &[usize]| rows.len() == m && rows.iter().all(|&c| c == n);
    let sub_rows: Vec<usize> = assignment.subcarrier_map.iter().map(Vec::len).collect();
    let pow_rows: Vec<usize> = assignment.power_map.iter().map(Vec::len).collect();
    if !shape_ok(&sub_rows)
        || !shape_ok(&pow_rows)
        || assignment.offload_flags.len() != m
        || assignment.exec_order.len() != m
    {
        return Err(Error::domain(format!("assignment does not match a {m}x{n} scenario")));
    }

    let terms = UserTerms::new(scenario);
    let mut violations = Vec::new();

    for j in 0..n {
        if (0..m).filter(|&i| assignment.subcarrier_map[i][j]).count() > 1 {
            violations.push(Violation::SubcarrierShared { subcarrier: j });
        }
    }

    let mut ranked: Vec<(usize, usize)> = Vec::new();
    for i in 0..m {
        match (assignment.offload_flags[i], assignment.exec_order[i]) {
            (true, Some(rank)) => ranked.push((rank, i)),
            (false, None) => {}
            _ => violations.push(Violation::RankMismatch { user: i }),
        }
    }
    ranked.sort_unstable();
    for w in ranked.windows(2) {
        if w[0].0 == w[1].0 {
            violations.push(Violation::DuplicateRank { rank: w[0].0 });
        }
    }

    for i in 0..m {
        let mut total = 0.0;
        for j in 0..n {
            let p = assignment.power_map[i][j];
            if !(p >= 0.0) || (p > 0.0 && !assignment.subcarrier_map[i][j]) {
                violations.push(Violation::InvalidPower { user: i, subcarrier: j });
            }
            if assignment.subcarrier_map[i][j] && p > 0.0 {
                total += p;
            }
        }
        if total > scenario.devices[i].max_tx_power_w + POWER_SLACK_W {
            violations.push(Violation::PowerBudget { user: i, total_w: total });
        }
    }

    let mut energy = terms.local_energy.clone();
    let mut tx_time = vec![0.0; m];
    for i in (0..m).filter(|&i| assignment.offload_flags[i]) {
        let group = assignment.group(i);
        let gains = group.gains_from(scenario.channel.row(i));
        let powers: Vec<f64> = group.indices().iter().map(|&j| assignment.power_map[i][j].max(0.0)).collect();
        let total_power: f64 = powers.iter().sum();
        let rate = if group.is_empty() {
            0.0
        } else {
            aggregate_rate(&powers, &gains, scenario.subcarrier_bandwidth_hz)?
        };
        let job = &scenario.jobs[i];
        if rate <= 0.0 && job.data_size_bits > 0.0 {
            violations.push(Violation::ZeroRate { user: i });
            tx_time[i] = f64::INFINITY;
            energy[i] = f64::INFINITY;
            continue;
        }
        tx_time[i] = if job.data_size_bits == 0.0 { 0.0 } else { job.data_size_bits / rate };
        energy[i] = (total_power + scenario.devices[i].circuit_power_w) * tx_time[i];
    }

    let mut completion = vec![None; m];
    let mut additive = vec![None; m];
    let mut busy = 0.0f64;
    let mut queue = 0.0;
    for &(_, i) in &ranked {
        let t_c = terms.exec_time[i];
        additive[i] = Some(tx_time[i] + queue + t_c);
        queue += t_c;
        let done = match cpu {
            CpuModel::Shared => {
                busy = tx_time[i].max(busy) + t_c;
                busy
            }
            CpuModel::Unlimited => tx_time[i],
        };
        completion[i] = Some(done);
    }
    for i in (0..m).filter(|&i| assignment.offload_flags[i]) {
        let done = completion[i].unwrap_or(tx_time[i]);
        if !meets_deadline(done, scenario.jobs[i].deadline_s) {
            violations.push(Violation::Deadline { user: i, completion_s: done });
        }
    }

    let total_energy_j: f64 = energy.iter().sum();
    let total_local: f64 = terms.local_energy.iter().sum();
    Ok(ScheduleOutcome {
        total_saving_j: total_local - total_energy_j,
        total_energy_j,
        per_user_energy_j: energy,
        local_energy_j: terms.local_energy,
        per_user_completion_s: completion,
        additive_completion_s: additive,
        offload_count: assignment.offload_count(),
        feasible: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::local_energy;
    use crate::scenario::{ChannelMatrix, Device, EnergyModel, Job};

    fn scenario() -> Scenario {
        Scenario {
            jobs: vec![Job::new(1000.0, 0.1).unwrap(), Job::new(1000.0, 0.05).unwrap()],
            devices: vec![
                Device {
                    max_local_freq_hz: 4e8,
                    max_tx_power_w: 1.0,
                    circuit_power_w: 0.05,
                };
                2
            ],
            channel: ChannelMatrix::from_rows(&[vec![100.0, 50.0], vec![80.0, 20.0]]).unwrap(),
            energy_model: EnergyModel::new(1e-24, 18_000.0).unwrap(),
            cloudlet_freq_hz: 6e8,
            subcarrier_bandwidth_hz: 18_750.0,
        }
    }

    #[test]
    fn all_local_scores_local_energy() {
        let s = scenario();
        let out = evaluate(&Assignment::all_local(2, 2), &s, CpuModel::Shared).unwrap();
        let expected: f64 = s.jobs.iter().map(|j| local_energy(j, &s.energy_model)).sum();
        assert!((out.total_energy_j - expected).abs() < 1e-12);
        assert!(out.feasible && out.violations.is_empty());
        assert_eq!(out.offload_count, 0);
        assert_eq!(out.total_saving_j, 0.0);
    }

    #[test]
    fn shared_subcarrier_is_reported() {
        let s = scenario();
        let mut a = Assignment::all_local(2, 2);
        a.subcarrier_map[0][1] = true;
        a.subcarrier_map[1][1] = true;
        let out = evaluate(&a, &s, CpuModel::Shared).unwrap();
        assert!(!out.feasible);
        assert_eq!(out.violations, vec![Violation::SubcarrierShared { subcarrier: 1 }]);
        assert_eq!(out.violations[0].code(), "subcarrier-exclusive");
    }

    #[test]
    fn queue_pushes_second_job_past_deadline() {
        let s = scenario();
        let mut a = Assignment::all_local(2, 2);
        for (i, rank) in [(0, 1), (1, 2)] {
            a.subcarrier_map[i][i] = true;
            a.power_map[i][i] = 0.5;
            a.offload_flags[i] = true;
            a.exec_order[i] = Some(rank);
        }
        let shared = evaluate(&a, &s, CpuModel::Shared).unwrap();
        // User 1 waits for user 0's 30 ms of execution, then runs 30 ms more.
        assert!(matches!(shared.violations[..], [Violation::Deadline { user: 1, .. }]));
        let unlimited = evaluate(&a, &s, CpuModel::Unlimited).unwrap();
        assert!(unlimited.feasible);
        assert!(unlimited.total_saving_j > 0.0);
        let add = shared.additive_completion_s[1].unwrap();
        assert!(add >= shared.per_user_completion_s[1].unwrap() - 1e-15);
    }

    #[test]
    fn rank_and_power_violations() {
        let s = scenario();
        let mut a = Assignment::all_local(2, 2);
        a.offload_flags[0] = true;
        a.power_map[1][0] = 2.0;
        a.exec_order[1] = Some(1);
        let out = evaluate(&a, &s, CpuModel::Shared).unwrap();
        let codes: Vec<&str> = out.violations.iter().map(Violation::code).collect();
        assert!(codes.contains(&"order-domain"));
        assert!(codes.contains(&"power-placement"));
        assert!(codes.contains(&"zero-rate"));

        let mut b = Assignment::all_local(2, 2);
        b.subcarrier_map[0] = vec![true, true];
        b.power_map[0] = vec![0.8, 0.8];
        b.offload_flags = vec![true, true];
        b.exec_order = vec![Some(1), Some(1)];
        let out = evaluate(&b, &s, CpuModel::Unlimited).unwrap();
        let codes: Vec<&str> = out.violations.iter().map(Violation::code).collect();
        assert!(codes.contains(&"power-budget"));
        assert!(codes.contains(&"distinct-order"));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let s = scenario();
        assert!(evaluate(&Assignment::all_local(3, 2), &s, CpuModel::Shared).is_err());
        assert!(evaluate(&Assignment::all_local(2, 1), &s, CpuModel::Shared).is_err());
    }
}
