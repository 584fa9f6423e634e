//! Allocation policies and the constraint checker that scores them.
//!
//! Every policy returns an [`Assignment`] together with the
//! [`ScheduleOutcome`] produced by [`evaluate`], so all results are scored by
//! the same code path.
//!
//! The cloudlet timeline is the overlapping one used by the schedulers: a job
//! becomes ready once its upload finishes *and* the CPU is free, i.e. it
//! completes at `max(T_t, busy_until) + T_c`. The purely additive
//! `T_t + queue + T_c` figure is reported as a diagnostic only.

mod dp;
mod evaluate;
mod exhaustive;
mod joint;
mod min_group;

use std::fmt;

pub use dp::{dp_cpu_schedule, dp_cpu_schedule_with_cap, dp_table, DpCandidate, DpSchedule, DpTable, DEFAULT_DP_CAP};
pub use evaluate::evaluate;
pub use exhaustive::{exhaustive_optimal, exhaustive_optimal_with_budget, DEFAULT_MAX_MAPS};
pub use joint::joint_allocate;
pub use min_group::{find_minimum_group, min_group_allocate, per_resource_allocate};

use crate::error::{Error, Result};
use crate::phy::{local_energy, optimal_transmit_power, remote_exec_time, LinkBudget, SubcarrierGroup, TransmissionPlan};
use crate::scenario::Scenario;

/// Whether the cloudlet CPU is a shared, non-preemptive resource or is
/// treated as having unlimited capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CpuModel {
    /// Only the upload deadline `T_t <= T` matters.
    Unlimited,
    /// Jobs run one at a time in rank order and must finish by their deadline.
    Shared,
}

/// The decision tuple: subcarrier map, power map, offload flags and
/// execution ranks.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `subcarrier_map[user][subcarrier]`
    pub subcarrier_map: Vec<Vec<bool>>,
    /// `power_map[user][subcarrier]`, watts.
    pub power_map: Vec<Vec<f64>>,
    pub offload_flags: Vec<bool>,
    /// 1-based execution rank of each offloaded user.
    pub exec_order: Vec<Option<usize>>,
}

impl Assignment {
    pub fn all_local(users: usize, subcarriers: usize) -> Self {
        Assignment {
            subcarrier_map: vec![vec![false; subcarriers]; users],
            power_map: vec![vec![0.0; subcarriers]; users],
            offload_flags: vec![false; users],
            exec_order: vec![None; users],
        }
    }

    pub fn num_users(&self) -> usize {
        self.offload_flags.len()
    }

    pub fn offload_count(&self) -> usize {
        self.offload_flags.iter().filter(|&&a| a).count()
    }

    /// Subcarriers assigned to a user.
    pub fn group(&self, user: usize) -> SubcarrierGroup {
        let indices = self.subcarrier_map[user]
            .iter()
            .enumerate()
            .filter_map(|(j, &w)| w.then_some(j))
            .collect();
        SubcarrierGroup::new(indices).expect("row indices are distinct")
    }
}

/// Result of scoring an [`Assignment`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleOutcome {
    pub per_user_energy_j: Vec<f64>,
    pub local_energy_j: Vec<f64>,
    /// Remote completion time of each offloaded user.
    pub per_user_completion_s: Vec<Option<f64>>,
    /// `T_t + queue + T_c` for offloaded users; diagnostic only.
    pub additive_completion_s: Vec<Option<f64>>,
    pub total_energy_j: f64,
    pub total_saving_j: f64,
    pub offload_count: usize,
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

/// A broken constraint found by [`evaluate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    /// A subcarrier is assigned to more than one user.
    SubcarrierShared { subcarrier: usize },
    /// Two offloaded users share an execution rank.
    DuplicateRank { rank: usize },
    /// An offloaded user without a rank, or a local user with one.
    RankMismatch { user: usize },
    PowerBudget { user: usize, total_w: f64 },
    /// Negative power, or power on a subcarrier the user does not hold.
    InvalidPower { user: usize, subcarrier: usize },
    /// An offloaded user that cannot transmit at all.
    ZeroRate { user: usize },
    Deadline { user: usize, completion_s: f64 },
}

impl Violation {
    /// Stable short identifier of the violated constraint.
    pub fn code(&self) -> &'static str {
        match self {
            Violation::SubcarrierShared { .. } => "subcarrier-exclusive",
            Violation::DuplicateRank { .. } => "distinct-order",
            Violation::RankMismatch { .. } => "order-domain",
            Violation::PowerBudget { .. } => "power-budget",
            Violation::InvalidPower { .. } => "power-placement",
            Violation::ZeroRate { .. } => "zero-rate",
            Violation::Deadline { .. } => "deadline",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SubcarrierShared { subcarrier } => write!(f, "{}: subcarrier {subcarrier}", self.code()),
            Violation::DuplicateRank { rank } => write!(f, "{}: rank {rank}", self.code()),
            Violation::RankMismatch { user } => write!(f, "{}: user {user}", self.code()),
            Violation::PowerBudget { user, total_w } => write!(f, "{}: user {user} uses {total_w} W", self.code()),
            Violation::InvalidPower { user, subcarrier } => {
                write!(f, "{}: user {user} on subcarrier {subcarrier}", self.code())
            }
            Violation::ZeroRate { user } => write!(f, "{}: user {user}", self.code()),
            Violation::Deadline { user, completion_s } => {
                write!(f, "{}: user {user} completes at {completion_s} s", self.code())
            }
        }
    }
}

/// Per-user constants every policy needs.
#[derive(Debug, Clone)]
pub(crate) struct UserTerms {
    pub local_energy: Vec<f64>,
    pub exec_time: Vec<f64>,
}

impl UserTerms {
    pub fn new(scenario: &Scenario) -> Self {
        let model = &scenario.energy_model;
        UserTerms {
            local_energy: scenario.jobs.iter().map(|j| local_energy(j, model)).collect(),
            exec_time: scenario
                .jobs
                .iter()
                .map(|j| remote_exec_time(j, scenario.cloudlet_freq_hz, model))
                .collect(),
        }
    }
}

/// Energy-minimal plan for `user` over `group`. Under the shared CPU the
/// upload must also leave room for remote execution, so it is planned
/// against `T - T_c` instead of `T`.
pub(crate) fn plan_for(
    scenario: &Scenario,
    terms: &UserTerms,
    user: usize,
    group: &SubcarrierGroup,
    cpu: CpuModel,
) -> Result<Option<TransmissionPlan>> {
    let job = &scenario.jobs[user];
    let device = &scenario.devices[user];
    let deadline_s = match cpu {
        CpuModel::Unlimited => job.deadline_s,
        CpuModel::Shared => job.deadline_s - terms.exec_time[user],
    };
    if deadline_s <= 0.0 {
        return Ok(None);
    }
    let link = LinkBudget {
        bandwidth_hz: scenario.subcarrier_bandwidth_hz,
        data_bits: job.data_size_bits,
        deadline_s,
        max_power_w: device.max_tx_power_w,
        circuit_power_w: device.circuit_power_w,
    };
    let gains = group.gains_from(scenario.channel.row(user));
    optimal_transmit_power(group.clone(), &gains, &link)
}

/// Intermediate form the policies build before scoring.
#[derive(Debug, Clone)]
pub(crate) struct Decision {
    /// Subcarriers held by each user, with the plan that uses them.
    pub plans: Vec<Option<TransmissionPlan>>,
    pub offloaded: Vec<bool>,
    /// Users in execution order.
    pub order: Vec<usize>,
}

impl Decision {
    pub fn empty(users: usize) -> Self {
        Decision {
            plans: vec![None; users],
            offloaded: vec![false; users],
            order: Vec::new(),
        }
    }

    /// Users holding subcarriers without offloading keep them in the map but
    /// transmit nothing.
    pub fn into_assignment(self, subcarriers: usize) -> Assignment {
        let users = self.offloaded.len();
        let mut out = Assignment::all_local(users, subcarriers);
        for (user, plan) in self.plans.iter().enumerate() {
            let Some(plan) = plan else { continue };
            for (k, &j) in plan.group.indices().iter().enumerate() {
                out.subcarrier_map[user][j] = true;
                if self.offloaded[user] {
                    out.power_map[user][j] = plan.powers.per_subcarrier_w[k];
                }
            }
        }
        for (rank, &user) in self.order.iter().enumerate() {
            out.offload_flags[user] = true;
            out.exec_order[user] = Some(rank + 1);
        }
        out
    }
}

pub(crate) fn check_scenario(scenario: &Scenario) -> Result<()> {
    scenario.validate()?;
    if scenario.num_subcarriers() > 63 {
        return Err(Error::domain("at most 63 subcarriers are supported"));
    }
    Ok(())
}

/// Scores a decision and returns it with its outcome.
pub(crate) fn finish(
    decision: Decision,
    scenario: &Scenario,
    cpu: CpuModel,
) -> Result<(Assignment, ScheduleOutcome)> {
    let assignment = decision.into_assignment(scenario.num_subcarriers());
    let outcome = evaluate(&assignment, scenario, cpu)?;
    Ok((assignment, outcome))
}

/// Index of the largest score; ties go to the earliest entry.
pub(crate) fn argmax_first<I: IntoIterator<Item = (usize, f64)>>(items: I) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, score) in items {
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((i, score));
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
pub(crate) mod test_support {
    use crate::scenario::{ChannelMatrix, Device, EnergyModel, Job, Scenario};

    pub fn hand_scenario(jobs: Vec<Job>, rows: &[Vec<f64>], cloudlet_freq_hz: f64) -> Scenario {
        let m = jobs.len();
        Scenario {
            jobs,
            devices: vec![
                Device {
                    max_local_freq_hz: 4e8,
                    max_tx_power_w: 1.0,
                    circuit_power_w: 0.05,
                };
                m
            ],
            channel: ChannelMatrix::from_rows(rows).unwrap(),
            energy_model: EnergyModel::new(1e-24, 18_000.0).unwrap(),
            cloudlet_freq_hz,
            subcarrier_bandwidth_hz: 18_750.0,
        }
    }
}
