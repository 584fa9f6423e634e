//! Energy-minimal computation offloading in a single OFDMA cell served by a
//! cloudlet with a non-preemptive CPU.
//!
//! The crate is split along the problem's natural seams:
//!
//! - [`scenario`]: reproducible random problem instances (users, jobs, channel).
//! - [`phy`]: per-user radio and energy math (water-filling, rates, transmit
//!   power search, local/remote execution costs).
//! - [`schedulers`]: the allocation policies and the constraint checker that
//!   scores them.
//! - [`experiment`]: Monte Carlo sweeps, CSV output and the figure presets.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod phy;
pub mod scenario;
pub mod schedulers;

pub use error::{Error, Result};
pub use experiment::{
    emit_results, figure_presets, preset, run_experiment, summarize, trial_seed, ExhaustiveCap, ExperimentSpec,
    Policy, Preset, ResultRow, SummaryRow, SweepVariable,
};
pub use phy::{
    aggregate_rate, energy_optimal_power, local_energy, meets_deadline, optimal_transmit_power, queuing_time, remote_exec_time,
    threshold_power, water_fill, LinkBudget, PowerAllocation, SubcarrierGroup, TransmissionPlan,
};
pub use scenario::{
    generate_channel, generate_scenario, path_loss_db, ChannelMatrix, Device, EnergyModel, Job,
    Scenario, ScenarioConfig,
};
pub use schedulers::{
    dp_cpu_schedule, evaluate, exhaustive_optimal, find_minimum_group, joint_allocate,
    min_group_allocate, per_resource_allocate, Assignment, CpuModel, DpCandidate, DpSchedule,
    ScheduleOutcome, Violation,
};
