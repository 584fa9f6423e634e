//! Non-preemptive cloudlet CPU scheduling by dynamic programming over
//! subsets of offload candidates.
//!
//! For every subset `U` the table keeps the best saving and the time the CPU
//! becomes free. The entry is found by trying each member of `U` as the job
//! executed last: it is accepted on top of the entry for `U - {i}` when
//! `max(T_t, Time(U - {i})) + T_c <= deadline`, and skipped otherwise. Only
//! one (saving, time) pair is kept per subset, so the table is exact for
//! small sets but can, in rare cases, miss a schedule where a lower saving
//! that frees the CPU earlier pays off later.

use crate::error::{Error, Result};
use crate::phy::meets_deadline;

/// Largest candidate list accepted by [`dp_cpu_schedule`]; the table has
/// `2^n` entries.
pub const DEFAULT_DP_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpCandidate {
    pub saving_j: f64,
    pub tx_time_s: f64,
    pub exec_time_s: f64,
    pub deadline_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpSchedule {
    /// Accepted candidate indices, ascending.
    pub accepted: Vec<usize>,
    /// Accepted candidates in execution order.
    pub order: Vec<usize>,
    pub total_saving_j: f64,
    /// When the CPU finishes the last accepted job.
    pub completion_time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    saving: f64,
    time: f64,
    last: u8,
    accepted: bool,
}

/// The full table, indexed by candidate bitmask.
#[derive(Debug, Clone)]
pub struct DpTable {
    entries: Vec<Entry>,
    size: usize,
}

impl DpTable {
    pub fn num_candidates(&self) -> usize {
        self.size
    }

    pub fn saving(&self, mask: usize) -> f64 {
        self.entries[mask].saving
    }

    pub fn time(&self, mask: usize) -> f64 {
        self.entries[mask].time
    }

    fn schedule(&self) -> DpSchedule {
        let full = (1usize << self.size) - 1;
        let mut order = Vec::new();
        let mut mask = full;
        while mask != 0 {
            let e = self.entries[mask];
            if e.accepted {
                order.push(e.last as usize);
            }
            mask &= !(1 << e.last);
        }
        order.reverse();
        let mut accepted = order.clone();
        accepted.sort_unstable();
        DpSchedule {
            accepted,
            order,
            total_saving_j: self.entries[full].saving,
            completion_time_s: self.entries[full].time,
        }
    }
}

fn better(saving: f64, time: f64, best: &Entry) -> bool {
    let tol = 1e-12 * best.saving.abs().max(1.0);
    if saving > best.saving + tol {
        return true;
    }
    // Equal savings: prefer the schedule that frees the CPU first.
    (saving - best.saving).abs() <= tol && time < best.time
}

pub fn dp_table(candidates: &[DpCandidate]) -> Result<DpTable> {
    dp_table_with_cap(candidates, DEFAULT_DP_CAP)
}

fn dp_table_with_cap(candidates: &[DpCandidate], cap: usize) -> Result<DpTable> {
    let n = candidates.len();
    if n > cap || n > 30 {
        return Err(Error::CandidateCap { count: n, cap });
    }
    for c in candidates {
        if !(c.tx_time_s >= 0.0) || !(c.exec_time_s >= 0.0) || !c.saving_j.is_finite() {
            return Err(Error::domain(format!("invalid dp candidate {c:?}")));
        }
    }
    let empty = Entry {
        saving: 0.0,
        time: 0.0,
        last: 0,
        accepted: false,
    };
    let mut entries = vec![empty; 1 << n];
    // Every proper subset of a mask is numerically smaller than it.
    for mask in 1usize..(1 << n) {
        let mut best: Option<Entry> = None;
        for (i, c) in candidates.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0) {
            let prev = entries[mask & !(1 << i)];
            let finish = c.tx_time_s.max(prev.time) + c.exec_time_s;
            let entry = if c.saving_j > 0.0 && meets_deadline(finish, c.deadline_s) {
                Entry {
                    saving: prev.saving + c.saving_j,
                    time: finish,
                    last: i as u8,
                    accepted: true,
                }
            } else {
                Entry {
                    last: i as u8,
                    accepted: false,
                    ..prev
                }
            };
            if best.is_none_or(|b| better(entry.saving, entry.time, &b)) {
                best = Some(entry);
            }
        }
        entries[mask] = best.expect("nonempty mask");
    }
    Ok(DpTable { entries, size: n })
}

/// Chooses which offload candidates the cloudlet accepts and in what order.
pub fn dp_cpu_schedule(candidates: &[DpCandidate]) -> Result<DpSchedule> {
    dp_cpu_schedule_with_cap(candidates, DEFAULT_DP_CAP)
}

pub fn dp_cpu_schedule_with_cap(candidates: &[DpCandidate], cap: usize) -> Result<DpSchedule> {
    Ok(dp_table_with_cap(candidates, cap)?.schedule())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(saving_j: f64, tx_time_s: f64, exec_time_s: f64, deadline_s: f64) -> DpCandidate {
        DpCandidate {
            saving_j,
            tx_time_s,
            exec_time_s,
            deadline_s,
        }
    }

    #[test]
    fn empty_list() {
        let s = dp_cpu_schedule(&[]).unwrap();
        assert!(s.accepted.is_empty() && s.order.is_empty());
        assert_eq!((s.total_saving_j, s.completion_time_s), (0.0, 0.0));
    }

    #[test]
    fn single_feasible_job() {
        let s = dp_cpu_schedule(&[cand(0.5, 0.01, 0.03, 0.05)]).unwrap();
        assert_eq!(s.accepted, vec![0]);
        assert_eq!(s.total_saving_j, 0.5);
        assert!((s.completion_time_s - 0.04).abs() < 1e-15);
    }

    #[test]
    fn second_job_cannot_queue() {
        // Either order leaves the second job finishing at 0.07 > 0.05.
        let jobs = [cand(0.5, 0.01, 0.03, 0.05), cand(0.3, 0.01, 0.03, 0.05)];
        let s = dp_cpu_schedule(&jobs).unwrap();
        assert_eq!(s.accepted, vec![0]);
        assert_eq!(s.total_saving_j, 0.5);
    }

    #[test]
    fn both_fit_in_deadline_order() {
        let jobs = [cand(0.3, 0.0, 0.03, 0.1), cand(0.5, 0.01, 0.03, 0.05)];
        let s = dp_cpu_schedule(&jobs).unwrap();
        assert_eq!(s.order, vec![1, 0]);
        assert!((s.total_saving_j - 0.8).abs() < 1e-15);
        assert!((s.completion_time_s - 0.07).abs() < 1e-15);
    }

    #[test]
    fn cap_is_enforced() {
        let jobs = vec![cand(1.0, 0.0, 0.01, 1.0); 4];
        assert!(matches!(
            dp_cpu_schedule_with_cap(&jobs, 3),
            Err(Error::CandidateCap { count: 4, cap: 3 })
        ));
        assert!(matches!(
            dp_cpu_schedule(&vec![cand(1.0, 0.0, 0.01, 1.0); 21]),
            Err(Error::CandidateCap { .. })
        ));
    }

    #[test]
    fn table_base_and_monotone() {
        let jobs = [
            cand(0.4, 0.01, 0.02, 0.05),
            cand(0.2, 0.0, 0.03, 0.06),
            cand(0.9, 0.02, 0.02, 0.04),
        ];
        let t = dp_table(&jobs).unwrap();
        assert_eq!((t.saving(0), t.time(0)), (0.0, 0.0));
        for mask in 1usize..8 {
            for i in (0..3).filter(|i| mask & (1 << i) != 0) {
                assert!(t.saving(mask) >= t.saving(mask & !(1 << i)));
            }
        }
    }
}
