//! Per-user radio and energy math.
//!
//! All quantities are SI: watts, joules, seconds, bits and hertz. Rates use
//! base-2 logarithms so they come out in bits per second.

use crate::error::{Error, Result};
use crate::scenario::{EnergyModel, Job};

/// Stopping width for the transmit power searches.
pub const POWER_TOLERANCE_W: f64 = 1e-6;

/// Lower end of the energy-efficiency search interval.
pub const MIN_SEARCH_POWER_W: f64 = 1e-9;

const RATE_REL_SLACK: f64 = 1e-12;
const DEADLINE_REL_SLACK: f64 = 1e-9;

/// Deadline test shared by every planner, scheduler and checker, so that
/// rounding in a power search never flips a verdict between them.
pub fn meets_deadline(finish_s: f64, deadline_s: f64) -> bool {
    finish_s <= deadline_s * (1.0 + DEADLINE_REL_SLACK)
}

/// Distinct subcarrier indices, kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SubcarrierGroup(Vec<usize>);

impl SubcarrierGroup {
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::domain("subcarrier group has repeated indices"));
        }
        Ok(SubcarrierGroup(indices))
    }

    pub fn from_mask(mask: u64) -> Self {
        SubcarrierGroup((0..64).filter(|j| mask & (1 << j) != 0).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, subcarrier: usize) -> bool {
        self.0.binary_search(&subcarrier).is_ok()
    }

    /// A copy with one more subcarrier.
    pub fn with(&self, subcarrier: usize) -> Self {
        let mut next = self.0.clone();
        if let Err(pos) = next.binary_search(&subcarrier) {
            next.insert(pos, subcarrier);
        }
        SubcarrierGroup(next)
    }

    /// Picks this group's entries out of a full channel row.
    pub fn gains_from(&self, row: &[f64]) -> Vec<f64> {
        self.0.iter().map(|&j| row[j]).collect()
    }
}

/// Per-subcarrier powers, aligned with the gains they were computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub per_subcarrier_w: Vec<f64>,
}

impl PowerAllocation {
    pub fn total_w(&self) -> f64 {
        self.per_subcarrier_w.iter().sum()
    }
}

fn check_gains(gains: &[f64]) -> Result<()> {
    if gains.is_empty() {
        return Err(Error::domain("empty subcarrier group"));
    }
    if let Some(g) = gains.iter().find(|g| !(**g >= 0.0) || !g.is_finite()) {
        return Err(Error::domain(format!("invalid channel gain {g}")));
    }
    Ok(())
}

/// Rate-maximizing split of `total_power_w` over parallel channels:
/// `p_j = max(0, mu - 1/g_j)` with the water level `mu` set by the budget.
pub fn water_fill(gains: &[f64], total_power_w: f64) -> Result<PowerAllocation> {
    check_gains(gains)?;
    if !(total_power_w >= 0.0) || !total_power_w.is_finite() {
        return Err(Error::domain(format!("invalid power budget {total_power_w}")));
    }
    Ok(PowerAllocation {
        per_subcarrier_w: fill(gains, total_power_w),
    })
}

fn fill(gains: &[f64], total: f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..gains.len()).filter(|&j| gains[j] > 0.0).collect();
    if order.is_empty() {
        return vec![total / gains.len() as f64; gains.len()];
    }
    order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]).then(a.cmp(&b)));

    // Grow the active set while the next channel's floor is under the level.
    let mut inv_sum = 0.0;
    let mut level = 0.0;
    let mut active = 0;
    for (k, &j) in order.iter().enumerate() {
        let floor = 1.0 / gains[j];
        let candidate = (total + inv_sum + floor) / (k + 1) as f64;
        if k > 0 && candidate <= floor {
            break;
        }
        inv_sum += floor;
        level = candidate;
        active = k + 1;
    }
    let mut powers = vec![0.0; gains.len()];
    for &j in &order[..active] {
        powers[j] = (level - 1.0 / gains[j]).max(0.0);
    }
    powers
}

/// `B * sum_j log2(1 + p_j g_j)` over one group.
pub fn aggregate_rate(powers: &[f64], gains: &[f64], bandwidth_hz: f64) -> Result<f64> {
    if powers.len() != gains.len() {
        return Err(Error::domain(format!(
            "{} powers for {} subcarriers",
            powers.len(),
            gains.len()
        )));
    }
    if !(bandwidth_hz > 0.0) {
        return Err(Error::domain("bandwidth must be positive"));
    }
    Ok(rate(powers, gains, bandwidth_hz))
}

fn rate(powers: &[f64], gains: &[f64], bandwidth_hz: f64) -> f64 {
    bandwidth_hz * powers.iter().zip(gains).map(|(p, g)| (p * g).ln_1p()).sum::<f64>() / std::f64::consts::LN_2
}

fn filled_rate(gains: &[f64], total: f64, bandwidth_hz: f64) -> f64 {
    rate(&fill(gains, total), gains, bandwidth_hz)
}

/// The transmission problem one user faces over one subcarrier group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub bandwidth_hz: f64,
    pub data_bits: f64,
    /// Latest acceptable end of transmission.
    pub deadline_s: f64,
    pub max_power_w: f64,
    pub circuit_power_w: f64,
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::domain("bandwidth must be positive"));
        }
        if !(self.data_bits >= 0.0) || !self.data_bits.is_finite() {
            return Err(Error::domain("data size must be nonnegative"));
        }
        if !(self.deadline_s > 0.0) {
            return Err(Error::domain(format!("deadline must be positive, got {}", self.deadline_s)));
        }
        if !(self.max_power_w > 0.0) || !(self.circuit_power_w >= 0.0) {
            return Err(Error::domain("invalid device powers"));
        }
        Ok(())
    }

    fn required_rate(&self) -> f64 {
        self.data_bits / self.deadline_s
    }
}

/// Least total power whose water-filled rate delivers the data by the
/// deadline. `None` when even the maximum power is too slow.
pub fn threshold_power(gains: &[f64], link: &LinkBudget) -> Result<Option<f64>> {
    link.validate()?;
    check_gains(gains)?;
    Ok(threshold(gains, link))
}

fn threshold(gains: &[f64], link: &LinkBudget) -> Option<f64> {
    let required = link.required_rate();
    if required == 0.0 {
        return Some(0.0);
    }
    let fast_enough = |p: f64| filled_rate(gains, p, link.bandwidth_hz) * (1.0 + RATE_REL_SLACK) >= required;
    if !fast_enough(link.max_power_w) {
        return None;
    }
    let (mut lo, mut hi) = (0.0, link.max_power_w);
    while hi - lo > POWER_TOLERANCE_W {
        let mid = 0.5 * (lo + hi);
        if fast_enough(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Total power minimizing energy per bit, `(p + p_c) / rate(p)`, ignoring the
/// deadline. The ratio is quasiconvex in `p`, so a golden-section search over
/// `[MIN_SEARCH_POWER_W, max_power_w]` finds it.
pub fn energy_optimal_power(gains: &[f64], link: &LinkBudget) -> Result<f64> {
    link.validate()?;
    check_gains(gains)?;
    Ok(energy_optimal(gains, link))
}

fn energy_optimal(gains: &[f64], link: &LinkBudget) -> f64 {
    let cost = |p: f64| (p + link.circuit_power_w) / filled_rate(gains, p, link.bandwidth_hz);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (MIN_SEARCH_POWER_W, link.max_power_w.max(MIN_SEARCH_POWER_W));
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (cost(c), cost(d));
    while b - a > POWER_TOLERANCE_W {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = cost(d);
        }
    }
    0.5 * (a + b)
}

/// How one user transmits over its subcarrier group.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionPlan {
    pub group: SubcarrierGroup,
    /// Aligned with `group.indices()`.
    pub powers: PowerAllocation,
    pub total_power_w: f64,
    pub rate_bps: f64,
    pub tx_time_s: f64,
    pub tx_energy_j: f64,
}

impl TransmissionPlan {
    /// Water-fills `total_power_w` over the group and derives rate, time and
    /// energy from it.
    pub fn at_power(group: SubcarrierGroup, gains: &[f64], total_power_w: f64, link: &LinkBudget) -> Result<Self> {
        link.validate()?;
        check_gains(gains)?;
        if gains.len() != group.len() {
            return Err(Error::domain("gains and group differ in length"));
        }
        let powers = water_fill(gains, total_power_w)?;
        let rate_bps = rate(&powers.per_subcarrier_w, gains, link.bandwidth_hz);
        let tx_time_s = if link.data_bits == 0.0 {
            0.0
        } else {
            link.data_bits / rate_bps
        };
        Ok(TransmissionPlan {
            group,
            powers,
            total_power_w,
            rate_bps,
            tx_time_s,
            tx_energy_j: (total_power_w + link.circuit_power_w) * tx_time_s,
        })
    }

    /// Power on a given subcarrier, zero if it is not in the group.
    pub fn power_on(&self, subcarrier: usize) -> f64 {
        self.group
            .indices()
            .iter()
            .position(|&j| j == subcarrier)
            .map_or(0.0, |k| self.powers.per_subcarrier_w[k])
    }
}

/// Energy-minimal transmission meeting the deadline: the larger of the
/// energy-efficient power and the deadline threshold. `None` when the group
/// cannot meet the deadline within the power limit.
pub fn optimal_transmit_power(
    group: SubcarrierGroup,
    gains: &[f64],
    link: &LinkBudget,
) -> Result<Option<TransmissionPlan>> {
    link.validate()?;
    if group.is_empty() {
        return Ok(None);
    }
    check_gains(gains)?;
    if gains.len() != group.len() {
        return Err(Error::domain("gains and group differ in length"));
    }
    let Some(p_threshold) = threshold(gains, link) else {
        return Ok(None);
    };
    let p = energy_optimal(gains, link).max(p_threshold);
    if p > link.max_power_w + POWER_TOLERANCE_W {
        return Ok(None);
    }
    TransmissionPlan::at_power(group, gains, p.min(link.max_power_w), link).map(Some)
}

/// Energy of running the job locally at the frequency that exactly meets its
/// deadline: `kappa X^3 D^3 / T^2`.
pub fn local_energy(job: &Job, model: &EnergyModel) -> f64 {
    let cycles = model.cycles_per_bit * job.data_size_bits;
    let freq = cycles / job.deadline_s;
    model.kappa * freq * freq * cycles
}

pub fn remote_exec_time(job: &Job, cloudlet_freq_hz: f64, model: &EnergyModel) -> f64 {
    model.cycles_per_bit * job.data_size_bits / cloudlet_freq_hz
}

/// Time an offloaded user waits behind earlier-ranked offloaded jobs.
pub fn queuing_time(order: &[Option<usize>], offloaded: &[bool], exec_times: &[f64], user: usize) -> Result<f64> {
    if order.len() != offloaded.len() || order.len() != exec_times.len() {
        return Err(Error::domain("order, offload flags and execution times differ in length"));
    }
    if user >= order.len() {
        return Err(Error::domain(format!("user {user} out of range")));
    }
    let rank = match (offloaded[user], order[user]) {
        (true, Some(rank)) => rank,
        _ => return Err(Error::domain(format!("user {user} is not offloaded"))),
    };
    Ok(order
        .iter()
        .zip(offloaded)
        .zip(exec_times)
        .filter(|((q, &a), _)| a && matches!(q, Some(r) if *r < rank))
        .map(|(_, t)| t)
        .sum())
}
