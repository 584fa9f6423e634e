//! Random problem instances: user placement, channel gains and job parameters.
//!
//! Large-scale attenuation follows a free-space style law evaluated with the
//! distance in km and the carrier in kHz, exactly as the default band is
//! configured (1850-1960 kHz). Those units make the default cell very benign
//! (gain-to-noise ratios around 70-80 dB); every constant lives in
//! [`ScenarioConfig`] so a different calibration is one config file away.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub data_size_bits: f64,
    pub deadline_s: f64,
}

impl Job {
    pub fn new(data_size_bits: f64, deadline_s: f64) -> Result<Self> {
        if !(data_size_bits > 0.0 && data_size_bits.is_finite()) {
            return Err(Error::domain(format!("data size must be positive, got {data_size_bits}")));
        }
        if !(deadline_s > 0.0 && deadline_s.is_finite()) {
            return Err(Error::domain(format!("deadline must be positive, got {deadline_s}")));
        }
        Ok(Job {
            data_size_bits,
            deadline_s,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Device {
    /// Maximum local CPU frequency. Only recorded; local execution at the
    /// deadline-exact frequency is assumed to be always possible.
    pub max_local_freq_hz: f64,
    pub max_tx_power_w: f64,
    pub circuit_power_w: f64,
}

/// Dynamic CPU energy model: a cycle at frequency `f` costs `kappa * f^2`
/// joules and a job needs `cycles_per_bit` cycles per input bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyModel {
    pub kappa: f64,
    pub cycles_per_bit: f64,
}

impl EnergyModel {
    pub fn new(kappa: f64, cycles_per_bit: f64) -> Result<Self> {
        if !(kappa > 0.0) || !(cycles_per_bit > 0.0) {
            return Err(Error::domain("kappa and cycles_per_bit must be positive"));
        }
        Ok(EnergyModel {
            kappa,
            cycles_per_bit,
        })
    }
}

/// Linear channel-gain-to-noise ratios, one row per user and one column per
/// subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    users: usize,
    subcarriers: usize,
    gains: Vec<f64>,
}

impl ChannelMatrix {
    pub fn new(users: usize, subcarriers: usize, gains: Vec<f64>) -> Result<Self> {
        if gains.len() != users * subcarriers {
            return Err(Error::domain(format!(
                "expected {users}x{subcarriers} gains, got {}",
                gains.len()
            )));
        }
        if let Some(g) = gains.iter().find(|g| !(**g >= 0.0) || !g.is_finite()) {
            return Err(Error::domain(format!("channel gain {g} is not a finite nonnegative value")));
        }
        Ok(ChannelMatrix {
            users,
            subcarriers,
            gains,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let subcarriers = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != subcarriers) {
            return Err(Error::domain("ragged channel rows"));
        }
        Self::new(rows.len(), subcarriers, rows.concat())
    }

    pub fn num_users(&self) -> usize {
        self.users
    }

    pub fn num_subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn gain(&self, user: usize, subcarrier: usize) -> f64 {
        self.gains[user * self.subcarriers + subcarrier]
    }

    pub fn row(&self, user: usize) -> &[f64] {
        &self.gains[user * self.subcarriers..(user + 1) * self.subcarriers]
    }

    /// Keeps only the listed subcarrier columns, in the given order.
    pub fn select_subcarriers(&self, columns: &[usize]) -> Result<Self> {
        if let Some(c) = columns.iter().find(|&&c| c >= self.subcarriers) {
            return Err(Error::domain(format!("subcarrier {c} out of range")));
        }
        let gains = (0..self.users)
            .flat_map(|u| columns.iter().map(move |&c| (u, c)))
            .map(|(u, c)| self.gain(u, c))
            .collect();
        Self::new(self.users, columns.len(), gains)
    }
}

/// Everything needed to draw a [`Scenario`]. Field names double as the keys
/// of the flat TOML config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub num_users: usize,
    pub num_subcarriers: usize,
    pub subcarrier_bandwidth_hz: f64,
    pub band_low_khz: f64,
    pub band_high_khz: f64,
    pub cell_radius_km: f64,
    pub cloudlet_freq_hz: f64,
    pub data_size_range_bits: [f64; 2],
    pub deadline_range_s: [f64; 2],
    pub kappa: f64,
    pub cycles_per_bit: f64,
    pub circuit_power_w: f64,
    pub max_tx_power_w: f64,
    pub noise_psd_dbm_hz: f64,
    pub rng_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            num_users: 4,
            num_subcarriers: 4,
            subcarrier_bandwidth_hz: 18_750.0,
            band_low_khz: 1850.0,
            band_high_khz: 1960.0,
            cell_radius_km: 0.2,
            cloudlet_freq_hz: 600e6,
            data_size_range_bits: [900.0, 1100.0],
            deadline_range_s: [0.05, 0.15],
            kappa: 1e-24,
            cycles_per_bit: 18_000.0,
            circuit_power_w: 0.05,
            max_tx_power_w: 1.0,
            noise_psd_dbm_hz: -174.0,
            rng_seed: 0,
        }
    }
}

fn check_range(name: &str, range: [f64; 2]) -> Result<()> {
    let [lo, hi] = range;
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(Error::config(format!("{name} must be a nonempty positive interval, got [{lo}, {hi}]")));
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ScenarioConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_users == 0 || self.num_subcarriers == 0 {
            return Err(Error::config("num_users and num_subcarriers must be positive"));
        }
        let positive = [
            ("subcarrier_bandwidth_hz", self.subcarrier_bandwidth_hz),
            ("band_low_khz", self.band_low_khz),
            ("band_high_khz", self.band_high_khz),
            ("cell_radius_km", self.cell_radius_km),
            ("cloudlet_freq_hz", self.cloudlet_freq_hz),
            ("kappa", self.kappa),
            ("cycles_per_bit", self.cycles_per_bit),
            ("max_tx_power_w", self.max_tx_power_w),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.circuit_power_w >= 0.0) {
            return Err(Error::config("circuit_power_w must be nonnegative"));
        }
        if !self.noise_psd_dbm_hz.is_finite() {
            return Err(Error::config("noise_psd_dbm_hz must be finite"));
        }
        let span_hz = (self.band_high_khz - self.band_low_khz) * 1e3;
        let occupied_hz = self.num_subcarriers as f64 * self.subcarrier_bandwidth_hz;
        if occupied_hz > span_hz * (1.0 + 1e-12) {
            return Err(Error::config(format!(
                "{} subcarriers of {} Hz do not fit in a {} Hz band",
                self.num_subcarriers, self.subcarrier_bandwidth_hz, span_hz
            )));
        }
        check_range("data_size_range_bits", self.data_size_range_bits)?;
        check_range("deadline_range_s", self.deadline_range_s)?;
        Ok(())
    }

    /// Subcarrier centre frequencies, evenly spread over the band.
    pub fn subcarrier_centers_khz(&self) -> Vec<f64> {
        let n = self.num_subcarriers as f64;
        let step = (self.band_high_khz - self.band_low_khz) / n;
        (0..self.num_subcarriers)
            .map(|j| self.band_low_khz + (j as f64 + 0.5) * step)
            .collect()
    }

    /// Thermal noise power over one subcarrier, in watts.
    pub fn noise_power_w(&self) -> f64 {
        10f64.powf((self.noise_psd_dbm_hz - 30.0) / 10.0) * self.subcarrier_bandwidth_hz
    }

    /// Gain-to-noise ratio before small-scale fading.
    pub fn mean_gain_to_noise(&self, distance_km: f64, carrier_khz: f64) -> Result<f64> {
        let loss = path_loss_db(distance_km, carrier_khz)?;
        Ok(10f64.powf(-loss / 10.0) / self.noise_power_w())
    }

    pub fn energy_model(&self) -> EnergyModel {
        EnergyModel {
            kappa: self.kappa,
            cycles_per_bit: self.cycles_per_bit,
        }
    }
}

/// Large-scale path loss in dB for a distance in km and a carrier in kHz.
pub fn path_loss_db(distance_km: f64, carrier_khz: f64) -> Result<f64> {
    if !(distance_km > 0.0) || !(carrier_khz > 0.0) {
        return Err(Error::domain(format!(
            "path loss needs positive distance and frequency, got {distance_km} km, {carrier_khz} kHz"
        )));
    }
    Ok(20.0 * distance_km.log10() + 20.0 * carrier_khz.log10() + 32.45)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fading {
    /// I.i.d. unit-mean exponential power factor per (user, subcarrier).
    Rayleigh,
    /// Large-scale attenuation only.
    None,
}

/// Draws user distances and a channel matrix with Rayleigh fading.
pub fn generate_channel<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<ChannelMatrix> {
    generate_channel_with(config, rng, Fading::Rayleigh)
}

pub fn generate_channel_with<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    rng: &mut R,
    fading: Fading,
) -> Result<ChannelMatrix> {
    config.validate()?;
    let centers = config.subcarrier_centers_khz();
    let mut gains = Vec::with_capacity(config.num_users * config.num_subcarriers);
    for _ in 0..config.num_users {
        // Uniform over the disk area; 1 - U keeps the distance away from zero.
        let u: f64 = 1.0 - rng.random::<f64>();
        let distance = config.cell_radius_km * u.sqrt();
        for &carrier in &centers {
            let mean = config.mean_gain_to_noise(distance, carrier)?;
            let fade: f64 = match fading {
                Fading::Rayleigh => Exp1.sample(rng),
                Fading::None => 1.0,
            };
            gains.push(mean * fade);
        }
    }
    ChannelMatrix::new(config.num_users, config.num_subcarriers, gains)
}

/// A fully instantiated problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub jobs: Vec<Job>,
    pub devices: Vec<Device>,
    pub channel: ChannelMatrix,
    pub energy_model: EnergyModel,
    pub cloudlet_freq_hz: f64,
    pub subcarrier_bandwidth_hz: f64,
}

pub fn generate_scenario<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<Scenario> {
    config.validate()?;
    let [d_lo, d_hi] = config.data_size_range_bits;
    let [t_lo, t_hi] = config.deadline_range_s;
    let jobs: Vec<Job> = (0..config.num_users)
        .map(|_| Job {
            data_size_bits: rng.random_range(d_lo..=d_hi),
            deadline_s: rng.random_range(t_lo..=t_hi),
        })
        .collect();
    // A CPU able to run the largest job by the tightest deadline.
    let max_local_freq_hz = config.cycles_per_bit * d_hi / t_lo;
    let devices = vec![
        Device {
            max_local_freq_hz,
            max_tx_power_w: config.max_tx_power_w,
            circuit_power_w: config.circuit_power_w,
        };
        config.num_users
    ];
    let channel = generate_channel(config, rng)?;
    let scenario = Scenario {
        jobs,
        devices,
        channel,
        energy_model: config.energy_model(),
        cloudlet_freq_hz: config.cloudlet_freq_hz,
        subcarrier_bandwidth_hz: config.subcarrier_bandwidth_hz,
    };
    scenario.validate()?;
    Ok(scenario)
}

impl Scenario {
    pub fn num_users(&self) -> usize {
        self.jobs.len()
    }

    pub fn num_subcarriers(&self) -> usize {
        self.channel.num_subcarriers()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.jobs.len();
        if self.devices.len() != m || self.channel.num_users() != m {
            return Err(Error::domain(format!(
                "{} jobs, {} devices and {} channel rows do not agree",
                m,
                self.devices.len(),
                self.channel.num_users()
            )));
        }
        for job in &self.jobs {
            Job::new(job.data_size_bits, job.deadline_s)?;
        }
        for d in &self.devices {
            if !(d.max_tx_power_w > 0.0) || !(d.circuit_power_w >= 0.0) {
                return Err(Error::domain("device powers must be positive"));
            }
        }
        EnergyModel::new(self.energy_model.kappa, self.energy_model.cycles_per_bit)?;
        if !(self.cloudlet_freq_hz > 0.0) || !(self.subcarrier_bandwidth_hz > 0.0) {
            return Err(Error::domain("cloudlet frequency and bandwidth must be positive"));
        }
        Ok(())
    }

    /// The same users with only the listed subcarriers available.
    pub fn restrict_subcarriers(&self, columns: &[usize]) -> Result<Scenario> {
        Ok(Scenario {
            channel: self.channel.select_subcarriers(columns)?,
            ..self.clone()
        })
    }

    /// Deterministic text dump for golden comparisons.
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "users {} subcarriers {}", self.num_users(), self.num_subcarriers());
        let _ = writeln!(out, "subcarrier_bandwidth_hz {}", self.subcarrier_bandwidth_hz);
        let _ = writeln!(out, "cloudlet_freq_hz {}", self.cloudlet_freq_hz);
        let _ = writeln!(
            out,
            "kappa {} cycles_per_bit {}",
            self.energy_model.kappa, self.energy_model.cycles_per_bit
        );
        for (i, (job, dev)) in self.jobs.iter().zip(&self.devices).enumerate() {
            let _ = writeln!(
                out,
                "user {i} data_size_bits {} deadline_s {} max_local_freq_hz {} max_tx_power_w {} circuit_power_w {}",
                job.data_size_bits, job.deadline_s, dev.max_local_freq_hz, dev.max_tx_power_w, dev.circuit_power_w
            );
        }
        for i in 0..self.num_users() {
            let row: Vec<String> = self.channel.row(i).iter().map(|g| g.to_string()).collect();
            let _ = writeln!(out, "gains {i} {}", row.join(" "));
        }
        out
    }
}
