//! TOML experiment configuration.
//!
//! Every key is optional; omitted keys take the simulation defaults (S = 8, γ = 8,
//! K = 20, L = 4, T = 200, N_BS = 80, λ = 10, p_BS = 46 dBm with SCs 22 dB lower,
//! p_τ = 0 dBm, −174 dBm/Hz over 20 MHz, κ_BS = 1, κ_SC = 1.2, SC ring of 800 m in
//! a 1000 m cell, 1000 users). Unknown keys are rejected.
//!
//! A small cell wins the biased association only within roughly 95 m, so with
//! uniformly dropped users every SC sees about 0.9% of them; 1000 users leave each
//! SC enough candidates for L = 4 in most drops.
//!
//! ```toml
//! experiment = "rate-sweep"
//!
//! [topology]
//! small_cells = 8
//! users = 200
//!
//! [power]
//! p_bs_dbm = 46.0
//!
//! [sweep]
//! variable = "p_bs_dbm"
//! values = [30.0, 35.0, 40.0, 45.0, 50.0]
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{config_err, io_err, Error, Result};
use crate::netgen::{FixedBetaTable, ScPlacement};
use crate::rates::asymptotic::ScalingLaw;
use crate::scheduler::Algorithm;
use crate::units::{dbm_to_mw, noise_power_mw};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Spectral efficiency and per-user rates along one swept parameter.
    #[default]
    RateSweep,
    /// Same columns as `rate-sweep`, swept over the pilot reuse factor.
    PrSweep,
    /// Closed-form bounds, limits and required powers under a scaling law.
    PowerScaling,
    /// RSA, GSA and ASA side by side.
    Scheduling,
    /// Two-tier network against a single BS with all antennas and users.
    OneTier,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::RateSweep,
        ExperimentKind::PrSweep,
        ExperimentKind::PowerScaling,
        ExperimentKind::Scheduling,
        ExperimentKind::OneTier,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::RateSweep => "rate-sweep",
            ExperimentKind::PrSweep => "pr-sweep",
            ExperimentKind::PowerScaling => "power-scaling",
            ExperimentKind::Scheduling => "scheduling",
            ExperimentKind::OneTier => "one-tier",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    PBsDbm,
    PTauDbm,
    Gamma,
    NBs,
    NSc,
    Users,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::PBsDbm => "p_bs_dbm",
            SweepVariable::PTauDbm => "p_tau_dbm",
            SweepVariable::Gamma => "gamma",
            SweepVariable::NBs => "n_bs",
            SweepVariable::NSc => "n_sc",
            SweepVariable::Users => "users",
        }
    }

    fn is_integer(self) -> bool {
        !matches!(self, SweepVariable::PBsDbm | SweepVariable::PTauDbm)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Topology {
    pub small_cells: usize,
    pub cell_radius_m: f64,
    pub sc_ring_radius_m: f64,
    pub placement: ScPlacement,
    pub users: usize,
    /// Serve every scheduled user from a single BS with N_BS + S·N_SC antennas.
    pub one_tier: bool,
}

impl Default for Topology {
    fn default() -> Self {
        Topology {
            small_cells: 8,
            cell_radius_m: 1000.0,
            sc_ring_radius_m: 800.0,
            placement: ScPlacement::Ring,
            users: 1000,
            one_tier: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Antennas {
    pub n_bs: usize,
    /// Defaults to round(N_BS / λ).
    pub n_sc: Option<usize>,
    pub lambda: f64,
}

impl Default for Antennas {
    fn default() -> Self {
        Antennas { n_bs: 80, n_sc: None, lambda: 10.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Power {
    pub p_bs_dbm: f64,
    /// p_BS − p_SC in dB.
    pub sc_offset_db: f64,
    pub p_tau_dbm: f64,
    pub noise_dbm_per_hz: f64,
    pub bandwidth_hz: f64,
}

impl Default for Power {
    fn default() -> Self {
        Power {
            p_bs_dbm: 46.0,
            sc_offset_db: 22.0,
            p_tau_dbm: 0.0,
            noise_dbm_per_hz: -174.0,
            bandwidth_hz: 20e6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Pilot {
    pub gamma: usize,
    /// Coherence interval T in symbols.
    pub coherence: usize,
}

impl Default for Pilot {
    fn default() -> Self {
        Pilot { gamma: 8, coherence: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scheduling {
    pub k: usize,
    pub l: usize,
    pub algorithm: Algorithm,
    pub kappa_bs: f64,
    pub kappa_sc: f64,
}

impl Default for Scheduling {
    fn default() -> Self {
        Scheduling { k: 20, l: 4, algorithm: Algorithm::Rsa, kappa_bs: 1.0, kappa_sc: 1.2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarlo {
    /// Channel realizations per drop; 0 evaluates the closed forms only.
    pub trials: usize,
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    /// User drops averaged per sweep point.
    pub drops: usize,
    /// Reuse the same drops at every sweep point.
    pub pin_drops: bool,
    /// Redraws allowed per drop until every cell has enough candidates.
    pub max_resamples: usize,
}

impl Default for MonteCarlo {
    fn default() -> Self {
        MonteCarlo { trials: 200, seed: 1, workers: 0, drops: 10, pin_drops: true, max_resamples: 100 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sweep {
    /// Defaults per experiment: p_bs_dbm, gamma, n_sc, p_bs_dbm, p_bs_dbm.
    pub variable: Option<SweepVariable>,
    /// Empty selects the experiment's default grid.
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scaling {
    pub law: ScalingLaw,
    pub table: FixedBetaTable,
    /// Per-user rate the required-power solver targets, bit/s/Hz; 0 disables it.
    pub target_rate: f64,
    /// Apply (T − τ)/T to the rates before comparing them with the target.
    pub apply_prelog: bool,
}

impl Default for Scaling {
    fn default() -> Self {
        Scaling {
            law: ScalingLaw::default(),
            table: FixedBetaTable::default(),
            target_rate: 1.0,
            apply_prelog: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub topology: Topology,
    pub antennas: Antennas,
    pub power: Power,
    pub pilot: Pilot,
    pub scheduling: Scheduling,
    pub mc: MonteCarlo,
    pub sweep: Sweep,
    pub scaling: Scaling,
}

/// Quantities implied by the configuration, in the units used internally.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Derived {
    pub tau: usize,
    pub prelog: f64,
    pub n_sc: usize,
    pub p_sc_dbm: f64,
    pub p_bs_mw: f64,
    pub p_sc_mw: f64,
    pub p_tau_mw: f64,
    pub noise_mw: f64,
    pub sweep_variable: SweepVariable,
    pub sweep_values: Vec<f64>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }

    pub fn n_sc(&self) -> usize {
        self.antennas
            .n_sc
            .unwrap_or_else(|| (self.antennas.n_bs as f64 / self.antennas.lambda).round() as usize)
    }

    pub fn tau(&self) -> usize {
        let sc = &self.scheduling;
        if self.topology.small_cells == 0 {
            sc.k
        } else {
            sc.k + sc.l * self.pilot.gamma
        }
    }

    pub fn sweep_variable(&self) -> SweepVariable {
        self.sweep.variable.unwrap_or(match self.experiment {
            ExperimentKind::PrSweep => SweepVariable::Gamma,
            ExperimentKind::PowerScaling => SweepVariable::NSc,
            _ => SweepVariable::PBsDbm,
        })
    }

    pub fn sweep_values(&self) -> Vec<f64> {
        if !self.sweep.values.is_empty() {
            return self.sweep.values.clone();
        }
        match self.sweep_variable() {
            SweepVariable::PBsDbm => vec![30.0, 35.0, 40.0, 45.0, 50.0],
            SweepVariable::PTauDbm => vec![-10.0, -5.0, 0.0, 5.0, 10.0],
            SweepVariable::Gamma => {
                let s = self.topology.small_cells;
                (1..=s).filter(|g| s % g == 0).map(|g| g as f64).collect()
            }
            SweepVariable::NBs => vec![80.0, 160.0, 320.0],
            SweepVariable::NSc => vec![16.0, 32.0, 64.0, 128.0],
            SweepVariable::Users => vec![self.topology.users as f64],
        }
    }

    /// Copy of the configuration with the sweep variable set to `value`.
    pub fn at(&self, value: f64) -> Result<Self> {
        let var = self.sweep_variable();
        if var.is_integer() && (value < 0.0 || value.fract() != 0.0) {
            return config_err(format!("{} sweep value {value} is not a count", var.name()));
        }
        let mut c = self.clone();
        let n = value as usize;
        match var {
            SweepVariable::PBsDbm => c.power.p_bs_dbm = value,
            SweepVariable::PTauDbm => c.power.p_tau_dbm = value,
            SweepVariable::Gamma => c.pilot.gamma = n,
            SweepVariable::NBs => c.antennas.n_bs = n,
            SweepVariable::NSc => c.antennas.n_sc = Some(n),
            SweepVariable::Users => c.topology.users = n,
        }
        c.validate()?;
        Ok(c)
    }

    pub fn derived(&self) -> Derived {
        let p = &self.power;
        let p_sc_dbm = p.p_bs_dbm - p.sc_offset_db;
        let tau = self.tau();
        Derived {
            tau,
            prelog: self.pilot.coherence.saturating_sub(tau) as f64 / self.pilot.coherence as f64,
            n_sc: self.n_sc(),
            p_sc_dbm,
            p_bs_mw: dbm_to_mw(p.p_bs_dbm),
            p_sc_mw: dbm_to_mw(p_sc_dbm),
            p_tau_mw: dbm_to_mw(p.p_tau_dbm),
            noise_mw: noise_power_mw(p.noise_dbm_per_hz, p.bandwidth_hz),
            sweep_variable: self.sweep_variable(),
            sweep_values: self.sweep_values(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.topology;
        let s = t.small_cells;
        if !(t.cell_radius_m > 0.0 && t.sc_ring_radius_m > 0.0 && t.sc_ring_radius_m <= t.cell_radius_m) {
            return config_err("radii must satisfy 0 < sc_ring_radius_m <= cell_radius_m");
        }
        if s > 0 && (self.pilot.gamma == 0 || s % self.pilot.gamma != 0) {
            return config_err(format!("γ must divide S (γ={}, S={s})", self.pilot.gamma));
        }
        let sc = &self.scheduling;
        if sc.k == 0 || (s > 0 && sc.l == 0) {
            return config_err("K and L must be at least 1");
        }
        if !(sc.kappa_bs > 0.0 && sc.kappa_sc > 0.0) {
            return config_err("bias factors must be positive");
        }
        if self.tau() >= self.pilot.coherence {
            return config_err(format!(
                "training length τ={} must be below T={}",
                self.tau(),
                self.pilot.coherence
            ));
        }
        if !(self.antennas.lambda > 0.0) {
            return config_err("λ must be positive");
        }
        if self.antennas.n_bs < 2 || (s > 0 && self.n_sc() < 2) {
            return config_err("need at least two antennas per node");
        }
        let p = &self.power;
        if ![p.p_bs_dbm, p.sc_offset_db, p.p_tau_dbm, p.noise_dbm_per_hz].iter().all(|v| v.is_finite())
            || !(p.bandwidth_hz > 0.0)
        {
            return config_err("powers must be finite and the bandwidth positive");
        }
        if self.mc.drops == 0 {
            return config_err("need at least one drop per sweep point");
        }
        if self.sweep.values.iter().any(|v| !v.is_finite()) {
            return config_err("sweep values must be finite");
        }
        if !(self.scaling.target_rate >= 0.0) {
            return config_err("target_rate must be nonnegative");
        }
        self.scaling.law.validate()
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    ExperimentConfig::from_toml(&text)
}
