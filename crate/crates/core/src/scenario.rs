//! A fully specified downlink instance: scheduled links, pilots, powers and antennas.

use crate::error::{config_err, Result};
use crate::netgen::ScheduledLinks;
use crate::training::PilotPlan;

/// Linear powers in mW.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerConfig {
    pub p_bs: f64,
    /// One entry per small cell.
    pub p_sc: Vec<f64>,
    pub p_tau: f64,
    pub sigma0_sq: f64,
}

impl PowerConfig {
    pub fn uniform(p_bs: f64, p_sc: f64, s: usize, p_tau: f64, sigma0_sq: f64) -> Self {
        PowerConfig { p_bs, p_sc: vec![p_sc; s], p_tau, sigma0_sq }
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub links: ScheduledLinks,
    pub plan: PilotPlan,
    pub powers: PowerConfig,
    pub n_bs: usize,
    pub n_sc: usize,
}

impl Scenario {
    pub fn new(
        links: ScheduledLinks,
        plan: PilotPlan,
        powers: PowerConfig,
        n_bs: usize,
        n_sc: usize,
    ) -> Result<Self> {
        if links.s() != plan.s || powers.p_sc.len() != links.s() {
            return config_err("small-cell count differs between links, pilots and powers");
        }
        if links.k() > plan.k || links.beta_bs.iter().any(|c| c.len() > plan.l) {
            return config_err("more scheduled users than pilot sequences");
        }
        if n_bs < 2 || (links.s() > 0 && n_sc < 2) {
            return config_err("need at least two antennas per node");
        }
        Ok(Scenario { links, plan, powers, n_bs, n_sc })
    }

    /// (T − τ)/T.
    pub fn prelog(&self, coherence: usize) -> Result<f64> {
        prelog(coherence, self.plan.tau)
    }
}

pub fn prelog(coherence: usize, tau: usize) -> Result<f64> {
    if tau >= coherence {
        return config_err(format!("training length τ={tau} must be below T={coherence}"));
    }
    Ok((coherence - tau) as f64 / coherence as f64)
}
