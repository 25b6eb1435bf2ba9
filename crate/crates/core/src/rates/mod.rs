//! Per-user rates: Monte-Carlo, closed-form bounds, asymptotic limits and required power.

pub mod asymptotic;
pub mod bounds;
pub mod mc;
pub mod power;

pub use asymptotic::{asymptotic_rates, AsymptoticRates, LawCase, Limit, ScalingLaw};
pub use bounds::{bound, bound_mrt, bound_zft, BoundReport, CopilotMoment, UserValues};
pub use mc::{mc_rates, mc_rates_multi, Estimate, McRates};
pub use power::{required_power, PowerProblem, RequiredPower};

use crate::error::Result;
use crate::precoder::PrecoderKind;
use crate::scenario::{prelog, Scenario};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UserRate {
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub bound: f64,
    pub asymptotic: Option<Limit>,
}

#[derive(Clone, Debug)]
pub struct RateReport {
    pub kind: PrecoderKind,
    pub mue_rates: Vec<UserRate>,
    pub sue_rates: Vec<Vec<UserRate>>,
    pub prelog: f64,
}

impl RateReport {
    pub fn assemble(mc: &McRates, bounds: &BoundReport, prelog: f64) -> Self {
        let user = |e: &Estimate, b: f64| UserRate {
            mc_mean: e.mean,
            mc_stderr: e.stderr,
            bound: b,
            asymptotic: None,
        };
        RateReport {
            kind: mc.kind,
            mue_rates: mc.mue.iter().zip(&bounds.rates.mue).map(|(e, &b)| user(e, b)).collect(),
            sue_rates: mc
                .sue
                .iter()
                .zip(&bounds.rates.sue)
                .map(|(c, bc)| c.iter().zip(bc).map(|(e, &b)| user(e, b)).collect())
                .collect(),
            prelog,
        }
    }

    pub fn users(&self) -> impl Iterator<Item = &UserRate> {
        self.mue_rates.iter().chain(self.sue_rates.iter().flatten())
    }

    pub fn spectral_efficiency_mc(&self) -> f64 {
        self.prelog * self.users().map(|u| u.mc_mean).sum::<f64>()
    }

    pub fn spectral_efficiency_bound(&self) -> f64 {
        self.prelog * self.users().map(|u| u.bound).sum::<f64>()
    }

    /// Mean SUE rate (MC, bound); NaN without SUEs.
    pub fn boundary_user_rate(&self) -> (f64, f64) {
        let sues: Vec<&UserRate> = self.sue_rates.iter().flatten().collect();
        let n = sues.len() as f64;
        (
            sues.iter().map(|u| u.mc_mean).sum::<f64>() / n,
            sues.iter().map(|u| u.bound).sum::<f64>() / n,
        )
    }
}

/// (T − τ)/T × Σ rates.
pub fn spectral_efficiency(rates: &[f64], coherence: usize, tau: usize) -> Result<f64> {
    Ok(prelog(coherence, tau)? * rates.iter().sum::<f64>())
}

/// MC and bound evaluation of one scenario for several precoders.
pub fn rate_reports(
    sc: &Scenario,
    kinds: &[PrecoderKind],
    trials: usize,
    seed: u64,
    path: &[u64],
    coherence: usize,
) -> Result<Vec<RateReport>> {
    let factor = sc.prelog(coherence)?;
    let mc = mc_rates_multi(sc, kinds, trials, seed, path)?;
    kinds
        .iter()
        .zip(&mc)
        .map(|(&k, m)| Ok(RateReport::assemble(m, &bound(k, sc)?, factor)))
        .collect()
}
