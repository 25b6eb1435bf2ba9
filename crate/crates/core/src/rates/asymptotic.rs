//! Large-array limits under power scaling laws.
//!
//! With N_SC → ∞, N_BS = λ·N_SC and powers p_τ = E_τ/N_SC^θ, p_SC = E_SC/N_SC^χ,
//! p_BS = E_BS/N_BS^η, every term of the coefficient-form SINR behaves as c·N_SC^q.
//! The limit is read off by comparing the signal order with the dominant
//! interference order.

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::netgen::ScheduledLinks;
use crate::precoder::PrecoderKind;
use crate::scenario::PowerConfig;
use crate::training::{beta_hat, PilotPlan};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LawCase {
    /// Fixed pilot power.
    I,
    /// Pilot power scaled down as E_τ/N_SC^θ.
    II,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingLaw {
    pub case: LawCase,
    pub theta: f64,
    pub chi: f64,
    pub eta: f64,
    pub e_tau: f64,
    pub e_bs: f64,
    pub e_sc: f64,
    pub lambda: f64,
}

impl Default for ScalingLaw {
    fn default() -> Self {
        ScalingLaw {
            case: LawCase::I,
            theta: 0.0,
            chi: 1.0,
            eta: 1.0,
            e_tau: 1.0,
            e_bs: 1.0,
            e_sc: 1.0,
            lambda: 10.0,
        }
    }
}

impl ScalingLaw {
    pub fn case_one(chi: f64, eta: f64, lambda: f64) -> Self {
        ScalingLaw { chi, eta, lambda, ..Default::default() }
    }

    pub fn case_two(theta: f64, chi: f64, eta: f64, lambda: f64) -> Self {
        ScalingLaw { case: LawCase::II, theta, chi, eta, lambda, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 1.0) || !self.lambda.is_finite() {
            return config_err(format!("λ must be at least 1, got {}", self.lambda));
        }
        if !(self.e_tau > 0.0 && self.e_bs > 0.0 && self.e_sc > 0.0) {
            return config_err("scaling-law energies must be positive");
        }
        if ![self.theta, self.chi, self.eta].iter().all(|x| x.is_finite()) {
            return config_err("scaling exponents must be finite");
        }
        if self.case == LawCase::II && !(self.theta > 0.0) {
            return config_err("case II needs θ > 0");
        }
        Ok(())
    }

    /// θ with case I read as θ = 0.
    pub fn theta(&self) -> f64 {
        match self.case {
            LawCase::I => 0.0,
            LawCase::II => self.theta,
        }
    }

    pub fn n_bs(&self, n_sc: usize) -> usize {
        (self.lambda * n_sc as f64).round() as usize
    }

    pub fn powers(&self, n_sc: usize, s: usize, sigma0_sq: f64) -> PowerConfig {
        let n = n_sc as f64;
        PowerConfig::uniform(
            self.e_bs / (self.n_bs(n_sc) as f64).powf(self.eta),
            self.e_sc / n.powf(self.chi),
            s,
            self.e_tau / n.powf(self.theta()),
            sigma0_sq,
        )
    }
}

/// Limiting rate of one user.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Limit {
    Finite(f64),
    Divergent,
    Vanishing,
}

impl Limit {
    pub fn value(self) -> f64 {
        match self {
            Limit::Finite(v) => v,
            Limit::Divergent => f64::INFINITY,
            Limit::Vanishing => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticRates {
    pub mue: Vec<Limit>,
    pub sue: Vec<Vec<Limit>>,
}

/// c·N_SC^q.
#[derive(Clone, Copy, Debug)]
struct Term {
    coef: f64,
    order: f64,
}

const ORDER_EPS: f64 = 1e-9;

fn limit_of(signal: Term, interference: &[Term]) -> Limit {
    if !(signal.coef > 0.0) {
        return Limit::Vanishing;
    }
    let live: Vec<&Term> = interference.iter().filter(|t| t.coef > 0.0).collect();
    let Some(top) = live.iter().map(|t| t.order).reduce(f64::max) else {
        return Limit::Divergent;
    };
    let gap = signal.order - top;
    if gap > ORDER_EPS {
        Limit::Divergent
    } else if gap < -ORDER_EPS {
        Limit::Vanishing
    } else {
        let den: f64 = live.iter().filter(|t| (t.order - top).abs() <= ORDER_EPS).map(|t| t.coef).sum();
        Limit::Finite((1.0 + signal.coef / den).log2())
    }
}

pub fn asymptotic_rates(
    links: &ScheduledLinks,
    plan: &PilotPlan,
    law: &ScalingLaw,
    kind: PrecoderKind,
    sigma0_sq: f64,
) -> Result<AsymptoticRates> {
    law.validate()?;
    let t = law.theta();
    let pilot_scaled = law.case == LawCase::II;
    if pilot_scaled && !(sigma0_sq > 0.0) {
        return config_err("case II limits need positive noise power");
    }
    let tau = plan.tau as f64;
    // β̂ leading coefficients: exact with fixed pilots, τE_τβ²/σ0² when β̂ decays as N^−θ
    let exact = beta_hat(links, plan, law.e_tau, sigma0_sq)?;
    let lead = |beta: f64, hat: f64| {
        if pilot_scaled { tau * law.e_tau * beta * beta / sigma0_sq } else { hat }
    };
    // residual own-node interference coefficient
    let residual = |beta: f64, hat: f64, sum: f64| match (kind, pilot_scaled) {
        (_, true) => beta,
        (PrecoderKind::Mrt, false) => beta - hat * hat / sum,
        (PrecoderKind::Zft, false) => beta - hat,
    };
    let s = links.s();
    let lam = law.lambda;
    let noise = Term { coef: sigma0_sq, order: 0.0 };

    let h_bm: Vec<f64> =
        links.beta_bm.iter().zip(&exact.bm).map(|(&b, &h)| lead(b, h)).collect();
    let h_own: Vec<Vec<f64>> = (0..s)
        .map(|m| (0..links.l(m)).map(|j| lead(links.beta_ss[m][m][j], exact.own(m, j))).collect())
        .collect();
    let node_sum = |h: &[f64]| match kind {
        PrecoderKind::Mrt => h.iter().sum::<f64>(),
        PrecoderKind::Zft => h.iter().map(|x| 1.0 / x).sum::<f64>(),
    };
    let gain = |h: f64, sum: f64| match kind {
        PrecoderKind::Mrt => h * h / sum,
        PrecoderKind::Zft => 1.0 / sum,
    };
    let active = |n: usize| links.l(n) > 0;
    let sum_bs = node_sum(&h_bm);
    let sum_sc: Vec<f64> = h_own.iter().map(|h| node_sum(h)).collect();

    let mue = (0..links.k())
        .map(|i| {
            let signal = Term {
                coef: law.e_bs * lam.powf(1.0 - law.eta) * gain(h_bm[i], sum_bs),
                order: 1.0 - law.eta - t,
            };
            let own = Term {
                coef: law.e_bs
                    * lam.powf(-law.eta)
                    * residual(links.beta_bm[i], exact.bm[i], exact.bm.iter().sum()),
                order: -law.eta,
            };
            let cti = Term {
                coef: law.e_sc * (0..s).filter(|&n| active(n)).map(|n| links.beta_sm[n][i]).sum::<f64>(),
                order: -law.chi,
            };
            limit_of(signal, &[own, cti, noise])
        })
        .collect();

    let sue = (0..s)
        .map(|m| {
            (0..links.l(m))
                .map(|j| {
                    let copilots: Vec<usize> = plan
                        .copilots(m)
                        .iter()
                        .copied()
                        .filter(|&n| n != m && links.l(n) > j)
                        .collect();
                    if pilot_scaled && !copilots.is_empty() {
                        return Limit::Vanishing;
                    }
                    let signal = Term {
                        coef: law.e_sc * gain(h_own[m][j], sum_sc[m]),
                        order: 1.0 - law.chi - t,
                    };
                    let own_exact: f64 = (0..links.l(m)).map(|l| exact.own(m, l)).sum();
                    let own = Term {
                        coef: law.e_sc * residual(links.beta_ss[m][m][j], exact.own(m, j), own_exact),
                        order: -law.chi,
                    };
                    let inter = Term {
                        coef: law.e_sc
                            * (0..s)
                                .filter(|&n| n != m && active(n))
                                .map(|n| links.beta_ss[n][m][j])
                                .sum::<f64>(),
                        order: -law.chi,
                    };
                    let contamination = Term {
                        coef: law.e_sc
                            * copilots
                                .iter()
                                .map(|&n| {
                                    let r = links.beta_ss[n][m][j] / links.beta_ss[n][n][j];
                                    r * r * match kind {
                                        PrecoderKind::Mrt => h_own[n][j] * h_own[n][j] / sum_sc[n],
                                        PrecoderKind::Zft => 1.0 / sum_sc[n],
                                    }
                                })
                                .sum::<f64>(),
                        order: 1.0 - law.chi - t,
                    };
                    let cti = Term {
                        coef: if links.k() > 0 {
                            law.e_bs * lam.powf(-law.eta) * links.beta_bs[m][j]
                        } else {
                            0.0
                        },
                        order: -law.eta,
                    };
                    limit_of(signal, &[own, inter, contamination, cti, noise])
                })
                .collect()
        })
        .collect();
    Ok(AsymptoticRates { mue, sue })
}
