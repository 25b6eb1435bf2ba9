//! Pilot reuse, uplink training and MMSE estimation.

use std::f64::consts::PI;

use rand::Rng;

use crate::channel::{draw_noise, CMat, ChannelDraw, C64};
use crate::error::{config_err, Result};
use crate::netgen::ScheduledLinks;

/// Co-pilot groups A_r = {r, r+γ, r+2γ, ...} over 0-based SC indices.
pub fn pilot_groups(s: usize, gamma: usize) -> Result<Vec<Vec<usize>>> {
    if gamma == 0 || gamma > s.max(1) {
        return config_err(format!("reuse factor γ={gamma} must lie in 1..=S (S={s})"));
    }
    if s % gamma != 0 {
        return config_err(format!("γ must divide S (γ={gamma}, S={s})"));
    }
    Ok((0..gamma.min(s)).map(|r| (r..s).step_by(gamma).collect()).collect())
}

/// Index of the pilot group that SC `m` belongs to.
pub fn group_of(m: usize, gamma: usize) -> usize {
    m % gamma
}

#[derive(Clone, Debug)]
pub struct PilotPlan {
    pub s: usize,
    pub k: usize,
    pub l: usize,
    pub gamma: usize,
    pub tau: usize,
    pub groups: Vec<Vec<usize>>,
    /// K × τ.
    pub pilot_mue: CMat,
    /// One L × τ block per group.
    pub pilot_sue: Vec<CMat>,
}

impl PilotPlan {
    pub fn group_of(&self, m: usize) -> usize {
        group_of(m, self.gamma)
    }

    /// Co-pilot SCs of `m`, including `m` itself.
    pub fn copilots(&self, m: usize) -> &[usize] {
        &self.groups[self.group_of(m)]
    }

    pub fn is_copilot(&self, n: usize, m: usize) -> bool {
        self.group_of(n) == self.group_of(m)
    }
}

/// Pilots for K MUEs and γ groups of L SUEs, taken as disjoint rows of the τ-point
/// unitary DFT, τ = K + Lγ. With S = 0 the SUE blocks are omitted.
pub fn build_pilots(k: usize, l: usize, s: usize, gamma: usize) -> Result<PilotPlan> {
    let groups = if s == 0 { Vec::new() } else { pilot_groups(s, gamma)? };
    let blocks = if s == 0 { 0 } else { gamma };
    let tau = k + l * blocks;
    if tau == 0 {
        return config_err("training length is zero");
    }
    let norm = 1.0 / (tau as f64).sqrt();
    let row = |r: usize| {
        move |_: usize, c: usize| C64::from_polar(norm, -2.0 * PI * ((r * c) % tau) as f64 / tau as f64)
    };
    let pilot_mue = CMat::from_fn(k, tau, |i, c| row(i)(0, c));
    let pilot_sue = (0..blocks)
        .map(|g| CMat::from_fn(l, tau, |j, c| row(k + g * l + j)(0, c)))
        .collect();
    Ok(PilotPlan { s, k, l, gamma, tau, groups, pilot_mue, pilot_sue })
}

/// Effective estimated gains β̂.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveGains {
    /// β̂_BM^(i).
    pub bm: Vec<f64>,
    /// β̂_SS^(n,m,j), `[n][m][j]`. Filled for co-pilot pairs (including n = m), zero elsewhere.
    pub ss: Vec<Vec<Vec<f64>>>,
}

impl EffectiveGains {
    pub fn own(&self, m: usize, j: usize) -> f64 {
        self.ss[m][m][j]
    }
}

/// Closed-form MMSE gains for the scheduled links.
pub fn beta_hat(
    links: &ScheduledLinks,
    plan: &PilotPlan,
    p_tau: f64,
    sigma0_sq: f64,
) -> Result<EffectiveGains> {
    if !(p_tau > 0.0) || sigma0_sq < 0.0 {
        return config_err("pilot power must be positive and noise nonnegative");
    }
    let tp = plan.tau as f64 * p_tau;
    let bm = links.beta_bm.iter().map(|&b| tp * b * b / (tp * b + sigma0_sq)).collect();
    let s = links.s();
    let ss = (0..s)
        .map(|n| {
            (0..s)
                .map(|m| {
                    (0..links.l(m))
                        .map(|j| {
                            if !plan.is_copilot(n, m) {
                                return 0.0;
                            }
                            let total: f64 = plan
                                .copilots(n)
                                .iter()
                                .filter(|&&l| links.l(l) > j)
                                .map(|&l| links.beta_ss[n][l][j])
                                .sum();
                            let b = links.beta_ss[n][m][j];
                            tp * b * b / (tp * total + sigma0_sq)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(EffectiveGains { bm, ss })
}

#[derive(Clone, Debug)]
pub struct TrainingSignals {
    /// N_BS × τ.
    pub y_bs: CMat,
    /// Per SC: N_SC × τ.
    pub y_sc: Vec<CMat>,
}

/// Uplink training reception at every node.
pub fn receive_training<R: Rng + ?Sized>(
    draw: &ChannelDraw,
    plan: &PilotPlan,
    p_tau: f64,
    sigma0_sq: f64,
    rng: &mut R,
) -> TrainingSignals {
    let amp = C64::new((plan.tau as f64 * p_tau).sqrt(), 0.0);
    let sue_pilot = |m: usize, cols: usize| plan.pilot_sue[plan.group_of(m)].rows(0, cols);

    let mut y_bs = &draw.g_bm * &plan.pilot_mue;
    for (m, g) in draw.g_bs.iter().enumerate() {
        y_bs += g * sue_pilot(m, g.ncols());
    }
    y_bs *= amp;
    y_bs += draw_noise(y_bs.nrows(), plan.tau, sigma0_sq, rng);

    let y_sc = draw
        .g_sm
        .iter()
        .enumerate()
        .map(|(n, g_sm)| {
            let mut y = g_sm * &plan.pilot_mue;
            for (m, g) in draw.g_ss[n].iter().enumerate() {
                y += g * sue_pilot(m, g.ncols());
            }
            y *= amp;
            y += draw_noise(y.nrows(), plan.tau, sigma0_sq, rng);
            y
        })
        .collect();
    TrainingSignals { y_bs, y_sc }
}

#[derive(Clone, Debug)]
pub struct ChannelEstimate {
    /// N_BS × K.
    pub g_hat_bm: CMat,
    /// Per SC m: N_SC × L_m, estimates of SC m → own SUEs.
    pub g_hat_ss: Vec<CMat>,
    pub gains: EffectiveGains,
}

/// MMSE estimates from the received training: despread with the own pilot block and
/// scale column `j` by β/(Σ_copilot β + σ0²/τp).
pub fn mmse_estimate(
    signals: &TrainingSignals,
    plan: &PilotPlan,
    links: &ScheduledLinks,
    p_tau: f64,
    sigma0_sq: f64,
) -> Result<ChannelEstimate> {
    let gains = beta_hat(links, plan, p_tau, sigma0_sq)?;
    let tp = plan.tau as f64 * p_tau;
    let inv_amp = 1.0 / tp.sqrt();
    let s_noise = sigma0_sq / tp;

    let mut g_hat_bm = &signals.y_bs * plan.pilot_mue.adjoint();
    for (i, &b) in links.beta_bm.iter().enumerate() {
        let mut col = g_hat_bm.column_mut(i);
        col *= C64::new(inv_amp * b / (b + s_noise), 0.0);
    }

    let g_hat_ss = (0..links.s())
        .map(|m| {
            let lm = links.l(m);
            let block = plan.pilot_sue[plan.group_of(m)].rows(0, lm);
            let mut g = &signals.y_sc[m] * block.adjoint();
            for j in 0..lm {
                let total: f64 = plan
                    .copilots(m)
                    .iter()
                    .filter(|&&l| links.l(l) > j)
                    .map(|&l| links.beta_ss[m][l][j])
                    .sum();
                let d = links.beta_ss[m][m][j] / (total + s_noise);
                let mut col = g.column_mut(j);
                col *= C64::new(inv_amp * d, 0.0);
            }
            g
        })
        .collect();
    Ok(ChannelEstimate { g_hat_bm, g_hat_ss, gains })
}
