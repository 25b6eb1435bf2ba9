//! Closed-form ergodic-rate lower bounds log2(1 + 1/E[1/SINR]).
//!
//! Two independent evaluations are kept. The moment path writes every interference
//! term as an expectation over the estimated channels and is the one reported.
//! The coefficient path evaluates the a..f coefficient forms and only serves as a
//! cross-check. Both use `zf_dof` for the inverse-Wishart mean.

use crate::error::{config_err, Result};
use crate::precoder::{zf_dof, PrecoderKind};
use crate::scenario::Scenario;
use crate::training::{beta_hat, EffectiveGains};

/// Per-user values: MUEs, then SUEs per small cell.
#[derive(Clone, Debug, PartialEq)]
pub struct UserValues {
    pub mue: Vec<f64>,
    pub sue: Vec<Vec<f64>>,
}

impl UserValues {
    pub fn flatten(&self) -> Vec<f64> {
        self.mue.iter().chain(self.sue.iter().flatten()).copied().collect()
    }

    pub fn sum(&self) -> f64 {
        self.flatten().iter().sum()
    }

    pub fn max_abs_diff(&self, other: &UserValues) -> f64 {
        self.flatten()
            .iter()
            .zip(other.flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Second moment of the co-pilot small-cell interference, per unit α².
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CopilotMoment {
    /// MRT: N²·β̂^(n,m,j)·β̂^(n,n,j). ZFT: r² − β̂^(n,m,j)·Ψ/(N−L), r = β^(n,m,j)/β^(n,n,j).
    Exact,
    /// Published closed forms. MRT: N²·β^(n,m,j)·β̂^(n,m,j). ZFT: r² − β^(n,m,j)/((N−L)·β̂^(n,n,j)).
    Published,
}

#[derive(Clone, Debug)]
pub struct BoundReport {
    pub kind: PrecoderKind,
    /// Moment-path bounds in bit/s/Hz.
    pub rates: UserValues,
    /// Coefficient-path bounds in bit/s/Hz.
    pub coefficient_rates: UserValues,
    /// Largest |moment − coefficient| over users.
    pub path_gap: f64,
}

pub fn bound(kind: PrecoderKind, sc: &Scenario) -> Result<BoundReport> {
    let gains = beta_hat(&sc.links, &sc.plan, sc.powers.p_tau, sc.powers.sigma0_sq)?;
    bound_with_gains(kind, sc, &gains)
}

pub fn bound_mrt(sc: &Scenario) -> Result<BoundReport> {
    bound(PrecoderKind::Mrt, sc)
}

pub fn bound_zft(sc: &Scenario) -> Result<BoundReport> {
    bound(PrecoderKind::Zft, sc)
}

pub fn bound_with_gains(
    kind: PrecoderKind,
    sc: &Scenario,
    gains: &EffectiveGains,
) -> Result<BoundReport> {
    let (rates, coefficient_rates) = match kind {
        PrecoderKind::Mrt => (
            moment_mrt(sc, gains, CopilotMoment::Exact),
            coefficient_mrt(sc, gains),
        ),
        PrecoderKind::Zft => {
            check_zf_dims(sc)?;
            (moment_zft(sc, gains, CopilotMoment::Exact), coefficient_zft(sc, gains))
        }
    };
    let path_gap = rates.max_abs_diff(&coefficient_rates);
    if path_gap > 1e-10 {
        log::debug!("{} bound paths differ by {path_gap:.3e}", kind.name());
    }
    Ok(BoundReport { kind, rates, coefficient_rates, path_gap })
}

fn check_zf_dims(sc: &Scenario) -> Result<()> {
    let k = sc.links.k();
    if k > 0 && sc.n_bs < k + 2 {
        return config_err(format!("zero-forcing needs N_BS >= K + 2 (N_BS={}, K={k})", sc.n_bs));
    }
    let l = sc.links.l_max();
    if l > 0 && sc.n_sc < l + 2 {
        return config_err(format!("zero-forcing needs N_SC >= L + 2 (N_SC={}, L={l})", sc.n_sc));
    }
    Ok(())
}

fn rate(inv_sinr: f64) -> f64 {
    if inv_sinr.is_finite() { (1.0 + 1.0 / inv_sinr).log2() } else { 0.0 }
}

/// Node-level sums and normalization constants shared by both paths.
pub(crate) struct NodeStats {
    /// Σβ̂ (MRT) or Σ1/β̂ (ZFT) per node; index 0 is the BS, 1 + m is SC m.
    pub(crate) sum: Vec<f64>,
    /// α² per node; zero for silent nodes.
    pub(crate) alpha_sq: Vec<f64>,
}

pub(crate) fn node_stats(kind: PrecoderKind, sc: &Scenario, gains: &EffectiveGains) -> NodeStats {
    let s = sc.links.s();
    let mut sum = Vec::with_capacity(s + 1);
    let mut alpha_sq = Vec::with_capacity(s + 1);
    let mut push = |hats: Vec<f64>, n: usize, p: f64| {
        let users = hats.len();
        let (total, a2) = match kind {
            PrecoderKind::Mrt => {
                let phi: f64 = hats.iter().sum();
                (phi, if users > 0 { p / (n as f64 * phi) } else { 0.0 })
            }
            PrecoderKind::Zft => {
                let psi: f64 = hats.iter().map(|b| 1.0 / b).sum();
                (psi, if users > 0 { zf_dof(n, users) * p / psi } else { 0.0 })
            }
        };
        sum.push(total);
        alpha_sq.push(a2);
    };
    push(gains.bm.clone(), sc.n_bs, sc.powers.p_bs);
    for m in 0..s {
        push((0..sc.links.l(m)).map(|j| gains.own(m, j)).collect(), sc.n_sc, sc.powers.p_sc[m]);
    }
    NodeStats { sum, alpha_sq }
}

/// Expected inter-small-cell interference at SUE (m, j), including the pilot
/// contamination contribution of co-pilot cells.
pub fn expected_ssi(
    kind: PrecoderKind,
    sc: &Scenario,
    gains: &EffectiveGains,
    moment: CopilotMoment,
) -> Vec<Vec<f64>> {
    let st = node_stats(kind, sc, gains);
    let links = &sc.links;
    (0..links.s())
        .map(|m| (0..links.l(m)).map(|j| ssi_term(kind, sc, gains, &st, m, j, moment)).collect())
        .collect()
}

fn ssi_term(
    kind: PrecoderKind,
    sc: &Scenario,
    gains: &EffectiveGains,
    st: &NodeStats,
    m: usize,
    j: usize,
    moment: CopilotMoment,
) -> f64 {
    let links = &sc.links;
    let n_sc = sc.n_sc as f64;
    let mut total = 0.0;
    for n in (0..links.s()).filter(|&n| n != m && links.l(n) > 0) {
        let b = links.beta_ss[n][m][j];
        let a2 = st.alpha_sq[1 + n];
        let dof = zf_dof(sc.n_sc, links.l(n));
        // α²·N·Φ·β (MRT) and α²·Ψ·β/(N−L) (ZFT) both reduce to p·β
        total += sc.powers.p_sc[n] * b;
        if sc.plan.is_copilot(n, m) && links.l(n) > j {
            let hat_nm = gains.ss[n][m][j];
            let hat_nn = gains.own(n, j);
            let ratio = b / links.beta_ss[n][n][j];
            total += a2
                * match (kind, moment) {
                    (PrecoderKind::Mrt, CopilotMoment::Exact) => n_sc * n_sc * hat_nm * hat_nn,
                    (PrecoderKind::Mrt, CopilotMoment::Published) => n_sc * n_sc * b * hat_nm,
                    (PrecoderKind::Zft, CopilotMoment::Exact) => {
                        ratio * ratio - hat_nm * st.sum[1 + n] / dof
                    }
                    (PrecoderKind::Zft, CopilotMoment::Published) => {
                        ratio * ratio - b / (dof * hat_nn)
                    }
                };
        }
    }
    total
}

/// Expected cross-tier interference at MUE i from all active small cells. For both
/// precoders E[Σ_l |gᵀw_l|²] = p·β for a channel independent of the node's estimates.
fn cti_mue(sc: &Scenario, i: usize) -> f64 {
    let links = &sc.links;
    (0..links.s())
        .filter(|&n| links.l(n) > 0)
        .map(|n| sc.powers.p_sc[n] * links.beta_sm[n][i])
        .sum()
}

/// Expected cross-tier interference at SUE (m, j) from the BS.
fn cti_sue(sc: &Scenario, m: usize, j: usize) -> f64 {
    if sc.links.k() == 0 {
        return 0.0;
    }
    sc.powers.p_bs * sc.links.beta_bs[m][j]
}

/// E[1/SINR] for an MRT user with N antennas, own gains (β, β̂), the sum of the
/// other co-scheduled β̂ and the expected out-of-cell interference plus noise.
fn mrt_inverse_sinr(n: usize, beta: f64, hat: f64, others: f64, a2: f64, outside: f64) -> f64 {
    if n <= 2 {
        return f64::INFINITY;
    }
    let n = n as f64;
    let xi = beta - hat;
    let inv_norm2 = 1.0 / ((n - 1.0) * hat);
    let inv_norm4 = 1.0 / ((n - 1.0) * (n - 2.0) * hat * hat);
    xi * inv_norm2 + others * inv_norm2 + n * xi * others * inv_norm4 + outside * inv_norm4 / a2
}

pub fn moment_mrt(sc: &Scenario, gains: &EffectiveGains, moment: CopilotMoment) -> UserValues {
    let kind = PrecoderKind::Mrt;
    let st = node_stats(kind, sc, gains);
    let links = &sc.links;
    let noise = sc.powers.sigma0_sq;
    let mue = (0..links.k())
        .map(|i| {
            let hat = gains.bm[i];
            let outside = cti_mue(sc, i) + noise;
            rate(mrt_inverse_sinr(
                sc.n_bs,
                links.beta_bm[i],
                hat,
                st.sum[0] - hat,
                st.alpha_sq[0],
                outside,
            ))
        })
        .collect();
    let sue = (0..links.s())
        .map(|m| {
            (0..links.l(m))
                .map(|j| {
                    let hat = gains.own(m, j);
                    let outside = cti_sue(sc, m, j)
                        + ssi_term(kind, sc, gains, &st, m, j, moment)
                        + noise;
                    rate(mrt_inverse_sinr(
                        sc.n_sc,
                        links.beta_ss[m][m][j],
                        hat,
                        st.sum[1 + m] - hat,
                        st.alpha_sq[1 + m],
                        outside,
                    ))
                })
                .collect()
        })
        .collect();
    UserValues { mue, sue }
}

pub fn moment_zft(sc: &Scenario, gains: &EffectiveGains, moment: CopilotMoment) -> UserValues {
    let kind = PrecoderKind::Zft;
    let st = node_stats(kind, sc, gains);
    let links = &sc.links;
    let noise = sc.powers.sigma0_sq;
    let k = links.k();
    let mue = (0..k)
        .map(|i| {
            let a2 = st.alpha_sq[0];
            let xi = links.beta_bm[i] - gains.bm[i];
            let own = a2 * xi * st.sum[0] / zf_dof(sc.n_bs, k);
            rate((own + cti_mue(sc, i) + noise) / a2)
        })
        .collect();
    let sue = (0..links.s())
        .map(|m| {
            let lm = links.l(m);
            (0..lm)
                .map(|j| {
                    let a2 = st.alpha_sq[1 + m];
                    let xi = links.beta_ss[m][m][j] - gains.own(m, j);
                    let own = a2 * xi * st.sum[1 + m] / zf_dof(sc.n_sc, lm);
                    let outside = cti_sue(sc, m, j)
                        + ssi_term(kind, sc, gains, &st, m, j, moment);
                    rate((own + outside + noise) / a2)
                })
                .collect()
        })
        .collect();
    UserValues { mue, sue }
}

/// SINR = a·p_own / (b·p_own + Σ c·p_other + σ0²) with the coefficient forms.
fn coefficient_rate(a: f64, b: f64, p_own: f64, others: f64, noise: f64) -> f64 {
    let num = a * p_own;
    if !(num > 0.0) {
        return 0.0;
    }
    (1.0 + num / (b * p_own + others + noise)).log2()
}

pub fn coefficient_mrt(sc: &Scenario, gains: &EffectiveGains) -> UserValues {
    let st = node_stats(PrecoderKind::Mrt, sc, gains);
    let links = &sc.links;
    let pw = &sc.powers;
    let active = |n: usize| links.l(n) > 0;
    // a and b share one shape for MUEs and for the own-cell part of SUEs
    let ab = |n_ant: usize, beta: f64, hat: f64, phi: f64| {
        let n = n_ant as f64;
        let a = (n - 1.0) * (n - 2.0) * hat * hat / (n * phi);
        let b = beta - 2.0 * hat / n - ((n - 4.0) * hat * hat + 2.0 * beta * hat) / (n * phi);
        (a, b)
    };
    let mue = (0..links.k())
        .map(|i| {
            let (a, b) = ab(sc.n_bs, links.beta_bm[i], gains.bm[i], st.sum[0]);
            let cti: f64 = (0..links.s())
                .filter(|&n| active(n))
                .map(|n| links.beta_sm[n][i] * pw.p_sc[n])
                .sum();
            coefficient_rate(a, b, pw.p_bs, cti, pw.sigma0_sq)
        })
        .collect();
    let sue = (0..links.s())
        .map(|m| {
            (0..links.l(m))
                .map(|j| {
                    let hat = gains.own(m, j);
                    let (d, e_own) = ab(sc.n_sc, links.beta_ss[m][m][j], hat, st.sum[1 + m]);
                    let mut others = 0.0;
                    for n in (0..links.s()).filter(|&n| n != m && active(n)) {
                        let b = links.beta_ss[n][m][j];
                        let mut e = b;
                        if sc.plan.is_copilot(n, m) && links.l(n) > j {
                            let bnn = links.beta_ss[n][n][j];
                            let hnn = gains.own(n, j);
                            e += sc.n_sc as f64 * b * b * hnn * hnn / (bnn * bnn * st.sum[1 + n]);
                        }
                        others += e * pw.p_sc[n];
                    }
                    if links.k() > 0 {
                        others += links.beta_bs[m][j] * pw.p_bs;
                    }
                    coefficient_rate(d, e_own, pw.p_sc[m], others, pw.sigma0_sq)
                })
                .collect()
        })
        .collect();
    UserValues { mue, sue }
}

pub fn coefficient_zft(sc: &Scenario, gains: &EffectiveGains) -> UserValues {
    let st = node_stats(PrecoderKind::Zft, sc, gains);
    let links = &sc.links;
    let pw = &sc.powers;
    let k = links.k();
    let active = |n: usize| links.l(n) > 0;
    let mue = (0..k)
        .map(|i| {
            let a = zf_dof(sc.n_bs, k) / st.sum[0];
            let b = links.beta_bm[i] - gains.bm[i];
            let cti: f64 = (0..links.s())
                .filter(|&n| active(n))
                .map(|n| links.beta_sm[n][i] * pw.p_sc[n])
                .sum();
            coefficient_rate(a, b, pw.p_bs, cti, pw.sigma0_sq)
        })
        .collect();
    let sue = (0..links.s())
        .map(|m| {
            let lm = links.l(m);
            (0..lm)
                .map(|j| {
                    let d = zf_dof(sc.n_sc, lm) / st.sum[1 + m];
                    let e_own = links.beta_ss[m][m][j] - gains.own(m, j);
                    let mut others = 0.0;
                    for n in (0..links.s()).filter(|&n| n != m && active(n)) {
                        let b = links.beta_ss[n][m][j];
                        let mut e = b;
                        if sc.plan.is_copilot(n, m) && links.l(n) > j {
                            let bnn = links.beta_ss[n][n][j];
                            let hnn = gains.own(n, j);
                            let psi = st.sum[1 + n];
                            let dof = zf_dof(sc.n_sc, links.l(n));
                            e += -b / (psi * hnn) + dof * b * b / (psi * bnn * bnn);
                        }
                        others += e * pw.p_sc[n];
                    }
                    if k > 0 {
                        others += links.beta_bs[m][j] * pw.p_bs;
                    }
                    coefficient_rate(d, e_own, pw.p_sc[m], others, pw.sigma0_sq)
                })
                .collect()
        })
        .collect();
    UserValues { mue, sue }
}
