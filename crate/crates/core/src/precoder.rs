//! MRT and zero-forcing precoders with statistical power normalization.

use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};

use crate::channel::{CMat, C64};
use crate::error::{config_err, Error, Result};
use crate::scenario::PowerConfig;
use crate::training::ChannelEstimate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecoderKind {
    Mrt,
    Zft,
}

impl PrecoderKind {
    pub const ALL: [PrecoderKind; 2] = [PrecoderKind::Mrt, PrecoderKind::Zft];

    pub fn name(self) -> &'static str {
        match self {
            PrecoderKind::Mrt => "mrt",
            PrecoderKind::Zft => "zft",
        }
    }
}

/// Mean of tr{(ĜᴴĜ)⁻¹}·(N−K)/Ψ for complex Gaussian Ĝ with N rows and K columns.
pub fn zf_dof(n: usize, k: usize) -> f64 {
    n as f64 - k as f64
}

#[derive(Clone, Debug)]
pub struct Precoder {
    pub kind: PrecoderKind,
    /// N_BS × K.
    pub w_bs: CMat,
    /// Per SC: N_SC × L_m.
    pub w_sc: Vec<CMat>,
    pub alpha_bs: f64,
    pub alpha_sc: Vec<f64>,
    /// Gram condition numbers (ZFT only).
    pub cond_bs: Option<f64>,
    pub cond_sc: Vec<Option<f64>>,
}

pub fn build(kind: PrecoderKind, est: &ChannelEstimate, powers: &PowerConfig) -> Result<Precoder> {
    match kind {
        PrecoderKind::Mrt => mrt(est, powers),
        PrecoderKind::Zft => zft(est, powers),
    }
}

fn mrt_node(g_hat: &CMat, beta_hat: &[f64], p: f64) -> Result<(CMat, f64)> {
    if g_hat.ncols() == 0 {
        return Ok((g_hat.clone(), 0.0));
    }
    let phi: f64 = beta_hat.iter().sum();
    if !(phi > 0.0) {
        return Err(Error::Degenerate("all effective gains are zero".into()));
    }
    let alpha = (p / (g_hat.nrows() as f64 * phi)).sqrt();
    Ok((g_hat.conjugate() * C64::new(alpha, 0.0), alpha))
}

/// W = α·Ĝ*, α = √(p/(N·Σβ̂)).
pub fn mrt(est: &ChannelEstimate, powers: &PowerConfig) -> Result<Precoder> {
    let (w_bs, alpha_bs) = mrt_node(&est.g_hat_bm, &est.gains.bm, powers.p_bs)?;
    let mut w_sc = Vec::with_capacity(est.g_hat_ss.len());
    let mut alpha_sc = Vec::with_capacity(est.g_hat_ss.len());
    for (m, g) in est.g_hat_ss.iter().enumerate() {
        let own: Vec<f64> = (0..g.ncols()).map(|j| est.gains.own(m, j)).collect();
        let (w, a) = mrt_node(g, &own, powers.p_sc[m])?;
        w_sc.push(w);
        alpha_sc.push(a);
    }
    let s = w_sc.len();
    Ok(Precoder {
        kind: PrecoderKind::Mrt,
        w_bs,
        w_sc,
        alpha_bs,
        alpha_sc,
        cond_bs: None,
        cond_sc: vec![None; s],
    })
}

/// Condition number of the Hermitian Gram matrix.
pub fn gram_condition(gram: &CMat) -> f64 {
    let ev = gram.clone().symmetric_eigenvalues();
    let max = ev.iter().cloned().fold(f64::MIN, f64::max);
    let min = ev.iter().cloned().fold(f64::MAX, f64::min);
    if min <= 0.0 { f64::INFINITY } else { max / min }
}

/// `conj(Ĝ(ĜᴴĜ)⁻¹)` via a Cholesky solve, plus the Gram condition number.
pub fn zf_directions(g_hat: &CMat) -> Result<(CMat, f64)> {
    let gram = g_hat.adjoint() * g_hat;
    let cond = gram_condition(&gram);
    if !cond.is_finite() || cond > 1e14 {
        return Err(Error::Singular { cond });
    }
    let chol = Cholesky::new(gram).ok_or(Error::Singular { cond })?;
    Ok((chol.solve(&g_hat.adjoint()).transpose(), cond))
}

fn zft_node(g_hat: &CMat, beta_hat: &[f64], p: f64) -> Result<(CMat, f64, Option<f64>)> {
    let (n, k) = g_hat.shape();
    if k == 0 {
        return Ok((g_hat.clone(), 0.0, None));
    }
    if n < k + 2 {
        return config_err(format!("zero-forcing needs N >= K + 2 (N={n}, K={k})"));
    }
    if beta_hat.iter().any(|&b| !(b > 0.0)) {
        return Err(Error::Degenerate("zero effective gain under zero-forcing".into()));
    }
    let psi: f64 = beta_hat.iter().map(|b| 1.0 / b).sum();
    let alpha = (zf_dof(n, k) * p / psi).sqrt();
    let (dirs, cond) = zf_directions(g_hat)?;
    Ok((dirs * C64::new(alpha, 0.0), alpha, Some(cond)))
}

/// W = α·Ĝ*(ĜᵀĜ*)⁻¹, α = √((N−K)p/Σ(1/β̂)).
pub fn zft(est: &ChannelEstimate, powers: &PowerConfig) -> Result<Precoder> {
    let (w_bs, alpha_bs, cond_bs) = zft_node(&est.g_hat_bm, &est.gains.bm, powers.p_bs)?;
    let mut w_sc = Vec::new();
    let mut alpha_sc = Vec::new();
    let mut cond_sc = Vec::new();
    for (m, g) in est.g_hat_ss.iter().enumerate() {
        let own: Vec<f64> = (0..g.ncols()).map(|j| est.gains.own(m, j)).collect();
        let (w, a, c) = zft_node(g, &own, powers.p_sc[m])?;
        w_sc.push(w);
        alpha_sc.push(a);
        cond_sc.push(c);
    }
    Ok(Precoder { kind: PrecoderKind::Zft, w_bs, w_sc, alpha_bs, alpha_sc, cond_bs, cond_sc })
}
