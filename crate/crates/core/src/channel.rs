//! Small-scale Rayleigh fading and AWGN.

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{config_err, Result};
use crate::netgen::ScheduledLinks;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

/// One CN(0, var) sample.
pub fn cn<R: Rng + ?Sized>(var: f64, rng: &mut R) -> C64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(s * re, s * im)
}

/// `rows × betas.len()` matrix whose column `j` has i.i.d. CN(0, betas[j]) entries.
pub fn gaussian_columns<R: Rng + ?Sized>(rows: usize, betas: &[f64], rng: &mut R) -> CMat {
    let mut g = CMat::zeros(rows, betas.len());
    for (j, &b) in betas.iter().enumerate() {
        for r in 0..rows {
            g[(r, j)] = cn(b, rng);
        }
    }
    g
}

/// i.i.d. CN(0, σ0²) matrix.
pub fn draw_noise<R: Rng + ?Sized>(rows: usize, cols: usize, sigma0_sq: f64, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| cn(sigma0_sq, rng))
}

/// True channels for every node → scheduled-user link.
#[derive(Clone, Debug)]
pub struct ChannelDraw {
    /// N_BS × K.
    pub g_bm: CMat,
    /// Per SC m: N_BS × L_m, BS → SUEs of SC m.
    pub g_bs: Vec<CMat>,
    /// Per SC n: N_SC × K, SC n → MUEs.
    pub g_sm: Vec<CMat>,
    /// `[n][m]`: N_SC × L_m, SC n → SUEs of SC m.
    pub g_ss: Vec<Vec<CMat>>,
}

pub fn draw_channels<R: Rng + ?Sized>(
    links: &ScheduledLinks,
    n_bs: usize,
    n_sc: usize,
    rng: &mut R,
) -> Result<ChannelDraw> {
    if n_bs == 0 || (links.s() > 0 && n_sc == 0) {
        return config_err("antenna counts must be positive");
    }
    let s = links.s();
    let g_bm = gaussian_columns(n_bs, &links.beta_bm, rng);
    let g_bs = (0..s).map(|m| gaussian_columns(n_bs, &links.beta_bs[m], rng)).collect();
    let g_sm = (0..s).map(|n| gaussian_columns(n_sc, &links.beta_sm[n], rng)).collect();
    let g_ss = (0..s)
        .map(|n| (0..s).map(|m| gaussian_columns(n_sc, &links.beta_ss[n][m], rng)).collect())
        .collect();
    Ok(ChannelDraw { g_bm, g_bs, g_sm, g_ss })
}
