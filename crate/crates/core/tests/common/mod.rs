#![allow(dead_code)]

pub mod sched;

use hetnet_core::channel::{gaussian_columns, CMat, C64};
use hetnet_core::netgen::{FixedBetaTable, ScheduledLinks};
use hetnet_core::precoder::{self, PrecoderKind};
use hetnet_core::rates::mc::draw_and_estimate;
use hetnet_core::rng::stream;
use hetnet_core::scenario::{PowerConfig, Scenario};
use hetnet_core::training::{build_pilots, ChannelEstimate, EffectiveGains};
use nalgebra::Cholesky;

/// Fixed-table scenario with equal powers at every SC.
pub fn table_scenario(
    k: usize,
    l: usize,
    s: usize,
    gamma: usize,
    n_bs: usize,
    n_sc: usize,
    p_bs: f64,
    p_sc: f64,
    p_tau: f64,
) -> Scenario {
    let t = FixedBetaTable::default();
    let links = ScheduledLinks::fixed_table(&t, k, l, s);
    let plan = build_pilots(k, l, s, gamma).unwrap();
    let powers = PowerConfig::uniform(p_bs, p_sc, s, p_tau, t.sigma0_sq);
    Scenario::new(links, plan, powers, n_bs, n_sc).unwrap()
}

/// Links with every β perturbed deterministically so users are not symmetric.
pub fn skewed_links(k: usize, l: usize, s: usize, seed: u64) -> ScheduledLinks {
    let mut links = ScheduledLinks::fixed_table(&FixedBetaTable::default(), k, l, s);
    let mut x = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let mut next = || {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        0.5 + (x % 1000) as f64 / 1000.0
    };
    for b in links.beta_bm.iter_mut() {
        *b *= next();
    }
    for row in links.beta_sm.iter_mut() {
        for b in row.iter_mut() {
            *b *= next();
        }
    }
    for cell in links.beta_bs.iter_mut() {
        for b in cell.iter_mut() {
            *b *= next();
        }
    }
    for n in links.beta_ss.iter_mut() {
        for m in n.iter_mut() {
            for b in m.iter_mut() {
                *b *= next();
            }
        }
    }
    links
}

pub fn scenario_from(
    links: ScheduledLinks,
    gamma: usize,
    n_bs: usize,
    n_sc: usize,
    p_bs: f64,
    p_sc: f64,
    p_tau: f64,
) -> Scenario {
    let s = links.s();
    let plan = build_pilots(links.k(), links.l_max(), s, gamma).unwrap();
    let powers = PowerConfig::uniform(p_bs, p_sc, s, p_tau, 1.0);
    Scenario::new(links, plan, powers, n_bs, n_sc).unwrap()
}

/// Sample means of Tr{W⁻¹} and Tr²{W⁻¹} for W = GᴴG, G an n × m matrix of CN(0, 1).
pub fn wishart_inverse_moments(m: usize, n: usize, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = stream(seed, &[0x3157]);
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        let g = gaussian_columns(n, &vec![1.0; m], &mut rng);
        let inv = Cholesky::new(g.adjoint() * &g).unwrap().inverse();
        let tr = inv.trace().re;
        s1 += tr;
        s2 += tr * tr;
    }
    (s1 / samples as f64, s2 / samples as f64)
}

/// m/(n−m) · (n/((n−m)² − 1) + (m−1)/(n−m+1)).
pub fn inverse_wishart_tr_sq(m: usize, n: usize) -> f64 {
    let (m, n) = (m as f64, n as f64);
    m / (n - m) * (n / ((n - m).powi(2) - 1.0) + (m - 1.0) / (n - m + 1.0))
}

/// Column-variance and orthogonality statistics of the MMSE estimates.
pub struct MmseStats {
    /// Largest |empirical variance / β̂ − 1| over every estimated column.
    pub max_rel_var_err: f64,
    /// z-scores of the pooled normalized E[ĝ* (g − ĝ)] (real and imaginary parts)
    /// at the BS and at the SCs.
    pub corr_z: [f64; 4],
}

fn accumulate(g: &CMat, g_hat: &CMat, j: usize, bh: f64, b: f64, power: &mut f64, corr: &mut Vec<C64>) {
    let scale = 1.0 / (bh * (b - bh)).sqrt();
    for r in 0..g.nrows() {
        let h = g_hat[(r, j)];
        *power += h.norm_sqr();
        corr.push(h.conj() * (g[(r, j)] - h) * scale);
    }
}

fn z_scores(v: &[C64]) -> [f64; 2] {
    let n = v.len() as f64;
    let z = |f: fn(&C64) -> f64| {
        let mean = v.iter().map(f).sum::<f64>() / n;
        let var = v.iter().map(|x| (f(x) - mean).powi(2)).sum::<f64>() / (n - 1.0);
        mean / (var / n).sqrt()
    };
    [z(|c| c.re), z(|c| c.im)]
}

pub fn mmse_stats(sc: &Scenario, trials: usize, seed: u64) -> MmseStats {
    let links = &sc.links;
    let s = links.s();
    let mut pow_bm = vec![0.0; links.k()];
    let mut pow_ss: Vec<Vec<f64>> = (0..s).map(|m| vec![0.0; links.l(m)]).collect();
    let (mut c_bs, mut c_sc) = (Vec::new(), Vec::new());
    let mut gains: Option<EffectiveGains> = None;
    for t in 0..trials {
        let mut rng = stream(seed, &[t as u64]);
        let (draw, est) = draw_and_estimate(sc, &mut rng).unwrap();
        for (i, p) in pow_bm.iter_mut().enumerate() {
            accumulate(&draw.g_bm, &est.g_hat_bm, i, est.gains.bm[i], links.beta_bm[i], p, &mut c_bs);
        }
        for m in 0..s {
            for (j, p) in pow_ss[m].iter_mut().enumerate() {
                let (bh, b) = (est.gains.own(m, j), links.beta_ss[m][m][j]);
                accumulate(&draw.g_ss[m][m], &est.g_hat_ss[m], j, bh, b, p, &mut c_sc);
            }
        }
        gains.get_or_insert(est.gains);
    }
    let gains = gains.unwrap();
    let per_col = |n: usize| (trials * n) as f64;
    let mut err: f64 = 0.0;
    for (i, p) in pow_bm.iter().enumerate() {
        err = err.max((p / per_col(sc.n_bs) / gains.bm[i] - 1.0).abs());
    }
    for m in 0..s {
        for (j, p) in pow_ss[m].iter().enumerate() {
            err = err.max((p / per_col(sc.n_sc) / gains.own(m, j) - 1.0).abs());
        }
    }
    let [a, b] = z_scores(&c_bs);
    let [c, d] = z_scores(&c_sc);
    MmseStats { max_rel_var_err: err, corr_z: [a, b, c, d] }
}

/// Largest ZFT nulling residual max|ĜᵀW/α − I| and mean Tr{WᴴW} over `draws`
/// single-node estimates Ĝ (n × β̂.len(), columns CN(0, β̂_j)).
pub fn precoder_stats(kind: PrecoderKind, n: usize, beta_hat: &[f64], p: f64, draws: usize, seed: u64) -> (f64, f64) {
    let powers = PowerConfig { p_bs: p, p_sc: vec![], p_tau: 1.0, sigma0_sq: 1.0 };
    let mut residual: f64 = 0.0;
    let mut power = 0.0;
    for d in 0..draws {
        let mut rng = stream(seed, &[d as u64]);
        let est = ChannelEstimate {
            g_hat_bm: gaussian_columns(n, beta_hat, &mut rng),
            g_hat_ss: vec![],
            gains: EffectiveGains { bm: beta_hat.to_vec(), ss: vec![] },
        };
        let w = precoder::build(kind, &est, &powers).unwrap();
        power += (w.w_bs.adjoint() * &w.w_bs).trace().re;
        if kind == PrecoderKind::Zft {
            let e = est.g_hat_bm.transpose() * &w.w_bs / C64::new(w.alpha_bs, 0.0);
            let k = beta_hat.len();
            residual = residual.max((e - CMat::identity(k, k)).iter().map(|x| x.norm()).fold(0.0, f64::max));
        }
    }
    (residual, power / draws as f64)
}
