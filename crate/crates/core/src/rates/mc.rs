//! Monte-Carlo ergodic rates from the exact per-realization SINR terms.

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{draw_channels, CMat, ChannelDraw};
use crate::error::{Error, Result};
use crate::precoder::{self, Precoder, PrecoderKind};
use crate::rng::stream;
use crate::scenario::Scenario;
use crate::training::{mmse_estimate, receive_training, ChannelEstimate};

use super::bounds::UserValues;

/// Received powers at one user for one realization.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SinrTerms {
    pub desired: f64,
    /// Estimation-error-induced interference.
    pub eei: f64,
    /// Same-node interference (IMI for MUEs, ISI for SUEs).
    pub intra: f64,
    /// Cross-tier interference.
    pub cti: f64,
    /// Inter-small-cell interference (SUEs only).
    pub ssi: f64,
}

impl SinrTerms {
    pub fn sinr(&self, sigma0_sq: f64) -> f64 {
        self.desired / (self.eei + self.intra + self.cti + self.ssi + sigma0_sq)
    }
}

#[derive(Clone, Debug)]
pub struct TrialTerms {
    pub mue: Vec<SinrTerms>,
    pub sue: Vec<Vec<SinrTerms>>,
}

/// Draws channels and runs training; the result is shared by all precoder kinds.
pub fn draw_and_estimate<R: Rng + ?Sized>(
    sc: &Scenario,
    rng: &mut R,
) -> Result<(ChannelDraw, ChannelEstimate)> {
    let draw = draw_channels(&sc.links, sc.n_bs, sc.n_sc, rng)?;
    let y = receive_training(&draw, &sc.plan, sc.powers.p_tau, sc.powers.sigma0_sq, rng);
    let est = mmse_estimate(&y, &sc.plan, &sc.links, sc.powers.p_tau, sc.powers.sigma0_sq)?;
    Ok((draw, est))
}

fn sum_sq_row_except(m: &CMat, row: usize, skip: Option<usize>) -> f64 {
    (0..m.ncols()).filter(|&c| Some(c) != skip).map(|c| m[(row, c)].norm_sqr()).sum()
}

/// Per-user SINR terms for the given realization and precoder.
pub fn sinr_terms(draw: &ChannelDraw, est: &ChannelEstimate, w: &Precoder) -> TrialTerms {
    let s = draw.g_ss.len();
    // own-node terms: desired uses the estimate, EEI the estimation error
    let own = |g_hat: &CMat, w: &CMat, u: usize, p: &CMat| {
        let d = g_hat.column(u).dot(&w.column(u));
        let e = p[(u, u)] - d;
        (d.norm_sqr(), e.norm_sqr(), sum_sq_row_except(p, u, Some(u)))
    };

    let p_bs = draw.g_bm.tr_mul(&w.w_bs);
    let cross_sm: Vec<CMat> = (0..s).map(|n| draw.g_sm[n].tr_mul(&w.w_sc[n])).collect();
    let mue = (0..draw.g_bm.ncols())
        .map(|i| {
            let (desired, eei, intra) = own(&est.g_hat_bm, &w.w_bs, i, &p_bs);
            let cti = cross_sm.iter().map(|c| sum_sq_row_except(c, i, None)).sum();
            SinrTerms { desired, eei, intra, cti, ssi: 0.0 }
        })
        .collect();

    let sue = (0..s)
        .map(|m| {
            let p_own = draw.g_ss[m][m].tr_mul(&w.w_sc[m]);
            let from_bs = draw.g_bs[m].tr_mul(&w.w_bs);
            let from_sc: Vec<CMat> = (0..s)
                .filter(|&n| n != m)
                .map(|n| draw.g_ss[n][m].tr_mul(&w.w_sc[n]))
                .collect();
            (0..draw.g_ss[m][m].ncols())
                .map(|j| {
                    let (desired, eei, intra) =
                        own(&est.g_hat_ss[m], &w.w_sc[m], j, &p_own);
                    let cti = sum_sq_row_except(&from_bs, j, None);
                    let ssi = from_sc.iter().map(|c| sum_sq_row_except(c, j, None)).sum();
                    SinrTerms { desired, eei, intra, cti, ssi }
                })
                .collect()
        })
        .collect();
    TrialTerms { mue, sue }
}

fn trial_rates(terms: &TrialTerms, sigma0_sq: f64) -> Vec<f64> {
    terms
        .mue
        .iter()
        .chain(terms.sue.iter().flatten())
        .map(|t| (1.0 + t.sinr(sigma0_sq)).log2())
        .collect()
}

/// One trial's per-user rates for every requested kind. A numerical failure is
/// retried once on the next attempt substream.
pub fn trial(sc: &Scenario, kinds: &[PrecoderKind], seed: u64, path: &[u64]) -> Result<Vec<Vec<f64>>> {
    let mut last = None;
    for attempt in 0..2u64 {
        let mut p = path.to_vec();
        p.push(attempt);
        let mut rng = stream(seed, &p);
        let mut run = || -> Result<Vec<Vec<f64>>> {
            let (draw, est) = draw_and_estimate(sc, &mut rng)?;
            kinds
                .iter()
                .map(|&k| {
                    let w = precoder::build(k, &est, &sc.powers)?;
                    Ok(trial_rates(&sinr_terms(&draw, &est, &w), sc.powers.sigma0_sq))
                })
                .collect()
        };
        match run() {
            Ok(r) => return Ok(r),
            Err(e @ (Error::Singular { .. } | Error::Degenerate(_))) => {
                log::warn!("trial {path:?} attempt {attempt} failed: {e}");
                last = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("two failed attempts"))
}

/// Mean and standard error of a per-user rate.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct McRates {
    pub kind: PrecoderKind,
    pub trials: usize,
    pub mue: Vec<Estimate>,
    pub sue: Vec<Vec<Estimate>>,
}

impl McRates {
    pub fn means(&self) -> UserValues {
        UserValues {
            mue: self.mue.iter().map(|e| e.mean).collect(),
            sue: self.sue.iter().map(|c| c.iter().map(|e| e.mean).collect()).collect(),
        }
    }

    pub fn flatten(&self) -> Vec<Estimate> {
        self.mue.iter().chain(self.sue.iter().flatten()).copied().collect()
    }
}

/// Neumaier-compensated mean and sample variance, in input order.
fn mean_stderr(xs: impl Iterator<Item = f64> + Clone, n: usize) -> Estimate {
    let comp_sum = |it: &mut dyn Iterator<Item = f64>| {
        let (mut s, mut c) = (0.0f64, 0.0f64);
        for x in it {
            let t = s + x;
            c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
            s = t;
        }
        s + c
    };
    let mean = comp_sum(&mut xs.clone()) / n as f64;
    if n < 2 {
        return Estimate { mean, stderr: 0.0 };
    }
    let ss = comp_sum(&mut xs.map(|x| (x - mean) * (x - mean)));
    Estimate { mean, stderr: (ss / (n - 1) as f64 / n as f64).sqrt() }
}

/// Monte-Carlo rates for each kind. Trial `t` uses substream `path ++ [t, attempt]`
/// and trials run on the current rayon pool; results are reduced in trial order.
pub fn mc_rates_multi(
    sc: &Scenario,
    kinds: &[PrecoderKind],
    trials: usize,
    seed: u64,
    path: &[u64],
) -> Result<Vec<McRates>> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let per_trial: Vec<Vec<Vec<f64>>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut p = path.to_vec();
            p.push(t);
            trial(sc, kinds, seed, &p)
        })
        .collect::<Result<_>>()?;

    let links = &sc.links;
    Ok(kinds
        .iter()
        .enumerate()
        .map(|(ki, &kind)| {
            let stat = |u: usize| mean_stderr(per_trial.iter().map(move |t| t[ki][u]), trials);
            let mue = (0..links.k()).map(stat).collect();
            let mut offset = links.k();
            let sue = (0..links.s())
                .map(|m| {
                    let cell = (offset..offset + links.l(m)).map(stat).collect();
                    offset += links.l(m);
                    cell
                })
                .collect();
            McRates { kind, trials, mue, sue }
        })
        .collect())
}

pub fn mc_rates(
    sc: &Scenario,
    kind: PrecoderKind,
    trials: usize,
    seed: u64,
    path: &[u64],
) -> Result<McRates> {
    Ok(mc_rates_multi(sc, &[kind], trials, seed, path)?.remove(0))
}
