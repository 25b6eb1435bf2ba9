//! User selection over the associated candidate sets.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rates::asymptotic::{LawCase, ScalingLaw};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Rsa,
    Gsa,
    /// ASA-M for MRT, ASA-Z for ZFT.
    Asa,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Rsa => "rsa",
            Algorithm::Gsa => "gsa",
            Algorithm::Asa => "asa",
        }
    }
}

/// Selected users; position within a set is the pilot index.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub mue: Vec<usize>,
    pub sue: Vec<Vec<usize>>,
    /// Sum-rate objective of the selection; NaN until evaluated.
    pub objective: f64,
}

pub fn check_feasible(mue_cands: &[usize], sue_cands: &[Vec<usize>], k: usize, l: usize) -> Result<()> {
    if mue_cands.len() < k {
        return Err(Error::Infeasible(format!("{} macro candidates for K={k}", mue_cands.len())));
    }
    if let Some((m, c)) = sue_cands.iter().enumerate().find(|(_, c)| c.len() < l) {
        return Err(Error::Infeasible(format!("SC {m} has {} candidates for L={l}", c.len())));
    }
    Ok(())
}

fn random_subset<R: Rng + ?Sized>(cands: &[usize], n: usize, rng: &mut R) -> Vec<usize> {
    let mut v: Vec<usize> = sample(rng, cands.len(), n).into_iter().map(|i| cands[i]).collect();
    v.sort_unstable();
    v
}

/// Uniform random subsets without replacement.
pub fn rsa<R: Rng + ?Sized>(
    mue_cands: &[usize],
    sue_cands: &[Vec<usize>],
    k: usize,
    l: usize,
    rng: &mut R,
) -> Result<Schedule> {
    check_feasible(mue_cands, sue_cands, k, l)?;
    let mue = random_subset(mue_cands, k, rng);
    let sue = sue_cands.iter().map(|c| random_subset(c, l, rng)).collect();
    Ok(Schedule { mue, sue, objective: f64::NAN })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Mue,
    Sue(usize),
}

/// One greedy addition: every candidate tried and the objective it would give.
#[derive(Clone, Debug)]
pub struct GsaStep {
    pub slot: Slot,
    pub tried: Vec<(usize, f64)>,
    pub chosen: usize,
    pub objective: f64,
}

struct Greedy<'a, F> {
    mue: Vec<usize>,
    sue: Vec<Vec<usize>>,
    mue_cands: &'a [usize],
    sue_cands: &'a [Vec<usize>],
    objective: F,
    trace: Vec<GsaStep>,
}

impl<F: FnMut(&[usize], &[Vec<usize>]) -> Result<f64>> Greedy<'_, F> {
    fn add(&mut self, slot: Slot) -> Result<()> {
        let (pool, taken) = match slot {
            Slot::Mue => (self.mue_cands, &self.mue),
            Slot::Sue(m) => (self.sue_cands[m].as_slice(), &self.sue[m]),
        };
        let free: Vec<usize> = pool.iter().copied().filter(|u| !taken.contains(u)).collect();
        let mut tried = Vec::with_capacity(free.len());
        let mut best: Option<(usize, f64)> = None;
        for u in free {
            let v = match slot {
                Slot::Mue => {
                    self.mue.push(u);
                    let v = (self.objective)(&self.mue, &self.sue);
                    self.mue.pop();
                    v?
                }
                Slot::Sue(m) => {
                    self.sue[m].push(u);
                    let v = (self.objective)(&self.mue, &self.sue);
                    self.sue[m].pop();
                    v?
                }
            };
            tried.push((u, v));
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((u, v));
            }
        }
        let (chosen, objective) =
            best.ok_or_else(|| Error::Infeasible("candidate set exhausted".into()))?;
        match slot {
            Slot::Mue => self.mue.push(chosen),
            Slot::Sue(m) => self.sue[m].push(chosen),
        }
        self.trace.push(GsaStep { slot, tried, chosen, objective });
        Ok(())
    }
}

/// Greedy scheduling. Rounds of ⌊K/L⌋ MUE additions followed by one SUE per small
/// cell repeat until every SUE set is full, then K mod L more MUEs are added. Each
/// addition maximizes `prelog × sum_rate(current sets)`; ties keep the lowest index.
/// Without small cells the K MUEs are added one at a time.
pub fn gsa<F>(
    mue_cands: &[usize],
    sue_cands: &[Vec<usize>],
    k: usize,
    l: usize,
    prelog: f64,
    mut sum_rate: F,
) -> Result<(Schedule, Vec<GsaStep>)>
where
    F: FnMut(&[usize], &[Vec<usize>]) -> Result<f64>,
{
    check_feasible(mue_cands, sue_cands, k, l)?;
    if l == 0 && !sue_cands.is_empty() {
        return Err(Error::Config("greedy scheduling needs L >= 1".into()));
    }
    let s = sue_cands.len();
    let mut g = Greedy {
        mue: Vec::with_capacity(k),
        sue: vec![Vec::with_capacity(l); s],
        mue_cands,
        sue_cands,
        objective: move |i: &[usize], j: &[Vec<usize>]| Ok(prelog * sum_rate(i, j)?),
        trace: Vec::new(),
    };
    if s == 0 {
        for _ in 0..k {
            g.add(Slot::Mue)?;
        }
    } else {
        let per_round = k / l;
        loop {
            for _ in 0..per_round {
                g.add(Slot::Mue)?;
            }
            for m in 0..s {
                if g.sue[m].len() < l {
                    g.add(Slot::Sue(m))?;
                }
            }
            if g.sue.iter().all(|j| j.len() == l) {
                for _ in 0..k % l {
                    g.add(Slot::Mue)?;
                }
                break;
            }
        }
    }
    let objective = g.trace.last().map_or(0.0, |t| t.objective);
    Ok((Schedule { mue: g.mue, sue: g.sue, objective }, g.trace))
}

/// Per-cell greedy: each cell adds, one at a time, the candidate that maximizes its
/// own objective `cell_rate(cell, selected)`, where `cell` is `None` for the macro
/// cell and `Some(m)` for SC m. No information crosses cells.
pub fn asa_mrt<F>(
    mue_cands: &[usize],
    sue_cands: &[Vec<usize>],
    k: usize,
    l: usize,
    mut cell_rate: F,
) -> Result<Schedule>
where
    F: FnMut(Option<usize>, &[usize]) -> f64,
{
    check_feasible(mue_cands, sue_cands, k, l)?;
    let mut per_cell = |cell: Option<usize>, cands: &[usize], size: usize| {
        let mut chosen: Vec<usize> = Vec::with_capacity(size);
        while chosen.len() < size {
            let mut best: Option<(usize, f64)> = None;
            let free: Vec<usize> = cands.iter().copied().filter(|u| !chosen.contains(u)).collect();
            for u in free {
                chosen.push(u);
                let v = cell_rate(cell, &chosen);
                chosen.pop();
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((u, v));
                }
            }
            chosen.push(best.expect("feasibility checked").0);
        }
        chosen
    };
    let mue = per_cell(None, mue_cands, k);
    let sue = sue_cands.iter().enumerate().map(|(m, c)| per_cell(Some(m), c, l)).collect();
    Ok(Schedule { mue, sue, objective: f64::NAN })
}

/// Indices of the `n` largest values; ties keep the lower position. Returned ascending.
pub fn top_n(values: &[f64], n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx.truncate(n);
    idx.sort_unstable();
    idx
}

/// Max-β selection: the K candidates with the strongest BS link and, per SC, the L
/// with the strongest own-SC link.
pub fn asa_zft(
    mue_cands: &[usize],
    beta_bm: &[f64],
    sue_cands: &[Vec<usize>],
    beta_ss: &[Vec<f64>],
    k: usize,
    l: usize,
) -> Result<Schedule> {
    check_feasible(mue_cands, sue_cands, k, l)?;
    if beta_bm.len() != mue_cands.len()
        || beta_ss.len() != sue_cands.len()
        || beta_ss.iter().zip(sue_cands).any(|(b, c)| b.len() != c.len())
    {
        return Err(Error::Config("β lists must align with candidate lists".into()));
    }
    let mue = top_n(beta_bm, k).into_iter().map(|i| mue_cands[i]).collect();
    let sue = sue_cands
        .iter()
        .zip(beta_ss)
        .map(|(c, b)| top_n(b, l).into_iter().map(|i| c[i]).collect())
        .collect();
    Ok(Schedule { mue, sue, objective: f64::NAN })
}

/// Per-cell MRT sum rate in the large-array limit, from own-cell β only. Pilot
/// contamination is ignored since no cross-cell information is available.
#[derive(Clone, Debug)]
pub struct AsymptoticObjective {
    pub law: ScalingLaw,
    pub tau: usize,
    pub sigma0_sq: f64,
}

impl AsymptoticObjective {
    fn cell(&self, betas: &[f64], energy: f64, lambda_theta: f64) -> f64 {
        let t = self.tau as f64 * self.law.e_tau;
        let s2 = self.sigma0_sq;
        match self.law.case {
            LawCase::I => {
                let hats: Vec<f64> = betas.iter().map(|b| t * b * b / (t * b + s2)).collect();
                let phi: f64 = hats.iter().sum();
                hats.iter().map(|h| (1.0 + energy * h * h / (phi * s2)).log2()).sum()
            }
            LawCase::II => {
                let sq: f64 = betas.iter().map(|b| b * b).sum();
                betas
                    .iter()
                    .map(|b| (1.0 + lambda_theta * t * energy * b.powi(4) / (sq * s2 * s2)).log2())
                    .sum()
            }
        }
    }

    pub fn mue_rate(&self, betas: &[f64]) -> f64 {
        self.cell(betas, self.law.e_bs, self.law.lambda.powf(self.law.theta()))
    }

    pub fn sue_rate(&self, betas: &[f64]) -> f64 {
        self.cell(betas, self.law.e_sc, 1.0)
    }
}
