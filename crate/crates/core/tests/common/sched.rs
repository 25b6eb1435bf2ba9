//! Tiny two-cell scheduling instances and exhaustive search.

use hetnet_core::netgen::{LargeScaleProfile, ScheduledLinks};
use hetnet_core::precoder::PrecoderKind;
use hetnet_core::rates::bounds::bound;
use hetnet_core::rng::stream;
use hetnet_core::scenario::{PowerConfig, Scenario};
use hetnet_core::scheduler::Schedule;
use hetnet_core::training::build_pilots;
use rand::Rng;

pub const K: usize = 2;
pub const L: usize = 2;
pub const S: usize = 2;

/// 6 macro candidates (users 0..6), 4 per SC (6..10 and 10..14).
pub fn tiny_profile(seed: u64) -> (LargeScaleProfile, Vec<usize>, Vec<Vec<usize>>) {
    let mut rng = stream(seed, &[42]);
    let n = 14;
    let mut beta_bm: Vec<f64> = (0..n).map(|_| 10f64.powf(-rng.random_range(11.0..13.5))).collect();
    let mut beta_sm: Vec<Vec<f64>> =
        (0..S).map(|_| (0..n).map(|_| 10f64.powf(-rng.random_range(12.0..14.0))).collect()).collect();
    for m in 0..S {
        for u in 6 + 4 * m..10 + 4 * m {
            beta_sm[m][u] = 10f64.powf(-rng.random_range(9.0..11.0));
            beta_bm[u] *= 0.1;
        }
    }
    let sue = (0..S).map(|m| (6 + 4 * m..10 + 4 * m).collect()).collect();
    (LargeScaleProfile { beta_bm, beta_sm }, (0..6).collect(), sue)
}

pub fn sum_bound(
    profile: &LargeScaleProfile,
    kind: PrecoderKind,
    n_bs: usize,
    mue: &[usize],
    sue: &[Vec<usize>],
) -> f64 {
    let links = ScheduledLinks::from_schedule(profile, mue, sue);
    let plan = build_pilots(K, L, S, 1).unwrap();
    let powers = PowerConfig::uniform(4e4, 250.0, S, 1.0, 7.9e-11);
    let sc = Scenario::new(links, plan, powers, n_bs, 8).unwrap();
    bound(kind, &sc).unwrap().rates.sum()
}

pub fn subsets(pool: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &u) in pool.iter().enumerate() {
        for mut rest in subsets(&pool[i + 1..], k - 1) {
            rest.insert(0, u);
            out.push(rest);
        }
    }
    out
}

pub fn ordered(pool: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for &u in pool {
        let rest: Vec<usize> = pool.iter().copied().filter(|&v| v != u).collect();
        for mut tail in ordered(&rest, k - 1) {
            tail.insert(0, u);
            out.push(tail);
        }
    }
    out
}

pub fn exhaustive_best(profile: &LargeScaleProfile, kind: PrecoderKind, mue: &[usize], sue: &[Vec<usize>]) -> f64 {
    let mut best = f64::MIN;
    for i in subsets(mue, K) {
        for j0 in ordered(&sue[0], L) {
            for j1 in ordered(&sue[1], L) {
                best = best.max(sum_bound(profile, kind, 16, &i, &[j0.clone(), j1]));
            }
        }
    }
    best
}

pub fn feasible(s: &Schedule, mue: &[usize], sue: &[Vec<usize>]) -> bool {
    let unique = |v: &[usize]| {
        let mut w = v.to_vec();
        w.sort_unstable();
        w.dedup();
        w.len() == v.len()
    };
    s.mue.len() == K
        && unique(&s.mue)
        && s.mue.iter().all(|u| mue.contains(u))
        && s.sue.iter().zip(sue).all(|(j, c)| j.len() == L && unique(j) && j.iter().all(|u| c.contains(u)))
}

