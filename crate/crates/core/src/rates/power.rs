//! Transmit power needed for a per-user rate target on the fixed β table.

use serde::Serialize;

use crate::error::{config_err, Result};
use crate::netgen::{FixedBetaTable, ScheduledLinks};
use crate::precoder::PrecoderKind;
use crate::scenario::{prelog, PowerConfig, Scenario};
use crate::training::{beta_hat, build_pilots};
use crate::units::{db_to_linear, linear_to_db};

use super::asymptotic::ScalingLaw;
use super::bounds::{bound_with_gains, UserValues};

/// Search range for powers, dB relative to 1 mW.
pub const POWER_RANGE_DB: (f64, f64) = (-150.0, 150.0);
pub const TOLERANCE_DB: f64 = 1e-6;
pub const MAX_SWEEPS: usize = 200;

/// Smallest x in `[lo, hi]` with `f(x) >= target` for nondecreasing `f`, to within `tol`.
/// `None` when even `f(hi)` misses the target.
pub fn bisect_increasing(
    f: impl Fn(f64) -> f64,
    target: f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Option<f64> {
    if f(hi) < target {
        return None;
    }
    if f(lo) >= target {
        return Some(lo);
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RequiredPower {
    pub n_sc: usize,
    pub n_bs: usize,
    pub feasible: bool,
    pub p_bs_dbm: f64,
    pub p_sc_dbm: f64,
    /// Worst MUE and SUE rates at the solution, after the prelog when enabled.
    pub mue_rate: f64,
    pub sue_rate: f64,
    pub sweeps: usize,
    /// Largest power update of the final sweep, dB.
    pub residual_db: f64,
}

#[derive(Clone, Debug)]
pub struct PowerProblem {
    pub target: f64,
    pub law: ScalingLaw,
    pub table: FixedBetaTable,
    pub k: usize,
    pub l: usize,
    pub s: usize,
    pub gamma: usize,
    pub kind: PrecoderKind,
    /// Coherence interval T; when set, rates are scaled by (T − τ)/T before the target is applied.
    pub coherence: Option<usize>,
}

fn worst(v: &UserValues) -> (f64, f64) {
    let min = |it: &mut dyn Iterator<Item = f64>| it.fold(f64::INFINITY, f64::min);
    (min(&mut v.mue.iter().copied()), min(&mut v.sue.iter().flatten().copied()))
}

/// Alternates MUE → p_BS and SUE → p_SC bisections until both powers settle.
pub fn required_power(problem: &PowerProblem, n_sc_grid: &[usize]) -> Result<Vec<RequiredPower>> {
    let pr = problem;
    pr.law.validate()?;
    if pr.k == 0 || pr.l == 0 || pr.s == 0 {
        return config_err("required power needs K, L, S >= 1");
    }
    let links = ScheduledLinks::fixed_table(&pr.table, pr.k, pr.l, pr.s);
    let plan = build_pilots(pr.k, pr.l, pr.s, pr.gamma)?;
    let factor = match pr.coherence {
        Some(t) => prelog(t, plan.tau)?,
        None => 1.0,
    };
    n_sc_grid
        .iter()
        .map(|&n_sc| {
            let n_bs = pr.law.n_bs(n_sc);
            let base = pr.law.powers(n_sc, pr.s, pr.table.sigma0_sq);
            let sc = Scenario::new(links.clone(), plan.clone(), base.clone(), n_bs, n_sc)?;
            let gains = beta_hat(&links, &plan, base.p_tau, base.sigma0_sq)?;
            let eval = |x: f64, y: f64| -> (f64, f64) {
                let mut s = sc.clone();
                s.powers = PowerConfig { p_bs: db_to_linear(x), p_sc: vec![db_to_linear(y); pr.s], ..base.clone() };
                let r = bound_with_gains(pr.kind, &s, &gains).map(|b| worst(&b.rates));
                let (m, u) = r.unwrap_or((0.0, 0.0));
                (factor * m, factor * u)
            };
            let (lo, hi) = POWER_RANGE_DB;
            let tol = TOLERANCE_DB * 1e-3;
            let mut x = linear_to_db(base.p_bs);
            let mut y = linear_to_db(base.p_sc[0]);
            let mut residual = f64::INFINITY;
            let mut sweeps = 0;
            let mut feasible = true;
            while sweeps < MAX_SWEEPS && residual >= TOLERANCE_DB {
                sweeps += 1;
                let Some(nx) = bisect_increasing(|v| eval(v, y).0, pr.target, lo, hi, tol) else {
                    feasible = false;
                    break;
                };
                let Some(ny) = bisect_increasing(|v| eval(nx, v).1, pr.target, lo, hi, tol) else {
                    feasible = false;
                    break;
                };
                residual = (nx - x).abs().max((ny - y).abs());
                x = nx;
                y = ny;
            }
            if residual >= TOLERANCE_DB {
                feasible = false;
            }
            let (mue_rate, sue_rate) = eval(x, y);
            if !feasible {
                log::info!("target {} unreachable at N_SC={n_sc}", pr.target);
            }
            Ok(RequiredPower {
                n_sc,
                n_bs,
                feasible,
                p_bs_dbm: if feasible { x } else { f64::NAN },
                p_sc_dbm: if feasible { y } else { f64::NAN },
                mue_rate,
                sue_rate,
                sweeps,
                residual_db: residual,
            })
        })
        .collect()
}
