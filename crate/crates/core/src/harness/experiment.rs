//! Experiment orchestration.
//!
//! Seed addresses: a drop lives at `[drop]` when drops are pinned and at
//! `[point, drop]` otherwise. Below it, users come from `[.., STREAM_USERS, attempt]`,
//! uniform SC positions from `[.., STREAM_NODES]`, RSA from `[.., STREAM_SCHEDULE]`
//! and channel trials from `[.., STREAM_TRIALS, trial, retry]`.

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind, SweepVariable};
use crate::error::{Error, Result};
use crate::netgen::{
    associate, large_scale_profile, place_nodes, place_nodes_uniform, place_users, Association,
    LargeScaleProfile, NetworkLayout, Point, ScPlacement, ScheduledLinks,
};
use crate::precoder::PrecoderKind;
use crate::rates::asymptotic::{asymptotic_rates, ScalingLaw};
use crate::rates::bounds::bound;
use crate::rates::mc::mc_rates_multi;
use crate::rates::power::{required_power, PowerProblem};
use crate::rates::{RateReport, UserRate};
use crate::rng::{stream, STREAM_NODES, STREAM_SCHEDULE, STREAM_TRIALS, STREAM_USERS};
use crate::scenario::{PowerConfig, Scenario};
use crate::scheduler::{asa_mrt, asa_zft, check_feasible, gsa, rsa, Algorithm, AsymptoticObjective, Schedule};
use crate::training::build_pilots;

/// Per-precoder metrics of the rate experiments, averaged over drops.
pub const RATE_METRICS: [&str; 10] = [
    "sum_rate_mc",
    "sum_rate_bound",
    "se_mc",
    "se_bound",
    "boundary_mc",
    "boundary_bound",
    "min_mc",
    "min_bound",
    "mean_mc",
    "mean_bound",
];

const SCALING_METRICS: [&str; 8] = [
    "bound_mue",
    "bound_sue",
    "limit_mue",
    "limit_sue",
    "req_p_bs_db",
    "req_p_sc_db",
    "req_residual_db",
    "req_sweeps",
];

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub sweep_value: f64,
    /// False when no drop could be scheduled and evaluated; values are NaN.
    pub feasible: bool,
    /// Drops that contributed to the averages.
    pub drops: usize,
    /// User redraws spent on feasibility at this point.
    pub retries: usize,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ResultTable {
    pub experiment: ExperimentKind,
    pub sweep_variable: SweepVariable,
    pub seed: u64,
    pub trials: usize,
    /// Names of `ResultRow::values`.
    pub columns: Vec<String>,
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.values[i]).collect())
    }

    pub fn retries(&self) -> usize {
        self.rows.iter().map(|r| r.retries).sum()
    }
}

/// A user drop whose association leaves every cell enough candidates.
#[derive(Clone, Debug)]
pub struct Drop {
    pub profile: LargeScaleProfile,
    pub association: Association,
    pub retries: usize,
}

fn drop_path(cfg: &ExperimentConfig, point: usize, drop: usize) -> Vec<u64> {
    if cfg.mc.pin_drops {
        vec![drop as u64]
    } else {
        vec![point as u64, drop as u64]
    }
}

fn with(path: &[u64], tail: &[u64]) -> Vec<u64> {
    path.iter().chain(tail).copied().collect()
}

fn layout(cfg: &ExperimentConfig, path: &[u64]) -> Result<NetworkLayout> {
    let t = &cfg.topology;
    if t.small_cells == 0 {
        return Ok(NetworkLayout {
            bs_position: Point::ORIGIN,
            sc_positions: Vec::new(),
            cell_radius: t.cell_radius_m,
            sc_ring_radius: None,
        });
    }
    match t.placement {
        ScPlacement::Ring => place_nodes(t.small_cells, t.sc_ring_radius_m, t.cell_radius_m),
        ScPlacement::Uniform => {
            let mut rng = stream(cfg.mc.seed, &with(path, &[STREAM_NODES]));
            place_nodes_uniform(t.small_cells, t.cell_radius_m, &mut rng)
        }
    }
}

/// Draws users at `path` until the association is schedulable.
pub fn draw_drop(cfg: &ExperimentConfig, path: &[u64]) -> Result<Drop> {
    let d = cfg.derived();
    let layout = layout(cfg, path)?;
    let sc = &cfg.scheduling;
    for attempt in 0..=cfg.mc.max_resamples {
        let mut rng = stream(cfg.mc.seed, &with(path, &[STREAM_USERS, attempt as u64]));
        let users = place_users(cfg.topology.users, cfg.topology.cell_radius_m, &mut rng);
        if users.count() == 0 {
            break;
        }
        let profile = large_scale_profile(&layout, &users)?;
        let association = associate(&profile, sc.kappa_bs, sc.kappa_sc, d.p_bs_mw, d.p_sc_mw)?;
        if check_feasible(&association.macro_candidates, &association.sc_candidates, sc.k, sc.l).is_ok() {
            if attempt > 0 {
                log::debug!("drop {path:?} feasible after {attempt} redraws");
            }
            return Ok(Drop { profile, association, retries: attempt });
        }
    }
    Err(Error::Infeasible(format!(
        "drop {path:?}: no schedulable association in {} draws of {} users",
        cfg.mc.max_resamples + 1,
        cfg.topology.users
    )))
}

fn powers(cfg: &ExperimentConfig) -> PowerConfig {
    let d = cfg.derived();
    PowerConfig::uniform(d.p_bs_mw, d.p_sc_mw, cfg.topology.small_cells, d.p_tau_mw, d.noise_mw)
}

/// Two-tier scenario for a (possibly partial) schedule.
pub fn scenario(cfg: &ExperimentConfig, profile: &LargeScaleProfile, mue: &[usize], sue: &[Vec<usize>]) -> Result<Scenario> {
    let s = cfg.topology.small_cells;
    let plan = build_pilots(cfg.scheduling.k, cfg.scheduling.l, s, cfg.pilot.gamma)?;
    let links = ScheduledLinks::from_schedule(profile, mue, sue);
    Scenario::new(links, plan, powers(cfg), cfg.antennas.n_bs, cfg.n_sc())
}

/// The same users served by one BS with N_BS + S·N_SC antennas and orthogonal pilots.
/// The BS keeps its own power; the small cells are switched off.
pub fn one_tier_scenario(cfg: &ExperimentConfig, two_tier: &Scenario) -> Result<Scenario> {
    let links = two_tier.links.one_tier();
    let plan = build_pilots(links.k(), 0, 0, 1)?;
    let p = &two_tier.powers;
    let powers = PowerConfig { p_bs: p.p_bs, p_sc: Vec::new(), p_tau: p.p_tau, sigma0_sq: p.sigma0_sq };
    let n = cfg.antennas.n_bs + cfg.topology.small_cells * cfg.n_sc();
    Scenario::new(links, plan, powers, n, 2)
}

fn asa_objective(cfg: &ExperimentConfig) -> AsymptoticObjective {
    let d = cfg.derived();
    let mut law = ScalingLaw::case_one(1.0, 1.0, cfg.antennas.lambda);
    law.e_bs = d.p_bs_mw * cfg.antennas.n_bs as f64;
    law.e_sc = d.p_sc_mw * d.n_sc as f64;
    law.e_tau = d.p_tau_mw;
    AsymptoticObjective { law, tau: d.tau, sigma0_sq: d.noise_mw }
}

pub fn schedule(
    cfg: &ExperimentConfig,
    drop: &Drop,
    path: &[u64],
    algorithm: Algorithm,
    kind: PrecoderKind,
) -> Result<Schedule> {
    let (k, l) = (cfg.scheduling.k, cfg.scheduling.l);
    let a = &drop.association;
    let p = &drop.profile;
    match algorithm {
        Algorithm::Rsa => {
            let mut rng = stream(cfg.mc.seed, &with(path, &[STREAM_SCHEDULE]));
            rsa(&a.macro_candidates, &a.sc_candidates, k, l, &mut rng)
        }
        Algorithm::Gsa => {
            let sum_rate = |mue: &[usize], sue: &[Vec<usize>]| -> Result<f64> {
                Ok(bound(kind, &scenario(cfg, p, mue, sue)?)?.rates.sum())
            };
            let prelog = cfg.derived().prelog;
            Ok(gsa(&a.macro_candidates, &a.sc_candidates, k, l, prelog, sum_rate)?.0)
        }
        Algorithm::Asa => match kind {
            PrecoderKind::Mrt => {
                let obj = asa_objective(cfg);
                asa_mrt(&a.macro_candidates, &a.sc_candidates, k, l, |cell, set| match cell {
                    None => obj.mue_rate(&set.iter().map(|&u| p.beta_bm[u]).collect::<Vec<_>>()),
                    Some(m) => obj.sue_rate(&set.iter().map(|&u| p.beta_sm[m][u]).collect::<Vec<_>>()),
                })
            }
            PrecoderKind::Zft => {
                let bm: Vec<f64> = a.macro_candidates.iter().map(|&u| p.beta_bm[u]).collect();
                let ss: Vec<Vec<f64>> = a
                    .sc_candidates
                    .iter()
                    .enumerate()
                    .map(|(m, c)| c.iter().map(|&u| p.beta_sm[m][u]).collect())
                    .collect();
                asa_zft(&a.macro_candidates, &bm, &a.sc_candidates, &ss, k, l)
            }
        },
    }
}

/// MC (when `trials > 0`) and bound evaluation of `sc` for every kind.
pub fn evaluate(
    sc: &Scenario,
    kinds: &[PrecoderKind],
    cfg: &ExperimentConfig,
    path: &[u64],
) -> Result<Vec<RateReport>> {
    let prelog = sc.prelog(cfg.pilot.coherence)?;
    let trials = cfg.mc.trials;
    let mc = if trials > 0 {
        Some(mc_rates_multi(sc, kinds, trials, cfg.mc.seed, &with(path, &[STREAM_TRIALS]))?)
    } else {
        None
    };
    kinds
        .iter()
        .enumerate()
        .map(|(i, &kind)| {
            let b = bound(kind, sc)?;
            Ok(match &mc {
                Some(mc) => RateReport::assemble(&mc[i], &b, prelog),
                None => {
                    let user = |&bound: &f64| UserRate { mc_mean: f64::NAN, mc_stderr: f64::NAN, bound, asymptotic: None };
                    RateReport {
                        kind,
                        mue_rates: b.rates.mue.iter().map(user).collect(),
                        sue_rates: b.rates.sue.iter().map(|c| c.iter().map(user).collect()).collect(),
                        prelog,
                    }
                }
            })
        })
        .collect()
}

fn rate_metrics(r: &RateReport) -> [f64; 10] {
    let users: Vec<&UserRate> = r.users().collect();
    let n = users.len() as f64;
    let sum = |f: fn(&UserRate) -> f64| users.iter().map(|u| f(u)).sum::<f64>();
    let min = |f: fn(&UserRate) -> f64| {
        users.iter().map(|u| f(u)).fold(f64::INFINITY, |a, x| if x.is_nan() || a.is_nan() { f64::NAN } else { a.min(x) })
    };
    let (b_mc, b_bound) = r.boundary_user_rate();
    let (s_mc, s_bound) = (sum(|u| u.mc_mean), sum(|u| u.bound));
    [
        s_mc,
        s_bound,
        r.prelog * s_mc,
        r.prelog * s_bound,
        b_mc,
        b_bound,
        min(|u| u.mc_mean),
        min(|u| u.bound),
        s_mc / n,
        s_bound / n,
    ]
}

/// Moves every user after the first `k` of a one-tier report into a single
/// boundary group so the boundary metrics cover the former SUEs.
fn regroup_one_tier(mut r: RateReport, k: usize) -> RateReport {
    let boundary = r.mue_rates.split_off(k);
    r.sue_rates = vec![boundary];
    r
}

fn rate_columns(prefixes: &[String]) -> Vec<String> {
    let mut c: Vec<String> = ["tau", "prelog", "n_bs", "n_sc"].map(String::from).to_vec();
    for p in prefixes {
        c.extend(RATE_METRICS.iter().map(|m| format!("{p}_{m}")));
    }
    c
}

fn kind_prefixes(prefix: &str) -> Vec<String> {
    PrecoderKind::ALL
        .iter()
        .map(|k| if prefix.is_empty() { k.name().to_string() } else { format!("{prefix}_{}", k.name()) })
        .collect()
}

/// One drop of a rate experiment: metrics for every column group, in column order.
fn rate_drop(cfg: &ExperimentConfig, drop: &Drop, path: &[u64]) -> Result<Vec<f64>> {
    let kinds = PrecoderKind::ALL;
    let k = cfg.scheduling.k;
    let mut out = Vec::new();
    match cfg.experiment {
        ExperimentKind::Scheduling => {
            for alg in [Algorithm::Rsa, Algorithm::Gsa, Algorithm::Asa] {
                for kind in kinds {
                    let s = schedule(cfg, drop, path, alg, kind)?;
                    let sc = scenario(cfg, &drop.profile, &s.mue, &s.sue)?;
                    out.extend(rate_metrics(&evaluate(&sc, &[kind], cfg, path)?[0]));
                }
            }
        }
        ExperimentKind::OneTier => {
            let s = schedule(cfg, drop, path, cfg.scheduling.algorithm, PrecoderKind::Mrt)?;
            let two = scenario(cfg, &drop.profile, &s.mue, &s.sue)?;
            let one = one_tier_scenario(cfg, &two)?;
            for r in evaluate(&two, &kinds, cfg, path)? {
                out.extend(rate_metrics(&r));
            }
            for r in evaluate(&one, &kinds, cfg, path)? {
                out.extend(rate_metrics(&regroup_one_tier(r, k)));
            }
        }
        _ => {
            let schedules = kinds
                .iter()
                .map(|&kind| schedule(cfg, drop, path, cfg.scheduling.algorithm, kind))
                .collect::<Result<Vec<_>>>()?;
            let shared = schedules[0].mue == schedules[1].mue && schedules[0].sue == schedules[1].sue;
            let groups: Vec<(Vec<PrecoderKind>, &Schedule)> = if shared {
                vec![(kinds.to_vec(), &schedules[0])]
            } else {
                kinds.iter().zip(&schedules).map(|(&k, s)| (vec![k], s)).collect()
            };
            for (ks, s) in groups {
                let two = scenario(cfg, &drop.profile, &s.mue, &s.sue)?;
                let sc = if cfg.topology.one_tier { one_tier_scenario(cfg, &two)? } else { two };
                for r in evaluate(&sc, &ks, cfg, path)? {
                    out.extend(rate_metrics(&if cfg.topology.one_tier { regroup_one_tier(r, k) } else { r }));
                }
            }
        }
    }
    Ok(out)
}

fn rate_layout(cfg: &ExperimentConfig) -> Vec<String> {
    match cfg.experiment {
        ExperimentKind::Scheduling => {
            let p: Vec<String> = [Algorithm::Rsa, Algorithm::Gsa, Algorithm::Asa]
                .iter()
                .flat_map(|a| kind_prefixes(a.name()))
                .collect();
            rate_columns(&p)
        }
        ExperimentKind::OneTier => {
            let mut p = kind_prefixes("two_tier");
            p.extend(kind_prefixes("one_tier"));
            rate_columns(&p)
        }
        _ => rate_columns(&kind_prefixes("")),
    }
}

fn is_drop_failure(e: &Error) -> bool {
    matches!(e, Error::Infeasible(_) | Error::Singular { .. } | Error::Degenerate(_))
}

struct DropOutcome {
    retries: usize,
    values: Option<Vec<f64>>,
}

fn run_drop(cfg: &ExperimentConfig, point: usize, drop: usize) -> Result<DropOutcome> {
    let path = drop_path(cfg, point, drop);
    let d = match draw_drop(cfg, &path) {
        Ok(d) => d,
        Err(e) if is_drop_failure(&e) => {
            log::warn!("{e}");
            return Ok(DropOutcome { retries: cfg.mc.max_resamples, values: None });
        }
        Err(e) => return Err(e),
    };
    match rate_drop(cfg, &d, &path) {
        Ok(v) => Ok(DropOutcome { retries: d.retries, values: Some(v) }),
        Err(e) if is_drop_failure(&e) => {
            log::warn!("drop {path:?} skipped: {e}");
            Ok(DropOutcome { retries: d.retries, values: None })
        }
        Err(e) => Err(e),
    }
}

fn rate_experiment(cfg: &ExperimentConfig, points: &[ExperimentConfig], values: &[f64]) -> Result<ResultTable> {
    let drops = cfg.mc.drops;
    let tasks: Vec<(usize, usize)> = (0..points.len()).flat_map(|p| (0..drops).map(move |d| (p, d))).collect();
    let outcomes: Vec<DropOutcome> =
        tasks.par_iter().map(|&(p, d)| run_drop(&points[p], p, d)).collect::<Result<_>>()?;
    let columns = rate_layout(cfg);
    let rows = points
        .iter()
        .zip(values)
        .zip(outcomes.chunks(drops))
        .map(|((pc, &value), outs)| {
            let d = pc.derived();
            let good: Vec<&Vec<f64>> = outs.iter().filter_map(|o| o.values.as_ref()).collect();
            let retries = outs.iter().map(|o| o.retries).sum();
            let head = [d.tau as f64, d.prelog, pc.antennas.n_bs as f64, d.n_sc as f64];
            let width = columns.len() - head.len();
            let mut avg = vec![0.0; width];
            for v in &good {
                for (a, x) in avg.iter_mut().zip(v.iter()) {
                    *a += x;
                }
            }
            let n = good.len() as f64;
            avg.iter_mut().for_each(|a| *a /= n);
            let mut values = head.to_vec();
            values.extend(avg);
            ResultRow { sweep_value: value, feasible: !good.is_empty(), drops: good.len(), retries, values }
        })
        .collect();
    Ok(table(cfg, columns, rows))
}

fn table(cfg: &ExperimentConfig, columns: Vec<String>, rows: Vec<ResultRow>) -> ResultTable {
    ResultTable {
        experiment: cfg.experiment,
        sweep_variable: cfg.sweep_variable(),
        seed: cfg.mc.seed,
        trials: cfg.mc.trials,
        columns,
        rows,
    }
}

/// Fixed-β study: bounds at the scaling-law powers, their large-array limits and
/// the powers needed to reach the target rate. Rates are worst-user values.
fn scaling_point(cfg: &ExperimentConfig, n_sc: usize) -> Result<(bool, Vec<f64>)> {
    let sc = &cfg.scaling;
    let law = sc.law;
    let (k, l, s, gamma) = (cfg.scheduling.k, cfg.scheduling.l, cfg.topology.small_cells, cfg.pilot.gamma);
    let links = ScheduledLinks::fixed_table(&sc.table, k, l, s);
    let plan = build_pilots(k, l, s, gamma)?;
    let scenario = Scenario::new(links.clone(), plan.clone(), law.powers(n_sc, s, sc.table.sigma0_sq), law.n_bs(n_sc), n_sc)?;
    let worst = |mue: &mut dyn Iterator<Item = f64>, sue: &mut dyn Iterator<Item = f64>| {
        (mue.fold(f64::INFINITY, f64::min), sue.fold(f64::INFINITY, f64::min))
    };
    let mut values = vec![plan.tau as f64, scenario.prelog(cfg.pilot.coherence)?, law.n_bs(n_sc) as f64, n_sc as f64];
    let mut feasible = true;
    for kind in PrecoderKind::ALL {
        let b = bound(kind, &scenario)?.rates;
        let (bm, bs) = worst(&mut b.mue.iter().copied(), &mut b.sue.iter().flatten().copied());
        let lim = asymptotic_rates(&links, &plan, &law, kind, sc.table.sigma0_sq)?;
        let (lm, ls) = worst(&mut lim.mue.iter().map(|x| x.value()), &mut lim.sue.iter().flatten().map(|x| x.value()));
        values.extend([bm, bs, lm, ls]);
        if sc.target_rate > 0.0 {
            let problem = PowerProblem {
                target: sc.target_rate,
                law,
                table: sc.table,
                k,
                l,
                s,
                gamma,
                kind,
                coherence: sc.apply_prelog.then_some(cfg.pilot.coherence),
            };
            let r = required_power(&problem, &[n_sc])?.remove(0);
            feasible &= r.feasible;
            if r.feasible {
                values.extend([r.p_bs_dbm, r.p_sc_dbm, r.residual_db, r.sweeps as f64]);
            } else {
                values.extend([f64::NAN; 4]);
            }
        } else {
            values.extend([f64::NAN; 4]);
        }
    }
    Ok((feasible, values))
}

fn scaling_experiment(cfg: &ExperimentConfig, points: &[ExperimentConfig], values: &[f64]) -> Result<ResultTable> {
    if cfg.topology.small_cells == 0 {
        return Err(Error::Config("power-scaling needs at least one small cell".into()));
    }
    let mut columns: Vec<String> = ["tau", "prelog", "n_bs", "n_sc"].map(String::from).to_vec();
    for p in kind_prefixes("") {
        columns.extend(SCALING_METRICS.iter().map(|m| format!("{p}_{m}")));
    }
    let rows = points
        .par_iter()
        .zip(values)
        .map(|(pc, &value)| {
            let (feasible, values) = scaling_point(pc, pc.n_sc())?;
            Ok(ResultRow { sweep_value: value, feasible, drops: 0, retries: 0, values })
        })
        .collect::<Result<_>>()?;
    Ok(table(cfg, columns, rows))
}

/// Runs every sweep point of `cfg` on a pool of `cfg.mc.workers` threads.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let values = cfg.sweep_values();
    let points = values.iter().map(|&v| cfg.at(v)).collect::<Result<Vec<_>>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.mc.workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    log::info!(
        "{}: {} points over {}, {} drops x {} trials",
        cfg.experiment,
        points.len(),
        cfg.sweep_variable().name(),
        cfg.mc.drops,
        cfg.mc.trials
    );
    pool.install(|| match cfg.experiment {
        ExperimentKind::PowerScaling => scaling_experiment(cfg, &points, &values),
        _ => rate_experiment(cfg, &points, &values),
    })
}
