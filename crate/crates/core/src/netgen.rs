//! Two-tier geometry, pathloss and biased association.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};

/// Links shorter than this are evaluated at this distance.
pub const MIN_LINK_DISTANCE_M: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Clone, Debug)]
pub struct NetworkLayout {
    pub bs_position: Point,
    pub sc_positions: Vec<Point>,
    pub cell_radius: f64,
    /// `None` when the small cells were dropped uniformly instead of on a ring.
    pub sc_ring_radius: Option<f64>,
}

impl NetworkLayout {
    pub fn small_cells(&self) -> usize {
        self.sc_positions.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScPlacement {
    Ring,
    Uniform,
}

/// BS at the origin, `s` small cells equally spaced on a ring; SC `i` sits at angle 2πi/s.
pub fn place_nodes(s: usize, sc_ring_radius: f64, cell_radius: f64) -> Result<NetworkLayout> {
    if s == 0 {
        return config_err("at least one small cell is required");
    }
    if !(cell_radius > 0.0) || !(sc_ring_radius > 0.0) || sc_ring_radius > cell_radius {
        return config_err(format!(
            "need 0 < sc_ring_radius ({sc_ring_radius}) <= cell_radius ({cell_radius})"
        ));
    }
    let sc_positions = (0..s)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / s as f64;
            Point::new(sc_ring_radius * a.cos(), sc_ring_radius * a.sin())
        })
        .collect();
    Ok(NetworkLayout {
        bs_position: Point::ORIGIN,
        sc_positions,
        cell_radius,
        sc_ring_radius: Some(sc_ring_radius),
    })
}

/// Alternative layout with small cells dropped uniformly over the macro disk.
pub fn place_nodes_uniform<R: Rng + ?Sized>(
    s: usize,
    cell_radius: f64,
    rng: &mut R,
) -> Result<NetworkLayout> {
    if s == 0 {
        return config_err("at least one small cell is required");
    }
    if !(cell_radius > 0.0) {
        return config_err(format!("cell_radius must be positive, got {cell_radius}"));
    }
    Ok(NetworkLayout {
        bs_position: Point::ORIGIN,
        sc_positions: place_users(s, cell_radius, rng).positions,
        cell_radius,
        sc_ring_radius: None,
    })
}

#[derive(Clone, Debug, Default)]
pub struct UserPopulation {
    pub positions: Vec<Point>,
}

impl UserPopulation {
    pub fn count(&self) -> usize {
        self.positions.len()
    }
}

/// `n` points uniform over the disk (radius ∝ √u).
pub fn place_users<R: Rng + ?Sized>(n: usize, cell_radius: f64, rng: &mut R) -> UserPopulation {
    let positions = (0..n)
        .map(|_| {
            let r = cell_radius * rng.random::<f64>().sqrt();
            let a = 2.0 * PI * rng.random::<f64>();
            Point::new(r * a.cos(), r * a.sin())
        })
        .collect();
    UserPopulation { positions }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathlossKind {
    Macro,
    SmallCell,
}

/// Pathloss in dB for a link of `d_km` kilometres.
pub fn pathloss_db(kind: PathlossKind, d_km: f64) -> Result<f64> {
    if !(d_km > 0.0) || !d_km.is_finite() {
        return Err(Error::Domain(format!("link distance must be positive, got {d_km} km")));
    }
    Ok(match kind {
        PathlossKind::Macro => 128.1 + 37.6 * d_km.log10(),
        PathlossKind::SmallCell => 140.7 + 36.7 * d_km.log10(),
    })
}

/// Linear large-scale gain for a link of `d_m` metres, with the minimum-distance clamp.
pub fn link_gain(kind: PathlossKind, d_m: f64) -> Result<f64> {
    let d = d_m.max(MIN_LINK_DISTANCE_M);
    Ok(10f64.powf(-pathloss_db(kind, d / 1000.0)? / 10.0))
}

/// Large-scale fading from every node to every user in the drop.
#[derive(Clone, Debug)]
pub struct LargeScaleProfile {
    /// BS → user, indexed by user.
    pub beta_bm: Vec<f64>,
    /// SC → user, indexed `[sc][user]`.
    pub beta_sm: Vec<Vec<f64>>,
}

impl LargeScaleProfile {
    pub fn users(&self) -> usize {
        self.beta_bm.len()
    }

    pub fn small_cells(&self) -> usize {
        self.beta_sm.len()
    }
}

pub fn large_scale_profile(
    layout: &NetworkLayout,
    users: &UserPopulation,
) -> Result<LargeScaleProfile> {
    if users.count() == 0 {
        return config_err("user population is empty");
    }
    let beta_bm = users
        .positions
        .iter()
        .map(|u| link_gain(PathlossKind::Macro, u.distance(&layout.bs_position)))
        .collect::<Result<Vec<_>>>()?;
    let beta_sm = layout
        .sc_positions
        .iter()
        .map(|sc| {
            users
                .positions
                .iter()
                .map(|u| link_gain(PathlossKind::SmallCell, u.distance(sc)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LargeScaleProfile { beta_bm, beta_sm })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cell {
    Macro,
    Small(usize),
}

#[derive(Clone, Debug)]
pub struct Association {
    pub tags: Vec<Cell>,
    /// U_M, ascending user indices.
    pub macro_candidates: Vec<usize>,
    /// U_S^(m) per small cell, ascending user indices.
    pub sc_candidates: Vec<Vec<usize>>,
}

/// Biased max-received-power association. Ties go to the macro cell, then the lowest SC.
pub fn associate(
    profile: &LargeScaleProfile,
    kappa_bs: f64,
    kappa_sc: f64,
    p_bs: f64,
    p_sc: f64,
) -> Result<Association> {
    if !(kappa_bs > 0.0 && kappa_sc > 0.0 && p_bs > 0.0 && p_sc > 0.0) {
        return config_err("bias factors and powers must be positive");
    }
    let s = profile.small_cells();
    let mut tags = Vec::with_capacity(profile.users());
    let mut macro_candidates = Vec::new();
    let mut sc_candidates = vec![Vec::new(); s];
    for u in 0..profile.users() {
        let mut best = kappa_bs * p_bs * profile.beta_bm[u];
        let mut cell = Cell::Macro;
        for (m, row) in profile.beta_sm.iter().enumerate() {
            let v = kappa_sc * p_sc * row[u];
            if v > best {
                best = v;
                cell = Cell::Small(m);
            }
        }
        match cell {
            Cell::Macro => macro_candidates.push(u),
            Cell::Small(m) => sc_candidates[m].push(u),
        }
        tags.push(cell);
    }
    Ok(Association { tags, macro_candidates, sc_candidates })
}

/// Large-scale coefficients restricted to the scheduled users.
///
/// Small cell `m` serves `beta_bs[m].len()` users; the `j`-th of them uses pilot `j`
/// of its group. Cells may hold fewer users than L while a schedule is being built.
#[derive(Clone, Debug, PartialEq)]
pub struct ScheduledLinks {
    /// BS → MUE i.
    pub beta_bm: Vec<f64>,
    /// SC n → MUE i, `[n][i]`.
    pub beta_sm: Vec<Vec<f64>>,
    /// BS → SUE j of SC m, `[m][j]`.
    pub beta_bs: Vec<Vec<f64>>,
    /// SC n → SUE j of SC m, `[n][m][j]`.
    pub beta_ss: Vec<Vec<Vec<f64>>>,
}

/// Deterministic β values used for the power-scaling studies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixedBetaTable {
    pub beta_bm: f64,
    pub beta_bs: f64,
    pub beta_ss_own: f64,
    pub beta_ss_cross: f64,
    pub beta_sm: f64,
    pub sigma0_sq: f64,
}

impl Default for FixedBetaTable {
    fn default() -> Self {
        FixedBetaTable {
            beta_bm: 1.0,
            beta_bs: 0.2,
            beta_ss_own: 5.0,
            beta_ss_cross: 0.6,
            beta_sm: 0.6,
            sigma0_sq: 1.0,
        }
    }
}

impl ScheduledLinks {
    pub fn from_schedule(profile: &LargeScaleProfile, mue: &[usize], sue: &[Vec<usize>]) -> Self {
        let s = sue.len();
        debug_assert_eq!(s, profile.small_cells());
        ScheduledLinks {
            beta_bm: mue.iter().map(|&u| profile.beta_bm[u]).collect(),
            beta_sm: (0..s)
                .map(|n| mue.iter().map(|&u| profile.beta_sm[n][u]).collect())
                .collect(),
            beta_bs: sue
                .iter()
                .map(|set| set.iter().map(|&u| profile.beta_bm[u]).collect())
                .collect(),
            beta_ss: (0..s)
                .map(|n| {
                    sue.iter()
                        .map(|set| set.iter().map(|&u| profile.beta_sm[n][u]).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn fixed_table(table: &FixedBetaTable, k: usize, l: usize, s: usize) -> Self {
        ScheduledLinks {
            beta_bm: vec![table.beta_bm; k],
            beta_sm: vec![vec![table.beta_sm; k]; s],
            beta_bs: vec![vec![table.beta_bs; l]; s],
            beta_ss: (0..s)
                .map(|n| {
                    (0..s)
                        .map(|m| {
                            let b = if n == m { table.beta_ss_own } else { table.beta_ss_cross };
                            vec![b; l]
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// Single-tier view: every scheduled user is served by the BS, no small cells.
    pub fn one_tier(&self) -> Self {
        let mut beta_bm = self.beta_bm.clone();
        for cell in &self.beta_bs {
            beta_bm.extend_from_slice(cell);
        }
        ScheduledLinks { beta_bm, beta_sm: Vec::new(), beta_bs: Vec::new(), beta_ss: Vec::new() }
    }

    pub fn k(&self) -> usize {
        self.beta_bm.len()
    }

    pub fn s(&self) -> usize {
        self.beta_bs.len()
    }

    pub fn l(&self, m: usize) -> usize {
        self.beta_bs[m].len()
    }

    pub fn l_max(&self) -> usize {
        self.beta_bs.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn sue_count(&self) -> usize {
        self.beta_bs.iter().map(Vec::len).sum()
    }
}
