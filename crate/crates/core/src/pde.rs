//! Front-fixing IMEX solver for the moving-boundary problem on `[0, h(t)]`.
//!
//! Nodes on `[0, E]` (`E` the zone's right end) are fixed, with every zone
//! edge on a node. The tail `[E, h(t)]` carries `m` uniform intervals that
//! stretch with the front, so a tail node at `y ∈ [0, 1]` moves with speed
//! `y h'`. Each step solves
//!
//! ```text
//! (I - dt (D + V)) uⁿ⁺¹ = uⁿ + dt R(uⁿ)
//! ```
//!
//! with `D` the three-point flux form of `u_xx` on the nonuniform nodes, `V`
//! the central advection `v u_x` of the moving nodes and `R` the reaction,
//! blended by half-cell lengths at nodes on a zone edge. Where the reaction
//! is damping (`R' < 0`) that part moves into the implicit side, linearised
//! at `uⁿ`, so large data stay stable. Then the front moves
//! by `dt h'` with `h' = -μ u_x(h)` from a one-sided second-order stencil.

use std::ops::ControlFlow;

use serde::Serialize;
use thiserror::Error;

use crate::model::{InitialData, ModelError, PairSummary, ReactionPair, ZoneLayout};
use crate::numerics::tridiag::solve_in_place;
use crate::phaseplane::Profile;
use crate::semiwave::SemiWave;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PdeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("non-finite solution at t = {t}")]
    NonFinite { t: f64 },
    #[error("need at least {need} samples in the window, have {have}")]
    InsufficientSamples { need: usize, have: usize },
    #[error("semi-wave does not match the run: {0}")]
    Mismatch(String),
}

/// Fronts beyond this are treated as a numerical blow-up.
pub const MAX_FRONT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub dx_target: f64,
    pub dt: f64,
    pub t_max: f64,
    pub mu: f64,
    /// Steps between stored profiles (and monitor calls).
    pub snapshot_every: usize,
    /// Smallest admissible `h - E`.
    pub h_floor: f64,
    /// Re-grid the tail once its spacing exceeds this multiple of `dx_target`.
    pub regrid_ratio: f64,
}

impl SolverConfig {
    /// `dt = dx / 4` and one snapshot per unit of time.
    pub fn new(dx_target: f64, t_max: f64, mu: f64) -> Self {
        let dt = 0.25 * dx_target;
        Self {
            dx_target,
            dt,
            t_max,
            mu,
            snapshot_every: ((1.0 / dt).round() as usize).max(1),
            h_floor: 1e-3,
            regrid_ratio: 2.0,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self.snapshot_every = ((1.0 / dt).round() as usize).max(1);
        self
    }

    /// The explicit growth part of the reaction needs `dt·Lip < 1/2` on `[0, 2]`.
    pub fn dt_bound(pair: &ReactionPair) -> f64 {
        0.5 / pair.lip_f().max(pair.lip_g())
    }

    pub fn validate(&self, pair: &ReactionPair) -> Result<(), PdeError> {
        let positive = [("dx_target", self.dx_target), ("dt", self.dt), ("t_max", self.t_max), ("mu", self.mu)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(PdeError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.snapshot_every == 0 {
            return Err(PdeError::Config("snapshot_every must be at least 1".into()));
        }
        if !(self.h_floor >= 0.0) || !(self.regrid_ratio > 1.0) {
            return Err(PdeError::Config("need h_floor ≥ 0 and regrid_ratio > 1".into()));
        }
        let bound = Self::dt_bound(pair);
        if self.dt > bound {
            return Err(PdeError::Config(format!("dt = {} exceeds the reaction bound {bound}", self.dt)));
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::new(0.02, 200.0, 1.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub h: f64,
    pub profile: Profile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Horizon,
    Monitor,
    /// `h0 - E` was below `h_floor`; nothing was integrated.
    FrontCollapse,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub ts: Vec<f64>,
    pub hs: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub layout: ZoneLayout,
    pub pair: PairSummary,
    pub config: SolverConfig,
    pub sigma: f64,
    pub h0: f64,
    pub stop: StopReason,
    pub steps: usize,
    pub regrids: usize,
}

impl Trajectory {
    pub fn t_final(&self) -> f64 {
        *self.ts.last().unwrap_or(&0.0)
    }

    pub fn h_final(&self) -> f64 {
        *self.hs.last().unwrap_or(&self.h0)
    }

    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }
}

/// State handed to a monitor at snapshot times.
pub struct StepView<'a> {
    pub t: f64,
    pub h: f64,
    pub xs: &'a [f64],
    pub us: &'a [f64],
    pub ts: &'a [f64],
    pub hs: &'a [f64],
}

struct Grid {
    /// Fixed nodes `0 = x₀ < … < x_e = E`.
    fixed: Vec<f64>,
    /// Share of each fixed node's dual cell lying in the zone; for node `E`
    /// the zone part of its dual cell in length units.
    zone_share: Vec<f64>,
    edge: f64,
    m: usize,
}

impl Grid {
    fn new(layout: &ZoneLayout, h: f64, dx: f64) -> Self {
        let mut cuts = vec![0.0];
        if layout.l1() > 0.0 {
            cuts.push(layout.l1());
        }
        cuts.push(layout.l2());
        let mut fixed = vec![0.0];
        let mut in_zone = Vec::new();
        for w in cuts.windows(2) {
            let n = (((w[1] - w[0]) / dx).ceil() as usize).max(2);
            let zone = layout.in_zone(0.5 * (w[0] + w[1]));
            for k in 1..=n {
                fixed.push(if k == n { w[1] } else { w[0] + (w[1] - w[0]) * k as f64 / n as f64 });
                in_zone.push(zone);
            }
        }
        // Dual cell of node i: half of interval i-1 (left) and half of interval i (right).
        let e = fixed.len() - 1;
        let zone_share = (0..=e)
            .map(|i| {
                let (mut zl, mut tot) = (0.0, 0.0);
                if i > 0 {
                    let a = fixed[i] - fixed[i - 1];
                    tot += a;
                    if in_zone[i - 1] {
                        zl += a;
                    }
                }
                if i < e {
                    let b = fixed[i + 1] - fixed[i];
                    tot += b;
                    if in_zone[i] {
                        zl += b;
                    }
                }
                // Node E is finished in `share`, where the tail spacing is known.
                if i == e {
                    return zl;
                }
                zl / tot
            })
            .collect();
        let edge = layout.l2();
        let m = tail_intervals(h - edge, dx);
        Self { fixed, zone_share, edge, m }
    }

    fn nodes(&self, h: f64) -> Vec<f64> {
        let mut xs = self.fixed.clone();
        let len = h - self.edge;
        xs.extend((1..=self.m).map(|j| if j == self.m { h } else { self.edge + len * j as f64 / self.m as f64 }));
        xs
    }

    /// Zone share of node `i`'s dual cell given tail spacing `delta`.
    fn share(&self, i: usize, delta: f64) -> f64 {
        let e = self.fixed.len() - 1;
        match i.cmp(&e) {
            std::cmp::Ordering::Less => self.zone_share[i],
            std::cmp::Ordering::Equal => self.zone_share[e] / (self.zone_share[e] + delta),
            std::cmp::Ordering::Greater => 0.0,
        }
    }
}

fn tail_intervals(len: f64, dx: f64) -> usize {
    ((len / dx).ceil() as usize).max(4)
}

/// Runs to `cfg.t_max`.
pub fn simulate(
    layout: &ZoneLayout,
    pair: &ReactionPair,
    init: &InitialData,
    cfg: &SolverConfig,
) -> Result<Trajectory, PdeError> {
    simulate_with(layout, pair, init, cfg, |_| ControlFlow::Continue(()))
}

/// As [`simulate`]; `monitor` sees every snapshot and may stop the run.
pub fn simulate_with<M>(
    layout: &ZoneLayout,
    pair: &ReactionPair,
    init: &InitialData,
    cfg: &SolverConfig,
    mut monitor: M,
) -> Result<Trajectory, PdeError>
where
    M: FnMut(&StepView<'_>) -> ControlFlow<()>,
{
    cfg.validate(pair)?;
    init.check_against(layout)?;
    let mut traj = Trajectory {
        ts: vec![0.0],
        hs: vec![init.h0],
        snapshots: Vec::new(),
        layout: *layout,
        pair: pair.summary(),
        config: *cfg,
        sigma: init.sigma,
        h0: init.h0,
        stop: StopReason::Horizon,
        steps: 0,
        regrids: 0,
    };
    if init.h0 - layout.l2() < cfg.h_floor {
        traj.stop = StopReason::FrontCollapse;
        return Ok(traj);
    }

    let mut h = init.h0;
    let mut grid = Grid::new(layout, h, cfg.dx_target);
    let mut xs = grid.nodes(h);
    let mut u: Vec<f64> = xs.iter().map(|&x| init.value(x)).collect();
    *u.last_mut().expect("grid has nodes") = 0.0;
    let mut t = 0.0;

    let snap =
        |t: f64, h: f64, xs: &[f64], u: &[f64]| Snapshot { t, h, profile: Profile::new(xs.to_vec(), u.to_vec()) };
    traj.snapshots.push(snap(t, h, &xs, &u));

    let mut lower = Vec::new();
    let mut diag = Vec::new();
    let mut upper = Vec::new();
    let mut rhs = Vec::new();
    let mut scratch = Vec::new();
    let e = grid.fixed.len() - 1;
    let (f_nl, g_nl) = (pair.f_nonlinearity(), pair.g_nonlinearity());
    let n_steps = (cfg.t_max / cfg.dt).ceil() as usize;

    for step in 1..=n_steps {
        let dt = cfg.dt.min(cfg.t_max - t);
        if dt <= 0.0 {
            break;
        }
        let n = xs.len() - 1;
        let delta = (h - grid.edge) / grid.m as f64;
        let speed = (cfg.mu * (4.0 * u[n - 1] - u[n - 2]) / (2.0 * delta)).max(0.0);

        lower.clear();
        diag.clear();
        upper.clear();
        rhs.clear();
        for i in 0..n {
            let (l, d, r) = if i == 0 {
                let a = xs[1] - xs[0];
                (0.0, -2.0 / (a * a), 2.0 / (a * a))
            } else {
                let a = xs[i] - xs[i - 1];
                let b = xs[i + 1] - xs[i];
                let cl = 2.0 / (a * (a + b));
                let cr = 2.0 / (b * (a + b));
                if i > e {
                    let v = speed * (xs[i] - grid.edge) / (h - grid.edge);
                    let adv = v / (a + b);
                    (cl - adv, -(cl + cr), cr + adv)
                } else {
                    (cl, -(cl + cr), cr)
                }
            };
            let w = grid.share(i, delta);
            let react = w * pair.f(u[i]) + (1.0 - w) * pair.g(u[i]);
            // Damping part of the reaction taken implicitly, linearised at uⁿ.
            let slope = w * f_nl.derivative(u[i]) + (1.0 - w) * g_nl.derivative(u[i]);
            let k = slope.min(0.0);
            lower.push(-dt * l);
            diag.push(1.0 - dt * (d + k));
            upper.push(if i + 1 < n { -dt * r } else { 0.0 });
            rhs.push(u[i] + dt * (react - k * u[i]));
        }
        solve_in_place(&lower, &diag, &upper, &mut rhs, &mut scratch);
        u[..n].copy_from_slice(&rhs);
        u[n] = 0.0;
        h += dt * speed;
        t += dt;
        if u.iter().any(|v| !v.is_finite()) || !(h < MAX_FRONT) {
            return Err(PdeError::NonFinite { t });
        }

        if (h - grid.edge) / grid.m as f64 > cfg.regrid_ratio * cfg.dx_target {
            let old_tail: Vec<(f64, f64)> = (e..xs.len()).map(|i| (xs[i], u[i])).collect();
            grid.m = tail_intervals(h - grid.edge, cfg.dx_target);
            let new_xs = grid.nodes(h);
            // Old tail nodes stretched to the new front before interpolating.
            let old_len = old_tail.last().expect("tail").0 - grid.edge;
            let scale = (h - grid.edge) / old_len;
            let ox: Vec<f64> = old_tail.iter().map(|p| grid.edge + (p.0 - grid.edge) * scale).collect();
            let ou: Vec<f64> = old_tail.iter().map(|p| p.1).collect();
            let mut nu = u[..e].to_vec();
            nu.extend(new_xs[e..].iter().map(|&x| lerp(&ox, &ou, x)));
            *nu.last_mut().expect("nodes") = 0.0;
            u = nu;
            traj.regrids += 1;
        }
        xs = grid.nodes(h);
        traj.ts.push(t);
        traj.hs.push(h);
        traj.steps = step;

        let last = step == n_steps || t >= cfg.t_max;
        if step % cfg.snapshot_every == 0 || last {
            traj.snapshots.push(snap(t, h, &xs, &u));
            let view = StepView { t, h, xs: &xs, us: &u, ts: &traj.ts, hs: &traj.hs };
            if monitor(&view).is_break() {
                traj.stop = StopReason::Monitor;
                return Ok(traj);
            }
        }
    }
    Ok(traj)
}

fn lerp(xs: &[f64], us: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|&s| s <= x).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let w = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
    us[k - 1] + w * (us[k] - us[k - 1])
}

/// Least-squares slope of `h(t)` over the trailing `window_fraction` of the run.
pub fn front_speed_estimate(traj: &Trajectory, window_fraction: f64) -> Result<f64, PdeError> {
    slope_over_window(&traj.ts, &traj.hs, window_fraction)
}

pub fn slope_over_window(ts: &[f64], hs: &[f64], window_fraction: f64) -> Result<f64, PdeError> {
    const NEED: usize = 50;
    let (t0, t1) = match (ts.first(), ts.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(PdeError::InsufficientSamples { need: NEED, have: 0 }),
    };
    let start = t1 - window_fraction.clamp(0.0, 1.0) * (t1 - t0);
    let k = ts.partition_point(|&t| t < start);
    let (ts, hs) = (&ts[k..], &hs[k..]);
    if ts.len() < NEED {
        return Err(PdeError::InsufficientSamples { need: NEED, have: ts.len() });
    }
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let hm = hs.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, h) in ts.iter().zip(hs) {
        sxy += (t - tm) * (h - hm);
        sxx += (t - tm) * (t - tm);
    }
    Ok(sxy / sxx)
}

/// `sup_x |u(t, x) - q_{c*}(h(t) - x)|` at every snapshot, as `(t, error)`.
pub fn profile_error_vs_semiwave(traj: &Trajectory, sw: &SemiWave) -> Result<Vec<(f64, f64)>, PdeError> {
    if (traj.config.mu - sw.mu).abs() > 1e-12 * sw.mu.abs().max(1.0) {
        return Err(PdeError::Mismatch(format!("μ = {} in the run, {} in the semi-wave", traj.config.mu, sw.mu)));
    }
    if traj.pair != sw.pair {
        return Err(PdeError::Mismatch("reaction pairs differ".into()));
    }
    Ok(traj.snapshots.iter().map(|s| (s.t, profile_error(&s.profile, s.h, sw))).collect())
}

/// `sup |u(x) - q(h - x)|` over the nodes of `profile`.
pub fn profile_error(profile: &Profile, h: f64, sw: &SemiWave) -> f64 {
    profile.xs.iter().zip(&profile.us).map(|(&x, &u)| (u - sw.q(h - x)).abs()).fold(0.0, f64::max)
}
