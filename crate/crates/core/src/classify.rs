//! Long-time outcome classification and the σ-threshold search.
//!
//! Only sufficient criteria are used: a run is Spreading once `u` exceeds
//! `α = θ* + δ_s` on a stretch of the bistable region as wide as the bump
//! `v_α`, Vanishing once the front has stalled and `u` is small and falling,
//! and Transition (connected zone only) when the late profile sits within
//! `ε_t` of a ground state. Everything else is Undetermined.

use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::{InitialData, LayoutKind, ModelError, ReactionPair, ZoneLayout};
use crate::pde::{simulate_with, PdeError, SolverConfig, StepView, StopReason, Trajectory};
use crate::phaseplane::{self, PhaseError, Profile};
use crate::spectral::Extent;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error("{0}")]
    Input(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Vanishing,
    Spreading,
    Transition,
    Undetermined,
}

impl OutcomeKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::Vanishing => "vanishing",
            Self::Spreading => "spreading",
            Self::Transition => "transition",
            Self::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub sup_u: f64,
    pub h_final: f64,
    /// Growth of `h` over the trailing plateau window.
    pub h_growth: f64,
    /// Longest stretch of the bistable region with `u > α`.
    pub plateau_width: f64,
    pub required_width: f64,
    pub ground_state_distance: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub kind: OutcomeKind,
    pub evidence: Evidence,
    pub t_decided: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifierTolerances {
    pub t_min: f64,
    pub eps_v: f64,
    pub plateau_dh: f64,
    pub plateau_fraction: f64,
    pub delta_s: f64,
    pub eps_t: f64,
    pub transition_fraction: f64,
}

impl Default for ClassifierTolerances {
    fn default() -> Self {
        Self {
            t_min: 50.0,
            eps_v: 1e-3,
            plateau_dh: 1e-4,
            plateau_fraction: 0.2,
            delta_s: 0.02,
            eps_t: 0.05,
            transition_fraction: 0.3,
        }
    }
}

/// Quantities fixed by `(pair, layout, tol)` that every check reuses.
#[derive(Debug, Clone)]
pub struct Context {
    pub layout: ZoneLayout,
    pub theta_star: f64,
    pub alpha: f64,
    pub bump_width: f64,
    pub ground_states: Vec<Profile>,
    pub tol: ClassifierTolerances,
}

impl Context {
    pub fn new(pair: &ReactionPair, layout: &ZoneLayout, tol: &ClassifierTolerances) -> Result<Self, ClassifyError> {
        let theta_star = pair.theta_star()?;
        let alpha = theta_star + tol.delta_s;
        let bump_width = 2.0 * phaseplane::bump_half_width(alpha, pair)?;
        let ground_states = match layout {
            ZoneLayout::Connected { l } => phaseplane::ground_states_connected(*l, pair)?
                .into_iter()
                .filter(|g| g.exists)
                .map(|g| g.profile)
                .collect(),
            ZoneLayout::Separated { .. } => Vec::new(),
        };
        Ok(Self { layout: *layout, theta_star, alpha, bump_width, ground_states, tol: *tol })
    }

    /// Longest run of nodes outside the zone with `u > α`, as a length.
    fn plateau_width(&self, xs: &[f64], us: &[f64]) -> f64 {
        let (l1, l2) = (self.layout.l1(), self.layout.l2());
        let mut best: f64 = 0.0;
        let mut start: Option<f64> = None;
        for (&x, &u) in xs.iter().zip(us) {
            let outside = x <= l1 && l1 > 0.0 || x >= l2;
            if outside && u > self.alpha {
                let s = *start.get_or_insert(x);
                best = best.max(x - s);
            } else {
                start = None;
            }
        }
        best
    }

    fn spreading(&self, xs: &[f64], us: &[f64]) -> (bool, f64) {
        let w = self.plateau_width(xs, us);
        (w >= self.bump_width, w)
    }

    fn ground_state_distance(&self, profile: &Profile) -> Option<f64> {
        self.ground_states
            .iter()
            .map(|gs| {
                profile.xs.iter().zip(&profile.us).map(|(&x, &u)| (u - gs.value_or(x, 0.0)).abs()).fold(0.0, f64::max)
            })
            .min_by(f64::total_cmp)
    }
}

fn trailing(ts: &[f64], fraction: f64) -> usize {
    let (t0, t1) = (ts[0], ts[ts.len() - 1]);
    ts.partition_point(|&t| t < t1 - fraction * (t1 - t0))
}

fn vanishing(ctx: &Context, t: f64, ts: &[f64], hs: &[f64], sups: &[f64]) -> (bool, f64) {
    let k = trailing(ts, ctx.tol.plateau_fraction);
    let growth = hs[hs.len() - 1] - hs[k];
    let sup = *sups.last().unwrap_or(&f64::INFINITY);
    let falling = sups.len() >= 2 && sups[sups.len() - 1] < sups[sups.len() - 2];
    let ok = t >= ctx.tol.t_min && sup < ctx.tol.eps_v && growth < ctx.tol.plateau_dh && falling;
    (ok, growth)
}

/// Classifies a finished trajectory.
pub fn classify(traj: &Trajectory, ctx: &Context) -> Outcome {
    let sups: Vec<f64> = traj.snapshots.iter().map(|s| s.profile.sup()).collect();
    let t = traj.t_final();
    let last = traj.last().expect("trajectories always hold the initial snapshot");
    let (spread, width) = ctx.spreading(&last.profile.xs, &last.profile.us);
    let (vanish, growth) = vanishing(ctx, t, &traj.ts, &traj.hs, &sups);
    let mut evidence = Evidence {
        sup_u: *sups.last().unwrap_or(&0.0),
        h_final: traj.h_final(),
        h_growth: growth,
        plateau_width: width,
        required_width: ctx.bump_width,
        ground_state_distance: None,
        note: None,
    };
    let kind = if spread {
        OutcomeKind::Spreading
    } else if vanish {
        OutcomeKind::Vanishing
    } else if transition(traj, ctx, &sups, &mut evidence) {
        OutcomeKind::Transition
    } else {
        evidence.note = Some(match traj.stop {
            StopReason::FrontCollapse => "initial front too close to the zone edge to integrate".into(),
            _ if t < ctx.tol.t_min => format!("horizon {t} shorter than the minimum {}", ctx.tol.t_min),
            _ => "no criterion met by the horizon".into(),
        });
        OutcomeKind::Undetermined
    };
    Outcome { kind, evidence, t_decided: t }
}

fn transition(traj: &Trajectory, ctx: &Context, sups: &[f64], evidence: &mut Evidence) -> bool {
    if ctx.layout.kind() != LayoutKind::Connected || traj.t_final() < ctx.tol.t_min {
        return false;
    }
    let snap_ts: Vec<f64> = traj.snapshots.iter().map(|s| s.t).collect();
    let k = trailing(&snap_ts, ctx.tol.transition_fraction);
    let band = sups[k..].iter().all(|&s| s > ctx.tol.eps_v && s < ctx.theta_star);
    let grows = traj.h_final() > traj.h0;
    let last = traj.last().expect("initial snapshot");
    let d = ctx.ground_state_distance(&last.profile);
    evidence.ground_state_distance = d;
    band && grows && d.is_some_and(|d| d < ctx.tol.eps_t)
}

/// Simulates and classifies, stopping as soon as Spreading or Vanishing is
/// certified.
pub fn run_and_classify(
    pair: &ReactionPair,
    ctx: &Context,
    init: &InitialData,
    cfg: &SolverConfig,
) -> Result<(Outcome, Trajectory), ClassifyError> {
    let mut sups = Vec::new();
    let monitor = |v: &StepView<'_>| {
        sups.push(v.us.iter().copied().fold(0.0, f64::max));
        if ctx.spreading(v.xs, v.us).0 || vanishing(ctx, v.t, v.ts, v.hs, &sups).0 {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    };
    let traj = simulate_with(&ctx.layout, pair, init, cfg, monitor)?;
    Ok((classify(&traj, ctx), traj))
}

/// Estimated sharp thresholds and every probe made on the way.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    /// Supremum of certified-Vanishing σ (0 if none was found).
    pub sigma_lower: f64,
    /// Infimum of certified-Spreading σ (`inf` if none was found).
    pub sigma_upper: Extent,
    pub bands: Vec<(f64, Outcome)>,
    pub bisection_tol: f64,
    pub complete: bool,
    pub probes: usize,
}

impl ThresholdReport {
    pub fn count(&self, kind: OutcomeKind) -> usize {
        self.bands.iter().filter(|b| b.1.kind == kind).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchOptions {
    pub bisect_tol: f64,
    pub max_probes: usize,
    pub sigma_start: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { bisect_tol: 1e-3, max_probes: 60, sigma_start: 1.0, sigma_min: 1e-3, sigma_max: 1e3 }
    }
}

/// Largest certified Vanishing σ and smallest σ that is not; likewise for
/// Spreading from above.
#[derive(Default)]
struct Brackets {
    v_lo: Option<f64>,
    v_hi: Option<f64>,
    s_lo: Option<f64>,
    s_hi: Option<f64>,
}

impl Brackets {
    fn record(&mut self, sigma: f64, kind: OutcomeKind) {
        let up = |b: &mut Option<f64>| *b = Some(b.map_or(sigma, |v| v.max(sigma)));
        let down = |b: &mut Option<f64>| *b = Some(b.map_or(sigma, |v| v.min(sigma)));
        if kind == OutcomeKind::Vanishing {
            up(&mut self.v_lo);
        } else {
            down(&mut self.v_hi);
        }
        if kind == OutcomeKind::Spreading {
            down(&mut self.s_hi);
        } else {
            up(&mut self.s_lo);
        }
    }
}

struct Prober<'a> {
    pair: &'a ReactionPair,
    ctx: &'a Context,
    shape: &'a InitialData,
    cfg: &'a SolverConfig,
    bands: Vec<(f64, Outcome)>,
    budget: usize,
}

impl Prober<'_> {
    fn probe(&mut self, sigma: f64) -> Result<Option<OutcomeKind>, ClassifyError> {
        if self.bands.len() >= self.budget {
            return Ok(None);
        }
        let (out, _) = run_and_classify(self.pair, self.ctx, &self.shape.with_sigma(sigma), self.cfg)?;
        let kind = out.kind;
        self.bands.push((sigma, out));
        Ok(Some(kind))
    }
}

/// Brackets and bisects σ_* (last certified Vanishing) and σ* (first
/// certified Spreading) for initial data `σ φ`. A probe that is not
/// certified on one side counts as "not that outcome" for that bracket.
pub fn sigma_thresholds(
    pair: &ReactionPair,
    layout: &ZoneLayout,
    shape: &InitialData,
    cfg: &SolverConfig,
    tol: &ClassifierTolerances,
    opts: &SearchOptions,
) -> Result<ThresholdReport, ClassifyError> {
    if !(opts.bisect_tol > 0.0) {
        return Err(ClassifyError::Input(format!("bisection tolerance must be positive, got {}", opts.bisect_tol)));
    }
    let ctx = Context::new(pair, layout, tol)?;
    let mut p = Prober { pair, ctx: &ctx, shape, cfg, bands: Vec::new(), budget: opts.max_probes };
    use OutcomeKind::*;

    let mut br = Brackets::default();
    let mut complete = true;

    // Exponential search.
    let mut sigma = opts.sigma_start;
    let Some(first) = p.probe(sigma)? else {
        return Err(ClassifyError::Input("probe budget is zero".into()));
    };
    br.record(sigma, first);
    while br.s_hi.is_none() && sigma < opts.sigma_max {
        sigma *= 2.0;
        match p.probe(sigma)? {
            Some(k) => br.record(sigma, k),
            None => break,
        }
    }
    sigma = opts.sigma_start;
    while br.v_lo.is_none() && sigma > opts.sigma_min {
        sigma *= 0.5;
        match p.probe(sigma)? {
            Some(k) => br.record(sigma, k),
            None => break,
        }
    }
    // Bisection on each boundary, geometric midpoints.
    for which in [Vanishing, Spreading] {
        loop {
            let (lo, hi) = match which {
                Vanishing => (br.v_lo, br.v_hi),
                _ => (br.s_lo, br.s_hi),
            };
            let (Some(lo), Some(hi)) = (lo, hi) else { break };
            if hi - lo <= opts.bisect_tol * hi || hi <= lo {
                break;
            }
            let mid = (lo * hi).sqrt();
            match p.probe(mid)? {
                Some(k) => br.record(mid, k),
                None => {
                    complete = false;
                    break;
                }
            }
        }
    }
    if p.bands.len() >= opts.max_probes {
        complete = false;
    }
    let mut bands = p.bands;
    bands.sort_by(|a, b| a.0.total_cmp(&b.0));
    let probes = bands.len();
    Ok(ThresholdReport {
        sigma_lower: br.v_lo.unwrap_or(0.0),
        sigma_upper: Extent(br.s_hi.unwrap_or(f64::INFINITY)),
        bands,
        bisection_tol: opts.bisect_tol,
        complete,
        probes,
    })
}

/// How each diagram row builds its layout and initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagramSpec {
    pub kind: LayoutKind,
    /// Left end of a separated zone.
    pub l1: f64,
    /// `h₀ = L₂ + h0_offset`.
    pub h0_offset: f64,
}

impl DiagramSpec {
    pub fn layout(&self, l: f64) -> Result<ZoneLayout, ModelError> {
        match self.kind {
            LayoutKind::Connected => ZoneLayout::connected(l),
            LayoutKind::Separated => ZoneLayout::separated(self.l1, self.l1 + l),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OutcomeMatrix {
    pub ls: Vec<f64>,
    pub sigmas: Vec<f64>,
    /// `cells[i][j]` for `ls[i]`, `sigmas[j]`.
    pub cells: Vec<Vec<OutcomeKind>>,
    /// Solver failures that were recorded as Undetermined.
    pub diagnostics: Vec<String>,
}

/// Outcome over an `(L, σ)` grid; cells run in parallel and the result does
/// not depend on scheduling.
pub fn phase_diagram(
    ls: &[f64],
    sigmas: &[f64],
    spec: &DiagramSpec,
    pair: &ReactionPair,
    cfg: &SolverConfig,
    tol: &ClassifierTolerances,
) -> Result<OutcomeMatrix, ClassifyError> {
    if ls.is_empty() || sigmas.is_empty() {
        return Err(ClassifyError::Input("phase diagram grids must be nonempty".into()));
    }
    let contexts: Vec<Result<Context, ClassifyError>> =
        ls.par_iter().map(|&l| Context::new(pair, &spec.layout(l)?, tol)).collect();
    let jobs: Vec<(usize, usize)> = (0..ls.len()).flat_map(|i| (0..sigmas.len()).map(move |j| (i, j))).collect();
    let results: Vec<(OutcomeKind, Option<String>)> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let cell = || -> Result<OutcomeKind, ClassifyError> {
                let ctx = contexts[i].as_ref().map_err(Clone::clone)?;
                let init = InitialData::cosine(ctx.layout.l2() + spec.h0_offset, sigmas[j])?;
                Ok(run_and_classify(pair, ctx, &init, cfg)?.0.kind)
            };
            match cell() {
                Ok(k) => (k, None),
                Err(e) => (OutcomeKind::Undetermined, Some(format!("L = {}, σ = {}: {e}", ls[i], sigmas[j]))),
            }
        })
        .collect();
    let mut cells = vec![Vec::with_capacity(sigmas.len()); ls.len()];
    let mut diagnostics = Vec::new();
    for (&(i, _), (k, d)) in jobs.iter().zip(results) {
        cells[i].push(k);
        diagnostics.extend(d);
    }
    Ok(OutcomeMatrix { ls: ls.to_vec(), sigmas: sigmas.to_vec(), cells, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::make_cubic_pair;
    use crate::pde::{Snapshot, StopReason};

    fn synthetic(h0: f64, decay: bool) -> Trajectory {
        let p = make_cubic_pair(0.25).unwrap();
        let xs: Vec<f64> = (0..=100).map(|i| h0 * i as f64 / 100.0).collect();
        let phi: Vec<f64> = xs.iter().map(|x| (std::f64::consts::FRAC_PI_2 * x / h0).cos().max(0.0)).collect();
        let mut ts = Vec::new();
        let mut hs = Vec::new();
        let mut snapshots = Vec::new();
        for k in 0..=600 {
            let t = k as f64 * 0.1;
            ts.push(t);
            hs.push(h0);
            if k % 10 == 0 {
                let amp = if decay { (-t).exp() } else { 1.0 };
                let us = phi.iter().map(|v| amp * v).collect();
                snapshots.push(Snapshot { t, h: h0, profile: Profile::new(xs.clone(), us) });
            }
        }
        Trajectory {
            ts,
            hs,
            snapshots,
            layout: ZoneLayout::connected(0.3).unwrap(),
            pair: p.summary(),
            config: SolverConfig::default(),
            sigma: 1.0,
            h0,
            stop: StopReason::Horizon,
            steps: 600,
            regrids: 0,
        }
    }

    #[test]
    fn synthetic_decay_is_vanishing() {
        let p = make_cubic_pair(0.25).unwrap();
        let ctx = Context::new(&p, &ZoneLayout::connected(0.3).unwrap(), &ClassifierTolerances::default()).unwrap();
        assert_eq!(classify(&synthetic(1.0, true), &ctx).kind, OutcomeKind::Vanishing);
        assert_eq!(classify(&synthetic(1.0, false), &ctx).kind, OutcomeKind::Undetermined);
    }

    #[test]
    fn plateau_must_lie_outside_zone() {
        let p = make_cubic_pair(0.25).unwrap();
        let ctx = Context::new(&p, &ZoneLayout::connected(5.0).unwrap(), &ClassifierTolerances::default()).unwrap();
        let xs: Vec<f64> = (0..=600).map(|i| i as f64 * 0.05).collect();
        let inside: Vec<f64> = xs.iter().map(|&x| if x < 5.0 { 0.9 } else { 0.0 }).collect();
        assert!(!ctx.spreading(&xs, &inside).0);
        let outside: Vec<f64> = xs.iter().map(|&x| if x < 25.0 { 0.9 } else { 0.0 }).collect();
        assert!(ctx.spreading(&xs, &outside).0);
    }

    #[test]
    fn rejects_empty_diagram() {
        let p = make_cubic_pair(0.25).unwrap();
        let spec = DiagramSpec { kind: LayoutKind::Connected, l1: 0.0, h0_offset: 1.0 };
        let r = phase_diagram(&[], &[1.0], &spec, &p, &SolverConfig::default(), &ClassifierTolerances::default());
        assert!(r.is_err());
    }
}
