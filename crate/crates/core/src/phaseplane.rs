//! Ground states, bump solutions and the largest zone length that carries a
//! ground state, all built in the `(U, U')` phase plane.
//!
//! Orbits that approach the saddle at the origin are finished with the
//! first-order reduction `U' = -sqrt(-2G(U))` of the zero g-energy level, so
//! the decay to `1e-8` does not depend on conserving the energy to `1e-17`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelError, ReactionPair};
use crate::numerics::{adaptive_simpson, bisect, golden_max, integrate, Direction, Event, OdeError, OdeOptions, Stop};
use crate::spectral;

/// Decay level at which tails are cut.
pub const TAIL_CUTOFF: f64 = 1e-8;
/// Default number of interior points of the `a`-scan.
pub const DEFAULT_SCAN: usize = 2048;
/// Default sampling step of returned profiles.
pub const DEFAULT_DX: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhaseError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("{0}")]
    Domain(String),
    #[error("orbit left the band (0, {theta_star}] at x = {x} with U = {u}")]
    LeftBand { theta_star: f64, x: f64, u: f64 },
}

/// A sampled profile `x ↦ u(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub xs: Vec<f64>,
    pub us: Vec<f64>,
    pub meta: BTreeMap<String, f64>,
}

impl Profile {
    pub fn new(xs: Vec<f64>, us: Vec<f64>) -> Self {
        assert_eq!(xs.len(), us.len(), "profile abscissae and values differ in length");
        Self { xs, us, meta: BTreeMap::new() }
    }

    pub fn with_meta(mut self, key: &str, value: f64) -> Self {
        self.meta.insert(key.to_string(), value);
        self
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn x_max(&self) -> f64 {
        self.xs.last().copied().unwrap_or(0.0)
    }

    /// Linear interpolation; `outside` is returned beyond either end.
    pub fn value_or(&self, x: f64, outside: f64) -> f64 {
        let n = self.xs.len();
        if n == 0 || x < self.xs[0] || x > self.xs[n - 1] {
            return outside;
        }
        let k = self.xs.partition_point(|&s| s <= x);
        if k == 0 {
            return self.us[0];
        }
        if k >= n {
            return self.us[n - 1];
        }
        let (x0, x1) = (self.xs[k - 1], self.xs[k]);
        let w = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
        self.us[k - 1] + w * (self.us[k] - self.us[k - 1])
    }

    pub fn sup(&self) -> f64 {
        self.us.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.us.windows(2).all(|w| w[1] < w[0])
    }
}

/// Result of the connected-zone ground-state search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateResult {
    pub exists: bool,
    /// `U(0)`.
    pub a: f64,
    pub profile: Profile,
    /// Zone length used.
    pub l: f64,
    /// `|½U'(L)² + G(U(L))|`.
    pub matching_residual: f64,
}

fn opts_for(scale: f64) -> OdeOptions {
    OdeOptions { rtol: 1e-11, atol: 1e-13 * scale.max(1e-300), h0: 1e-4, h_max: 0.05, ..OdeOptions::default() }
}

fn g_energy(pair: &ReactionPair, u: f64, p: f64) -> f64 {
    0.5 * p * p + pair.g_primitive(u)
}

fn uniform(x0: f64, x1: f64, dx: f64) -> Vec<f64> {
    let n = (((x1 - x0) / dx).ceil() as usize).max(1);
    (0..=n).map(|i| x0 + (x1 - x0) * i as f64 / n as f64).collect()
}

/// Zero-energy decay `u' = -sqrt(-2G(u))` from `(x0, u0)` down to [`TAIL_CUTOFF`].
fn decay_tail(pair: &ReactionPair, x0: f64, u0: f64) -> Result<crate::numerics::Solution<1>, PhaseError> {
    let rhs = |_x: f64, y: &[f64; 1]| [-(-2.0 * pair.g_primitive(y[0])).max(0.0).sqrt()];
    let cut = [Event::new(Direction::Falling, |_x: f64, y: &[f64; 1]| y[0] - TAIL_CUTOFF)];
    let opts = OdeOptions { rtol: 1e-11, atol: 1e-20, h0: 1e-4, h_max: 0.05, ..OdeOptions::default() };
    let sol = integrate(rhs, x0, [u0], x0 + 1e4, &opts, &cut)?;
    match sol.stop {
        Stop::Event { .. } => Ok(sol),
        Stop::Reached => Err(PhaseError::Domain(format!("tail from U = {u0} did not decay below {TAIL_CUTOFF}"))),
    }
}

/// The ground state `V'' + g(V) = 0`, `V(0) = θ*`, `V'(0) = 0`, sampled on
/// `[0, X]` with `V(X) = 1e-8`.
///
/// `meta["energy_residual"]` holds the largest `|½V'² + G(V)|` met along the
/// second-order leg; the tail leg has zero energy by construction.
pub fn ground_state_v(pair: &ReactionPair) -> Result<Profile, PhaseError> {
    ground_state_v_with(pair, DEFAULT_DX)
}

pub fn ground_state_v_with(pair: &ReactionPair, dx: f64) -> Result<Profile, PhaseError> {
    let ts = pair.theta_star()?;
    let switch = 0.5 * ts;
    let rhs = |_x: f64, y: &[f64; 2]| [y[1], -pair.g(y[0])];
    let events = [Event::new(Direction::Falling, |_x: f64, y: &[f64; 2]| y[0] - switch)];
    let head = integrate(rhs, 0.0, [ts, 0.0], 1e3, &opts_for(ts), &events)?;
    let (x_sw, u_sw) = match head.stop {
        Stop::Event { t, y, .. } => (t, y[0]),
        Stop::Reached => return Err(PhaseError::LeftBand { theta_star: ts, x: head.t_final(), u: head.y_final()[0] }),
    };
    let mut residual: f64 = 0.0;
    for (x, y) in head.ts.iter().zip(&head.ys) {
        if !(y[0] > 0.0 && y[0] <= ts * (1.0 + 1e-12)) {
            return Err(PhaseError::LeftBand { theta_star: ts, x: *x, u: y[0] });
        }
        residual = residual.max(g_energy(pair, y[0], y[1]).abs());
    }
    let tail = decay_tail(pair, x_sw, u_sw)?;
    let x_max = tail.t_final();
    let xs = uniform(0.0, x_max, dx);
    let us = xs.iter().map(|&x| if x <= x_sw { head.interpolate(x)[0] } else { tail.interpolate(x)[0] }).collect();
    Ok(Profile::new(xs, us)
        .with_meta("theta_star", ts)
        .with_meta("x_max", x_max)
        .with_meta("energy_residual", residual))
}

/// Half-width `l_α` of the bump `v'' + g(v) = 0`, `v(l) = α`, `v(0) = 0`, from
/// the quadrature `∫₀^α ds / sqrt(2∫_s^α g)` after `s = α - t²`.
pub fn bump_half_width(alpha: f64, pair: &ReactionPair) -> Result<f64, PhaseError> {
    check_alpha(alpha, pair)?;
    // ∫_s^α g = t² I(t) with I(t) = ∫₀¹ g(α - t² w) dw > 0.
    let inner = |t: f64| adaptive_simpson(|w| pair.g(alpha - t * t * w), 0.0, 1.0, 1e-15);
    let integrand = |t: f64| 2.0 / (2.0 * inner(t)).sqrt();
    // A coarse pass sets the scale for a relative tolerance.
    let rough = adaptive_simpson(integrand, 0.0, alpha.sqrt(), 1e-3);
    Ok(adaptive_simpson(integrand, 0.0, alpha.sqrt(), 1e-9 * rough))
}

fn check_alpha(alpha: f64, pair: &ReactionPair) -> Result<f64, PhaseError> {
    let ts = pair.theta_star()?;
    if !(alpha > ts && alpha < 1.0) {
        return Err(PhaseError::Domain(format!("bump height α = {alpha} must lie in (θ* = {ts}, 1)")));
    }
    Ok(ts)
}

/// Bump `v_α` on `[0, 2l_α]` together with `l_α` from quadrature.
///
/// The samples come from the orbit integrated from the crest; `meta` records
/// the orbit half-width `ode_half_width` and the quadrature `l_alpha`.
pub fn bump_solution(alpha: f64, pair: &ReactionPair) -> Result<(Profile, f64), PhaseError> {
    check_alpha(alpha, pair)?;
    let l = bump_half_width(alpha, pair)?;
    let rhs = |_x: f64, y: &[f64; 2]| [y[1], -pair.g(y[0])];
    let events = [Event::new(Direction::Falling, |_x: f64, y: &[f64; 2]| y[0])];
    let orbit = integrate(rhs, 0.0, [alpha, 0.0], 1e4, &opts_for(alpha), &events)?;
    let half = match orbit.stop {
        Stop::Event { t, .. } => t,
        Stop::Reached => return Err(PhaseError::Domain(format!("bump orbit from α = {alpha} never reached 0"))),
    };
    let m = ((half / DEFAULT_DX).ceil() as usize).max(8);
    let xs = (0..=2 * m).map(|i| 2.0 * half * i as f64 / (2 * m) as f64).collect();
    let us = (0..=2 * m)
        .map(|i| {
            let y = half * (m as f64 - i as f64).abs() / m as f64;
            if i == 0 || i == 2 * m {
                0.0
            } else {
                orbit.interpolate(y)[0]
            }
        })
        .collect();
    let profile =
        Profile::new(xs, us).with_meta("alpha", alpha).with_meta("l_alpha", l).with_meta("ode_half_width", half);
    Ok((profile, l))
}

/// Zone length `L(a)`: the point where the f-orbit from `(a, 0)` reaches
/// zero g-energy. Returns the full crossing state `(L, U(L), U'(L))`.
pub fn matching_point(a: f64, pair: &ReactionPair) -> Result<(f64, f64, f64), PhaseError> {
    let ts = pair.theta_star()?;
    if !(a > 0.0 && a < ts) {
        return Err(PhaseError::Domain(format!("U(0) = {a} must lie in (0, θ* = {ts})")));
    }
    let rhs = |_x: f64, y: &[f64; 2]| [y[1], -pair.f(y[0])];
    let events = [Event::new(Direction::Rising, |_x: f64, y: &[f64; 2]| g_energy(pair, y[0], y[1]))];
    let sol = integrate(rhs, 0.0, [a, 0.0], 1e3, &opts_for(a), &events)?;
    match sol.stop {
        Stop::Event { t, y, .. } if y[0] > 0.0 && y[0] < ts => Ok((t, y[0], y[1])),
        Stop::Event { t, y, .. } => Err(PhaseError::LeftBand { theta_star: ts, x: t, u: y[0] }),
        Stop::Reached => Err(PhaseError::Domain(format!("no g-energy crossing from U(0) = {a}"))),
    }
}

pub fn l_of_a(a: f64, pair: &ReactionPair) -> Result<f64, PhaseError> {
    matching_point(a, pair).map(|m| m.0)
}

/// `L(a)` on the interior grid `a_i = θ* i / (n + 1)`, `i = 1..=n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LScan {
    pub a: Vec<f64>,
    pub l: Vec<f64>,
}

pub fn scan_l_of_a(pair: &ReactionPair, n: usize) -> Result<LScan, PhaseError> {
    let ts = pair.theta_star()?;
    let a: Vec<f64> = (1..=n).map(|i| ts * i as f64 / (n + 1) as f64).collect();
    let l = a.par_iter().map(|&ai| l_of_a(ai, pair)).collect::<Result<Vec<_>, _>>()?;
    Ok(LScan { a, l })
}

/// `L★`: the supremum of `L(a)` over `a ∈ (0, θ*)`. The `a → 0` limit is the
/// linearised value `L_*` and enters the supremum directly.
pub fn l_star_upper(pair: &ReactionPair) -> Result<f64, PhaseError> {
    l_star_upper_with(pair, DEFAULT_SCAN)
}

pub fn l_star_upper_with(pair: &ReactionPair, n: usize) -> Result<f64, PhaseError> {
    let scan = scan_l_of_a(pair, n)?;
    let (k, &lmax) = scan
        .l
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .ok_or_else(|| PhaseError::Domain("empty a-scan".into()))?;
    let mut best = lmax;
    if k > 0 && k + 1 < n {
        let (_, v) = golden_max(|a| l_of_a(a, pair).unwrap_or(f64::NEG_INFINITY), scan.a[k - 1], scan.a[k + 1], 1e-10);
        best = best.max(v);
    }
    Ok(best.max(spectral::l_star(pair)))
}

/// All connected-zone ground states for zone length `l`, ordered by `a`.
pub fn ground_states_connected(l: f64, pair: &ReactionPair) -> Result<Vec<GroundStateResult>, PhaseError> {
    ground_states_connected_with(l, pair, DEFAULT_SCAN)
}

pub fn ground_states_connected_with(
    l: f64,
    pair: &ReactionPair,
    n: usize,
) -> Result<Vec<GroundStateResult>, PhaseError> {
    if !(l > 0.0) {
        return Err(PhaseError::Domain(format!("zone length must be positive, got {l}")));
    }
    let scan = scan_l_of_a(pair, n)?;
    // Prepend the a → 0 limit so roots below the first grid point are caught.
    let mut a = vec![0.0];
    a.extend(&scan.a);
    let mut ls = vec![spectral::l_star(pair)];
    ls.extend(&scan.l);
    let mut roots = Vec::new();
    for i in 0..a.len() - 1 {
        let (d0, d1) = (ls[i] - l, ls[i + 1] - l);
        if d1 == 0.0 {
            roots.push(a[i + 1]);
        } else if d0 * d1 < 0.0 {
            let lo = if i == 0 { a[1] * 1e-9 } else { a[i] };
            let r = bisect(|x| l_of_a(x, pair).map(|v| v - l).unwrap_or(f64::NAN), lo, a[i + 1], 1e-15, 0.0);
            if let Ok(root) = r {
                roots.push(root);
            }
        }
    }
    roots
        .into_iter()
        .map(|root| assemble_ground_state(root, l, pair))
        .filter(|r| !matches!(r, Ok(g) if !g.exists))
        .collect()
}

/// The ground state with the smallest `U(0)`; `exists = false` if none.
pub fn ground_state_connected(l: f64, pair: &ReactionPair) -> Result<GroundStateResult, PhaseError> {
    let mut all = ground_states_connected(l, pair)?;
    if all.is_empty() {
        return Ok(GroundStateResult {
            exists: false,
            a: f64::NAN,
            profile: Profile::new(Vec::new(), Vec::new()),
            l,
            matching_residual: f64::NAN,
        });
    }
    Ok(all.swap_remove(0))
}

fn assemble_ground_state(a: f64, l: f64, pair: &ReactionPair) -> Result<GroundStateResult, PhaseError> {
    let (lx, ul, pl) = matching_point(a, pair)?;
    let residual = g_energy(pair, ul, pl).abs();
    let exists = (lx - l).abs() < 1e-6;
    let rhs = |_x: f64, y: &[f64; 2]| [y[1], -pair.f(y[0])];
    let inner = integrate(rhs, 0.0, [a, 0.0], l, &opts_for(a), &[])?;
    let [u_l, _] = inner.y_final();
    let tail = decay_tail(pair, l, u_l)?;
    let xs = uniform(0.0, tail.t_final(), DEFAULT_DX);
    let us = xs.iter().map(|&x| if x <= l { inner.interpolate(x)[0] } else { tail.interpolate(x)[0] }).collect();
    let profile = Profile::new(xs, us)
        .with_meta("a", a)
        .with_meta("l", l)
        .with_meta("l_of_a", lx)
        .with_meta("matching_residual", residual);
    Ok(GroundStateResult { exists, a, profile, l, matching_residual: residual })
}
