//! Bistable wave speed `c₀` and the semi-wave `(c*, q_{c*})`.
//!
//! Both come from backward shooting along the stable manifold of the saddle
//! `(q, p) = (1, 0)` of `q' = p`, `p' = c p - g(q)`.

use serde::Serialize;
use thiserror::Error;

use crate::model::{ModelError, PairSummary, ReactionPair};
use crate::numerics::{bisect, integrate, Direction, Event, OdeError, OdeOptions, RootError, Solution, Stop};
use crate::phaseplane::Profile;

/// Offset from the saddle along the stable eigenvector.
pub const SADDLE_OFFSET: f64 = 1e-8;
/// Sampling step of the stored profile.
pub const PROFILE_DZ: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemiWaveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error("front coefficient μ must be positive, got {0}")]
    NonPositiveMu(f64),
    #[error("shooting does not bracket a wave speed: {0}")]
    Bracket(String),
}

/// Fate of the backward orbit leaving `(1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shot {
    /// Reached `q = 0` with slope `p₀ > 0` at backward time `s`.
    Overshoot { p0: f64, s: f64 },
    /// Turned (`p = 0`) or settled while `q > 0`.
    Undershoot { q: f64 },
    /// Neither within the horizon; the orbit sits at the origin saddle.
    Stalled,
}

fn start(c: f64, pair: &ReactionPair) -> [f64; 2] {
    let gp1 = pair.gp1();
    let ls = 0.5 * (c - (c * c - 4.0 * gp1).sqrt());
    [1.0 - SADDLE_OFFSET, -ls * SADDLE_OFFSET]
}

fn opts() -> OdeOptions {
    OdeOptions { rtol: 1e-11, atol: 1e-14, h0: 1e-4, h_max: 0.1, ..OdeOptions::default() }
}

fn shoot_orbit(c: f64, pair: &ReactionPair) -> Result<(Shot, Solution<2>), SemiWaveError> {
    // Backward in z: d/ds = -d/dz.
    let rhs = |_s: f64, y: &[f64; 2]| [-y[1], -(c * y[1] - pair.g(y[0]))];
    let events = [
        Event::new(Direction::Falling, |_s: f64, y: &[f64; 2]| y[0]),
        Event::new(Direction::Falling, |_s: f64, y: &[f64; 2]| y[1]),
    ];
    let sol = integrate(rhs, 0.0, start(c, pair), 1e4, &opts(), &events)?;
    let shot = match sol.stop {
        Stop::Event { index: 0, t, y } => Shot::Overshoot { p0: y[1], s: t },
        Stop::Event { y, .. } => Shot::Undershoot { q: y[0] },
        // A large speed makes (θ, 0) a node of the backward flow; the orbit
        // settles there without turning, which is still an undershoot.
        Stop::Reached if sol.y_final()[0] > 1e-6 => Shot::Undershoot { q: sol.y_final()[0] },
        Stop::Reached => Shot::Stalled,
    };
    Ok((shot, sol))
}

pub fn shoot(c: f64, pair: &ReactionPair) -> Result<Shot, SemiWaveError> {
    shoot_orbit(c, pair).map(|r| r.0)
}

/// Speed of the bistable travelling wave of `u_t = u_xx + g(u)`.
pub fn wave_speed_c0(pair: &ReactionPair) -> Result<f64, SemiWaveError> {
    let sign = |c: f64| match shoot(c, pair) {
        Ok(Shot::Overshoot { .. }) => -1.0,
        Ok(Shot::Undershoot { .. }) => 1.0,
        Ok(Shot::Stalled) => 0.0,
        Err(_) => f64::NAN,
    };
    let mut hi = 1.0;
    while sign(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(SemiWaveError::Bracket("overshoot at every trial speed".into()));
        }
    }
    if sign(0.0) >= 0.0 {
        return Err(SemiWaveError::Bracket("no overshoot at c = 0; is ∫₀¹ g > 0?".into()));
    }
    Ok(bisect(sign, 0.0, hi, 1e-11, 0.0)?)
}

/// Slope `p₀(c) = q_c'(0)` for `c ∈ (0, c₀)`.
pub fn slope_at_front(c: f64, pair: &ReactionPair) -> Result<f64, SemiWaveError> {
    match shoot(c, pair)? {
        Shot::Overshoot { p0, .. } => Ok(p0),
        other => Err(SemiWaveError::Bracket(format!("c = {c} gives {other:?}, not a semi-wave"))),
    }
}

/// Semi-wave `q'' - c q' + g(q) = 0`, `q(0) = 0`, `q(∞) = 1`, `μ q'(0) = c`.
#[derive(Debug, Clone, Serialize)]
pub struct SemiWave {
    pub c_star: f64,
    pub profile: Profile,
    pub mu: f64,
    pub c0: f64,
    pub residual: f64,
    /// `q'(0)`.
    pub p0: f64,
    pub pair: PairSummary,
}

impl SemiWave {
    /// `q_{c*}(z)`: 0 for `z ≤ 0`, the last sample beyond the stored range.
    pub fn q(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        let last = *self.profile.us.last().unwrap_or(&1.0);
        self.profile.value_or(z, last)
    }
}

pub fn semi_wave(mu: f64, pair: &ReactionPair) -> Result<SemiWave, SemiWaveError> {
    let c0 = wave_speed_c0(pair)?;
    semi_wave_with_c0(mu, c0, pair)
}

/// As [`semi_wave`] with `c₀` already known.
pub fn semi_wave_with_c0(mu: f64, c0: f64, pair: &ReactionPair) -> Result<SemiWave, SemiWaveError> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(SemiWaveError::NonPositiveMu(mu));
    }
    let lo = c0 * 1e-12;
    let hi = c0 * (1.0 - 1e-9);
    let mismatch = |c: f64| slope_at_front(c, pair).map(|p| mu * p - c).unwrap_or(f64::NAN);
    let c_star = bisect(mismatch, lo, hi, 1e-15, 0.0)?;
    let (shot, orbit) = shoot_orbit(c_star, pair)?;
    let (p0, s_end) = match shot {
        Shot::Overshoot { p0, s } => (p0, s),
        other => return Err(SemiWaveError::Bracket(format!("c* = {c_star} gives {other:?}"))),
    };
    let n = ((s_end / PROFILE_DZ).ceil() as usize).max(2);
    let xs: Vec<f64> = (0..=n).map(|i| s_end * i as f64 / n as f64).collect();
    let us = xs.iter().enumerate().map(|(i, &z)| if i == 0 { 0.0 } else { orbit.interpolate(s_end - z)[0] }).collect();
    let profile = Profile::new(xs, us).with_meta("c", c_star).with_meta("mu", mu).with_meta("z_max", s_end);
    Ok(SemiWave { c_star, profile, mu, c0, residual: (mu * p0 - c_star).abs(), p0, pair: pair.summary() })
}
