//! Reaction nonlinearities, zone layouts and initial data.
//!
//! A [`ReactionPair`] couples a monostable growth law `f` (used inside the
//! protection zone) with a bistable Allee law `g` (used outside it). The pair
//! caches the scalars every other module needs: `f'(0)`, `g'(0)`, `g'(1)`,
//! the Allee threshold `θ`, the energy-balance density `θ*` with
//! `∫₀^{θ*} g = 0`, and sampled Lipschitz bounds.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::numerics::{adaptive_simpson, bisect};

/// Absolute tolerance for every integral of a nonlinearity.
pub const QUAD_TOL: f64 = 1e-12;
/// Central-difference step for derivatives of black-box nonlinearities.
pub const DIFF_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("Allee threshold must lie in (0, 1/2) for the cubic pair, got {0}")]
    CubicThreshold(f64),
    #[error("Allee threshold must lie in (0, 1), got {0}")]
    Threshold(f64),
    #[error("no root of ∫₀^a g in (θ, 1): the pair is not unbalanced")]
    ThetaStarNotBracketed,
    #[error("hypothesis check failed: {0}")]
    Hypothesis(String),
    #[error("invalid zone layout: {0}")]
    Layout(String),
    #[error("invalid initial data: {0}")]
    InitialData(String),
}

/// A scalar reaction term.
///
/// Only `eval` is required; the derivative and primitive default to central
/// differences and adaptive quadrature.
pub trait Nonlinearity: Send + Sync + fmt::Debug {
    fn eval(&self, u: f64) -> f64;

    fn derivative(&self, u: f64) -> f64 {
        (self.eval(u + DIFF_STEP) - self.eval(u - DIFF_STEP)) / (2.0 * DIFF_STEP)
    }

    /// `∫₀^u self`.
    fn primitive(&self, u: f64) -> f64 {
        adaptive_simpson(|s| self.eval(s), 0.0, u, QUAD_TOL)
    }
}

/// Polynomial `Σ cₖ uᵏ` with exact derivative and primitive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }
}

impl Nonlinearity for Polynomial {
    fn eval(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }

    fn derivative(&self, u: f64) -> f64 {
        self.coeffs.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, c)| acc * u + k as f64 * c)
    }

    fn primitive(&self, u: f64) -> f64 {
        self.coeffs.iter().enumerate().rev().fold(0.0, |acc, (k, c)| acc * u + c / (k as f64 + 1.0)) * u
    }
}

/// A black-box nonlinearity wrapping a closure.
#[derive(Clone)]
pub struct FnNonlinearity {
    name: String,
    func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl FnNonlinearity {
    pub fn new(name: impl Into<String>, func: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), func: Arc::new(func) }
    }
}

impl fmt::Debug for FnNonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnNonlinearity({})", self.name)
    }
}

impl Nonlinearity for FnNonlinearity {
    fn eval(&self, u: f64) -> f64 {
        (self.func)(u)
    }
}

/// The growth pair `(f, g)` and its derived scalars. Immutable and cheap to
/// clone; nonlinearities are shared behind `Arc`.
#[derive(Debug, Clone)]
pub struct ReactionPair {
    f: Arc<dyn Nonlinearity>,
    g: Arc<dyn Nonlinearity>,
    theta: f64,
    fp0: f64,
    gp0: f64,
    gp1: f64,
    fp1: f64,
    theta_star: Option<f64>,
    lip_f: f64,
    lip_g: f64,
}

impl ReactionPair {
    /// Builds a pair and checks every standing hypothesis with
    /// [`DEFAULT_SAMPLES`] sample points; any failure is an error.
    pub fn new(f: Arc<dyn Nonlinearity>, g: Arc<dyn Nonlinearity>, theta: f64) -> Result<Self, ModelError> {
        let pair = Self::new_unchecked(f, g, theta)?;
        let report = validate(&pair, DEFAULT_SAMPLES);
        if let Some(fail) = report.first_failure() {
            return Err(ModelError::Hypothesis(format!("{}: {}", fail.name, fail.detail)));
        }
        Ok(pair)
    }

    /// Builds a pair and its cached scalars without checking hypotheses.
    /// `θ*` is left unset when `∫₀^a g` has no sign change in `(θ, 1)`.
    pub fn new_unchecked(f: Arc<dyn Nonlinearity>, g: Arc<dyn Nonlinearity>, theta: f64) -> Result<Self, ModelError> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(ModelError::Threshold(theta));
        }
        let fp0 = f.derivative(0.0);
        let gp0 = g.derivative(0.0);
        let fp1 = f.derivative(1.0);
        let gp1 = g.derivative(1.0);
        let (lip_f, lip_g) = sampled_lipschitz(f.as_ref(), g.as_ref(), DEFAULT_SAMPLES);
        let theta_star = solve_theta_star(g.as_ref(), theta).ok();
        Ok(Self { f, g, theta, fp0, gp0, gp1, fp1, theta_star, lip_f, lip_g })
    }

    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        self.f.eval(u)
    }

    #[inline]
    pub fn g(&self, u: f64) -> f64 {
        self.g.eval(u)
    }

    /// `∫₀^u f`.
    pub fn f_primitive(&self, u: f64) -> f64 {
        self.f.primitive(u)
    }

    /// `∫₀^u g`.
    pub fn g_primitive(&self, u: f64) -> f64 {
        self.g.primitive(u)
    }

    pub fn f_nonlinearity(&self) -> &dyn Nonlinearity {
        self.f.as_ref()
    }

    pub fn g_nonlinearity(&self) -> &dyn Nonlinearity {
        self.g.as_ref()
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn fp0(&self) -> f64 {
        self.fp0
    }

    pub fn gp0(&self) -> f64 {
        self.gp0
    }

    pub fn fp1(&self) -> f64 {
        self.fp1
    }

    pub fn gp1(&self) -> f64 {
        self.gp1
    }

    pub fn lip_f(&self) -> f64 {
        self.lip_f
    }

    pub fn lip_g(&self) -> f64 {
        self.lip_g
    }

    /// The density `θ* ∈ (θ, 1)` with `∫₀^{θ*} g = 0`.
    pub fn theta_star(&self) -> Result<f64, ModelError> {
        self.theta_star.ok_or(ModelError::ThetaStarNotBracketed)
    }

    /// Scalar summary for reports and manifests.
    pub fn summary(&self) -> PairSummary {
        PairSummary {
            fp0: self.fp0,
            gp0: self.gp0,
            theta: self.theta,
            theta_star: self.theta_star,
            lip_f: self.lip_f,
            lip_g: self.lip_g,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairSummary {
    pub fp0: f64,
    pub gp0: f64,
    pub theta: f64,
    pub theta_star: Option<f64>,
    pub lip_f: f64,
    pub lip_g: f64,
}

/// Logistic `f(u) = u(1−u)` paired with the cubic Allee term
/// `g(u) = u(u−θ)(1−u)`.
pub fn make_cubic_pair(theta: f64) -> Result<ReactionPair, ModelError> {
    if !(theta > 0.0 && theta < 0.5) {
        return Err(ModelError::CubicThreshold(theta));
    }
    ReactionPair::new(Arc::new(logistic()), Arc::new(cubic_allee(theta)), theta)
}

pub fn logistic() -> Polynomial {
    Polynomial::new(vec![0.0, 1.0, -1.0])
}

/// `u(u−θ)(1−u) = −θu + (1+θ)u² − u³`.
pub fn cubic_allee(theta: f64) -> Polynomial {
    Polynomial::new(vec![0.0, -theta, 1.0 + theta, -1.0])
}

/// Builds a pair from polynomial coefficient lists (lowest degree first).
pub fn polynomial_pair(f: Vec<f64>, g: Vec<f64>, theta: f64) -> Result<ReactionPair, ModelError> {
    ReactionPair::new(Arc::new(Polynomial::new(f)), Arc::new(Polynomial::new(g)), theta)
}

/// Root of `G(a) = ∫₀^a g` in `(θ, 1)`, to `|G| ≤ 1e-10` or machine precision.
pub fn theta_star(pair: &ReactionPair) -> Result<f64, ModelError> {
    solve_theta_star(pair.g.as_ref(), pair.theta)
}

fn solve_theta_star(g: &dyn Nonlinearity, theta: f64) -> Result<f64, ModelError> {
    let big_g = |a: f64| g.primitive(a);
    // G is decreasing on (0, θ) and increasing on (θ, 1), so the bracket is (θ, 1).
    bisect(big_g, theta, 1.0, 1e-15, 0.0).map_err(|_| ModelError::ThetaStarNotBracketed)
}

fn sampled_lipschitz(f: &dyn Nonlinearity, g: &dyn Nonlinearity, n: usize) -> (f64, f64) {
    let mut lf: f64 = 0.0;
    let mut lg: f64 = 0.0;
    for k in 0..=n {
        let u = 2.0 * k as f64 / n as f64;
        lf = lf.max(f.derivative(u).abs());
        lg = lg.max(g.derivative(u).abs());
    }
    (lf, lg)
}

/// Default sample count for hypothesis checks on `[0, 2]`.
pub const DEFAULT_SAMPLES: usize = 10_000;
const ZERO_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub passed: bool,
    /// First violating sample point, when the check is pointwise.
    pub witness: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub samples: usize,
    pub checks: Vec<HypothesisCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Checks the standing hypotheses on a uniform sample of `[0, 2]`.
pub fn validate(pair: &ReactionPair, n_samples: usize) -> ValidationReport {
    let n = n_samples.max(100);
    let grid: Vec<f64> = (0..=n).map(|k| 2.0 * k as f64 / n as f64).collect();
    let theta = pair.theta;
    let mut checks = Vec::new();

    let pointwise = |name: &'static str, ok: &dyn Fn(f64) -> bool, domain: &dyn Fn(f64) -> bool, what: &str| {
        let bad = grid.iter().copied().filter(|&u| domain(u)).find(|&u| !ok(u));
        HypothesisCheck {
            name,
            passed: bad.is_none(),
            witness: bad,
            detail: match bad {
                Some(u) => format!("{what} violated at u = {u}"),
                None => format!("{what} holds on all samples"),
            },
        }
    };
    let scalar =
        |name: &'static str, passed: bool, detail: String| HypothesisCheck { name, passed, witness: None, detail };

    // Monostable f.
    checks.push(scalar(
        "f_zeros",
        pair.f(0.0).abs() <= ZERO_TOL && pair.f(1.0).abs() <= ZERO_TOL,
        format!("f(0) = {:e}, f(1) = {:e}", pair.f(0.0), pair.f(1.0)),
    ));
    checks.push(scalar("f_prime_0_positive", pair.fp0 > 0.0, format!("f'(0) = {}", pair.fp0)));
    checks.push(scalar("f_prime_1_negative", pair.fp1 < 0.0, format!("f'(1) = {}", pair.fp1)));
    checks.push(pointwise(
        "f_monostable_sign",
        &|u| (1.0 - u) * pair.f(u) > 0.0,
        &|u| u > 0.0 && (u - 1.0).abs() > 1e-12,
        "(1-u) f(u) > 0",
    ));

    // Bistable g.
    checks.push(scalar(
        "g_zeros",
        pair.g(0.0).abs() <= ZERO_TOL && pair.g(theta).abs() <= ZERO_TOL && pair.g(1.0).abs() <= ZERO_TOL,
        format!("g(0) = {:e}, g(θ) = {:e}, g(1) = {:e}", pair.g(0.0), pair.g(theta), pair.g(1.0)),
    ));
    checks.push(pointwise(
        "g_bistable_sign",
        &|u| {
            let v = pair.g(u);
            if u < theta {
                v < 0.0
            } else if u < 1.0 {
                v > 0.0
            } else {
                v < 0.0
            }
        },
        &|u| u > 0.0 && (u - theta).abs() > 1e-12 && (u - 1.0).abs() > 1e-12,
        "g < 0 on (0,θ), g > 0 on (θ,1), g < 0 on (1,2)",
    ));
    checks.push(scalar("g_prime_0_negative", pair.gp0 < 0.0, format!("g'(0) = {}", pair.gp0)));
    checks.push(scalar("g_prime_1_negative", pair.gp1 < 0.0, format!("g'(1) = {}", pair.gp1)));

    // Unbalanced: ∫₀¹ g > 0, by quadrature regardless of representation.
    let integral = adaptive_simpson(|s| pair.g(s), 0.0, 1.0, QUAD_TOL);
    checks.push(scalar("g_unbalanced", integral > 0.0, format!("∫₀¹ g = {integral:e}")));

    // (H): g < f on (0, 1).
    checks.push(pointwise("g_below_f", &|u| pair.g(u) < pair.f(u), &|u| u > 0.0 && u < 1.0, "g(u) < f(u)"));

    checks.push(scalar(
        "lipschitz_bounds",
        pair.lip_f.is_finite() && pair.lip_g.is_finite(),
        format!("sampled |f'| ≤ {}, |g'| ≤ {} on [0, 2]", pair.lip_f, pair.lip_g),
    ));

    let ts = pair.theta_star;
    checks.push(scalar(
        "theta_star",
        ts.is_some_and(|a| a > theta && a < 1.0),
        match ts {
            Some(a) => format!("θ* = {a}, ∫₀^θ* g = {:e}", pair.g_primitive(a)),
            None => "∫₀^a g has no root in (θ, 1)".into(),
        },
    ));

    ValidationReport { samples: n, checks }
}

/// Connected zone `[0, L]` or separated zone `[L₁, L₂]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZoneLayout {
    Connected { l: f64 },
    Separated { l1: f64, l2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutKind {
    Connected,
    Separated,
}

impl ZoneLayout {
    pub fn connected(l: f64) -> Result<Self, ModelError> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(ModelError::Layout(format!("zone length must be positive, got {l}")));
        }
        Ok(Self::Connected { l })
    }

    pub fn separated(l1: f64, l2: f64) -> Result<Self, ModelError> {
        if !(l1 > 0.0 && l2 > l1 && l2.is_finite()) {
            return Err(ModelError::Layout(format!("need 0 < L1 < L2, got L1 = {l1}, L2 = {l2}")));
        }
        Ok(Self::Separated { l1, l2 })
    }

    pub fn kind(&self) -> LayoutKind {
        match self {
            Self::Connected { .. } => LayoutKind::Connected,
            Self::Separated { .. } => LayoutKind::Separated,
        }
    }

    /// Left end of the zone (0 for a connected zone).
    pub fn l1(&self) -> f64 {
        match *self {
            Self::Connected { .. } => 0.0,
            Self::Separated { l1, .. } => l1,
        }
    }

    /// Right end of the zone.
    pub fn l2(&self) -> f64 {
        match *self {
            Self::Connected { l } => l,
            Self::Separated { l2, .. } => l2,
        }
    }

    /// Zone length `L = L₂ − L₁`.
    pub fn length(&self) -> f64 {
        self.l2() - self.l1()
    }

    pub fn in_zone(&self, x: f64) -> bool {
        x >= self.l1() && x <= self.l2()
    }
}

/// Initial front `h₀` and profile `u₀ = σ φ` with `φ` sampled on `[0, h₀]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialData {
    pub h0: f64,
    pub xs: Vec<f64>,
    pub phi: Vec<f64>,
    pub sigma: f64,
    pub shape: String,
}

impl InitialData {
    /// `φ(x) = cos(πx / (2h₀))`.
    pub fn cosine(h0: f64, sigma: f64) -> Result<Self, ModelError> {
        let n = 2048;
        let xs: Vec<f64> = (0..=n).map(|k| h0 * k as f64 / n as f64).collect();
        let phi: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(k, &x)| if k == n { 0.0 } else { (std::f64::consts::FRAC_PI_2 * x / h0).cos() })
            .collect();
        Self::from_samples(xs, phi, sigma, "cosine")
    }

    /// Accepts any sampled member of the admissible class: `φ(h₀) = 0`,
    /// `φ > 0` inside, and a flat start `φ'(0) ≈ 0`.
    pub fn from_samples(xs: Vec<f64>, phi: Vec<f64>, sigma: f64, shape: &str) -> Result<Self, ModelError> {
        let n = xs.len();
        if n < 3 || phi.len() != n {
            return Err(ModelError::InitialData("need at least three matching samples".into()));
        }
        if xs[0] != 0.0 || xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ModelError::InitialData("positions must start at 0 and increase".into()));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(ModelError::InitialData(format!("σ must be nonnegative, got {sigma}")));
        }
        if phi[n - 1].abs() > 1e-12 {
            return Err(ModelError::InitialData("φ(h₀) must vanish".into()));
        }
        if phi[..n - 1].iter().any(|&p| p <= 0.0 || !p.is_finite()) {
            return Err(ModelError::InitialData("φ must be positive on [0, h₀)".into()));
        }
        let slopes: Vec<f64> = xs.windows(2).zip(phi.windows(2)).map(|(x, p)| (p[1] - p[0]) / (x[1] - x[0])).collect();
        let steepest = slopes.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        // A flat start shows up as a first one-sided slope far below the steepest one.
        if slopes[0].abs() > 0.1 * steepest {
            return Err(ModelError::InitialData(format!("φ'(0) must vanish, one-sided slope is {}", slopes[0])));
        }
        let h0 = xs[n - 1];
        Ok(Self { h0, xs, phi, sigma, shape: shape.into() })
    }

    pub fn with_sigma(&self, sigma: f64) -> Self {
        Self { sigma, ..self.clone() }
    }

    /// `σ φ(x)`, linearly interpolated; zero beyond `h₀`.
    pub fn value(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return self.sigma * self.phi[0];
        }
        if x >= self.h0 {
            return 0.0;
        }
        let k = self.xs.partition_point(|&s| s <= x).clamp(1, self.xs.len() - 1);
        let (x0, x1) = (self.xs[k - 1], self.xs[k]);
        let w = (x - x0) / (x1 - x0);
        self.sigma * ((1.0 - w) * self.phi[k - 1] + w * self.phi[k])
    }

    pub fn sup_norm(&self) -> f64 {
        self.sigma * self.phi.iter().fold(0.0f64, |m, p| m.max(*p))
    }

    pub fn check_against(&self, layout: &ZoneLayout) -> Result<(), ModelError> {
        if self.h0 <= layout.l2() {
            return Err(ModelError::InitialData(format!(
                "h₀ = {} must exceed the zone's right end {}",
                self.h0,
                layout.l2()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed_form_theta_star(theta: f64) -> f64 {
        // ∫₀^a u(u−θ)(1−u) du = a²(−a²/4 + (1+θ)a/3 − θ/2) = 0
        // ⇔ 3a² − 4(1+θ)a + 6θ = 0, smaller root.
        (4.0 * (1.0 + theta) - (16.0 * (1.0 + theta).powi(2) - 72.0 * theta).sqrt()) / 6.0
    }

    #[test]
    fn polynomial_calculus_is_exact() {
        let p = cubic_allee(0.25);
        for &u in &[0.0, 0.3, 0.7, 1.4] {
            let direct = u * (u - 0.25) * (1.0 - u);
            assert!((p.eval(u) - direct).abs() < 1e-15);
            let quad = adaptive_simpson(|s| p.eval(s), 0.0, u, 1e-14);
            assert!((p.primitive(u) - quad).abs() < 1e-13);
            let fd = (p.eval(u + 1e-6) - p.eval(u - 1e-6)) / 2e-6;
            assert!((p.derivative(u) - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn cubic_pair_scalars() {
        let pair = make_cubic_pair(0.25).unwrap();
        assert_eq!(pair.fp0(), 1.0);
        assert_eq!(pair.gp0(), -0.25);
        let ts = pair.theta_star().unwrap();
        assert!((ts - closed_form_theta_star(0.25)).abs() < 1e-12);
        assert!((ts - 0.392375).abs() < 1e-6);
        assert!(pair.g_primitive(ts).abs() < 1e-10);
    }

    #[test]
    fn theta_star_for_point_four() {
        let pair = make_cubic_pair(0.4).unwrap();
        let ts = theta_star(&pair).unwrap();
        // 3a² − 5.6a + 2.4 = 0 → a = (5.6 − √(31.36 − 28.8))/6
        let exact = (5.6 - (31.36f64 - 28.8).sqrt()) / 6.0;
        assert!((ts - exact).abs() < 1e-12);
        assert!((ts - 2.0 / 3.0).abs() < 1e-12);
        let quad = adaptive_simpson(|s| pair.g(s), 0.0, ts, 1e-13);
        assert!(quad.abs() < 1e-10);
    }

    #[test]
    fn theta_star_approaches_one_near_balance() {
        let p = make_cubic_pair(0.499).unwrap();
        let ts = p.theta_star().unwrap();
        assert!(ts > 0.9, "{ts}");
        let p = make_cubic_pair(0.4999).unwrap();
        assert!(p.theta_star().unwrap() > ts);
    }

    #[test]
    fn cubic_rejects_balanced_threshold() {
        assert_eq!(make_cubic_pair(0.5).unwrap_err(), ModelError::CubicThreshold(0.5));
        assert!(make_cubic_pair(0.0).is_err());
    }

    #[test]
    fn validate_cubic_passes() {
        let pair = make_cubic_pair(0.25).unwrap();
        let report = validate(&pair, DEFAULT_SAMPLES);
        assert!(report.all_passed(), "{:?}", report.first_failure());
    }

    #[test]
    fn validate_flags_g_equal_f() {
        let f = Arc::new(logistic());
        let pair = ReactionPair::new_unchecked(f.clone(), f, 0.25).unwrap();
        let report = validate(&pair, 1000);
        let h = report.check("g_below_f").unwrap();
        assert!(!h.passed);
        assert!(h.witness.is_some_and(|u| u > 0.0 && u < 1.0));
        assert!(ReactionPair::new(Arc::new(logistic()), Arc::new(logistic()), 0.25).is_err());
    }

    #[test]
    fn validate_flags_balanced_violation() {
        let pair = ReactionPair::new_unchecked(Arc::new(logistic()), Arc::new(cubic_allee(0.6)), 0.6).unwrap();
        let report = validate(&pair, 1000);
        assert!(!report.check("g_unbalanced").unwrap().passed);
        assert!(pair.theta_star().is_err());
    }

    #[test]
    fn black_box_pair_matches_polynomial() {
        let f = FnNonlinearity::new("logistic", |u| u * (1.0 - u));
        let g = FnNonlinearity::new("cubic", |u| u * (u - 0.25) * (1.0 - u));
        let pair = ReactionPair::new(Arc::new(f), Arc::new(g), 0.25).unwrap();
        assert!((pair.fp0() - 1.0).abs() < 1e-8);
        assert!((pair.gp0() + 0.25).abs() < 1e-8);
        assert!((pair.theta_star().unwrap() - closed_form_theta_star(0.25)).abs() < 1e-9);
    }

    #[test]
    fn layouts() {
        let c = ZoneLayout::connected(1.5).unwrap();
        assert_eq!((c.l1(), c.l2(), c.length()), (0.0, 1.5, 1.5));
        let s = ZoneLayout::separated(1.0, 2.7).unwrap();
        assert!((s.length() - 1.7).abs() < 1e-15);
        assert!(ZoneLayout::separated(2.0, 1.0).is_err());
        assert!(ZoneLayout::connected(0.0).is_err());
    }

    #[test]
    fn cosine_initial_data() {
        let d = InitialData::cosine(2.0, 3.0).unwrap();
        assert!((d.value(0.0) - 3.0).abs() < 1e-12);
        assert_eq!(d.value(2.0), 0.0);
        assert!((d.value(1.0) - 3.0 * (std::f64::consts::FRAC_PI_4).cos()).abs() < 1e-5);
        assert!(d.check_against(&ZoneLayout::connected(1.0).unwrap()).is_ok());
        assert!(d.check_against(&ZoneLayout::connected(2.5).unwrap()).is_err());
    }

    #[test]
    fn rejects_non_admissible_profiles() {
        let xs = vec![0.0, 0.5, 1.0];
        assert!(InitialData::from_samples(xs.clone(), vec![1.0, 0.5, 0.1], 1.0, "x").is_err());
        assert!(InitialData::from_samples(xs.clone(), vec![1.0, -0.5, 0.0], 1.0, "x").is_err());
    }
}
