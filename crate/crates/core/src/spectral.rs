//! Principal eigenvalues of `−φ'' + V(x)φ = λφ` with the piecewise-constant
//! potential `V = −f'(0)` on the protection zone and `V = −g'(0)` elsewhere,
//! and the critical lengths and radii derived from their signs.
//!
//! Half-line eigenvalues come from the monotone transcendental relations
//! between zone length and eigenvalue, inverted by bisection. Finite-domain
//! eigenvalues (Neumann at 0, Dirichlet at `R`) come from a cell-centred
//! finite-volume matrix with Richardson extrapolation; this matrix path is
//! deliberately independent of the closed forms so the two can be checked
//! against each other.

use std::f64::consts::FRAC_PI_2;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::model::{ReactionPair, ZoneLayout};
use crate::numerics::bisect;
use crate::numerics::tridiag::{lowest_eigenpair, SymTridiag};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("length must be positive, got {0}")]
    NonPositive(f64),
    #[error("inverse iteration did not converge (R = {r}, cells = {cells})")]
    NoConvergence { r: f64, cells: usize },
    #[error("eigenvalue inversion failed: {0}")]
    Inversion(String),
}

/// Zone length carrying principal eigenvalue `λ` on the half-line,
/// connected zone:
/// `L(λ) = arctan(√(−(g'(0)+λ)/(f'(0)+λ))) / √(f'(0)+λ)`.
///
/// Strictly decreasing on `(−f'(0), −g'(0))`.
pub fn connected_length_for(lambda: f64, fp0: f64, gp0: f64) -> f64 {
    let k = (fp0 + lambda).sqrt();
    let m = (-(gp0 + lambda)).max(0.0).sqrt();
    (m / k).atan() / k
}

/// Zone length carrying principal eigenvalue `λ` for a separated zone whose
/// left end sits at `l1`:
/// `L(λ) = [arctan((m/k)·tanh(m·l1)) + arctan(m/k)] / k` with
/// `m = √(−(g'(0)+λ))`, `k = √(f'(0)+λ)`.
pub fn separated_length_for(lambda: f64, l1: f64, fp0: f64, gp0: f64) -> f64 {
    let k = (fp0 + lambda).sqrt();
    let m = (-(gp0 + lambda)).max(0.0).sqrt();
    (((m / k) * (m * l1).tanh()).atan() + (m / k).atan()) / k
}

fn invert_length<F: Fn(f64) -> f64>(length_of: F, l: f64, pair: &ReactionPair) -> Result<f64, SpectralError> {
    if !(l > 0.0) {
        return Err(SpectralError::NonPositive(l));
    }
    let (lo, hi) = (-pair.fp0(), -pair.gp0());
    // Stay a hair inside the open interval: L(λ) → ∞ at the left end.
    let span = hi - lo;
    let lam = bisect(|lam| length_of(lam) - l, lo + 1e-15 * span, hi, 1e-15 * span, 0.0)
        .map_err(|e| SpectralError::Inversion(e.to_string()))?;
    Ok(lam)
}

/// Principal eigenvalue `λ₁(L)` of the half-line problem with a connected
/// zone `[0, L]`.
pub fn lambda1_connected(l: f64, pair: &ReactionPair) -> Result<f64, SpectralError> {
    let (fp0, gp0) = (pair.fp0(), pair.gp0());
    invert_length(|lam| connected_length_for(lam, fp0, gp0), l, pair)
}

/// `L_* = arctan(√(−g'(0)/f'(0))) / √f'(0)`: the zone length where `λ₁` changes sign.
pub fn l_star(pair: &ReactionPair) -> f64 {
    connected_length_for(0.0, pair.fp0(), pair.gp0())
}

/// `L_** = π / (2√f'(0))`.
pub fn l_double_star(pair: &ReactionPair) -> f64 {
    FRAC_PI_2 / pair.fp0().sqrt()
}

/// Principal eigenvalue `λ̃₁(L)` for a separated zone `[l1, l1 + L]`.
pub fn lambda1_separated(l1: f64, l: f64, pair: &ReactionPair) -> Result<f64, SpectralError> {
    if !(l1 > 0.0) {
        return Err(SpectralError::NonPositive(l1));
    }
    let (fp0, gp0) = (pair.fp0(), pair.gp0());
    invert_length(|lam| separated_length_for(lam, l1, fp0, gp0), l, pair)
}

/// `L̃_*`: the separated-zone length where `λ̃₁` changes sign.
pub fn tilde_l_star(l1: f64, pair: &ReactionPair) -> f64 {
    separated_length_for(0.0, l1, pair.fp0(), pair.gp0())
}

/// `L̃_** = [arctan(√(−g'(0)/f'(0))·tanh(√(−g'(0))·l1)) + π/2] / √f'(0)`.
pub fn tilde_l_double_star(l1: f64, pair: &ReactionPair) -> f64 {
    let (fp0, gp0) = (pair.fp0(), pair.gp0());
    let m = (-gp0).sqrt();
    (((m / fp0.sqrt()) * (m * l1).tanh()).atan() + FRAC_PI_2) / fp0.sqrt()
}

/// Discretisation controls for the finite-domain eigenvalue.
#[derive(Debug, Clone, Copy)]
pub struct FiniteOptions {
    /// Cells on the coarsest grid.
    pub cells: usize,
    /// Stop once successive Richardson estimates differ by less than this.
    pub tol: f64,
    pub max_cells: usize,
}

impl Default for FiniteOptions {
    fn default() -> Self {
        Self { cells: 256, tol: 1e-10, max_cells: 1 << 14 }
    }
}

/// Cell widths per block: blocks are separated by zone edges inside `(0, R)`,
/// each block uniformly divided so that every cell lies in one region.
fn block_cells(layout: &ZoneLayout, r: f64, cells: usize) -> Vec<(f64, f64, usize)> {
    let mut cuts = vec![0.0];
    for e in [layout.l1(), layout.l2()] {
        if e > 0.0 && e < r {
            cuts.push(e);
        }
    }
    cuts.push(r);
    cuts.dedup();
    cuts.windows(2)
        .map(|w| {
            let len = w[1] - w[0];
            let n = ((cells as f64 * len / r).round() as usize).max(4);
            (w[0], w[1], n)
        })
        .collect()
}

/// Symmetrised finite-volume matrix `W^{-1/2} K W^{-1/2}` on `[0, R]`.
fn assemble(layout: &ZoneLayout, pair: &ReactionPair, blocks: &[(f64, f64, usize)], scale: usize) -> SymTridiag {
    let mut widths = Vec::new();
    let mut pot = Vec::new();
    for &(a, b, n) in blocks {
        let n = n * scale;
        let w = (b - a) / n as f64;
        let v = if layout.in_zone(0.5 * (a + b)) { -pair.fp0() } else { -pair.gp0() };
        widths.extend(std::iter::repeat_n(w, n));
        pot.extend(std::iter::repeat_n(v, n));
    }
    let n = widths.len();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    for i in 0..n {
        let mut k = widths[i] * pot[i];
        if i + 1 < n {
            let c = 2.0 / (widths[i] + widths[i + 1]);
            k += c;
            off[i] = -c / (widths[i] * widths[i + 1]).sqrt();
        } else {
            // Dirichlet face at R, half a cell away.
            k += 2.0 / widths[i];
        }
        if i > 0 {
            k += 2.0 / (widths[i - 1] + widths[i]);
        }
        diag[i] = k / widths[i];
    }
    SymTridiag { diag, off }
}

fn lowest_on_grid(m: &SymTridiag, r: f64) -> Result<f64, SpectralError> {
    // Sturm bisection to a tight shift, then inverse iteration polishes the pair.
    let mut lo = m.lower_bound() - 1.0;
    let mut hi = lo + 1.0;
    while m.count_below(hi) == 0 {
        hi = lo + 2.0 * (hi - lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if m.count_below(mid) == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-7 * hi.abs().max(1.0) {
            break;
        }
    }
    let shift = lo - 1e-6 * lo.abs().max(1.0);
    lowest_eigenpair(m, shift, 1e-15, 200).map(|e| e.value).ok_or(SpectralError::NoConvergence { r, cells: m.len() })
}

/// Principal eigenvalue on `[0, R]` with `φ'(0) = 0 = φ(R)`.
pub fn lambda1_finite(layout: &ZoneLayout, r: f64, pair: &ReactionPair) -> Result<f64, SpectralError> {
    lambda1_finite_with(layout, r, pair, &FiniteOptions::default())
}

pub fn lambda1_finite_with(
    layout: &ZoneLayout,
    r: f64,
    pair: &ReactionPair,
    opts: &FiniteOptions,
) -> Result<f64, SpectralError> {
    if !(r > 0.0) {
        return Err(SpectralError::NonPositive(r));
    }
    let blocks = block_cells(layout, r, opts.cells);
    let mut coarse = lowest_on_grid(&assemble(layout, pair, &blocks, 1), r)?;
    let mut scale = 2;
    let mut prev_rich = f64::NAN;
    loop {
        let fine = lowest_on_grid(&assemble(layout, pair, &blocks, scale), r)?;
        let rich = (4.0 * fine - coarse) / 3.0;
        let cells: usize = blocks.iter().map(|b| b.2).sum::<usize>() * scale;
        if (rich - prev_rich).abs() < opts.tol || cells * 2 > opts.max_cells {
            return Ok(rich);
        }
        prev_rich = rich;
        coarse = fine;
        scale *= 2;
    }
}

/// A length that may be infinite; serialises `+∞` as the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Extent(pub f64);

impl Extent {
    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }
}

impl Serialize for Extent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str("inf")
        }
    }
}

/// Critical radius `R*(L)` where the finite-domain principal eigenvalue
/// vanishes; `+∞` when the zone is too short for any radius to work.
pub fn r_star(layout: &ZoneLayout, pair: &ReactionPair) -> Result<Extent, SpectralError> {
    let threshold = match *layout {
        ZoneLayout::Connected { .. } => l_star(pair),
        ZoneLayout::Separated { l1, .. } => tilde_l_star(l1, pair),
    };
    if layout.length() <= threshold {
        return Ok(Extent(f64::INFINITY));
    }
    let lam = |r: f64| lambda1_finite(layout, r, pair);
    // λ^R is decreasing in R: find a bracket by doubling.
    let mut hi = layout.l2().max(1.0);
    let mut guard = 0;
    while lam(hi)? > 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 14 {
            return Err(SpectralError::Inversion(format!("no sign change of λ^R up to R = {hi}")));
        }
    }
    let mut lo = hi / 2.0;
    while lam(lo)? <= 0.0 {
        lo /= 2.0;
    }
    let mut err = None;
    let root = bisect(
        |r| match lam(r) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-7,
        0.0,
    );
    if let Some(e) = err {
        return Err(e);
    }
    root.map(Extent).map_err(|e| SpectralError::Inversion(e.to_string()))
}

/// Critical initial range: `+∞` for zones too short to support growth, else `R*(L)`.
pub fn h_star(layout: &ZoneLayout, pair: &ReactionPair) -> Result<Extent, SpectralError> {
    r_star(layout, pair)
}

/// Eigenvalue-derived critical quantities for one layout.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub layout: ZoneLayout,
    /// `λ₁(L)` (connected) or `λ̃₁(L)` (separated) on the half-line.
    pub lambda1: f64,
    pub l_star: f64,
    pub l_double_star: f64,
    pub r_star: Extent,
    pub h_star: Extent,
    pub tilde_l_star: Option<f64>,
    pub tilde_l_double_star: Option<f64>,
}

pub fn spectral_report(layout: &ZoneLayout, pair: &ReactionPair) -> Result<SpectralReport, SpectralError> {
    let (lambda1, tilde_ls, tilde_lds) = match *layout {
        ZoneLayout::Connected { l } => (lambda1_connected(l, pair)?, None, None),
        ZoneLayout::Separated { l1, .. } => (
            lambda1_separated(l1, layout.length(), pair)?,
            Some(tilde_l_star(l1, pair)),
            Some(tilde_l_double_star(l1, pair)),
        ),
    };
    let r = r_star(layout, pair)?;
    Ok(SpectralReport {
        layout: *layout,
        lambda1,
        l_star: l_star(pair),
        l_double_star: l_double_star(pair),
        r_star: r,
        h_star: r,
        tilde_l_star: tilde_ls,
        tilde_l_double_star: tilde_lds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_cubic_pair;

    fn pair() -> ReactionPair {
        make_cubic_pair(0.25).unwrap()
    }

    /// Exact `R*` for a connected zone, from matching `cos(√f'(0) x)` on the zone
    /// to `sinh(√(−g'(0))(R − x))` outside at `λ = 0`.
    fn r_star_closed_form(l: f64, fp0: f64, gp0: f64) -> f64 {
        let (k, m) = (fp0.sqrt(), (-gp0).sqrt());
        if k * l >= FRAC_PI_2 {
            return FRAC_PI_2 / k;
        }
        let ratio = k * (k * l).tan() / m; // = coth(m (R − L))
        l + (((ratio + 1.0) / (ratio - 1.0)).ln() / 2.0) / m
    }

    #[test]
    fn closed_form_lengths() {
        let p = pair();
        assert!((l_star(&p) - 0.5f64.atan()).abs() < 1e-15);
        assert!((l_star(&p) - 0.463648).abs() < 1e-6);
        assert!((l_double_star(&p) - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn lambda1_vanishes_at_l_star() {
        let p = pair();
        let lam = lambda1_connected(0.5f64.atan(), &p).unwrap();
        assert!(lam.abs() < 1e-9, "{lam}");
    }

    #[test]
    fn lambda1_inverts_forward_formula() {
        let p = pair();
        let l = connected_length_for(-0.1, 1.0, -0.25);
        let by_hand = (0.35f64 / 0.9).sqrt().atan() / 0.9f64.sqrt();
        assert!((l - by_hand).abs() < 1e-15);
        assert!((l - 0.587761).abs() < 1e-6, "{l}");
        let lam = lambda1_connected(l, &p).unwrap();
        assert!((lam + 0.1).abs() < 1e-9);
        assert!((connected_length_for(lam, 1.0, -0.25) - l).abs() <= 1e-10);
    }

    #[test]
    fn lambda1_tends_to_minus_gp0_for_thin_zone() {
        let p = pair();
        let lam = lambda1_connected(1e-6, &p).unwrap();
        assert!((lam - 0.25).abs() < 1e-6);
        assert!(lambda1_connected(0.0, &p).is_err());
    }

    #[test]
    fn separated_golden_values() {
        let p = pair();
        let t = (0.5 * 0.5f64.tanh()).atan();
        assert!((t - 0.227074).abs() < 1e-6);
        assert!((tilde_l_star(1.0, &p) - (t + 0.5f64.atan())).abs() < 1e-14);
        assert!((tilde_l_star(1.0, &p) - 0.690721).abs() < 1e-6);
        assert!((tilde_l_double_star(1.0, &p) - 1.797870).abs() < 1e-6);
        assert!(tilde_l_double_star(1.0, &p) > l_double_star(&p));
        let far = tilde_l_double_star(60.0, &p);
        assert!((far - (0.5f64.atan() + FRAC_PI_2)).abs() < 1e-12);
    }

    #[test]
    fn separated_reduces_to_connected_as_l1_vanishes() {
        let p = pair();
        for &l in &[0.3, 0.8, 1.4] {
            let a = lambda1_separated(1e-9, l, &p).unwrap();
            let b = lambda1_connected(l, &p).unwrap();
            assert!((a - b).abs() < 1e-7, "L={l}: {a} vs {b}");
        }
        assert!(lambda1_separated(0.0, 1.0, &p).is_err());
    }

    #[test]
    fn finite_eigenvalue_constant_potential() {
        let p = pair();
        let layout = ZoneLayout::connected(3.0).unwrap();
        let r = 2.0;
        let lam = lambda1_finite(&layout, r, &p).unwrap();
        let exact = -1.0 + (FRAC_PI_2 / r).powi(2);
        assert!((lam - exact).abs() < 1e-9, "{lam} vs {exact}");
    }

    #[test]
    fn finite_eigenvalue_zero_at_closed_form_radius() {
        let p = pair();
        for &l in &[0.6, 1.0, 1.3] {
            let r = r_star_closed_form(l, 1.0, -0.25);
            let layout = ZoneLayout::connected(l).unwrap();
            let lam = lambda1_finite(&layout, r, &p).unwrap();
            assert!(lam.abs() < 1e-7, "L={l}, R={r}: λ={lam}");
        }
    }

    #[test]
    fn r_star_matches_closed_form() {
        let p = pair();
        for &l in &[0.6, 1.0, 1.3] {
            let layout = ZoneLayout::connected(l).unwrap();
            let r = r_star(&layout, &p).unwrap().0;
            assert!((r - r_star_closed_form(l, 1.0, -0.25)).abs() < 1e-5, "L={l}");
        }
    }

    #[test]
    fn r_star_branches() {
        let p = pair();
        let at = r_star(&ZoneLayout::connected(FRAC_PI_2).unwrap(), &p).unwrap().0;
        assert!((at - FRAC_PI_2).abs() < 1e-4);
        let beyond = r_star(&ZoneLayout::connected(2.0).unwrap(), &p).unwrap().0;
        assert!((beyond - FRAC_PI_2).abs() < 1e-5);
        assert!(!r_star(&ZoneLayout::connected(0.3).unwrap(), &p).unwrap().is_finite());
        assert!(!h_star(&ZoneLayout::connected(0.4).unwrap(), &p).unwrap().is_finite());
    }

    #[test]
    fn separated_r_star_crosses_l2_at_tilde_l_double_star() {
        let p = pair();
        let lds = tilde_l_double_star(1.0, &p);
        let r = r_star(&ZoneLayout::separated(1.0, 1.0 + lds).unwrap(), &p).unwrap().0;
        assert!((r - (1.0 + lds)).abs() < 1e-3, "{r} vs {}", 1.0 + lds);
        let below = r_star(&ZoneLayout::separated(1.0, 1.0 + lds - 0.1).unwrap(), &p).unwrap().0;
        assert!(below > 1.0 + lds - 0.1);
        let above = r_star(&ZoneLayout::separated(1.0, 1.0 + lds + 0.1).unwrap(), &p).unwrap().0;
        assert!(above < 1.0 + lds + 0.1);
    }

    #[test]
    fn extent_serialises_infinity_as_string() {
        assert_eq!(serde_json::to_string(&Extent(f64::INFINITY)).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&Extent(1.5)).unwrap(), "1.5");
    }
}
