//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Every tolerance used below is a named constant in this file.

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use fbzone_core::classify::{
    run_and_classify, sigma_thresholds, ClassifierTolerances, Context, OutcomeKind, SearchOptions,
};
use fbzone_core::pde::{front_speed_estimate, profile_error_vs_semiwave, simulate, SolverConfig, Trajectory};
use fbzone_core::phaseplane::{bump_solution, ground_state_v, l_star_upper_with};
use fbzone_core::semiwave::{semi_wave_with_c0, wave_speed_c0};
use fbzone_core::spectral::{l_double_star, l_star, lambda1_connected, lambda1_finite, r_star, tilde_l_double_star};
use fbzone_core::{make_cubic_pair, InitialData, ReactionPair, ZoneLayout};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const THETA: f64 = 0.25;

// Criterion 1
const TOL_L_STAR: f64 = 1e-9;
const TOL_L_DOUBLE_STAR: f64 = 1e-12;
const GOLDEN_THETA_STAR: f64 = 0.392375;
const TOL_THETA_STAR: f64 = 1e-6;
const GOLDEN_C0: f64 = 0.353553;
const TOL_C0: f64 = 1e-6;
const GOLDEN_TILDE_L_DOUBLE_STAR: f64 = 1.797876;
const TOL_TILDE_L_DOUBLE_STAR: f64 = 1e-5;

// Criterion 2
const R_FAR: f64 = 40.0;
const TOL_FAR_EIGENVALUE: f64 = 1e-4;
const TOL_R_STAR_AT_L_DOUBLE_STAR: f64 = 1e-3;

// Criterion 3
const MU_GRID: [f64; 6] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
const TOL_SEMIWAVE_RESIDUAL: f64 = 1e-8;
const MU_LARGE: f64 = 1e4;
const TOL_LARGE_MU_REL: f64 = 0.01;

// Criterion 4
const SPREAD_L: f64 = 1.0;
const SPREAD_SIGMA: f64 = 5.0;
const SPREAD_H0: f64 = 2.0;
const SPREAD_DX: f64 = 0.02;
const SPREAD_T_MAX: f64 = 150.0;
const SPEED_WINDOW: f64 = 0.3;
const TOL_SPEED_REL: f64 = 0.05;
const TOL_PROFILE_FINAL: f64 = 0.05;
const PROFILE_NOISE: f64 = 1e-3;

// Criterion 5
const SMALL_L: f64 = 0.3;
const SMALL_H0: f64 = 1.0;
const LARGE_L: f64 = 2.0;
const LARGE_H0: f64 = 3.0;
const MIDDLE_L: f64 = 1.0;
const MIDDLE_H0_MARGIN: f64 = 0.5;

// Criterion 6
const SEP_L1: f64 = 1.0;
const SEP_L: f64 = 1.6;
const SEP_SIGMA_MIN: f64 = 1e-4;
const SEP_SIGMA_MAX: f64 = 5.0;
const SEP_PROBES: usize = 12;

// Criterion 7
const COMPARISON_SETS: usize = 5;
const COMPARISON_SEED: u64 = 20_240_611;
const COMPARISON_T_MAX: f64 = 30.0;
const TOL_ORDER_U: f64 = 1e-4;
const TOL_ORDER_H: f64 = 1e-6;

// Criterion 8
const TOL_V_ENERGY: f64 = 1e-9;
const BUMP_ALPHA: f64 = 0.9;
const TOL_BUMP_WIDTH: f64 = 1e-4;
const TOL_L_STAR_UPPER_SCAN: f64 = 1e-3;

/// Solver settings shared by every σ probe.
fn probe_config() -> SolverConfig {
    SolverConfig::new(0.02, 200.0, 1.0)
}

fn pair() -> ReactionPair {
    make_cubic_pair(THETA).expect("cubic default")
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

struct Report {
    checks: Vec<(bool, String)>,
}

impl Report {
    fn new() -> Self {
        Self { checks: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.checks.push((ok, what.into()));
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.0)
    }
}

type Criterion = fn(&mut Report) -> Result<(), String>;

fn criterion_1(r: &mut Report) -> Result<(), String> {
    let p = pair();
    let ls = l_star(&p);
    r.check((ls - 0.5f64.atan()).abs() < TOL_L_STAR, format!("L_* = {ls:.12}"));
    let lds = l_double_star(&p);
    r.check((lds - FRAC_PI_2).abs() < TOL_L_DOUBLE_STAR, format!("L_** = {lds:.15}"));
    let ts = p.theta_star().map_err(|e| e.to_string())?;
    r.check((ts - GOLDEN_THETA_STAR).abs() < TOL_THETA_STAR, format!("θ* = {ts:.9}"));
    let c0 = wave_speed_c0(&p).map_err(|e| e.to_string())?;
    r.check((c0 - GOLDEN_C0).abs() < TOL_C0, format!("c₀ = {c0:.9}"));
    let t = tilde_l_double_star(1.0, &p);
    r.check((t - GOLDEN_TILDE_L_DOUBLE_STAR).abs() < TOL_TILDE_L_DOUBLE_STAR, format!("L̃_**(1) = {t:.9}"));
    Ok(())
}

fn criterion_2(r: &mut Report) -> Result<(), String> {
    let p = pair();
    for l in [0.2, 0.5, 1.0, 1.5] {
        let layout = ZoneLayout::connected(l).map_err(|e| e.to_string())?;
        let far = lambda1_finite(&layout, R_FAR, &p).map_err(|e| e.to_string())?;
        let half = lambda1_connected(l, &p).map_err(|e| e.to_string())?;
        r.check((far - half).abs() < TOL_FAR_EIGENVALUE, format!("L={l}: λ^R(40) = {far:.7}, λ₁ = {half:.7}"));
        let lam: Vec<f64> = [l + 0.2, l + 0.5, l + 1.0, l + 2.0, l + 4.0, 10.0 + l, R_FAR]
            .iter()
            .map(|&rr| lambda1_finite(&layout, rr, &p))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        r.check(lam.windows(2).all(|w| w[1] < w[0]), format!("L={l}: λ^R strictly decreasing in R"));
    }
    let lds = l_double_star(&p);
    let rs = r_star(&ZoneLayout::connected(lds).map_err(|e| e.to_string())?, &p).map_err(|e| e.to_string())?.0;
    r.check((rs - lds).abs() < TOL_R_STAR_AT_L_DOUBLE_STAR, format!("R*(L_**) = {rs:.6}"));
    Ok(())
}

fn criterion_3(r: &mut Report) -> Result<(), String> {
    let p = pair();
    let c0 = wave_speed_c0(&p).map_err(|e| e.to_string())?;
    let mut speeds = Vec::new();
    for mu in MU_GRID {
        let sw = semi_wave_with_c0(mu, c0, &p).map_err(|e| e.to_string())?;
        r.check(
            sw.residual < TOL_SEMIWAVE_RESIDUAL,
            format!("μ={mu}: c* = {:.9}, residual {:.1e}", sw.c_star, sw.residual),
        );
        speeds.push(sw.c_star);
    }
    r.check(speeds.windows(2).all(|w| w[1] > w[0]), "c*_μ strictly increasing");
    let big = semi_wave_with_c0(MU_LARGE, c0, &p).map_err(|e| e.to_string())?;
    let rel = (c0 - big.c_star) / c0;
    r.check(rel.abs() < TOL_LARGE_MU_REL, format!("μ=1e4: c* = {:.6}, (c₀ − c*)/c₀ = {rel:.2e}", big.c_star));
    Ok(())
}

fn criterion_4(r: &mut Report) -> Result<(), String> {
    let p = pair();
    let layout = ZoneLayout::connected(SPREAD_L).map_err(|e| e.to_string())?;
    let init = InitialData::cosine(SPREAD_H0, SPREAD_SIGMA).map_err(|e| e.to_string())?;
    let cfg = SolverConfig::new(SPREAD_DX, SPREAD_T_MAX, 1.0);
    let traj = simulate(&layout, &p, &init, &cfg).map_err(|e| e.to_string())?;
    let c0 = wave_speed_c0(&p).map_err(|e| e.to_string())?;
    let sw = semi_wave_with_c0(1.0, c0, &p).map_err(|e| e.to_string())?;
    let speed = front_speed_estimate(&traj, SPEED_WINDOW).map_err(|e| e.to_string())?;
    let rel = (speed - sw.c_star) / sw.c_star;
    r.check(rel.abs() < TOL_SPEED_REL, format!("front slope {speed:.6} vs c* {:.6} ({:+.3}%)", sw.c_star, 100.0 * rel));
    let errs = profile_error_vs_semiwave(&traj, &sw).map_err(|e| e.to_string())?;
    let last = errs.last().ok_or("no snapshots")?.1;
    r.check(last < TOL_PROFILE_FINAL, format!("final profile error {last:.2e}"));
    let tail = &errs[errs.len() / 2..];
    let mono = tail.windows(2).all(|w| w[1].1 <= w[0].1 + PROFILE_NOISE);
    r.check(mono, format!("profile error non-increasing over trailing half within {PROFILE_NOISE}"));
    Ok(())
}

fn criterion_5(r: &mut Report) -> Result<(), String> {
    let p = pair();
    let cfg = probe_config();
    let tol = ClassifierTolerances::default();

    // (a) small zone
    let layout = ZoneLayout::connected(SMALL_L).map_err(|e| e.to_string())?;
    r.check(SMALL_L <= l_star(&p), format!("(a) L = {SMALL_L} ≤ L_*"));
    let shape = InitialData::cosine(SMALL_H0, 1.0).map_err(|e| e.to_string())?;
    let rep =
        sigma_thresholds(&p, &layout, &shape, &cfg, &tol, &SearchOptions::default()).map_err(|e| e.to_string())?;
    let (lo, hi) = (rep.sigma_lower, rep.sigma_upper.0);
    r.check(
        rep.complete && 0.0 < lo && lo <= hi && hi.is_finite(),
        format!("(a) 0 < σ_* = {lo:.5} ≤ σ* = {hi:.5} < ∞ in {} probes", rep.probes),
    );
    let below_ok = rep.bands.iter().filter(|b| b.0 <= lo).all(|b| b.1.kind == OutcomeKind::Vanishing);
    let above_ok = rep.bands.iter().filter(|b| b.0 >= hi).all(|b| b.1.kind == OutcomeKind::Spreading);
    r.check(below_ok && above_ok, "(a) certified Vanishing at and below σ_*, Spreading at and above σ*");

    // (b) large zone
    let layout = ZoneLayout::connected(LARGE_L).map_err(|e| e.to_string())?;
    let lsu = l_star_upper_with(&p, 1024).map_err(|e| e.to_string())?;
    r.check(LARGE_L > lsu.max(l_double_star(&p)), format!("(b) L = {LARGE_L} > max(L★ = {lsu:.6}, L_**)"));
    let ctx = Context::new(&p, &layout, &tol).map_err(|e| e.to_string())?;
    let mut kinds = Vec::new();
    for s in log_grid(0.05, 5.0, 12) {
        let init = InitialData::cosine(LARGE_H0, s).map_err(|e| e.to_string())?;
        kinds.push(run_and_classify(&p, &ctx, &init, &cfg).map_err(|e| e.to_string())?.0.kind);
    }
    let n = kinds.iter().filter(|k| **k == OutcomeKind::Spreading).count();
    r.check(n == 12, format!("(b) {n}/12 probes Spreading"));

    // (c) middle zone, h0 beyond R*
    let layout = ZoneLayout::connected(MIDDLE_L).map_err(|e| e.to_string())?;
    r.check(l_star(&p) < MIDDLE_L && MIDDLE_L < l_double_star(&p), format!("(c) L_* < L = {MIDDLE_L} < L_**"));
    let rs = r_star(&layout, &p).map_err(|e| e.to_string())?.0;
    let h0 = rs + MIDDLE_H0_MARGIN;
    let ctx = Context::new(&p, &layout, &tol).map_err(|e| e.to_string())?;
    let mut vanish = 0;
    let grid = log_grid(1e-3, 1.0, 7);
    for &s in &grid {
        let init = InitialData::cosine(h0, s).map_err(|e| e.to_string())?;
        if run_and_classify(&p, &ctx, &init, &cfg).map_err(|e| e.to_string())?.0.kind == OutcomeKind::Vanishing {
            vanish += 1;
        }
    }
    r.check(
        vanish == 0,
        format!("(c) h0 = R* + {MIDDLE_H0_MARGIN} = {h0:.4}: {vanish}/{} probes Vanishing", grid.len()),
    );
    Ok(())
}

fn criterion_6(r: &mut Report) -> Result<(), String> {
    let p = pair();
    let cfg = probe_config();
    let tol = ClassifierTolerances::default();
    let lt = tilde_l_double_star(SEP_L1, &p);
    r.check(l_double_star(&p) < SEP_L && SEP_L < lt, format!("L_** < L = {SEP_L} < L̃_** = {lt:.6}"));
    let sep = ZoneLayout::separated(SEP_L1, SEP_L1 + SEP_L).map_err(|e| e.to_string())?;
    let con = ZoneLayout::connected(SEP_L).map_err(|e| e.to_string())?;
    let rt = r_star(&sep, &p).map_err(|e| e.to_string())?.0;
    let h0 = 0.5 * (sep.l2() + rt);
    let grid = log_grid(SEP_SIGMA_MIN, SEP_SIGMA_MAX, SEP_PROBES);
    let mut rows = Vec::new();
    for layout in [con, sep] {
        let ctx = Context::new(&p, &layout, &tol).map_err(|e| e.to_string())?;
        let mut kinds = Vec::new();
        for &s in &grid {
            let init = InitialData::cosine(h0, s).map_err(|e| e.to_string())?;
            kinds.push(run_and_classify(&p, &ctx, &init, &cfg).map_err(|e| e.to_string())?.0.kind);
        }
        rows.push(kinds);
    }
    let con_spread = rows[0].iter().all(|k| *k == OutcomeKind::Spreading);
    r.check(con_spread, format!("connected, h0 = {h0:.4}: all {} probes Spreading", grid.len()));
    let sep_v = rows[1].iter().filter(|k| **k == OutcomeKind::Vanishing).count();
    let sep_s = rows[1].iter().filter(|k| **k == OutcomeKind::Spreading).count();
    r.check(sep_v > 0, format!("separated [1, {:.1}], R̃* = {rt:.4}: {sep_v} Vanishing, {sep_s} Spreading", sep.l2()));
    Ok(())
}

/// Largest violation of `a ≥ b` for `(h, u)` over matching snapshots.
fn order_violation(a: &Trajectory, b: &Trajectory) -> (f64, f64) {
    let (mut dh, mut du) = (0.0f64, 0.0f64);
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        dh = dh.max(sb.h - sa.h);
        for (x, ub) in sb.profile.xs.iter().zip(&sb.profile.us) {
            du = du.max(ub - sa.profile.value_or(*x, 0.0));
        }
        for (x, ua) in sa.profile.xs.iter().zip(&sa.profile.us) {
            du = du.max(sb.profile.value_or(*x, 0.0) - ua);
        }
    }
    (dh, du)
}

fn criterion_7(r: &mut Report) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(COMPARISON_SEED);
    for k in 0..COMPARISON_SETS {
        let theta = rng.gen_range(0.15..0.4);
        let p = make_cubic_pair(theta).map_err(|e| e.to_string())?;
        let l = rng.gen_range(0.2..2.0);
        let layout = if rng.gen_bool(0.5) {
            ZoneLayout::connected(l)
        } else {
            let l1 = rng.gen_range(0.2..1.5);
            ZoneLayout::separated(l1, l1 + l)
        }
        .map_err(|e| e.to_string())?;
        let h0 = layout.l2() + rng.gen_range(0.3..1.5);
        let sigma = rng.gen_range(0.1..2.0);
        let sigma_hi = sigma * rng.gen_range(1.05..1.5);
        let mu = rng.gen_range(0.5..2.0);
        let mu_hi = mu * rng.gen_range(1.2..2.0);
        let cfg = SolverConfig::new(0.02, COMPARISON_T_MAX, mu);
        let run = |s: f64, c: &SolverConfig| -> Result<Trajectory, String> {
            let init = InitialData::cosine(h0, s).map_err(|e| e.to_string())?;
            simulate(&layout, &p, &init, c).map_err(|e| e.to_string())
        };
        let base = run(sigma, &cfg)?;
        let (dh, du) = order_violation(&run(sigma_hi, &cfg)?, &base);
        r.check(dh <= TOL_ORDER_H && du <= TOL_ORDER_U, format!("set {k} σ-order: Δh {dh:.1e}, Δu {du:.1e}"));
        let (dh, du) = order_violation(&run(sigma, &SolverConfig { mu: mu_hi, ..cfg })?, &base);
        r.check(dh <= TOL_ORDER_H && du <= TOL_ORDER_U, format!("set {k} μ-order: Δh {dh:.1e}, Δu {du:.1e}"));
    }
    Ok(())
}

fn criterion_8(r: &mut Report) -> Result<(), String> {
    let p = pair();
    let v = ground_state_v(&p).map_err(|e| e.to_string())?;
    let res = v.meta["energy_residual"];
    r.check(res < TOL_V_ENERGY, format!("V energy residual {res:.1e}"));
    let (bump, l) = bump_solution(BUMP_ALPHA, &p).map_err(|e| e.to_string())?;
    let n = bump.len();
    r.check((0..n).all(|i| bump.us[i] == bump.us[n - 1 - i]), "bump symmetric sample for sample");
    let ode = bump.meta["ode_half_width"];
    r.check((l - ode).abs() < TOL_BUMP_WIDTH, format!("l_α quadrature {l:.8} vs orbit {ode:.8}"));
    let coarse = l_star_upper_with(&p, 1024).map_err(|e| e.to_string())?;
    let fine = l_star_upper_with(&p, 4096).map_err(|e| e.to_string())?;
    r.check(fine.is_finite() && fine >= l_star(&p), format!("L★ = {fine:.9} finite and ≥ L_*"));
    r.check(
        (fine - coarse).abs() < TOL_L_STAR_UPPER_SCAN,
        format!("L★ scan 1024 vs 4096 differ by {:.1e}", (fine - coarse).abs()),
    );
    Ok(())
}

fn main() {
    let criteria: [(&str, Criterion); 8] = [
        ("closed-form golden values", criterion_1),
        ("eigenvalue oracle equivalence", criterion_2),
        ("semi-wave contract", criterion_3),
        ("spreading speed and profile", criterion_4),
        ("trichotomy structure", criterion_5),
        ("separated vs connected", criterion_6),
        ("comparison principle", criterion_7),
        ("phase-plane suite", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut rep = Report::new();
        let outcome = run(&mut rep);
        let ok = outcome.is_ok() && rep.passed();
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {} [{}] {name} ({:.1} s)",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        for (good, what) in &rep.checks {
            println!("    {} {what}", if *good { "ok  " } else { "FAIL" });
        }
        if let Err(e) = outcome {
            println!("    FAIL error: {e}");
        }
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
