use fbzone_core::classify::{
    phase_diagram, sigma_thresholds, ClassifierTolerances, DiagramSpec, OutcomeKind, SearchOptions,
};
use fbzone_core::model::validate;
use fbzone_core::pde::{front_speed_estimate, simulate, SolverConfig};
use fbzone_core::phaseplane::{
    bump_solution, ground_state_v_with, ground_states_connected_with, l_star_upper_with, scan_l_of_a,
};
use fbzone_core::semiwave::{semi_wave_with_c0, wave_speed_c0};
use fbzone_core::spectral::{lambda1_connected, r_star, spectral_report, Extent};
use fbzone_core::{make_cubic_pair, InitialData, LayoutKind, ReactionPair, ZoneLayout};
use serde_json::json;

use crate::error::CliError;
use crate::params::Params;
use crate::plot::{heat_map, line_chart, Axes, Category, Series};
use crate::run::{num, RunDir};

const HYPOTHESIS_SAMPLES: usize = 1000;

/// Builds the cubic pair and rejects it unless every standing hypothesis holds.
fn pair(p: &Params) -> Result<ReactionPair, CliError> {
    let pair = make_cubic_pair(p.f64("theta")?)?;
    let report = validate(&pair, HYPOTHESIS_SAMPLES);
    if let Some(bad) = report.first_failure() {
        return Err(CliError::Validation(format!("hypothesis {} failed: {}", bad.name, bad.detail)));
    }
    Ok(pair)
}

/// `--L1 --L2` give a separated zone, otherwise `--L` a connected one.
fn layout(p: &Params) -> Result<ZoneLayout, CliError> {
    match (p.opt_f64("L1")?, p.opt_f64("L2")?) {
        (Some(l1), Some(l2)) => Ok(ZoneLayout::separated(l1, l2)?),
        (None, None) => Ok(ZoneLayout::connected(p.f64("L")?)?),
        _ => Err(CliError::Usage("a separated zone needs both L1 and L2".into())),
    }
}

fn solver(p: &Params, pair: &ReactionPair) -> Result<SolverConfig, CliError> {
    let mut cfg = SolverConfig::new(p.f64("dx")?, p.f64("tmax")?, p.f64("mu")?);
    if let Some(dt) = p.opt_f64("dt")? {
        cfg = cfg.with_dt(dt);
    }
    cfg.validate(pair)?;
    Ok(cfg)
}

fn initial_front(p: &Params, layout: &ZoneLayout) -> Result<f64, CliError> {
    Ok(p.opt_f64("h0")?.unwrap_or(layout.l2() + 1.0))
}

fn extent(e: Extent) -> String {
    if e.is_finite() {
        format!("{:.12}", e.0)
    } else {
        "inf".into()
    }
}

const OUTCOMES: [Category; 3] = [
    Category { label: "vanishing", colour: "#3b6fb6" },
    Category { label: "transition / undetermined", colour: "#bbbbbb" },
    Category { label: "spreading", colour: "#d1495b" },
];

fn outcome_index(k: OutcomeKind) -> usize {
    match k {
        OutcomeKind::Vanishing => 0,
        OutcomeKind::Transition | OutcomeKind::Undetermined => 1,
        OutcomeKind::Spreading => 2,
    }
}

pub fn criticals(p: &Params, run: &mut RunDir, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let pair = pair(p)?;
    let connected = ZoneLayout::connected(p.f64("L")?)?;
    let report = spectral_report(&connected, &pair)?;
    let separated = match p.opt_f64("L1")? {
        Some(l1) => Some(spectral_report(&ZoneLayout::separated(l1, l1 + connected.length())?, &pair)?),
        None => None,
    };
    let l_star_upper = l_star_upper_with(&pair, p.usize("scan")?)?;
    let c0 = wave_speed_c0(&pair)?;
    let grid = p.range("Lgrid")?;
    let mut lambdas = Vec::new();
    let mut radii = Vec::new();
    for &l in &grid {
        let layout = ZoneLayout::connected(l)?;
        lambdas.push(lambda1_connected(l, &pair)?);
        radii.push(r_star(&layout, &pair)?.0);
    }
    let doc = json!({
        "pair": pair.summary(),
        "connected": report,
        "separated": separated,
        "l_star_upper": l_star_upper,
        "c0": c0,
        "table": grid.iter().zip(&lambdas).zip(&radii)
            .map(|((l, lam), r)| json!({"L": l, "lambda1": lam, "r_star": Extent(*r), "h_star": Extent(*r)}))
            .collect::<Vec<_>>(),
    });
    run.json("criticals.json", &doc)?;
    run.csv(
        "hstar.csv",
        &["L", "lambda1", "r_star"],
        grid.iter().zip(&lambdas).zip(&radii).map(|((l, lam), r)| vec![num(*l), num(*lam), num(*r)]),
    )?;
    if radii.iter().any(|r| r.is_finite()) {
        let axes = Axes { title: "critical radius R*(L)", x: "zone length L", y: "R*" };
        run.svg("rstar.svg", line_chart(&axes, &[Series::new("R*(L)", &grid, &radii)], run.checksum()))?;
    }
    if p.raw("format") == "json" {
        writeln!(out, "{doc}")?;
        return Ok(());
    }
    let rows: Vec<(&str, String)> = [
        ("theta", format!("{}", pair.theta())),
        ("L", format!("{}", connected.length())),
        ("lambda1(L)", format!("{:.12}", report.lambda1)),
        ("L_*", format!("{:.12}", report.l_star)),
        ("L_**", format!("{:.12}", report.l_double_star)),
        ("L_star_upper", format!("{l_star_upper:.12}")),
        ("R*(L) = h*(L)", extent(report.r_star)),
        ("c0", format!("{c0:.12}")),
    ]
    .into_iter()
    .chain(separated.iter().flat_map(|s| {
        [
            ("lambda1~(L)", format!("{:.12}", s.lambda1)),
            ("L~_*", format!("{:.12}", s.tilde_l_star.unwrap_or(f64::NAN))),
            ("L~_**", format!("{:.12}", s.tilde_l_double_star.unwrap_or(f64::NAN))),
            ("R~*(L)", extent(s.r_star)),
        ]
    }))
    .collect();
    for (k, v) in rows {
        writeln!(out, "{k:<16} {v}")?;
    }
    Ok(())
}

pub fn groundstate(p: &Params, run: &mut RunDir, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let pair = pair(p)?;
    let v = ground_state_v_with(&pair, p.f64("dx")?)?;
    run.columns("v.csv", &["x", "v"], &[&v.xs, &v.us])?;
    let axes = Axes { title: "ground state V", x: "x", y: "V(x)" };
    run.svg("v.svg", line_chart(&axes, &[Series::new("V", &v.xs, &v.us)], run.checksum()))?;
    let n = p.usize("scan")?;
    let scan = scan_l_of_a(&pair, n)?;
    run.columns("lscan.csv", &["a", "L"], &[&scan.a, &scan.l])?;
    let axes = Axes { title: "matching length L(a)", x: "a = U(0)", y: "L(a)" };
    run.svg("lscan.svg", line_chart(&axes, &[Series::new("L(a)", &scan.a, &scan.l)], run.checksum()))?;
    let l_upper = l_star_upper_with(&pair, n)?;
    let mut states = Vec::new();
    if let Some(l) = p.opt_f64("L")? {
        for (k, gs) in ground_states_connected_with(l, &pair, n)?.into_iter().enumerate() {
            let rel = format!("groundstate_{k}.csv");
            run.columns(&rel, &["x", "u"], &[&gs.profile.xs, &gs.profile.us])?;
            let axes = Axes { title: "connected-zone ground state", x: "x", y: "U(x)" };
            let label = format!("a = {:.6}", gs.a);
            run.svg(
                &format!("groundstate_{k}.svg"),
                line_chart(&axes, &[Series::new(label, &gs.profile.xs, &gs.profile.us)], run.checksum()),
            )?;
            states.push(json!({"a": gs.a, "L": gs.l, "matching_residual": gs.matching_residual, "file": rel}));
        }
    }
    let doc = json!({"v": v.meta, "l_star_upper": l_upper, "ground_states": states});
    run.json("groundstate.json", &doc)?;
    writeln!(out, "{doc}")?;
    Ok(())
}

pub fn bump(p: &Params, run: &mut RunDir, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let pair = pair(p)?;
    let (profile, l) = bump_solution(p.f64("alpha")?, &pair)?;
    run.columns("bump.csv", &["x", "u"], &[&profile.xs, &profile.us])?;
    let axes = Axes { title: "bump solution", x: "x", y: "u" };
    run.svg("bump.svg", line_chart(&axes, &[Series::new("bump", &profile.xs, &profile.us)], run.checksum()))?;
    let doc = json!({"l_alpha": l, "meta": profile.meta});
    run.json("bump.json", &doc)?;
    writeln!(out, "{doc}")?;
    Ok(())
}

pub fn semiwave(p: &Params, run: &mut RunDir, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let pair = pair(p)?;
    let c0 = wave_speed_c0(&pair)?;
    let sw = semi_wave_with_c0(p.f64("mu")?, c0, &pair)?;
    run.columns("semiwave.csv", &["z", "q"], &[&sw.profile.xs, &sw.profile.us])?;
    let axes = Axes { title: "semi-wave profile", x: "z", y: "q(z)" };
    run.svg("semiwave.svg", line_chart(&axes, &[Series::new("q", &sw.profile.xs, &sw.profile.us)], run.checksum()))?;
    let doc = json!({"mu": sw.mu, "c0": c0, "c_star": sw.c_star, "q_prime_0": sw.p0, "residual": sw.residual});
    run.json("semiwave.json", &doc)?;
    writeln!(out, "{doc}")?;
    Ok(())
}

pub fn simulate_cmd(p: &Params, run: &mut RunDir, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let pair = pair(p)?;
    let layout = layout(p)?;
    if p.raw("profile") != "cosine" {
        return Err(CliError::Usage(format!(
            "unknown initial profile '{}'; only cosine is built in",
            p.raw("profile")
        )));
    }
    let h0 = initial_front(p, &layout)?;
    let init = InitialData::cosine(h0, p.f64("sigma")?)?;
    let cfg = solver(p, &pair)?;
    let traj = simulate(&layout, &pair, &init, &cfg)?;
    run.columns("h.csv", &["t", "h"], &[&traj.ts, &traj.hs])?;
    let every = p.f64("snapshot_every")?;
    if !(every > 0.0) {
        return Err(CliError::Validation(format!("snapshot_every must be positive, got {every}")));
    }
    let mut index = Vec::new();
    let mut next = 0.0;
    let last = traj.snapshots.len() - 1;
    for (k, s) in traj.snapshots.iter().enumerate() {
        if s.t + 1e-9 >= next || k == last {
            let rel = format!("snapshots/snapshot_{:05}.csv", index.len());
            run.columns(&rel, &["x", "u"], &[&s.profile.xs, &s.profile.us])?;
            index.push(vec![num(s.t), num(s.h), rel]);
            while next <= s.t + 1e-9 {
                next += every;
            }
        }
    }
    run.csv("snapshots.csv", &["t", "h", "file"], index)?;
    let axes = Axes { title: "free boundary h(t)", x: "t", y: "h" };
    run.svg("h.svg", line_chart(&axes, &[Series::new("h(t)", &traj.ts, &traj.hs)], run.checksum()))?;
    let fin = traj.last().expect("initial snapshot");
    let axes = Axes { title: "final profile", x: "x", y: "u" };
    let label = format!("t = {:.3}", fin.t);
    run.svg("profile.svg", line_chart(&axes, &[Series::new(label, &fin.profile.xs, &fin.profile.us)], run.checksum()))?;
    let doc = json!({
        "layout": layout,
        "initial_profile": "sigma * cos(pi x / (2 h0))",
        "h0": h0,
        "config": traj.config,
        "stop": traj.stop,
        "steps": traj.steps,
        "regrids": traj.regrids,
        "t_final": traj.t_final(),
        "h_final": traj.h_final(),
        "sup_u_final": fin.profile.sup(),
        "front_speed_trailing_30pct": front_speed_estimate(&traj, 0.3).ok(),
    });
    run.json("summary.json", &doc)?;
    writeln!(out, "{doc}")?;
    Ok(())
}

pub fn thresholds(p: &Params, run: &mut RunDir, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let pair = pair(p)?;
    let layout = layout(p)?;
    let shape = InitialData::cosine(initial_front(p, &layout)?, 1.0)?;
    let cfg = solver(p, &pair)?;
    let opts = SearchOptions {
        bisect_tol: p.f64("bisect_tol")?,
        max_probes: p.usize("max_probes")?,
        sigma_start: p.f64("sigma_start")?,
        sigma_min: p.f64("sigma_min")?,
        sigma_max: p.f64("sigma_max")?,
    };
    let tol = ClassifierTolerances::default();
    let report = sigma_thresholds(&pair, &layout, &shape, &cfg, &tol, &opts)?;
    run.json("thresholds.json", &report)?;
    let mut bands = report.bands.clone();
    bands.sort_by(|a, b| a.0.total_cmp(&b.0));
    run.csv(
        "bands.csv",
        &["sigma", "outcome", "sup_u", "h_final", "t_decided"],
        bands.iter().map(|(s, o)| {
            vec![num(*s), o.kind.label().to_string(), num(o.evidence.sup_u), num(o.evidence.h_final), num(o.t_decided)]
        }),
    )?;
    let sigmas: Vec<f64> = bands.iter().map(|b| b.0).collect();
    let row: Vec<usize> = bands.iter().map(|b| outcome_index(b.1.kind)).collect();
    let axes = Axes { title: "probe outcomes", x: "σ (probe order by value)", y: "L" };
    run.svg("bands.svg", heat_map(&axes, &sigmas, &[layout.length()], &[row], &OUTCOMES, run.checksum()))?;
    writeln!(
        out,
        "{}",
        json!({"sigma_lower": report.sigma_lower, "sigma_upper": report.sigma_upper, "complete": report.complete, "probes": report.probes})
    )?;
    Ok(())
}

pub fn phasediagram(p: &Params, run: &mut RunDir, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let pair = pair(p)?;
    let kind = match p.raw("kind") {
        "connected" => LayoutKind::Connected,
        "separated" => LayoutKind::Separated,
        other => return Err(CliError::Usage(format!("kind must be connected or separated, got '{other}'"))),
    };
    let spec = DiagramSpec { kind, l1: p.f64("L1")?, h0_offset: p.f64("h0_offset")? };
    let ls = p.range("L")?;
    let sigmas = p.range("sigma")?;
    let cfg = solver(p, &pair)?;
    let m = phase_diagram(&ls, &sigmas, &spec, &pair, &cfg, &ClassifierTolerances::default())?;
    run.json("matrix.json", &m)?;
    let rows =
        m.ls.iter().zip(&m.cells).flat_map(|(l, row)| {
            m.sigmas.iter().zip(row).map(move |(s, k)| vec![num(*l), num(*s), k.label().to_string()])
        });
    run.csv("outcomes.csv", &["L", "sigma", "outcome"], rows)?;
    let cells: Vec<Vec<usize>> = m.cells.iter().map(|r| r.iter().map(|&k| outcome_index(k)).collect()).collect();
    let axes = Axes { title: "outcome over (L, σ)", x: "σ", y: "zone length L" };
    run.svg("heatmap.svg", heat_map(&axes, &m.sigmas, &m.ls, &cells, &OUTCOMES, run.checksum()))?;
    let count = |k: OutcomeKind| m.cells.iter().flatten().filter(|&&c| c == k).count();
    writeln!(
        out,
        "{}",
        json!({
            "cells": ls.len() * sigmas.len(),
            "vanishing": count(OutcomeKind::Vanishing),
            "spreading": count(OutcomeKind::Spreading),
            "transition": count(OutcomeKind::Transition),
            "undetermined": count(OutcomeKind::Undetermined),
            "diagnostics": m.diagnostics.len(),
        })
    )?;
    Ok(())
}
