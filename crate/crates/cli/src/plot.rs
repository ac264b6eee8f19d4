//! Standalone SVG line charts and categorical heat maps.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PlotError {
    #[error("nothing to plot: {0}")]
    Empty(String),
}

const W: f64 = 720.0;
const H: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, xs: &[f64], ys: &[f64]) -> Self {
        Self { label: label.into(), points: xs.iter().copied().zip(ys.iter().copied()).collect() }
    }
}

pub struct Axes<'a> {
    pub title: &'a str,
    pub x: &'a str,
    pub y: &'a str,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(axes: &Axes, checksum: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, "<metadata>run-checksum sha256:{checksum}</metadata>");
    let _ = writeln!(s, "<title>{}</title>", escape(axes.title));
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        W / 2.0,
        escape(axes.title)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + (W - LEFT - RIGHT) / 2.0,
        H - 15.0,
        escape(axes.x)
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(20 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
        TOP + (H - TOP - BOTTOM) / 2.0,
        escape(axes.y)
    );
    s
}

/// Roughly five round tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
        (lo - pad, hi + pad)
    }
}

/// Line chart of one or more series; non-finite points are skipped.
pub fn line_chart(axes: &Axes, series: &[Series], checksum: &str) -> Result<String, PlotError> {
    let finite: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| s.points.iter().copied().filter(|p| p.0.is_finite() && p.1.is_finite()).collect())
        .collect();
    if finite.iter().all(Vec::is_empty) {
        return Err(PlotError::Empty(axes.title.to_string()));
    }
    let all = finite.iter().flatten();
    let (x0, x1) = padded(
        all.clone().map(|p| p.0).fold(f64::INFINITY, f64::min),
        all.clone().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
    );
    let (y0, y1) = padded(
        all.clone().map(|p| p.1).fold(f64::INFINITY, f64::min),
        all.map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
    );
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut s = header(axes, checksum);
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for t in ticks(x0, x1) {
        let x = sx(t);
        let _ =
            writeln!(s, r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, label(t));
    }
    for t in ticks(y0, y1) {
        let y = sy(t);
        let _ = writeln!(s, r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, y + 4.0, label(t));
    }
    for (i, (pts, ser)) in finite.iter().zip(series).enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ =
            writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = W - RIGHT + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// A labelled, coloured category of a heat map.
pub struct Category {
    pub label: &'static str,
    pub colour: &'static str,
}

/// Grid of categories: `cells[i][j]` sits at row `rows[i]`, column `cols[j]`.
pub fn heat_map(
    axes: &Axes,
    cols: &[f64],
    rows: &[f64],
    cells: &[Vec<usize>],
    legend: &[Category],
    checksum: &str,
) -> Result<String, PlotError> {
    if cols.is_empty() || rows.is_empty() || cells.len() != rows.len() || cells.iter().any(|r| r.len() != cols.len()) {
        return Err(PlotError::Empty(axes.title.to_string()));
    }
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let (cw, rh) = (pw / cols.len() as f64, ph / rows.len() as f64);
    let mut s = header(axes, checksum);
    for (i, row) in cells.iter().enumerate() {
        // First row at the bottom.
        let y = TOP + ph - (i + 1) as f64 * rh;
        for (j, &c) in row.iter().enumerate() {
            let colour = legend.get(c).map_or("#000000", |k| k.colour);
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{y:.2}" width="{:.2}" height="{rh:.2}" fill="{colour}" stroke="white" stroke-width="0.5"/>"#,
                LEFT + j as f64 * cw,
                cw + 0.01
            );
        }
    }
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let every = |n: usize| n.div_ceil(12).max(1);
    for (j, &v) in cols.iter().enumerate().step_by(every(cols.len())) {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + (j as f64 + 0.5) * cw,
            TOP + ph + 18.0,
            label(v)
        );
    }
    for (i, &v) in rows.iter().enumerate().step_by(every(rows.len())) {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            TOP + ph - (i as f64 + 0.5) * rh + 4.0,
            label(v)
        );
    }
    for (k, cat) in legend.iter().enumerate() {
        let (lx, ly) = (W - RIGHT + 12.0, TOP + 18.0 * k as f64);
        let _ = writeln!(s, r#"<rect x="{lx}" y="{ly}" width="14" height="14" fill="{}"/>"#, cat.colour);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 20.0, ly + 11.0, escape(cat.label));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    const AXES: Axes = Axes { title: "h(t)", x: "t", y: "h" };

    #[test]
    fn empty_series_is_an_error() {
        assert!(line_chart(&AXES, &[], "abc").is_err());
        assert!(line_chart(&AXES, &[Series::new("h", &[], &[])], "abc").is_err());
        assert!(line_chart(&AXES, &[Series::new("h", &[1.0], &[f64::INFINITY])], "abc").is_err());
        assert!(heat_map(&AXES, &[], &[1.0], &[vec![]], &[], "abc").is_err());
    }

    #[test]
    fn checksum_and_series_are_embedded() {
        let svg = line_chart(&AXES, &[Series::new("front", &[0.0, 1.0, 2.0], &[1.0, 1.5, 2.5])], "deadbeef").unwrap();
        assert!(svg.contains("sha256:deadbeef"));
        assert!(svg.contains("<polyline"));
        assert!(svg.contains(">front<"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn constant_series_still_renders() {
        assert!(line_chart(&AXES, &[Series::new("c", &[0.0, 1.0], &[2.0, 2.0])], "x").is_ok());
        assert!(line_chart(&AXES, &[Series::new("c", &[0.0], &[0.0])], "x").is_ok());
    }

    #[test]
    fn heat_map_cells_and_legend() {
        let legend = [Category { label: "A", colour: "#111111" }, Category { label: "B", colour: "#222222" }];
        let svg = heat_map(&AXES, &[1.0, 2.0], &[0.5], &[vec![0, 1]], &legend, "x").unwrap();
        assert_eq!(svg.matches("#111111").count(), 2);
        assert_eq!(svg.matches("#222222").count(), 2);
    }

    #[test]
    fn ticks_are_round() {
        assert_eq!(ticks(0.0, 10.0), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        assert!(ticks(0.13, 0.17).len() >= 3);
    }
}
