//! Chart rendering: standalone SVG line charts and gnuplot-compatible data
//! files, produced purely from parsed result CSV.
//!
//! Sweep files render as average-AoE-versus-parameter lines (one series per
//! policy); trace files render iteration traces with a log-scale y axis
//! (one series per convergence cell). Output is deterministic: fixed
//! palette, fixed geometry, fixed number formatting.

use std::fmt::Write as _;

use crate::rows::{ParsedCsv, ResultRow, TraceRow};

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 70.0;
const TOP: f64 = 46.0;
const RIGHT_MARGIN: f64 = 180.0;
const BOTTOM_MARGIN: f64 = 62.0;

const PALETTE: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b",
];

/// Caps the points drawn per series; longer series are strided down.
const MAX_POINTS_PER_SERIES: usize = 2000;

/// An SVG chart and its gnuplot-compatible sibling.
pub struct RenderedPlot {
    pub svg: String,
    pub dat: String,
}

/// Renders either kind of parsed result file.
pub fn render(parsed: &ParsedCsv) -> RenderedPlot {
    match parsed {
        ParsedCsv::Sweep(rows) => RenderedPlot {
            svg: sweep_svg(rows),
            dat: sweep_dat(rows),
        },
        ParsedCsv::Trace(rows) => RenderedPlot {
            svg: trace_svg(rows),
            dat: trace_dat(rows),
        },
    }
}

/// Groups rows into (key, items) series preserving first-appearance order.
fn group_by<T, K: PartialEq + Clone>(rows: &[T], key: impl Fn(&T) -> K) -> Vec<(K, Vec<&T>)> {
    let mut series: Vec<(K, Vec<&T>)> = Vec::new();
    for row in rows {
        let k = key(row);
        match series.iter_mut().find(|(existing, _)| *existing == k) {
            Some((_, items)) => items.push(row),
            None => series.push((k, vec![row])),
        }
    }
    series
}

fn px(v: f64) -> String {
    format!("{v:.2}")
}

/// Tick positions covering [lo, hi] with a 1/2/5-stepped interval.
fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    } * mag;
    let start = (lo / step).floor() * step;
    let mut ticks = Vec::new();
    let mut t = start;
    while t <= hi + step * 0.5 {
        if t >= lo - step * 0.5 {
            // Snap near-zero accumulations to zero for clean labels.
            ticks.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        }
        t += step;
    }
    ticks
}

fn fmt_tick(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e6 {
        format!("{v:.0}")
    } else {
        format!("{v}")
    }
}

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        if self.xmax == self.xmin {
            self.x0 + self.w / 2.0
        } else {
            self.x0 + (v - self.xmin) / (self.xmax - self.xmin) * self.w
        }
    }
    fn y(&self, v: f64) -> f64 {
        if self.ymax == self.ymin {
            self.y0 + self.h / 2.0
        } else {
            self.y0 + self.h - (v - self.ymin) / (self.ymax - self.ymin) * self.h
        }
    }
}

fn svg_open(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">
<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{tx}" y="24" font-family="Helvetica, Arial, sans-serif" font-size="16" font-weight="bold" text-anchor="middle">{title}</text>
"#,
        tx = LEFT + (WIDTH - LEFT - RIGHT_MARGIN) / 2.0,
    );
}

fn axis_box(out: &mut String, f: &Frame) {
    let _ = writeln!(
        out,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#333" stroke-width="1"/>"##,
        px(f.x0),
        px(f.y0),
        px(f.w),
        px(f.h)
    );
}

fn text(out: &mut String, x: f64, y: f64, anchor: &str, extra: &str, s: &str) {
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="Helvetica, Arial, sans-serif" font-size="13" text-anchor="{anchor}"{extra}>{s}</text>"#,
        px(x),
        px(y)
    );
}

fn legend(out: &mut String, f: &Frame, names: &[String]) {
    let lx = f.x0 + f.w + 18.0;
    for (i, name) in names.iter().enumerate() {
        let ly = f.y0 + 14.0 + i as f64 * 22.0;
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="2.5"/>"#,
            px(lx),
            px(ly),
            px(lx + 26.0),
            px(ly)
        );
        text(out, lx + 32.0, ly + 4.0, "start", "", name);
    }
}

fn polyline(out: &mut String, color: &str, points: &[(f64, f64)]) {
    let mut attr = String::new();
    for (i, (x, y)) in points.iter().enumerate() {
        if i > 0 {
            attr.push(' ');
        }
        let _ = write!(attr, "{},{}", px(*x), px(*y));
    }
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="{color}" stroke-width="2.5" points="{attr}"/>"#
    );
}

fn downsample<T: Copy>(points: &[T]) -> Vec<T> {
    if points.len() <= MAX_POINTS_PER_SERIES {
        return points.to_vec();
    }
    let stride = points.len().div_ceil(MAX_POINTS_PER_SERIES);
    let mut kept: Vec<T> = points.iter().copied().step_by(stride).collect();
    if !(points.len() - 1).is_multiple_of(stride) {
        kept.push(*points.last().expect("nonempty"));
    }
    kept
}

fn sweep_svg(rows: &[ResultRow]) -> String {
    let series = group_by(rows, |r| r.policy.clone());
    let xs: Vec<f64> = rows.iter().map(|r| r.sweep_value).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.avg_aoe_exact).collect();
    let (xmin, xmax) = bounds(&xs);
    let (dmin, dmax) = bounds(&ys);
    let pad = ((dmax - dmin) * 0.06).max(0.2);
    let yticks = linear_ticks((dmin - pad).max(0.0), dmax + pad);
    let ymin = yticks.first().copied().unwrap_or(0.0);
    let ymax = yticks.last().copied().unwrap_or(1.0);

    let f = Frame {
        x0: LEFT,
        y0: TOP,
        w: WIDTH - LEFT - RIGHT_MARGIN,
        h: HEIGHT - TOP - BOTTOM_MARGIN,
        xmin,
        xmax,
        ymin,
        ymax,
    };

    let mut out = String::new();
    let title = &rows[0].scenario_id;
    svg_open(&mut out, title);

    // Gridlines and y tick labels.
    for &ty in &yticks {
        let y = f.y(ty);
        let _ = writeln!(
            out,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#ddd" stroke-width="1"/>"##,
            px(f.x0),
            px(y),
            px(f.x0 + f.w),
            px(y)
        );
        text(&mut out, f.x0 - 8.0, y + 4.0, "end", "", &fmt_tick(ty));
    }
    // X ticks at the data values (sweeps are short grids).
    let mut xticks: Vec<f64> = xs.clone();
    xticks.sort_by(f64::total_cmp);
    xticks.dedup();
    for &tx in &xticks {
        let x = f.x(tx);
        let _ = writeln!(
            out,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#333" stroke-width="1"/>"##,
            px(x),
            px(f.y0 + f.h),
            px(x),
            px(f.y0 + f.h + 5.0)
        );
        text(
            &mut out,
            x,
            f.y0 + f.h + 20.0,
            "middle",
            "",
            &format!("{tx}"),
        );
    }
    axis_box(&mut out, &f);

    for (i, (_, items)) in series.iter().enumerate() {
        let mut pts: Vec<(f64, f64)> = items
            .iter()
            .map(|r| (r.sweep_value, r.avg_aoe_exact))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (f.x(x), f.y(y))).collect();
        polyline(&mut out, color, &coords);
        for &(cx, cy) in &coords {
            let _ = writeln!(
                out,
                r#"<circle cx="{}" cy="{}" r="3" fill="{color}"/>"#,
                px(cx),
                px(cy)
            );
        }
    }

    let names: Vec<String> = series.iter().map(|(k, _)| k.clone()).collect();
    legend(&mut out, &f, &names);
    text(
        &mut out,
        f.x0 + f.w / 2.0,
        HEIGHT - 18.0,
        "middle",
        "",
        &rows[0].sweep_param,
    );
    text(
        &mut out,
        18.0,
        f.y0 + f.h / 2.0,
        "middle",
        &format!(
            r#" transform="rotate(-90 18 {})""#,
            px(f.y0 + f.h / 2.0)
        ),
        "average age of entanglement",
    );
    out.push_str("</svg>\n");
    out
}

fn trace_svg(rows: &[TraceRow]) -> String {
    let series = group_by(rows, |r| r.scenario_id.clone());
    // Log-scale y over the positive changes; exact zeros clamp to the floor.
    const LOG_FLOOR: f64 = 1e-16;
    let mut lmin = f64::INFINITY;
    let mut lmax = f64::NEG_INFINITY;
    let mut xmax: f64 = 1.0;
    for r in rows {
        let v = r.max_abs_change.max(LOG_FLOOR).log10();
        lmin = lmin.min(v);
        lmax = lmax.max(v);
        xmax = xmax.max(r.iteration as f64);
    }
    let lmin = lmin.floor();
    let lmax = lmax.ceil().max(lmin + 1.0);

    let f = Frame {
        x0: LEFT,
        y0: TOP,
        w: WIDTH - LEFT - RIGHT_MARGIN,
        h: HEIGHT - TOP - BOTTOM_MARGIN,
        xmin: 1.0,
        xmax,
        ymin: lmin,
        ymax: lmax,
    };

    let mut out = String::new();
    svg_open(&mut out, "solver convergence");

    // Decade gridlines, thinned to at most ~12 labels.
    let decades = (lmax - lmin) as i64;
    let stride = (decades / 12 + 1).max(1);
    let mut d = lmin as i64;
    while d <= lmax as i64 {
        let y = f.y(d as f64);
        let _ = writeln!(
            out,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#ddd" stroke-width="1"/>"##,
            px(f.x0),
            px(y),
            px(f.x0 + f.w),
            px(y)
        );
        text(&mut out, f.x0 - 8.0, y + 4.0, "end", "", &format!("1e{d}"));
        d += stride;
    }
    for tx in linear_ticks(1.0, xmax) {
        if tx < 1.0 || tx > xmax {
            continue;
        }
        let x = f.x(tx);
        let _ = writeln!(
            out,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#333" stroke-width="1"/>"##,
            px(x),
            px(f.y0 + f.h),
            px(x),
            px(f.y0 + f.h + 5.0)
        );
        text(&mut out, x, f.y0 + f.h + 20.0, "middle", "", &fmt_tick(tx));
    }
    axis_box(&mut out, &f);

    for (i, (_, items)) in series.iter().enumerate() {
        let pts: Vec<(f64, f64)> = items
            .iter()
            .map(|r| {
                (
                    r.iteration as f64,
                    r.max_abs_change.max(LOG_FLOOR).log10(),
                )
            })
            .collect();
        let pts = downsample(&pts);
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (f.x(x), f.y(y))).collect();
        polyline(&mut out, color, &coords);
    }

    let names: Vec<String> = series.iter().map(|(k, _)| k.clone()).collect();
    legend(&mut out, &f, &names);
    text(&mut out, f.x0 + f.w / 2.0, HEIGHT - 18.0, "middle", "", "iteration");
    text(
        &mut out,
        18.0,
        f.y0 + f.h / 2.0,
        "middle",
        &format!(
            r#" transform="rotate(-90 18 {})""#,
            px(f.y0 + f.h / 2.0)
        ),
        "largest value update",
    );
    out.push_str("</svg>\n");
    out
}

fn bounds(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

fn sweep_dat(rows: &[ResultRow]) -> String {
    let series = group_by(rows, |r| r.policy.clone());
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# aoe-chain v1 sweep data: {}\n# one block per policy; columns: {} avg_aoe_exact avg_aoe_mc mc_stderr",
        rows[0].scenario_id, rows[0].sweep_param
    );
    for (i, (name, items)) in series.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        let _ = writeln!(out, "# series: {name}");
        let mut pts: Vec<&&ResultRow> = items.iter().collect();
        pts.sort_by(|a, b| a.sweep_value.total_cmp(&b.sweep_value));
        for r in pts {
            let _ = writeln!(
                out,
                "{} {:.6} {:.6} {:.6}",
                r.sweep_value, r.avg_aoe_exact, r.avg_aoe_mc, r.mc_stderr
            );
        }
    }
    out
}

fn trace_dat(rows: &[TraceRow]) -> String {
    let series = group_by(rows, |r| r.scenario_id.clone());
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# aoe-chain v1 trace data\n# one block per cell; columns: iteration max_abs_change span gain_estimate"
    );
    for (i, (name, items)) in series.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        let _ = writeln!(out, "# series: {name}");
        for r in items {
            let _ = writeln!(
                out,
                "{} {:e} {:e} {:.6}",
                r.iteration, r.max_abs_change, r.span, r.gain_estimate
            );
        }
    }
    out
}
