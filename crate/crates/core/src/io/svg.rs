//! Self-contained SVG trace plots: one panel per θ component, each panel
//! holding a single polyline of the component against the iteration.

use std::fmt::Write as _;

use crate::anneal::TraceRecord;

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 300.0;
const MARGIN: f64 = 50.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// `labels[i]` names component `i`; missing labels fall back to `theta_i`.
pub fn trace_svg(trace: &[TraceRecord], labels: &[&str]) -> String {
    let d = trace.first().map_or(0, |r| r.theta.len());
    let width = MARGIN + d.max(1) as f64 * (PANEL_W + MARGIN);
    let height = PANEL_H + 2.0 * MARGIN;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">
<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#
    );

    let (it_min, it_max) = match (trace.first(), trace.last()) {
        (Some(a), Some(b)) => (a.iter as f64, (b.iter as f64).max(a.iter as f64 + 1.0)),
        _ => (0.0, 1.0),
    };

    for i in 0..d {
        let x0 = MARGIN + i as f64 * (PANEL_W + MARGIN);
        let y0 = MARGIN;
        let label = labels
            .get(i)
            .map(|s| s.to_string())
            .unwrap_or_else(|| format!("theta_{i}"));
        let (mut lo, mut hi) = trace
            .iter()
            .map(|r| r.theta[i])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
                (l.min(v), h.max(v))
            });
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let sx = |it: f64| x0 + (it - it_min) / (it_max - it_min) * PANEL_W;
        let sy = |v: f64| y0 + PANEL_H - (v - lo) / (hi - lo) * PANEL_H;

        let _ = writeln!(
            out,
            r##"<g>
<rect x="{x0}" y="{y0}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="#444"/>
<text x="{tx}" y="{ty}" text-anchor="middle">{title}</text>
<text x="{x0}" y="{by}">{itmin}</text>
<text x="{rx}" y="{by}" text-anchor="end">{itmax}</text>
<text x="{lx}" y="{hy}" text-anchor="end">{hi:.3}</text>
<text x="{lx}" y="{ly}" text-anchor="end">{lo:.3}</text>"##,
            tx = x0 + PANEL_W / 2.0,
            ty = y0 - 10.0,
            title = escape(&format!("{label} vs iteration")),
            by = y0 + PANEL_H + 18.0,
            itmin = it_min,
            itmax = it_max,
            rx = x0 + PANEL_W,
            lx = x0 - 4.0,
            hy = y0 + 10.0,
            ly = y0 + PANEL_H,
        );
        out.push_str(r##"<polyline fill="none" stroke="#1f5fa8" stroke-width="1" points=""##);
        for (k, r) in trace.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{:.2},{:.2}", sx(r.iter as f64), sy(r.theta[i]));
        }
        out.push_str("\"/>\n</g>\n");
    }
    out.push_str("</svg>\n");
    out
}
