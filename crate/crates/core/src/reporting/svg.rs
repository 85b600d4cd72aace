//! Self-contained SVG figures.

use std::fmt::Write;

use crate::gauge::ConditionVerdict;
use crate::hierarchy::DiscHierarchy;
use crate::projection::SweepTable;

/// Most circles drawn for one hierarchy.
pub const MAX_CIRCLES: u128 = 100_000;

const W: f64 = 640.0;
const H: f64 = 480.0;
const PAD: f64 = 48.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn header(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
}

/// Nested circles for every level (the lexicographically first paths of
/// each level once `max_circles` would be exceeded) and the direction rays
/// `d_k`.
pub fn render_hierarchy(h: &DiscHierarchy, max_circles: u128) -> String {
    let size = 640.0;
    let scale = size / 2.2;
    let c = size / 2.0;
    let mut out = String::new();
    header(&mut out, size, size);
    let mut budget = max_circles;
    let mut notice = Vec::new();
    for k in 0..=h.depth() {
        let total = h.disc_count(k);
        let take = total.min(budget);
        if take < total {
            notice.push(format!("level {k}: {take} of {total} discs drawn"));
        }
        budget -= take;
        let rho = h.level(k).rho;
        let color = COLORS[k % COLORS.len()];
        let _ = writeln!(out, r#"<g fill="none" stroke="{color}" stroke-width="0.5">"#);
        for idx in 0..take {
            let p = h.center_of(&h.path_of(k, idx));
            let _ = writeln!(
                out,
                r#"<circle cx="{:.6}" cy="{:.6}" r="{:.9}"/>"#,
                c + p[0] * scale,
                c - p[1] * scale,
                rho * scale
            );
        }
        out.push_str("</g>\n");
    }
    if !notice.is_empty() {
        let _ = writeln!(out, "<!-- subsampled to {max_circles} circles: {} -->", notice.join("; "));
    }
    for k in 1..=h.depth() {
        let d = h.level(k).direction;
        let _ = writeln!(
            out,
            r##"<line x1="{c}" y1="{c}" x2="{:.6}" y2="{:.6}" stroke="#555" stroke-width="0.5"/>"##,
            c + d.cos() * scale,
            c - d.sin() * scale
        );
    }
    out.push_str("</svg>\n");
    out
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>) -> Frame {
        let mut f = Frame { x0: f64::INFINITY, x1: f64::NEG_INFINITY, y0: f64::INFINITY, y1: f64::NEG_INFINITY };
        for (x, y) in points.filter(|p| p.0.is_finite() && p.1.is_finite()) {
            f.x0 = f.x0.min(x);
            f.x1 = f.x1.max(x);
            f.y0 = f.y0.min(y);
            f.y1 = f.y1.max(y);
        }
        if !f.x0.is_finite() {
            return Frame { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 };
        }
        if f.x1 <= f.x0 {
            f.x1 = f.x0 + 1.0;
        }
        if f.y1 <= f.y0 {
            f.y0 -= 0.5;
            f.y1 += 0.5;
        }
        f
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        (
            PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD),
            H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD),
        )
    }
}

fn axes(out: &mut String, xlabel: &str, ylabel: &str) {
    let _ = writeln!(out, r#"<line x1="{PAD}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, H - PAD, W - PAD, H - PAD);
    let _ = writeln!(out, r#"<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{}" stroke="black"/>"#, H - PAD);
    let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="12">{xlabel}</text>"#, W / 2.0, H - 12.0);
    let _ = writeln!(out, r#"<text x="8" y="{}" font-size="12">{ylabel}</text>"#, PAD - 12.0);
}

fn polyline(out: &mut String, frame: &Frame, pts: &[(f64, f64)], color: &str, dash: bool) {
    let coords: Vec<String> = pts
        .iter()
        .filter(|p| p.0.is_finite() && p.1.is_finite())
        .map(|&(x, y)| {
            let (a, b) = frame.px(x, y);
            format!("{a:.3},{b:.3}")
        })
        .collect();
    if coords.is_empty() {
        return;
    }
    let extra = if dash { r#" stroke-dasharray="4 3""# } else { "" };
    let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}"{extra} points="{}"/>"#, coords.join(" "));
}

/// Log cost against angle per level, with each level's bound dashed.
pub fn render_sweep(t: &SweepTable) -> String {
    let mut out = String::new();
    header(&mut out, W, H);
    axes(&mut out, "theta", "log cost");
    let mut ks: Vec<usize> = t.rows.iter().map(|r| r.k).collect();
    ks.sort_unstable();
    ks.dedup();
    let frame = Frame::fit(t.rows.iter().flat_map(|r| [(r.theta, r.cost.ln()), (r.theta, r.bound.ln())]));
    for (i, k) in ks.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let rows: Vec<_> = t.rows.iter().filter(|r| r.k == *k).collect();
        let cost: Vec<(f64, f64)> = rows.iter().map(|r| (r.theta, r.cost.ln())).collect();
        let bound: Vec<(f64, f64)> = rows.iter().map(|r| (r.theta, r.bound.ln())).collect();
        polyline(&mut out, &frame, &cost, color, false);
        polyline(&mut out, &frame, &bound, color, true);
    }
    out.push_str("</svg>\n");
    out
}

/// Shell sums on log-log axes, one polyline per verdict.
pub fn render_shells(verdicts: &[(String, ConditionVerdict)]) -> String {
    let mut out = String::new();
    header(&mut out, W, H);
    axes(&mut out, "log(n+1)", "log shell");
    let series: Vec<Vec<(f64, f64)>> = verdicts
        .iter()
        .map(|(_, v)| v.log_shell_sums.iter().enumerate().map(|(n, y)| (((n + 1) as f64).ln(), *y)).collect())
        .collect();
    let frame = Frame::fit(series.iter().flatten().copied());
    for (i, ((name, _), pts)) in verdicts.iter().zip(&series).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let _ = writeln!(out, "<!-- {} -->", name.replace("--", "-"));
        polyline(&mut out, &frame, pts, color, false);
    }
    out.push_str("</svg>\n");
    out
}
