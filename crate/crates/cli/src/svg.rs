//! Plain SVG line charts of a series, its decomposition and predictions.

use std::fmt::Write;

use gan_event_core::eval::{top_k_anomalies, Decomposition, ModelRun};
use gan_event_core::SalesSeries;

const WIDTH: f64 = 960.0;
const PANEL: f64 = 240.0;
const MARGIN: f64 = 48.0;
const COLORS: [&str; 5] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e"];

struct Line<'a> {
    label: &'a str,
    color: &'a str,
    values: &'a [f64],
}

struct Panel<'a> {
    title: String,
    lines: Vec<Line<'a>>,
    /// Indices into the panel's x range marked with a dot on the first line.
    markers: Vec<usize>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn draw(doc: &mut String, panel: &Panel, top: f64) {
    let n = panel.lines.iter().map(|l| l.values.len()).max().unwrap_or(0).max(2);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in panel.lines.iter().flat_map(|l| l.values) {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    let (w, h) = (WIDTH - 2.0 * MARGIN, PANEL - 2.0 * MARGIN);
    let x = |i: usize| MARGIN + w * i as f64 / (n - 1) as f64;
    let y = |v: f64| top + MARGIN + h * (1.0 - (v - lo) / (hi - lo));
    let _ = writeln!(
        doc,
        r##"<text x="{MARGIN}" y="{:.1}" font-size="14">{}</text>"##,
        top + MARGIN - 14.0,
        escape(&panel.title)
    );
    let _ = writeln!(
        doc,
        r##"<rect x="{MARGIN}" y="{:.1}" width="{w}" height="{h}" fill="none" stroke="#ccc"/>"##,
        top + MARGIN
    );
    for (v, anchor) in [(hi, top + MARGIN + 4.0), (lo, top + MARGIN + h)] {
        let _ = writeln!(doc, r##"<text x="4" y="{anchor:.1}" font-size="10">{v:.1}</text>"##);
    }
    for (i, line) in panel.lines.iter().enumerate() {
        let pts: Vec<String> = line
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| format!("{:.1},{:.1}", x(j), y(*v)))
            .collect();
        let _ = writeln!(
            doc,
            r##"<polyline fill="none" stroke="{}" stroke-width="1" points="{}"/>"##,
            line.color,
            pts.join(" ")
        );
        let _ = writeln!(
            doc,
            r##"<text x="{:.1}" y="{:.1}" font-size="11" fill="{}">{}</text>"##,
            WIDTH - MARGIN - 180.0,
            top + MARGIN - 14.0 + 12.0 * i as f64,
            line.color,
            escape(line.label)
        );
    }
    if let Some(first) = panel.lines.first() {
        for &m in &panel.markers {
            if let Some(v) = first.values.get(m) {
                let _ = writeln!(
                    doc,
                    r##"<circle cx="{:.1}" cy="{:.1}" r="3" fill="#000"/>"##,
                    x(m),
                    y(*v)
                );
            }
        }
    }
}

/// Test-year actuals against each run with the top-`k` anomalies marked,
/// then the decomposition of the whole series.
pub fn report(series: &SalesSeries, dec: &Decomposition, runs: &[ModelRun], k: usize) -> String {
    let values = series.values();
    let (from, to) = match runs
        .first()
        .and_then(|r| series.index_of(r.start).map(|a| (a, r.predictions.len())))
    {
        Some((a, len)) => (a, (a + len).min(values.len())),
        None => (0, values.len()),
    };
    let markers = top_k_anomalies(&dec.residual, from..to, k.min(to - from), false)
        .map(|idx| idx.into_iter().map(|i| i - from).collect())
        .unwrap_or_default();
    let mut first = Panel {
        title: format!(
            "{} {}..{} with top-{k} anomalies",
            series.category,
            series.date(from),
            series.date(to - 1)
        ),
        lines: vec![Line {
            label: "actual",
            color: "#000",
            values: &values[from..to],
        }],
        markers,
    };
    for (i, r) in runs.iter().enumerate() {
        first.lines.push(Line {
            label: &r.model,
            color: COLORS[i % COLORS.len()],
            values: &r.predictions,
        });
    }
    let fitted: Vec<f64> = dec.trend.iter().zip(&dec.seasonal).map(|(t, s)| t + s).collect();
    let panels = [
        first,
        Panel {
            title: "trend and trend + seasonal".into(),
            lines: vec![
                Line {
                    label: "trend + seasonal",
                    color: COLORS[1],
                    values: &fitted,
                },
                Line {
                    label: "trend",
                    color: COLORS[0],
                    values: &dec.trend,
                },
            ],
            markers: Vec::new(),
        },
        Panel {
            title: "residual".into(),
            lines: vec![Line {
                label: "residual",
                color: COLORS[3],
                values: &dec.residual,
            }],
            markers: Vec::new(),
        },
    ];
    let height = PANEL * panels.len() as f64;
    let mut doc = format!(
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" font-family="sans-serif">
<rect width="100%" height="100%" fill="#fff"/>
"##
    );
    for (i, p) in panels.iter().enumerate() {
        draw(&mut doc, p, PANEL * i as f64);
    }
    doc.push_str("</svg>\n");
    doc
}
