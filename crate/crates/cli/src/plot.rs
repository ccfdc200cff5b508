//! Minimal SVG line plots: axes, ticks, polylines, legend. CSV remains the
//! authoritative output; these are quick-look figures only.

use std::fmt::Write as _;

pub struct Series<'a> {
    pub name: &'a str,
    pub points: &'a [(f64, f64)],
}

pub struct PlotSpec<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub log_x: bool,
    pub log_y: bool,
}

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 540.0;
const MARGIN_L: f64 = 90.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 50.0;
const MARGIN_B: f64 = 70.0;
const PALETTE: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

fn transform(v: f64, log: bool) -> Option<f64> {
    if log {
        (v > 0.0).then(|| v.ln())
    } else {
        Some(v)
    }
}

pub fn line_plot(spec: &PlotSpec, series: &[Series]) -> String {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in series {
        for &(x, y) in s.points {
            if let (Some(tx), Some(ty)) = (transform(x, spec.log_x), transform(y, spec.log_y)) {
                xs.push(tx);
                ys.push(ty);
            }
        }
    }
    let (x_min, x_max) = bounds(&xs);
    let (y_min, y_max) = bounds(&ys);
    let px = |tx: f64| MARGIN_L + (tx - x_min) / (x_max - x_min) * (WIDTH - MARGIN_L - MARGIN_R);
    let py = |ty: f64| {
        HEIGHT - MARGIN_B - (ty - y_min) / (y_max - y_min) * (HEIGHT - MARGIN_T - MARGIN_B)
    };

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="Helvetica, Arial, sans-serif">"#
    )
    .unwrap();
    writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="{:.1}" y="28" font-size="18" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(spec.title)
    )
    .unwrap();

    // Frame.
    writeln!(
        svg,
        r##"<rect x="{MARGIN_L:.1}" y="{MARGIN_T:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#333" stroke-width="1"/>"##,
        WIDTH - MARGIN_L - MARGIN_R,
        HEIGHT - MARGIN_T - MARGIN_B
    )
    .unwrap();

    // Ticks: 6 per axis in transformed space.
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let tx = x_min + f * (x_max - x_min);
        let ty = y_min + f * (y_max - y_min);
        let x = px(tx);
        let y = py(ty);
        let xv = if spec.log_x { tx.exp() } else { tx };
        let yv = if spec.log_y { ty.exp() } else { ty };
        writeln!(
            svg,
            r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#333"/>"##,
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 6.0
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{x:.1}" y="{:.1}" font-size="12" text-anchor="middle">{}</text>"#,
            HEIGHT - MARGIN_B + 22.0,
            tick_label(xv)
        )
        .unwrap();
        writeln!(
            svg,
            r##"<line x1="{:.1}" y1="{y:.1}" x2="{MARGIN_L:.1}" y2="{y:.1}" stroke="#333"/>"##,
            MARGIN_L - 6.0
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="end">{}</text>"#,
            MARGIN_L - 10.0,
            y + 4.0,
            tick_label(yv)
        )
        .unwrap();
    }
    writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="14" text-anchor="middle">{}</text>"#,
        MARGIN_L + (WIDTH - MARGIN_L - MARGIN_R) / 2.0,
        HEIGHT - 18.0,
        escape(spec.x_label)
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="22" y="{:.1}" font-size="14" text-anchor="middle" transform="rotate(-90 22 {:.1})">{}</text>"#,
        MARGIN_T + (HEIGHT - MARGIN_T - MARGIN_B) / 2.0,
        MARGIN_T + (HEIGHT - MARGIN_T - MARGIN_B) / 2.0,
        escape(spec.y_label)
    )
    .unwrap();

    // Series.
    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let mut path = String::new();
        for &(x, y) in s.points {
            if let (Some(tx), Some(ty)) = (transform(x, spec.log_x), transform(y, spec.log_y)) {
                if path.is_empty() {
                    write!(path, "M{:.2},{:.2}", px(tx), py(ty)).unwrap();
                } else {
                    write!(path, " L{:.2},{:.2}", px(tx), py(ty)).unwrap();
                }
            }
        }
        writeln!(
            svg,
            r#"<path d="{path}" fill="none" stroke="{color}" stroke-width="1.8"/>"#
        )
        .unwrap();
        let ly = MARGIN_T + 18.0 + idx as f64 * 18.0;
        writeln!(
            svg,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#,
            WIDTH - MARGIN_R - 170.0,
            WIDTH - MARGIN_R - 140.0
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="12">{}</text>"#,
            WIDTH - MARGIN_R - 132.0,
            ly + 4.0,
            escape(s.name)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.04 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 0.01 && v.abs() < 1e4 {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
