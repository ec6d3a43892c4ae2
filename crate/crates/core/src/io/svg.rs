//! Scatter plot of the sweep: mean adaptation rate against ln N with
//! one-standard-deviation bars, one colour per beneficial fraction q.

use std::fmt::Write;

use crate::experiments::{GridSummary, SweepResult};

pub const SVG_WIDTH: f64 = 720.0;
pub const SVG_HEIGHT: f64 = 480.0;

const LEFT: f64 = 90.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

struct Point {
    ln_n: f64,
    pop_size: u64,
    q: f64,
    mean: f64,
    sd: f64,
}

/// Expands `(lo, hi)` by 5% on each side, or to a unit window around a
/// single value.
fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        let half = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
        return (lo - half, hi + half);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn label(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Grid points with a mean rate, one marker each. The error bar is omitted
/// when fewer than two replicates completed.
pub fn sweep_svg(result: &SweepResult) -> String {
    let points: Vec<Point> = result
        .summaries
        .iter()
        .filter_map(|g: &GridSummary| {
            Some(Point {
                ln_n: (g.params.pop_size as f64).ln(),
                pop_size: g.params.pop_size,
                q: g.params.q,
                mean: g.mean_rate?,
                sd: g.rate_sd.unwrap_or(0.0),
            })
        })
        .collect();
    let mut qs: Vec<f64> = points.iter().map(|p| p.q).collect();
    qs.sort_by(|a, b| b.total_cmp(a));
    qs.dedup();

    let fold =
        |f: fn(f64, f64) -> f64, init: f64, v: &mut dyn Iterator<Item = f64>| v.fold(init, f);
    let (x0, x1) = padded(
        fold(f64::min, f64::INFINITY, &mut points.iter().map(|p| p.ln_n)),
        fold(
            f64::max,
            f64::NEG_INFINITY,
            &mut points.iter().map(|p| p.ln_n),
        ),
    );
    let (y0, y1) = padded(
        fold(
            f64::min,
            f64::INFINITY,
            &mut points.iter().map(|p| p.mean - p.sd),
        ),
        fold(
            f64::max,
            f64::NEG_INFINITY,
            &mut points.iter().map(|p| p.mean + p.sd),
        ),
    );
    let (x0, x1, y0, y1) = if points.is_empty() {
        (0.0, 1.0, -1.0, 1.0)
    } else {
        (x0, x1, y0, y1)
    };
    let plot_w = SVG_WIDTH - LEFT - RIGHT;
    let plot_h = SVG_HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let py = |y: f64| TOP + (y1 - y) / (y1 - y0) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" fill="white"/>"#
    );
    let (bx, by) = (LEFT, TOP + plot_h);
    let _ = writeln!(svg, r#"<g class="axes" stroke="black" fill="none">"#);
    let _ = writeln!(
        svg,
        r#"<line x1="{bx}" y1="{by}" x2="{}" y2="{by}"/>"#,
        LEFT + plot_w
    );
    let _ = writeln!(svg, r#"<line x1="{bx}" y1="{TOP}" x2="{bx}" y2="{by}"/>"#);
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r#"<g class="ticks">"#);
    for i in 0..=4 {
        let x = x0 + (x1 - x0) * i as f64 / 4.0;
        let y = y0 + (y1 - y0) * i as f64 / 4.0;
        let (tx, ty) = (px(x), py(y));
        let _ = writeln!(
            svg,
            r#"<line x1="{tx:.2}" y1="{by}" x2="{tx:.2}" y2="{:.2}" stroke="black"/>"#,
            by + 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{tx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            by + 20.0,
            label(x)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{ty:.2}" x2="{bx}" y2="{ty:.2}" stroke="black"/>"#,
            bx - 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            bx - 8.0,
            ty + 4.0,
            label(y)
        );
    }
    let _ = writeln!(svg, "</g>");
    if y0 < 0.0 && y1 > 0.0 {
        let _ = writeln!(
            svg,
            r##"<line class="zero" x1="{bx}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#999999" stroke-dasharray="4 4"/>"##,
            py(0.0),
            LEFT + plot_w
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">ln N</text>"#,
        LEFT + plot_w / 2.0,
        SVG_HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{0:.2}" text-anchor="middle" transform="rotate(-90 20 {0:.2})">adaptation rate (fitness per generation)</text>"#,
        TOP + plot_h / 2.0
    );

    for (i, q) in qs.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let _ = writeln!(
            svg,
            r#"<g class="series" data-q="{q}" fill="{color}" stroke="{color}">"#
        );
        for p in points.iter().filter(|p| p.q == *q) {
            let (cx, cy) = (px(p.ln_n), py(p.mean));
            if p.sd > 0.0 {
                let _ = writeln!(
                    svg,
                    r#"<line class="error-bar" x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}"/>"#,
                    py(p.mean - p.sd),
                    py(p.mean + p.sd)
                );
            }
            let _ = writeln!(
                svg,
                r#"<circle class="point" cx="{cx:.2}" cy="{cy:.2}" r="4" data-n="{}" data-q="{q}" data-rate="{:e}"/>"#,
                p.pop_size, p.mean
            );
        }
        let _ = writeln!(svg, "</g>");
        let ly = TOP + 10.0 + 22.0 * i as f64;
        let lx = LEFT + plot_w + 20.0;
        let _ = writeln!(
            svg,
            r#"<circle class="legend" cx="{lx}" cy="{ly}" r="4" fill="{color}"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}">q = {q}</text>"#,
            lx + 10.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::Params;

    fn summary(g: usize, n: u64, q: f64, mean: Option<f64>, sd: Option<f64>) -> GridSummary {
        GridSummary {
            grid_index: g,
            params: Params::new(n, 0.01, q, 0.01).unwrap(),
            completed: 2,
            failed: 0,
            mean_rate: mean,
            rate_sd: sd,
            rate_se: sd,
            mean_c2: Some(1.0),
        }
    }

    #[test]
    fn one_marker_per_point() {
        let result = SweepResult {
            rows: vec![],
            summaries: vec![
                summary(0, 300, 0.02, Some(0.01), Some(0.002)),
                summary(1, 1000, 0.02, Some(0.02), Some(0.002)),
                summary(2, 300, 0.002, Some(-0.003), None),
                summary(3, 1000, 0.002, None, None),
            ],
        };
        let svg = sweep_svg(&result);
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let points: Vec<_> = doc
            .descendants()
            .filter(|n| n.attribute("class") == Some("point"))
            .collect();
        assert_eq!(points.len(), 3);
        let series = doc
            .descendants()
            .filter(|n| n.attribute("class") == Some("series"))
            .count();
        assert_eq!(series, 2);
        let bars = doc
            .descendants()
            .filter(|n| n.attribute("class") == Some("error-bar"))
            .count();
        assert_eq!(bars, 2);
        // higher rate plots higher (smaller y)
        let cy = |n: &str, q: &str| {
            points
                .iter()
                .find(|p| p.attribute("data-n") == Some(n) && p.attribute("data-q") == Some(q))
                .unwrap()
                .attribute("cy")
                .unwrap()
                .parse::<f64>()
                .unwrap()
        };
        assert!(cy("1000", "0.02") < cy("300", "0.02"));
        assert!(cy("300", "0.002") > cy("300", "0.02"));
    }

    #[test]
    fn single_point_and_empty() {
        let one = SweepResult {
            rows: vec![],
            summaries: vec![summary(0, 100, 0.5, Some(0.0), None)],
        };
        assert!(roxmltree::Document::parse(&sweep_svg(&one)).is_ok());
        let none = SweepResult {
            rows: vec![],
            summaries: vec![],
        };
        let svg = sweep_svg(&none);
        assert!(roxmltree::Document::parse(&svg).is_ok());
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
