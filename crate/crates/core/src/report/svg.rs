//! Minimal self-contained SVG line plots.

use std::fmt::Write;

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct Panel {
    pub title: String,
    pub xlabel: String,
    pub ylabel: String,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const COLORS: [&str; 4] = ["#1f5fa8", "#c0392b", "#2e8b57", "#7d3c98"];

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
}

fn num(v: f64) -> String {
    format!("{v:.2}")
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}").trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-12 * lo.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1.0);
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn draw_panel(out: &mut String, panel: &Panel, fr: &Frame, font: f64) {
    let pts = || panel.series.iter().flat_map(|s| s.points.iter());
    let (xmin, xmax) = range(pts().map(|p| p.0));
    let (ymin, ymax) = range(pts().filter(|p| p.0.is_finite()).map(|p| p.1));
    let sx = |x: f64| fr.x0 + (x - xmin) / (xmax - xmin) * fr.w;
    let sy = |y: f64| fr.y0 + fr.h - (y - ymin) / (ymax - ymin) * fr.h;

    let _ = writeln!(
        out,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="white" stroke="black" stroke-width="1"/>"##,
        num(fr.x0),
        num(fr.y0),
        num(fr.w),
        num(fr.h)
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let (xv, yv) = (xmin + t * (xmax - xmin), ymin + t * (ymax - ymin));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            out,
            r##"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black"/><text x="{0}" y="{3}" font-size="{4}" text-anchor="middle">{5}</text>"##,
            num(px),
            num(fr.y0 + fr.h),
            num(fr.y0 + fr.h + 4.0),
            num(fr.y0 + fr.h + 4.0 + font),
            num(font),
            tick_label(xv)
        );
        let _ = writeln!(
            out,
            r##"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="black"/><text x="{3}" y="{4}" font-size="{5}" text-anchor="end">{6}</text>"##,
            num(fr.x0),
            num(py),
            num(fr.x0 - 4.0),
            num(fr.x0 - 6.0),
            num(py + font / 3.0),
            num(font),
            tick_label(yv)
        );
    }
    let _ = writeln!(
        out,
        r##"<text x="{}" y="{}" font-size="{}" text-anchor="middle">{}</text>"##,
        num(fr.x0 + fr.w / 2.0),
        num(fr.y0 - 6.0),
        num(font * 1.2),
        escape(&panel.title)
    );
    let _ = writeln!(
        out,
        r##"<text x="{}" y="{}" font-size="{}" text-anchor="middle">{}</text>"##,
        num(fr.x0 + fr.w / 2.0),
        num(fr.y0 + fr.h + 2.4 * font + 4.0),
        num(font),
        escape(&panel.xlabel)
    );
    let _ = writeln!(
        out,
        r##"<text x="{0}" y="{1}" font-size="{2}" text-anchor="middle" transform="rotate(-90 {0} {1})">{3}</text>"##,
        num(fr.x0 - 4.5 * font),
        num(fr.y0 + fr.h / 2.0),
        num(font),
        escape(&panel.ylabel)
    );

    for (k, s) in panel.series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        // non-finite values split the curve
        let mut runs: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for &(x, y) in &s.points {
            if x.is_finite() && y.is_finite() {
                runs.last_mut().expect("non-empty").push((sx(x), sy(y)));
            } else if !runs.last().expect("non-empty").is_empty() {
                runs.push(Vec::new());
            }
        }
        for run in runs.iter().filter(|r| !r.is_empty()) {
            let coords: Vec<String> = run.iter().map(|(x, y)| format!("{},{}", num(*x), num(*y))).collect();
            let _ = writeln!(
                out,
                r##"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"##,
                coords.join(" ")
            );
        }
        if panel.series.len() > 1 {
            let ly = fr.y0 + 12.0 + k as f64 * font * 1.3;
            let _ = writeln!(
                out,
                r##"<text x="{}" y="{}" font-size="{}" fill="{color}" text-anchor="end">{}</text>"##,
                num(fr.x0 + fr.w - 6.0),
                num(ly),
                num(font),
                escape(&s.label)
            );
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Main panel over the full canvas with an optional inset in the upper right.
pub fn render_svg(main: &Panel, inset: Option<&Panel>) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif">"##,
        w = WIDTH,
        h = HEIGHT
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="white"/>"##);
    draw_panel(&mut out, main, &Frame { x0: 80.0, y0: 40.0, w: WIDTH - 110.0, h: HEIGHT - 110.0 }, 12.0);
    if let Some(inset) = inset {
        draw_panel(&mut out, inset, &Frame { x0: WIDTH - 290.0, y0: 75.0, w: 230.0, h: 130.0 }, 9.0);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn panel(ys: &[f64]) -> Panel {
        Panel {
            title: "S <a>".into(),
            xlabel: "a".into(),
            ylabel: "S".into(),
            series: vec![Series { label: "S".into(), points: ys.iter().enumerate().map(|(i, &y)| (i as f64, y)).collect() }],
        }
    }

    #[test]
    fn renders_main_and_inset() {
        let svg = render_svg(&panel(&[0.0, 1.0, 0.5]), Some(&panel(&[2.0, 2.0])));
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("S &lt;a&gt;"));
        assert!(!svg.contains("href"));
    }

    #[test]
    fn breaks_curve_at_non_finite_values() {
        let svg = render_svg(&panel(&[0.0, 1.0, f64::INFINITY, 2.0, 3.0]), None);
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn deterministic() {
        let p = panel(&[0.1, 0.7, 0.3]);
        assert_eq!(render_svg(&p, None), render_svg(&p, None));
    }
}
