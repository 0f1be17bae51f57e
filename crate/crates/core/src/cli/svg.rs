//! Static SVG line plots with fixed styling, so identical data gives
//! identical bytes.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 48.0;
const PALETTE: [&str; 8] = ["#1f4e79", "#c0392b", "#27ae60", "#8e44ad", "#d35400", "#16a085", "#7f8c8d", "#2c3e50"];

/// One polyline.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Same scale on both axes (curve traces).
    pub equal_aspect: bool,
    pub series: Vec<Series>,
}

fn bounds(series: &[Series]) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in series.iter().flat_map(|s| s.points.iter()).filter(|(x, y)| x.is_finite() && y.is_finite()) {
        b = (b.0.min(*x), b.1.max(*x), b.2.min(*y), b.3.max(*y));
    }
    if !b.0.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    let pad = |lo: f64, hi: f64| if hi - lo < 1e-12 { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
    let (x0, x1) = pad(b.0, b.1);
    let (y0, y1) = pad(b.2, b.3);
    (x0, x1, y0, y1)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    pub fn render(&self) -> String {
        let (mut x0, mut x1, mut y0, mut y1) = bounds(&self.series);
        let (pw, ph) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
        if self.equal_aspect {
            let scale = ((x1 - x0) / pw).max((y1 - y0) / ph);
            let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
            x0 = cx - 0.5 * scale * pw;
            x1 = cx + 0.5 * scale * pw;
            y0 = cy - 0.5 * scale * ph;
            y1 = cy + 0.5 * scale * ph;
        }
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * ph;

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ =
            writeln!(out, r##"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="#444" stroke-width="1"/>"##);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#,
            WIDTH / 2.0,
            MARGIN / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 8.0, escape(&self.x_label));
        let _ = writeln!(
            out,
            r#"<text x="12" y="{}" text-anchor="middle" transform="rotate(-90 12 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        for (v, anchor, x, y) in [(x0, "start", MARGIN, HEIGHT - MARGIN + 14.0), (x1, "end", WIDTH - MARGIN, HEIGHT - MARGIN + 14.0)] {
            let _ = writeln!(out, r#"<text x="{x}" y="{y}" text-anchor="{anchor}">{v:.4}</text>"#);
        }
        for (v, y) in [(y0, HEIGHT - MARGIN), (y1, MARGIN + 10.0)] {
            let _ = writeln!(out, r#"<text x="{}" y="{y}" text-anchor="end">{v:.4}</text>"#, MARGIN - 4.0);
        }
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let mut pts = String::new();
            for (x, y) in s.points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
                let _ = write!(pts, "{:.3},{:.3} ", sx(*x), sy(*y));
            }
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"><title>{}</title></polyline>"#,
                pts.trim_end(),
                escape(&s.label)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Planar view of a curve in `R^n`: the first two coordinates for `n = 2`,
/// an axonometric projection for `n = 3`, `None` otherwise.
pub fn project(points: &[Vec<f64>]) -> Option<Vec<(f64, f64)>> {
    let n = points.first()?.len();
    match n {
        2 => Some(points.iter().map(|p| (p[0], p[1])).collect()),
        3 => {
            let (c, s) = (std::f64::consts::FRAC_PI_6.cos(), std::f64::consts::FRAC_PI_6.sin());
            Some(points.iter().map(|p| ((p[0] - p[1]) * c, p[2] + (p[0] + p[1]) * s)).collect())
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendering_is_deterministic() {
        let plot = Plot {
            title: "k".into(),
            x_label: "x".into(),
            y_label: "k".into(),
            equal_aspect: false,
            series: vec![Series { label: "a<b".into(), points: (0..10).map(|i| (i as f64, (i as f64).sin())).collect() }],
        };
        let a = plot.render();
        assert_eq!(a, plot.render());
        assert!(a.contains("a&lt;b") && a.starts_with("<svg"));
    }
}
