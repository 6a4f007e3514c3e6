//! Minimal SVG line charts for profile and CV curves.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

pub struct Series<'a> {
    pub label: &'a str,
    pub values: &'a [f64],
    pub dashed: bool,
}

pub fn line_chart(title: &str, xs: &[f64], series: &[Series<'_>], marker: Option<f64>) -> String {
    let (x_lo, x_hi) = bounds(xs.iter().copied());
    let (y_lo, y_hi) = bounds(series.iter().flat_map(|s| s.values.iter().copied()));
    let sx = |x: f64| MARGIN + (x - x_lo) / (x_hi - x_lo) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<path d="M{m} {b} L{r} {b} M{m} {b} L{m} {m}" stroke="black" fill="none"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    for (x, anchor) in [(x_lo, "start"), (x_hi, "end")] {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="{anchor}">{x:.4}</text>"#,
            sx(x),
            HEIGHT - MARGIN + 16.0
        );
    }
    for y in [y_lo, y_hi] {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{y:.3}</text>"#,
            MARGIN - 4.0,
            sy(y) + 4.0
        );
    }
    for (i, s) in series.iter().enumerate() {
        let mut d = String::new();
        for (t, (&x, &y)) in xs.iter().zip(s.values).enumerate() {
            let _ = write!(
                d,
                "{}{:.2} {:.2} ",
                if t == 0 { "M" } else { "L" },
                sx(x),
                sy(y)
            );
        }
        let dash = if s.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = writeln!(
            out,
            r#"<path d="{}" stroke="{}" stroke-width="1.5" fill="none"{dash}><title>{}</title></path>"#,
            d.trim_end(),
            PALETTE[i % PALETTE.len()],
            escape(s.label)
        );
    }
    if let Some(x) = marker {
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{t}" x2="{x:.2}" y2="{b}" stroke="blue" stroke-dasharray="4 4"/>"#,
            x = sx(x),
            t = MARGIN,
            b = HEIGHT - MARGIN
        );
    }
    out.push_str("</svg>\n");
    out
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_is_well_formed() {
        let xs = [0.0, 0.5, 1.0];
        let svg = line_chart(
            "a < b",
            &xs,
            &[Series {
                label: "x1",
                values: &[2.0, 1.0, 0.0],
                dashed: false,
            }],
            Some(0.5),
        );
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg.matches("<path").count(), 2);
    }
}
