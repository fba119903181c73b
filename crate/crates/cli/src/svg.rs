//! Minimal static log-log chart for the sweep plot data.

use std::fmt::Write;

const W: f64 = 480.0;
const H: f64 = 360.0;
const PAD: f64 = 50.0;

/// Points drawn as circles and a curve drawn as a polyline, both on
/// logarithmic axes. Non-positive or non-finite values are skipped.
pub fn loglog_chart(title: &str, points: &[(f64, f64)], curve: &[(f64, f64)]) -> String {
    let usable = |&(x, y): &(f64, f64)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite();
    let pts: Vec<(f64, f64)> = points.iter().copied().filter(usable).collect();
    let crv: Vec<(f64, f64)> = curve.iter().copied().filter(usable).collect();
    let all: Vec<(f64, f64)> = pts.iter().chain(&crv).copied().collect();

    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    )
    .unwrap();
    writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>").unwrap();
    writeln!(
        svg,
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{title}</text>",
        W / 2.0
    )
    .unwrap();
    writeln!(
        svg,
        "<rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        W - 2.0 * PAD,
        H - 2.0 * PAD
    )
    .unwrap();

    if !all.is_empty() {
        let lx = |v: f64| v.log10();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, y) in &all {
            x0 = x0.min(lx(x));
            x1 = x1.max(lx(x));
            y0 = y0.min(lx(y));
            y1 = y1.max(lx(y));
        }
        if x1 - x0 < 1e-9 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 - y0 < 1e-9 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let px = |x: f64| PAD + (lx(x) - x0) / (x1 - x0) * (W - 2.0 * PAD);
        let py = |y: f64| H - PAD - (lx(y) - y0) / (y1 - y0) * (H - 2.0 * PAD);
        if crv.len() > 1 {
            let path: Vec<String> = crv.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            writeln!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\"/>",
                path.join(" ")
            )
            .unwrap();
        }
        for &(x, y) in &pts {
            writeln!(svg, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"firebrick\"/>", px(x), py(y)).unwrap();
        }
        writeln!(
            svg,
            "<text x=\"{PAD}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">log10 delta: {x0:.2} .. {x1:.2}; log10 |a|: {y0:.2} .. {y1:.2}</text>",
            H - 15.0
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_contains_marks() {
        let s = loglog_chart("t", &[(0.1, 0.5), (0.01, 0.05)], &[(0.01, 1.0), (0.1, 2.0)]);
        assert_eq!(s.matches("<circle").count(), 2);
        assert_eq!(s.matches("<polyline").count(), 1);
        assert!(s.ends_with("</svg>\n"));
        // zero-gap members are not drawable on log axes
        let s = loglog_chart("t", &[(0.0, 0.0)], &[]);
        assert_eq!(s.matches("<circle").count(), 0);
    }
}
