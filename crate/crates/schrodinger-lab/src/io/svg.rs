use crate::experiments::ScalingOutcome;
use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;

/// Self-contained log-log plot of the fitted points and line. The data table is embedded
/// as a comment so the figure can be regenerated from the file alone.
pub fn loglog_svg(outcome: &ScalingOutcome) -> String {
    let pts = &outcome.fit.points;
    let (x_label, y_label) = (&outcome.fit_axes.0, &outcome.fit_axes.1);
    let bounds = |k: usize| {
        let lo = pts.iter().map(|p| if k == 0 { p.0 } else { p.1 }).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| if k == 0 { p.0 } else { p.1 }).fold(f64::NEG_INFINITY, f64::max);
        let pad = 0.05 * (hi - lo).max(1e-6);
        (lo - pad, hi + pad)
    };
    let (x0, x1) = bounds(0);
    let (y0, y1) = bounds(1);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
    let _ = writeln!(s, "<!-- data: experiment={} x={x_label} y={y_label}", outcome.experiment);
    let _ = writeln!(s, "ln_x,ln_y");
    for (x, y) in pts {
        let _ = writeln!(s, "{x},{y}");
    }
    let _ = writeln!(s, "slope={} intercept={} max_residual={} -->", outcome.fit.slope, outcome.fit.intercept, outcome.fit.max_residual);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let line = |x: f64| outcome.fit.intercept + outcome.fit.slope * x;
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="crimson" stroke-width="1.5"/>"#,
        sx(x0),
        sy(line(x0)).clamp(0.0, HEIGHT),
        sx(x1),
        sy(line(x1)).clamp(0.0, HEIGHT)
    );
    for (x, y) in pts {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="steelblue"/>"#, sx(*x), sy(*y));
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="30" font-family="sans-serif" font-size="15" text-anchor="middle">{}: slope {:.4}</text>"#,
        WIDTH / 2.0,
        outcome.experiment,
        outcome.fit.slope
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">ln {x_label}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {})">ln {y_label}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    s.push_str("</svg>\n");
    s
}

/// Recovers the `(ln x, ln y)` table embedded by [`loglog_svg`].
pub fn embedded_points(svg: &str) -> Vec<(f64, f64)> {
    let Some(start) = svg.find("ln_x,ln_y\n") else {
        return Vec::new();
    };
    svg[start + 10..]
        .lines()
        .take_while(|l| !l.starts_with("slope="))
        .filter_map(|l| {
            let (a, b) = l.split_once(',')?;
            Some((a.parse().ok()?, b.parse().ok()?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run_scaling_experiment, Experiment, ScalingGrid};

    #[test]
    fn embedded_table_matches_the_fit() {
        let grid = ScalingGrid { trials: 20, ..ScalingGrid::default_for(Experiment::CrossingBound) };
        let outcome = run_scaling_experiment("crossing_bound", &grid).unwrap();
        let svg = loglog_svg(&outcome);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(embedded_points(&svg), outcome.fit.points);
    }
}
