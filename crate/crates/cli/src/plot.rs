//! Self-contained SVG emission for risk curves and threshold sweeps. The
//! output is a pure function of the report list, so identical inputs give
//! byte-identical files.

use mrfcd_core::{BoundReport, RiskReport};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

struct Series<'a> {
    label: &'a str,
    color: &'a str,
    points: Vec<(f64, f64)>,
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn around(series: &[Series]) -> Frame {
        let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
        let ys = series.iter().flat_map(|s| s.points.iter().map(|p| p.1));
        let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for x in xs {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
        }
        let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for y in ys {
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
        if x_min == x_max {
            x_min -= 1.0;
            x_max += 1.0;
        }
        if y_min == y_max {
            y_min -= 0.5;
            y_max += 0.5;
        }
        Frame {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    fn x(&self, v: f64) -> f64 {
        MARGIN_L + (v - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_B
            - (v - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn render(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let frame = Frame::around(series);
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{title}</text>\n",
        WIDTH / 2.0
    ));

    // Axes.
    let (x0, y0) = (MARGIN_L, HEIGHT - MARGIN_B);
    svg.push_str(&format!(
        "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{:.2}\" y2=\"{y0:.2}\" stroke=\"black\"/>\n",
        WIDTH - MARGIN_R
    ));
    svg.push_str(&format!(
        "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x0:.2}\" y2=\"{MARGIN_T:.2}\" stroke=\"black\"/>\n"
    ));

    // Ticks and grid.
    for k in 0..=4 {
        let fx = frame.x_min + (frame.x_max - frame.x_min) * k as f64 / 4.0;
        let px = frame.x(fx);
        svg.push_str(&format!(
            "<line x1=\"{px:.2}\" y1=\"{y0:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            y0 + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"11\">{}</text>\n",
            y0 + 18.0,
            format_tick(fx)
        ));
        let fy = frame.y_min + (frame.y_max - frame.y_min) * k as f64 / 4.0;
        let py = frame.y(fy);
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{x0:.2}\" y2=\"{py:.2}\" stroke=\"black\"/>\n",
            x0 - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"11\">{}</text>\n",
            x0 - 8.0,
            py + 4.0,
            format_tick(fy)
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"13\">{x_label}</text>\n",
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"13\" \
         transform=\"rotate(-90 18 {:.2})\">{y_label}</text>\n",
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0
    ));

    // Series: polyline plus markers, legend row per series.
    for (s_idx, s) in series.iter().enumerate() {
        if s.points.len() > 1 {
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", frame.x(x), frame.y(y)))
                .collect();
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
                pts.join(" "),
                s.color
            ));
        }
        for &(x, y) in &s.points {
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{}\"/>\n",
                frame.x(x),
                frame.y(y),
                s.color
            ));
        }
        let ly = MARGIN_T + 14.0 * s_idx as f64;
        svg.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n",
            WIDTH - MARGIN_R - 150.0,
            ly,
            s.color
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\">{}</text>\n",
            WIDTH - MARGIN_R - 135.0,
            ly + 9.0,
            s.label
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn format_tick(v: f64) -> String {
    if v.abs() >= 1000.0 || (v != 0.0 && v.abs() < 0.01) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Risk (and its theoretical lower bound) against n.
pub fn risk_plot(reports: &[RiskReport]) -> Result<String, String> {
    if reports.is_empty() {
        return Err("no reports to plot".into());
    }
    let risk: Vec<(f64, f64)> = reports
        .iter()
        .map(|r| (r.n as f64, r.empirical_optimal_risk))
        .collect();
    let bound: Vec<(f64, f64)> = reports
        .iter()
        .map(|r| (r.n as f64, r.theoretical_lower_bound))
        .collect();
    let title = format!(
        "{} p={} lambda={} trials={}",
        reports[0].kind, reports[0].p, reports[0].lambda, reports[0].trials
    );
    Ok(render(
        &title,
        "n (samples per dataset)",
        "risk (type I + type II)",
        &[
            Series {
                label: "empirical optimal risk",
                color: "#1f77b4",
                points: risk,
            },
            Series {
                label: "theoretical lower bound",
                color: "#d62728",
                points: bound,
            },
        ],
    ))
}

/// Sample threshold against p; infinite thresholds are skipped.
pub fn bound_plot(reports: &[BoundReport]) -> Result<String, String> {
    if reports.is_empty() {
        return Err("no reports to plot".into());
    }
    let points: Vec<(f64, f64)> = reports
        .iter()
        .filter(|r| r.n_threshold.0.is_finite())
        .map(|r| (r.p as f64, r.n_threshold.0))
        .collect();
    if points.is_empty() {
        return Err("all thresholds are infinite; nothing to plot".into());
    }
    let title = format!("{} delta={} threshold sweep", reports[0].kind, reports[0].delta);
    Ok(render(
        &title,
        "p (nodes)",
        "sample threshold on min(n1, n2)",
        &[Series {
            label: "theorem threshold",
            color: "#1f77b4",
            points,
        }],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use mrfcd_core::report::{ExtReal, SWEEP_BIAS_NOTE};

    fn report(n: usize, risk: f64) -> RiskReport {
        RiskReport {
            kind: "ising-single-edge".into(),
            p: 4,
            d: None,
            lambda: 0.5,
            n,
            trials: 1000,
            seed: 1,
            empirical_optimal_risk: risk,
            mc_std_error: 0.01,
            theoretical_lower_bound: risk * 0.8,
            log_tau_opt: ExtReal(0.0),
            curve: Vec::new(),
            sweep_bias_note: SWEEP_BIAS_NOTE.into(),
        }
    }

    #[test]
    fn single_point_produces_valid_svg() {
        let svg = risk_plot(&[report(1, 0.9)]).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("<circle"));
        assert!(svg.contains("risk (type I + type II)"));
    }

    #[test]
    fn overlay_has_two_series_and_is_deterministic() {
        let reports = vec![report(1, 0.9), report(4, 0.6), report(16, 0.2)];
        let a = risk_plot(&reports).unwrap();
        assert!(a.contains("empirical optimal risk"));
        assert!(a.contains("theoretical lower bound"));
        assert!(a.matches("<polyline").count() == 2);
        let b = risk_plot(&reports).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(risk_plot(&[]).is_err());
        assert!(bound_plot(&[]).is_err());
    }
}
