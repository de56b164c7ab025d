//! Static SVG figures: correlation or spectrum lines and regime heatmaps.

use std::fmt::Write;

use plexsim::{Regime, SpectrumResult, SweepResult};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 120.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 50.0;

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64>, ys: impl Iterator<Item = f64>) -> Frame {
        Frame { x: padded_range(xs), y: padded_range(ys) }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title));
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(s: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let (x0, x1) = (frame.px(frame.x.0), frame.px(frame.x.1));
    let (y0, y1) = (frame.py(frame.y.0), frame.py(frame.y.1));
    let _ = writeln!(s, r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y0 - y1);
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = frame.x.0 + t * (frame.x.1 - frame.x.0);
        let yv = frame.y.0 + t * (frame.y.1 - frame.y.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, frame.px(xv), y0 + 16.0, tick(xv));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, x0 - 4.0, frame.py(yv) + 4.0, tick(yv));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, HEIGHT - 12.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn polyline(s: &mut String, frame: &Frame, points: &[(f64, f64)], color: &str) {
    let mut path = String::new();
    for &(x, y) in points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
        let _ = write!(path, "{:.2},{:.2} ", frame.px(x), frame.py(y));
    }
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.trim_end());
}

fn legend(s: &mut String, entries: &[(&str, &str)]) {
    let x = WIDTH - MARGIN_RIGHT + 12.0;
    for (i, (label, color)) in entries.iter().enumerate() {
        let y = MARGIN_TOP + 16.0 + 18.0 * i as f64;
        let _ = writeln!(s, r#"<rect x="{x}" y="{}" width="12" height="12" fill="{color}"/>"#, y - 10.0);
        let _ = writeln!(s, r#"<text x="{}" y="{y}">{}</text>"#, x + 18.0, escape(label));
    }
}

fn regime_color(regime: Option<Regime>) -> &'static str {
    match regime {
        Some(Regime::Blockade) => "#1f77b4",
        Some(Regime::Unconventional) => "#2ca02c",
        Some(Regime::Bunching) => "#d62728",
        Some(Regime::Coherent) => "#bbbbbb",
        None => "#000000",
    }
}

/// Lines of log10 g2 and log10 g3 for one-axis sweeps, a regime map for two axes.
pub fn sweep_svg(result: &SweepResult) -> String {
    match &result.axis2 {
        None => correlation_lines(result),
        Some(axis2) => regime_map(result, axis2),
    }
}

fn correlation_lines(result: &SweepResult) -> String {
    let series = |pick: fn(&plexsim::CorrelationResult) -> f64| -> Vec<(f64, f64)> {
        result
            .points
            .iter()
            .filter_map(|p| p.result.as_ref().map(|r| (p.param1, pick(r).log10())))
            .collect()
    };
    let g2 = series(|r| r.g2);
    let g3 = series(|r| r.g3);
    let frame = Frame::new(
        result.points.iter().map(|p| p.param1),
        g2.iter().chain(&g3).map(|p| p.1).chain([0.0]),
    );
    let mut s = header(&format!("g2(0) and g3(0), {}", result.engine));
    axes(&mut s, &frame, &result.axis1, "log10 g(n)(0)");
    polyline(&mut s, &frame, &[(frame.x.0, 0.0), (frame.x.1, 0.0)], "#999999");
    polyline(&mut s, &frame, &g2, "#1f77b4");
    polyline(&mut s, &frame, &g3, "#d62728");
    legend(&mut s, &[("g2(0)", "#1f77b4"), ("g3(0)", "#d62728")]);
    s.push_str("</svg>\n");
    s
}

fn regime_map(result: &SweepResult, axis2: &str) -> String {
    let mut xs: Vec<f64> = result.points.iter().filter_map(|p| p.param2).collect();
    let mut ys: Vec<f64> = result.points.iter().map(|p| p.param1).collect();
    for v in [&mut xs, &mut ys] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let frame = Frame::new(xs.iter().copied(), ys.iter().copied());
    let cell_w = (frame.px(frame.x.1) - frame.px(frame.x.0)) / xs.len().max(1) as f64;
    let cell_h = (frame.py(frame.y.0) - frame.py(frame.y.1)) / ys.len().max(1) as f64;
    let index = |v: f64, grid: &[f64]| grid.iter().position(|g| *g == v).unwrap_or(0) as f64;

    let mut s = header(&format!("regime map, {}", result.engine));
    for p in &result.points {
        let (Some(x), y) = (p.param2, p.param1) else { continue };
        let left = frame.px(frame.x.0) + index(x, &xs) * cell_w;
        let top = frame.py(frame.y.0) - (index(y, &ys) + 1.0) * cell_h;
        let _ = writeln!(
            s,
            r#"<rect x="{left:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            cell_w + 0.3,
            cell_h + 0.3,
            regime_color(p.result.as_ref().map(|r| r.regime))
        );
    }
    axes(&mut s, &frame, axis2, &result.axis1);
    legend(
        &mut s,
        &[
            ("PB", regime_color(Some(Regime::Blockade))),
            ("UPB", regime_color(Some(Regime::Unconventional))),
            ("bunching", regime_color(Some(Regime::Bunching))),
            ("coherent", regime_color(Some(Regime::Coherent))),
            ("failed", regime_color(None)),
        ],
    );
    s.push_str("</svg>\n");
    s
}

pub fn spectrum_svg(spectrum: &SpectrumResult) -> String {
    let points: Vec<(f64, f64)> = spectrum.omegas.iter().copied().zip(spectrum.response.iter().copied()).collect();
    let frame = Frame::new(spectrum.omegas.iter().copied(), spectrum.response.iter().copied().chain([0.0]));
    let mut s = header("excitation spectrum");
    axes(&mut s, &frame, "drive energy (eV)", "kappa <n> / E^2");
    polyline(&mut s, &frame, &points, "#1f77b4");
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use plexsim::scenarios::{run_grid, Engine};
    use plexsim::SystemSpec;

    fn empty_cavity_sweep(axis2: bool) -> SweepResult {
        let omegas = [1.9, 2.0, 2.1];
        let second = [0.3, 0.35];
        run_grid(("drive_omega", &omegas), axis2.then_some(("kappa", &second[..])), Engine::MasterEquation, Some(1), |w, k| {
            Ok(SystemSpec::new(2.0, k.unwrap_or(0.35), w).with_n_max(4))
        })
        .unwrap()
    }

    #[test]
    fn line_plot_is_standalone_svg() {
        let svg = sweep_svg(&empty_cavity_sweep(false));
        assert!(svg.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 3);
    }

    #[test]
    fn heatmap_has_one_cell_per_point() {
        let svg = sweep_svg(&empty_cavity_sweep(true));
        let cells = svg.matches("fill=\"#bbbbbb\"").count();
        // six coherent cells plus the legend swatch
        assert_eq!(cells, 7);
    }
}
