//! Flat CSV tables and SVG line plots for evaluation reports.
//!
//! Numbers are written with Rust's shortest round-trip formatting so that
//! every table can be re-read without loss and reruns are byte-identical.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::Result;
use crate::evaluation::{AblationRow, AccuracyRow, AucOutcome, PrCurve, SweepRow};

fn auc_cells(auc: &AucOutcome) -> [String; 2] {
    match auc {
        AucOutcome::Ok { auc } => [auc.to_string(), "ok".into()],
        AucOutcome::Degenerate { reason } => [String::new(), format!("degenerate: {reason}")],
    }
}

fn finish<W: Write>(w: csv::Writer<W>) -> Result<()> {
    w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::Io(std::io::Error::other(e.to_string()))
}

/// One row per threshold: `max_translation_m, max_rotation_deg, positives,
/// total, model_auc, model_status, inliers_auc, inliers_status`.
pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "max_translation_m",
        "max_rotation_deg",
        "positives",
        "total",
        "model_auc",
        "model_status",
        "inliers_auc",
        "inliers_status",
    ])
    .map_err(csv_err)?;
    for r in rows {
        let [ma, ms] = auc_cells(&r.model);
        let [ia, is] = auc_cells(&r.inliers);
        w.write_record([
            r.threshold.max_translation.to_string(),
            r.threshold.max_rotation.to_string(),
            r.positives.to_string(),
            r.total.to_string(),
            ma,
            ms,
            ia,
            is,
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

/// One row per feature subset: `features, auc, status`.
pub fn write_ablation_csv<W: Write>(out: W, rows: &[AblationRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["features", "auc", "status"]).map_err(csv_err)?;
    for r in rows {
        let [a, s] = auc_cells(&r.auc);
        w.write_record([r.features.label(), a, s]).map_err(csv_err)?;
    }
    finish(w)
}

/// One row per threshold: `max_translation_m, max_rotation_deg,
/// model_accuracy, inliers_accuracy`.
pub fn write_accuracy_csv<W: Write>(out: W, rows: &[AccuracyRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["max_translation_m", "max_rotation_deg", "model_accuracy", "inliers_accuracy"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.threshold.max_translation.to_string(),
            r.threshold.max_rotation.to_string(),
            r.model.to_string(),
            r.inliers.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

/// The curve's points as `recall, precision` rows.
pub fn write_pr_csv<W: Write>(out: W, curve: &PrCurve) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["recall", "precision"]).map_err(csv_err)?;
    for (r, p) in &curve.points {
        w.write_record([r.to_string(), p.to_string()]).map_err(csv_err)?;
    }
    finish(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { name: name.into(), points }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

const COLORS: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 50.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// A standalone SVG document with one polyline per series, axes with five
/// ticks each and a legend in the lower left corner.
pub fn line_plot_svg(spec: &PlotSpec, series: &[Series]) -> String {
    let (x0, x1) = spec.x_range;
    let (y0, y1) = spec.y_range;
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| MARGIN_TOP + (1.0 - (y - y0) / (y1 - y0)) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        escape(&spec.title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let bottom = MARGIN_TOP + plot_h;
        let _ =
            writeln!(s, r#"<line x1="{px:.2}" y1="{bottom}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, bottom + 4.0);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, bottom + 16.0, tick(xv));
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{MARGIN_LEFT}" y2="{py:.2}" stroke="black"/>"#,
            MARGIN_LEFT - 4.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 6.0,
            py + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(&spec.y_label)
    );

    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ =
            writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let ly = MARGIN_TOP + plot_h - 12.0 - 16.0 * (series.len() - 1 - i) as f64;
        let lx = MARGIN_LEFT + 10.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&ser.name));
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    if r == 0.0 {
        "0".into()
    } else {
        r.to_string()
    }
}

/// Precision-recall plot on the unit square.
pub fn pr_plot_svg(title: &str, series: &[Series]) -> String {
    let spec = PlotSpec {
        title: title.into(),
        x_label: "Recall".into(),
        y_label: "Precision".into(),
        x_range: (0.0, 1.0),
        y_range: (0.0, 1.0),
    };
    line_plot_svg(&spec, series)
}

/// Accuracy against the translation threshold, one series per method.
pub fn accuracy_plot_svg(rows: &[AccuracyRow]) -> String {
    let xs: Vec<f64> = rows.iter().map(|r| r.threshold.max_translation).collect();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let x_range = if lo < hi { (0.0, hi) } else { (0.0, hi.max(1.0)) };
    let spec = PlotSpec {
        title: "Localization accuracy".into(),
        x_label: "Translation threshold [m]".into(),
        y_label: "Correctly localized queries".into(),
        x_range,
        y_range: (0.0, 1.0),
    };
    let model = rows.iter().map(|r| (r.threshold.max_translation, r.model)).collect();
    let inliers = rows.iter().map(|r| (r.threshold.max_translation, r.inliers)).collect();
    line_plot_svg(&spec, &[Series::new("confidence", model), Series::new("max inliers", inliers)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::pr_curve_from;
    use crate::features::FeatureSet;
    use crate::pose::ErrorThreshold;

    fn text(f: impl FnOnce(&mut Vec<u8>)) -> String {
        let mut buf = Vec::new();
        f(&mut buf);
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn sweep_csv_marks_degenerate_rows() {
        let rows = vec![
            SweepRow {
                threshold: ErrorThreshold::standard(),
                positives: 1,
                total: 2,
                model: AucOutcome::Ok { auc: 1.0 },
                inliers: AucOutcome::Ok { auc: 0.5 },
            },
            SweepRow {
                threshold: ErrorThreshold::new(0.25, 10.0).unwrap(),
                positives: 0,
                total: 2,
                model: AucOutcome::Degenerate { reason: "no positives".into() },
                inliers: AucOutcome::Degenerate { reason: "no positives".into() },
            },
        ];
        let s = text(|b| write_sweep_csv(b, &rows).unwrap());
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "1,10,1,2,1,ok,0.5,ok");
        assert_eq!(lines[2], "0.25,10,0,2,,degenerate: no positives,,degenerate: no positives");
    }

    #[test]
    fn ablation_and_accuracy_csv() {
        let rows = vec![AblationRow { features: FeatureSet::standard(), auc: AucOutcome::Ok { auc: 0.75 } }];
        let s = text(|b| write_ablation_csv(b, &rows).unwrap());
        assert_eq!(s, "features,auc,status\ninliers+qcov+dbcov,0.75,ok\n");

        let rows = vec![AccuracyRow { threshold: ErrorThreshold::new(0.5, 10.0).unwrap(), model: 0.6, inliers: 0.4 }];
        let s = text(|b| write_accuracy_csv(b, &rows).unwrap());
        assert_eq!(s.lines().nth(1), Some("0.5,10,0.6,0.4"));
    }

    #[test]
    fn pr_csv_round_trips_points() {
        let curve = pr_curve_from(&[0.9, 0.8, 0.7, 0.6], &[true, false, true, false]).unwrap();
        let s = text(|b| write_pr_csv(b, &curve).unwrap());
        let back: Vec<(f64, f64)> = s
            .lines()
            .skip(1)
            .map(|l| {
                let (r, p) = l.split_once(',').unwrap();
                (r.parse().unwrap(), p.parse().unwrap())
            })
            .collect();
        assert_eq!(back, curve.points);
    }

    #[test]
    fn svg_has_one_polyline_per_series_and_escapes_text() {
        let svg = pr_plot_svg("a < b & c", &[Series::new("x", vec![(0.0, 1.0), (1.0, 0.5)]), Series::new("y", vec![])]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a &lt; b &amp; c"));
        // (0, 1) maps to the top-left corner of the plot area
        assert!(svg.contains(r#"points="60.00,36.00 460.00,173.00""#));
    }

    #[test]
    fn svg_is_deterministic() {
        let rows = vec![
            AccuracyRow { threshold: ErrorThreshold::new(0.25, 10.0).unwrap(), model: 0.3, inliers: 0.2 },
            AccuracyRow { threshold: ErrorThreshold::new(2.0, 10.0).unwrap(), model: 0.8, inliers: 0.7 },
        ];
        assert_eq!(accuracy_plot_svg(&rows), accuracy_plot_svg(&rows));
    }
}
