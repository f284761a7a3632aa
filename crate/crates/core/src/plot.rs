//! Hand-emitted SVG figures and their plain-text data series.
//!
//! No plotting dependency: charts are fixed 800x600 canvases with a fixed
//! axis layout and generic sans-serif text, so identical inputs produce
//! byte-identical SVG.

use std::fmt::Write as _;

use crate::metrics::{ConfusionCounts, RocCurve};
use crate::oversight::format_real;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const PLOT_LEFT: f64 = 80.0;
const PLOT_RIGHT: f64 = 620.0;
const PLOT_TOP: f64 = 60.0;
const PLOT_BOTTOM: f64 = 540.0;

const PALETTE: [&str; 4] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"];

/// One named line in a chart.
#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

fn tick_label(v: f64) -> String {
    if (v - v.round()).abs() < 1e-9 {
        format!("{}", v.round() as i64)
    } else {
        format!("{v:.2}")
    }
}

/// Round up to the next half-decade multiple so axis ticks land on round
/// numbers (499 -> 500, 59 -> 60, 1.0 -> 1.0).
fn nice_ceil(v: f64) -> f64 {
    if v <= 0.0 {
        return 1.0;
    }
    let magnitude = 10f64.powf(v.log10().floor());
    let step = magnitude / 2.0;
    (v / step).ceil() * step
}

fn to_x(v: f64, lo: f64, hi: f64) -> f64 {
    if hi == lo {
        return (PLOT_LEFT + PLOT_RIGHT) / 2.0;
    }
    PLOT_LEFT + (v - lo) / (hi - lo) * (PLOT_RIGHT - PLOT_LEFT)
}

fn to_y(v: f64, lo: f64, hi: f64) -> f64 {
    if hi == lo {
        return (PLOT_TOP + PLOT_BOTTOM) / 2.0;
    }
    PLOT_BOTTOM - (v - lo) / (hi - lo) * (PLOT_BOTTOM - PLOT_TOP)
}

fn svg_open(out: &mut String) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
}

fn axes(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = writeln!(
        out,
        r#"<rect x="{PLOT_LEFT}" y="{PLOT_TOP}" width="{}" height="{}" fill="none" stroke="black" stroke-width="1"/>"#,
        PLOT_RIGHT - PLOT_LEFT,
        PLOT_BOTTOM - PLOT_TOP
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="30" font-family="sans-serif" font-size="18" text-anchor="middle">{}</text>"#,
        (PLOT_LEFT + PLOT_RIGHT) / 2.0,
        title
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="580" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        (PLOT_LEFT + PLOT_RIGHT) / 2.0,
        x_label
    );
    let _ = writeln!(
        out,
        r#"<text x="22" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 22 {})">{}</text>"#,
        (PLOT_TOP + PLOT_BOTTOM) / 2.0,
        (PLOT_TOP + PLOT_BOTTOM) / 2.0,
        y_label
    );
}

fn ticks(out: &mut String, x_range: (f64, f64), y_range: (f64, f64)) {
    for i in 0..=5 {
        let fraction = f64::from(i) / 5.0;
        let x_value = x_range.0 + fraction * (x_range.1 - x_range.0);
        let x = to_x(x_value, x_range.0, x_range.1);
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{PLOT_BOTTOM}" x2="{}" y2="{}" stroke="black" stroke-width="1"/>"#,
            fmt2(x),
            fmt2(x),
            PLOT_BOTTOM + 6.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            fmt2(x),
            PLOT_BOTTOM + 22.0,
            tick_label(x_value)
        );

        let y_value = y_range.0 + fraction * (y_range.1 - y_range.0);
        let y = to_y(y_value, y_range.0, y_range.1);
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{PLOT_LEFT}" y2="{}" stroke="black" stroke-width="1"/>"#,
            PLOT_LEFT - 6.0,
            fmt2(y),
            fmt2(y)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="end">{}</text>"#,
            PLOT_LEFT - 10.0,
            fmt2(y + 4.0),
            tick_label(y_value)
        );
    }
}

/// Fixed-layout line chart with a legend on the right.
pub fn line_chart_svg(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    y_range: (f64, f64),
) -> String {
    let x_max = series
        .iter()
        .flat_map(|s| s.points.iter().map(|(x, _)| *x))
        .fold(f64::NEG_INFINITY, f64::max)
        .max(1.0);
    let x_range = (0.0, nice_ceil(x_max));

    let mut out = String::new();
    svg_open(&mut out);
    axes(&mut out, title, x_label, y_label);
    ticks(&mut out, x_range, y_range);

    for (index, line) in series.iter().enumerate() {
        let color = PALETTE[index % PALETTE.len()];
        let mut points = String::new();
        for (x, y) in &line.points {
            let _ = write!(
                points,
                "{},{} ",
                fmt2(to_x(*x, x_range.0, x_range.1)),
                fmt2(to_y(y.clamp(y_range.0, y_range.1), y_range.0, y_range.1))
            );
        }
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            points.trim_end()
        );
        let legend_y = 70.0 + 22.0 * index as f64;
        let _ = writeln!(
            out,
            r#"<line x1="635" y1="{legend_y}" x2="665" y2="{legend_y}" stroke="{color}" stroke-width="2"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="672" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
            legend_y + 4.0,
            xml_escape(&line.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// 2x2 annotated confusion grid: actual class on rows, predicted action on
/// columns.
pub fn confusion_svg(counts: &ConfusionCounts) -> String {
    let mut out = String::new();
    svg_open(&mut out);
    let _ = writeln!(
        out,
        r#"<text x="400" y="30" font-family="sans-serif" font-size="18" text-anchor="middle">Confusion matrix (evaluation run)</text>"#
    );

    let cell = 180.0;
    let x0 = 220.0;
    let y0 = 120.0;
    let cells = [
        ("TP", counts.true_positives, 0.0, 0.0, "#4a90d9"),
        ("FN", counts.false_negatives, 1.0, 0.0, "#e8e8e8"),
        ("FP", counts.false_positives, 0.0, 1.0, "#e8e8e8"),
        ("TN", counts.true_negatives, 1.0, 1.0, "#4a90d9"),
    ];
    for (tag, count, col, row, fill) in cells {
        let x = x0 + col * cell;
        let y = y0 + row * cell;
        let _ = writeln!(
            out,
            r#"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}" stroke="black" stroke-width="1"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="26" text-anchor="middle">{count}</text>"#,
            x + cell / 2.0,
            y + cell / 2.0 + 8.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="start">{tag}</text>"#,
            x + 8.0,
            y + 18.0
        );
    }
    let labels = [
        (x0 + cell / 2.0, y0 - 14.0, "predicted: block", "middle", None),
        (x0 + cell * 1.5, y0 - 14.0, "predicted: allow", "middle", None),
        (x0 - 14.0, y0 + cell / 2.0, "actual: attack", "middle", Some(-90.0)),
        (x0 - 14.0, y0 + cell * 1.5, "actual: normal", "middle", Some(-90.0)),
    ];
    for (x, y, text, anchor, rotate) in labels {
        let transform = match rotate {
            Some(angle) => format!(r#" transform="rotate({angle} {x} {y})""#),
            None => String::new(),
        };
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{y}" font-family="sans-serif" font-size="13" text-anchor="{anchor}"{transform}>{text}</text>"#
        );
    }
    out.push_str("</svg>\n");
    out
}

/// ROC curve with the chance diagonal and an AUC annotation.
pub fn roc_svg(curve: &RocCurve) -> String {
    let mut out = String::new();
    svg_open(&mut out);
    axes(
        &mut out,
        "Receiver operating characteristic",
        "false positive rate",
        "true positive rate",
    );
    ticks(&mut out, (0.0, 1.0), (0.0, 1.0));

    let _ = writeln!(
        out,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#999999" stroke-width="1" stroke-dasharray="6,4"/>"##,
        fmt2(to_x(0.0, 0.0, 1.0)),
        fmt2(to_y(0.0, 0.0, 1.0)),
        fmt2(to_x(1.0, 0.0, 1.0)),
        fmt2(to_y(1.0, 0.0, 1.0))
    );

    let mut points = String::new();
    for (fpr, tpr) in &curve.points {
        let _ = write!(
            points,
            "{},{} ",
            fmt2(to_x(*fpr, 0.0, 1.0)),
            fmt2(to_y(*tpr, 0.0, 1.0))
        );
    }
    let _ = writeln!(
        out,
        r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##,
        points.trim_end()
    );
    let _ = writeln!(
        out,
        r#"<text x="400" y="360" font-family="sans-serif" font-size="16" text-anchor="middle">AUC = {:.2}</text>"#,
        curve.auc
    );
    out.push_str("</svg>\n");
    out
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Data-series companion files for each figure.
pub mod data {
    use super::*;

    /// Blocks of `episode,<value>,<moving_avg>` rows, one block per series.
    pub fn series_blocks(header: &str, series: &[Series]) -> String {
        let mut out = String::new();
        for line in series {
            let _ = writeln!(out, "# series: {}", line.label);
            let _ = writeln!(out, "{header}");
            for (x, y) in &line.points {
                let _ = writeln!(out, "{},{}", tick_label(*x), format_real(*y));
            }
        }
        out
    }

    /// 2x2 matrix with actual class on rows and predicted action on columns.
    pub fn confusion_matrix(counts: &ConfusionCounts) -> String {
        format!(
            "# rows: actual attack, actual normal; columns: predicted block, predicted allow\n{},{}\n{},{}\n",
            counts.true_positives,
            counts.false_negatives,
            counts.false_positives,
            counts.true_negatives
        )
    }

    /// ROC points with the AUC recorded up front.
    pub fn roc_points(curve: &RocCurve) -> String {
        let mut out = format!("# auc={}\nfpr,tpr\n", format_real(curve.auc));
        for (fpr, tpr) in &curve.points {
            let _ = writeln!(out, "{},{}", format_real(*fpr), format_real(*tpr));
        }
        out
    }
}
