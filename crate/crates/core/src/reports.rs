//! Deterministic text artifacts: metrics summaries, training trace and
//! compliance series files, Q-table files, and the comparison report.
//!
//! All numeric formatting is fixed (six decimals for fractions, one decimal
//! for displayed percentages) so identical runs serialize byte-identically.

use std::fmt::Write as _;

use thiserror::Error;

use crate::agents::{Action, QTable};
use crate::engine::{ComparisonReport, TrainingTrace};
use crate::metrics::{moving_average, MeanStd, RunMetrics};
use crate::oversight::format_real;
use crate::traffic::TrafficClass;

/// Window for the smoothed series in trace and compliance files.
pub const MOVING_AVERAGE_WINDOW: usize = 10;

/// Percentage with one decimal, the table display convention.
pub fn percent(fraction: f64) -> String {
    format!("{:.1}", fraction * 100.0)
}

/// Machine-parseable key=value summary of one evaluation run.
pub fn metrics_summary_text(metrics: &RunMetrics) -> String {
    let c = metrics.confusion;
    let mut out = String::new();
    let _ = writeln!(out, "events={}", metrics.events);
    let _ = writeln!(out, "tp={}", c.true_positives);
    let _ = writeln!(out, "fp={}", c.false_positives);
    let _ = writeln!(out, "tn={}", c.true_negatives);
    let _ = writeln!(out, "fn={}", c.false_negatives);
    let _ = writeln!(out, "detection_rate={}", format_real(metrics.detection_rate));
    let _ = writeln!(
        out,
        "false_positive_rate={}",
        format_real(metrics.false_positive_rate)
    );
    let _ = writeln!(out, "ecs={}", format_real(metrics.ecs));
    let _ = writeln!(out, "auc={}", format_real(metrics.auc));
    let _ = writeln!(out, "detection_rate_pct={}", percent(metrics.detection_rate));
    let _ = writeln!(
        out,
        "false_positive_rate_pct={}",
        percent(metrics.false_positive_rate)
    );
    let _ = writeln!(out, "ecs_pct={}", percent(metrics.ecs));
    out
}

/// Per-episode trace: episode, behavioral accuracy, its moving average, and
/// the cumulative reward since the start of the run.
pub fn trace_file_text(trace: &TrainingTrace) -> String {
    let accuracies: Vec<f64> = trace.episodes.iter().map(|e| e.accuracy).collect();
    let smoothed = moving_average(&accuracies, MOVING_AVERAGE_WINDOW);
    let mut out = String::from("episode,accuracy,moving_avg,cum_reward\n");
    for (stats, ma) in trace.episodes.iter().zip(&smoothed) {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            stats.episode,
            format_real(stats.accuracy),
            format_real(*ma),
            stats.cumulative_reward
        );
    }
    out
}

/// Per-episode compliance series: the ECS of the episode-end greedy policy
/// and its moving average.
pub fn compliance_file_text(trace: &TrainingTrace) -> String {
    let ecs_series: Vec<f64> = trace.episodes.iter().map(|e| e.policy_ecs).collect();
    let smoothed = moving_average(&ecs_series, MOVING_AVERAGE_WINDOW);
    let mut out = String::from("episode,ecs,moving_avg\n");
    for (stats, ma) in trace.episodes.iter().zip(&smoothed) {
        let _ = writeln!(
            out,
            "{},{},{}",
            stats.episode,
            format_real(stats.policy_ecs),
            format_real(*ma)
        );
    }
    out
}

#[derive(Debug, Error, PartialEq)]
pub enum QTableFileError {
    #[error("expected 4 lines, found {0}")]
    LineCount(usize),
    #[error("line {line}: expected 'class,q_allow,q_block'")]
    Shape { line: usize },
    #[error("line {line}: {detail}")]
    Value { line: usize, detail: String },
    #[error("line {line}: classes must appear in table order")]
    Order { line: usize },
}

/// Fixed four-line layout: `class,q_allow,q_block` in class order.
pub fn qtable_file_text(q: &QTable) -> String {
    let mut out = String::new();
    for class in TrafficClass::ALL {
        let _ = writeln!(
            out,
            "{},{},{}",
            class,
            format_real(q.get(class, Action::Allow)),
            format_real(q.get(class, Action::Block))
        );
    }
    out
}

pub fn parse_qtable_file(content: &str) -> Result<QTable, QTableFileError> {
    let lines: Vec<&str> = content.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.len() != TrafficClass::COUNT {
        return Err(QTableFileError::LineCount(lines.len()));
    }
    let mut q = QTable::new();
    for (index, raw) in lines.iter().enumerate() {
        let line = index + 1;
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 3 {
            return Err(QTableFileError::Shape { line });
        }
        let class: TrafficClass = fields[0]
            .parse()
            .map_err(|e| QTableFileError::Value { line, detail: e })?;
        if class.index() != index {
            return Err(QTableFileError::Order { line });
        }
        for (action, raw_value) in [(Action::Allow, fields[1]), (Action::Block, fields[2])] {
            let value: f64 = raw_value.parse().map_err(|e| QTableFileError::Value {
                line,
                detail: format!("bad value '{raw_value}': {e}"),
            })?;
            if !value.is_finite() {
                return Err(QTableFileError::Value {
                    line,
                    detail: format!("non-finite value '{raw_value}'"),
                });
            }
            q.set(class, action, value);
        }
    }
    Ok(q)
}

fn mean_std_cell(m: &MeanStd) -> String {
    format!("{} +/- {:.2}", percent(m.mean), m.std * 100.0)
}

/// Aligned-text report: a single-seed comparison first, then the cross-seed
/// aggregate for both arms.
pub fn comparison_report_text(report: &ComparisonReport) -> String {
    let mut out = String::new();
    let first = &report.per_seed[0];
    let _ = writeln!(
        out,
        "Single-seed comparison (seed {}, greedy evaluation)",
        first.seed
    );
    let _ = writeln!(out, "{}", "-".repeat(72));
    let _ = writeln!(
        out,
        "{:<30} {:>20} {:>18}",
        "Metric", "Traditional System", "Agentic AI"
    );
    let rows = [
        (
            "Detection Rate (%)",
            first.baseline.detection_rate,
            first.agentic.detection_rate,
        ),
        (
            "False Positive Rate (%)",
            first.baseline.false_positive_rate,
            first.agentic.false_positive_rate,
        ),
        ("Ethical Compliance Score (%)", first.baseline.ecs, first.agentic.ecs),
    ];
    for (name, baseline, agentic) in rows {
        let _ = writeln!(
            out,
            "{:<30} {:>20} {:>18}",
            name,
            percent(baseline),
            percent(agentic)
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "Aggregate over {} seeds (mean +/- sample std)",
        report.agentic.n_seeds
    );
    let _ = writeln!(out, "{}", "-".repeat(72));
    let _ = writeln!(
        out,
        "{:<30} {:>20} {:>18}",
        "Metric", "Agentic AI", "Traditional System"
    );
    let aggregate_rows = [
        (
            "Detection Rate (%)",
            &report.agentic.detection_rate,
            &report.baseline.detection_rate,
        ),
        (
            "False Positive Rate (%)",
            &report.agentic.false_positive_rate,
            &report.baseline.false_positive_rate,
        ),
        ("Ethical Compliance (%)", &report.agentic.ecs, &report.baseline.ecs),
    ];
    for (name, agentic, baseline) in aggregate_rows {
        let _ = writeln!(
            out,
            "{:<30} {:>20} {:>18}",
            name,
            mean_std_cell(agentic),
            mean_std_cell(baseline)
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "Per-seed detection rate / false positive rate (%)");
    let _ = writeln!(out, "{}", "-".repeat(72));
    let _ = writeln!(
        out,
        "{:<8} {:>16} {:>12} {:>16} {:>12}",
        "seed", "agentic DR", "agentic FPR", "baseline DR", "baseline FPR"
    );
    for seed in &report.per_seed {
        let _ = writeln!(
            out,
            "{:<8} {:>16} {:>12} {:>16} {:>12}",
            seed.seed,
            percent(seed.agentic.detection_rate),
            percent(seed.agentic.false_positive_rate),
            percent(seed.baseline.detection_rate),
            percent(seed.baseline.false_positive_rate)
        );
    }
    out
}
