//! Evaluation metrics: detection rate, false-positive rate, ethical
//! compliance score, confusion counts, ROC/AUC, moving averages, and
//! cross-seed aggregation.
//!
//! Rates are defined over their own denominators (attacks for DR,
//! legitimate events for FPR) and error out rather than defaulting when the
//! denominator is empty. AUC is accumulated in integer arithmetic and
//! divided once, so it equals the pairwise rank statistic (ties counted
//! half) exactly.

use thiserror::Error;

use crate::oversight::{DecisionRecord, Outcome};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("detection rate undefined: no attack events")]
    NoAttacks,
    #[error("false positive rate undefined: no legitimate events")]
    NoLegitimate,
    #[error("fpr out of range: {0}")]
    FprOutOfRange(f64),
    #[error("roc undefined: scores contain a single class")]
    OneClass,
    #[error("roc undefined: non-finite score")]
    NonFiniteScore,
    #[error("aggregate needs at least 2 runs, got {0}")]
    TooFewRuns(usize),
}

/// Confusion counts with attack as the positive class and Block as the
/// positive prediction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub true_positives: u64,
    pub false_positives: u64,
    pub true_negatives: u64,
    pub false_negatives: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        Self {
            true_positives: tp,
            false_positives: fp,
            true_negatives: tn,
            false_negatives: fn_,
        }
    }

    pub fn total(&self) -> u64 {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }

    pub fn attacks(&self) -> u64 {
        self.true_positives + self.false_negatives
    }

    pub fn legitimate(&self) -> u64 {
        self.true_negatives + self.false_positives
    }

    pub fn record(&mut self, outcome: Outcome) {
        match outcome {
            Outcome::TruePositive => self.true_positives += 1,
            Outcome::FalsePositive => self.false_positives += 1,
            Outcome::TrueNegative => self.true_negatives += 1,
            Outcome::FalseNegative => self.false_negatives += 1,
        }
    }
}

/// Proportion of attacks blocked: tp / (tp + fn).
pub fn detection_rate(c: &ConfusionCounts) -> Result<f64, MetricsError> {
    let attacks = c.attacks();
    if attacks == 0 {
        return Err(MetricsError::NoAttacks);
    }
    Ok(c.true_positives as f64 / attacks as f64)
}

/// Proportion of legitimate events blocked: fp / (fp + tn).
pub fn false_positive_rate(c: &ConfusionCounts) -> Result<f64, MetricsError> {
    let legitimate = c.legitimate();
    if legitimate == 0 {
        return Err(MetricsError::NoLegitimate);
    }
    Ok(c.false_positives as f64 / legitimate as f64)
}

/// Ethical compliance score: one minus the false-positive rate.
pub fn ecs(fpr: f64) -> Result<f64, MetricsError> {
    if !(0.0..=1.0).contains(&fpr) {
        return Err(MetricsError::FprOutOfRange(fpr));
    }
    Ok(1.0 - fpr)
}

/// Tally confusion counts from logged decisions.
pub fn confusion(records: &[DecisionRecord]) -> ConfusionCounts {
    let mut counts = ConfusionCounts::default();
    for record in records {
        counts.record(record.outcome);
    }
    counts
}

/// Extract (score, is_attack) pairs from logged decisions; the score is the
/// Q-margin at decision time.
pub fn scores(records: &[DecisionRecord]) -> Vec<(f64, bool)> {
    records
        .iter()
        .map(|r| (r.q_block - r.q_allow, r.true_class.is_malicious()))
        .collect()
}

/// ROC curve (fpr, tpr) points plus the area under it.
#[derive(Clone, Debug, PartialEq)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// ROC from scored decisions. Thresholds sweep the distinct scores from
/// high to low; tied scores collapse into one step, which makes the
/// trapezoidal area identical to the rank statistic with ties counted half.
pub fn roc_auc(scored: &[(f64, bool)]) -> Result<RocCurve, MetricsError> {
    if scored.iter().any(|(s, _)| !s.is_finite()) {
        return Err(MetricsError::NonFiniteScore);
    }
    let positives = scored.iter().filter(|(_, attack)| *attack).count() as u64;
    let negatives = scored.len() as u64 - positives;
    if positives == 0 || negatives == 0 {
        return Err(MetricsError::OneClass);
    }

    let mut sorted: Vec<(f64, bool)> = scored.to_vec();
    sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("scores checked finite"));

    let mut points = vec![(0.0, 0.0)];
    let mut tp = 0u64;
    let mut fp = 0u64;
    // Twice the unnormalized area; stays integral so the one final division
    // is the only rounding step.
    let mut area_twice = 0u64;
    let mut i = 0;
    while i < sorted.len() {
        let threshold = sorted[i].0;
        let mut group_tp = 0u64;
        let mut group_fp = 0u64;
        while i < sorted.len() && sorted[i].0 == threshold {
            if sorted[i].1 {
                group_tp += 1;
            } else {
                group_fp += 1;
            }
            i += 1;
        }
        area_twice += group_fp * (2 * tp + group_tp);
        tp += group_tp;
        fp += group_fp;
        points.push((fp as f64 / negatives as f64, tp as f64 / positives as f64));
    }

    let auc = area_twice as f64 / (2 * positives * negatives) as f64;
    Ok(RocCurve { points, auc })
}

/// Moving average with an expanding head: element `i` averages the inputs
/// from `max(0, i - window + 1)` through `i`. Output length equals input
/// length.
pub fn moving_average(series: &[f64], window: usize) -> Vec<f64> {
    assert!(window >= 1, "window must be >= 1");
    (0..series.len())
        .map(|i| {
            let start = (i + 1).saturating_sub(window);
            let slice = &series[start..=i];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect()
}

/// Full metric set for one evaluation run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunMetrics {
    pub detection_rate: f64,
    pub false_positive_rate: f64,
    pub ecs: f64,
    pub confusion: ConfusionCounts,
    pub auc: f64,
    pub events: u64,
}

impl RunMetrics {
    /// Compute the run metrics from confusion counts and scored decisions.
    pub fn compute(
        confusion: ConfusionCounts,
        scored: &[(f64, bool)],
    ) -> Result<Self, MetricsError> {
        let dr = detection_rate(&confusion)?;
        let fpr = false_positive_rate(&confusion)?;
        let ecs = ecs(fpr)?;
        let roc = roc_auc(scored)?;
        Ok(Self {
            detection_rate: dr,
            false_positive_rate: fpr,
            ecs,
            confusion,
            auc: roc.auc,
            events: confusion.total(),
        })
    }

    /// Compute metrics directly from logged decisions.
    pub fn from_records(records: &[DecisionRecord]) -> Result<Self, MetricsError> {
        RunMetrics::compute(confusion(records), &scores(records))
    }
}

/// Mean and sample standard deviation (n - 1 denominator).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

fn mean_std(values: &[f64]) -> MeanStd {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    MeanStd {
        mean,
        std: variance.sqrt(),
    }
}

/// Per-metric mean and sample standard deviation over seed runs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeedAggregate {
    pub n_seeds: usize,
    pub detection_rate: MeanStd,
    pub false_positive_rate: MeanStd,
    pub ecs: MeanStd,
    pub auc: MeanStd,
}

pub fn aggregate_seeds(per_seed: &[RunMetrics]) -> Result<SeedAggregate, MetricsError> {
    if per_seed.len() < 2 {
        return Err(MetricsError::TooFewRuns(per_seed.len()));
    }
    let collect = |f: fn(&RunMetrics) -> f64| per_seed.iter().map(f).collect::<Vec<f64>>();
    Ok(SeedAggregate {
        n_seeds: per_seed.len(),
        detection_rate: mean_std(&collect(|m| m.detection_rate)),
        false_positive_rate: mean_std(&collect(|m| m.false_positive_rate)),
        ecs: mean_std(&collect(|m| m.ecs)),
        auc: mean_std(&collect(|m| m.auc)),
    })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn detection_rate_cases() {
        assert_eq!(detection_rate(&ConfusionCounts::new(3000, 0, 0, 0)), Ok(1.0));
        assert_eq!(detection_rate(&ConfusionCounts::new(7, 0, 0, 3)), Ok(0.7));
        assert_eq!(detection_rate(&ConfusionCounts::new(0, 0, 0, 5)), Ok(0.0));
        assert_eq!(
            detection_rate(&ConfusionCounts::new(0, 1, 1, 0)),
            Err(MetricsError::NoAttacks)
        );
    }

    #[test]
    fn false_positive_rate_cases() {
        assert_eq!(
            false_positive_rate(&ConfusionCounts::new(0, 0, 7000, 0)),
            Ok(0.0)
        );
        assert_eq!(
            false_positive_rate(&ConfusionCounts::new(0, 15, 85, 0)),
            Ok(0.15)
        );
        assert_eq!(
            false_positive_rate(&ConfusionCounts::new(0, 30, 70, 0)),
            Ok(0.30)
        );
        assert_eq!(
            false_positive_rate(&ConfusionCounts::new(1, 0, 0, 1)),
            Err(MetricsError::NoLegitimate)
        );
    }

    #[test]
    fn ecs_cases() {
        assert_eq!(ecs(0.15), Ok(0.85));
        assert_eq!(ecs(0.0), Ok(1.0));
        assert_eq!(ecs(0.30), Ok(0.70));
        assert_eq!(ecs(-0.1), Err(MetricsError::FprOutOfRange(-0.1)));
        assert_eq!(ecs(1.5), Err(MetricsError::FprOutOfRange(1.5)));
    }

    #[test]
    fn separating_scores_give_auc_one() {
        let mut scored = vec![(3.0, true); 30];
        scored.extend(vec![(-2.0, false); 70]);
        let roc = roc_auc(&scored).unwrap();
        assert_eq!(roc.auc, 1.0);
        assert_eq!(roc.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(roc.points.last(), Some(&(1.0, 1.0)));
    }

    #[test]
    fn constant_scores_give_auc_half() {
        let scored = vec![(0.0, true), (0.0, false), (0.0, true), (0.0, false)];
        assert_eq!(roc_auc(&scored).unwrap().auc, 0.5);
    }

    #[test]
    fn inverted_scores_give_auc_zero() {
        let scored = vec![(1.0, true), (2.0, false), (1.0, true), (2.0, false)];
        assert_eq!(roc_auc(&scored).unwrap().auc, 0.0);
    }

    #[test]
    fn one_class_input_is_an_error() {
        assert_eq!(
            roc_auc(&[(1.0, true), (0.5, true)]),
            Err(MetricsError::OneClass)
        );
        assert!(roc_auc(&[]).is_err());
    }

    #[test]
    fn random_scores_hover_near_half_and_match_oracle() {
        let mut rng = derive_stream(3, "metrics/roc");
        let scored: Vec<(f64, bool)> = (0..10_000)
            .map(|_| (rng.random::<f64>(), rng.random::<f64>() < 0.3))
            .collect();
        let roc = roc_auc(&scored).unwrap();
        assert!((0.48..=0.52).contains(&roc.auc), "auc {}", roc.auc);
        let oracle = test_oracles::pairwise_auc(&scored);
        assert!((roc.auc - oracle).abs() < 1e-12);
    }

    #[test]
    fn roc_curve_is_monotone_and_anchored() {
        let mut rng = derive_stream(4, "metrics/roc-curve");
        // Coarse score grid forces plenty of ties.
        let scored: Vec<(f64, bool)> = (0..500)
            .map(|_| {
                (
                    f64::from(rng.random_range(0..7i32)) / 2.0,
                    rng.random::<f64>() < 0.4,
                )
            })
            .collect();
        let roc = roc_auc(&scored).unwrap();
        assert_eq!(roc.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(roc.points.last(), Some(&(1.0, 1.0)));
        for pair in roc.points.windows(2) {
            assert!(pair[1].0 >= pair[0].0);
            assert!(pair[1].1 >= pair[0].1);
        }
    }

    #[test]
    fn moving_average_cases() {
        assert_eq!(moving_average(&[4.0, 2.0, 6.0], 1), vec![4.0, 2.0, 6.0]);
        assert_eq!(
            moving_average(&[0.0, 1.0, 1.0, 1.0], 2),
            vec![0.0, 0.5, 1.0, 1.0]
        );
        assert_eq!(moving_average(&[3.0; 5], 3), vec![3.0; 5]);
        assert!(moving_average(&[], 4).is_empty());
    }

    #[test]
    fn aggregate_two_runs() {
        let run = |dr: f64| RunMetrics {
            detection_rate: dr,
            false_positive_rate: 0.1,
            ecs: 0.9,
            confusion: ConfusionCounts::new(1, 1, 1, 1),
            auc: 0.8,
            events: 4,
        };
        let aggregate = aggregate_seeds(&[run(0.70), run(0.72)]).unwrap();
        assert!((aggregate.detection_rate.mean - 0.71).abs() < 1e-15);
        // Hand derivation: variance = ((0.70-0.71)^2 + (0.72-0.71)^2) / 1.
        let expected_std = 0.0002f64.sqrt();
        assert!((aggregate.detection_rate.std - expected_std).abs() < 1e-12);
        assert_eq!(aggregate.false_positive_rate.std, 0.0);
        assert_eq!(aggregate.n_seeds, 2);
    }

    #[test]
    fn aggregate_identical_runs_has_zero_std() {
        let run = RunMetrics {
            detection_rate: 1.0,
            false_positive_rate: 0.0,
            ecs: 1.0,
            confusion: ConfusionCounts::new(3, 0, 7, 0),
            auc: 1.0,
            events: 10,
        };
        let aggregate = aggregate_seeds(&vec![run; 10]).unwrap();
        assert_eq!(aggregate.detection_rate.mean, 1.0);
        assert_eq!(aggregate.detection_rate.std, 0.0);
        assert_eq!(aggregate.ecs.std, 0.0);
    }

    #[test]
    fn aggregate_rejects_single_run() {
        let run = RunMetrics {
            detection_rate: 1.0,
            false_positive_rate: 0.0,
            ecs: 1.0,
            confusion: ConfusionCounts::new(1, 0, 1, 0),
            auc: 1.0,
            events: 2,
        };
        assert_eq!(aggregate_seeds(&[run]), Err(MetricsError::TooFewRuns(1)));
    }

    proptest! {
        /// Trapezoid AUC equals the pairwise rank oracle on any mixed input.
        #[test]
        fn auc_matches_pairwise_oracle(
            raw in prop::collection::vec((0u8..12, any::<bool>()), 2..200),
        ) {
            let mut scored: Vec<(f64, bool)> =
                raw.iter().map(|(s, b)| (f64::from(*s) / 4.0, *b)).collect();
            // Guarantee both classes are present.
            scored.push((0.25, true));
            scored.push((0.5, false));
            let roc = roc_auc(&scored).unwrap();
            let oracle = test_oracles::pairwise_auc(&scored);
            prop_assert!((roc.auc - oracle).abs() < 1e-12, "{} vs {}", roc.auc, oracle);
            prop_assert!((0.0..=1.0).contains(&roc.auc));
        }

        /// Moving averages stay within the series bounds.
        #[test]
        fn moving_average_preserves_bounds(
            series in prop::collection::vec(-100.0f64..100.0, 1..200),
            window in 1usize..50,
        ) {
            let out = moving_average(&series, window);
            prop_assert_eq!(out.len(), series.len());
            let lo = series.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = series.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for v in out {
                prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
            }
        }
    }
}
