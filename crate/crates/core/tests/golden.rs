//! Golden-file tests: frozen outputs of a small seeded run. These pin the
//! rng stack, the stream derivation, and every serialization format; any
//! drift in those layers shows up here as a byte diff.

use guardsim::config::RunConfig;
use guardsim::engine;
use guardsim::oversight::{export_csv_string, import_csv_str, replay};
use guardsim::reports;

fn golden_config() -> RunConfig {
    RunConfig {
        seed: 7,
        episodes: 2,
        steps_per_episode: 10,
        eval_events: 40,
        ..RunConfig::default()
    }
}

#[test]
fn train_log_matches_golden_bytes() {
    let run = engine::train(&golden_config(), "train_seed7").unwrap();
    let expected = include_str!("golden/train_small.csv");
    assert_eq!(export_csv_string(&run.log), expected);
}

#[test]
fn qtable_file_matches_golden_bytes() {
    let run = engine::train(&golden_config(), "train_seed7").unwrap();
    let expected = include_str!("golden/qtable_small.txt");
    assert_eq!(reports::qtable_file_text(&run.trace.final_q), expected);
}

#[test]
fn eval_log_matches_golden_bytes() {
    let config = golden_config();
    let trained = engine::train(&config, "train_seed7").unwrap();
    let run = engine::evaluate(&config, &trained.trace.final_q, "eval_seed7").unwrap();
    let expected = include_str!("golden/eval_small.csv");
    assert_eq!(export_csv_string(&run.log), expected);
}

#[test]
fn golden_logs_import_and_replay() {
    let log = import_csv_str(include_str!("golden/eval_small.csv")).unwrap();
    assert_eq!(log.len(), 40);
    let metrics = replay(&log).unwrap();
    assert_eq!(metrics.events, 40);
    assert!(metrics.detection_rate >= 0.0 && metrics.detection_rate <= 1.0);
}
