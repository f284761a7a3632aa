//! End-to-end tests of the command-line interface: the four experiment
//! phases, replay auditing, figure rendering, error reporting, and
//! byte-level determinism of the emitted files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn guardsim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_guardsim"))
}

fn write_config(dir: &Path, content: &str) -> PathBuf {
    let path = dir.join("run.conf");
    fs::write(&path, content).unwrap();
    path
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

/// Small but non-trivial run so the full pipeline stays fast.
const SMALL: &str = "run.episodes = 80\nrun.steps_per_episode = 60\nrun.eval_events = 3000\n";

#[test]
fn four_phase_flow_produces_expected_files() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");

    let baseline = guardsim()
        .args(["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "baseline"])
        .output()
        .unwrap();
    assert!(baseline.status.success(), "{}", stderr_of(&baseline));
    assert!(out.join("baseline_seed42_eval.csv").is_file());
    let metrics = fs::read_to_string(out.join("baseline_seed42_metrics.txt")).unwrap();
    assert!(metrics.contains("detection_rate=0.7"), "{metrics}");

    let train = guardsim()
        .args(["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "train"])
        .output()
        .unwrap();
    assert!(train.status.success(), "{}", stderr_of(&train));
    for file in [
        "train_seed42_log.csv",
        "train_seed42_trace.csv",
        "train_seed42_compliance.csv",
        "train_seed42_qtable.txt",
    ] {
        assert!(out.join(file).is_file(), "missing {file}");
    }
    let trace = fs::read_to_string(out.join("train_seed42_trace.csv")).unwrap();
    assert_eq!(trace.lines().next(), Some("episode,accuracy,moving_avg,cum_reward"));
    assert_eq!(trace.lines().count(), 81); // header + one row per episode

    let qtable = out.join("train_seed42_qtable.txt");
    let evaluate = guardsim()
        .args([
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "evaluate",
            qtable.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(evaluate.status.success(), "{}", stderr_of(&evaluate));
    let eval_metrics = fs::read_to_string(out.join("eval_seed42_metrics.txt")).unwrap();
    assert!(eval_metrics.contains("detection_rate=1.000000"), "{eval_metrics}");
    assert!(eval_metrics.contains("false_positive_rate=0.000000"));
    assert!(eval_metrics.contains("ecs=1.000000"));
    assert!(eval_metrics.contains("auc=1.000000"));

    let compare = guardsim()
        .args([
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "compare",
            "--seeds",
            "3",
        ])
        .output()
        .unwrap();
    assert!(compare.status.success(), "{}", stderr_of(&compare));
    assert!(out.join("report.txt").is_file());
    for seed in 0..3 {
        assert!(out.join(format!("compare_seed{seed}_agentic_eval.csv")).is_file());
        assert!(out.join(format!("compare_seed{seed}_baseline_eval.csv")).is_file());
    }
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("100.0 +/- 0.00"), "{report}");
}

#[test]
fn identical_config_and_seed_give_byte_identical_outputs() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let run = guardsim()
            .args(["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "train"])
            .output()
            .unwrap();
        assert!(run.status.success(), "{}", stderr_of(&run));
    }
    for file in [
        "train_seed42_log.csv",
        "train_seed42_trace.csv",
        "train_seed42_compliance.csv",
        "train_seed42_qtable.txt",
    ] {
        let a = fs::read(out_a.join(file)).unwrap();
        let b = fs::read(out_b.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between reruns");
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let run = guardsim()
        .args([
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "7",
            "baseline",
        ])
        .output()
        .unwrap();
    assert!(run.status.success(), "{}", stderr_of(&run));
    assert!(out.join("baseline_seed7_eval.csv").is_file());
    let csv = fs::read_to_string(out.join("baseline_seed7_eval.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("baseline_seed7,7,eval,"));
}

#[test]
fn unknown_config_key_fails_naming_the_key() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), "agnet.alpha = 0.1\n");
    let run = guardsim()
        .args(["--config", config.to_str().unwrap(), "baseline"])
        .output()
        .unwrap();
    assert!(!run.status.success());
    let err = stderr_of(&run);
    assert!(err.contains("agnet.alpha"), "{err}");
    assert_eq!(err.lines().count(), 1, "expected a single-line error: {err}");
}

#[test]
fn missing_config_flag_fails() {
    let run = guardsim().arg("train").output().unwrap();
    assert!(!run.status.success());
    assert!(stderr_of(&run).contains("--config"));
}

#[test]
fn malformed_qtable_is_rejected() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), SMALL);
    let bad = dir.path().join("qtable.txt");
    fs::write(&bad, "normal,0.0\n").unwrap();
    let run = guardsim()
        .args([
            "--config",
            config.to_str().unwrap(),
            "evaluate",
            bad.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!run.status.success());
    assert!(stderr_of(&run).contains("q-table"));
}

#[test]
fn replay_matches_the_run_summary() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let baseline = guardsim()
        .args(["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "baseline"])
        .output()
        .unwrap();
    assert!(baseline.status.success());

    let replay = guardsim()
        .args(["replay", out.join("baseline_seed42_eval.csv").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(replay.status.success(), "{}", stderr_of(&replay));
    let summary = fs::read_to_string(out.join("baseline_seed42_metrics.txt")).unwrap();
    assert_eq!(stdout_of(&replay), summary);
}

#[test]
fn replay_rejects_tampered_and_truncated_logs() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let baseline = guardsim()
        .args(["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "baseline"])
        .output()
        .unwrap();
    assert!(baseline.status.success());
    let log_path = out.join("baseline_seed42_eval.csv");
    let original = fs::read_to_string(&log_path).unwrap();

    // Flip one reward field: row 2 keeps its shape but breaks consistency.
    let mut lines: Vec<String> = original.lines().map(String::from).collect();
    let fields: Vec<&str> = lines[1].split(',').collect();
    let mut tampered_fields: Vec<String> = fields.iter().map(|s| s.to_string()).collect();
    tampered_fields[14] = if tampered_fields[14] == "1" { "-1".into() } else { "1".into() };
    lines[1] = tampered_fields.join(",");
    let tampered_path = dir.path().join("tampered.csv");
    fs::write(&tampered_path, format!("{}\n", lines.join("\n"))).unwrap();
    let tampered = guardsim()
        .args(["replay", tampered_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!tampered.status.success());
    let err = stderr_of(&tampered);
    assert!(err.contains("line 2"), "{err}");

    // Truncate a row mid-field: parse error names the line.
    let truncated_path = dir.path().join("truncated.csv");
    let mut truncated: Vec<&str> = original.lines().collect();
    let cut = truncated[3];
    let cut = &cut[..cut.len() / 2];
    truncated[3] = cut;
    fs::write(&truncated_path, truncated.join("\n")).unwrap();
    let run = guardsim()
        .args(["replay", truncated_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!run.status.success());
    assert!(stderr_of(&run).contains("line 4"), "{}", stderr_of(&run));
}

#[test]
fn plot_renders_all_figures_deterministically() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    for command in [vec!["train"], vec!["compare", "--seeds", "2"]] {
        let mut args = vec![
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ];
        args.extend(command);
        let run = guardsim().args(&args).output().unwrap();
        assert!(run.status.success(), "{}", stderr_of(&run));
    }

    let trace = out.join("train_seed42_trace.csv");
    let compliance = out.join("train_seed42_compliance.csv");
    let eval_log = out.join("compare_seed0_agentic_eval.csv");

    let figures: [(&str, Vec<&Path>); 4] = [
        ("learning", vec![&trace]),
        ("compliance", vec![&compliance]),
        ("confusion", vec![&eval_log]),
        ("roc", vec![&eval_log]),
    ];
    for (figure, inputs) in &figures {
        for target in ["p1", "p2"] {
            let plot_dir = dir.path().join(target);
            let mut args = vec![
                "--out".to_string(),
                plot_dir.to_str().unwrap().to_string(),
                "plot".to_string(),
                "--figure".to_string(),
                figure.to_string(),
            ];
            args.extend(inputs.iter().map(|p| p.to_str().unwrap().to_string()));
            let run = guardsim().args(&args).output().unwrap();
            assert!(run.status.success(), "{figure}: {}", stderr_of(&run));
        }
        for name in [format!("{figure}.svg"), format!("{figure}_data.txt")] {
            let a = fs::read(dir.path().join("p1").join(&name)).unwrap();
            let b = fs::read(dir.path().join("p2").join(&name)).unwrap();
            assert_eq!(a, b, "{name} differs between reruns");
        }
    }

    let roc_svg = fs::read_to_string(dir.path().join("p1/roc.svg")).unwrap();
    assert!(roc_svg.contains("AUC = 1.00"), "{roc_svg}");
    let confusion_data = fs::read_to_string(dir.path().join("p1/confusion_data.txt")).unwrap();
    let mut rows = confusion_data.lines().skip(1);
    let top: Vec<&str> = rows.next().unwrap().split(',').collect();
    let bottom: Vec<&str> = rows.next().unwrap().split(',').collect();
    assert_eq!(top[1], "0", "fn cell");
    assert_eq!(bottom[0], "0", "fp cell");
}

#[test]
fn plot_rejects_wrong_input_counts() {
    let dir = TempDir::new().unwrap();
    let run = guardsim()
        .args(["plot", "--figure", "learning", "a.csv", "b.csv"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(!run.status.success());
    assert!(stderr_of(&run).contains("exactly one"));
}

#[test]
fn governance_disabled_arm_runs_from_config() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        &format!("{SMALL}governance.enabled = false\n"),
    );
    let out = dir.path().join("out");
    let run = guardsim()
        .args(["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "train"])
        .output()
        .unwrap();
    assert!(run.status.success(), "{}", stderr_of(&run));
    let log = fs::read_to_string(out.join("train_seed42_log.csv")).unwrap();
    assert!(log.lines().skip(1).all(|l| l.split(',').nth(11) == Some("n/a")));
}
