//! Command-line workbench: the four experiment phases plus replay and
//! figure rendering.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use guardsim::config::RunConfig;
use guardsim::engine;
use guardsim::metrics;
use guardsim::oversight::{self, DecisionLog};
use guardsim::plot::{self, Series};
use guardsim::reports;

#[derive(Parser)]
#[command(
    name = "guardsim",
    version,
    about = "Deterministic simulation workbench for a governed reinforcement-learning network defender"
)]
struct Cli {
    /// Path to the key=value config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override run.seed from the config
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (overrides output.dir)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the rule-based baseline; writes its decision log and metrics
    Baseline,
    /// Train the learning agent; writes log, trace, compliance series, and Q-table
    Train,
    /// Evaluate a saved Q-table on unseen traffic
    Evaluate {
        /// Q-table file produced by `train`
        qtable: PathBuf,
    },
    /// Train and evaluate both arms across seeds; writes per-seed logs and a report
    Compare {
        /// Number of seeds (runs use seeds 0..N-1)
        #[arg(long, default_value_t = 10)]
        seeds: u32,
    },
    /// Recompute metrics from an exported decision log
    Replay {
        /// Decision-log CSV to audit
        csv: PathBuf,
    },
    /// Render a figure as SVG plus its plain-text data series
    Plot {
        /// Which figure to render
        #[arg(long, value_enum)]
        figure: Figure,
        /// Input files from earlier commands (trace, compliance, or log CSVs)
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Figure {
    /// Accuracy over training episodes (input: trace csv)
    Learning,
    /// Compliance over training episodes (inputs: 1-2 compliance csvs)
    Compliance,
    /// Confusion matrix of an evaluation run (input: eval log csv)
    Confusion,
    /// ROC curve of an evaluation run (input: eval log csv)
    Roc,
}

fn main() {
    // Die quietly when stdout is a closed pipe (e.g. `guardsim ... | head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let started = Instant::now();
    match cli.command {
        Command::Baseline => {
            let (config, out_dir) = load_config(&cli)?;
            cmd_baseline(&config, &out_dir)?;
            print_resources(started);
        }
        Command::Train => {
            let (config, out_dir) = load_config(&cli)?;
            cmd_train(&config, &out_dir)?;
            print_resources(started);
        }
        Command::Evaluate { ref qtable } => {
            let (config, out_dir) = load_config(&cli)?;
            cmd_evaluate(&config, &out_dir, qtable)?;
            print_resources(started);
        }
        Command::Compare { seeds } => {
            let (config, out_dir) = load_config(&cli)?;
            cmd_compare(&config, &out_dir, seeds)?;
            print_resources(started);
        }
        Command::Replay { ref csv } => cmd_replay(csv)?,
        Command::Plot { figure, ref inputs } => {
            let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            cmd_plot(figure, inputs, &out_dir)?;
        }
    }
    Ok(())
}

fn load_config(cli: &Cli) -> Result<(RunConfig, PathBuf)> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| anyhow!("missing required flag --config"))?;
    let mut config = RunConfig::load(path).map_err(|e| anyhow!("{e}"))?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let out_dir = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output_dir));
    Ok((config, out_dir))
}

fn write_file(out_dir: &Path, name: &str, content: &str) -> Result<PathBuf> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create output dir {}", out_dir.display()))?;
    let path = out_dir.join(name);
    fs::write(&path, content).with_context(|| format!("cannot write {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn export_log(out_dir: &Path, name: &str, log: &DecisionLog) -> Result<PathBuf> {
    write_file(out_dir, name, &oversight::export_csv_string(log))
}

fn print_metrics_line(label: &str, metrics: &metrics::RunMetrics) {
    println!(
        "{label}: DR {}%, FPR {}%, ECS {}%, AUC {:.2} ({} events)",
        reports::percent(metrics.detection_rate),
        reports::percent(metrics.false_positive_rate),
        reports::percent(metrics.ecs),
        metrics.auc,
        metrics.events
    );
}

fn cmd_baseline(config: &RunConfig, out_dir: &Path) -> Result<()> {
    let run_id = format!("baseline_seed{}", config.seed);
    let run = engine::evaluate_baseline(config, &run_id)?;
    print_metrics_line("baseline evaluation", &run.metrics);
    export_log(out_dir, &format!("{run_id}_eval.csv"), &run.log)?;
    write_file(
        out_dir,
        &format!("{run_id}_metrics.txt"),
        &reports::metrics_summary_text(&run.metrics),
    )?;
    Ok(())
}

fn cmd_train(config: &RunConfig, out_dir: &Path) -> Result<()> {
    let run_id = format!("train_seed{}", config.seed);
    let run = engine::train(config, &run_id)?;
    let final_accuracy = run
        .trace
        .episodes
        .last()
        .map(|e| e.accuracy)
        .unwrap_or_default();
    println!(
        "training complete: {} episodes x {} steps, final-episode accuracy {}%, governance interventions {}",
        config.episodes,
        config.steps_per_episode,
        reports::percent(final_accuracy),
        run.interventions
    );
    export_log(out_dir, &format!("{run_id}_log.csv"), &run.log)?;
    write_file(
        out_dir,
        &format!("{run_id}_trace.csv"),
        &reports::trace_file_text(&run.trace),
    )?;
    write_file(
        out_dir,
        &format!("{run_id}_compliance.csv"),
        &reports::compliance_file_text(&run.trace),
    )?;
    write_file(
        out_dir,
        &format!("{run_id}_qtable.txt"),
        &reports::qtable_file_text(&run.trace.final_q),
    )?;
    Ok(())
}

fn cmd_evaluate(config: &RunConfig, out_dir: &Path, qtable_path: &Path) -> Result<()> {
    let content = fs::read_to_string(qtable_path)
        .with_context(|| format!("cannot read q-table {}", qtable_path.display()))?;
    let q = reports::parse_qtable_file(&content)
        .map_err(|e| anyhow!("malformed q-table {}: {e}", qtable_path.display()))?;
    let run_id = format!("eval_seed{}", config.seed);
    let run = engine::evaluate(config, &q, &run_id)?;
    print_metrics_line("evaluation", &run.metrics);
    export_log(out_dir, &format!("{run_id}_log.csv"), &run.log)?;
    write_file(
        out_dir,
        &format!("{run_id}_metrics.txt"),
        &reports::metrics_summary_text(&run.metrics),
    )?;
    Ok(())
}

fn cmd_compare(config: &RunConfig, out_dir: &Path, seeds: u32) -> Result<()> {
    let report = engine::compare(config, seeds)?;
    for (seed, agentic_log, baseline_log) in &report.seed_logs {
        export_log(out_dir, &format!("compare_seed{seed}_agentic_eval.csv"), agentic_log)?;
        export_log(out_dir, &format!("compare_seed{seed}_baseline_eval.csv"), baseline_log)?;
    }
    let text = reports::comparison_report_text(&report);
    write_file(out_dir, "report.txt", &text)?;
    print!("{text}");
    Ok(())
}

fn cmd_replay(csv: &Path) -> Result<()> {
    let content =
        fs::read_to_string(csv).with_context(|| format!("cannot read {}", csv.display()))?;
    let log = oversight::import_csv_str(&content)
        .map_err(|e| anyhow!("{}: {e}", csv.display()))?;
    let metrics = oversight::replay(&log).map_err(|e| anyhow!("{}: {e}", csv.display()))?;
    print!("{}", reports::metrics_summary_text(&metrics));
    Ok(())
}

/// Parse a numeric CSV with a fixed header into rows of floats.
fn parse_numeric_csv(path: &Path, expected_header: &str) -> Result<Vec<Vec<f64>>> {
    let content =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut lines = content.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == expected_header => {}
        _ => bail!(
            "{}: expected header '{expected_header}'",
            path.display()
        ),
    }
    let mut rows = Vec::new();
    for (index, line) in lines {
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|field| {
                field.parse::<f64>().map_err(|e| {
                    anyhow!("{}: line {}: bad value '{field}': {e}", path.display(), index + 1)
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn import_log_file(path: &Path) -> Result<DecisionLog> {
    let content =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    oversight::import_csv_str(&content).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn cmd_plot(figure: Figure, inputs: &[PathBuf], out_dir: &Path) -> Result<()> {
    match figure {
        Figure::Learning => {
            let [input] = inputs else {
                bail!("learning figure takes exactly one trace csv");
            };
            let rows = parse_numeric_csv(input, "episode,accuracy,moving_avg,cum_reward")?;
            let series = vec![
                Series {
                    label: "accuracy".to_string(),
                    points: rows.iter().map(|r| (r[0], r[1])).collect(),
                },
                Series {
                    label: "moving average".to_string(),
                    points: rows.iter().map(|r| (r[0], r[2])).collect(),
                },
            ];
            let svg = plot::line_chart_svg(
                "Detection accuracy over training episodes",
                "episode",
                "accuracy",
                &series,
                (0.0, 1.0),
            );
            write_file(out_dir, "learning.svg", &svg)?;
            write_file(
                out_dir,
                "learning_data.txt",
                &plot::data::series_blocks("episode,value", &series),
            )?;
        }
        Figure::Compliance => {
            if inputs.is_empty() || inputs.len() > 2 {
                bail!("compliance figure takes one or two compliance csvs");
            }
            let mut series = Vec::new();
            for input in inputs {
                let rows = parse_numeric_csv(input, "episode,ecs,moving_avg")?;
                series.push(Series {
                    label: file_stem(input),
                    points: rows.iter().map(|r| (r[0], r[2])).collect(),
                });
            }
            let svg = plot::line_chart_svg(
                "Ethical compliance over training episodes",
                "episode",
                "compliance",
                &series,
                (0.0, 1.0),
            );
            write_file(out_dir, "compliance.svg", &svg)?;
            write_file(
                out_dir,
                "compliance_data.txt",
                &plot::data::series_blocks("episode,value", &series),
            )?;
        }
        Figure::Confusion => {
            let [input] = inputs else {
                bail!("confusion figure takes exactly one eval log csv");
            };
            let log = import_log_file(input)?;
            let counts = metrics::confusion(log.records());
            write_file(out_dir, "confusion.svg", &plot::confusion_svg(&counts))?;
            write_file(
                out_dir,
                "confusion_data.txt",
                &plot::data::confusion_matrix(&counts),
            )?;
        }
        Figure::Roc => {
            let [input] = inputs else {
                bail!("roc figure takes exactly one eval log csv");
            };
            let log = import_log_file(input)?;
            let curve = metrics::roc_auc(&metrics::scores(log.records()))
                .map_err(|e| anyhow!("{}: {e}", input.display()))?;
            write_file(out_dir, "roc.svg", &plot::roc_svg(&curve))?;
            write_file(out_dir, "roc_data.txt", &plot::data::roc_points(&curve))?;
        }
    }
    Ok(())
}

fn print_resources(started: Instant) {
    let elapsed = started.elapsed().as_secs_f64();
    match peak_rss_kb() {
        Some(kb) => println!("elapsed {elapsed:.2} s, peak memory ~{} MB", kb / 1024),
        None => println!("elapsed {elapsed:.2} s"),
    }
}

/// Peak resident set size from /proc on Linux; best-effort elsewhere.
fn peak_rss_kb() -> Option<u64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    for line in status.lines() {
        if let Some(rest) = line.strip_prefix("VmHWM:") {
            return rest.trim().trim_end_matches(" kB").trim().parse().ok();
        }
    }
    None
}
