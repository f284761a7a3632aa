//! Episode loop and the four-phase experimental procedure.
//!
//! Each step flows strictly through: generate event -> observe -> check
//! registered override (which bypasses agent and governance) -> agent
//! proposes -> governance filters -> reward and outcome -> oversight log ->
//! outcome label fed back to governance -> Q-update (training only, on the
//! executed action, bootstrapping on the next event's class).
//!
//! Streams are derived from (seed, purpose) so evaluation traffic is unseen
//! during training yet reproducible, and so the baseline arm of a
//! comparison consumes the identical evaluation event sequence as the
//! learning arm (common random numbers). The baseline arm always runs
//! ungoverned: it models the traditional system the governed agent is
//! compared against.

use thiserror::Error;

use crate::agents::{self, Action, QTable};
use crate::config::RunConfig;
use crate::governance::{self, Decision, GovernancePolicy, GovernanceState};
use crate::metrics::{self, ConfusionCounts, MetricsError, RunMetrics, SeedAggregate};
use crate::oversight::{
    round6, AppendError, DecisionLog, DecisionRecord, Outcome, OverrideSchedule, Phase, VerdictTag,
};
use crate::rng::derive_stream;
use crate::topology::default_topology;
use crate::traffic::{TrafficClass, TrafficEvent, TrafficGenerator};

const TAG_TRAFFIC_TRAIN: &str = "traffic/train";
const TAG_TRAFFIC_EVAL: &str = "traffic/eval";
const TAG_AGENT_TRAIN: &str = "agent/train";
const TAG_AGENT_EVAL: &str = "agent/eval";
const TAG_BASELINE: &str = "baseline/decide";

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("oversight rejected a record; this is an engine bug: {0}")]
    Log(#[from] AppendError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("q-table contains non-finite values")]
    NonFiniteTable,
    #[error("compare needs at least 2 seeds, got {0}")]
    TooFewSeeds(u32),
}

/// Per-episode training statistics. `cumulative_reward` is the running
/// total since the start of the run. `policy_ecs` is the compliance of the
/// episode-end greedy policy: 1.0 when it allows legitimate traffic, 0.0
/// when it would block it. Behavioral false positives (exploration
/// included) are tracked separately in `false_positives` / `legitimate`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeStats {
    pub episode: u32,
    pub correct: u32,
    pub total: u32,
    pub accuracy: f64,
    pub cumulative_reward: i64,
    pub false_positives: u32,
    pub legitimate: u32,
    pub policy_ecs: f64,
    pub policy: [Action; TrafficClass::COUNT],
}

/// Episode series plus the final table.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingTrace {
    pub episodes: Vec<EpisodeStats>,
    pub final_q: QTable,
}

/// Output of a training run.
#[derive(Clone, Debug)]
pub struct TrainRun {
    pub trace: TrainingTrace,
    pub log: DecisionLog,
    pub interventions: u64,
}

/// Output of an evaluation run. `max_windowed_fpr_after_fill` is the
/// largest windowed FPR observed at any decision point once the governance
/// window had filled; `None` when governance was disabled or never filled.
#[derive(Clone, Debug)]
pub struct EvalRun {
    pub metrics: RunMetrics,
    pub log: DecisionLog,
    pub interventions: u64,
    pub max_windowed_fpr_after_fill: Option<f64>,
}

/// Metrics of both arms for one seed, plus the learning arm's trace.
#[derive(Clone, Debug)]
pub struct SeedComparison {
    pub seed: u64,
    pub agentic: RunMetrics,
    pub baseline: RunMetrics,
    pub trace: TrainingTrace,
}

/// Multi-seed comparison: per-seed metrics, cross-seed aggregates, and the
/// per-seed evaluation logs of both arms (in seed order).
#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub per_seed: Vec<SeedComparison>,
    pub agentic: SeedAggregate,
    pub baseline: SeedAggregate,
    pub seed_logs: Vec<(u64, DecisionLog, DecisionLog)>,
}

/// Shared per-run state threaded through every processed event.
struct Pipeline {
    run_id: String,
    seed: u64,
    phase: Phase,
    governance: Option<(GovernancePolicy, GovernanceState)>,
    overrides: OverrideSchedule,
    log: DecisionLog,
    confusion: ConfusionCounts,
    scores: Vec<(f64, bool)>,
    max_fpr_after_fill: Option<f64>,
}

struct StepResult {
    final_action: Action,
    reward: i32,
    outcome: Outcome,
}

impl Pipeline {
    fn new(
        run_id: &str,
        seed: u64,
        phase: Phase,
        governance: Option<GovernancePolicy>,
        overrides: Option<OverrideSchedule>,
    ) -> Self {
        Self {
            run_id: run_id.to_string(),
            seed,
            phase,
            governance: governance.map(|p| (p, GovernanceState::for_policy(&p))),
            overrides: overrides.unwrap_or_default(),
            log: DecisionLog::new(),
            confusion: ConfusionCounts::default(),
            scores: Vec::new(),
            max_fpr_after_fill: None,
        }
    }

    fn interventions(&self) -> u64 {
        self.governance.as_ref().map_or(0, |(_, s)| s.interventions())
    }

    /// Run one event through override check, proposal, governance, logging,
    /// and the governance feedback path. `propose` is only invoked when no
    /// override claims the event, so overridden events consume no agent
    /// randomness.
    fn process_event<F>(
        &mut self,
        episode: u32,
        event: TrafficEvent,
        q_values: (f64, f64),
        propose: F,
    ) -> Result<StepResult, EngineError>
    where
        F: FnOnce() -> Action,
    {
        let observed = agents::observe(&event);

        let (proposed, verdict, human_override, final_action) =
            if let Some(forced) = self.overrides.take(event.event_id) {
                (forced, VerdictTag::NotApplicable, Some(forced), forced)
            } else {
                let proposed = propose();
                match self.governance.as_mut() {
                    Some((policy, state)) => {
                        let verdict = governance::evaluate(policy, state, proposed);
                        let tag = match verdict.decision {
                            Decision::Approved => VerdictTag::Approved,
                            Decision::Vetoed => VerdictTag::Vetoed,
                        };
                        (proposed, tag, None, verdict.final_action)
                    }
                    None => (proposed, VerdictTag::NotApplicable, None, proposed),
                }
            };

        let reward = agents::reward(event.class, final_action);
        let outcome = Outcome::from_decision(event.class, final_action);
        self.log.append(DecisionRecord {
            run_id: self.run_id.clone(),
            seed: self.seed,
            phase: self.phase,
            episode,
            step: event.step,
            event_id: event.event_id,
            true_class: event.class,
            source: event.source,
            destination: event.destination,
            observed_state: observed,
            proposed_action: proposed,
            governance_verdict: verdict,
            human_override,
            final_action,
            reward,
            outcome,
            q_allow: q_values.0,
            q_block: q_values.1,
        })?;

        if let Some((_, state)) = self.governance.as_mut() {
            governance::record_outcome(state, event.class, final_action);
            if state.is_window_full() {
                let fpr = state.windowed_fpr();
                self.max_fpr_after_fill =
                    Some(self.max_fpr_after_fill.map_or(fpr, |m| m.max(fpr)));
            }
        }

        self.confusion.record(outcome);
        self.scores
            .push((q_values.1 - q_values.0, event.class.is_malicious()));

        Ok(StepResult {
            final_action,
            reward,
            outcome,
        })
    }
}

fn governance_for(config: &RunConfig) -> Option<GovernancePolicy> {
    config.governance_enabled.then_some(config.governance)
}

/// Train from a zero-initialized table.
pub fn train(config: &RunConfig, run_id: &str) -> Result<TrainRun, EngineError> {
    train_from(config, run_id, QTable::new(), None)
}

/// Train starting from a supplied table, with optional pre-registered
/// overrides. Learning updates use the executed action and realized reward,
/// so governance vetoes are part of what the agent experiences.
pub fn train_from(
    config: &RunConfig,
    run_id: &str,
    initial_q: QTable,
    overrides: Option<OverrideSchedule>,
) -> Result<TrainRun, EngineError> {
    if !initial_q.is_finite() {
        return Err(EngineError::NonFiniteTable);
    }
    let mut generator = TrafficGenerator::new(
        derive_stream(config.seed, TAG_TRAFFIC_TRAIN),
        default_topology(),
        config.mix,
    );
    let mut agent_rng = derive_stream(config.seed, TAG_AGENT_TRAIN);
    let mut q = initial_q;
    let mut pipeline = Pipeline::new(
        run_id,
        config.seed,
        Phase::Train,
        governance_for(config),
        overrides,
    );

    let mut episodes = Vec::with_capacity(config.episodes as usize);
    let mut cumulative_reward: i64 = 0;
    // One-event lookahead: the update bootstraps on the next event's class,
    // which continues across episode boundaries.
    let mut pending = generator.next_event(0);
    for episode in 0..config.episodes {
        let mut correct = 0u32;
        let mut false_positives = 0u32;
        let mut legitimate = 0u32;
        for step in 0..config.steps_per_episode {
            let event = pending;
            let successor_step = if step + 1 == config.steps_per_episode {
                0
            } else {
                step + 1
            };
            pending = generator.next_event(successor_step);

            let state = agents::observe(&event);
            let q_values = (
                round6(q.get(state, Action::Allow)),
                round6(q.get(state, Action::Block)),
            );
            let event_class = event.class;
            let epsilon = config.q_params.epsilon_train;
            let result = pipeline.process_event(episode, event, q_values, || {
                agents::select_action(&q, state, epsilon, &mut agent_rng)
            })?;

            q.update(
                state,
                result.final_action,
                result.reward,
                pending.class,
                &config.q_params,
            );

            cumulative_reward += i64::from(result.reward);
            if result.reward > 0 {
                correct += 1;
            }
            if event_class == TrafficClass::Normal {
                legitimate += 1;
                if result.outcome == Outcome::FalsePositive {
                    false_positives += 1;
                }
            }
        }
        let policy = q.greedy_policy();
        let policy_ecs = if policy[TrafficClass::Normal.index()] == Action::Allow {
            1.0
        } else {
            0.0
        };
        episodes.push(EpisodeStats {
            episode,
            correct,
            total: config.steps_per_episode,
            accuracy: f64::from(correct) / f64::from(config.steps_per_episode),
            cumulative_reward,
            false_positives,
            legitimate,
            policy_ecs,
            policy,
        });
    }

    Ok(TrainRun {
        trace: TrainingTrace {
            episodes,
            final_q: q,
        },
        interventions: pipeline.interventions(),
        log: pipeline.log,
    })
}

/// Greedy (or epsilon_eval-noisy) evaluation of a trained table on a fresh
/// event stream. Learning is off; every decision is logged with phase=eval.
pub fn evaluate(config: &RunConfig, q: &QTable, run_id: &str) -> Result<EvalRun, EngineError> {
    evaluate_with_overrides(config, q, run_id, None)
}

pub fn evaluate_with_overrides(
    config: &RunConfig,
    q: &QTable,
    run_id: &str,
    overrides: Option<OverrideSchedule>,
) -> Result<EvalRun, EngineError> {
    if !q.is_finite() {
        return Err(EngineError::NonFiniteTable);
    }
    let mut generator = TrafficGenerator::new(
        derive_stream(config.seed, TAG_TRAFFIC_EVAL),
        default_topology(),
        config.mix,
    );
    let mut agent_rng = derive_stream(config.seed, TAG_AGENT_EVAL);
    let mut pipeline = Pipeline::new(
        run_id,
        config.seed,
        Phase::Eval,
        governance_for(config),
        overrides,
    );

    for index in 0..config.eval_events {
        let event = generator.next_event(index);
        let state = agents::observe(&event);
        let q_values = (
            round6(q.get(state, Action::Allow)),
            round6(q.get(state, Action::Block)),
        );
        let epsilon = config.q_params.epsilon_eval;
        pipeline.process_event(0, event, q_values, || {
            agents::select_action(q, state, epsilon, &mut agent_rng)
        })?;
    }

    let metrics = RunMetrics::compute(pipeline.confusion, &pipeline.scores)?;
    Ok(EvalRun {
        metrics,
        interventions: pipeline.interventions(),
        max_windowed_fpr_after_fill: pipeline.max_fpr_after_fill,
        log: pipeline.log,
    })
}

/// Evaluate the rule-based baseline on the same evaluation stream the
/// learning agent would see for this seed. The baseline has no Q-table, so
/// its logged q values and margin scores are all zero, and it runs without
/// governance.
pub fn evaluate_baseline(config: &RunConfig, run_id: &str) -> Result<EvalRun, EngineError> {
    let mut generator = TrafficGenerator::new(
        derive_stream(config.seed, TAG_TRAFFIC_EVAL),
        default_topology(),
        config.mix,
    );
    let mut baseline_rng = derive_stream(config.seed, TAG_BASELINE);
    let mut pipeline = Pipeline::new(run_id, config.seed, Phase::Eval, None, None);

    for index in 0..config.eval_events {
        let event = generator.next_event(index);
        let params = config.baseline;
        let event_ref = event.clone();
        pipeline.process_event(0, event, (0.0, 0.0), || {
            agents::baseline_decide(&params, &event_ref, &mut baseline_rng)
        })?;
    }

    let metrics = RunMetrics::compute(pipeline.confusion, &pipeline.scores)?;
    Ok(EvalRun {
        metrics,
        interventions: pipeline.interventions(),
        max_windowed_fpr_after_fill: pipeline.max_fpr_after_fill,
        log: pipeline.log,
    })
}

/// Train-and-evaluate the learning arm and evaluate the baseline arm for
/// seeds `0..n_seeds`, on identical per-seed evaluation streams, and
/// aggregate the per-seed metrics.
pub fn compare(config: &RunConfig, n_seeds: u32) -> Result<ComparisonReport, EngineError> {
    if n_seeds < 2 {
        return Err(EngineError::TooFewSeeds(n_seeds));
    }
    let mut per_seed = Vec::with_capacity(n_seeds as usize);
    let mut seed_logs = Vec::with_capacity(n_seeds as usize);
    for seed in 0..u64::from(n_seeds) {
        let seed_config = RunConfig {
            seed,
            ..config.clone()
        };
        let trained = train(&seed_config, &format!("compare-seed{seed}-train"))?;
        let agentic = evaluate(
            &seed_config,
            &trained.trace.final_q,
            &format!("compare-seed{seed}-agentic"),
        )?;
        let baseline = evaluate_baseline(&seed_config, &format!("compare-seed{seed}-baseline"))?;
        per_seed.push(SeedComparison {
            seed,
            agentic: agentic.metrics.clone(),
            baseline: baseline.metrics.clone(),
            trace: trained.trace,
        });
        seed_logs.push((seed, agentic.log, baseline.log));
    }
    let agentic_metrics: Vec<RunMetrics> = per_seed.iter().map(|s| s.agentic.clone()).collect();
    let baseline_metrics: Vec<RunMetrics> = per_seed.iter().map(|s| s.baseline.clone()).collect();
    Ok(ComparisonReport {
        agentic: metrics::aggregate_seeds(&agentic_metrics)?,
        baseline: metrics::aggregate_seeds(&baseline_metrics)?,
        per_seed,
        seed_logs,
    })
}
