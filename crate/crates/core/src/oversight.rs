//! Human oversight layer: an append-only decision log with bit-exact CSV
//! export/import, forward-only override injection, and replay-based audit.
//!
//! The CSV contract is fixed: 18 columns in a fixed order, reals with
//! exactly six decimal places, lowercase enum tokens, single LF line
//! endings, UTF-8, mandatory header. Records store their real fields
//! already rounded to six decimals so that export -> import reproduces the
//! log field-for-field.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{self, Read, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::agents::{reward, Action};
use crate::metrics::{MetricsError, RunMetrics};
use crate::traffic::TrafficClass;

/// Fixed CSV header; the column order is part of the contract.
pub const CSV_HEADER: &str = "run_id,seed,phase,episode,step,event_id,true_class,source,destination,observed_state,proposed_action,governance_verdict,human_override,final_action,reward,outcome,q_allow,q_block";

const CSV_COLUMNS: usize = 18;

/// Round to six decimal places; the serialized precision of every real
/// field. Negative zero normalizes to zero so formatting stays stable.
pub fn round6(x: f64) -> f64 {
    let rounded = (x * 1e6).round() / 1e6;
    if rounded == 0.0 {
        0.0
    } else {
        rounded
    }
}

/// Format a real with exactly six decimals, '.' separator, no exponent.
pub fn format_real(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.6}")
}

/// Run phase a record was produced in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Train,
    Eval,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Train => write!(f, "train"),
            Phase::Eval => write!(f, "eval"),
        }
    }
}

impl FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Phase::Train),
            "eval" => Ok(Phase::Eval),
            other => Err(format!("unknown phase '{other}'")),
        }
    }
}

/// Governance column value; `NotApplicable` marks events where governance
/// was bypassed (overridden or disabled).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerdictTag {
    Approved,
    Vetoed,
    NotApplicable,
}

impl fmt::Display for VerdictTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerdictTag::Approved => write!(f, "approved"),
            VerdictTag::Vetoed => write!(f, "vetoed"),
            VerdictTag::NotApplicable => write!(f, "n/a"),
        }
    }
}

impl FromStr for VerdictTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "approved" => Ok(VerdictTag::Approved),
            "vetoed" => Ok(VerdictTag::Vetoed),
            "n/a" => Ok(VerdictTag::NotApplicable),
            other => Err(format!("unknown verdict '{other}'")),
        }
    }
}

/// Classification outcome of a finalized decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    TruePositive,
    FalsePositive,
    TrueNegative,
    FalseNegative,
}

impl Outcome {
    /// The outcome implied by ground truth and the executed action.
    pub fn from_decision(true_class: TrafficClass, final_action: Action) -> Outcome {
        match (true_class.is_malicious(), final_action) {
            (true, Action::Block) => Outcome::TruePositive,
            (false, Action::Block) => Outcome::FalsePositive,
            (false, Action::Allow) => Outcome::TrueNegative,
            (true, Action::Allow) => Outcome::FalseNegative,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::TruePositive => write!(f, "tp"),
            Outcome::FalsePositive => write!(f, "fp"),
            Outcome::TrueNegative => write!(f, "tn"),
            Outcome::FalseNegative => write!(f, "fn"),
        }
    }
}

impl FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tp" => Ok(Outcome::TruePositive),
            "fp" => Ok(Outcome::FalsePositive),
            "tn" => Ok(Outcome::TrueNegative),
            "fn" => Ok(Outcome::FalseNegative),
            other => Err(format!("unknown outcome '{other}'")),
        }
    }
}

/// Full audit row for one processed event.
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionRecord {
    pub run_id: String,
    pub seed: u64,
    pub phase: Phase,
    pub episode: u32,
    pub step: u32,
    pub event_id: u64,
    pub true_class: TrafficClass,
    pub source: String,
    pub destination: String,
    pub observed_state: TrafficClass,
    pub proposed_action: Action,
    pub governance_verdict: VerdictTag,
    pub human_override: Option<Action>,
    pub final_action: Action,
    pub reward: i32,
    pub outcome: Outcome,
    pub q_allow: f64,
    pub q_block: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum RecordIssue {
    #[error("event {event_id}: outcome {found} inconsistent with ({class}, {action})")]
    OutcomeMismatch {
        event_id: u64,
        found: String,
        class: TrafficClass,
        action: Action,
    },
    #[error("event {event_id}: reward {found} inconsistent with ({class}, {action})")]
    RewardMismatch {
        event_id: u64,
        found: i32,
        class: TrafficClass,
        action: Action,
    },
    #[error("event {event_id}: final action differs from the human override")]
    OverrideMismatch { event_id: u64 },
    #[error("event {event_id}: {field} not representable at six decimals")]
    UnroundedReal { event_id: u64, field: &'static str },
}

impl DecisionRecord {
    /// Check the internal consistency rules every record must satisfy.
    pub fn validate(&self) -> Result<(), RecordIssue> {
        let expected_outcome = Outcome::from_decision(self.true_class, self.final_action);
        if self.outcome != expected_outcome {
            return Err(RecordIssue::OutcomeMismatch {
                event_id: self.event_id,
                found: self.outcome.to_string(),
                class: self.true_class,
                action: self.final_action,
            });
        }
        let expected_reward = reward(self.true_class, self.final_action);
        if self.reward != expected_reward {
            return Err(RecordIssue::RewardMismatch {
                event_id: self.event_id,
                found: self.reward,
                class: self.true_class,
                action: self.final_action,
            });
        }
        if let Some(override_action) = self.human_override {
            if self.final_action != override_action {
                return Err(RecordIssue::OverrideMismatch {
                    event_id: self.event_id,
                });
            }
        }
        for (field, value) in [("q_allow", self.q_allow), ("q_block", self.q_block)] {
            if !value.is_finite() || value != round6(value) {
                return Err(RecordIssue::UnroundedReal {
                    event_id: self.event_id,
                    field,
                });
            }
        }
        Ok(())
    }

    fn to_csv_row(&self) -> String {
        let override_field = match self.human_override {
            Some(action) => action.to_string(),
            None => String::new(),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.run_id,
            self.seed,
            self.phase,
            self.episode,
            self.step,
            self.event_id,
            self.true_class,
            self.source,
            self.destination,
            self.observed_state,
            self.proposed_action,
            self.governance_verdict,
            override_field,
            self.final_action,
            self.reward,
            self.outcome,
            format_real(self.q_allow),
            format_real(self.q_block),
        )
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum AppendError {
    #[error("invalid record: {0}")]
    Invalid(#[from] RecordIssue),
    #[error("event {event_id} out of order within ({run_id}, {phase}): last was {last}")]
    OutOfOrder {
        run_id: String,
        phase: Phase,
        event_id: u64,
        last: u64,
    },
    #[error("run_id must not contain commas or newlines: {0:?}")]
    BadRunId(String),
}

/// Append-only ordered log of decisions.
#[derive(Clone, Debug, Default)]
pub struct DecisionLog {
    records: Vec<DecisionRecord>,
    last_event: HashMap<(String, Phase), u64>,
}

impl PartialEq for DecisionLog {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records
    }
}

impl DecisionLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> &[DecisionRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Append a record after checking its consistency and the per-(run,
    /// phase) event-id ordering. An inconsistent record signals a pipeline
    /// bug and is rejected rather than logged.
    pub fn append(&mut self, record: DecisionRecord) -> Result<(), AppendError> {
        record.validate()?;
        if record.run_id.contains(',') || record.run_id.contains('\n') {
            return Err(AppendError::BadRunId(record.run_id));
        }
        let key = (record.run_id.clone(), record.phase);
        if let Some(&last) = self.last_event.get(&key) {
            if record.event_id <= last {
                return Err(AppendError::OutOfOrder {
                    run_id: record.run_id,
                    phase: record.phase,
                    event_id: record.event_id,
                    last,
                });
            }
        }
        self.last_event.insert(key, record.event_id);
        self.records.push(record);
        Ok(())
    }
}

/// Write the log in the fixed CSV format; same log, same bytes.
pub fn export_csv<W: Write>(log: &DecisionLog, destination: &mut W) -> io::Result<()> {
    destination.write_all(CSV_HEADER.as_bytes())?;
    destination.write_all(b"\n")?;
    for record in log.records() {
        destination.write_all(record.to_csv_row().as_bytes())?;
        destination.write_all(b"\n")?;
    }
    Ok(())
}

/// Export to an in-memory string.
pub fn export_csv_string(log: &DecisionLog) -> String {
    let mut buffer = Vec::new();
    export_csv(log, &mut buffer).expect("writing to a Vec cannot fail");
    String::from_utf8(buffer).expect("csv output is utf-8")
}

#[derive(Debug, Error)]
pub enum ImportError {
    #[error("read failed: {0}")]
    Io(#[from] io::Error),
    #[error("line 1: malformed header")]
    MalformedHeader,
    #[error("line {line}: expected {expected} fields, found {found}")]
    ColumnCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: invalid {field}: {detail}")]
    Field {
        line: usize,
        field: &'static str,
        detail: String,
    },
    #[error("line {line}: inconsistent record: {source}")]
    Inconsistent {
        line: usize,
        #[source]
        source: RecordIssue,
    },
    #[error("line {line}: {detail}")]
    Order { line: usize, detail: String },
}

fn parse_field<T: FromStr>(
    line: usize,
    field: &'static str,
    raw: &str,
) -> Result<T, ImportError>
where
    T::Err: fmt::Display,
{
    raw.parse::<T>().map_err(|e| ImportError::Field {
        line,
        field,
        detail: format!("'{raw}': {e}"),
    })
}

fn parse_row(line: usize, row: &str) -> Result<DecisionRecord, ImportError> {
    let fields: Vec<&str> = row.split(',').collect();
    if fields.len() != CSV_COLUMNS {
        return Err(ImportError::ColumnCount {
            line,
            expected: CSV_COLUMNS,
            found: fields.len(),
        });
    }
    let human_override = if fields[12].is_empty() {
        None
    } else {
        Some(parse_field::<Action>(line, "human_override", fields[12])?)
    };
    Ok(DecisionRecord {
        run_id: fields[0].to_string(),
        seed: parse_field(line, "seed", fields[1])?,
        phase: parse_field(line, "phase", fields[2])?,
        episode: parse_field(line, "episode", fields[3])?,
        step: parse_field(line, "step", fields[4])?,
        event_id: parse_field(line, "event_id", fields[5])?,
        true_class: parse_field(line, "true_class", fields[6])?,
        source: fields[7].to_string(),
        destination: fields[8].to_string(),
        observed_state: parse_field(line, "observed_state", fields[9])?,
        proposed_action: parse_field(line, "proposed_action", fields[10])?,
        governance_verdict: parse_field(line, "governance_verdict", fields[11])?,
        human_override,
        final_action: parse_field(line, "final_action", fields[13])?,
        reward: parse_field(line, "reward", fields[14])?,
        outcome: parse_field(line, "outcome", fields[15])?,
        q_allow: parse_field(line, "q_allow", fields[16])?,
        q_block: parse_field(line, "q_block", fields[17])?,
    })
}

/// Parse a CSV stream back into a log, reporting the offending line on any
/// malformation or inconsistency.
pub fn import_csv<R: Read>(source: &mut R) -> Result<DecisionLog, ImportError> {
    let mut content = String::new();
    source.read_to_string(&mut content)?;
    import_csv_str(&content)
}

pub fn import_csv_str(content: &str) -> Result<DecisionLog, ImportError> {
    let mut lines: Vec<&str> = content.split('\n').collect();
    if let Some(last) = lines.last() {
        if last.is_empty() {
            lines.pop();
        }
    }
    let Some((&header, rows)) = lines.split_first() else {
        return Err(ImportError::MalformedHeader);
    };
    if header != CSV_HEADER {
        return Err(ImportError::MalformedHeader);
    }
    let mut log = DecisionLog::new();
    for (index, row) in rows.iter().enumerate() {
        let line = index + 2;
        let record = parse_row(line, row)?;
        log.append(record).map_err(|e| match e {
            AppendError::Invalid(issue) => ImportError::Inconsistent {
                line,
                source: issue,
            },
            other => ImportError::Order {
                line,
                detail: other.to_string(),
            },
        })?;
    }
    Ok(log)
}

#[derive(Debug, Error, PartialEq)]
pub enum OverrideError {
    #[error("event {event_id} already processed; overrides are forward-only")]
    AlreadyProcessed { event_id: u64 },
    #[error("line {line}: {detail}")]
    Parse { line: usize, detail: String },
}

/// Forward-only schedule of human overrides keyed by event id. Overrides
/// must be registered before the engine reaches the event; the processed
/// watermark enforces that history is never rewritten.
#[derive(Clone, Debug, Default)]
pub struct OverrideSchedule {
    entries: BTreeMap<u64, Action>,
    processed: Option<u64>,
}

impl OverrideSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Register an override for a future event.
    pub fn register(&mut self, event_id: u64, action: Action) -> Result<(), OverrideError> {
        if let Some(processed) = self.processed {
            if event_id <= processed {
                return Err(OverrideError::AlreadyProcessed { event_id });
            }
        }
        self.entries.insert(event_id, action);
        Ok(())
    }

    /// Consult the schedule for an event the engine is about to process and
    /// advance the watermark past it.
    pub fn take(&mut self, event_id: u64) -> Option<Action> {
        self.processed = Some(self.processed.map_or(event_id, |p| p.max(event_id)));
        self.entries.get(&event_id).copied()
    }

    /// Parse the injection file format: one "event_id,action" per line,
    /// blank lines and '#' comments ignored.
    pub fn parse(content: &str) -> Result<Self, OverrideError> {
        let mut schedule = Self::new();
        for (index, raw) in content.lines().enumerate() {
            let line = index + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((id_part, action_part)) = trimmed.split_once(',') else {
                return Err(OverrideError::Parse {
                    line,
                    detail: format!("expected 'event_id,action', got '{trimmed}'"),
                });
            };
            let event_id: u64 = id_part.trim().parse().map_err(|e| OverrideError::Parse {
                line,
                detail: format!("bad event_id '{id_part}': {e}"),
            })?;
            let action: Action = action_part.trim().parse().map_err(|e| OverrideError::Parse {
                line,
                detail: format!("bad action: {e}"),
            })?;
            schedule.register(event_id, action)?;
        }
        Ok(schedule)
    }
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("record {index} is inconsistent: {source}")]
    Inconsistent {
        index: usize,
        #[source]
        source: RecordIssue,
    },
    #[error("log yields no metrics: {0}")]
    Metrics(#[from] MetricsError),
    #[error("cannot replay an empty log")]
    Empty,
}

/// Recompute the run metrics purely from the log. This is the audit oracle:
/// for a live run it must reproduce the engine's own metrics exactly.
pub fn replay(log: &DecisionLog) -> Result<RunMetrics, ReplayError> {
    if log.is_empty() {
        return Err(ReplayError::Empty);
    }
    for (index, record) in log.records().iter().enumerate() {
        record
            .validate()
            .map_err(|source| ReplayError::Inconsistent { index, source })?;
    }
    Ok(RunMetrics::from_records(log.records())?)
}

/// Per-class decision counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClassBreakdown {
    pub allowed: u64,
    pub blocked: u64,
}

/// Aggregate view of a log for auditors: outcome counts, governance
/// interventions, overrides, and the per-class decision breakdown.
/// `adherence` is the alternate compliance reading (share of decisions that
/// did not block legitimate traffic); the primary ECS remains 1 - FPR.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AuditSummary {
    pub total: u64,
    pub true_positives: u64,
    pub false_positives: u64,
    pub true_negatives: u64,
    pub false_negatives: u64,
    pub interventions: u64,
    pub overrides: u64,
    pub per_class: [ClassBreakdown; TrafficClass::COUNT],
    pub adherence: Option<f64>,
}

pub fn audit_summary(log: &DecisionLog) -> AuditSummary {
    let mut summary = AuditSummary::default();
    for record in log.records() {
        summary.total += 1;
        match record.outcome {
            Outcome::TruePositive => summary.true_positives += 1,
            Outcome::FalsePositive => summary.false_positives += 1,
            Outcome::TrueNegative => summary.true_negatives += 1,
            Outcome::FalseNegative => summary.false_negatives += 1,
        }
        if record.governance_verdict == VerdictTag::Vetoed {
            summary.interventions += 1;
        }
        if record.human_override.is_some() {
            summary.overrides += 1;
        }
        let slot = &mut summary.per_class[record.true_class.index()];
        match record.final_action {
            Action::Allow => slot.allowed += 1,
            Action::Block => slot.blocked += 1,
        }
    }
    if summary.total > 0 {
        summary.adherence =
            Some((summary.total - summary.false_positives) as f64 / summary.total as f64);
    }
    summary
}
