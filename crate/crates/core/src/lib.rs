//! Deterministic simulation workbench for a governed reinforcement-learning
//! network defender.
//!
//! The pipeline wires together seeded traffic generation over a small
//! critical-infrastructure topology, a tabular Q-learning defender (plus a
//! calibrated rule-based baseline), an ethical-governance layer that can veto
//! proposed blocks to keep the realized false-positive rate under a cap, and
//! an append-only oversight log with bit-exact CSV export and replay-based
//! audit. Every run is fully determined by its configuration and seed.

pub mod agents;
pub mod config;
pub mod engine;
pub mod governance;
pub mod metrics;
pub mod oversight;
pub mod plot;
pub mod reports;
pub mod rng;
pub mod topology;
pub mod traffic;

pub use agents::{Action, BaselineParams, QHyperParams, QTable};
pub use config::{ConfigError, RunConfig};
pub use engine::{ComparisonReport, EvalRun, TrainRun};
pub use governance::{GovernancePolicy, GovernanceState, GovernanceVerdict};
pub use metrics::{ConfusionCounts, RunMetrics, SeedAggregate};
pub use oversight::{DecisionLog, DecisionRecord, Outcome, Phase};
pub use topology::{NetworkGraph, NodeKind};
pub use traffic::{TrafficClass, TrafficEvent, TrafficMix};
