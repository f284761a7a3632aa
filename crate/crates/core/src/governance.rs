//! Ethical governance layer: a regulatory filter over proposed actions.
//!
//! The layer tracks how the most recent labeled legitimate events were
//! handled in a sliding window and vetoes a proposed Block whenever the
//! windowed false-positive rate has reached the configured cap. A veto
//! always resolves to Allow; the layer never converts an Allow into a
//! Block. Outcome labels reach the layer only after the decision is made,
//! so it never sees pre-decision ground truth.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::agents::Action;
use crate::traffic::TrafficClass;

#[derive(Debug, Error, PartialEq)]
pub enum PolicyError {
    #[error("fpr_cap out of range: {0}")]
    CapOutOfRange(f64),
    #[error("window must be >= 1")]
    ZeroWindow,
}

/// Enforcement parameters: the false-positive cap, the sliding window of
/// labeled legitimate events it is measured over, and a warmup count below
/// which no veto fires.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GovernancePolicy {
    pub fpr_cap: f64,
    pub window: usize,
    pub warmup: usize,
}

impl GovernancePolicy {
    pub fn new(fpr_cap: f64, window: usize, warmup: usize) -> Result<Self, PolicyError> {
        if !(0.0..=1.0).contains(&fpr_cap) {
            return Err(PolicyError::CapOutOfRange(fpr_cap));
        }
        if window < 1 {
            return Err(PolicyError::ZeroWindow);
        }
        Ok(Self {
            fpr_cap,
            window,
            warmup,
        })
    }
}

impl Default for GovernancePolicy {
    fn default() -> Self {
        GovernancePolicy::new(0.30, 100, 20).expect("defaults are valid")
    }
}

/// Verdict outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Approved,
    Vetoed,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::Approved => write!(f, "approved"),
            Decision::Vetoed => write!(f, "vetoed"),
        }
    }
}

/// Result of evaluating one proposed action, with the windowed FPR observed
/// at decision time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GovernanceVerdict {
    pub decision: Decision,
    pub final_action: Action,
    pub windowed_fpr: f64,
}

/// Mutable enforcement state: the bounded window of recent legitimate-event
/// outcomes (true = that event was blocked) and the veto counter.
#[derive(Clone, Debug)]
pub struct GovernanceState {
    recent_legit_blocked: VecDeque<bool>,
    window: usize,
    interventions: u64,
}

impl GovernanceState {
    pub fn new(window: usize) -> Self {
        Self {
            recent_legit_blocked: VecDeque::with_capacity(window.min(4096)),
            window,
            interventions: 0,
        }
    }

    pub fn for_policy(policy: &GovernancePolicy) -> Self {
        Self::new(policy.window)
    }

    pub fn queue_len(&self) -> usize {
        self.recent_legit_blocked.len()
    }

    pub fn is_window_full(&self) -> bool {
        self.recent_legit_blocked.len() >= self.window
    }

    pub fn blocked_in_window(&self) -> usize {
        self.recent_legit_blocked.iter().filter(|b| **b).count()
    }

    pub fn interventions(&self) -> u64 {
        self.interventions
    }

    /// Blocked-legitimate share of the window; 0 while the window is empty.
    pub fn windowed_fpr(&self) -> f64 {
        if self.recent_legit_blocked.is_empty() {
            return 0.0;
        }
        self.blocked_in_window() as f64 / self.recent_legit_blocked.len() as f64
    }
}

/// Evaluate a proposed action. Allow passes through untouched; Block is
/// vetoed to Allow when the window has at least `warmup` entries and the
/// windowed FPR has reached the cap. Vetoes increment the intervention
/// counter; the verdict itself is a pure function of (policy, state,
/// proposed).
pub fn evaluate(
    policy: &GovernancePolicy,
    state: &mut GovernanceState,
    proposed: Action,
) -> GovernanceVerdict {
    let windowed_fpr = state.windowed_fpr();
    match proposed {
        Action::Allow => GovernanceVerdict {
            decision: Decision::Approved,
            final_action: Action::Allow,
            windowed_fpr,
        },
        Action::Block => {
            if state.queue_len() >= policy.warmup && windowed_fpr >= policy.fpr_cap {
                state.interventions += 1;
                GovernanceVerdict {
                    decision: Decision::Vetoed,
                    final_action: Action::Allow,
                    windowed_fpr,
                }
            } else {
                GovernanceVerdict {
                    decision: Decision::Approved,
                    final_action: Action::Block,
                    windowed_fpr,
                }
            }
        }
    }
}

/// Feed the labeled outcome of a finished decision back into the window.
/// Only legitimate events enter; the FPR is defined over legitimate traffic.
pub fn record_outcome(state: &mut GovernanceState, true_class: TrafficClass, final_action: Action) {
    if true_class != TrafficClass::Normal {
        return;
    }
    state
        .recent_legit_blocked
        .push_back(final_action == Action::Block);
    while state.recent_legit_blocked.len() > state.window {
        state.recent_legit_blocked.pop_front();
    }
}
