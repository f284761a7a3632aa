//! The two defenders: a tabular Q-learning agent and a calibrated
//! rule-based baseline.
//!
//! The learning agent observes the event's traffic class directly (the
//! states are noiseless), chooses allow/block with a constant epsilon-greedy
//! rule, and updates a 4x2 Q-table with the one-step update
//! `q[s,a] += alpha * (r + gamma * max_a' q[s',a'] - q[s,a])`.
//! Ties in the argmax resolve to `Allow`, so an untrained table fails open.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::traffic::{TrafficClass, TrafficEvent};

/// Defensive action; the integer codes are part of the contract.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Allow = 0,
    Block = 1,
}

impl Action {
    pub const COUNT: usize = 2;
    pub const ALL: [Action; Self::COUNT] = [Action::Allow, Action::Block];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Allow => write!(f, "allow"),
            Action::Block => write!(f, "block"),
        }
    }
}

impl FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "allow" => Ok(Action::Allow),
            "block" => Ok(Action::Block),
            other => Err(format!("unknown action '{other}'")),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("{name} out of range: {value}")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("episodes must be >= 1")]
    NoEpisodes,
}

/// Q-learning hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QHyperParams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon_train: f64,
    pub epsilon_eval: f64,
    pub episodes: u32,
}

impl QHyperParams {
    pub fn new(
        alpha: f64,
        gamma: f64,
        epsilon_train: f64,
        epsilon_eval: f64,
        episodes: u32,
    ) -> Result<Self, ParamError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(ParamError::OutOfRange {
                name: "alpha",
                value: alpha,
            });
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(ParamError::OutOfRange {
                name: "gamma",
                value: gamma,
            });
        }
        for (name, value) in [("epsilon_train", epsilon_train), ("epsilon_eval", epsilon_eval)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ParamError::OutOfRange { name, value });
            }
        }
        if episodes < 1 {
            return Err(ParamError::NoEpisodes);
        }
        Ok(Self {
            alpha,
            gamma,
            epsilon_train,
            epsilon_eval,
            episodes,
        })
    }
}

impl Default for QHyperParams {
    fn default() -> Self {
        QHyperParams::new(0.1, 0.95, 0.1, 0.0, 500).expect("defaults are valid")
    }
}

/// Rule-based baseline calibrated by outcome rates: it blocks malicious
/// events with probability `p_detect` and legitimate ones with `p_false`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaselineParams {
    pub p_detect: f64,
    pub p_false: f64,
}

impl BaselineParams {
    pub fn new(p_detect: f64, p_false: f64) -> Result<Self, ParamError> {
        for (name, value) in [("p_detect", p_detect), ("p_false", p_false)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ParamError::OutOfRange { name, value });
            }
        }
        Ok(Self { p_detect, p_false })
    }
}

impl Default for BaselineParams {
    fn default() -> Self {
        BaselineParams::new(0.70, 0.15).expect("defaults are valid")
    }
}

/// 4x2 value table indexed by (traffic class, action); the entire policy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QTable {
    values: [[f64; Action::COUNT]; TrafficClass::COUNT],
}

impl Default for QTable {
    fn default() -> Self {
        Self::new()
    }
}

impl QTable {
    /// All-zero table; with the `Allow` tie-break this is an all-allow policy.
    pub fn new() -> Self {
        Self {
            values: [[0.0; Action::COUNT]; TrafficClass::COUNT],
        }
    }

    pub fn from_values(values: [[f64; Action::COUNT]; TrafficClass::COUNT]) -> Self {
        Self { values }
    }

    pub fn get(&self, state: TrafficClass, action: Action) -> f64 {
        self.values[state.index()][action.index()]
    }

    pub fn set(&mut self, state: TrafficClass, action: Action, value: f64) {
        self.values[state.index()][action.index()] = value;
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().flatten().all(|v| v.is_finite())
    }

    /// Confidence margin `q[state, Block] - q[state, Allow]`; positive means
    /// the greedy action is Block.
    pub fn margin(&self, state: TrafficClass) -> f64 {
        self.get(state, Action::Block) - self.get(state, Action::Allow)
    }

    /// Argmax over actions with ties resolved to Allow.
    pub fn greedy(&self, state: TrafficClass) -> Action {
        if self.get(state, Action::Block) > self.get(state, Action::Allow) {
            Action::Block
        } else {
            Action::Allow
        }
    }

    /// Per-state greedy action, indexed by class index.
    pub fn greedy_policy(&self) -> [Action; TrafficClass::COUNT] {
        let mut policy = [Action::Allow; TrafficClass::COUNT];
        for class in TrafficClass::ALL {
            policy[class.index()] = self.greedy(class);
        }
        policy
    }

    /// One-step update; only the (state, action) entry changes.
    pub fn update(
        &mut self,
        state: TrafficClass,
        action: Action,
        reward: i32,
        next_state: TrafficClass,
        params: &QHyperParams,
    ) {
        let best_next = Action::ALL
            .iter()
            .map(|a| self.get(next_state, *a))
            .fold(f64::NEG_INFINITY, f64::max);
        let current = self.get(state, action);
        let target = f64::from(reward) + params.gamma * best_next;
        self.set(state, action, current + params.alpha * (target - current));
    }
}

/// State observation: the event's traffic class, read directly. The
/// simulation's states are noiseless, which is what makes an exact-detection
/// policy attainable.
pub fn observe(event: &TrafficEvent) -> TrafficClass {
    event.class
}

/// Constant epsilon-greedy selection. With probability `epsilon` a uniform
/// random action, otherwise the greedy one. The rng is only consulted when
/// `epsilon > 0`, so greedy evaluation consumes no random numbers.
pub fn select_action(
    q: &QTable,
    state: TrafficClass,
    epsilon: f64,
    rng: &mut ChaCha8Rng,
) -> Action {
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        if rng.random_range(0..Action::COUNT) == 0 {
            Action::Allow
        } else {
            Action::Block
        }
    } else {
        q.greedy(state)
    }
}

/// Reward for a resolved decision: +1 for a correct call, -1 for blocking
/// legitimate traffic, -2 for letting an attack through.
pub fn reward(true_class: TrafficClass, action: Action) -> i32 {
    match (true_class.is_malicious(), action) {
        (false, Action::Allow) => 1,
        (false, Action::Block) => -1,
        (true, Action::Block) => 1,
        (true, Action::Allow) => -2,
    }
}

/// Baseline decision rule; consumes exactly one random draw per event.
pub fn baseline_decide(
    params: &BaselineParams,
    event: &TrafficEvent,
    rng: &mut ChaCha8Rng,
) -> Action {
    let p_block = if event.class.is_malicious() {
        params.p_detect
    } else {
        params.p_false
    };
    if rng.random::<f64>() < p_block {
        Action::Block
    } else {
        Action::Allow
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;
    use crate::topology::default_topology;
    use crate::traffic::{TrafficGenerator, TrafficMix};
    use proptest::prelude::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        derive_stream(seed, "agents/test")
    }

    fn event_of(class: TrafficClass) -> TrafficEvent {
        let mut generator = TrafficGenerator::new(
            derive_stream(0, "agents/event"),
            default_topology(),
            TrafficMix::default(),
        );
        generator.event_with_class(0, class)
    }

    #[test]
    fn observe_returns_the_event_class() {
        assert_eq!(observe(&event_of(TrafficClass::Phishing)), TrafficClass::Phishing);
        assert_eq!(observe(&event_of(TrafficClass::Normal)), TrafficClass::Normal);
        let event = event_of(TrafficClass::DDoS);
        assert_eq!(observe(&event), observe(&event));
    }

    #[test]
    fn greedy_selection_uses_argmax() {
        let mut q = QTable::new();
        q.set(TrafficClass::Phishing, Action::Block, 1.0);
        q.set(TrafficClass::Phishing, Action::Allow, -2.0);
        let mut rng = rng(1);
        assert_eq!(
            select_action(&q, TrafficClass::Phishing, 0.0, &mut rng),
            Action::Block
        );
    }

    #[test]
    fn ties_resolve_to_allow() {
        let q = QTable::new();
        let mut rng = rng(2);
        for class in TrafficClass::ALL {
            assert_eq!(select_action(&q, class, 0.0, &mut rng), Action::Allow);
        }
    }

    #[test]
    fn full_exploration_is_uniform() {
        let q = QTable::new();
        let mut rng = rng(3);
        let n = 10_000;
        let blocks = (0..n)
            .filter(|_| select_action(&q, TrafficClass::Normal, 1.0, &mut rng) == Action::Block)
            .count();
        let fraction = blocks as f64 / n as f64;
        assert!((0.48..=0.52).contains(&fraction), "block fraction {fraction}");
    }

    #[test]
    fn reward_table_is_exact() {
        assert_eq!(reward(TrafficClass::Ransomware, Action::Block), 1);
        assert_eq!(reward(TrafficClass::Normal, Action::Block), -1);
        assert_eq!(reward(TrafficClass::DDoS, Action::Allow), -2);
        assert_eq!(reward(TrafficClass::Normal, Action::Allow), 1);
    }

    #[test]
    fn reward_is_total_with_range_minus2_minus1_plus1() {
        let mut seen = std::collections::BTreeSet::new();
        for class in TrafficClass::ALL {
            for action in Action::ALL {
                seen.insert(reward(class, action));
            }
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), vec![-2, -1, 1]);
    }

    #[test]
    fn single_update_from_zero_table() {
        let mut q = QTable::new();
        q.update(
            TrafficClass::Phishing,
            Action::Block,
            1,
            TrafficClass::Normal,
            &QHyperParams::default(),
        );
        // 0.1 * (1 + 0.95 * 0 - 0)
        assert_eq!(q.get(TrafficClass::Phishing, Action::Block), 0.1);
        for class in TrafficClass::ALL {
            for action in Action::ALL {
                if (class, action) != (TrafficClass::Phishing, Action::Block) {
                    assert_eq!(q.get(class, action), 0.0);
                }
            }
        }
    }

    #[test]
    fn zero_learning_rate_changes_nothing() {
        // Validated configs require alpha > 0; the update rule itself is
        // still well defined at alpha = 0 and must be a no-op there.
        let params = QHyperParams {
            alpha: 0.0,
            ..QHyperParams::default()
        };
        let mut q = QTable::new();
        q.set(TrafficClass::DDoS, Action::Block, 2.5);
        let before = q;
        q.update(TrafficClass::DDoS, Action::Block, 1, TrafficClass::Normal, &params);
        assert_eq!(q, before);
    }

    #[test]
    fn margin_is_block_minus_allow() {
        let mut q = QTable::new();
        for class in TrafficClass::ALL {
            assert_eq!(q.margin(class), 0.0);
        }
        q.set(TrafficClass::DDoS, Action::Block, 1.0);
        q.set(TrafficClass::DDoS, Action::Allow, -2.0);
        assert_eq!(q.margin(TrafficClass::DDoS), 3.0);
        assert_eq!(q.greedy(TrafficClass::DDoS), Action::Block);
    }

    #[test]
    fn greedy_policy_of_converged_table_is_optimal() {
        let mut q = QTable::new();
        for class in TrafficClass::ALL {
            for action in Action::ALL {
                // Expected one-step reward is the reward itself: states are
                // i.i.d., so this is the converged shape up to scaling.
                q.set(class, action, f64::from(reward(class, action)));
            }
        }
        let policy = q.greedy_policy();
        for class in TrafficClass::ALL {
            let expected = if class.is_malicious() {
                Action::Block
            } else {
                Action::Allow
            };
            assert_eq!(policy[class.index()], expected);
        }
        assert_eq!(QTable::new().greedy_policy(), [Action::Allow; 4]);
    }

    #[test]
    fn baseline_certain_detection_always_blocks_attacks() {
        let params = BaselineParams::new(1.0, 0.0).unwrap();
        let mut rng = rng(4);
        let event = event_of(TrafficClass::Ransomware);
        for _ in 0..100 {
            assert_eq!(baseline_decide(&params, &event, &mut rng), Action::Block);
        }
    }

    #[test]
    fn baseline_rates_match_calibration_within_three_sigma() {
        let params = BaselineParams::default();
        let mut rng = rng(5);
        let n = 10_000;
        let attack = event_of(TrafficClass::Phishing);
        let blocked_attacks = (0..n)
            .filter(|_| baseline_decide(&params, &attack, &mut rng) == Action::Block)
            .count() as f64
            / n as f64;
        assert!((0.686..=0.714).contains(&blocked_attacks), "{blocked_attacks}");

        let normal = event_of(TrafficClass::Normal);
        let blocked_normals = (0..n)
            .filter(|_| baseline_decide(&params, &normal, &mut rng) == Action::Block)
            .count() as f64
            / n as f64;
        assert!((0.139..=0.161).contains(&blocked_normals), "{blocked_normals}");
    }

    #[test]
    fn invalid_params_are_rejected() {
        assert!(QHyperParams::new(0.0, 0.95, 0.1, 0.0, 500).is_err());
        assert!(QHyperParams::new(0.1, 1.5, 0.1, 0.0, 500).is_err());
        assert!(QHyperParams::new(0.1, 0.95, 0.1, 0.0, 0).is_err());
        assert!(BaselineParams::new(1.1, 0.0).is_err());
    }

    proptest! {
        /// Greedy selection at epsilon 0 is a pure function of the table.
        #[test]
        fn greedy_is_deterministic(
            values in prop::array::uniform4(prop::array::uniform2(-50.0f64..50.0)),
            seed in any::<u64>(),
        ) {
            let q = QTable::from_values(values);
            let mut rng_a = derive_stream(seed, "agents/a");
            let mut rng_b = derive_stream(seed.wrapping_add(1), "agents/b");
            for class in TrafficClass::ALL {
                let a = select_action(&q, class, 0.0, &mut rng_a);
                let b = select_action(&q, class, 0.0, &mut rng_b);
                prop_assert_eq!(a, b);
                prop_assert_eq!(a, q.greedy(class));
                // Margin sign agrees with the greedy choice.
                if q.margin(class) > 0.0 {
                    prop_assert_eq!(a, Action::Block);
                } else {
                    prop_assert_eq!(a, Action::Allow);
                }
            }
        }

        /// Updates touch only the addressed entry and stay finite.
        #[test]
        fn update_is_local_and_finite(
            values in prop::array::uniform4(prop::array::uniform2(-40.0f64..40.0)),
            state_idx in 0usize..4,
            action_idx in 0usize..2,
            next_idx in 0usize..4,
            r in prop::sample::select(vec![-2i32, -1, 1]),
        ) {
            let state = TrafficClass::from_index(state_idx).unwrap();
            let action = Action::ALL[action_idx];
            let next = TrafficClass::from_index(next_idx).unwrap();
            let before = QTable::from_values(values);
            let mut after = before;
            after.update(state, action, r, next, &QHyperParams::default());
            prop_assert!(after.is_finite());
            for class in TrafficClass::ALL {
                for a in Action::ALL {
                    if (class, a) != (state, action) {
                        prop_assert_eq!(before.get(class, a), after.get(class, a));
                    }
                }
            }
        }
    }
}
