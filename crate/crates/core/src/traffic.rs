//! Stochastic generation of labeled traffic events.
//!
//! Events are drawn i.i.d. from a configurable class mix (default 70%
//! legitimate, 10% each attack class) and routed along the fixed path
//! template for their class. A generator owns its rng stream, so a fixed
//! seed reproduces the full event sequence exactly.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::topology::{attack_path, NetworkGraph, NodeId};

/// Traffic class; `Normal` is the only legitimate one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TrafficClass {
    Normal,
    Phishing,
    Ransomware,
    DDoS,
}

impl TrafficClass {
    pub const COUNT: usize = 4;
    pub const ALL: [TrafficClass; Self::COUNT] = [
        TrafficClass::Normal,
        TrafficClass::Phishing,
        TrafficClass::Ransomware,
        TrafficClass::DDoS,
    ];

    /// Fixed index used for Q-table rows and file layouts.
    pub fn index(self) -> usize {
        match self {
            TrafficClass::Normal => 0,
            TrafficClass::Phishing => 1,
            TrafficClass::Ransomware => 2,
            TrafficClass::DDoS => 3,
        }
    }

    pub fn from_index(index: usize) -> Option<TrafficClass> {
        Self::ALL.get(index).copied()
    }

    pub fn is_malicious(self) -> bool {
        self != TrafficClass::Normal
    }
}

impl fmt::Display for TrafficClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TrafficClass::Normal => "normal",
            TrafficClass::Phishing => "phishing",
            TrafficClass::Ransomware => "ransomware",
            TrafficClass::DDoS => "ddos",
        };
        write!(f, "{s}")
    }
}

impl FromStr for TrafficClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "normal" => Ok(TrafficClass::Normal),
            "phishing" => Ok(TrafficClass::Phishing),
            "ransomware" => Ok(TrafficClass::Ransomware),
            "ddos" => Ok(TrafficClass::DDoS),
            other => Err(format!("unknown traffic class '{other}'")),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MixError {
    #[error("probability for {class} out of range: {value}")]
    OutOfRange { class: &'static str, value: f64 },
    #[error("mix probabilities sum to {sum}, expected 1")]
    BadSum { sum: f64 },
}

/// Categorical distribution over the four traffic classes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrafficMix {
    p_normal: f64,
    p_phishing: f64,
    p_ransomware: f64,
    p_ddos: f64,
}

impl TrafficMix {
    const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(
        p_normal: f64,
        p_phishing: f64,
        p_ransomware: f64,
        p_ddos: f64,
    ) -> Result<Self, MixError> {
        let entries = [
            ("normal", p_normal),
            ("phishing", p_phishing),
            ("ransomware", p_ransomware),
            ("ddos", p_ddos),
        ];
        for (class, value) in entries {
            if !(0.0..=1.0).contains(&value) || !value.is_finite() {
                return Err(MixError::OutOfRange { class, value });
            }
        }
        let sum = p_normal + p_phishing + p_ransomware + p_ddos;
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(MixError::BadSum { sum });
        }
        Ok(Self {
            p_normal,
            p_phishing,
            p_ransomware,
            p_ddos,
        })
    }

    pub fn probability(&self, class: TrafficClass) -> f64 {
        match class {
            TrafficClass::Normal => self.p_normal,
            TrafficClass::Phishing => self.p_phishing,
            TrafficClass::Ransomware => self.p_ransomware,
            TrafficClass::DDoS => self.p_ddos,
        }
    }
}

impl Default for TrafficMix {
    /// 70% legitimate; the malicious share split uniformly across the three
    /// attack classes.
    fn default() -> Self {
        TrafficMix::new(0.70, 0.10, 0.10, 0.10).expect("default mix is valid")
    }
}

/// One generated network event with its ground-truth class and path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrafficEvent {
    pub event_id: u64,
    pub step: u32,
    pub class: TrafficClass,
    pub source: NodeId,
    pub destination: NodeId,
}

/// Draw one class from the mix using a single uniform variate.
pub fn sample_class(rng: &mut ChaCha8Rng, mix: &TrafficMix) -> TrafficClass {
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    for class in TrafficClass::ALL {
        cumulative += mix.probability(class);
        if u < cumulative {
            return class;
        }
    }
    // Guards the u ~ cumulative-rounding edge; the last class absorbs it.
    TrafficClass::DDoS
}

/// Labeled event source for one run. Owns its rng stream and the event-id
/// counter; cloning snapshots the full generator state.
#[derive(Clone, Debug)]
pub struct TrafficGenerator {
    rng: ChaCha8Rng,
    mix: TrafficMix,
    graph: NetworkGraph,
    next_id: u64,
}

impl TrafficGenerator {
    pub fn new(rng: ChaCha8Rng, graph: NetworkGraph, mix: TrafficMix) -> Self {
        Self {
            rng,
            mix,
            graph,
            next_id: 0,
        }
    }

    /// Generate the next event for the given step within the episode.
    pub fn next_event(&mut self, step: u32) -> TrafficEvent {
        let class = sample_class(&mut self.rng, &self.mix);
        self.event_with_class(step, class)
    }

    /// Build an event of a forced class; used by tests and the generator
    /// itself so path resolution has a single code path.
    pub fn event_with_class(&mut self, step: u32, class: TrafficClass) -> TrafficEvent {
        let (source, destination) = self
            .graph
            .resolve_path(attack_path(class))
            .expect("validated graph resolves every template");
        let event_id = self.next_id;
        self.next_id += 1;
        TrafficEvent {
            event_id,
            step,
            class,
            source,
            destination,
        }
    }
}
