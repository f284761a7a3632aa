//! Five-node critical-infrastructure graph and per-class attack path
//! templates.
//!
//! The default topology is a hub-and-spoke: one router adjacent to two
//! servers, a database, and an IoT device. Attack traffic entering from
//! off-network origins is attributed to the reserved `external` node id,
//! which is never part of the defended graph.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use crate::traffic::TrafficClass;

/// Stable identifier of a node; lowercase so CSV output is reproducible.
pub type NodeId = String;

/// Reserved id for off-network attack origins.
pub const EXTERNAL_NODE_ID: &str = "external";

/// Role of a node. `External` marks off-network attack origins and never
/// appears among the defended graph's internal nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Router,
    Server,
    Database,
    IotDevice,
    External,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NodeKind::Router => "router",
            NodeKind::Server => "server",
            NodeKind::Database => "database",
            NodeKind::IotDevice => "iot-device",
            NodeKind::External => "external",
        };
        write!(f, "{s}")
    }
}

/// Source/destination node kinds for one traffic class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PathTemplate {
    pub class: TrafficClass,
    pub source: NodeKind,
    pub destination: NodeKind,
}

/// Undirected graph of the defended infrastructure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkGraph {
    nodes: Vec<(NodeId, NodeKind)>,
    edges: Vec<(NodeId, NodeId)>,
}

/// One violated graph invariant; violations are values, not errors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// Wrong node count or kind profile (1 router, 2 servers, 1 database,
    /// 1 IoT device; no external nodes inside the graph).
    NodeCount(String),
    /// Graph is not connected.
    Connectivity(String),
    /// The router is not adjacent to every other internal node.
    Hub(String),
    SelfLoop(String),
    DuplicateEdge(String),
    DuplicateNodeId(String),
    /// Edge endpoint that is not a declared node.
    UnknownEndpoint(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NodeCount(d) => write!(f, "node-count: {d}"),
            Violation::Connectivity(d) => write!(f, "connectivity: {d}"),
            Violation::Hub(d) => write!(f, "hub: {d}"),
            Violation::SelfLoop(d) => write!(f, "self-loop: {d}"),
            Violation::DuplicateEdge(d) => write!(f, "duplicate-edge: {d}"),
            Violation::DuplicateNodeId(d) => write!(f, "duplicate-node-id: {d}"),
            Violation::UnknownEndpoint(d) => write!(f, "unknown-endpoint: {d}"),
        }
    }
}

impl NetworkGraph {
    pub fn new(nodes: Vec<(NodeId, NodeKind)>, edges: Vec<(NodeId, NodeId)>) -> Self {
        Self { nodes, edges }
    }

    pub fn nodes(&self) -> &[(NodeId, NodeKind)] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Degree of `id`, counting each incident edge once.
    pub fn degree(&self, id: &str) -> usize {
        self.edges
            .iter()
            .filter(|(a, b)| a == id || b == id)
            .count()
    }

    /// First node id of the given kind in insertion order, which is also
    /// lexicographic order for the default graph. `External` resolves to the
    /// reserved off-network id.
    pub fn endpoint_for(&self, kind: NodeKind) -> Option<NodeId> {
        if kind == NodeKind::External {
            return Some(EXTERNAL_NODE_ID.to_string());
        }
        self.nodes
            .iter()
            .find(|(_, k)| *k == kind)
            .map(|(id, _)| id.clone())
    }

    /// Resolve a path template to concrete node ids.
    pub fn resolve_path(&self, template: PathTemplate) -> Option<(NodeId, NodeId)> {
        let source = self.endpoint_for(template.source)?;
        let destination = self.endpoint_for(template.destination)?;
        Some((source, destination))
    }

    /// Check every structural invariant and return the violations found.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();

        let mut seen_ids = HashSet::new();
        for (id, _) in &self.nodes {
            if !seen_ids.insert(id.clone()) {
                violations.push(Violation::DuplicateNodeId(id.clone()));
            }
        }

        if self.nodes.len() != 5 {
            violations.push(Violation::NodeCount(format!(
                "expected 5 internal nodes, found {}",
                self.nodes.len()
            )));
        }
        let mut kind_counts: HashMap<NodeKind, usize> = HashMap::new();
        for (_, kind) in &self.nodes {
            *kind_counts.entry(*kind).or_insert(0) += 1;
        }
        let profile = [
            (NodeKind::Router, 1usize),
            (NodeKind::Server, 2),
            (NodeKind::Database, 1),
            (NodeKind::IotDevice, 1),
        ];
        for (kind, expected) in profile {
            let found = kind_counts.get(&kind).copied().unwrap_or(0);
            if found != expected {
                violations.push(Violation::NodeCount(format!(
                    "expected {expected} {kind} node(s), found {found}"
                )));
            }
        }
        if kind_counts.contains_key(&NodeKind::External) {
            violations.push(Violation::NodeCount(
                "external origins must not be internal nodes".to_string(),
            ));
        }

        let ids: HashSet<&str> = self.nodes.iter().map(|(id, _)| id.as_str()).collect();
        let mut seen_edges: BTreeSet<(String, String)> = BTreeSet::new();
        for (a, b) in &self.edges {
            if a == b {
                violations.push(Violation::SelfLoop(a.clone()));
                continue;
            }
            for end in [a, b] {
                if !ids.contains(end.as_str()) {
                    violations.push(Violation::UnknownEndpoint(end.clone()));
                }
            }
            let key = if a <= b {
                (a.clone(), b.clone())
            } else {
                (b.clone(), a.clone())
            };
            if !seen_edges.insert(key) {
                violations.push(Violation::DuplicateEdge(format!("{a}--{b}")));
            }
        }

        if !self.is_connected() {
            violations.push(Violation::Connectivity(
                "graph is not connected".to_string(),
            ));
        }

        match self
            .nodes
            .iter()
            .find(|(_, k)| *k == NodeKind::Router)
            .map(|(id, _)| id.clone())
        {
            Some(router) => {
                let adjacent: HashSet<&str> = self
                    .edges
                    .iter()
                    .filter_map(|(a, b)| {
                        if a == &router {
                            Some(b.as_str())
                        } else if b == &router {
                            Some(a.as_str())
                        } else {
                            None
                        }
                    })
                    .collect();
                for (id, _) in &self.nodes {
                    if id != &router && !adjacent.contains(id.as_str()) {
                        violations.push(Violation::Hub(format!(
                            "router is not adjacent to {id}"
                        )));
                    }
                }
            }
            None => violations.push(Violation::Hub("no router node".to_string())),
        }

        violations
    }

    fn is_connected(&self) -> bool {
        let Some((start, _)) = self.nodes.first() else {
            return true;
        };
        let mut adjacency: HashMap<&str, Vec<&str>> = HashMap::new();
        for (a, b) in &self.edges {
            adjacency.entry(a.as_str()).or_default().push(b.as_str());
            adjacency.entry(b.as_str()).or_default().push(a.as_str());
        }
        let mut visited: HashSet<&str> = HashSet::new();
        let mut queue = VecDeque::from([start.as_str()]);
        visited.insert(start.as_str());
        while let Some(node) = queue.pop_front() {
            for &next in adjacency.get(node).into_iter().flatten() {
                if visited.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        self.nodes.iter().all(|(id, _)| visited.contains(id.as_str()))
    }
}

/// The default hub-and-spoke graph: router adjacent to server1, server2,
/// database, and iot. Node ids are fixed for stable CSV output.
pub fn default_topology() -> NetworkGraph {
    let nodes = vec![
        ("router".to_string(), NodeKind::Router),
        ("server1".to_string(), NodeKind::Server),
        ("server2".to_string(), NodeKind::Server),
        ("database".to_string(), NodeKind::Database),
        ("iot".to_string(), NodeKind::IotDevice),
    ];
    let edges = vec![
        ("router".to_string(), "server1".to_string()),
        ("router".to_string(), "server2".to_string()),
        ("router".to_string(), "database".to_string()),
        ("router".to_string(), "iot".to_string()),
    ];
    NetworkGraph::new(nodes, edges)
}

/// Source/destination kinds for each traffic class: phishing arrives from
/// outside against user endpoints, ransomware moves laterally toward the
/// database, DDoS floods the router, and normal traffic is internal
/// service-to-storage flow.
pub fn attack_path(class: TrafficClass) -> PathTemplate {
    let (source, destination) = match class {
        TrafficClass::Normal => (NodeKind::Server, NodeKind::Database),
        TrafficClass::Phishing => (NodeKind::External, NodeKind::IotDevice),
        TrafficClass::Ransomware => (NodeKind::IotDevice, NodeKind::Database),
        TrafficClass::DDoS => (NodeKind::External, NodeKind::Router),
    };
    PathTemplate {
        class,
        source,
        destination,
    }
}
