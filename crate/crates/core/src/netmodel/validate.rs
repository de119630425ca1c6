use super::{ChannelId, Network, NodeId};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

/// Minimum channel length in channel widths: a port stub at each end plus
/// one width of abstract channel in between.
pub const MIN_LENGTH_WIDTHS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Subject {
    Network,
    Fluid,
    Node(NodeId),
    Channel(ChannelId),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Network => f.write_str("network"),
            Subject::Fluid => f.write_str("fluid"),
            Subject::Node(id) => id.fmt(f),
            Subject::Channel(id) => id.fmt(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    DuplicateId,
    NonPositiveFluid,
    NonFinitePressure,
    NonPositiveWidth,
    NonPositiveLength,
    SelfLoop,
    UnknownNode,
    CoincidentNodes,
    TooShort,
    Disconnected,
    TooFewGrounds,
    GroundDegree,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::DuplicateId => "ids must be unique",
            Rule::NonPositiveFluid => "density and viscosity > 0",
            Rule::NonFinitePressure => "ground pressure must be finite",
            Rule::NonPositiveWidth => "width > 0",
            Rule::NonPositiveLength => "length > 0",
            Rule::SelfLoop => "node_a != node_b",
            Rule::UnknownNode => "channel ends must reference existing nodes",
            Rule::CoincidentNodes => "channel ends must be at distinct positions",
            Rule::TooShort => "length >= 5*width",
            Rule::Disconnected => "network must be connected",
            Rule::TooFewGrounds => "at least two ground nodes",
            Rule::GroundDegree => "ground nodes must have degree 1",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub subject: Subject,
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: violates \"{}\"", self.subject, self.rule)?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

/// Checks every network and channel invariant. An empty report means the
/// network can be decomposed and simulated.
pub fn validate(network: &Network) -> Vec<Violation> {
    let mut report = Vec::new();
    let mut push = |subject, rule, detail: String| {
        report.push(Violation {
            subject,
            rule,
            detail,
        })
    };

    let fluid = network.fluid;
    if !(fluid.density > 0.0 && fluid.kinematic_viscosity > 0.0) {
        push(
            Subject::Fluid,
            Rule::NonPositiveFluid,
            format!(
                "density {}, kinematic viscosity {}",
                fluid.density, fluid.kinematic_viscosity
            ),
        );
    }

    let mut node_ids = BTreeSet::new();
    for node in &network.nodes {
        if !node_ids.insert(node.id) {
            push(Subject::Node(node.id), Rule::DuplicateId, String::new());
        }
        if let Some(p) = node.ground_pressure() {
            if !p.is_finite() {
                push(
                    Subject::Node(node.id),
                    Rule::NonFinitePressure,
                    format!("{p}"),
                );
            }
        }
    }

    let mut channel_ids = BTreeSet::new();
    for ch in &network.channels {
        let subject = Subject::Channel(ch.id);
        if !channel_ids.insert(ch.id) {
            push(subject, Rule::DuplicateId, String::new());
        }
        if !(ch.width > 0.0) {
            push(
                subject,
                Rule::NonPositiveWidth,
                format!("width {}", ch.width),
            );
        }
        if !(ch.length > 0.0) {
            push(
                subject,
                Rule::NonPositiveLength,
                format!("length {}", ch.length),
            );
        }
        if ch.node_a == ch.node_b {
            push(subject, Rule::SelfLoop, String::new());
        }
        match (network.node(ch.node_a), network.node(ch.node_b)) {
            (Some(a), Some(b)) => {
                if ch.node_a != ch.node_b && a.position.distance(b.position) == 0.0 {
                    push(subject, Rule::CoincidentNodes, String::new());
                }
            }
            _ => push(
                subject,
                Rule::UnknownNode,
                format!("{} - {}", ch.node_a, ch.node_b),
            ),
        }
        if ch.width > 0.0 && ch.length > 0.0 && ch.length < MIN_LENGTH_WIDTHS * ch.width {
            push(
                subject,
                Rule::TooShort,
                format!(
                    "length {:e} m is {:.3} widths",
                    ch.length,
                    ch.length / ch.width
                ),
            );
        }
    }

    let grounds: Vec<_> = network.ground_nodes().collect();
    if grounds.len() < 2 {
        push(
            Subject::Network,
            Rule::TooFewGrounds,
            format!("found {}", grounds.len()),
        );
    }
    for g in &grounds {
        let degree = network.degree(g.id);
        if degree != 1 {
            push(
                Subject::Node(g.id),
                Rule::GroundDegree,
                format!("degree {degree}"),
            );
        }
    }

    if !network.nodes.is_empty() && !is_connected(network) {
        push(Subject::Network, Rule::Disconnected, String::new());
    }

    report
}

fn is_connected(network: &Network) -> bool {
    let mut adjacency: BTreeMap<NodeId, Vec<NodeId>> =
        network.nodes.iter().map(|n| (n.id, Vec::new())).collect();
    for ch in &network.channels {
        if let Some(v) = adjacency.get_mut(&ch.node_a) {
            v.push(ch.node_b);
        }
        if let Some(v) = adjacency.get_mut(&ch.node_b) {
            v.push(ch.node_a);
        }
    }
    let start = network.nodes[0].id;
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(n) = queue.pop_front() {
        for &m in adjacency.get(&n).into_iter().flatten() {
            if adjacency.contains_key(&m) && seen.insert(m) {
                queue.push_back(m);
            }
        }
    }
    seen.len() == adjacency.len()
}
