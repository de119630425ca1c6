//! Network data model: nodes, rectangular channels, the working fluid, and the
//! split of a network into lattice-resolved junction regions and abstract
//! channel segments.

mod decompose;
mod parse;
mod schemes;
mod validate;

pub(crate) use decompose::channel_rect;
pub use decompose::{
    decompose, decompose_with, CfdRegion, DecomposeError, DecomposeOptions, Decomposition,
    InterfacePort, Rect, Segment, SegmentPiece, Terminal,
};
pub use parse::{parse_network, to_document, ParseError};
pub use schemes::{assign_schemes, ungrounded_components, Scheme};
pub use validate::{validate, Rule, Subject, Violation};

use serde::{Deserialize, Serialize};
use std::fmt;

/// Identifier of a network node as given in the network file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

/// Identifier of a channel as given in the network file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChannelId(pub u32);

/// Identifier of an interface port, assigned by [`decompose`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PortId(pub u32);

/// Identifier of a lattice-resolved region, assigned by [`decompose`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RegionId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node {}", self.0)
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "channel {}", self.0)
    }
}

impl fmt::Display for PortId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "port {}", self.0)
    }
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "region {}", self.0)
    }
}

/// A point in the chip plane, metres.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }

    pub fn offset(self, dir: (f64, f64), dist: f64) -> Point {
        Point::new(self.x + dir.0 * dist, self.y + dir.1 * dist)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NodeKind {
    Internal,
    /// Prescribed absolute pressure in Pa.
    Ground {
        pressure: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub position: Point,
    pub kind: NodeKind,
}

impl Node {
    pub fn ground_pressure(&self) -> Option<f64> {
        match self.kind {
            NodeKind::Ground { pressure } => Some(pressure),
            NodeKind::Internal => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        matches!(self.kind, NodeKind::Ground { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub id: ChannelId,
    pub node_a: NodeId,
    pub node_b: NodeId,
    /// Channel width in m.
    pub width: f64,
    /// Channel length in m, derived from the node positions unless given.
    pub length: f64,
}

impl Channel {
    pub fn other_end(&self, node: NodeId) -> NodeId {
        if node == self.node_a {
            self.node_b
        } else {
            self.node_a
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fluid {
    /// kg/m³
    pub density: f64,
    /// m²/s
    pub kinematic_viscosity: f64,
}

impl Fluid {
    /// Water at room temperature.
    pub const WATER: Fluid = Fluid {
        density: 1000.0,
        kinematic_viscosity: 1e-6,
    };

    /// Pa·s
    pub fn dynamic_viscosity(&self) -> f64 {
        self.density * self.kinematic_viscosity
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub nodes: Vec<Node>,
    pub channels: Vec<Channel>,
    pub fluid: Fluid,
}

impl Network {
    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn channel(&self, id: ChannelId) -> Option<&Channel> {
        self.channels.iter().find(|c| c.id == id)
    }

    /// Channels touching `node`, ordered by channel id.
    pub fn incident_channels(&self, node: NodeId) -> Vec<&Channel> {
        let mut out: Vec<&Channel> = self
            .channels
            .iter()
            .filter(|c| c.node_a == node || c.node_b == node)
            .collect();
        out.sort_by_key(|c| c.id);
        out
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.channels
            .iter()
            .map(|c| usize::from(c.node_a == node) + usize::from(c.node_b == node))
            .sum()
    }

    pub fn ground_nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.is_ground())
    }

    /// (min, max) over the prescribed ground pressures.
    pub fn ground_pressure_bounds(&self) -> Option<(f64, f64)> {
        self.ground_nodes()
            .filter_map(Node::ground_pressure)
            .fold(None, |acc, p| match acc {
                None => Some((p, p)),
                Some((lo, hi)) => Some((lo.min(p), hi.max(p))),
            })
    }

    /// Unit vector pointing along `channel` away from `from`.
    pub fn direction_from(&self, channel: &Channel, from: NodeId) -> Option<(f64, f64)> {
        let a = self.node(from)?.position;
        let b = self.node(channel.other_end(from))?.position;
        let len = a.distance(b);
        (len > 0.0).then(|| ((b.x - a.x) / len, (b.y - a.y) / len))
    }

    /// Scales every ground pressure by `factor`; used by the linearity checks.
    pub fn with_scaled_pressures(&self, factor: f64) -> Network {
        let mut out = self.clone();
        for n in &mut out.nodes {
            if let NodeKind::Ground { pressure } = &mut n.kind {
                *pressure *= factor;
            }
        }
        out
    }
}

/// Ready-made networks used by the examples, tests and the CLI docs.
pub mod canonical {
    use super::*;

    fn ground(id: u32, x: f64, y: f64, pressure: f64) -> Node {
        Node {
            id: NodeId(id),
            position: Point::new(x, y),
            kind: NodeKind::Ground { pressure },
        }
    }

    fn internal(id: u32, x: f64, y: f64) -> Node {
        Node {
            id: NodeId(id),
            position: Point::new(x, y),
            kind: NodeKind::Internal,
        }
    }

    fn channel(net: &Network, id: u32, a: u32, b: u32, width: f64) -> Channel {
        let pa = net.node(NodeId(a)).unwrap().position;
        let pb = net.node(NodeId(b)).unwrap().position;
        Channel {
            id: ChannelId(id),
            node_a: NodeId(a),
            node_b: NodeId(b),
            width,
            length: pa.distance(pb),
        }
    }

    fn build(nodes: Vec<Node>, edges: &[(u32, u32)], width: f64) -> Network {
        let mut net = Network {
            nodes,
            channels: Vec::new(),
            fluid: Fluid::WATER,
        };
        net.channels = edges
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| channel(&net, i as u32, a, b, width))
            .collect();
        net
    }

    /// One straight horizontal channel between two ground nodes.
    pub fn straight(length: f64, width: f64, p_in: f64, p_out: f64) -> Network {
        build(
            vec![ground(0, 0.0, 0.0, p_in), ground(1, length, 0.0, p_out)],
            &[(0, 1)],
            width,
        )
    }

    /// Plus-shaped crossing: inlets west, north and south at `p_in`, outlet
    /// east at `p_out`, every arm `arm` long.
    pub fn cross(arm: f64, width: f64, p_in: f64, p_out: f64) -> Network {
        build(
            vec![
                internal(4, 0.0, 0.0),
                ground(0, -arm, 0.0, p_in),
                ground(1, 0.0, arm, p_in),
                ground(2, 0.0, -arm, p_in),
                ground(3, arm, 0.0, p_out),
            ],
            &[(0, 4), (1, 4), (2, 4), (4, 3)],
            width,
        )
    }

    /// Two horizontal rails joined by one vertical rung between two
    /// T-junctions. The rung is not connected to any ground node.
    pub fn ladder(l: f64, width: f64, p_top: f64, p_bottom: f64, p_out: f64) -> Network {
        build(
            vec![
                ground(0, 0.0, l, p_top),
                internal(1, l, l),
                ground(2, 2.0 * l, l, p_out),
                ground(3, 0.0, 0.0, p_bottom),
                internal(4, l, 0.0),
                ground(5, 2.0 * l, 0.0, p_out),
            ],
            &[(0, 1), (1, 2), (3, 4), (4, 5), (1, 4)],
            width,
        )
    }

    /// Three T-junctions in a row, each draining downwards to an outlet. The
    /// two rail pieces between the junctions carry no ground node.
    pub fn comb(l: f64, width: f64, p_in: f64, p_out: f64) -> Network {
        build(
            vec![
                ground(0, 0.0, 0.0, p_in),
                internal(1, l, 0.0),
                internal(2, 2.0 * l, 0.0),
                internal(3, 3.0 * l, 0.0),
                ground(4, 4.0 * l, 0.0, p_out),
                ground(5, l, -l, p_out),
                ground(6, 2.0 * l, -l, p_out),
                ground(7, 3.0 * l, -l, p_out),
            ],
            &[(0, 1), (1, 2), (2, 3), (3, 4), (1, 5), (2, 6), (3, 7)],
            width,
        )
    }
}
