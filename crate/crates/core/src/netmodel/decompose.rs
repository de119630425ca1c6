use super::{ChannelId, Network, NodeId, Point, PortId, RegionId, Scheme};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn from_corners(points: &[Point]) -> Rect {
        let mut r = Rect {
            min: Point::new(f64::INFINITY, f64::INFINITY),
            max: Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        };
        for p in points {
            r.min.x = r.min.x.min(p.x);
            r.min.y = r.min.y.min(p.y);
            r.max.x = r.max.x.max(p.x);
            r.max.y = r.max.y.max(p.y);
        }
        r
    }

    pub fn union(self, other: Rect) -> Rect {
        Rect::from_corners(&[self.min, self.max, other.min, other.max])
    }

    /// Inclusive containment with an absolute slack.
    pub fn contains(&self, p: Point, slack: f64) -> bool {
        p.x >= self.min.x - slack
            && p.x <= self.max.x + slack
            && p.y >= self.min.y - slack
            && p.y <= self.max.y + slack
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

/// Rectangle (in general rotated) covering a straight channel piece from
/// `from` to `to`, returned as its axis-aligned bounding box.
pub(crate) fn channel_rect(from: Point, to: Point, width: f64) -> Rect {
    let len = from.distance(to);
    let (tx, ty) = ((to.x - from.x) / len, (to.y - from.y) / len);
    let (nx, ny) = (-ty * width / 2.0, tx * width / 2.0);
    Rect::from_corners(&[
        Point::new(from.x + nx, from.y + ny),
        Point::new(from.x - nx, from.y - ny),
        Point::new(to.x + nx, to.y + ny),
        Point::new(to.x - nx, to.y - ny),
    ])
}

/// Cross-section where a lattice region hands over to an abstract segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfacePort {
    pub id: PortId,
    pub region: RegionId,
    pub channel: ChannelId,
    pub junction: NodeId,
    /// Midpoint of the section line.
    pub center: Point,
    /// Unit vector normal to the section, pointing into the region.
    pub inward: (f64, f64),
    pub width: f64,
    /// Axial distance from the junction node to the section.
    pub distance: f64,
}

impl InterfacePort {
    /// End points of the section line.
    pub fn section(&self) -> (Point, Point) {
        let (tx, ty) = (-self.inward.1, self.inward.0);
        let h = self.width / 2.0;
        (
            self.center.offset((tx, ty), -h),
            self.center.offset((tx, ty), h),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfdRegion {
    pub id: RegionId,
    pub junction: NodeId,
    pub ports: Vec<PortId>,
    /// Bounding box of the junction and all stubs up to the port sections.
    pub extent: Rect,
    /// Fluid rectangles, one per port: junction core to section.
    pub stubs: Vec<Rect>,
}

/// End of an abstract segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Terminal {
    Node(NodeId),
    Port(PortId),
}

/// Part of one channel retained in an abstract segment. `start < end` are
/// axial distances measured from the channel's `node_a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentPiece {
    pub channel: ChannelId,
    pub start: f64,
    pub end: f64,
    /// Whether the segment traverses this piece from `node_a` towards `node_b`.
    pub forward: bool,
}

impl SegmentPiece {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

/// Chain of channel pieces between two terminals, modelled as one hydraulic
/// resistance. Pieces are ordered from `ends[0]` to `ends[1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub index: usize,
    pub pieces: Vec<SegmentPiece>,
    pub ends: [Terminal; 2],
}

impl Segment {
    pub fn length(&self) -> f64 {
        self.pieces.iter().map(SegmentPiece::length).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeOptions {
    /// Distance from a junction to its interface sections, in channel widths.
    pub interface_distance_widths: f64,
    /// Abstract length every segment must keep, in channel widths.
    pub clearance_widths: f64,
    /// Degree-2 nodes bending by more than this are resolved on the lattice.
    pub bend_tolerance_deg: f64,
    /// Nodes forced into a lattice region regardless of their shape.
    pub forced_regions: BTreeSet<NodeId>,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            interface_distance_widths: 2.0,
            clearance_widths: 1.0,
            bend_tolerance_deg: 5.0,
            forced_regions: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub network: Network,
    pub options: DecomposeOptions,
    pub regions: Vec<CfdRegion>,
    pub ports: Vec<InterfacePort>,
    pub segments: Vec<Segment>,
    /// Filled by [`super::assign_schemes`].
    pub port_schemes: BTreeMap<PortId, Scheme>,
}

impl Decomposition {
    pub fn port(&self, id: PortId) -> &InterfacePort {
        &self.ports[id.0 as usize]
    }

    pub fn region(&self, id: RegionId) -> &CfdRegion {
        &self.regions[id.0 as usize]
    }

    pub fn scheme(&self, id: PortId) -> Scheme {
        self.port_schemes
            .get(&id)
            .copied()
            .unwrap_or(Scheme::PressureToCfd)
    }

    /// The segment ending at `port`, with the index (0 or 1) of that end.
    pub fn segment_at(&self, port: PortId) -> Option<(&Segment, usize)> {
        self.segments.iter().find_map(|s| {
            s.ends
                .iter()
                .position(|&t| t == Terminal::Port(port))
                .map(|k| (s, k))
        })
    }

    /// Every terminal in canonical order: network nodes by id, then ports.
    pub fn terminals(&self) -> Vec<Terminal> {
        let mut set: BTreeSet<Terminal> = BTreeSet::new();
        for s in &self.segments {
            set.extend(s.ends);
        }
        set.into_iter().collect()
    }

    /// Sum of all retained abstract lengths.
    pub fn segment_length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }

    /// Sum of all region stub lengths (junction centre to section).
    pub fn stub_length(&self) -> f64 {
        self.ports.iter().map(|p| p.distance).sum()
    }

    pub fn is_region_node(&self, node: NodeId) -> bool {
        self.regions.iter().any(|r| r.junction == node)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DecomposeError {
    #[error("{channel}: {available:e} m long but interface sections need {required:e} m")]
    Infeasible {
        channel: ChannelId,
        available: f64,
        required: f64,
    },
    #[error("{channel} references unknown {node}")]
    UnknownNode { channel: ChannelId, node: NodeId },
    #[error("{node}: coincident channel end points, direction undefined")]
    Degenerate { node: NodeId },
    #[error("closed loop of straight pass-through nodes starting at {0}")]
    ClosedLoop(ChannelId),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Role {
    Region,
    PassThrough,
    Terminal,
}

pub fn decompose(network: &Network) -> Result<Decomposition, DecomposeError> {
    decompose_with(network, &DecomposeOptions::default())
}

/// Splits `network` into lattice regions around junctions and bends, port
/// sections at `interface_distance_widths` from each junction, and abstract
/// segments covering the rest of every channel.
pub fn decompose_with(
    network: &Network,
    options: &DecomposeOptions,
) -> Result<Decomposition, DecomposeError> {
    for ch in &network.channels {
        for node in [ch.node_a, ch.node_b] {
            if network.node(node).is_none() {
                return Err(DecomposeError::UnknownNode {
                    channel: ch.id,
                    node,
                });
            }
        }
    }

    let mut nodes: Vec<_> = network.nodes.iter().collect();
    nodes.sort_by_key(|n| n.id);

    let mut roles = BTreeMap::new();
    for node in &nodes {
        let incident = network.incident_channels(node.id);
        let role = if node.is_ground() {
            Role::Terminal
        } else if options.forced_regions.contains(&node.id) || incident.len() >= 3 {
            Role::Region
        } else if incident.len() == 2 {
            let d0 = network
                .direction_from(incident[0], node.id)
                .ok_or(DecomposeError::Degenerate { node: node.id })?;
            let d1 = network
                .direction_from(incident[1], node.id)
                .ok_or(DecomposeError::Degenerate { node: node.id })?;
            // Straight continuation means the two outgoing directions are opposite.
            let cos = (-(d0.0 * d1.0 + d0.1 * d1.1)).clamp(-1.0, 1.0);
            if cos.acos().to_degrees() > options.bend_tolerance_deg {
                Role::Region
            } else {
                Role::PassThrough
            }
        } else {
            Role::Terminal
        };
        roles.insert(node.id, role);
    }

    let mut regions = Vec::new();
    let mut ports = Vec::new();
    let mut port_of = BTreeMap::new();
    for node in nodes.iter().filter(|n| roles[&n.id] == Role::Region) {
        let region_id = RegionId(regions.len() as u32);
        let mut region_ports = Vec::new();
        let mut stubs = Vec::new();
        for ch in network.incident_channels(node.id) {
            let dir = network
                .direction_from(ch, node.id)
                .ok_or(DecomposeError::Degenerate { node: node.id })?;
            let distance = options.interface_distance_widths * ch.width;
            let id = PortId(ports.len() as u32);
            let center = node.position.offset(dir, distance);
            stubs.push(channel_rect(
                node.position.offset(dir, -ch.width / 2.0),
                center,
                ch.width,
            ));
            ports.push(InterfacePort {
                id,
                region: region_id,
                channel: ch.id,
                junction: node.id,
                center,
                inward: (-dir.0, -dir.1),
                width: ch.width,
                distance,
            });
            port_of.insert((node.id, ch.id), id);
            region_ports.push(id);
        }
        let extent = stubs
            .iter()
            .copied()
            .reduce(Rect::union)
            .unwrap_or(Rect::from_corners(&[node.position]));
        regions.push(CfdRegion {
            id: region_id,
            junction: node.id,
            ports: region_ports,
            extent,
            stubs,
        });
    }

    // Retained axial interval of every channel.
    let mut retained = BTreeMap::new();
    for ch in &network.channels {
        let cut = |n: NodeId| {
            if roles[&n] == Role::Region {
                options.interface_distance_widths * ch.width
            } else {
                0.0
            }
        };
        let (start, end) = (cut(ch.node_a), ch.length - cut(ch.node_b));
        let required = cut(ch.node_a) + cut(ch.node_b) + options.clearance_widths * ch.width;
        if ch.length < required * (1.0 - 1e-12) {
            return Err(DecomposeError::Infeasible {
                channel: ch.id,
                available: ch.length,
                required,
            });
        }
        retained.insert(ch.id, (start, end));
    }

    let mut channels: Vec<_> = network.channels.iter().collect();
    channels.sort_by_key(|c| c.id);
    let mut used = BTreeSet::new();
    let mut segments = Vec::new();
    for seed in &channels {
        if used.contains(&seed.id) {
            continue;
        }
        // Walk backwards from node_a through pass-through nodes to find the
        // chain start, then forwards collecting pieces.
        let (mut node, mut ch) = (seed.node_a, *seed);
        while roles[&node] == Role::PassThrough {
            let next = network
                .incident_channels(node)
                .into_iter()
                .find(|c| c.id != ch.id)
                .expect("pass-through node has two channels");
            node = next.other_end(node);
            ch = next;
            if ch.id == seed.id {
                return Err(DecomposeError::ClosedLoop(seed.id));
            }
        }
        let start_terminal = terminal(roles[&node], node, ch.id, &port_of);
        let mut pieces = Vec::new();
        loop {
            used.insert(ch.id);
            let (start, end) = retained[&ch.id];
            let forward = ch.node_a == node;
            pieces.push(SegmentPiece {
                channel: ch.id,
                start,
                end,
                forward,
            });
            node = ch.other_end(node);
            if roles[&node] != Role::PassThrough {
                break;
            }
            ch = network
                .incident_channels(node)
                .into_iter()
                .find(|c| c.id != ch.id)
                .expect("pass-through node has two channels");
        }
        let end_terminal = terminal(roles[&node], node, ch.id, &port_of);
        segments.push(Segment {
            index: segments.len(),
            pieces,
            ends: [start_terminal, end_terminal],
        });
    }

    Ok(Decomposition {
        network: network.clone(),
        options: options.clone(),
        regions,
        ports,
        segments,
        port_schemes: BTreeMap::new(),
    })
}

fn terminal(
    role: Role,
    node: NodeId,
    channel: ChannelId,
    port_of: &BTreeMap<(NodeId, ChannelId), PortId>,
) -> Terminal {
    match role {
        Role::Region => Terminal::Port(port_of[&(node, channel)]),
        _ => Terminal::Node(node),
    }
}
