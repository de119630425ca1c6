use super::{channel_resistance, MnaError};
use crate::netmodel::{
    ChannelId, Decomposition, Network, NodeId, PortId, RegionId, Scheme, Segment, Terminal,
};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeOrigin {
    /// An abstract segment of the decomposition (by index).
    Segment(usize),
    /// Placeholder edge between two ports of a region in the initial guess.
    Bootstrap {
        region: RegionId,
        ports: (PortId, PortId),
    },
    /// A whole network channel, used when no decomposition is involved.
    Channel(ChannelId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    /// Pa·s/m²
    pub resistance: f64,
    pub origin: EdgeOrigin,
}

/// Linear resistive network with prescribed pressures and injected flows.
#[derive(Debug, Clone, PartialEq)]
pub struct AbstractProblem {
    /// What each unknown stands for.
    pub labels: Vec<Terminal>,
    pub edges: Vec<Edge>,
    /// Node index → prescribed pressure, Pa.
    pub dirichlet: BTreeMap<usize, f64>,
    /// Node index → flow rate injected into the network, m²/s.
    pub flow_sources: BTreeMap<usize, f64>,
}

impl AbstractProblem {
    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn index_of(&self, terminal: Terminal) -> Option<usize> {
        self.labels.iter().position(|&t| t == terminal)
    }

    /// Checks the structural invariants [`super::solve`] relies on.
    pub fn check(&self) -> Result<(), MnaError> {
        let n = self.node_count();
        for (i, e) in self.edges.iter().enumerate() {
            for node in [e.a, e.b] {
                if node >= n {
                    return Err(MnaError::DanglingEdge { edge: i, node });
                }
            }
            if !(e.resistance.is_finite() && e.resistance > 0.0) {
                return Err(MnaError::NonPositive {
                    what: "edge resistance",
                    value: e.resistance,
                });
            }
        }
        if let Some(&node) = self
            .flow_sources
            .keys()
            .find(|k| self.dirichlet.contains_key(k))
        {
            return Err(MnaError::SourceOnDirichlet(node));
        }
        let component = self.components();
        let grounded: BTreeSet<usize> = self.dirichlet.keys().map(|&k| component[k]).collect();
        if let Some(node) = (0..n).find(|&i| !grounded.contains(&component[i])) {
            return Err(MnaError::Ungrounded {
                node,
                label: format!("{:?}", self.labels[node]),
            });
        }
        Ok(())
    }

    /// Component representative for every node.
    pub fn components(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.node_count()).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.a), find(&mut parent, e.b));
            parent[a] = b;
        }
        (0..self.node_count())
            .map(|i| find(&mut parent, i))
            .collect()
    }
}

fn segment_resistance(network: &Network, segment: &Segment) -> Result<f64, MnaError> {
    let mu = network.fluid.dynamic_viscosity();
    segment.pieces.iter().try_fold(0.0, |acc, piece| {
        let ch = network
            .channel(piece.channel)
            .ok_or(MnaError::UnknownChannel(piece.channel))?;
        Ok(acc + channel_resistance(piece.length(), ch.width, mu)?.value())
    })
}

/// Terminals, segment edges and ground Dirichlet data shared by
/// [`assemble`] and [`bootstrap_problem`].
fn skeleton(decomposition: &Decomposition) -> Result<AbstractProblem, MnaError> {
    let labels = decomposition.terminals();
    let index: BTreeMap<Terminal, usize> =
        labels.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let network = &decomposition.network;
    let edges = decomposition
        .segments
        .iter()
        .map(|s| {
            Ok(Edge {
                a: index[&s.ends[0]],
                b: index[&s.ends[1]],
                resistance: segment_resistance(network, s)?,
                origin: EdgeOrigin::Segment(s.index),
            })
        })
        .collect::<Result<Vec<_>, MnaError>>()?;
    let dirichlet = labels
        .iter()
        .enumerate()
        .filter_map(|(i, t)| match t {
            Terminal::Node(n) => network.node(*n)?.ground_pressure().map(|p| (i, p)),
            Terminal::Port(_) => None,
        })
        .collect();
    Ok(AbstractProblem {
        labels,
        edges,
        dirichlet,
        flow_sources: BTreeMap::new(),
    })
}

/// Nodal problem of the abstract segments given the latest lattice data.
///
/// Pressure-imposing ports feed the measured inflow into their region back as
/// a flow leaving the abstract network; flow-imposing ports pin the abstract
/// network to the measured section pressure.
pub fn assemble(
    decomposition: &Decomposition,
    port_pressures: &BTreeMap<PortId, f64>,
    port_flows: &BTreeMap<PortId, f64>,
) -> Result<AbstractProblem, MnaError> {
    let mut problem = skeleton(decomposition)?;
    for port in &decomposition.ports {
        let Some(node) = problem.index_of(Terminal::Port(port.id)) else {
            continue;
        };
        match decomposition.scheme(port.id) {
            Scheme::PressureToCfd => {
                let q = *port_flows.get(&port.id).ok_or(MnaError::MissingPortDatum {
                    port: port.id,
                    kind: "flow rate",
                })?;
                problem.flow_sources.insert(node, -q);
            }
            Scheme::FlowToCfd => {
                let p = *port_pressures
                    .get(&port.id)
                    .ok_or(MnaError::MissingPortDatum {
                        port: port.id,
                        kind: "pressure",
                    })?;
                problem.dirichlet.insert(node, p);
            }
        }
    }
    problem.check()?;
    Ok(problem)
}

/// Initial-guess problem: every region is replaced by a complete graph over
/// its ports, each edge a straight channel as long as the distance between
/// the two section midpoints and as wide as the narrower of the two.
pub fn bootstrap_problem(decomposition: &Decomposition) -> Result<AbstractProblem, MnaError> {
    let mut problem = skeleton(decomposition)?;
    let mu = decomposition.network.fluid.dynamic_viscosity();
    for region in &decomposition.regions {
        for (i, &pa) in region.ports.iter().enumerate() {
            for &pb in &region.ports[i + 1..] {
                let (a, b) = (decomposition.port(pa), decomposition.port(pb));
                let resistance =
                    channel_resistance(a.center.distance(b.center), a.width.min(b.width), mu)?;
                problem.edges.push(Edge {
                    a: problem.index_of(Terminal::Port(pa)).expect("port terminal"),
                    b: problem.index_of(Terminal::Port(pb)).expect("port terminal"),
                    resistance: resistance.value(),
                    origin: EdgeOrigin::Bootstrap {
                        region: region.id,
                        ports: (pa, pb),
                    },
                });
            }
        }
    }
    problem.check()?;
    Ok(problem)
}

/// The undivided network: one node per network node, one edge per channel.
pub fn network_problem(network: &Network) -> Result<AbstractProblem, MnaError> {
    let mut ids: Vec<NodeId> = network.nodes.iter().map(|n| n.id).collect();
    ids.sort();
    let index: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let mu = network.fluid.dynamic_viscosity();
    let edges = network
        .channels
        .iter()
        .map(|c| {
            Ok(Edge {
                a: index[&c.node_a],
                b: index[&c.node_b],
                resistance: channel_resistance(c.length, c.width, mu)?.value(),
                origin: EdgeOrigin::Channel(c.id),
            })
        })
        .collect::<Result<Vec<_>, MnaError>>()?;
    let dirichlet = network
        .nodes
        .iter()
        .filter_map(|n| n.ground_pressure().map(|p| (index[&n.id], p)))
        .collect();
    let problem = AbstractProblem {
        labels: ids.into_iter().map(Terminal::Node).collect(),
        edges,
        dirichlet,
        flow_sources: BTreeMap::new(),
    };
    problem.check()?;
    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{assign_schemes, canonical, decompose};

    const W: f64 = 1e-4;

    #[test]
    fn straight_channel_problem() {
        let d = assign_schemes(&decompose(&canonical::straight(1e-3, W, 1000.0, 0.0)).unwrap());
        let p = assemble(&d, &BTreeMap::new(), &BTreeMap::new()).unwrap();
        assert_eq!(p.node_count(), 2);
        assert_eq!(p.edges.len(), 1);
        assert_eq!(p.dirichlet.len(), 2);
        assert_eq!(bootstrap_problem(&d).unwrap(), p);
    }

    #[test]
    fn cross_problem_counts() {
        let d = assign_schemes(&decompose(&canonical::cross(1e-3, W, 1000.0, 0.0)).unwrap());
        let flows: BTreeMap<_, _> = d.ports.iter().map(|p| (p.id, 1e-5)).collect();
        let p = assemble(&d, &BTreeMap::new(), &flows).unwrap();
        // Counting oracle: grounds are the network nodes minus the junction,
        // plus one node per port.
        let grounds = d.network.ground_nodes().count();
        assert_eq!(p.node_count(), grounds + d.ports.len());
        assert_eq!(p.node_count(), 8);
        assert_eq!(p.edges.len(), d.segments.len());
        assert_eq!(p.flow_sources.len(), 4);
        assert_eq!(p.dirichlet.len(), 4);
        assert!(p.flow_sources.values().all(|&q| q == -1e-5));

        let b = bootstrap_problem(&d).unwrap();
        assert_eq!(b.edges.len(), 4 + 6);
        assert!(b.flow_sources.is_empty());
    }

    #[test]
    fn ladder_flow_port_is_dirichlet() {
        let d =
            assign_schemes(&decompose(&canonical::ladder(1e-3, W, 1000.0, 500.0, 0.0)).unwrap());
        let flow_port = *d
            .port_schemes
            .iter()
            .find(|(_, s)| **s == Scheme::FlowToCfd)
            .unwrap()
            .0;
        let pressures = BTreeMap::from([(flow_port, 321.0)]);
        let flows: BTreeMap<_, _> = d
            .ports
            .iter()
            .filter(|p| p.id != flow_port)
            .map(|p| (p.id, 0.0))
            .collect();
        let p = assemble(&d, &pressures, &flows).unwrap();
        let node = p.index_of(Terminal::Port(flow_port)).unwrap();
        assert_eq!(p.dirichlet.get(&node), Some(&321.0));
        assert!(!p.flow_sources.contains_key(&node));

        let b = bootstrap_problem(&d).unwrap();
        // Two T-junctions, three internal edges each.
        assert_eq!(b.edges.len() - d.segments.len(), 6);
    }

    #[test]
    fn missing_datum_is_an_error() {
        let d = assign_schemes(&decompose(&canonical::cross(1e-3, W, 1000.0, 0.0)).unwrap());
        let err = assemble(&d, &BTreeMap::new(), &BTreeMap::new()).unwrap_err();
        assert!(matches!(
            err,
            MnaError::MissingPortDatum {
                kind: "flow rate",
                ..
            }
        ));
    }

    #[test]
    fn all_pressure_ladder_is_ungrounded() {
        let d = decompose(&canonical::ladder(1e-3, W, 1000.0, 500.0, 0.0)).unwrap();
        let flows: BTreeMap<_, _> = d.ports.iter().map(|p| (p.id, 0.0)).collect();
        // No scheme assignment: the rung has no pressure reference.
        let err = assemble(&d, &BTreeMap::new(), &flows).unwrap_err();
        assert!(matches!(err, MnaError::Ungrounded { .. }));
    }
}
