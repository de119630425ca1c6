use super::{Decomposition, PortId, Terminal};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Which quantity crosses a port in which direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// The abstract side sends a flow rate, imposed on the lattice as a
    /// parabolic velocity profile; the lattice returns the section pressure.
    FlowToCfd,
    /// The abstract side sends a pressure; the lattice returns the flow rate.
    PressureToCfd,
}

/// Connected components of the abstract (segment) graph that contain no
/// ground node, each given as its sorted port ids. Components are ordered by
/// their lowest port id.
pub fn ungrounded_components(decomposition: &Decomposition) -> Vec<Vec<PortId>> {
    let terminals = decomposition.terminals();
    let index: BTreeMap<Terminal, usize> =
        terminals.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let mut parent: Vec<usize> = (0..terminals.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for s in &decomposition.segments {
        let (a, b) = (
            find(&mut parent, index[&s.ends[0]]),
            find(&mut parent, index[&s.ends[1]]),
        );
        parent[a] = b;
    }

    let mut grounded = BTreeSet::new();
    let mut ports: BTreeMap<usize, Vec<PortId>> = BTreeMap::new();
    for (i, t) in terminals.iter().enumerate() {
        let root = find(&mut parent, i);
        match t {
            Terminal::Node(n) => {
                if decomposition
                    .network
                    .node(*n)
                    .is_some_and(|node| node.is_ground())
                {
                    grounded.insert(root);
                }
            }
            Terminal::Port(p) => ports.entry(root).or_default().push(*p),
        }
    }
    let mut out: Vec<Vec<PortId>> = ports
        .into_iter()
        .filter(|(root, _)| !grounded.contains(root))
        .map(|(_, mut v)| {
            v.sort();
            v
        })
        .collect();
    out.sort();
    out
}

/// Fills `port_schemes`: every port defaults to [`Scheme::PressureToCfd`];
/// each abstract component without a ground node gets one
/// [`Scheme::FlowToCfd`] port so that its absolute pressure level is fixed by
/// the lattice.
///
/// The chosen port is the lowest id in the component, skipping ports whose
/// region would be left without any pressure-imposing port.
pub fn assign_schemes(decomposition: &Decomposition) -> Decomposition {
    let mut out = decomposition.clone();
    out.port_schemes = out
        .ports
        .iter()
        .map(|p| (p.id, Scheme::PressureToCfd))
        .collect();
    for component in ungrounded_components(decomposition) {
        let keeps_pressure_port = |candidate: PortId, schemes: &BTreeMap<PortId, Scheme>| {
            let region = out.port(candidate).region;
            out.region(region)
                .ports
                .iter()
                .any(|&p| p != candidate && schemes[&p] == Scheme::PressureToCfd)
        };
        let chosen = component
            .iter()
            .copied()
            .find(|&p| keeps_pressure_port(p, &out.port_schemes))
            .unwrap_or(component[0]);
        out.port_schemes.insert(chosen, Scheme::FlowToCfd);
    }
    out
}
