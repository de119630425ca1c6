//! Shared generators and oracles for the integration tests.
#![allow(dead_code)]

use mfd_sim::mna::{AbstractProblem, Edge, EdgeOrigin};
use mfd_sim::netmodel::{Channel, Fluid, Network, Node, NodeKind, Point, Terminal};
use mfd_sim::{ChannelId, NodeId};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::collections::{BTreeMap, BTreeSet};

/// Dense Gaussian elimination with partial pivoting over all nodes:
/// Dirichlet rows are identities, the others Kirchhoff balances.
pub fn dense_pressures(problem: &AbstractProblem) -> Vec<f64> {
    let n = problem.labels.len();
    let mut a = vec![vec![0.0; n + 1]; n];
    for e in &problem.edges {
        let g = 1.0 / e.resistance;
        for (i, j) in [(e.a, e.b), (e.b, e.a)] {
            a[i][i] += g;
            a[i][j] -= g;
        }
    }
    for (&node, &q) in &problem.flow_sources {
        a[node][n] += q;
    }
    for (&node, &p) in &problem.dirichlet {
        a[node] = vec![0.0; n + 1];
        a[node][node] = 1.0;
        a[node][n] = p;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for k in col..=n {
                    a[row][k] -= factor * a[col][k];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][n] - s) / a[row][row];
    }
    x
}

/// Random connected resistor network with `nodes` nodes, at least one
/// Dirichlet node and a few flow sources.
pub fn random_problem(seed: u64, nodes: usize) -> AbstractProblem {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut edges = Vec::new();
    let mut push = |a: usize, b: usize, rng: &mut StdRng| {
        edges.push(Edge {
            a,
            b,
            resistance: 10f64.powf(rng.random_range(5.0..9.0)),
            origin: EdgeOrigin::Segment(edges.len()),
        })
    };
    for k in 1..nodes {
        let parent = rng.random_range(0..k);
        push(parent, k, &mut rng);
    }
    for _ in 0..rng.random_range(0..=nodes) {
        let a = rng.random_range(0..nodes);
        let b = rng.random_range(0..nodes);
        if a != b {
            push(a, b, &mut rng);
        }
    }
    let grounded = rng.random_range(1..=nodes.min(4));
    let mut order: Vec<usize> = (0..nodes).collect();
    for k in (1..nodes).rev() {
        order.swap(k, rng.random_range(0..=k));
    }
    let dirichlet: BTreeMap<usize, f64> = order[..grounded]
        .iter()
        .map(|&i| (i, rng.random_range(0.0..1000.0)))
        .collect();
    let mut flow_sources = BTreeMap::new();
    for &i in &order[grounded..] {
        if rng.random_bool(0.3) {
            flow_sources.insert(i, rng.random_range(-1e-5..1e-5));
        }
    }
    AbstractProblem {
        labels: (0..nodes as u32)
            .map(|i| Terminal::Node(NodeId(i)))
            .collect(),
        edges,
        dirichlet,
        flow_sources,
    }
}

/// Random axis-aligned network on a grid with pitch `pitch`: a spanning tree
/// of grid links plus extra links, inlets on the left column and outlets on
/// the right column, each attached by one channel. Every internal node has
/// degree at least two.
pub fn random_grid_network(seed: u64, pitch: f64, width: f64) -> Network {
    let mut rng = StdRng::seed_from_u64(seed);
    let gx = rng.random_range(2..=4usize);
    let gy = rng.random_range(2..=3usize);
    let id = |i: usize, j: usize| (j * gx + i) as u32;
    let mut links: BTreeSet<(u32, u32)> = BTreeSet::new();
    let mut seen = vec![false; gx * gy];
    let mut stack = vec![(0usize, 0usize)];
    seen[0] = true;
    while let Some(&(i, j)) = stack.last() {
        let mut next = Vec::new();
        if i > 0 {
            next.push((i - 1, j));
        }
        if i + 1 < gx {
            next.push((i + 1, j));
        }
        if j > 0 {
            next.push((i, j - 1));
        }
        if j + 1 < gy {
            next.push((i, j + 1));
        }
        next.retain(|&(a, b)| !seen[b * gx + a]);
        if next.is_empty() {
            stack.pop();
            continue;
        }
        let (a, b) = next[rng.random_range(0..next.len())];
        seen[b * gx + a] = true;
        let (u, v) = (id(i, j), id(a, b));
        links.insert((u.min(v), u.max(v)));
        stack.push((a, b));
    }
    let mut all = Vec::new();
    for j in 0..gy {
        for i in 0..gx {
            if i + 1 < gx {
                all.push((id(i, j), id(i + 1, j)));
            }
            if j + 1 < gy {
                all.push((id(i, j), id(i, j + 1)));
            }
        }
    }
    for &l in &all {
        if rng.random_bool(0.3) {
            links.insert(l);
        }
    }
    let mut nodes: Vec<Node> = (0..gy)
        .flat_map(|j| (0..gx).map(move |i| (i, j)))
        .map(|(i, j)| Node {
            id: NodeId(id(i, j)),
            position: Point::new((i + 1) as f64 * pitch, j as f64 * pitch),
            kind: NodeKind::Internal,
        })
        .collect();
    let degree = |links: &BTreeSet<(u32, u32)>, n: u32| {
        links.iter().filter(|l| l.0 == n || l.1 == n).count()
    };
    // Inlets and outlets: each left/right-column node gets one with some
    // probability, at least one per side; degree-1 internal nodes get one.
    let mut next_id = (gx * gy) as u32;
    let mut grounds = Vec::new();
    for (col, x, lo, hi) in [
        (0, 0.0, 600.0, 1000.0),
        (gx - 1, (gx + 1) as f64 * pitch, 0.0, 300.0),
    ] {
        let mut added = 0;
        for j in 0..gy {
            let n = id(col, j);
            let needed = degree(&links, n) < 2;
            if needed || rng.random_bool(0.5) || (added == 0 && j + 1 == gy) {
                grounds.push((n, Point::new(x, j as f64 * pitch), rng.random_range(lo..hi)));
                added += 1;
            }
        }
    }
    for (n, pos, p) in &grounds {
        nodes.push(Node {
            id: NodeId(next_id),
            position: *pos,
            kind: NodeKind::Ground { pressure: *p },
        });
        links.insert((*n, next_id));
        next_id += 1;
    }
    // Interior nodes left with a single link get a second grid link.
    for &(u, v) in &all {
        for n in [u, v] {
            if degree(&links, n) < 2 {
                links.insert((u, v));
            }
        }
    }
    let mut net = Network {
        nodes,
        channels: Vec::new(),
        fluid: Fluid::WATER,
    };
    net.channels = links
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| {
            let pa = net.node(NodeId(a)).unwrap().position;
            let pb = net.node(NodeId(b)).unwrap().position;
            Channel {
                id: ChannelId(k as u32),
                node_a: NodeId(a),
                node_b: NodeId(b),
                width,
                length: pa.distance(pb),
            }
        })
        .collect();
    net
}
