use super::{d2q9, lattice::Lattice, LbmError, UnitConverter, MIN_RESOLUTION};
use crate::netmodel::{Decomposition, Network, NodeId, Point, PortId, Rect, RegionId};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Open boundary of a lattice: an interface port of a region, or a ground
/// node when the whole network is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BoundaryKey {
    Interface(PortId),
    Ground(NodeId),
}

impl fmt::Display for BoundaryKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryKey::Interface(p) => write!(f, "{p}"),
            BoundaryKey::Ground(n) => write!(f, "ground {n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortGeometry {
    pub key: BoundaryKey,
    /// Midpoint of the section.
    pub center: Point,
    /// Unit normal pointing into the fluid.
    pub inward: (f64, f64),
    pub width: f64,
}

/// Fluid domain as a union of axis-aligned rectangles plus open sections.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGeometry {
    pub bounds: Rect,
    pub fluid: Vec<Rect>,
    pub ports: Vec<PortGeometry>,
}

fn axis_direction(v: (f64, f64), what: impl FnOnce() -> String) -> Result<usize, LbmError> {
    const TOL: f64 = 1e-9;
    let snap = |c: f64| {
        if (c - 1.0).abs() < TOL {
            Some(1)
        } else if (c + 1.0).abs() < TOL {
            Some(-1)
        } else if c.abs() < TOL {
            Some(0)
        } else {
            None
        }
    };
    match (snap(v.0), snap(v.1)) {
        (Some(x), Some(y)) => {
            d2q9::axis_index(x, y).ok_or_else(|| LbmError::NotAxisAligned(what()))
        }
        _ => Err(LbmError::NotAxisAligned(what())),
    }
}

/// Lattice of one junction region: its stubs, open at the interface sections.
pub fn build_region_lattice(
    decomposition: &Decomposition,
    region: RegionId,
    converter: UnitConverter,
) -> Result<Lattice, LbmError> {
    let region = decomposition.region(region);
    let ports = region
        .ports
        .iter()
        .map(|&id| {
            let p = decomposition.port(id);
            PortGeometry {
                key: BoundaryKey::Interface(id),
                center: p.center,
                inward: p.inward,
                width: p.width,
            }
        })
        .collect();
    let geometry = LatticeGeometry {
        bounds: region.extent,
        fluid: region.stubs.clone(),
        ports,
    };
    voxelize(&geometry, converter)
}

/// Lattice of the whole network, open at every ground node. Channels are
/// extended by half a width past internal nodes so junctions are filled.
pub fn build_monolithic_lattice(
    network: &Network,
    converter: UnitConverter,
) -> Result<Lattice, LbmError> {
    let mut fluid = Vec::new();
    let mut ports = Vec::new();
    for ch in &network.channels {
        let (a, b) = match (network.node(ch.node_a), network.node(ch.node_b)) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(LbmError::NotAxisAligned(format!(
                    "{} has unknown nodes",
                    ch.id
                )))
            }
        };
        let dir = network
            .direction_from(ch, a.id)
            .ok_or_else(|| LbmError::NotAxisAligned(format!("{}", ch.id)))?;
        axis_direction(dir, || format!("{}", ch.id))?;
        let ext = |n: &crate::netmodel::Node| if n.is_ground() { 0.0 } else { ch.width / 2.0 };
        let start = a.position.offset(dir, -ext(a));
        let end = b.position.offset(dir, ext(b));
        fluid.push(crate::netmodel::channel_rect(start, end, ch.width));
        for (node, inward) in [(a, dir), (b, (-dir.0, -dir.1))] {
            if node.is_ground() {
                ports.push(PortGeometry {
                    key: BoundaryKey::Ground(node.id),
                    center: node.position,
                    inward,
                    width: ch.width,
                });
            }
        }
    }
    let bounds = fluid
        .iter()
        .copied()
        .reduce(Rect::union)
        .ok_or(LbmError::Empty)?;
    voxelize(
        &LatticeGeometry {
            bounds,
            fluid,
            ports,
        },
        converter,
    )
}

pub(crate) const NONE: u32 = u32::MAX;

/// Raw output of [`voxelize`]: dense grid plus port cell lists.
pub(crate) struct Voxels {
    pub nx: usize,
    pub ny: usize,
    pub origin: Point,
    /// Dense index → sparse fluid index or [`NONE`].
    pub index: Vec<u32>,
    pub coords: Vec<(u32, u32)>,
    pub ports: Vec<VoxelPort>,
}

pub(crate) struct VoxelPort {
    pub key: BoundaryKey,
    pub center: Point,
    pub inward_q: usize,
    pub width: f64,
    pub cells: Vec<u32>,
    /// Distance of each cell centre from one edge of the section, m.
    pub offsets: Vec<f64>,
}

pub fn voxelize(geometry: &LatticeGeometry, converter: UnitConverter) -> Result<Lattice, LbmError> {
    let dx = converter.dx;
    for p in &geometry.ports {
        let cells = p.width / dx;
        if cells + 1e-6 < MIN_RESOLUTION as f64 {
            return Err(LbmError::ResolutionTooLow(cells.round() as usize));
        }
    }
    let b = geometry.bounds;
    let nx = (b.width() / dx - 1e-6).ceil().max(1.0) as usize;
    let ny = (b.height() / dx - 1e-6).ceil().max(1.0) as usize;
    let origin = b.min;
    let centre = |i: usize, j: usize| {
        Point::new(
            origin.x + (i as f64 + 0.5) * dx,
            origin.y + (j as f64 + 0.5) * dx,
        )
    };

    let mut index = vec![NONE; nx * ny];
    let mut coords = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let c = centre(i, j);
            if geometry.fluid.iter().any(|r| r.contains(c, 0.0)) {
                index[j * nx + i] = coords.len() as u32;
                coords.push((i as u32, j as u32));
            }
        }
    }
    if coords.is_empty() {
        return Err(LbmError::Empty);
    }
    let fluid_at = |i: i64, j: i64| -> Option<u32> {
        if i < 0 || j < 0 || i >= nx as i64 || j >= ny as i64 {
            return None;
        }
        let k = index[j as usize * nx + i as usize];
        (k != NONE).then_some(k)
    };

    let mut ports = Vec::with_capacity(geometry.ports.len());
    for p in &geometry.ports {
        let q = axis_direction(p.inward, || format!("{}", p.key))?;
        let [cx, cy] = d2q9::C[q];
        let malformed = |reason: String| LbmError::MalformedPort { key: p.key, reason };
        // Normal axis: the cell layer just inside the section.
        let (normal_origin, normal_centre) = if cx != 0 {
            (origin.x, p.center.x)
        } else {
            (origin.y, p.center.y)
        };
        let face = ((normal_centre - normal_origin) / dx).round() as i64;
        let layer = if cx + cy > 0 { face } else { face - 1 };
        let (t_origin, t_centre) = if cx != 0 {
            (origin.y, p.center.y)
        } else {
            (origin.x, p.center.x)
        };
        let lo = t_centre - p.width / 2.0;
        let first = ((lo - t_origin) / dx).round() as i64;
        let count = (p.width / dx).round() as i64;
        let mut cells = Vec::with_capacity(count as usize);
        let mut offsets = Vec::with_capacity(count as usize);
        for k in first..first + count {
            let (i, j) = if cx != 0 { (layer, k) } else { (k, layer) };
            let cell = fluid_at(i, j)
                .ok_or_else(|| malformed(format!("section cell ({i}, {j}) is not fluid")))?;
            if fluid_at(i - cx as i64, j - cy as i64).is_some() {
                return Err(malformed(format!(
                    "fluid continues outside the section at cell ({i}, {j})"
                )));
            }
            cells.push(cell);
            offsets.push(t_origin + (k as f64 + 0.5) * dx - lo);
        }
        ports.push(VoxelPort {
            key: p.key,
            center: p.center,
            inward_q: q,
            width: p.width,
            cells,
            offsets,
        });
    }

    Ok(Lattice::from_voxels(
        Voxels {
            nx,
            ny,
            origin,
            index,
            coords,
            ports,
        },
        converter,
    ))
}
