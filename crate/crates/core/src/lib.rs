//! Steady-state flow simulation of channel-based microfluidic networks.
//!
//! Junctions and bends are resolved with a D2Q9 lattice Boltzmann solver,
//! straight channels with Hagen–Poiseuille resistances solved by nodal
//! analysis. The two sides exchange pressures and flow rates at interface
//! sections until the interface values stop changing.

pub mod coupling;
pub mod lbm;
pub mod mna;
pub mod netmodel;

pub use netmodel::{ChannelId, Network, NodeId, PortId, RegionId};
