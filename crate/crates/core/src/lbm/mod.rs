//! D2Q9 lattice Boltzmann solver for the resolved junction regions.

pub mod d2q9;
mod export;
mod geometry;
mod lattice;
mod units;

pub use geometry::{
    build_monolithic_lattice, build_region_lattice, BoundaryKey, LatticeGeometry, PortGeometry,
};
pub use lattice::{
    parabolic_velocity, BoundaryValue, CellKind, Lattice, Macroscopics, OpenBoundary,
    PortMeasurement, SteadyState, STEADY_CHECK_INTERVAL, STEADY_TOLERANCE,
};
pub use units::{
    UnitConverter, MAX_LATTICE_VELOCITY, MIN_RESOLUTION, TARGET_LATTICE_VELOCITY, TAU_RANGE,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LbmError {
    #[error("resolution {0} is below the minimum of {MIN_RESOLUTION} cells per width")]
    ResolutionTooLow(usize),
    #[error("relaxation time {0} outside [{lo}, {hi}]", lo = TAU_RANGE.0, hi = TAU_RANGE.1)]
    TauOutOfRange(f64),
    #[error(
        "lattice velocity {lattice_velocity:.4} exceeds the low-Mach limit {MAX_LATTICE_VELOCITY}"
    )]
    MachLimit { lattice_velocity: f64 },
    #[error("non-finite or non-positive value {0}")]
    NonFinite(f64),
    #[error("{0} is not aligned with the lattice axes")]
    NotAxisAligned(String),
    #[error("boundary {key}: {reason}")]
    MalformedPort { key: BoundaryKey, reason: String },
    #[error("no boundary value set for {0}")]
    MissingBoundaryValue(BoundaryKey),
    #[error("unknown boundary {0}")]
    UnknownBoundary(BoundaryKey),
    #[error("lattice diverged at cell ({}, {}) in iteration {iteration}", cell.0, cell.1)]
    Diverged {
        cell: (usize, usize),
        iteration: u64,
    },
    #[error("lattice has no fluid cells")]
    Empty,
}
