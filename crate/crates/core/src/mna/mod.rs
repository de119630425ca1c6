//! Hagen–Poiseuille channel resistances and nodal analysis of the abstract
//! channel network.

mod problem;
mod solve;

pub use problem::{
    assemble, bootstrap_problem, network_problem, AbstractProblem, Edge, EdgeOrigin,
};
pub use solve::{solve, NodalSolution};

use crate::netmodel::{ChannelId, PortId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MnaError {
    #[error("{what} must be positive and finite, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("missing {kind} datum for {port}")]
    MissingPortDatum { port: PortId, kind: &'static str },
    #[error("no prescribed pressure in the component containing node {node} ({label})")]
    Ungrounded { node: usize, label: String },
    #[error("flow source at node {0}, which has a prescribed pressure")]
    SourceOnDirichlet(usize),
    #[error("edge {edge} references node {node} outside the problem")]
    DanglingEdge { edge: usize, node: usize },
    #[error("{0} not present in the network")]
    UnknownChannel(ChannelId),
    #[error("nodal system is singular")]
    Singular,
}

/// Planar hydraulic resistance in Pa·s/m², i.e. pressure drop per unit flow
/// rate per unit depth.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct HydraulicResistance(f64);

impl HydraulicResistance {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `12 μ L / w³`: resistance of a straight channel between parallel plates a
/// distance `width` apart, per unit depth.
pub fn channel_resistance(
    length: f64,
    width: f64,
    dynamic_viscosity: f64,
) -> Result<HydraulicResistance, MnaError> {
    for (what, value) in [
        ("length", length),
        ("width", width),
        ("dynamic viscosity", dynamic_viscosity),
    ] {
        if !(value.is_finite() && value > 0.0) {
            return Err(MnaError::NonPositive { what, value });
        }
    }
    Ok(HydraulicResistance(
        12.0 * dynamic_viscosity * length / width.powi(3),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Flow rate per unit depth of the plane Poiseuille profile, by composite
    /// Simpson quadrature of u(y) = y (w - y) / (2 μ) · Δp / L.
    fn quadrature_flow(dp: f64, length: f64, width: f64, mu: f64) -> f64 {
        let n = 1000;
        let h = width / n as f64;
        let u = |y: f64| y * (width - y) / (2.0 * mu) * dp / length;
        let mut sum = u(0.0) + u(width);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * u(k as f64 * h);
        }
        sum * h / 3.0
    }

    #[test]
    fn reference_channel() {
        let r = channel_resistance(1e-3, 1e-4, 1e-3).unwrap().value();
        assert!((r - 1.2e7).abs() / 1.2e7 < 1e-14);
        // Independent route: integrate the parabolic profile.
        let q = quadrature_flow(1000.0, 1e-3, 1e-4, 1e-3);
        assert!((1000.0 / q - r).abs() / r < 1e-12);
    }

    #[test]
    fn scaling_in_length_and_width() {
        let base = channel_resistance(1e-3, 1e-4, 1e-3).unwrap().value();
        let long = channel_resistance(2e-3, 1e-4, 1e-3).unwrap().value();
        let wide = channel_resistance(1e-3, 2e-4, 1e-3).unwrap().value();
        assert!((long / base - 2.0).abs() < 1e-14);
        assert!((wide - 1.5e6).abs() / 1.5e6 < 1e-14);
        assert!((base / wide - 8.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(matches!(
            channel_resistance(0.0, 1e-4, 1e-3),
            Err(MnaError::NonPositive { what: "length", .. })
        ));
        assert!(channel_resistance(1e-3, -1e-4, 1e-3).is_err());
        assert!(channel_resistance(1e-3, 1e-4, f64::NAN).is_err());
    }
}
