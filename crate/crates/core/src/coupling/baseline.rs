use super::hybrid::{min_width, prepare};
use super::{CouplingError, HybridConfig};
use crate::lbm::{
    build_monolithic_lattice, BoundaryKey, Macroscopics, SteadyState, UnitConverter,
    STEADY_CHECK_INTERVAL, STEADY_TOLERANCE,
};
use crate::mna::{network_problem, solve};
use crate::netmodel::Network;
use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub struct CfdResult {
    pub converter: UnitConverter,
    pub macroscopics: Macroscopics,
    pub steady: SteadyState,
    pub elapsed: Duration,
}

/// Resolves the whole network on one lattice, starting from rest at the mean
/// ground pressure, and steps it to steady state.
pub fn run_monolithic(
    network: &Network,
    config: &HybridConfig,
) -> Result<CfdResult, CouplingError> {
    let start = Instant::now();
    // Same validation as the hybrid run; the decomposition itself is unused.
    prepare(network, config)?;
    let solution = solve(&network_problem(network)?)?;
    let peak = network
        .channels
        .iter()
        .zip(&solution.flows)
        .fold(0.0f64, |m, (c, q)| m.max(1.5 * q.abs() / c.width));
    let converter = UnitConverter::for_peak_velocity(
        min_width(network),
        config.resolution,
        network.fluid,
        peak,
    )?;
    let mut lattice = build_monolithic_lattice(network, converter)?;

    let grounds: Vec<_> = network.ground_nodes().collect();
    let mean = grounds
        .iter()
        .filter_map(|n| n.ground_pressure())
        .sum::<f64>()
        / grounds.len() as f64;
    lattice.initialize_uniform(mean);
    for node in &grounds {
        lattice.set_pressure_bc(
            BoundaryKey::Ground(node.id),
            node.ground_pressure().unwrap_or(mean),
        )?;
    }
    let steady = lattice
        .run_to_steady(
            STEADY_TOLERANCE,
            STEADY_CHECK_INTERVAL,
            config.max_baseline_steps,
        )
        .map_err(CouplingError::from)?;
    if !steady.converged {
        return Err(CouplingError::NotSteady {
            steps: steady.steps,
            change: steady.change,
        });
    }
    Ok(CfdResult {
        converter,
        macroscopics: lattice.macroscopics(),
        steady,
        elapsed: start.elapsed(),
    })
}
