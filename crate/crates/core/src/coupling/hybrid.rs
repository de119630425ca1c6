use super::warm::{region_field, StubFlow};
use super::{
    relax, settled, CouplingError, CouplingState, HybridConfig, PortState, Quantity, Status,
    RESIDUAL_FLOOR,
};
use crate::lbm::{
    build_region_lattice, BoundaryKey, Lattice, LbmError, Macroscopics, UnitConverter,
};
use crate::mna::{assemble, bootstrap_problem, solve, AbstractProblem, EdgeOrigin, NodalSolution};
use crate::netmodel::{
    assign_schemes, decompose_with, validate, DecomposeOptions, Decomposition, Network, PortId,
    RegionId, Scheme, Terminal,
};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

/// Initial interface values from the fully connected bootstrap problem.
#[derive(Debug, Clone)]
pub struct Bootstrap {
    pub state: CouplingState,
    pub problem: AbstractProblem,
    pub solution: NodalSolution,
    /// Pa at every port.
    pub port_pressures: BTreeMap<PortId, f64>,
    /// m²/s into the owning region at every port.
    pub port_inflows: BTreeMap<PortId, f64>,
}

#[derive(Debug, Clone)]
pub struct HybridResult {
    pub decomposition: Decomposition,
    /// `None` when the network has no lattice regions.
    pub converter: Option<UnitConverter>,
    pub regions: Vec<(RegionId, Macroscopics)>,
    /// Abstract problem and solution of the final exchange.
    pub problem: AbstractProblem,
    pub solution: NodalSolution,
    pub state: CouplingState,
    pub elapsed: Duration,
    pub log: Vec<String>,
}

/// Flow into the region owning `port`, read from the segment ending there.
fn port_inflow(
    decomposition: &Decomposition,
    problem: &AbstractProblem,
    solution: &NodalSolution,
    port: PortId,
) -> f64 {
    let Some((segment, end)) = decomposition.segment_at(port) else {
        return 0.0;
    };
    let Some(edge) = problem
        .edges
        .iter()
        .position(|e| e.origin == EdgeOrigin::Segment(segment.index))
    else {
        return 0.0;
    };
    // Positive edge flow runs from ends[0] to ends[1].
    if end == 1 {
        solution.flows[edge]
    } else {
        -solution.flows[edge]
    }
}

fn ground_span(network: &Network) -> (f64, f64) {
    network.ground_pressure_bounds().unwrap_or((0.0, 0.0))
}

/// Solves the bootstrap problem and seeds every port: pressure ports with
/// the nodal pressure, flow ports with the segment flow into the region.
pub fn bootstrap(decomposition: &Decomposition) -> Result<Bootstrap, CouplingError> {
    let problem = bootstrap_problem(decomposition)?;
    let solution = solve(&problem)?;
    let (lo, hi) = ground_span(&decomposition.network);
    let pressure_scale = (hi - lo).max(1.0);
    let slack = 0.05 * pressure_scale;

    let mut port_pressures = BTreeMap::new();
    let mut port_inflows = BTreeMap::new();
    let mut ports = Vec::new();
    for port in &decomposition.ports {
        let p = solution
            .pressure_at(Terminal::Port(port.id))
            .unwrap_or(0.5 * (lo + hi));
        let q = port_inflow(decomposition, &problem, &solution, port.id);
        port_pressures.insert(port.id, p);
        port_inflows.insert(port.id, q);
        let flow_scale = q.abs().max(1e-30);
        let (kind, value, scale) = match decomposition.scheme(port.id) {
            Scheme::PressureToCfd => (Quantity::Pressure, p, pressure_scale),
            Scheme::FlowToCfd => (Quantity::FlowRate, q, flow_scale),
        };
        ports.push(PortState {
            port: port.id,
            kind,
            q_low: value,
            q_low_prev: value,
            q_high: value,
            measured_pressure: p,
            measured_flow: q,
            scale,
            flow_scale,
        });
    }
    Ok(Bootstrap {
        state: CouplingState {
            ports,
            residual_history: Vec::new(),
            exchange_count: 0,
            status: Status::Running,
            pressure_scale,
            drift: 0.0,
            pressure_bounds: (lo - slack, hi + slack),
        },
        problem,
        solution,
        port_pressures,
        port_inflows,
    })
}

fn impose(lattice: &mut Lattice, port: &PortState) -> Result<(), LbmError> {
    let key = BoundaryKey::Interface(port.port);
    match port.kind {
        Quantity::Pressure => lattice.set_pressure_bc(key, port.q_low),
        Quantity::FlowRate => lattice.set_flow_bc(key, port.q_low),
    }
}

/// Validates, decomposes and assigns schemes with the configured interface
/// distance.
pub(crate) fn prepare(
    network: &Network,
    config: &HybridConfig,
) -> Result<Decomposition, CouplingError> {
    config.check()?;
    let violations = validate(network);
    if !violations.is_empty() {
        return Err(CouplingError::Network(violations));
    }
    let options = DecomposeOptions {
        interface_distance_widths: config.interface_distance_widths,
        ..DecomposeOptions::default()
    };
    let mut decomposition = assign_schemes(&decompose_with(network, &options)?);
    for &port in &config.flow_ports {
        if !decomposition.ports.iter().any(|p| p.id == port) {
            return Err(CouplingError::Config(format!("{port} does not exist")));
        }
        decomposition.port_schemes.insert(port, Scheme::FlowToCfd);
    }
    for region in &decomposition.regions {
        if region
            .ports
            .iter()
            .all(|&p| decomposition.scheme(p) == Scheme::FlowToCfd)
        {
            return Err(CouplingError::Config(format!(
                "{} needs at least one pressure-imposing port",
                region.id
            )));
        }
    }
    Ok(decomposition)
}

pub(crate) fn min_width(network: &Network) -> f64 {
    network
        .channels
        .iter()
        .map(|c| c.width)
        .fold(f64::INFINITY, f64::min)
}

fn abstract_result(decomposition: Decomposition, boot: Bootstrap, start: Instant) -> HybridResult {
    let mut state = boot.state;
    state.status = Status::Converged;
    HybridResult {
        decomposition,
        converter: None,
        regions: Vec::new(),
        problem: boot.problem,
        solution: boot.solution,
        log: vec![state.log_line()],
        state,
        elapsed: start.elapsed(),
    }
}

/// Abstract-only run: the bootstrap solve, with every region replaced by
/// direct channels between its ports. No lattice is built.
pub fn run_abstract(
    network: &Network,
    config: &HybridConfig,
) -> Result<HybridResult, CouplingError> {
    let start = Instant::now();
    let decomposition = prepare(network, config)?;
    let boot = bootstrap(&decomposition)?;
    Ok(abstract_result(decomposition, boot, start))
}

/// Alternates θ lattice steps on every region with an abstract re-solve and
/// a relaxed update of the imposed interface values.
pub fn run_hybrid(network: &Network, config: &HybridConfig) -> Result<HybridResult, CouplingError> {
    let start = Instant::now();
    let decomposition = prepare(network, config)?;
    let boot = bootstrap(&decomposition)?;
    let mut state = boot.state.clone();
    let mut log = Vec::new();

    if decomposition.regions.is_empty() {
        return Ok(abstract_result(decomposition, boot, start));
    }

    let width = min_width(network);
    let peak_flow = boot
        .solution
        .flows
        .iter()
        .fold(0.0f64, |m, q| m.max(q.abs()));
    let converter = UnitConverter::for_peak_velocity(
        width,
        config.resolution,
        network.fluid,
        1.5 * peak_flow / width,
    )?;

    // Flows the lattice cannot tell from zero set the smallest flow scale.
    let floor = converter.flow_to_physical(RESIDUAL_FLOOR);
    for port in &mut state.ports {
        port.flow_scale = port.flow_scale.max(floor);
        if port.kind == Quantity::FlowRate {
            port.scale = port.flow_scale;
        }
    }

    let mu = network.fluid.dynamic_viscosity();
    let mut lattices = Vec::with_capacity(decomposition.regions.len());
    for region in &decomposition.regions {
        let mut lattice = build_region_lattice(&decomposition, region.id, converter)?;
        if config.warm_start {
            let junction = network
                .node(region.junction)
                .map(|n| n.position)
                .unwrap_or_default();
            let stubs = region
                .ports
                .iter()
                .map(|&id| {
                    let p = decomposition.port(id);
                    StubFlow {
                        inward: p.inward,
                        width: p.width,
                        distance: p.distance,
                        pressure: boot.port_pressures[&id],
                        inflow: boot.port_inflows[&id],
                    }
                })
                .collect();
            lattice.initialize_with(region_field(junction, stubs, mu));
        } else {
            let mean = region
                .ports
                .iter()
                .map(|id| boot.port_pressures[id])
                .sum::<f64>()
                / region.ports.len() as f64;
            lattice.initialize_uniform(mean);
        }
        lattices.push(lattice);
    }
    let region_of: BTreeMap<PortId, usize> = decomposition
        .ports
        .iter()
        .map(|p| (p.id, p.region.0 as usize))
        .collect();
    for port in &state.ports {
        impose(&mut lattices[region_of[&port.port]], port)?;
    }

    let pool = config.thread_pool()?;
    let mut problem;
    let mut solution;

    let diverged = |state: &CouplingState, reason: String| {
        let mut s = state.clone();
        s.status = Status::Diverged;
        CouplingError::Diverged {
            exchange: s.exchange_count,
            reason,
            state: Box::new(s),
        }
    };

    loop {
        let theta = config.theta;
        let advanced: Result<(), LbmError> =
            pool.install(|| lattices.par_iter_mut().try_for_each(|l| l.advance(theta)));
        if let Err(e) = advanced {
            state.exchange_count += 1;
            return Err(diverged(&state, e.to_string()));
        }

        let mut pressures = BTreeMap::new();
        let mut flows = BTreeMap::new();
        let mut drift = 0.0f64;
        for port in &mut state.ports {
            let m =
                lattices[region_of[&port.port]].measure_port(BoundaryKey::Interface(port.port))?;
            drift = drift
                .max((m.pressure - port.measured_pressure).abs() / state.pressure_scale)
                .max((m.flow_rate - port.measured_flow).abs() / port.flow_scale);
            port.measured_pressure = m.pressure;
            port.measured_flow = m.flow_rate;
            pressures.insert(port.port, m.pressure);
            flows.insert(port.port, m.flow_rate);
        }
        problem = assemble(&decomposition, &pressures, &flows)?;
        solution = solve(&problem)?;

        let (lo, hi) = state.pressure_bounds;
        let mut violation = None;
        for port in &mut state.ports {
            port.q_high = match port.kind {
                Quantity::Pressure => solution
                    .pressure_at(Terminal::Port(port.port))
                    .unwrap_or(f64::NAN),
                Quantity::FlowRate => port_inflow(&decomposition, &problem, &solution, port.port),
            };
            port.q_low_prev = port.q_low;
            port.q_low = relax(port.q_low, port.q_high, config.alpha);
            let out_of_bounds = port.kind == Quantity::Pressure && !(lo..=hi).contains(&port.q_low);
            if violation.is_none() && (!port.q_low.is_finite() || out_of_bounds) {
                violation = Some(format!(
                    "{} imposed value {:.6e} outside [{lo:.6e}, {hi:.6e}]",
                    port.port, port.q_low
                ));
            }
        }
        state.exchange_count += 1;
        state.residual_history.push(state.residual());
        state.drift = drift;
        if let Some(reason) = violation {
            return Err(diverged(&state, reason));
        }
        for port in &state.ports {
            if let Err(e) = impose(&mut lattices[region_of[&port.port]], port) {
                return Err(diverged(&state, e.to_string()));
            }
        }

        if settled(&state, config.epsilon, config.alpha * config.epsilon) {
            state.status = Status::Converged;
        } else if state.exchange_count >= config.max_exchanges {
            state.status = Status::Capped;
        }
        log.push(state.log_line());
        match state.status {
            Status::Converged => break,
            Status::Capped => return Err(CouplingError::Capped(Box::new(state))),
            _ => {}
        }
    }

    let regions = decomposition
        .regions
        .iter()
        .zip(&lattices)
        .map(|(r, l)| (r.id, l.macroscopics()))
        .collect();
    Ok(HybridResult {
        decomposition,
        converter: Some(converter),
        regions,
        problem,
        solution,
        state,
        elapsed: start.elapsed(),
        log,
    })
}

impl HybridResult {
    /// Flow from the abstract solution into the region owning `port`, m²/s.
    pub fn abstract_inflow(&self, port: PortId) -> f64 {
        port_inflow(&self.decomposition, &self.problem, &self.solution, port)
    }
}
