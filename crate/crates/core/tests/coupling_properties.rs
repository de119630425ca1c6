//! Properties of converged hybrid runs on the cross and the ladder.

use mfd_sim::coupling::{
    converged, relative_deviation, relax, run_hybrid, CouplingError, HybridConfig, HybridResult,
    Probe, Quantity, Status, TAIL_LENGTH,
};
use mfd_sim::netmodel::{canonical, Network, Scheme, Terminal};
use mfd_sim::PortId;
use proptest::prelude::*;
use std::sync::OnceLock;

const EPS: f64 = 0.01;

fn cross() -> Network {
    canonical::cross(1e-3, 1e-4, 1000.0, 0.0)
}

fn ladder() -> Network {
    canonical::ladder(1e-3, 1e-4, 1000.0, 500.0, 0.0)
}

fn cross_run() -> &'static HybridResult {
    static RUN: OnceLock<HybridResult> = OnceLock::new();
    RUN.get_or_init(|| run_hybrid(&cross(), &HybridConfig::default()).unwrap())
}

fn ladder_run() -> &'static HybridResult {
    static RUN: OnceLock<HybridResult> = OnceLock::new();
    RUN.get_or_init(|| run_hybrid(&ladder(), &HybridConfig::default()).unwrap())
}

fn runs() -> [(&'static str, &'static HybridResult); 2] {
    [("cross", cross_run()), ("ladder", ladder_run())]
}

#[test]
fn runs_converge() {
    for (name, r) in runs() {
        assert_eq!(r.state.status, Status::Converged, "{name}");
        assert!(converged(&r.state, EPS), "{name}");
        assert_eq!(r.log.len(), r.state.exchange_count);
        println!(
            "{name}: {} exchanges, {:?}",
            r.state.exchange_count, r.elapsed
        );
    }
}

#[test]
fn ladder_uses_a_flow_port() {
    let r = ladder_run();
    let flow: Vec<_> = r
        .state
        .ports
        .iter()
        .filter(|p| p.kind == Quantity::FlowRate)
        .collect();
    assert_eq!(flow.len(), 1);
    assert_eq!(r.decomposition.scheme(flow[0].port), Scheme::FlowToCfd);
    assert!(cross_run()
        .state
        .ports
        .iter()
        .all(|p| p.kind == Quantity::Pressure));
}

#[test]
fn residual_tail_is_monotone() {
    for (name, r) in runs() {
        let h = &r.state.residual_history;
        assert!(h.len() >= TAIL_LENGTH, "{name}");
        for w in h[h.len() - TAIL_LENGTH..].windows(2) {
            assert!(w[1] <= w[0], "{name}: {w:?}");
        }
    }
}

#[test]
fn interface_values_agree_within_two_epsilon() {
    for (name, r) in runs() {
        let span = r.state.pressure_scale;
        for port in &r.state.ports {
            let nodal = r.solution.pressure_at(Terminal::Port(port.port)).unwrap();
            let dp = (port.measured_pressure - nodal).abs() / span;
            assert!(dp <= 2.0 * EPS, "{name} {}: pressure {dp:.3e}", port.port);
            let dq = (port.measured_flow - r.abstract_inflow(port.port)).abs() / port.flow_scale;
            assert!(dq <= 2.0 * EPS, "{name} {}: flow {dq:.3e}", port.port);
        }
    }
}

#[test]
fn mass_balance_per_region_and_overall() {
    for (name, r) in runs() {
        let largest = r
            .state
            .ports
            .iter()
            .fold(0.0f64, |m, p| m.max(p.measured_flow.abs()));
        for region in &r.decomposition.regions {
            let net: f64 = region
                .ports
                .iter()
                .map(|&id| r.state.port(id).unwrap().measured_flow)
                .sum();
            assert!(net.abs() <= 0.01 * largest, "{name} {}: {net:e}", region.id);
        }
        // Flow leaving every ground node through the abstract network.
        let mut ground_out = 0.0;
        let mut largest_inlet = 0.0f64;
        for node in r
            .decomposition
            .network
            .nodes
            .iter()
            .filter(|n| n.is_ground())
        {
            let k = r.problem.index_of(Terminal::Node(node.id)).unwrap();
            let out: f64 = r
                .problem
                .edges
                .iter()
                .zip(&r.solution.flows)
                .map(|(e, q)| {
                    if e.a == k {
                        *q
                    } else if e.b == k {
                        -q
                    } else {
                        0.0
                    }
                })
                .sum();
            ground_out += out;
            largest_inlet = largest_inlet.max(out);
        }
        assert!(
            ground_out.abs() <= 0.01 * largest_inlet,
            "{name}: {ground_out:e}"
        );
    }
}

#[test]
fn imposed_pressures_stay_within_bounds() {
    for (name, r) in runs() {
        let (lo, hi) = r.decomposition.network.ground_pressure_bounds().unwrap();
        let (blo, bhi) = r.state.pressure_bounds;
        assert!((blo - (lo - 0.05 * (hi - lo))).abs() < 1e-9);
        assert!((bhi - (hi + 0.05 * (hi - lo))).abs() < 1e-9);
        for port in r
            .state
            .ports
            .iter()
            .filter(|p| p.kind == Quantity::Pressure)
        {
            assert!(
                port.q_low >= blo && port.q_low <= bhi,
                "{name}: {}",
                port.q_low
            );
            // Converged values sit inside the ground span itself.
            assert!(
                port.q_low >= lo && port.q_low <= hi,
                "{name}: {}",
                port.q_low
            );
        }
    }
}

#[test]
fn fixed_point_leaves_imposed_values_unchanged() {
    // One more exchange from a converged state moves each imposed value by
    // α times its mismatch, itself at most ε.
    for (_, r) in runs() {
        for port in &r.state.ports {
            let next = relax(port.q_low, port.q_high, 0.01);
            assert!((next - port.q_low).abs() <= 0.01 * EPS * port.scale);
        }
    }
}

proptest! {
    #[test]
    fn relax_fixed_point(q in -1e6f64..1e6, alpha in 1e-6f64..=1.0) {
        prop_assert_eq!(relax(q, q, alpha), q);
    }

    #[test]
    fn relax_moves_towards_target(a in -1e3f64..1e3, b in -1e3f64..1e3, alpha in 1e-6f64..=1.0) {
        let r = relax(a, b, alpha);
        prop_assert!((r - b).abs() <= (a - b).abs() * (1.0 - alpha) + 1e-9);
    }
}

#[test]
fn zero_pressure_difference_gives_zero_flow() {
    let net = canonical::cross(1e-3, 1e-4, 400.0, 400.0);
    let r = run_hybrid(&net, &HybridConfig::default()).unwrap();
    assert_eq!(r.state.status, Status::Converged);
    assert!(r.state.exchange_count <= TAIL_LENGTH);
    assert!(r.solution.flows.iter().all(|q| q.abs() < 1e-15));
    for port in &r.state.ports {
        assert!(port.measured_flow.abs() < 1e-15);
        assert!((port.q_low - 400.0).abs() < 1e-9);
    }
}

#[test]
fn forcing_a_flow_port_gives_the_same_answer() {
    let base = cross_run();
    let config = HybridConfig {
        flow_ports: vec![PortId(3)],
        ..HybridConfig::default()
    };
    let forced = run_hybrid(&cross(), &config).unwrap();
    assert_eq!(forced.decomposition.scheme(PortId(3)), Scheme::FlowToCfd);
    let probes = [
        Probe::new("junction", 0.0, 0.0),
        Probe::new("west", -1.5e-4, 0.0),
        Probe::new("east", 1.5e-4, 0.0),
        Probe::new("outlet arm", 6e-4, 0.0),
        Probe::new("inlet arm", -6e-4, 0.0),
    ];
    for probe in &probes {
        let a = base.sample(probe).unwrap().pressure;
        let b = forced.sample(probe).unwrap().pressure;
        let d = relative_deviation(a, b);
        println!("{}: {a:.3} vs {b:.3} ({d:.2e})", probe.label);
        assert!(d <= 2.0 * EPS, "{}: {a} vs {b}", probe.label);
    }
}

#[test]
fn region_without_pressure_port_is_rejected() {
    let config = HybridConfig {
        flow_ports: (0..4).map(PortId).collect(),
        ..HybridConfig::default()
    };
    assert!(matches!(
        run_hybrid(&cross(), &config),
        Err(CouplingError::Config(_))
    ));
    let config = HybridConfig {
        flow_ports: vec![PortId(42)],
        ..HybridConfig::default()
    };
    assert!(matches!(
        run_hybrid(&cross(), &config),
        Err(CouplingError::Config(_))
    ));
}

#[test]
fn full_relaxation_is_reported_cleanly() {
    let config = HybridConfig {
        alpha: 1.0,
        max_exchanges: 5000,
        ..HybridConfig::default()
    };
    match run_hybrid(&cross(), &config) {
        Ok(r) => {
            println!(
                "alpha = 1 converged after {} exchanges",
                r.state.exchange_count
            );
            assert!(r.state.ports.iter().all(|p| p.q_low.is_finite()));
        }
        Err(e) => {
            println!("alpha = 1: {e}");
            let state = e.state().expect("failure carries the coupling state");
            assert!(matches!(state.status, Status::Diverged | Status::Capped));
            assert!(state.residual_history.iter().all(|r| !r.is_nan()));
        }
    }
}
