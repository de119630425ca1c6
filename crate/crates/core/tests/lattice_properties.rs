//! Boundary handling, fixed points and unit conversion of the lattice solver.

use mfd_sim::lbm::{
    build_monolithic_lattice, build_region_lattice, parabolic_velocity, BoundaryKey, Lattice,
    LbmError, OpenBoundary, UnitConverter, STEADY_CHECK_INTERVAL, STEADY_TOLERANCE,
};
use mfd_sim::netmodel::{assign_schemes, canonical, decompose, Fluid};
use mfd_sim::{NodeId, PortId};
use proptest::prelude::*;

const W: f64 = 1e-4;

fn straight(resolution: usize, peak: f64) -> Lattice {
    let net = canonical::straight(1e-3, W, 0.0, 0.0);
    let conv = UnitConverter::for_peak_velocity(W, resolution, Fluid::WATER, peak).unwrap();
    build_monolithic_lattice(&net, conv).unwrap()
}

const INLET: BoundaryKey = BoundaryKey::Ground(NodeId(0));
const OUTLET: BoundaryKey = BoundaryKey::Ground(NodeId(1));

#[test]
fn baseline_straight_channel_is_200_by_20() {
    let lat = straight(20, 0.5);
    assert_eq!((lat.nx(), lat.ny()), (200, 20));
    assert_eq!(lat.fluid_cells(), 4000);
}

#[test]
fn equal_pressure_equilibrium_is_a_fixed_point() {
    for open in [OpenBoundary::Extrapolation, OpenBoundary::ZouHe] {
        let mut lat = straight(10, 0.5);
        lat.set_open_boundary(open);
        lat.initialize_uniform(300.0);
        lat.set_pressure_bc(INLET, 300.0).unwrap();
        lat.set_pressure_bc(OUTLET, 300.0).unwrap();
        lat.step().unwrap();
        let before = lat.macroscopics();
        let norm = lat.velocity_norm();
        lat.advance(1000).unwrap();
        let after = lat.macroscopics();
        if open == OpenBoundary::Extrapolation {
            assert_eq!(before.pressure, after.pressure);
            assert_eq!(before.velocity, after.velocity);
            assert_eq!(lat.velocity_norm().to_bits(), norm.to_bits());
        } else {
            // The Zou-He sums wander at round-off level.
            assert!(lat.velocity_norm() < 1e-12);
        }
        assert!(after.pressure.iter().all(|p| (p - 300.0).abs() < 1e-9));
    }
}

#[test]
fn quiescent_port_reads_reference_and_no_flow() {
    let mut lat = straight(10, 0.5);
    lat.initialize_uniform(0.0);
    lat.set_pressure_bc(INLET, 0.0).unwrap();
    lat.set_pressure_bc(OUTLET, 0.0).unwrap();
    lat.step().unwrap();
    let m = lat.measure_port(INLET).unwrap();
    assert!(m.pressure.abs() < 1e-9);
    assert_eq!(m.flow_rate, 0.0);
    let fields = lat.macroscopics();
    assert!(fields.pressure.iter().all(|p| p.abs() < 1e-9));
}

#[test]
fn equal_pressures_give_no_net_flow() {
    let mut lat = straight(10, 0.5);
    lat.initialize_with(|_| (500.0, [0.2, 0.0]));
    lat.set_pressure_bc(INLET, 500.0).unwrap();
    lat.set_pressure_bc(OUTLET, 500.0).unwrap();
    // The initial plug flow decays; no odd-even mode survives at the ports.
    lat.advance(40_000).unwrap();
    assert!(lat.velocity_norm() < 1e-10, "{}", lat.velocity_norm());
    for key in [INLET, OUTLET] {
        let q = lat.measure_port(key).unwrap().flow_rate;
        assert!(q.abs() < 1e-12, "{q}");
    }
}

#[test]
fn missing_boundary_value_is_reported() {
    let mut lat = straight(10, 0.5);
    lat.set_pressure_bc(INLET, 10.0).unwrap();
    assert_eq!(lat.step(), Err(LbmError::MissingBoundaryValue(OUTLET)));
}

#[test]
fn profile_peak_is_one_and_a_half_mean() {
    let q = 8.333e-5;
    assert!((parabolic_velocity(q, W, W / 2.0) - 1.5 * q / W).abs() < 1e-12);
    assert!((parabolic_velocity(q, W, W / 2.0) - 1.25).abs() < 1e-4);
    assert_eq!(parabolic_velocity(q, W, 0.0), 0.0);
    assert_eq!(parabolic_velocity(q, W, W), 0.0);
}

#[test]
fn profile_integrates_to_flow_rate() {
    let q = 3.7e-5;
    // Simpson's rule is exact for the quadratic.
    let simpson = W / 6.0
        * (parabolic_velocity(q, W, 0.0)
            + 4.0 * parabolic_velocity(q, W, W / 2.0)
            + parabolic_velocity(q, W, W));
    assert!((simpson - q).abs() < 1e-12 * q);
    for n in [10usize, 20] {
        let dx = W / n as f64;
        let midpoint: f64 = (0..n)
            .map(|k| parabolic_velocity(q, W, (k as f64 + 0.5) * dx) * dx)
            .sum();
        // Midpoint error of a parabola: exactly q / (2 n²).
        assert!(
            (midpoint - q).abs() <= 5e-3 * q * (1.0 + 1e-9),
            "{n}: {midpoint}"
        );
    }
}

#[test]
fn flow_port_carries_the_midpoint_sum() {
    let q = 2e-5;
    let mut lat = straight(20, 1.5 * q / W);
    lat.initialize_uniform(0.0);
    lat.set_flow_bc(INLET, q).unwrap();
    lat.set_pressure_bc(OUTLET, 0.0).unwrap();
    lat.advance(10).unwrap();
    let m = lat.measure_port(INLET).unwrap();
    assert!((m.flow_rate - q).abs() < 5e-3 * q, "{}", m.flow_rate);
}

#[test]
fn zero_flow_port_is_a_wall() {
    let mut lat = straight(10, 0.5);
    lat.initialize_uniform(0.0);
    lat.set_flow_bc(INLET, 0.0).unwrap();
    lat.set_pressure_bc(OUTLET, 0.0).unwrap();
    lat.advance(50).unwrap();
    assert_eq!(lat.measure_port(INLET).unwrap().flow_rate, 0.0);
    assert!(lat.velocity_norm() < 1e-14);
}

#[test]
fn flow_port_rejects_mach_violations() {
    let mut lat = straight(20, 0.3);
    let too_fast = 1e-3;
    assert!(matches!(
        lat.set_flow_bc(INLET, too_fast),
        Err(LbmError::MachLimit { .. })
    ));
    assert!(matches!(
        lat.set_flow_bc(INLET, f64::NAN),
        Err(LbmError::NonFinite(_))
    ));
}

#[test]
fn unknown_port_is_rejected() {
    let mut lat = straight(10, 0.5);
    let key = BoundaryKey::Interface(PortId(7));
    assert_eq!(
        lat.set_pressure_bc(key, 1.0),
        Err(LbmError::UnknownBoundary(key))
    );
    assert!(lat.measure_port(key).is_err());
}

#[test]
fn blow_up_is_reported_with_cell_and_iteration() {
    let mut lat = straight(10, 0.5);
    // Far beyond the low-Mach range.
    let c = *lat.converter();
    let u = c.velocity_to_physical(3.0);
    lat.initialize_with(|p| (0.0, [if p.x < 5e-4 { u } else { -u }, 0.0]));
    lat.set_pressure_bc(INLET, 0.0).unwrap();
    lat.set_pressure_bc(OUTLET, 0.0).unwrap();
    match lat.advance(10_000) {
        Err(LbmError::Diverged { iteration, .. }) => assert!(iteration >= 1),
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn cross_region_mass_balance() {
    let d = assign_schemes(&decompose(&canonical::cross(1e-3, W, 1000.0, 0.0)).unwrap());
    let conv = UnitConverter::for_peak_velocity(W, 20, Fluid::WATER, 1.0).unwrap();
    let mut lat = build_region_lattice(&d, d.regions[0].id, conv).unwrap();
    lat.initialize_uniform(750.0);
    let keys = lat.boundary_keys();
    for (key, p) in keys.iter().zip([776.6, 770.3, 770.3, 682.8]) {
        lat.set_pressure_bc(*key, p).unwrap();
    }
    let s = lat
        .run_to_steady(STEADY_TOLERANCE, STEADY_CHECK_INTERVAL, 2_000_000)
        .unwrap();
    assert!(s.converged);
    let flows: Vec<f64> = keys
        .iter()
        .map(|k| lat.measure_port(*k).unwrap().flow_rate)
        .collect();
    let largest = flows.iter().fold(0.0f64, |m, q| m.max(q.abs()));
    let net: f64 = flows.iter().sum();
    assert!(net.abs() <= 5e-3 * largest, "{flows:?}");
}

#[test]
fn zou_he_closure_also_reaches_poiseuille() {
    let dp = 250.0;
    let expected = dp * W * W * W / (12.0 * 1e-3 * 1e-3);
    let mut lat = straight(20, 1.5 * expected / W);
    lat.set_open_boundary(OpenBoundary::ZouHe);
    lat.initialize_uniform(dp / 2.0);
    lat.set_pressure_bc(INLET, dp).unwrap();
    lat.set_pressure_bc(OUTLET, 0.0).unwrap();
    let s = lat
        .run_to_steady(STEADY_TOLERANCE, STEADY_CHECK_INTERVAL, 2_000_000)
        .unwrap();
    assert!(s.converged);
    let q = lat.measure_port(INLET).unwrap().flow_rate;
    assert!((q - expected).abs() < 0.01 * expected, "{q} vs {expected}");
}

fn converter() -> impl Strategy<Value = UnitConverter> {
    (8usize..64, 1e-5f64..1e-3, 1e-3f64..2.0)
        .prop_filter_map("peak beyond the Mach limit", |(res, width, peak)| {
            UnitConverter::for_peak_velocity(width, res, Fluid::WATER, peak).ok()
        })
}

fn magnitude() -> impl Strategy<Value = f64> {
    (-12i32..6, 1.0f64..10.0, any::<bool>())
        .prop_map(|(e, m, neg)| if neg { -m } else { m } * 10f64.powi(e))
}

proptest! {
    #[test]
    fn unit_round_trips(c in converter(), v in magnitude()) {
        let rel = |a: f64| (a - v).abs() / v.abs();
        prop_assert!(rel(c.pressure_to_physical(c.pressure_to_lattice(v))) < 1e-12);
        prop_assert!(rel(c.velocity_to_physical(c.velocity_to_lattice(v))) < 1e-12);
        prop_assert!(rel(c.flow_to_physical(c.flow_to_lattice(v))) < 1e-12);
    }

    #[test]
    fn tau_stays_in_range(c in converter()) {
        let (lo, hi) = mfd_sim::lbm::TAU_RANGE;
        prop_assert!(c.tau() >= lo - 1e-12 && c.tau() <= hi + 1e-12);
    }
}
