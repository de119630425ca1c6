use crate::lbm::parabolic_velocity;
use crate::mna::channel_resistance;
use crate::netmodel::Point;

/// Bootstrap data of one port, as seen from its region.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StubFlow {
    pub inward: (f64, f64),
    pub width: f64,
    pub distance: f64,
    /// Pa at the section.
    pub pressure: f64,
    /// m²/s into the region.
    pub inflow: f64,
}

/// Initial field of a region: developed parabolic profiles in every stub and
/// linear pressure from each section to a common junction pressure, taken as
/// the mean of the Hagen–Poiseuille extrapolations from all sections. The
/// junction core starts at rest.
pub(crate) fn region_field(
    junction: Point,
    stubs: Vec<StubFlow>,
    dynamic_viscosity: f64,
) -> impl Fn(Point) -> (f64, [f64; 2]) {
    let p_junction = stubs
        .iter()
        .map(|s| {
            let r = channel_resistance(s.distance, s.width, dynamic_viscosity)
                .map(|r| r.value())
                .unwrap_or(0.0);
            s.pressure - s.inflow * r
        })
        .sum::<f64>()
        / stubs.len().max(1) as f64;

    move |p: Point| {
        let (rx, ry) = (p.x - junction.x, p.y - junction.y);
        for s in &stubs {
            // Axis from the junction towards the section.
            let (ax, ay) = (-s.inward.0, -s.inward.1);
            let axial = rx * ax + ry * ay;
            let transverse = -rx * ay + ry * ax;
            let h = s.width / 2.0;
            if axial > h && axial <= s.distance + 1e-12 && transverse.abs() <= h {
                let pressure = p_junction + (s.pressure - p_junction) * axial / s.distance;
                let u = parabolic_velocity(s.inflow, s.width, transverse + h);
                return (pressure, [u * s.inward.0, u * s.inward.1]);
            }
        }
        (p_junction, [0.0, 0.0])
    }
}
