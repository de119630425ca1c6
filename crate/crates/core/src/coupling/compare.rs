use super::{CfdResult, CouplingError, HybridResult};
use crate::mna::EdgeOrigin;
use crate::netmodel::{Point, Terminal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub label: String,
    pub point: Point,
}

impl Probe {
    pub fn new(label: impl Into<String>, x: f64, y: f64) -> Self {
        Self {
            label: label.into(),
            point: Point::new(x, y),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSample {
    /// Pa
    pub pressure: f64,
    /// m/s
    pub velocity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeComparison {
    pub label: String,
    pub cfd: ProbeSample,
    pub hybrid: ProbeSample,
    pub pressure_deviation: f64,
    pub velocity_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<ProbeComparison>,
    pub cfd_seconds: f64,
    pub hybrid_seconds: f64,
    pub speedup: f64,
}

/// `|value - reference| / |reference|`; zero when both vanish.
pub fn relative_deviation(reference: f64, value: f64) -> f64 {
    let diff = (value - reference).abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / reference.abs()
    }
}

fn magnitude(u: [f64; 2]) -> f64 {
    u[0].hypot(u[1])
}

impl CfdResult {
    /// Nearest fluid cell of the monolithic lattice.
    pub fn sample(&self, probe: &Probe) -> Result<ProbeSample, CouplingError> {
        self.macroscopics
            .sample(probe.point)
            .map(|(pressure, u)| ProbeSample {
                pressure,
                velocity: magnitude(u),
            })
            .ok_or_else(|| CouplingError::ProbeOutside(probe.label.clone()))
    }
}

impl HybridResult {
    /// Nearest fluid cell when the probe lies in a region lattice; otherwise
    /// linear pressure along the abstract segment and its centreline speed.
    pub fn sample(&self, probe: &Probe) -> Result<ProbeSample, CouplingError> {
        for (id, m) in &self.regions {
            let extent = self.decomposition.region(*id).extent;
            if extent.contains(probe.point, 1e-12) {
                if let Some((pressure, u)) = m.sample(probe.point) {
                    return Ok(ProbeSample {
                        pressure,
                        velocity: magnitude(u),
                    });
                }
            }
        }
        if self.regions.is_empty() {
            if let Some(sample) = self.nearest_section(probe) {
                return Ok(sample);
            }
        }
        let network = &self.decomposition.network;
        let tol = 1e-12;
        for segment in &self.decomposition.segments {
            let mut before = 0.0;
            for piece in &segment.pieces {
                let Some(ch) = network.channel(piece.channel) else {
                    continue;
                };
                let (Some(a), Some(dir)) = (
                    network.node(ch.node_a),
                    network.direction_from(ch, ch.node_a),
                ) else {
                    continue;
                };
                let (rx, ry) = (probe.point.x - a.position.x, probe.point.y - a.position.y);
                let axial = rx * dir.0 + ry * dir.1;
                let transverse = -rx * dir.1 + ry * dir.0;
                if axial >= piece.start - tol
                    && axial <= piece.end + tol
                    && transverse.abs() <= ch.width / 2.0 + tol
                {
                    let along = if piece.forward {
                        axial - piece.start
                    } else {
                        piece.end - axial
                    };
                    let s = ((before + along) / segment.length()).clamp(0.0, 1.0);
                    let p0 = self
                        .solution
                        .pressure_at(segment.ends[0])
                        .unwrap_or(f64::NAN);
                    let p1 = self
                        .solution
                        .pressure_at(segment.ends[1])
                        .unwrap_or(f64::NAN);
                    let q = self
                        .problem
                        .edges
                        .iter()
                        .position(|e| e.origin == EdgeOrigin::Segment(segment.index))
                        .map(|k| self.solution.flows[k])
                        .unwrap_or(0.0);
                    return Ok(ProbeSample {
                        pressure: p0 + (p1 - p0) * s,
                        velocity: 1.5 * q.abs() / ch.width,
                    });
                }
                before += piece.length();
            }
        }
        Err(CouplingError::ProbeOutside(probe.label.clone()))
    }
}

impl HybridResult {
    /// Abstract-only results have no lattice: a probe inside a region takes
    /// the pressure and centreline speed at the closest port section.
    fn nearest_section(&self, probe: &Probe) -> Option<ProbeSample> {
        let d = &self.decomposition;
        let region = d
            .regions
            .iter()
            .find(|r| r.extent.contains(probe.point, 1e-12))?;
        let port = region.ports.iter().map(|&p| d.port(p)).min_by(|a, b| {
            a.center
                .distance(probe.point)
                .total_cmp(&b.center.distance(probe.point))
        })?;
        Some(ProbeSample {
            pressure: self.solution.pressure_at(Terminal::Port(port.id))?,
            velocity: 1.5 * self.abstract_inflow(port.id).abs() / port.width,
        })
    }
}

/// Probe-by-probe deviations of the hybrid result from the baseline, plus
/// the runtime ratio.
pub fn compare(
    hybrid: &HybridResult,
    baseline: &CfdResult,
    probes: &[Probe],
) -> Result<Comparison, CouplingError> {
    let rows = probes
        .iter()
        .map(|probe| {
            let cfd = baseline.sample(probe)?;
            let hyb = hybrid.sample(probe)?;
            Ok(ProbeComparison {
                label: probe.label.clone(),
                cfd,
                hybrid: hyb,
                pressure_deviation: relative_deviation(cfd.pressure, hyb.pressure),
                velocity_deviation: relative_deviation(cfd.velocity, hyb.velocity),
            })
        })
        .collect::<Result<Vec<_>, CouplingError>>()?;
    let cfd_seconds = baseline.elapsed.as_secs_f64();
    let hybrid_seconds = hybrid.elapsed.as_secs_f64();
    Ok(Comparison {
        rows,
        cfd_seconds,
        hybrid_seconds,
        speedup: cfd_seconds / hybrid_seconds,
    })
}
