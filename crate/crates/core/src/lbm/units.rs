use super::{d2q9::CS2, LbmError};
use crate::netmodel::Fluid;
use serde::{Deserialize, Serialize};

/// Admissible BGK relaxation times.
pub const TAU_RANGE: (f64, f64) = (0.55, 1.99);
/// Lattice velocity the expected peak velocity is mapped to.
pub const TARGET_LATTICE_VELOCITY: f64 = 0.05;
/// Low-Mach validity limit.
pub const MAX_LATTICE_VELOCITY: f64 = 0.1;
pub const MIN_RESOLUTION: usize = 8;

/// Physical ↔ lattice conversion. Lattice density 1 is pressure 0 Pa.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitConverter {
    /// m
    pub dx: f64,
    /// s
    pub dt: f64,
    /// kg/m³
    pub density: f64,
    /// m²/s
    pub kinematic_viscosity: f64,
}

impl UnitConverter {
    pub fn new(dx: f64, dt: f64, fluid: Fluid) -> Result<Self, LbmError> {
        for v in [dx, dt] {
            if !(v.is_finite() && v > 0.0) {
                return Err(LbmError::NonFinite(v));
            }
        }
        let conv = Self {
            dx,
            dt,
            density: fluid.density,
            kinematic_viscosity: fluid.kinematic_viscosity,
        };
        let tau = conv.tau();
        // Small slack so that clamped values survive the round trip through dt.
        if !(tau >= TAU_RANGE.0 - 1e-12 && tau <= TAU_RANGE.1 + 1e-12) {
            return Err(LbmError::TauOutOfRange(tau));
        }
        Ok(conv)
    }

    /// Spacing `width / resolution`; `dt` chosen so `peak_velocity` maps to
    /// lattice velocity 0.05, with τ clamped into [`TAU_RANGE`]. Fails if the
    /// clamped timestep pushes the peak beyond lattice velocity 0.1.
    pub fn for_peak_velocity(
        width: f64,
        resolution: usize,
        fluid: Fluid,
        peak_velocity: f64,
    ) -> Result<Self, LbmError> {
        if resolution < MIN_RESOLUTION {
            return Err(LbmError::ResolutionTooLow(resolution));
        }
        let dx = width / resolution as f64;
        let nu = fluid.kinematic_viscosity;
        let tau_for = |dt: f64| nu * dt / (CS2 * dx * dx) + 0.5;
        let dt_for = |tau: f64| (tau - 0.5) * CS2 * dx * dx / nu;
        let peak = peak_velocity.abs();
        let mut dt = if peak > 0.0 {
            TARGET_LATTICE_VELOCITY * dx / peak
        } else {
            dt_for(1.0)
        };
        let tau = tau_for(dt);
        if tau < TAU_RANGE.0 {
            dt = dt_for(TAU_RANGE.0);
        } else if tau > TAU_RANGE.1 {
            dt = dt_for(TAU_RANGE.1);
        }
        let lattice_peak = peak * dt / dx;
        if lattice_peak > MAX_LATTICE_VELOCITY {
            return Err(LbmError::MachLimit {
                lattice_velocity: lattice_peak,
            });
        }
        Self::new(dx, dt, fluid)
    }

    pub fn lattice_viscosity(&self) -> f64 {
        self.kinematic_viscosity * self.dt / (self.dx * self.dx)
    }

    pub fn tau(&self) -> f64 {
        self.lattice_viscosity() / CS2 + 0.5
    }

    /// m/s per lattice velocity unit.
    pub fn velocity_scale(&self) -> f64 {
        self.dx / self.dt
    }

    /// Pa per unit of lattice pressure `c_s² ρ`.
    pub fn pressure_scale(&self) -> f64 {
        self.density * CS2 * self.velocity_scale().powi(2)
    }

    /// Pa → lattice density deviation from the reference.
    pub fn pressure_to_lattice(&self, pressure: f64) -> f64 {
        pressure / self.pressure_scale()
    }

    pub fn pressure_to_physical(&self, delta_rho: f64) -> f64 {
        delta_rho * self.pressure_scale()
    }

    pub fn pressure_to_density(&self, pressure: f64) -> f64 {
        1.0 + self.pressure_to_lattice(pressure)
    }

    pub fn density_to_pressure(&self, rho: f64) -> f64 {
        self.pressure_to_physical(rho - 1.0)
    }

    pub fn velocity_to_lattice(&self, u: f64) -> f64 {
        u / self.velocity_scale()
    }

    pub fn velocity_to_physical(&self, u: f64) -> f64 {
        u * self.velocity_scale()
    }

    /// m²/s → lattice velocity × cells.
    pub fn flow_to_lattice(&self, q: f64) -> f64 {
        q * self.dt / (self.dx * self.dx)
    }

    pub fn flow_to_physical(&self, q: f64) -> f64 {
        q * self.dx * self.dx / self.dt
    }
}
