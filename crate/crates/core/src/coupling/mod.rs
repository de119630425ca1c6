//! Hybrid solve: lattice regions and the abstract network exchange interface
//! values every θ lattice steps until the exchanged values settle.

mod baseline;
mod compare;
mod hybrid;
mod warm;

pub use baseline::{run_monolithic, CfdResult};
pub use compare::{compare, relative_deviation, Comparison, Probe, ProbeComparison, ProbeSample};
pub use hybrid::{bootstrap, run_abstract, run_hybrid, Bootstrap, HybridResult};

use crate::lbm::LbmError;
use crate::mna::MnaError;
use crate::netmodel::{DecomposeError, PortId, Violation};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridConfig {
    /// Relaxation factor of the interface update, in (0, 1].
    pub alpha: f64,
    /// Lattice steps between exchanges.
    pub theta: u64,
    /// Convergence tolerance on the relative interface residual.
    pub epsilon: f64,
    pub max_exchanges: usize,
    /// Lattice cells across the narrowest channel.
    pub resolution: usize,
    pub interface_distance_widths: f64,
    /// Initialise region lattices from the bootstrap solution instead of rest.
    pub warm_start: bool,
    /// Worker cap; `None` uses the rayon default.
    pub threads: Option<usize>,
    /// Step cap of the monolithic baseline.
    pub max_baseline_steps: u64,
    /// Ports switched to flow imposition on top of the automatic choice.
    #[serde(default)]
    pub flow_ports: Vec<PortId>,
}

impl Default for HybridConfig {
    fn default() -> Self {
        Self {
            alpha: 0.01,
            theta: 10,
            epsilon: 0.01,
            max_exchanges: 200_000,
            resolution: 20,
            interface_distance_widths: 2.0,
            warm_start: true,
            threads: None,
            max_baseline_steps: 20_000_000,
            flow_ports: Vec::new(),
        }
    }
}

impl HybridConfig {
    pub fn check(&self) -> Result<(), CouplingError> {
        let bad = |m: String| Err(CouplingError::Config(m));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if self.theta < 1 {
            return bad("theta must be at least 1".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.max_exchanges < 1 {
            return bad("max_exchanges must be at least 1".into());
        }
        if !(self.interface_distance_widths > 0.0 && self.interface_distance_widths.is_finite()) {
            return bad(format!(
                "interface distance must be positive, got {}",
                self.interface_distance_widths
            ));
        }
        if self.threads == Some(0) {
            return bad("thread cap must be at least 1".into());
        }
        Ok(())
    }

    pub(crate) fn thread_pool(&self) -> Result<rayon::ThreadPool, CouplingError> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.threads {
            builder = builder.num_threads(n);
        }
        builder
            .build()
            .map_err(|e| CouplingError::Config(format!("thread pool: {e}")))
    }
}

/// What a port's `q_low` carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    /// Pa imposed on the lattice.
    Pressure,
    /// m²/s imposed on the lattice.
    FlowRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Running,
    Converged,
    Diverged,
    Capped,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Running => "running",
            Status::Converged => "converged",
            Status::Diverged => "diverged",
            Status::Capped => "capped",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortState {
    pub port: PortId,
    pub kind: Quantity,
    /// Value currently imposed on the lattice.
    pub q_low: f64,
    /// Value imposed before the latest exchange.
    pub q_low_prev: f64,
    /// Latest value from the abstract solve.
    pub q_high: f64,
    /// Latest lattice measurement: section pressure, Pa.
    pub measured_pressure: f64,
    /// Latest lattice measurement: inflow, m²/s.
    pub measured_flow: f64,
    /// Normalisation of the residual.
    pub scale: f64,
    /// Bootstrap flow magnitude at the port, m²/s.
    pub flow_scale: f64,
}

impl PortState {
    /// Relative mismatch between the abstract value and the imposed value
    /// it replaces, before relaxation.
    pub fn residual(&self) -> f64 {
        let r = (self.q_high - self.q_low_prev).abs() / self.scale;
        if r < RESIDUAL_FLOOR {
            0.0
        } else {
            r
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingState {
    pub ports: Vec<PortState>,
    pub residual_history: Vec<f64>,
    pub exchange_count: usize,
    pub status: Status,
    /// Ground-pressure span, floored at 1 Pa.
    pub pressure_scale: f64,
    /// Largest relative change of a port measurement over the latest
    /// exchange; pressures over `pressure_scale`, flows over `flow_scale`.
    pub drift: f64,
    /// Allowed interval for imposed pressures.
    pub pressure_bounds: (f64, f64),
}

impl CouplingState {
    pub fn port(&self, id: PortId) -> Option<&PortState> {
        self.ports.iter().find(|p| p.port == id)
    }

    /// Maximum port residual of the latest exchange; 0 without ports.
    pub fn residual(&self) -> f64 {
        self.ports
            .iter()
            .map(PortState::residual)
            .fold(0.0, f64::max)
    }

    /// Log line of the latest exchange.
    pub fn log_line(&self) -> String {
        format!(
            "exchange={} residual={:.6e} drift={:.6e} status={}",
            self.exchange_count,
            self.residual_history.last().copied().unwrap_or(0.0),
            self.drift,
            self.status
        )
    }
}

/// Relative mismatches below this are round-off and count as zero, so that an
/// exactly converged run does not wander in its last digits.
pub const RESIDUAL_FLOOR: f64 = 1e-10;

/// Exchanges whose residuals must be non-increasing before the run may stop.
pub const TAIL_LENGTH: usize = 10;

/// `(1 - α) q_prev + α q_new`, written so that `q_new == q_prev` and
/// `α == 1` are exact.
pub fn relax(q_prev: f64, q_new: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        q_new
    } else {
        q_prev + alpha * (q_new - q_prev)
    }
}

/// Whether every port's relative mismatch of the latest exchange is at most
/// `epsilon`.
pub fn converged(state: &CouplingState, epsilon: f64) -> bool {
    state.exchange_count > 0 && state.ports.iter().all(|p| p.residual() <= epsilon)
}

/// Stopping rule of the exchange loop: [`converged`], the lattice
/// measurements moving by at most `drift_tolerance` per exchange, and at
/// least [`TAIL_LENGTH`] exchanges whose residuals did not increase.
///
/// The mismatch alone passes through zero while the lattice transient is
/// still oscillating against the relaxed boundary values, which would end
/// the run early. The loop uses `α·ε` as drift tolerance, the bound the
/// relaxed boundary values themselves obey at convergence.
pub fn settled(state: &CouplingState, epsilon: f64, drift_tolerance: f64) -> bool {
    let h = &state.residual_history;
    converged(state, epsilon)
        && state.drift <= drift_tolerance
        && h.len() >= TAIL_LENGTH
        && h[h.len() - TAIL_LENGTH..].windows(2).all(|w| w[1] <= w[0])
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CouplingError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid network: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Network(Vec<Violation>),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Mna(#[from] MnaError),
    #[error(transparent)]
    Lbm(#[from] LbmError),
    #[error("diverged at exchange {exchange}: {reason}; try a smaller alpha")]
    Diverged {
        exchange: usize,
        reason: String,
        state: Box<CouplingState>,
    },
    #[error("no convergence within {} exchanges (last residual {:.3e})", .0.exchange_count, .0.residual_history.last().copied().unwrap_or(f64::NAN))]
    Capped(Box<CouplingState>),
    #[error("monolithic run not steady after {steps} steps (change {change:.3e})")]
    NotSteady { steps: u64, change: f64 },
    #[error("probe {0} lies outside every lattice and channel")]
    ProbeOutside(String),
    #[error("probe sets differ: {0}")]
    ProbeMismatch(String),
}

impl CouplingError {
    /// Coupling state of a failed run, if the exchange loop was reached.
    pub fn state(&self) -> Option<&CouplingState> {
        match self {
            CouplingError::Diverged { state, .. } | CouplingError::Capped(state) => Some(state),
            _ => None,
        }
    }
}
