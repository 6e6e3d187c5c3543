//! Chance-constrained analytics: Poisson kernels, ω-confidence feasibility
//! evaluators for power, battery and temperature, and the bisection solver
//! for the largest safe local-serve probability α per device.
//!
//! Two load models are supported:
//!
//! * [`LoadMode::Paper`] — closed forms in which every locally served request
//!   keeps drawing power for the rest of the horizon (cumulative count
//!   `N(t) ~ Poisson(λαt)`); analytically convenient and kept for fidelity.
//! * [`LoadMode::BusyServer`] — requests draw power only while in service
//!   (stationary occupancy `~ Poisson(λαδ)`, total energy `π·δ·N(T)`), which
//!   matches the simulator and is the default for experiments.

mod constraints;
pub mod poisson;
mod solve;

pub use constraints::{
    battery_feasible, power_feasible, power_sufficiency, thermal_feasible, ConstraintEval,
};
pub use poisson::{ln_gamma, poisson_cdf, poisson_pmf, poisson_quantile};
pub use solve::{
    constraint_margins, solve_alpha, solve_alpha_with, ConstraintSet, ALPHA_TOLERANCE,
};

use crate::error::{Error, Result};
use crate::model::DeviceId;
use crate::scalar::{cast, Scalar};

/// Which closed-form load model the evaluators use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadMode {
    /// Cumulative-count model: every served request draws power forever.
    Paper,
    /// Occupancy model: requests draw power only while in service.
    BusyServer,
}

impl LoadMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LoadMode::Paper => "paper",
            LoadMode::BusyServer => "busy_server",
        }
    }
}

/// Confidence policy: target level ω plus the load model and the Monte Carlo
/// budget used by the non-analytic temperature check.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidencePolicy<T> {
    /// Required confidence level, strictly inside (0, 1).
    pub omega: T,
    pub mode: LoadMode,
    /// Monte Carlo sample count for the busy-server temperature check.
    pub mc_runs: usize,
    pub mc_seed: u64,
    /// Grid step for Monte Carlo thermal simulation, in seconds.
    pub mc_dt_s: T,
}

impl<T: Scalar> Default for ConfidencePolicy<T> {
    fn default() -> Self {
        Self {
            omega: cast(0.95),
            mode: LoadMode::BusyServer,
            mc_runs: 1000,
            mc_seed: 0,
            mc_dt_s: cast(0.1),
        }
    }
}

impl<T: Scalar> ConfidencePolicy<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > T::zero() && self.omega < T::one()) {
            return Err(Error::InvalidParameter {
                name: "omega",
                reason: format!("must lie strictly in (0, 1), got {}", self.omega),
            });
        }
        if self.mc_runs == 0 {
            return Err(Error::ZeroMcBudget);
        }
        if !(self.mc_dt_s > T::zero()) {
            return Err(Error::InvalidParameter {
                name: "mc_dt_s",
                reason: format!("must be positive, got {}", self.mc_dt_s),
            });
        }
        Ok(())
    }
}

/// Poisson request load after thinning: arrivals at `rate_per_s`, each served
/// locally with probability `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonLoad<T> {
    pub rate_per_s: T,
    pub alpha: T,
}

impl<T: Scalar> PoissonLoad<T> {
    pub fn new(rate_per_s: T, alpha: T) -> Result<Self> {
        if !(rate_per_s >= T::zero()) {
            return Err(Error::InvalidParameter {
                name: "rate_per_s",
                reason: format!("must be non-negative, got {rate_per_s}"),
            });
        }
        if !(alpha >= T::zero() && alpha <= T::one()) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("must lie in [0, 1], got {alpha}"),
            });
        }
        Ok(Self { rate_per_s, alpha })
    }

    /// Mean number of locally served requests arriving in `[0, t]`.
    pub fn mean_count(&self, t: T) -> T {
        self.rate_per_s * self.alpha * t
    }

    /// Mean number of requests in service at a point in time (occupancy of an
    /// M/G/∞ system with service time `duration_s`).
    pub fn mean_occupancy(&self, duration_s: T) -> T {
        self.rate_per_s * self.alpha * duration_s
    }
}

/// Which constraint pins α at its solved value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Binding {
    Power,
    Battery,
    Temperature,
    /// Every constraint is slack at α = 1.
    None,
}

impl Binding {
    pub fn as_str(self) -> &'static str {
        match self {
            Binding::Power => "power",
            Binding::Battery => "battery",
            Binding::Temperature => "temperature",
            Binding::None => "none",
        }
    }
}

/// Per-constraint probability-scale margins (P(safe) − ω) at a given α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintMargins<T> {
    pub power: T,
    pub battery: T,
    pub temperature: T,
}

impl<T: Scalar> ConstraintMargins<T> {
    /// Smallest margin and the constraint it belongs to (ties resolve in the
    /// fixed order power, battery, temperature).
    pub fn binding(&self) -> (Binding, T) {
        let mut best = (Binding::Power, self.power);
        if self.battery < best.1 {
            best = (Binding::Battery, self.battery);
        }
        if self.temperature < best.1 {
            best = (Binding::Temperature, self.temperature);
        }
        best
    }
}

/// Result of [`solve_alpha`]: the largest α such that all chance constraints
/// hold, with the binding constraint and its margin.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSolution<T> {
    pub device: DeviceId,
    pub alpha: T,
    pub binding: Binding,
    /// Margin (P(safe) − ω) of the binding constraint at `alpha`.
    pub slack_at_alpha: T,
    /// Margins of all three constraints at `alpha`.
    pub margins: ConstraintMargins<T>,
}
