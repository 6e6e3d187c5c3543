//! Seeded event simulator: plays a scenario through an offloading strategy,
//! producing full traces and summary metrics, plus Monte Carlo ensembles.

mod ensemble;
mod generate;
mod histogram;
mod run;

pub use ensemble::{monte_carlo, EnsembleSummary, RunRow};
pub use generate::generate_requests;
pub use histogram::{
    empirical_temperature_distribution, histogram_from_trace, histogram_with_range, Histogram,
};
pub use run::{run, run_with_context, SimContext};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{DecisionVector, DeviceId, Request};
use crate::scalar::Scalar;
use crate::series::TimeSeries;

/// Offloading strategies.
#[derive(Debug, Clone, PartialEq)]
pub enum StrategyKind<T> {
    /// Stationary stochastic policy: each arrival is served locally with its
    /// device's probability α. With `guard` set, a draw that would push
    /// instantaneous power above the TDP is overridden to offload.
    Tao {
        alpha: BTreeMap<DeviceId, T>,
        guard: bool,
    },
    /// Greedy local-first baseline: serves locally whenever instantaneous
    /// power stays within the TDP and the projected battery at the horizon
    /// stays non-negative; ignores temperature.
    Sota,
    AlwaysOffload,
    AlwaysLocal,
    /// Exhaustive offline optimizer (small instances only).
    Oracle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Strategy<T> {
    pub kind: StrategyKind<T>,
    /// Decorrelates the policy's own coin flips from request generation and
    /// from other strategies run under the same simulation seed.
    pub rng_seed: u64,
}

impl<T: Scalar> Strategy<T> {
    pub fn tao(alpha: BTreeMap<DeviceId, T>, guard: bool, rng_seed: u64) -> Self {
        Self {
            kind: StrategyKind::Tao { alpha, guard },
            rng_seed,
        }
    }

    pub fn sota() -> Self {
        Self {
            kind: StrategyKind::Sota,
            rng_seed: 0,
        }
    }

    pub fn always_offload() -> Self {
        Self {
            kind: StrategyKind::AlwaysOffload,
            rng_seed: 0,
        }
    }

    pub fn always_local() -> Self {
        Self {
            kind: StrategyKind::AlwaysLocal,
            rng_seed: 0,
        }
    }

    pub fn oracle() -> Self {
        Self {
            kind: StrategyKind::Oracle,
            rng_seed: 0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            StrategyKind::Tao { .. } => "tao",
            StrategyKind::Sota => "sota",
            StrategyKind::AlwaysOffload => "always_offload",
            StrategyKind::AlwaysLocal => "always_local",
            StrategyKind::Oracle => "oracle",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let StrategyKind::Tao { alpha, .. } = &self.kind {
            for (device, &a) in alpha {
                if !(a >= T::zero() && a <= T::one()) {
                    return Err(Error::InvalidParameter {
                        name: "alpha",
                        reason: format!("alpha for device {device} must lie in [0, 1], got {a}"),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Full per-device traces of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceTraces<T> {
    pub power: TimeSeries<T>,
    pub temperature: TimeSeries<T>,
    pub battery: TimeSeries<T>,
    pub cumulative_cost: TimeSeries<T>,
}

/// Per-device summary metrics of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceMetrics<T> {
    pub max_power_w: T,
    pub max_temp_c: T,
    /// Fraction of grid samples with temperature above the limit.
    pub temp_violation_fraction: T,
    pub final_battery_j: T,
    pub n_local: usize,
    pub n_offloaded: usize,
    pub total_cost: T,
    pub violated_power: bool,
    pub violated_battery: bool,
    pub violated_temperature: bool,
}

impl<T: Scalar> DeviceMetrics<T> {
    pub fn any_violation(&self) -> bool {
        self.violated_power || self.violated_battery || self.violated_temperature
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceRun<T> {
    pub device: DeviceId,
    /// Ambient the temperature trace relaxes to, degC.
    pub ambient_temp_c: T,
    pub traces: DeviceTraces<T>,
    pub metrics: DeviceMetrics<T>,
}

/// Everything one simulation run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult<T> {
    /// The realized request list (generated for Poisson sources), in
    /// arrival order.
    pub requests: Vec<Request<T>>,
    pub decisions: DecisionVector,
    pub per_device: Vec<DeviceRun<T>>,
    /// Temperature limit the metrics were evaluated against.
    pub temp_limit_c: T,
}

impl<T: Scalar> RunResult<T> {
    pub fn device(&self, id: &DeviceId) -> Result<&DeviceRun<T>> {
        self.per_device
            .iter()
            .find(|d| &d.device == id)
            .ok_or_else(|| Error::UnknownDevice(id.to_string()))
    }

    pub fn total_cost(&self) -> T {
        self.per_device
            .iter()
            .map(|d| d.metrics.total_cost)
            .fold(T::zero(), |a, b| a + b)
    }

    pub fn total_local(&self) -> usize {
        self.per_device.iter().map(|d| d.metrics.n_local).sum()
    }

    pub fn total_offloaded(&self) -> usize {
        self.per_device.iter().map(|d| d.metrics.n_offloaded).sum()
    }

    /// Highest temperature reached on any device.
    pub fn max_temp_c(&self) -> T {
        self.per_device
            .iter()
            .map(|d| d.metrics.max_temp_c)
            .fold(T::neg_infinity(), |a, b| a.max(b))
    }

    /// Violating grid samples over all devices divided by total samples.
    pub fn pooled_temp_violation_fraction(&self) -> T {
        let mut weighted = T::zero();
        let mut total = T::zero();
        for d in &self.per_device {
            let n = crate::scalar::cast::<T>(d.traces.temperature.len() as f64);
            weighted += d.metrics.temp_violation_fraction * n;
            total += n;
        }
        if total > T::zero() {
            weighted / total
        } else {
            T::zero()
        }
    }

    /// Sum of final battery levels over devices.
    pub fn total_final_battery_j(&self) -> T {
        self.per_device
            .iter()
            .map(|d| d.metrics.final_battery_j)
            .fold(T::zero(), |a, b| a + b)
    }

    pub fn any_violation(&self) -> bool {
        self.per_device.iter().any(|d| d.metrics.any_violation())
    }

    pub fn any_temperature_violation(&self) -> bool {
        self.per_device
            .iter()
            .any(|d| d.metrics.violated_temperature)
    }
}
