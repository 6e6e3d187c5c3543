//! Deterministic feasibility of a decision vector against the TDP, battery
//! and temperature constraints.

use crate::error::Result;
use crate::model::{build_power_trace, integrate_battery, DecisionVector, DeviceId, Scenario};
use crate::scalar::{cast, Scalar};
use crate::thermal::convolve_temperature;

/// Absolute slack applied to every constraint comparison.
pub const FEASIBILITY_SLACK: f64 = 1e-9;

/// One constraint verdict: the worst observed value against its limit.
#[derive(Debug, Clone, Copy)]
pub struct ConstraintCheck<T> {
    pub ok: bool,
    pub worst: T,
    pub limit: T,
    pub first_violation_s: Option<T>,
}

#[derive(Debug, Clone)]
pub struct DeviceFeasibility<T> {
    pub device: DeviceId,
    /// Instantaneous power against the TDP.
    pub power: ConstraintCheck<T>,
    /// Final battery level against zero.
    pub battery: ConstraintCheck<T>,
    /// Peak temperature against the scenario limit.
    pub temperature: ConstraintCheck<T>,
}

impl<T> DeviceFeasibility<T> {
    pub fn feasible(&self) -> bool {
        self.power.ok && self.battery.ok && self.temperature.ok
    }
}

#[derive(Debug, Clone)]
pub struct FeasibilityReport<T> {
    pub per_device: Vec<DeviceFeasibility<T>>,
}

impl<T> FeasibilityReport<T> {
    pub fn feasible(&self) -> bool {
        self.per_device.iter().all(|d| d.feasible())
    }

    pub fn device(&self, id: &DeviceId) -> Option<&DeviceFeasibility<T>> {
        self.per_device.iter().find(|d| &d.device == id)
    }
}

/// Check a decision vector against all three constraints on every device.
pub fn check_feasibility<T: Scalar>(
    scenario: &Scenario<T>,
    decisions: &DecisionVector,
) -> Result<FeasibilityReport<T>> {
    let slack = cast::<T>(FEASIBILITY_SLACK);
    let mut per_device = Vec::with_capacity(scenario.devices.len());
    for dev in &scenario.devices {
        let power = build_power_trace(scenario, &dev.id, decisions)?;
        let battery = integrate_battery(&power, dev.battery_joules)?;
        let temperature = convolve_temperature(&power, &dev.thermal, dev.ambient_temp_c)?;

        let over_power = power
            .iter_points()
            .find(|&(_, p)| p > dev.tdp_watts + slack);
        let (_, max_power) = power.max_sample().expect("non-empty trace");
        let power_check = ConstraintCheck {
            ok: over_power.is_none(),
            worst: max_power,
            limit: dev.tdp_watts,
            first_violation_s: over_power.map(|(t, _)| t),
        };

        let under_battery = battery
            .iter_points()
            .find(|&(_, b)| b < -slack);
        let final_battery = *battery.samples().last().expect("non-empty trace");
        let battery_check = ConstraintCheck {
            ok: final_battery >= -slack,
            worst: final_battery,
            limit: T::zero(),
            first_violation_s: under_battery.map(|(t, _)| t),
        };

        let over_temp = temperature
            .iter_points()
            .find(|&(_, c)| c > scenario.temp_limit_c + slack);
        let (_, max_temp) = temperature.max_sample().expect("non-empty trace");
        let temp_check = ConstraintCheck {
            ok: over_temp.is_none(),
            worst: max_temp,
            limit: scenario.temp_limit_c,
            first_violation_s: over_temp.map(|(t, _)| t),
        };

        per_device.push(DeviceFeasibility {
            device: dev.id.clone(),
            power: power_check,
            battery: battery_check,
            temperature: temp_check,
        });
    }
    Ok(FeasibilityReport { per_device })
}
