//! Domain model: devices, requests, decision vectors, scenarios, the
//! deterministic feasibility check and an exhaustive oracle optimizer.

mod battery;
mod feasibility;
mod oracle;
mod power;

pub use battery::integrate_battery;
pub use feasibility::{
    check_feasibility, ConstraintCheck, DeviceFeasibility, FeasibilityReport, FEASIBILITY_SLACK,
};
pub use oracle::{oracle_optimize, OracleSolution, ORACLE_MAX_REQUESTS};
pub use power::{build_power_trace, device_power_trace};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};
use crate::thermal::ImpulseResponse;

macro_rules! id_newtype {
    ($name:ident) => {
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                Self(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_string())
            }
        }
    };
}

id_newtype!(DeviceId);
id_newtype!(RequestId);

/// A wearable device with its power, battery and thermal parameters.
#[derive(Debug, Clone)]
pub struct DeviceSpec<T> {
    pub id: DeviceId,
    /// Sustained power ceiling, watts.
    pub tdp_watts: T,
    /// Initial battery energy, joules.
    pub battery_joules: T,
    /// Default power draw of one locally served request, watts.
    pub request_power_watts: T,
    /// Default processing time of one request, seconds.
    pub request_duration_s: T,
    pub thermal: ImpulseResponse<T>,
    pub ambient_temp_c: T,
    /// Baseline draw added to every power sample, watts.
    pub idle_power_watts: T,
}

impl<T: Scalar> DeviceSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: T| -> Result<()> {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("device `{}`: must be positive, got {v}", self.id),
                });
            }
            Ok(())
        };
        positive("tdp_watts", self.tdp_watts)?;
        positive("battery_joules", self.battery_joules)?;
        positive("request_power_watts", self.request_power_watts)?;
        positive("request_duration_s", self.request_duration_s)?;
        if !(self.idle_power_watts >= T::zero()) || !self.idle_power_watts.is_finite() {
            return Err(Error::InvalidParameter {
                name: "idle_power_watts",
                reason: format!("device `{}`: must be non-negative", self.id),
            });
        }
        if !self.ambient_temp_c.is_finite() {
            return Err(Error::InvalidParameter {
                name: "ambient_temp_c",
                reason: format!("device `{}`: must be finite", self.id),
            });
        }
        if self.request_power_watts > self.tdp_watts {
            // no request would ever be locally servable
            return Err(Error::Scenario(format!(
                "device `{}`: request power {} W exceeds the TDP {} W, so no request could ever run locally",
                self.id, self.request_power_watts, self.tdp_watts
            )));
        }
        self.thermal.validate()
    }
}

/// One inference request bound to a device.
#[derive(Debug, Clone, PartialEq)]
pub struct Request<T> {
    pub id: RequestId,
    pub device: DeviceId,
    pub arrival_s: T,
    pub duration_s: T,
    pub power_watts: T,
}

/// Where a scenario's requests come from.
#[derive(Debug, Clone)]
pub enum RequestSource<T> {
    Explicit(Vec<Request<T>>),
    /// Per-device Poisson arrival rates, requests per second.
    Poisson(BTreeMap<DeviceId, T>),
}

#[derive(Debug, Clone)]
pub struct Scenario<T> {
    pub horizon_s: T,
    /// Grid step for traces, seconds.
    pub dt_s: T,
    /// Skin-temperature limit shared by all devices, degC.
    pub temp_limit_c: T,
    /// Cost charged per offloaded request.
    pub offload_unit_cost: T,
    pub devices: Vec<DeviceSpec<T>>,
    pub source: RequestSource<T>,
}

impl<T: Scalar> Scenario<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon_s > T::zero()) || !self.horizon_s.is_finite() {
            return Err(Error::Scenario(format!(
                "horizon must be positive, got {}",
                self.horizon_s
            )));
        }
        if !(self.dt_s > T::zero()) || !self.dt_s.is_finite() {
            return Err(Error::Scenario(format!("dt must be positive, got {}", self.dt_s)));
        }
        if !(self.offload_unit_cost > T::zero()) {
            return Err(Error::Scenario(format!(
                "offload unit cost must be positive, got {}",
                self.offload_unit_cost
            )));
        }
        if self.devices.is_empty() {
            return Err(Error::Scenario("scenario declares no devices".into()));
        }
        let mut ids = BTreeSet::new();
        let mut min_duration = T::infinity();
        for dev in &self.devices {
            dev.validate()?;
            if !ids.insert(dev.id.clone()) {
                return Err(Error::Scenario(format!("duplicate device id `{}`", dev.id)));
            }
            if dev.ambient_temp_c >= self.temp_limit_c {
                return Err(Error::Scenario(format!(
                    "temperature limit {} degC does not exceed the ambient {} degC of device `{}`",
                    self.temp_limit_c, dev.ambient_temp_c, dev.id
                )));
            }
            min_duration = min_duration.min(dev.request_duration_s);
        }
        match &self.source {
            RequestSource::Explicit(requests) => {
                let mut req_ids = BTreeSet::new();
                for r in requests {
                    if !ids.contains(&r.device) {
                        return Err(Error::UnknownDevice(r.device.to_string()));
                    }
                    if !req_ids.insert(r.id.clone()) {
                        return Err(Error::Scenario(format!("duplicate request id `{}`", r.id)));
                    }
                    if !(r.arrival_s >= T::zero() && r.arrival_s <= self.horizon_s) {
                        return Err(Error::Scenario(format!(
                            "request `{}` arrives at {} s, outside [0, {}]",
                            r.id, r.arrival_s, self.horizon_s
                        )));
                    }
                    if !(r.duration_s > T::zero()) || !(r.power_watts > T::zero()) {
                        return Err(Error::Scenario(format!(
                            "request `{}` needs positive duration and power",
                            r.id
                        )));
                    }
                    min_duration = min_duration.min(r.duration_s);
                }
            }
            RequestSource::Poisson(rates) => {
                for (dev, &rate) in rates {
                    if !ids.contains(dev) {
                        return Err(Error::UnknownDevice(dev.to_string()));
                    }
                    if !(rate >= T::zero()) || !rate.is_finite() {
                        return Err(Error::Scenario(format!(
                            "arrival rate for `{dev}` must be non-negative, got {rate}"
                        )));
                    }
                }
            }
        }
        // the grid must resolve the shortest pulse
        if self.dt_s > min_duration / cast::<T>(10.0) {
            return Err(Error::Scenario(format!(
                "dt {} s is too coarse for the shortest request duration {} s (need dt <= duration/10)",
                self.dt_s, min_duration
            )));
        }
        Ok(())
    }

    pub fn device(&self, id: &DeviceId) -> Result<&DeviceSpec<T>> {
        self.devices
            .iter()
            .find(|d| &d.id == id)
            .ok_or_else(|| Error::UnknownDevice(id.to_string()))
    }

    /// Explicit request list, or an error for generative scenarios.
    pub fn explicit_requests(&self) -> Result<&[Request<T>]> {
        match &self.source {
            RequestSource::Explicit(reqs) => Ok(reqs),
            RequestSource::Poisson(_) => Err(Error::Scenario(
                "scenario generates requests stochastically; materialize them first".into(),
            )),
        }
    }

    /// Clone of the scenario with the given explicit request list.
    pub fn with_requests(&self, requests: Vec<Request<T>>) -> Scenario<T> {
        Scenario {
            source: RequestSource::Explicit(requests),
            ..self.clone()
        }
    }
}

/// Sort requests by `(arrival, id)`; the canonical processing order.
pub fn sort_requests<T: Scalar>(requests: &mut [Request<T>]) {
    requests.sort_by(|a, b| {
        a.arrival_s
            .partial_cmp(&b.arrival_s)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.id.cmp(&b.id))
    });
}

/// Per-request local/offload decisions; covers exactly the requests of one
/// scenario (`true` = serve locally).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DecisionVector {
    flags: BTreeMap<RequestId, bool>,
}

impl DecisionVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, id: RequestId, local: bool) {
        self.flags.insert(id, local);
    }

    pub fn get(&self, id: &RequestId) -> Option<bool> {
        self.flags.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn local_count(&self) -> usize {
        self.flags.values().filter(|&&l| l).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RequestId, bool)> {
        self.flags.iter().map(|(k, &v)| (k, v))
    }

    pub fn all_local<T: Scalar>(requests: &[Request<T>]) -> Self {
        Self {
            flags: requests.iter().map(|r| (r.id.clone(), true)).collect(),
        }
    }

    pub fn all_offload<T: Scalar>(requests: &[Request<T>]) -> Self {
        Self {
            flags: requests.iter().map(|r| (r.id.clone(), false)).collect(),
        }
    }

    /// Check the vector covers exactly `requests`.
    pub fn validate_cover<T: Scalar>(&self, requests: &[Request<T>]) -> Result<()> {
        if self.flags.len() != requests.len() {
            return Err(Error::DecisionMismatch(format!(
                "{} decisions for {} requests",
                self.flags.len(),
                requests.len()
            )));
        }
        for r in requests {
            if !self.flags.contains_key(&r.id) {
                return Err(Error::DecisionMismatch(format!(
                    "no decision for request `{}`",
                    r.id
                )));
            }
        }
        Ok(())
    }
}
