//! Device power traces from request pulses.

use crate::error::Result;
use crate::model::{DecisionVector, DeviceSpec, Request, Scenario};
use crate::scalar::Scalar;
use crate::series::{snap_pulse, TimeSeries};

/// Power trace of one device: idle draw plus a rectangular pulse for every
/// locally served request, `p(t) = idle + sum_r l(r) pi(r)` over requests
/// active at `t` (pulse interval closed on both ends, edges snapped to the
/// grid).
pub fn build_power_trace<T: Scalar>(
    scenario: &Scenario<T>,
    device: &crate::model::DeviceId,
    decisions: &DecisionVector,
) -> Result<TimeSeries<T>> {
    let dev = scenario.device(device)?;
    let requests = scenario.explicit_requests()?;
    decisions.validate_cover(requests)?;
    device_power_trace(dev, requests, decisions, scenario.horizon_s, scenario.dt_s)
}

/// Lower-level variant that takes the materialized request list directly.
pub fn device_power_trace<T: Scalar>(
    dev: &DeviceSpec<T>,
    requests: &[Request<T>],
    decisions: &DecisionVector,
    horizon_s: T,
    dt_s: T,
) -> Result<TimeSeries<T>> {
    let mut trace = TimeSeries::zeros_over(T::zero(), dt_s, horizon_s)?;
    let len = trace.len();
    let idle = dev.idle_power_watts;
    if idle > T::zero() {
        for s in trace.samples_mut() {
            *s = idle;
        }
    }
    for r in requests {
        if r.device != dev.id {
            continue;
        }
        if decisions.get(&r.id) != Some(true) {
            continue;
        }
        let (i0, i1) = snap_pulse(r.arrival_s, r.duration_s, dt_s, len);
        for s in &mut trace.samples_mut()[i0..=i1] {
            *s += r.power_watts;
        }
    }
    Ok(trace)
}
