//! Exhaustive offline optimizer for small instances.
//!
//! Enumerates all 2^n decision vectors, keeps the feasible ones and returns
//! a maximizer of the number of locally served requests. Ties break towards
//! the lexicographically smallest vector in arrival order (prefer offloading
//! earlier requests).

use crate::error::{Error, Result};
use crate::model::{
    sort_requests, DecisionVector, DeviceId, Request, Scenario, FEASIBILITY_SLACK,
};
use crate::scalar::{cast, Scalar};
use crate::series::{grid_len, snap_pulse, TimeSeries};
use crate::thermal::convolve_temperature;

pub const ORACLE_MAX_REQUESTS: usize = 20;

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub decisions: DecisionVector,
    /// Number of locally served requests.
    pub objective: usize,
}

struct RequestData<T> {
    id: crate::model::RequestId,
    device_index: usize,
    start: usize,
    end: usize,
    power: T,
    energy: T,
    rise: Vec<T>,
    peak_rise: T,
}

struct DeviceData<T> {
    tdp: T,
    battery_after_idle: T,
    /// ambient + idle-driven temperature per grid sample
    base_temp: Vec<T>,
    base_temp_max: T,
}

/// Find a feasible decision vector maximizing the local-serve count.
///
/// The scenario must carry explicit requests (at most
/// [`ORACLE_MAX_REQUESTS`]). When even the all-offload vector is infeasible
/// (possible only through idle draw), that vector is still returned as the
/// floor, with objective 0.
pub fn oracle_optimize<T: Scalar>(scenario: &Scenario<T>) -> Result<OracleSolution> {
    let mut requests: Vec<Request<T>> = scenario.explicit_requests()?.to_vec();
    let n = requests.len();
    if n > ORACLE_MAX_REQUESTS {
        return Err(Error::InstanceTooLarge {
            n,
            limit: ORACLE_MAX_REQUESTS,
        });
    }
    sort_requests(&mut requests);

    if n == 0 {
        return Ok(OracleSolution {
            decisions: DecisionVector::new(),
            objective: 0,
        });
    }

    let slack = cast::<T>(FEASIBILITY_SLACK);
    let dt = scenario.dt_s;
    let len = grid_len(scenario.horizon_s, dt);
    let half = cast::<T>(0.5);

    let device_ids: Vec<DeviceId> = scenario.devices.iter().map(|d| d.id.clone()).collect();
    let mut devices = Vec::with_capacity(scenario.devices.len());
    for dev in &scenario.devices {
        // idle draw: exact trapezoid over the whole horizon
        let idle_energy = dev.idle_power_watts * dt * cast::<T>((len - 1) as f64);
        let mut idle_trace = TimeSeries::zeros_over(T::zero(), dt, scenario.horizon_s)?;
        for s in idle_trace.samples_mut() {
            *s = dev.idle_power_watts;
        }
        let base = convolve_temperature(&idle_trace, &dev.thermal, dev.ambient_temp_c)?;
        let base_temp_max = base.max_sample().map(|(_, v)| v).unwrap_or(dev.ambient_temp_c);
        devices.push(DeviceData {
            tdp: dev.tdp_watts,
            battery_after_idle: dev.battery_joules - idle_energy,
            base_temp: base.into_samples(),
            base_temp_max,
        });
    }

    let mut data = Vec::with_capacity(n);
    for r in &requests {
        let device_index = device_ids
            .iter()
            .position(|d| d == &r.device)
            .ok_or_else(|| Error::UnknownDevice(r.device.to_string()))?;
        let dev = &scenario.devices[device_index];
        let (start, end) = snap_pulse(r.arrival_s, r.duration_s, dt, len);
        // trapezoid energy of the snapped closed-interval pulse
        let mut intervals = cast::<T>((end - start) as f64);
        if start > 0 {
            intervals += half;
        }
        if end < len - 1 {
            intervals += half;
        }
        let energy = r.power_watts * dt * intervals;
        let mut pulse = TimeSeries::zeros_over(T::zero(), dt, scenario.horizon_s)?;
        for s in &mut pulse.samples_mut()[start..=end] {
            *s = r.power_watts;
        }
        let rise = convolve_temperature(&pulse, &dev.thermal, T::zero())?;
        let peak_rise = rise.max_sample().map(|(_, v)| v).unwrap_or(T::zero());
        data.push(RequestData {
            id: r.id.clone(),
            device_index,
            start,
            end,
            power: r.power_watts,
            energy,
            rise: rise.into_samples(),
            peak_rise,
        });
    }

    // Request i sits at bit (n - 1 - i), so ascending integers enumerate
    // decision vectors in lexicographic order of (l_0, l_1, ...).
    let feasible = |mask: u32| -> bool {
        // battery: final level per device
        for (di, dev) in devices.iter().enumerate() {
            let mut remaining = dev.battery_after_idle;
            for (i, rd) in data.iter().enumerate() {
                if rd.device_index == di && mask & bit(n, i) != 0 {
                    remaining -= rd.energy;
                }
            }
            if remaining < -slack {
                return false;
            }
        }
        // power: peak concurrent draw per device via an event sweep
        for (di, dev) in devices.iter().enumerate() {
            let idle = scenario.devices[di].idle_power_watts;
            let mut events: Vec<(usize, T)> = Vec::new();
            for (i, rd) in data.iter().enumerate() {
                if rd.device_index == di && mask & bit(n, i) != 0 {
                    events.push((rd.start, rd.power));
                    events.push((rd.end + 1, -rd.power));
                }
            }
            events.sort_by_key(|e| e.0);
            let mut level = idle;
            for (_, delta) in events {
                level += delta;
                if level > dev.tdp + slack {
                    return false;
                }
            }
        }
        // temperature: cheap upper bound first, exact superposition after
        for (di, dev) in devices.iter().enumerate() {
            let mut peak_bound = dev.base_temp_max;
            let mut any = false;
            for (i, rd) in data.iter().enumerate() {
                if rd.device_index == di && mask & bit(n, i) != 0 {
                    peak_bound += rd.peak_rise;
                    any = true;
                }
            }
            if !any || peak_bound <= scenario.temp_limit_c + slack {
                continue;
            }
            let mut worst = T::neg_infinity();
            for k in 0..len {
                let mut v = dev.base_temp[k];
                for (i, rd) in data.iter().enumerate() {
                    if rd.device_index == di && mask & bit(n, i) != 0 {
                        v += rd.rise[k];
                    }
                }
                worst = worst.max(v);
                if worst > scenario.temp_limit_c + slack {
                    return false;
                }
            }
        }
        true
    };

    for count in (0..=n).rev() {
        if let Some(mask) = first_feasible_of_popcount(n, count, &feasible) {
            let mut decisions = DecisionVector::new();
            for (i, rd) in data.iter().enumerate() {
                decisions.set(rd.id.clone(), mask & bit(n, i) != 0);
            }
            return Ok(OracleSolution {
                decisions,
                objective: count,
            });
        }
    }

    // even all-offload failed (idle draw alone violates a limit): floor
    let mut decisions = DecisionVector::new();
    for rd in &data {
        decisions.set(rd.id.clone(), false);
    }
    Ok(OracleSolution {
        decisions,
        objective: 0,
    })
}

#[inline]
fn bit(n: usize, i: usize) -> u32 {
    1u32 << (n - 1 - i)
}

/// Smallest (lexicographically, in arrival order) feasible mask with exactly
/// `count` bits set; Gosper's hack walks same-popcount masks in ascending
/// integer order.
fn first_feasible_of_popcount(
    n: usize,
    count: usize,
    feasible: &dyn Fn(u32) -> bool,
) -> Option<u32> {
    if count == 0 {
        return feasible(0).then_some(0);
    }
    let limit = 1u32 << n;
    let mut mask = (1u32 << count) - 1;
    while mask < limit {
        if feasible(mask) {
            return Some(mask);
        }
        // Gosper: next integer with the same popcount
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        if r >= limit || c == 0 {
            break;
        }
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    None
}
