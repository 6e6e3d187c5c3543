//! Request generation for Poisson scenarios.

use crate::error::Result;
use crate::model::{sort_requests, Request, RequestSource, Scenario};
use crate::rng::{name_stream, poisson_arrivals, rng_for, tag};
use crate::scalar::{cast, to_f64, Scalar};

/// Materialize the scenario's request list.
///
/// Explicit lists pass through unchanged (sorted by arrival). For Poisson
/// sources each device gets its own seeded arrival stream keyed by its id
/// (so editing the device list leaves the others' arrivals untouched),
/// arrivals are truncated at the horizon, and durations/powers default from
/// the device. Request ids are `<device>-<k>` with k counting from 1 in
/// arrival order.
pub fn generate_requests<T: Scalar>(scenario: &Scenario<T>, seed: u64) -> Result<Vec<Request<T>>> {
    let mut out = match &scenario.source {
        RequestSource::Explicit(requests) => requests.clone(),
        RequestSource::Poisson(rates) => {
            let mut all = Vec::new();
            for device in &scenario.devices {
                let rate = rates.get(&device.id).copied().unwrap_or_else(T::zero);
                let mut rng = rng_for(seed, name_stream(device.id.as_str()), tag::GENERATE);
                let arrivals =
                    poisson_arrivals(&mut rng, to_f64(rate), to_f64(scenario.horizon_s));
                for (k, t) in arrivals.into_iter().enumerate() {
                    all.push(Request {
                        id: format!("{}-{}", device.id, k + 1).as_str().into(),
                        device: device.id.clone(),
                        arrival_s: cast(t),
                        duration_s: device.request_duration_s,
                        power_watts: device.request_power_watts,
                    });
                }
            }
            all
        }
    };
    sort_requests(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DeviceId, DeviceSpec};
    use crate::thermal::{ImpulseResponse, Stage};
    use std::collections::BTreeMap;

    fn scenario(rates: &[(&str, f64)]) -> Scenario<f64> {
        let devices = rates
            .iter()
            .map(|(id, _)| DeviceSpec {
                id: (*id).into(),
                tdp_watts: 2.0,
                battery_joules: 10_000.0,
                request_power_watts: 0.6,
                request_duration_s: 65.0,
                thermal: ImpulseResponse::parametric(
                    vec![Stage {
                        r_th_c_per_w: 20.0,
                        theta_s: 100.0,
                    }],
                    700.0,
                )
                .unwrap(),
                ambient_temp_c: 25.0,
                idle_power_watts: 0.0,
            })
            .collect();
        let map: BTreeMap<DeviceId, f64> = rates
            .iter()
            .map(|(id, r)| (DeviceId::from(*id), *r))
            .collect();
        Scenario {
            horizon_s: 3600.0,
            dt_s: 0.5,
            temp_limit_c: 43.0,
            offload_unit_cost: 1.0,
            devices,
            source: RequestSource::Poisson(map),
        }
    }

    #[test]
    fn zero_rate_generates_nothing() {
        let scen = scenario(&[("glass", 0.0)]);
        assert!(generate_requests(&scen, 1).unwrap().is_empty());
    }

    #[test]
    fn same_seed_same_requests() {
        let scen = scenario(&[("glass", 10.0 / 3600.0), ("hololens", 10.0 / 3600.0)]);
        let a = generate_requests(&scen, 42).unwrap();
        let b = generate_requests(&scen, 42).unwrap();
        assert_eq!(a, b);
        assert!(!a.is_empty());
        let c = generate_requests(&scen, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn requests_are_sorted_with_device_defaults() {
        let scen = scenario(&[("glass", 10.0 / 3600.0)]);
        let reqs = generate_requests(&scen, 7).unwrap();
        assert!(reqs.windows(2).all(|w| w[0].arrival_s <= w[1].arrival_s));
        for r in &reqs {
            assert_eq!(r.duration_s, 65.0);
            assert_eq!(r.power_watts, 0.6);
            assert!(r.arrival_s >= 0.0 && r.arrival_s <= 3600.0);
        }
        // ids count per device from 1
        assert_eq!(reqs[0].id, "glass-1".into());
    }

    #[test]
    fn adding_a_device_preserves_other_streams() {
        let one = scenario(&[("glass", 10.0 / 3600.0)]);
        let two = scenario(&[("glass", 10.0 / 3600.0), ("hololens", 5.0 / 3600.0)]);
        let a = generate_requests(&one, 9).unwrap();
        let b: Vec<_> = generate_requests(&two, 9)
            .unwrap()
            .into_iter()
            .filter(|r| r.device == "glass".into())
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn empirical_mean_count_matches_rate() {
        // lambda * T = 10: mean over 10_000 seeds within 10 +/- 0.3 (3 sigma)
        let scen = scenario(&[("glass", 10.0 / 3600.0)]);
        let mut total = 0usize;
        for seed in 0..10_000u64 {
            total += generate_requests(&scen, seed).unwrap().len();
        }
        let mean = total as f64 / 10_000.0;
        assert!((mean - 10.0).abs() < 0.3, "empirical mean {mean}");
    }
}
