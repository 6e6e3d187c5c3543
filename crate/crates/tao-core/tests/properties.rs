//! Randomized invariants across the model, thermal, chance and sim layers.
//!
//! Each block states a structural property that must hold for *every* valid
//! input, then hammers it with seeded random instances. Case counts are kept
//! modest because several properties run full simulations.

use std::collections::BTreeMap;

use proptest::prelude::*;

use tao_core::chance::{poisson_cdf, poisson_pmf, poisson_quantile};
use tao_core::model::{
    build_power_trace, check_feasibility, integrate_battery, oracle_optimize, DecisionVector,
    DeviceId, DeviceSpec, Request, RequestId, RequestSource, Scenario,
};
use tao_core::sim::run;
use tao_core::thermal::{convolve_temperature, ImpulseResponse, Stage};
use tao_core::{Scenario64, Strategy64, TimeSeries64};

// ---------------------------------------------------------------------------
// fixture builders
// ---------------------------------------------------------------------------

fn thermal(r_th: f64, theta: f64) -> ImpulseResponse<f64> {
    ImpulseResponse::parametric(
        vec![Stage {
            r_th_c_per_w: r_th,
            theta_s: theta,
        }],
        5.0 * theta,
    )
    .expect("valid single-stage response")
}

fn device(id: &str, tdp: f64, battery: f64, idle: f64, r_th: f64, theta: f64) -> DeviceSpec<f64> {
    DeviceSpec {
        id: DeviceId::from(id),
        tdp_watts: tdp,
        battery_joules: battery,
        request_power_watts: 0.5,
        request_duration_s: 8.0,
        thermal: thermal(r_th, theta),
        ambient_temp_c: 25.0,
        idle_power_watts: idle,
    }
}

fn request(idx: usize, dev: &str, arrival: f64, duration: f64, power: f64) -> Request<f64> {
    Request {
        id: RequestId::from(format!("r{idx}").as_str()),
        device: DeviceId::from(dev),
        arrival_s: arrival,
        duration_s: duration,
        power_watts: power,
    }
}

fn explicit_scenario(
    devices: Vec<DeviceSpec<f64>>,
    requests: Vec<Request<f64>>,
    horizon: f64,
    dt: f64,
    temp_limit: f64,
) -> Scenario64 {
    let scen = Scenario {
        horizon_s: horizon,
        dt_s: dt,
        temp_limit_c: temp_limit,
        offload_unit_cost: 1.0,
        devices,
        source: RequestSource::Explicit(requests),
    };
    scen.validate().expect("generated scenario must be valid");
    scen
}

/// (arrival, duration, power) triples that keep dt = 0.5 legal (duration >= 5 s).
fn arb_pulses(max_n: usize, horizon: f64) -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec(
        (0.0..horizon * 0.8, 5.0..20.0f64, 0.2..1.0f64),
        1..=max_n,
    )
}

fn pulses_to_requests(pulses: &[(f64, f64, f64)], dev: &str) -> Vec<Request<f64>> {
    pulses
        .iter()
        .enumerate()
        .map(|(i, &(a, d, p))| request(i, dev, a, d, p))
        .collect()
}

// ---------------------------------------------------------------------------
// chance kernels
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The cdf is a proper distribution function: bounded, non-decreasing in
    /// k, and equal to the running pmf sum.
    #[test]
    fn poisson_cdf_is_monotone_and_matches_pmf_sums(mean in 1e-6f64..60.0) {
        let mut prev = 0.0;
        let mut pmf_sum = 0.0;
        for k in 0..=150u64 {
            let cdf = poisson_cdf(k, mean).unwrap();
            pmf_sum += poisson_pmf(k, mean).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&cdf), "cdf({k}) = {cdf}");
            prop_assert!(cdf >= prev - 1e-12, "cdf must not decrease at k = {k}");
            prop_assert!((cdf - pmf_sum).abs() <= 1e-9 * pmf_sum.max(1e-300));
            prev = cdf;
        }
    }

    /// `poisson_quantile(omega, mean)` is the smallest k with cdf(k) >= omega.
    #[test]
    fn poisson_quantile_is_the_least_sufficient_count(
        mean in 0.01f64..40.0,
        omega in 0.5f64..0.9999,
    ) {
        let q = poisson_quantile(omega, mean).unwrap();
        prop_assert!(poisson_cdf(q, mean).unwrap() >= omega);
        if q > 0 {
            prop_assert!(poisson_cdf(q - 1, mean).unwrap() < omega);
        }
    }
}

// ---------------------------------------------------------------------------
// thermal convolution
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// The temperature operator is linear: the rise of a superposed trace is
    /// the sum of the individual rises, and scaling power scales the rise.
    #[test]
    fn convolution_is_linear_in_the_power_trace(
        pulses_a in arb_pulses(3, 120.0),
        pulses_b in arb_pulses(3, 120.0),
        scale in 0.25f64..4.0,
        r_th in 2.0f64..15.0,
        theta in 5.0f64..30.0,
    ) {
        let dt = 0.5;
        let horizon = 180.0;
        let ambient = 25.0;
        let resp = thermal(r_th, theta);

        let build = |pulses: &[(f64, f64, f64)]| {
            let mut trace = TimeSeries64::zeros_over(0.0, dt, horizon).unwrap();
            let len = trace.len();
            for &(a, d, p) in pulses {
                let (i0, i1) = tao_core::series::snap_pulse(a, d, dt, len);
                for s in &mut trace.samples_mut()[i0..=i1] {
                    *s += p;
                }
            }
            trace
        };

        let pa = build(&pulses_a);
        let pb = build(&pulses_b);
        let mut sum = pa.clone();
        for (s, &b) in sum.samples_mut().iter_mut().zip(pb.samples()) {
            *s += b;
        }
        let mut scaled = pa.clone();
        for s in scaled.samples_mut() {
            *s *= scale;
        }

        let ta = convolve_temperature(&pa, &resp, ambient).unwrap();
        let tb = convolve_temperature(&pb, &resp, 0.0).unwrap();
        let t_sum = convolve_temperature(&sum, &resp, ambient).unwrap();
        let t_scaled = convolve_temperature(&scaled, &resp, ambient).unwrap();

        for i in 0..ta.len() {
            let superposed = ta.samples()[i] + tb.samples()[i];
            prop_assert!(
                (t_sum.samples()[i] - superposed).abs() <= 1e-9 * superposed.abs().max(1.0),
                "superposition failed at sample {i}"
            );
            let rise = ta.samples()[i] - ambient;
            let scaled_rise = t_scaled.samples()[i] - ambient;
            prop_assert!(
                (scaled_rise - scale * rise).abs() <= 1e-9 * (scale * rise).abs().max(1.0),
                "homogeneity failed at sample {i}"
            );
        }
    }
}

// ---------------------------------------------------------------------------
// power, battery and decision monotonicity
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Batteries never charge: with non-negative power the trace is
    /// non-increasing, starts at the initial level, and ends exactly one
    /// trapezoid integral below it.
    #[test]
    fn battery_decreases_by_exactly_the_consumed_energy(
        pulses in arb_pulses(6, 150.0),
        idle in 0.0f64..0.2,
        initial in 100.0f64..5_000.0,
    ) {
        let mut dev = device("glass", 50.0, initial, idle, 8.0, 20.0);
        dev.battery_joules = initial;
        let requests = pulses_to_requests(&pulses, "glass");
        let scen = explicit_scenario(vec![dev], requests, 200.0, 0.5, 43.0);
        let decisions = DecisionVector::all_local(scen.explicit_requests().unwrap());
        let power = build_power_trace(&scen, &DeviceId::from("glass"), &decisions).unwrap();
        let battery = integrate_battery(&power, initial).unwrap();

        prop_assert_eq!(battery.samples()[0], initial);
        for w in battery.samples().windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "battery must never charge");
        }
        // independent trapezoid integral of the power trace
        let dt = power.dt_s();
        let mut energy = 0.0;
        for w in power.samples().windows(2) {
            energy += 0.5 * (w[0] + w[1]) * dt;
        }
        let expected = initial - energy;
        let last = *battery.samples().last().unwrap();
        prop_assert!((last - expected).abs() <= 1e-9 * initial.max(energy));
    }

    /// Offloading one more request can only help every physical margin:
    /// power and temperature drop pointwise, battery rises pointwise.
    #[test]
    fn offloading_one_request_relaxes_every_trace(
        pulses in arb_pulses(6, 150.0),
        flip_seed in 0usize..64,
        idle in 0.0f64..0.2,
    ) {
        let dev = device("glass", 50.0, 10_000.0, idle, 8.0, 20.0);
        let requests = pulses_to_requests(&pulses, "glass");
        let n = requests.len();
        let scen = explicit_scenario(vec![dev], requests, 200.0, 0.5, 43.0);
        let reqs = scen.explicit_requests().unwrap();

        let mut before = DecisionVector::all_local(reqs);
        // a superset decision vector: flip one local request to offload
        let flipped = reqs[flip_seed % n].id.clone();
        let mut after = before.clone();
        after.set(flipped, false);
        // and make some unrelated requests offloaded in both vectors
        for (i, r) in reqs.iter().enumerate() {
            if i % 3 == 2 {
                before.set(r.id.clone(), false);
                after.set(r.id.clone(), false);
            }
        }

        let id = DeviceId::from("glass");
        let p_before = build_power_trace(&scen, &id, &before).unwrap();
        let p_after = build_power_trace(&scen, &id, &after).unwrap();
        let t_before = convolve_temperature(&p_before, &scen.devices[0].thermal, 25.0).unwrap();
        let t_after = convolve_temperature(&p_after, &scen.devices[0].thermal, 25.0).unwrap();
        let b_before = integrate_battery(&p_before, 10_000.0).unwrap();
        let b_after = integrate_battery(&p_after, 10_000.0).unwrap();

        for i in 0..p_before.len() {
            prop_assert!(p_after.samples()[i] <= p_before.samples()[i] + 1e-12);
            prop_assert!(t_after.samples()[i] <= t_before.samples()[i] + 1e-9);
            prop_assert!(b_after.samples()[i] >= b_before.samples()[i] - 1e-9);
        }
    }
}

// ---------------------------------------------------------------------------
// oracle dominance
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The exhaustive optimizer returns a feasible vector that weakly
    /// dominates every feasible decision vector in local-serve count.
    #[test]
    fn oracle_dominates_every_feasible_decision_vector(
        pulses in arb_pulses(7, 100.0),
        masks in prop::collection::vec(0u32..128, 12),
        tdp in 1.2f64..2.5,
        limit in 33.0f64..45.0,
    ) {
        let dev = device("glass", tdp, 600.0, 0.0, 8.0, 20.0);
        let mut requests = pulses_to_requests(&pulses, "glass");
        // keep each request individually legal for the device cap
        for r in &mut requests {
            r.power_watts = r.power_watts.min(tdp);
        }
        let scen = explicit_scenario(vec![dev], requests, 150.0, 0.5, limit);
        let reqs = scen.explicit_requests().unwrap().to_vec();

        let solution = oracle_optimize(&scen).unwrap();
        let oracle_report = check_feasibility(&scen, &solution.decisions).unwrap();
        prop_assert!(oracle_report.feasible(), "oracle returned an infeasible vector");
        prop_assert_eq!(solution.objective, solution.decisions.local_count());

        for mask in masks {
            let mut decisions = DecisionVector::new();
            for (i, r) in reqs.iter().enumerate() {
                decisions.set(r.id.clone(), mask & (1 << i) != 0);
            }
            let report = check_feasibility(&scen, &decisions).unwrap();
            if report.feasible() {
                prop_assert!(
                    decisions.local_count() <= solution.objective,
                    "a feasible vector with {} local beats the oracle's {}",
                    decisions.local_count(),
                    solution.objective
                );
            }
        }
    }
}

// ---------------------------------------------------------------------------
// simulator invariants
// ---------------------------------------------------------------------------

fn poisson_scenario(rate_per_s: f64, tdp: f64) -> Scenario64 {
    let dev = device("glass", tdp, 50_000.0, 0.02, 8.0, 40.0);
    let mut rates = BTreeMap::new();
    rates.insert(DeviceId::from("glass"), rate_per_s);
    let scen = Scenario {
        horizon_s: 600.0,
        dt_s: 0.5,
        temp_limit_c: 43.0,
        offload_unit_cost: 1.0,
        devices: vec![dev],
        source: RequestSource::Poisson(rates),
    };
    scen.validate().expect("poisson fixture must be valid");
    scen
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// The same (scenario, strategy, seed) triple reproduces a run bit for
    /// bit, and all strategies facing one seed see the same request stream.
    #[test]
    fn runs_are_deterministic_and_share_arrivals_across_strategies(
        seed in 0u64..10_000,
        alpha in 0.0f64..=1.0,
        rate in 0.001f64..0.05,
    ) {
        let scen = poisson_scenario(rate, 2.0);
        let mut alphas = BTreeMap::new();
        alphas.insert(DeviceId::from("glass"), alpha);
        let tao = Strategy64::tao(alphas, false, 7);

        let first = run(&scen, &tao, seed).unwrap();
        let second = run(&scen, &tao, seed).unwrap();
        prop_assert_eq!(&first, &second, "identical seeds must reproduce the run");

        let sota = run(&scen, &Strategy64::sota(), seed).unwrap();
        let off = run(&scen, &Strategy64::always_offload(), seed).unwrap();
        prop_assert_eq!(&first.requests, &sota.requests);
        prop_assert_eq!(&sota.requests, &off.requests);
        // always-offload serves nothing locally, whatever the stream
        prop_assert_eq!(off.total_local(), 0);
        prop_assert_eq!(off.total_offloaded(), off.requests.len());
    }

    /// Cost bookkeeping: each offloaded request is charged exactly the unit
    /// cost, the cumulative trace ends at the total, and counts cover the
    /// realized request list.
    #[test]
    fn costs_count_offloaded_requests_exactly(
        seed in 0u64..10_000,
        alpha in 0.0f64..=1.0,
    ) {
        let scen = poisson_scenario(0.02, 2.0);
        let mut alphas = BTreeMap::new();
        alphas.insert(DeviceId::from("glass"), alpha);
        let result = run(&scen, &Strategy64::tao(alphas, false, 3), seed).unwrap();

        let mut total_counted = 0;
        for dev_run in &result.per_device {
            let m = &dev_run.metrics;
            let expected = m.n_offloaded as f64 * scen.offload_unit_cost;
            prop_assert!((m.total_cost - expected).abs() <= 1e-9);
            let final_cost = *dev_run.traces.cumulative_cost.samples().last().unwrap();
            prop_assert!((final_cost - m.total_cost).abs() <= 1e-9);
            total_counted += m.n_local + m.n_offloaded;
        }
        prop_assert_eq!(total_counted, result.requests.len());
        prop_assert_eq!(
            result.total_local() + result.total_offloaded(),
            result.requests.len()
        );
    }

    /// With the TDP guard on, the stochastic policy never draws more than the
    /// cap at any instant, even under bursty overlapping arrivals.
    #[test]
    fn guarded_tao_never_exceeds_the_tdp(seed in 0u64..10_000) {
        // rate high enough that unguarded overlaps are routine
        let scen = poisson_scenario(0.05, 1.0);
        let mut alphas = BTreeMap::new();
        alphas.insert(DeviceId::from("glass"), 1.0);
        let result = run(&scen, &Strategy64::tao(alphas, true, 0), seed).unwrap();
        for dev_run in &result.per_device {
            let tdp = scen.device(&dev_run.device).unwrap().tdp_watts;
            prop_assert!(
                dev_run.metrics.max_power_w <= tdp + 1e-9,
                "guarded run peaked at {} W over a {} W cap",
                dev_run.metrics.max_power_w,
                tdp
            );
            prop_assert!(!dev_run.metrics.violated_power);
        }
    }
}

// ---------------------------------------------------------------------------
// deterministic spot checks that complement the random sweeps
// ---------------------------------------------------------------------------

/// The unguarded policy at alpha = 1 matches always-local decision for
/// decision, so the TDP guard is the only thing separating the two.
#[test]
fn alpha_one_unguarded_matches_always_local() {
    let scen = poisson_scenario(0.03, 50.0);
    let mut alphas = BTreeMap::new();
    alphas.insert(DeviceId::from("glass"), 1.0);
    let tao = run(&scen, &Strategy64::tao(alphas, false, 11), 42).unwrap();
    let local = run(&scen, &Strategy64::always_local(), 42).unwrap();
    assert_eq!(tao.decisions, local.decisions);
    assert_eq!(tao.per_device[0].traces, local.per_device[0].traces);
}

/// At alpha = 0 the policy collapses to always-offload.
#[test]
fn alpha_zero_matches_always_offload() {
    let scen = poisson_scenario(0.03, 2.0);
    let mut alphas = BTreeMap::new();
    alphas.insert(DeviceId::from("glass"), 0.0);
    let tao = run(&scen, &Strategy64::tao(alphas, false, 11), 42).unwrap();
    let off = run(&scen, &Strategy64::always_offload(), 42).unwrap();
    assert_eq!(tao.decisions, off.decisions);
    assert_eq!(tao.total_cost(), off.total_cost());
}
