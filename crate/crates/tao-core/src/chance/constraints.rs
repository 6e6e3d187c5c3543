//! ω-confidence feasibility evaluators for power, battery and temperature.
//!
//! Every evaluator reports a probability-scale margin `P(safe) − ω`, so
//! margins from different constraints are directly comparable when picking
//! the binding one.

use rand::Rng;
use rayon::prelude::*;

use crate::chance::poisson::{poisson_cdf, poisson_pmf};
use crate::chance::{ConfidencePolicy, LoadMode, PoissonLoad};
use crate::error::Result;
use crate::model::{DeviceSpec, FEASIBILITY_SLACK};
use crate::rng::{poisson_arrivals, rng_for, tag};
use crate::scalar::{cast, to_f64, Scalar};
use crate::series::{grid_len, snap_pulse};
use crate::thermal::closed_form::pulse_peak_rise;
use crate::thermal::{single_pulse_peak_rise, ImpulseResponse, TemperatureEngine};

/// Outcome of one constraint evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintEval<T> {
    pub feasible: bool,
    /// `P(safe) − ω`; non-negative iff feasible.
    pub margin: T,
}

impl<T: Scalar> ConstraintEval<T> {
    fn from_probability(p_safe: T, omega: T) -> Self {
        let margin = p_safe - omega;
        Self {
            feasible: margin >= T::zero(),
            margin,
        }
    }

    /// Certainly unsafe: margin pinned at the bottom of the scale.
    fn never(omega: T) -> Self {
        Self::from_probability(T::zero(), omega)
    }
}

/// Largest integer `c` with `c * unit <= budget`, floored with a small relative
/// nudge so near-integer ratios do not round down spuriously.
fn capacity_count<T: Scalar>(budget: T, unit: T) -> i64 {
    if !(unit > T::zero()) {
        return i64::MAX;
    }
    let ratio = to_f64(budget / unit);
    (ratio + 1e-9).floor() as i64
}

fn cdf_margin<T: Scalar>(capacity: i64, mean: T, omega: T) -> ConstraintEval<T> {
    if capacity < 0 {
        return ConstraintEval::never(omega);
    }
    let p_safe = poisson_cdf(capacity as u64, mean.max(T::zero()))
        .expect("mean is non-negative by construction");
    ConstraintEval::from_probability(p_safe, omega)
}

/// P(instantaneous power ≤ TDP) ≥ ω.
///
/// The number of concurrently drawing requests is `N ~ Poisson(λαt)` in paper
/// mode (cumulative count; pass the worst-case `t`, normally the horizon) and
/// `N ~ Poisson(λαδ)` in busy-server mode (stationary occupancy; `t` is
/// ignored). Safe iff `N` does not exceed the number of request-sized power
/// slots left above the idle draw.
pub fn power_feasible<T: Scalar>(
    device: &DeviceSpec<T>,
    load: &PoissonLoad<T>,
    policy: &ConfidencePolicy<T>,
    t: T,
) -> ConstraintEval<T> {
    let headroom = device.tdp_watts - device.idle_power_watts;
    let capacity = capacity_count(headroom, device.request_power_watts);
    let mean = match policy.mode {
        LoadMode::Paper => load.mean_count(t),
        LoadMode::BusyServer => load.mean_occupancy(device.request_duration_s),
    };
    cdf_margin(capacity, mean, policy.omega)
}

/// P(battery lasts the horizon) ≥ ω.
///
/// Busy-server mode: each served request costs `π·δ`; with `N(T) ~ Poisson(λαT)`
/// served requests the battery survives iff `N(T)` stays within the number of
/// requests the initial charge can fund. Paper mode additionally requires the
/// expected battery level at the horizon, `b0 − πλαT²/2`, to stay positive
/// (there every request keeps drawing power once started).
pub fn battery_feasible<T: Scalar>(
    device: &DeviceSpec<T>,
    load: &PoissonLoad<T>,
    policy: &ConfidencePolicy<T>,
    horizon_s: T,
) -> ConstraintEval<T> {
    let idle_energy = device.idle_power_watts * horizon_s;
    let budget = device.battery_joules - idle_energy;
    let per_request = device.request_power_watts * device.request_duration_s;
    let capacity = capacity_count(budget, per_request);
    let mean = load.mean_count(horizon_s);
    match policy.mode {
        LoadMode::BusyServer => cdf_margin(capacity, mean, policy.omega),
        LoadMode::Paper => {
            let half = cast::<T>(0.5);
            let drain = device.request_power_watts * mean * horizon_s * half;
            if !(budget - drain > T::zero()) {
                return ConstraintEval::never(policy.omega);
            }
            cdf_margin(capacity, mean, policy.omega)
        }
    }
}

/// P(temperature stays at or below `temp_limit_c` over the horizon) ≥ ω.
///
/// Paper mode is analytic: one request contributes at most its single-pulse
/// peak rise `ΔT_one`, so the limit tolerates `K = ⌊(τmax − ambient)/ΔT_one⌋`
/// concurrent-equivalent requests and the check is `P(N ≤ K) ≥ ω` with the
/// cumulative count `N ~ Poisson(λαT)`. Busy-server mode is Monte Carlo:
/// `mc_runs` seeded request streams are thinned by α, played through the
/// convolution engine on the `mc_dt_s` grid, and the margin is the fraction
/// of runs whose peak temperature stays within the limit, minus ω. Thinning
/// uses one uniform per arrival from a dedicated stream, so a run feasible at
/// some α stays feasible at every smaller α (monotone in α run by run).
pub fn thermal_feasible<T: Scalar>(
    device: &DeviceSpec<T>,
    load: &PoissonLoad<T>,
    policy: &ConfidencePolicy<T>,
    temp_limit_c: T,
    horizon_s: T,
) -> Result<ConstraintEval<T>> {
    policy.validate()?;
    match policy.mode {
        LoadMode::Paper => {
            let dt_one = match &device.thermal {
                ImpulseResponse::Parametric { stages, .. } => pulse_peak_rise(
                    device.request_power_watts,
                    device.request_duration_s,
                    stages,
                ),
                tab @ ImpulseResponse::Tabulated { .. } => single_pulse_peak_rise(
                    tab,
                    device.request_power_watts,
                    device.request_duration_s,
                    policy.mc_dt_s,
                )?,
            };
            let headroom = temp_limit_c - device.ambient_temp_c;
            let tolerated = capacity_count(headroom, dt_one);
            Ok(cdf_margin(tolerated, load.mean_count(horizon_s), policy.omega))
        }
        LoadMode::BusyServer => {
            let dt = to_f64(policy.mc_dt_s);
            let horizon = to_f64(horizon_s);
            let len = grid_len(horizon, dt);
            let engine = TemperatureEngine::<T>::new(&device.thermal, policy.mc_dt_s, len)?;
            let idle = to_f64(device.idle_power_watts);
            let ambient = to_f64(device.ambient_temp_c);
            let limit = to_f64(temp_limit_c) + FEASIBILITY_SLACK;
            let rate = to_f64(load.rate_per_s);
            let alpha = to_f64(load.alpha);
            let pi = to_f64(device.request_power_watts);
            let delta = to_f64(device.request_duration_s);

            if rate == 0.0 || alpha == 0.0 {
                // no randomness left: the idle trace alone decides
                let power = vec![idle; len];
                let safe = engine.max_temperature_raw(&power, ambient) <= limit;
                let p = if safe { T::one() } else { T::zero() };
                return Ok(ConstraintEval::from_probability(p, policy.omega));
            }

            let safe_runs = (0..policy.mc_runs)
                .into_par_iter()
                .map(|run| {
                    let mut arrival_rng = rng_for(policy.mc_seed, run as u64, tag::MC_ARRIVALS);
                    let arrivals = poisson_arrivals(&mut arrival_rng, rate, horizon);
                    let mut thin_rng = rng_for(policy.mc_seed, run as u64, tag::MC_THINNING);
                    let mut power = vec![idle; len];
                    for t_arr in arrivals {
                        let u: f64 = thin_rng.gen();
                        if u < alpha {
                            let (s, e) = snap_pulse(t_arr, delta, dt, len);
                            for p in &mut power[s..=e] {
                                *p += pi;
                            }
                        }
                    }
                    engine.max_temperature_raw(&power, ambient) <= limit
                })
                .collect::<Vec<bool>>();
            let safe = safe_runs.iter().filter(|&&s| s).count();
            let p_safe = cast::<T>(safe as f64 / policy.mc_runs as f64);
            Ok(ConstraintEval::from_probability(p_safe, policy.omega))
        }
    }
}

/// P(N(t) ≥ N(horizon)) treating the two counts as independent Poisson
/// variables with means `λαt` and `λα·horizon`.
///
/// Exposed for fidelity testing only; the comparison of a process with its
/// own later value as if independent makes this quantity unsuitable as a
/// constraint, and the solver does not use it.
pub fn power_sufficiency<T: Scalar>(load: &PoissonLoad<T>, t: T, horizon_s: T) -> T {
    let mean_t = to_f64(load.mean_count(t)).max(0.0);
    let mean_h = to_f64(load.mean_count(horizon_s)).max(0.0);
    // truncate the outer sum once the remaining Poisson(mean_h) mass is dust
    let cap = (mean_h + 20.0 * mean_h.sqrt() + 20.0).ceil() as u64;
    let mut total = 0.0_f64;
    let mut cdf_t_below = 0.0_f64; // P(N(t) <= i - 1), running
    for i in 0..=cap {
        let p_h = to_f64(poisson_pmf::<f64>(i, mean_h).expect("non-negative mean"));
        total += p_h * (1.0 - cdf_t_below);
        cdf_t_below += to_f64(poisson_pmf::<f64>(i, mean_t).expect("non-negative mean"));
        if cdf_t_below > 1.0 {
            cdf_t_below = 1.0;
        }
    }
    cast(total.min(1.0))
}
