//! One simulation run: materialize requests, decide local/offload per the
//! strategy, build traces and summarize them.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{
    device_power_trace, integrate_battery, oracle_optimize, DecisionVector, DeviceId, DeviceSpec,
    Request, Scenario, FEASIBILITY_SLACK,
};
use crate::rng::{rng_for, tag};
use crate::scalar::{cast, to_f64, Scalar};
use crate::series::{grid_len, snap_pulse, TimeSeries};
use crate::sim::{
    generate_requests, DeviceMetrics, DeviceRun, DeviceTraces, RunResult, Strategy, StrategyKind,
};
use crate::thermal::TemperatureEngine;

/// Reusable per-scenario simulation state: one planned FFT engine per device.
///
/// Planning the engines costs a kernel FFT each, so an ensemble builds one
/// context and shares it across every run (the context is `Send + Sync`).
pub struct SimContext<T> {
    dt_s: T,
    signal_len: usize,
    engines: BTreeMap<DeviceId, TemperatureEngine<T>>,
}

impl<T: Scalar> SimContext<T> {
    pub fn new(scenario: &Scenario<T>) -> Result<Self> {
        scenario.validate()?;
        let signal_len = grid_len(scenario.horizon_s, scenario.dt_s);
        let mut engines = BTreeMap::new();
        for dev in &scenario.devices {
            engines.insert(
                dev.id.clone(),
                TemperatureEngine::new(&dev.thermal, scenario.dt_s, signal_len)?,
            );
        }
        Ok(Self {
            dt_s: scenario.dt_s,
            signal_len,
            engines,
        })
    }

    pub fn signal_len(&self) -> usize {
        self.signal_len
    }

    fn engine(&self, id: &DeviceId) -> Result<&TemperatureEngine<T>> {
        self.engines
            .get(id)
            .ok_or_else(|| Error::UnknownDevice(id.to_string()))
    }

    fn check_matches(&self, scenario: &Scenario<T>) -> Result<()> {
        let len = grid_len(scenario.horizon_s, scenario.dt_s);
        let rel = to_f64(((scenario.dt_s - self.dt_s) / self.dt_s).abs());
        if len != self.signal_len || rel > 1e-9 {
            return Err(Error::GridMismatch(format!(
                "scenario grid ({} samples at {} s) does not match the context \
                 ({} samples at {} s)",
                len, scenario.dt_s, self.signal_len, self.dt_s
            )));
        }
        Ok(())
    }
}

/// Simulate one run of `scenario` under `strategy`.
///
/// `seed` drives request generation (for Poisson sources) and the stochastic
/// policy's coin flips; the same seed reproduces the run bit for bit.
pub fn run<T: Scalar>(
    scenario: &Scenario<T>,
    strategy: &Strategy<T>,
    seed: u64,
) -> Result<RunResult<T>> {
    let ctx = SimContext::new(scenario)?;
    run_with_context(&ctx, scenario, strategy, seed)
}

/// [`run`] against a prebuilt [`SimContext`] (for ensembles).
pub fn run_with_context<T: Scalar>(
    ctx: &SimContext<T>,
    scenario: &Scenario<T>,
    strategy: &Strategy<T>,
    seed: u64,
) -> Result<RunResult<T>> {
    strategy.validate()?;
    ctx.check_matches(scenario)?;
    let requests = generate_requests(scenario, seed)?;
    let decisions = decide(scenario, strategy, &requests, seed, ctx.signal_len)?;
    decisions.validate_cover(&requests)?;

    let slack = cast::<T>(FEASIBILITY_SLACK);
    let mut per_device = Vec::with_capacity(scenario.devices.len());
    for dev in &scenario.devices {
        let power =
            device_power_trace(dev, &requests, &decisions, scenario.horizon_s, scenario.dt_s)?;
        let battery = integrate_battery(&power, dev.battery_joules)?;
        let temperature = ctx.engine(&dev.id)?.temperature(&power, dev.ambient_temp_c)?;

        let mut cost = TimeSeries::zeros_over(T::zero(), scenario.dt_s, scenario.horizon_s)?;
        let mut n_local = 0usize;
        let mut n_offloaded = 0usize;
        {
            let samples = cost.samples_mut();
            for r in &requests {
                if r.device != dev.id {
                    continue;
                }
                if decisions.get(&r.id) == Some(true) {
                    n_local += 1;
                } else {
                    n_offloaded += 1;
                    let (i0, _) = snap_pulse(r.arrival_s, r.duration_s, scenario.dt_s, samples.len());
                    samples[i0] += scenario.offload_unit_cost;
                }
            }
            for i in 1..samples.len() {
                let prev = samples[i - 1];
                samples[i] += prev;
            }
        }

        let max_power_w = power.max_sample().map(|(_, v)| v).unwrap_or_else(T::zero);
        let max_temp_c = temperature
            .max_sample()
            .map(|(_, v)| v)
            .unwrap_or(dev.ambient_temp_c);
        let over = temperature
            .samples()
            .iter()
            .filter(|&&t| t > scenario.temp_limit_c + slack)
            .count();
        let temp_violation_fraction = cast::<T>(over as f64 / temperature.len() as f64);
        let final_battery_j = *battery.samples().last().expect("non-empty grid");
        let metrics = DeviceMetrics {
            max_power_w,
            max_temp_c,
            temp_violation_fraction,
            final_battery_j,
            n_local,
            n_offloaded,
            total_cost: scenario.offload_unit_cost * cast::<T>(n_offloaded as f64),
            violated_power: max_power_w > dev.tdp_watts + slack,
            violated_battery: final_battery_j < -slack,
            violated_temperature: over > 0,
        };
        per_device.push(DeviceRun {
            device: dev.id.clone(),
            ambient_temp_c: dev.ambient_temp_c,
            traces: DeviceTraces {
                power,
                temperature,
                battery,
                cumulative_cost: cost,
            },
            metrics,
        });
    }

    Ok(RunResult {
        requests,
        decisions,
        per_device,
        temp_limit_c: scenario.temp_limit_c,
    })
}

fn decide<T: Scalar>(
    scenario: &Scenario<T>,
    strategy: &Strategy<T>,
    requests: &[Request<T>],
    seed: u64,
    len: usize,
) -> Result<DecisionVector> {
    match &strategy.kind {
        StrategyKind::AlwaysLocal => Ok(DecisionVector::all_local(requests)),
        StrategyKind::AlwaysOffload => Ok(DecisionVector::all_offload(requests)),
        StrategyKind::Oracle => {
            Ok(oracle_optimize(&scenario.with_requests(requests.to_vec()))?.decisions)
        }
        StrategyKind::Tao { alpha, guard } => {
            // One coin per arrival, drawn in global arrival order and
            // regardless of the guard, so guarded and unguarded runs under
            // the same seed see identical draws.
            let mut coins = rng_for(seed, strategy.rng_seed, tag::POLICY_COIN);
            let mut admission = Admission::new(scenario, len);
            let mut decisions = DecisionVector::new();
            for r in requests {
                let a = alpha.get(&r.device).copied().ok_or_else(|| {
                    Error::InvalidParameter {
                        name: "alpha",
                        reason: format!("no local-serve probability for device `{}`", r.device),
                    }
                })?;
                let u: f64 = coins.gen();
                let mut local = u < to_f64(a);
                if local && *guard && !admission.power_fits(r)? {
                    local = false;
                }
                if local {
                    admission.commit(r)?;
                }
                decisions.set(r.id.clone(), local);
            }
            Ok(decisions)
        }
        StrategyKind::Sota => {
            let mut admission = Admission::new(scenario, len);
            let mut decisions = DecisionVector::new();
            for r in requests {
                let local = admission.power_fits(r)? && admission.battery_fits(r)?;
                if local {
                    admission.commit(r)?;
                }
                decisions.set(r.id.clone(), local);
            }
            Ok(decisions)
        }
    }
}

/// Committed local load per device, for online admission checks.
struct Admission<'a, T> {
    dt_s: T,
    len: usize,
    slack: T,
    devices: &'a [DeviceSpec<T>],
    index: BTreeMap<DeviceId, usize>,
    /// Request-power sums per sample (idle excluded).
    active: Vec<Vec<T>>,
    /// Snapped trapezoid energy of committed requests, joules.
    committed_j: Vec<T>,
    /// Idle draw integrated over the whole horizon, joules.
    idle_j: Vec<T>,
}

impl<'a, T: Scalar> Admission<'a, T> {
    fn new(scenario: &'a Scenario<T>, len: usize) -> Self {
        let index = scenario
            .devices
            .iter()
            .enumerate()
            .map(|(i, d)| (d.id.clone(), i))
            .collect();
        let idle_j = scenario
            .devices
            .iter()
            .map(|d| d.idle_power_watts * scenario.dt_s * cast::<T>((len - 1) as f64))
            .collect();
        Self {
            dt_s: scenario.dt_s,
            len,
            slack: cast::<T>(FEASIBILITY_SLACK),
            devices: &scenario.devices,
            index,
            active: vec![vec![T::zero(); len]; scenario.devices.len()],
            committed_j: vec![T::zero(); scenario.devices.len()],
            idle_j,
        }
    }

    fn device_index(&self, id: &DeviceId) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownDevice(id.to_string()))
    }

    /// Would serving `r` keep instantaneous power within the device's TDP?
    fn power_fits(&self, r: &Request<T>) -> Result<bool> {
        let di = self.device_index(&r.device)?;
        let dev = &self.devices[di];
        let (s, e) = snap_pulse(r.arrival_s, r.duration_s, self.dt_s, self.len);
        let peak = self.active[di][s..=e]
            .iter()
            .fold(T::zero(), |a, &b| a.max(b));
        Ok(dev.idle_power_watts + peak + r.power_watts <= dev.tdp_watts + self.slack)
    }

    /// Would serving `r` keep the projected battery non-negative at the
    /// horizon? Uses the same snapped trapezoid energy as the integrator.
    fn battery_fits(&self, r: &Request<T>) -> Result<bool> {
        let di = self.device_index(&r.device)?;
        let dev = &self.devices[di];
        let (s, e) = snap_pulse(r.arrival_s, r.duration_s, self.dt_s, self.len);
        let energy = snapped_energy(r.power_watts, s, e, self.len, self.dt_s);
        let projected = dev.battery_joules - self.idle_j[di] - self.committed_j[di] - energy;
        Ok(projected >= -self.slack)
    }

    fn commit(&mut self, r: &Request<T>) -> Result<()> {
        let di = self.device_index(&r.device)?;
        let (s, e) = snap_pulse(r.arrival_s, r.duration_s, self.dt_s, self.len);
        for v in &mut self.active[di][s..=e] {
            *v += r.power_watts;
        }
        self.committed_j[di] += snapped_energy(r.power_watts, s, e, self.len, self.dt_s);
        Ok(())
    }
}

/// Trapezoid energy of a snapped closed-interval pulse; agrees exactly with
/// [`integrate_battery`] over the resulting trace.
fn snapped_energy<T: Scalar>(power: T, start: usize, end: usize, len: usize, dt_s: T) -> T {
    let half = cast::<T>(0.5);
    let mut intervals = cast::<T>((end - start) as f64);
    if start > 0 {
        intervals += half;
    }
    if end < len - 1 {
        intervals += half;
    }
    power * dt_s * intervals
}
