//! Linear time-invariant thermal models.
//!
//! A device's temperature is `ambient + (p * h)(t)` where `h` is the impulse
//! response in degC per joule. Responses are either tabulated samples or a
//! parametric sum of first-order stages `h(t) = sum_i (R_i/theta_i) e^{-t/theta_i}`.

pub mod closed_form;
pub mod csv;
pub(crate) mod fft;

use crate::error::{Error, Result};
use crate::scalar::{cast, to_f64, Scalar};
use crate::series::{grid_len, snap_pulse, TimeSeries};

/// Temperature trace in degC on the power-trace grid.
pub type TemperatureTrace<T> = TimeSeries<T>;

/// One first-order thermal stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage<T> {
    /// Steady-state thermal resistance, degC per watt.
    pub r_th_c_per_w: T,
    /// Time constant, seconds.
    pub theta_s: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ImpulseResponse<T> {
    Parametric {
        stages: Vec<Stage<T>>,
        /// Where the tabulated kernel is cut off. Must cover at least
        /// `5 * max(theta)` so the discarded tail stays below 1% of the peak.
        truncation_horizon_s: T,
    },
    /// Samples of `h` in degC/J on a uniform grid starting at t = 0.
    Tabulated { dt_s: T, samples: Vec<T> },
}

/// Largest tail sample allowed relative to the kernel peak.
const DECAY_TAIL_FRACTION: f64 = 0.01;

impl<T: Scalar> ImpulseResponse<T> {
    pub fn parametric(stages: Vec<Stage<T>>, truncation_horizon_s: T) -> Result<Self> {
        let resp = Self::Parametric {
            stages,
            truncation_horizon_s,
        };
        resp.validate()?;
        Ok(resp)
    }

    pub fn tabulated(dt_s: T, samples: Vec<T>) -> Result<Self> {
        let resp = Self::Tabulated { dt_s, samples };
        resp.validate()?;
        Ok(resp)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Parametric {
                stages,
                truncation_horizon_s,
            } => {
                if stages.is_empty() {
                    return Err(Error::InvalidParameter {
                        name: "stages",
                        reason: "parametric response needs at least one stage".into(),
                    });
                }
                for s in stages {
                    if !(s.r_th_c_per_w > T::zero()) || !s.r_th_c_per_w.is_finite() {
                        return Err(Error::InvalidParameter {
                            name: "r_th_c_per_w",
                            reason: format!("must be positive, got {}", s.r_th_c_per_w),
                        });
                    }
                    if !(s.theta_s > T::zero()) || !s.theta_s.is_finite() {
                        return Err(Error::InvalidParameter {
                            name: "theta_s",
                            reason: format!("must be positive, got {}", s.theta_s),
                        });
                    }
                }
                let need = self.max_theta_s() * cast::<T>(5.0);
                if *truncation_horizon_s < need {
                    return Err(Error::KernelTruncation(format!(
                        "truncation horizon {truncation_horizon_s} s is below 5*max(theta) = {need} s"
                    )));
                }
                Ok(())
            }
            Self::Tabulated { dt_s, samples } => {
                if !(*dt_s > T::zero()) || !dt_s.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "dt_s",
                        reason: format!("must be positive, got {dt_s}"),
                    });
                }
                if samples.len() < 2 {
                    return Err(Error::InvalidParameter {
                        name: "samples",
                        reason: "tabulated response needs at least two samples".into(),
                    });
                }
                let mut peak = T::zero();
                for &h in samples {
                    if !h.is_finite() || h < T::zero() {
                        return Err(Error::InvalidParameter {
                            name: "samples",
                            reason: format!("impulse response must be finite and non-negative, got {h}"),
                        });
                    }
                    peak = peak.max(h);
                }
                if peak == T::zero() {
                    return Err(Error::InvalidParameter {
                        name: "samples",
                        reason: "impulse response is identically zero".into(),
                    });
                }
                let last = *samples.last().expect("len checked");
                let bound = peak * cast::<T>(DECAY_TAIL_FRACTION);
                if last > bound * (T::one() + cast::<T>(1e-12)) {
                    return Err(Error::KernelTruncation(format!(
                        "last sample {last} exceeds 1% of the peak {peak}; extend the tabulation horizon"
                    )));
                }
                Ok(())
            }
        }
    }

    /// `sum R_i` for parametric responses, `dt * sum h` for tabulated ones.
    pub fn total_resistance_c_per_w(&self) -> T {
        match self {
            Self::Parametric { stages, .. } => {
                stages.iter().map(|s| s.r_th_c_per_w).sum()
            }
            Self::Tabulated { dt_s, samples } => {
                samples.iter().copied().sum::<T>() * *dt_s
            }
        }
    }

    pub fn max_theta_s(&self) -> T {
        match self {
            Self::Parametric { stages, .. } => stages
                .iter()
                .map(|s| s.theta_s)
                .fold(T::zero(), |a, b| a.max(b)),
            Self::Tabulated { dt_s, samples } => {
                *dt_s * cast::<T>((samples.len() - 1) as f64)
            }
        }
    }

    /// Evaluate a parametric response at time `t >= 0`.
    fn eval_parametric(stages: &[Stage<T>], t: T) -> T {
        stages
            .iter()
            .map(|s| s.r_th_c_per_w / s.theta_s * (-t / s.theta_s).exp())
            .sum()
    }
}

/// Sample an impulse response on a uniform grid with step `dt_s`.
///
/// Parametric responses are evaluated out to their truncation horizon;
/// tabulated responses are returned as-is when the step already matches and
/// linearly resampled otherwise. The result always satisfies the decay rule
/// (last sample at most 1% of the peak).
pub fn tabulate<T: Scalar>(resp: &ImpulseResponse<T>, dt_s: T) -> Result<ImpulseResponse<T>> {
    if !(dt_s > T::zero()) || !dt_s.is_finite() {
        return Err(Error::InvalidParameter {
            name: "dt_s",
            reason: format!("must be positive, got {dt_s}"),
        });
    }
    resp.validate()?;
    match resp {
        ImpulseResponse::Parametric {
            stages,
            truncation_horizon_s,
        } => {
            let len = grid_len(*truncation_horizon_s, dt_s);
            let samples = (0..len)
                .map(|k| ImpulseResponse::eval_parametric(stages, dt_s * cast::<T>(k as f64)))
                .collect();
            ImpulseResponse::tabulated(dt_s, samples)
        }
        ImpulseResponse::Tabulated { dt_s: dt0, samples } => {
            let rel = ((dt_s - *dt0) / *dt0).abs();
            if rel <= cast::<T>(1e-9) {
                return Ok(resp.clone());
            }
            let span = *dt0 * cast::<T>((samples.len() - 1) as f64);
            let len = grid_len(span, dt_s);
            let resampled = (0..len)
                .map(|k| {
                    let t = to_f64(dt_s) * k as f64 / to_f64(*dt0);
                    let i = (t.floor() as usize).min(samples.len() - 1);
                    let j = (i + 1).min(samples.len() - 1);
                    let frac = cast::<T>(t - i as f64);
                    samples[i] + (samples[j] - samples[i]) * frac
                })
                .collect();
            ImpulseResponse::tabulated(dt_s, resampled)
        }
    }
}

/// Discrete causal convolution of a power trace with an impulse response:
/// `tau[n] = ambient + dt * sum_k p[k] h[n-k]` (rectangle rule).
///
/// Tabulated responses must share the power trace's grid step; parametric
/// ones are tabulated on it.
pub fn convolve_temperature<T: Scalar>(
    power: &TimeSeries<T>,
    resp: &ImpulseResponse<T>,
    ambient_c: T,
) -> Result<TemperatureTrace<T>> {
    let kernel = match resp {
        ImpulseResponse::Tabulated { dt_s, .. } => {
            let rel = ((*dt_s - power.dt_s()) / power.dt_s()).abs();
            if rel > cast::<T>(1e-9) {
                return Err(Error::GridMismatch(format!(
                    "power trace dt {} s vs tabulated response dt {} s",
                    power.dt_s(),
                    dt_s
                )));
            }
            resp.clone()
        }
        ImpulseResponse::Parametric { .. } => tabulate(resp, power.dt_s())?,
    };
    let ImpulseResponse::Tabulated { samples, .. } = &kernel else {
        unreachable!("tabulate always yields a tabulated response");
    };
    let kernel_f64: Vec<f64> = samples.iter().map(|&h| to_f64(h)).collect();
    let signal: Vec<f64> = power.samples().iter().map(|&p| to_f64(p)).collect();
    let conv = fft::Convolver::new(&kernel_f64, signal.len());
    let rise = conv.convolve(&signal);
    let dt = to_f64(power.dt_s());
    let out = rise
        .into_iter()
        .map(|r| ambient_c + cast::<T>(dt * r))
        .collect();
    TimeSeries::new(power.t0_s(), power.dt_s(), out)
}

/// Reusable convolution engine: the impulse-response spectrum is computed
/// once for a fixed grid, then many power traces (Monte Carlo runs, ensemble
/// members) can be turned into temperature traces cheaply. `Send + Sync`, so
/// runs may fan out across threads sharing one engine.
pub struct TemperatureEngine<T> {
    dt_s: T,
    signal_len: usize,
    conv: fft::Convolver,
}

impl<T: Scalar> TemperatureEngine<T> {
    /// Plan an engine for power traces of exactly `signal_len` samples spaced
    /// `dt_s` apart.
    pub fn new(resp: &ImpulseResponse<T>, dt_s: T, signal_len: usize) -> Result<Self> {
        if signal_len == 0 {
            return Err(Error::InvalidParameter {
                name: "signal_len",
                reason: "temperature engine needs a non-empty grid".into(),
            });
        }
        let tab = tabulate(resp, dt_s)?;
        let ImpulseResponse::Tabulated { samples, .. } = &tab else {
            unreachable!("tabulate always yields a tabulated response");
        };
        let kernel: Vec<f64> = samples.iter().map(|&h| to_f64(h)).collect();
        Ok(Self {
            dt_s,
            signal_len,
            conv: fft::Convolver::new(&kernel, signal_len),
        })
    }

    pub fn dt_s(&self) -> T {
        self.dt_s
    }

    pub fn signal_len(&self) -> usize {
        self.signal_len
    }

    /// Temperature samples for raw `f64` power samples (fast path).
    pub fn temperature_raw(&self, power_w: &[f64], ambient_c: f64) -> Vec<f64> {
        assert_eq!(power_w.len(), self.signal_len, "power trace length mismatch");
        let dt = to_f64(self.dt_s);
        self.conv
            .convolve(power_w)
            .into_iter()
            .map(|r| ambient_c + dt * r)
            .collect()
    }

    /// Peak temperature for raw `f64` power samples without materializing the
    /// trace for the caller.
    pub fn max_temperature_raw(&self, power_w: &[f64], ambient_c: f64) -> f64 {
        self.temperature_raw(power_w, ambient_c)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Temperature trace for a power trace on the engine's grid.
    pub fn temperature(
        &self,
        power: &TimeSeries<T>,
        ambient_c: T,
    ) -> Result<TemperatureTrace<T>> {
        let rel = ((power.dt_s() - self.dt_s) / self.dt_s).abs();
        if rel > cast::<T>(1e-9) || power.len() != self.signal_len {
            return Err(Error::GridMismatch(format!(
                "power trace grid ({} samples at {} s) does not match the engine \
                 ({} samples at {} s)",
                power.len(),
                power.dt_s(),
                self.signal_len,
                self.dt_s
            )));
        }
        let raw: Vec<f64> = power.samples().iter().map(|&p| to_f64(p)).collect();
        let out = self
            .temperature_raw(&raw, to_f64(ambient_c))
            .into_iter()
            .map(cast::<T>)
            .collect();
        TimeSeries::new(power.t0_s(), power.dt_s(), out)
    }
}

/// Peak temperature rise caused by a single rectangular pulse of `amplitude_w`
/// lasting `duration_s`, simulated on a grid with step `dt_s`.
pub fn single_pulse_peak_rise<T: Scalar>(
    resp: &ImpulseResponse<T>,
    amplitude_w: T,
    duration_s: T,
    dt_s: T,
) -> Result<T> {
    let span = duration_s + tabulate(resp, dt_s)?.max_theta_s();
    let mut power = TimeSeries::zeros_over(T::zero(), dt_s, span)?;
    let len = power.len();
    let (i0, i1) = snap_pulse(T::zero(), duration_s, dt_s, len);
    for s in &mut power.samples_mut()[i0..=i1] {
        *s = amplitude_w;
    }
    let trace = convolve_temperature(&power, resp, T::zero())?;
    Ok(trace.max_sample().map(|(_, v)| v).unwrap_or(T::zero()))
}
