//! Uniformly sampled time series.

use crate::error::{Error, Result};
use crate::scalar::{cast, to_f64, Scalar};

/// A uniformly sampled series over `[t0, t0 + (len-1)*dt]`.
///
/// A series spanning `[0, horizon]` holds `floor(horizon/dt) + 1` samples so
/// that both endpoints sit on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    t0_s: T,
    dt_s: T,
    samples: Vec<T>,
}

/// Number of grid samples covering `[0, span]` at step `dt`: `floor(span/dt) + 1`.
///
/// The ratio is rounded when it is within `1e-6` of an integer so that spans
/// like `3600.0 / 0.1` do not lose their last sample to floating-point noise.
pub fn grid_len<T: Scalar>(span_s: T, dt_s: T) -> usize {
    let raw = to_f64(span_s) / to_f64(dt_s);
    let n = if (raw - raw.round()).abs() < 1e-6 {
        raw.round()
    } else {
        raw.floor()
    };
    n as usize + 1
}

impl<T: Scalar> TimeSeries<T> {
    pub fn new(t0_s: T, dt_s: T, samples: Vec<T>) -> Result<Self> {
        if !(dt_s > T::zero()) || !dt_s.is_finite() {
            return Err(Error::InvalidParameter {
                name: "dt_s",
                reason: format!("must be finite and positive, got {dt_s}"),
            });
        }
        if samples.is_empty() {
            return Err(Error::InvalidParameter {
                name: "samples",
                reason: "series must hold at least one sample".into(),
            });
        }
        Ok(Self { t0_s, dt_s, samples })
    }

    /// All-zero series covering `[t0, t0 + span]`.
    pub fn zeros_over(t0_s: T, dt_s: T, span_s: T) -> Result<Self> {
        if !(span_s >= T::zero()) {
            return Err(Error::InvalidParameter {
                name: "span_s",
                reason: format!("must be non-negative, got {span_s}"),
            });
        }
        let len = grid_len(span_s, dt_s);
        Self::new(t0_s, dt_s, vec![T::zero(); len])
    }

    pub fn t0_s(&self) -> T {
        self.t0_s
    }

    pub fn dt_s(&self) -> T {
        self.dt_s
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [T] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn time_at(&self, idx: usize) -> T {
        self.t0_s + self.dt_s * cast::<T>(idx as f64)
    }

    /// Index of the grid point nearest to `t`, clamped to the series.
    pub fn index_nearest(&self, t: T) -> usize {
        let raw = to_f64((t - self.t0_s) / self.dt_s).round();
        let clamped = raw.clamp(0.0, (self.samples.len() - 1) as f64);
        clamped as usize
    }

    pub fn iter_points(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.samples
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.time_at(i), v))
    }

    /// Maximum sample with its index, or `None` for an all-NaN series.
    pub fn max_sample(&self) -> Option<(usize, T)> {
        let mut best: Option<(usize, T)> = None;
        for (i, &v) in self.samples.iter().enumerate() {
            match best {
                Some((_, b)) if !(v > b) => {}
                _ if v.is_nan() => {}
                _ => best = Some((i, v)),
            }
        }
        best
    }

    /// Running trapezoidal integral; entry `n` integrates over `[t0, t_n]`.
    pub fn trapezoid_prefix(&self) -> Vec<T> {
        let half = cast::<T>(0.5);
        let mut out = Vec::with_capacity(self.samples.len());
        let mut acc = T::zero();
        out.push(acc);
        for w in self.samples.windows(2) {
            acc += (w[0] + w[1]) * half * self.dt_s;
            out.push(acc);
        }
        out
    }

    /// Keep every `every`-th sample (starting at index 0).
    pub fn downsample(&self, every: usize) -> TimeSeries<T> {
        let every = every.max(1);
        TimeSeries {
            t0_s: self.t0_s,
            dt_s: self.dt_s * cast::<T>(every as f64),
            samples: self.samples.iter().copied().step_by(every).collect(),
        }
    }
}

/// Snap a pulse `[arrival, arrival + duration]` to nearest-grid indices on a
/// series of `len` samples starting at t = 0. Returns inclusive `(start, end)`.
pub fn snap_pulse<T: Scalar>(arrival_s: T, duration_s: T, dt_s: T, len: usize) -> (usize, usize) {
    let last = len - 1;
    let dt = to_f64(dt_s);
    let i0 = (to_f64(arrival_s) / dt).round().clamp(0.0, last as f64) as usize;
    let i1 = (to_f64(arrival_s + duration_s) / dt)
        .round()
        .clamp(0.0, last as f64) as usize;
    (i0, i1.max(i0))
}
