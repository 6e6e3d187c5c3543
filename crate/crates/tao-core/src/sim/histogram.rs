//! Empirical temperature distributions from simulated traces.

use crate::error::{Error, Result};
use crate::model::{DeviceId, FEASIBILITY_SLACK};
use crate::scalar::{cast, to_f64, Scalar};
use crate::series::TimeSeries;
use crate::sim::RunResult;

/// Normalized histogram of a temperature trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram<T> {
    /// `n_bins + 1` ascending bin edges, degC. The range spans ambient to
    /// the hottest observed sample (widened to 1 degC when the trace never
    /// leaves ambient, so the edges stay distinct).
    pub edges: Vec<T>,
    /// Per-bin sample mass; sums to 1.
    pub mass: Vec<T>,
    /// Fraction of samples above the limit; matches the simulator's
    /// per-sample violation fraction exactly.
    pub exceedance: T,
    pub limit_c: T,
}

/// Bin a temperature trace over `[ambient, max observed]`.
pub fn histogram_from_trace<T: Scalar>(
    trace: &TimeSeries<T>,
    ambient_c: T,
    limit_c: T,
    n_bins: usize,
) -> Result<Histogram<T>> {
    let observed_max = trace
        .samples()
        .iter()
        .fold(T::neg_infinity(), |a, &b| a.max(b));
    histogram_with_range(trace.samples(), ambient_c, observed_max, limit_c, n_bins)
}

/// Bin raw temperature samples over an explicit `[lo, hi]` range (so several
/// traces can share one set of edges). Samples outside the range clamp into
/// the edge bins; a range that never widens beyond `lo` is extended by 1 degC
/// to keep the edges distinct.
pub fn histogram_with_range<T: Scalar>(
    samples: &[T],
    lo: T,
    hi: T,
    limit_c: T,
    n_bins: usize,
) -> Result<Histogram<T>> {
    if n_bins == 0 {
        return Err(Error::InvalidParameter {
            name: "n_bins",
            reason: "a histogram needs at least one bin".into(),
        });
    }
    if samples.is_empty() {
        return Err(Error::InvalidParameter {
            name: "trace",
            reason: "cannot bin an empty temperature trace".into(),
        });
    }
    let hi = if hi > lo { hi } else { lo + T::one() };
    let span = hi - lo;
    let bins_f = cast::<T>(n_bins as f64);
    let edges = (0..=n_bins)
        .map(|i| lo + span * cast::<T>(i as f64) / bins_f)
        .collect();

    let mut counts = vec![0usize; n_bins];
    let slack = cast::<T>(FEASIBILITY_SLACK);
    let mut over = 0usize;
    for &t in samples {
        let raw = to_f64((t - lo) / span) * n_bins as f64;
        let idx = (raw.floor() as isize).clamp(0, n_bins as isize - 1) as usize;
        counts[idx] += 1;
        if t > limit_c + slack {
            over += 1;
        }
    }
    let total = samples.len() as f64;
    Ok(Histogram {
        edges,
        mass: counts.iter().map(|&c| cast::<T>(c as f64 / total)).collect(),
        exceedance: cast::<T>(over as f64 / total),
        limit_c,
    })
}

/// Histogram of one device's temperature trace from a finished run, binned
/// over `[ambient, max observed]` against the run's temperature limit.
pub fn empirical_temperature_distribution<T: Scalar>(
    result: &RunResult<T>,
    device: &DeviceId,
    n_bins: usize,
) -> Result<Histogram<T>> {
    let dev = result.device(device)?;
    histogram_from_trace(
        &dev.traces.temperature,
        dev.ambient_temp_c,
        result.temp_limit_c,
        n_bins,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(samples: Vec<f64>) -> TimeSeries<f64> {
        TimeSeries::new(0.0, 1.0, samples).unwrap()
    }

    #[test]
    fn constant_ambient_trace_occupies_a_single_bin() {
        let h = histogram_from_trace(&trace(vec![25.0; 200]), 25.0, 43.0, 16).unwrap();
        assert_eq!(h.mass[0], 1.0);
        assert!(h.mass[1..].iter().all(|&m| m == 0.0));
        assert_eq!(h.exceedance, 0.0);
        assert_eq!(h.edges.len(), 17);
        assert!(h.edges.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn exceedance_matches_a_constructed_five_percent_trace() {
        // 950 cool samples, 50 hot ones: exceedance exactly 0.05
        let mut samples = vec![30.0; 950];
        samples.extend(vec![44.0; 50]);
        let h = histogram_from_trace(&trace(samples), 25.0, 43.0, 10).unwrap();
        assert!((h.exceedance - 0.05).abs() < 1e-12);
        // the hot samples land in the top bin: range 25..44, bin 9 covers
        // 42.1..44
        assert!((h.mass[9] - 0.05).abs() < 1e-12);
    }

    #[test]
    fn mass_sums_to_one() {
        let samples: Vec<f64> = (0..1000).map(|i| 25.0 + 18.0 * (i as f64 / 999.0)).collect();
        let h = histogram_from_trace(&trace(samples), 25.0, 43.0, 7).unwrap();
        let total: f64 = h.mass.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn limit_exactly_at_a_sample_does_not_count_as_exceedance() {
        let h = histogram_from_trace(&trace(vec![43.0; 10]), 25.0, 43.0, 4).unwrap();
        assert_eq!(h.exceedance, 0.0);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(histogram_from_trace(&trace(vec![25.0]), 25.0, 43.0, 0).is_err());
        assert!(histogram_with_range::<f64>(&[], 25.0, 43.0, 43.0, 4).is_err());
    }

    #[test]
    fn explicit_range_gives_shared_edges_and_clamps_outliers() {
        let a = histogram_with_range(&[26.0, 27.0], 25.0, 45.0, 43.0, 10).unwrap();
        let b = histogram_with_range(&[44.0, 50.0], 25.0, 45.0, 43.0, 10).unwrap();
        assert_eq!(a.edges, b.edges);
        // 50.0 exceeds the range and lands in the top bin
        assert_eq!(b.mass[9], 1.0);
        assert_eq!(b.exceedance, 1.0);
    }
}
