//! Battery evolution from a power trace.

use crate::error::Result;
use crate::scalar::Scalar;
use crate::series::TimeSeries;

/// Battery level over time: `b(t) = initial - integral of p` with trapezoidal
/// integration on the trace grid. `b[0] = initial` exactly.
///
/// Trapezoids are exact for constant power; a rectangular pulse whose closed
/// interval is sampled on the grid picks up one extra `dt * pi / 2` per edge,
/// which stays below any stated tolerance for dt well under the pulse length.
pub fn integrate_battery<T: Scalar>(
    power: &TimeSeries<T>,
    initial_joules: T,
) -> Result<TimeSeries<T>> {
    let drained = power.trapezoid_prefix();
    let samples = drained.into_iter().map(|d| initial_joules - d).collect();
    TimeSeries::new(power.t0_s(), power.dt_s(), samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::snap_pulse;

    #[test]
    fn zero_power_keeps_the_battery_constant() {
        let p = TimeSeries::zeros_over(0.0, 1.0, 100.0).unwrap();
        let b = integrate_battery(&p, 500.0).unwrap();
        assert!(b.samples().iter().all(|&v| v == 500.0));
    }

    #[test]
    fn constant_power_drains_linearly() {
        let p = TimeSeries::new(0.0, 1.0, vec![2.0; 3601]).unwrap();
        let b = integrate_battery(&p, 10_000.0).unwrap();
        assert_eq!(b.samples()[0], 10_000.0);
        assert_eq!(*b.samples().last().unwrap(), 2_800.0);
    }

    #[test]
    fn single_pulse_drains_its_energy() {
        // 35 s pulse at 2 W from 100 J leaves 30 J; the closed-interval edge
        // contributes at most pi*dt, so assert with a dt-scaled tolerance.
        let dt = 0.01_f64;
        let mut p = TimeSeries::zeros_over(0.0, dt, 100.0).unwrap();
        let len = p.len();
        let (i0, i1) = snap_pulse(0.0, 35.0, dt, len);
        for s in &mut p.samples_mut()[i0..=i1] {
            *s = 2.0;
        }
        let b = integrate_battery(&p, 100.0).unwrap();
        let final_b = *b.samples().last().unwrap();
        assert!((final_b - 30.0).abs() <= 2.0 * dt + 1e-9, "{final_b}");
        // monotone non-increasing for non-negative power
        assert!(b.samples().windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }
}
