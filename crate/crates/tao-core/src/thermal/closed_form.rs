//! Closed-form response of a first-order stage to a rectangular power pulse.

use crate::scalar::Scalar;
use crate::thermal::Stage;

/// Temperature rise at time `t` caused by a rectangular pulse of amplitude
/// `a_watts` on `[0, t_pulse_s]` driving one first-order stage:
///
/// `tau(t) = A*R * [(1 - e^{-t/theta}) - (1 - e^{-(t - Tp)/theta}) * 1{t > Tp}]`
///
/// Zero for `t <= 0`; decays to zero as `t -> inf`.
pub fn pulse_response_closed_form<T: Scalar>(
    a_watts: T,
    t_pulse_s: T,
    stage: &Stage<T>,
    t_s: T,
) -> T {
    if t_s <= T::zero() {
        return T::zero();
    }
    let b = a_watts * stage.r_th_c_per_w;
    let charge = T::one() - (-t_s / stage.theta_s).exp();
    if t_s > t_pulse_s {
        let discharge = T::one() - (-(t_s - t_pulse_s) / stage.theta_s).exp();
        b * (charge - discharge)
    } else {
        b * charge
    }
}

/// Peak rise of a rectangular pulse through a sum of first-order stages; the
/// rise is monotone during the pulse, so the peak sits at the pulse end.
pub fn pulse_peak_rise<T: Scalar>(a_watts: T, t_pulse_s: T, stages: &[Stage<T>]) -> T {
    stages
        .iter()
        .map(|s| a_watts * s.r_th_c_per_w * (T::one() - (-t_pulse_s / s.theta_s).exp()))
        .sum()
}
