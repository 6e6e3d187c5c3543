//! Poisson probability kernels.
//!
//! The PMF is evaluated in log space through a Lanczos log-gamma so that
//! large means (well above 700) neither overflow nor underflow; the CDF sums
//! the log-space terms and the quantile is the exact left-continuous inverse
//! (smallest `k` with `cdf(k) >= omega`).

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};

// Lanczos approximation, g = 7, 9 coefficients, kept digit-for-digit as
// published even where that exceeds f64 precision.
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural logarithm of the gamma function for `x > 0`.
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    debug_assert!(x > T::zero());
    let half = cast::<T>(0.5);
    let one = T::one();
    if x < half {
        // reflection: ln Γ(x) = ln(π / sin(πx)) − ln Γ(1 − x)
        let pi = cast::<T>(std::f64::consts::PI);
        return (pi / (pi * x).sin()).ln() - ln_gamma(one - x);
    }
    let x = x - one;
    let mut acc = cast::<T>(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += cast::<T>(c) / (x + cast::<T>(i as f64));
    }
    let t = x + cast::<T>(LANCZOS_G) + half;
    let sqrt_two_pi = cast::<T>((2.0 * std::f64::consts::PI).sqrt());
    sqrt_two_pi.ln() + (x + half) * t.ln() - t + acc.ln()
}

fn check_mean<T: Scalar>(mean: T) -> Result<()> {
    if !(mean >= T::zero()) || !mean.is_finite() {
        return Err(Error::InvalidParameter {
            name: "mean",
            reason: format!("Poisson mean must be finite and non-negative, got {mean}"),
        });
    }
    Ok(())
}

/// `P(N = k)` for `N ~ Poisson(mean)`.
pub fn poisson_pmf<T: Scalar>(k: u64, mean: T) -> Result<T> {
    check_mean(mean)?;
    if mean == T::zero() {
        return Ok(if k == 0 { T::one() } else { T::zero() });
    }
    let kf = cast::<T>(k as f64);
    let ln_p = kf * mean.ln() - mean - ln_gamma(kf + T::one());
    Ok(ln_p.exp())
}

/// `P(N <= k)` for `N ~ Poisson(mean)`, clamped to `[0, 1]`.
pub fn poisson_cdf<T: Scalar>(k: u64, mean: T) -> Result<T> {
    check_mean(mean)?;
    if mean == T::zero() {
        return Ok(T::one());
    }
    let mut acc = T::zero();
    for i in 0..=k {
        acc += poisson_pmf(i, mean)?;
    }
    Ok(acc.min(T::one()))
}

/// Smallest `k` with `cdf(k, mean) >= omega` for `omega` in `(0, 1)`.
///
/// Adjoint to [`poisson_cdf`]: `cdf(q) >= omega` and, for `q > 0`,
/// `cdf(q - 1) < omega`.
pub fn poisson_quantile<T: Scalar>(omega: T, mean: T) -> Result<u64> {
    check_mean(mean)?;
    if !(omega > T::zero() && omega < T::one()) {
        return Err(Error::InvalidParameter {
            name: "omega",
            reason: format!("confidence must lie in (0, 1), got {omega}"),
        });
    }
    if mean == T::zero() {
        return Ok(0);
    }
    // Accumulate log-space terms upward. Beyond mean + 20*sqrt(mean) + 200 the
    // missed tail is far below any omega < 1 we accept.
    let m = crate::scalar::to_f64(mean);
    let cap = (m + 20.0 * m.sqrt() + 200.0).ceil() as u64;
    let mut acc = T::zero();
    for k in 0..=cap {
        acc += poisson_pmf(k, mean)?;
        if acc >= omega {
            return Ok(k);
        }
    }
    Ok(cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Direct-summation oracle: multiplicative recurrence from e^{-m}.
    /// Independent of the log-space route used by the implementation.
    fn oracle_pmf_table(mean: f64, k_max: u64) -> Vec<f64> {
        let mut t = (-mean).exp();
        let mut out = vec![t];
        for k in 1..=k_max {
            t *= mean / k as f64;
            out.push(t);
        }
        out
    }

    fn oracle_cdf(k: u64, mean: f64) -> f64 {
        oracle_pmf_table(mean, k).iter().sum::<f64>().min(1.0)
    }

    #[test]
    fn pmf_matches_hand_values() {
        assert_relative_eq!(poisson_pmf(0, 1.0).unwrap(), (-1.0f64).exp(), epsilon = 1e-12);
        assert_relative_eq!(poisson_pmf(2, 1.0).unwrap(), 0.183_939_720_585_721_3, epsilon = 1e-12);
        assert_eq!(poisson_pmf(0, 0.0).unwrap(), 1.0);
        assert_eq!(poisson_pmf(3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn pmf_survives_large_mean() {
        // naive k! or m^k would overflow here; the log-space route must not
        let p = poisson_pmf(1000, 1000.0f64).unwrap();
        assert!(p > 0.0 && p < 1.0);
        assert_relative_eq!(p, 0.012_614_611_348_721_99, max_relative = 1e-9);
    }

    #[test]
    fn cdf_matches_hand_values() {
        assert_relative_eq!(poisson_cdf(2, 1.0).unwrap(), 0.919_698_602_928_606, epsilon = 1e-12);
        assert_eq!(poisson_cdf(5, 0.0).unwrap(), 1.0);
        assert!(poisson_cdf(200, 3.0).unwrap() <= 1.0);
    }

    #[test]
    fn cdf_matches_direct_summation_oracle() {
        for &(k, m) in &[(0u64, 0.5f64), (3, 2.0), (17, 20.0), (117, 100.0), (199, 50.0)] {
            let got = poisson_cdf(k, m).unwrap();
            assert!((got - oracle_cdf(k, m)).abs() < 1e-12, "k={k} m={m}");
        }
    }

    #[test]
    fn quantile_hand_values() {
        assert_eq!(poisson_quantile(0.95, 3.0).unwrap(), 6);
        assert_eq!(poisson_quantile(0.5, 10.0).unwrap(), 10);
        assert_eq!(poisson_quantile(0.95, 100.0).unwrap(), 117);
        assert_eq!(poisson_quantile(0.99, 0.0).unwrap(), 0);
    }

    #[test]
    fn quantile_is_adjoint_to_cdf() {
        for &m in &[0.3, 1.0, 4.2, 17.0, 50.0] {
            for &w in &[0.01, 0.5, 0.9, 0.95, 0.999] {
                let q = poisson_quantile(w, m).unwrap();
                assert!(poisson_cdf(q, m).unwrap() >= w);
                if q > 0 {
                    assert!(poisson_cdf(q - 1, m).unwrap() < w);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(poisson_pmf(0, -1.0).is_err());
        assert!(poisson_cdf(0, f64::NAN).is_err());
        assert!(poisson_quantile(0.0, 1.0).is_err());
        assert!(poisson_quantile(1.0, 1.0).is_err());
    }

    #[test]
    fn kernels_work_in_f32() {
        let p = poisson_pmf(2u64, 1.0f32).unwrap();
        assert!((p - 0.183_94_f32).abs() < 1e-4);
        assert_eq!(poisson_quantile(0.95f32, 3.0f32).unwrap(), 6);
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        let mut ln_fact = 0.0f64;
        for k in 1..25u64 {
            ln_fact += (k as f64).ln();
            assert_relative_eq!(ln_gamma(k as f64 + 1.0), ln_fact, max_relative = 1e-13);
        }
    }
}
