//! Bisection solver for the largest safe local-serve probability α.
//!
//! All three feasibility evaluators are monotone in α (more local serving is
//! never safer), so the feasible set is an interval `[0, α*]` and bisection
//! recovers α* to an absolute tolerance.

use crate::chance::{
    battery_feasible, power_feasible, thermal_feasible, AlphaSolution, Binding, ConfidencePolicy,
    ConstraintMargins, PoissonLoad,
};
use crate::error::{Error, Result};
use crate::model::DeviceSpec;
use crate::scalar::{cast, Scalar};

/// Absolute tolerance on the solved α.
pub const ALPHA_TOLERANCE: f64 = 1e-6;

/// Which constraints participate in the solve. Disabling one is useful for
/// attribution experiments ("how much does the thermal limit cost?").
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstraintSet {
    pub power: bool,
    pub battery: bool,
    pub temperature: bool,
}

impl Default for ConstraintSet {
    fn default() -> Self {
        Self {
            power: true,
            battery: true,
            temperature: true,
        }
    }
}

/// Margins of the enabled constraints at a given α; disabled constraints
/// report the maximal margin `1 − ω` so they can never look binding.
pub fn constraint_margins<T: Scalar>(
    device: &DeviceSpec<T>,
    rate_per_s: T,
    alpha: T,
    policy: &ConfidencePolicy<T>,
    horizon_s: T,
    temp_limit_c: T,
    constraints: &ConstraintSet,
) -> Result<ConstraintMargins<T>> {
    let load = PoissonLoad::new(rate_per_s, alpha)?;
    let slackest = T::one() - policy.omega;
    let power = if constraints.power {
        power_feasible(device, &load, policy, horizon_s).margin
    } else {
        slackest
    };
    let battery = if constraints.battery {
        battery_feasible(device, &load, policy, horizon_s).margin
    } else {
        slackest
    };
    let temperature = if constraints.temperature {
        thermal_feasible(device, &load, policy, temp_limit_c, horizon_s)?.margin
    } else {
        slackest
    };
    Ok(ConstraintMargins {
        power,
        battery,
        temperature,
    })
}

/// Smallest margin among the constraints enabled in `set` (ties resolve in
/// the fixed order power, battery, temperature).
fn binding_in<T: Scalar>(
    margins: &ConstraintMargins<T>,
    set: &ConstraintSet,
) -> Option<(Binding, T)> {
    let mut best: Option<(Binding, T)> = None;
    let candidates = [
        (set.power, Binding::Power, margins.power),
        (set.battery, Binding::Battery, margins.battery),
        (set.temperature, Binding::Temperature, margins.temperature),
    ];
    for (enabled, which, margin) in candidates {
        if enabled && best.is_none_or(|(_, m)| margin < m) {
            best = Some((which, margin));
        }
    }
    best
}

fn feasible<T: Scalar>(margins: &ConstraintMargins<T>, set: &ConstraintSet) -> bool {
    binding_in(margins, set).is_none_or(|(_, m)| m >= T::zero())
}

/// Largest α ∈ [0, 1] satisfying every enabled ω-confidence constraint.
pub fn solve_alpha_with<T: Scalar>(
    device: &DeviceSpec<T>,
    rate_per_s: T,
    policy: &ConfidencePolicy<T>,
    horizon_s: T,
    temp_limit_c: T,
    constraints: &ConstraintSet,
) -> Result<AlphaSolution<T>> {
    policy.validate()?;
    if !(horizon_s > T::zero()) {
        return Err(Error::InvalidParameter {
            name: "horizon_s",
            reason: format!("must be positive, got {horizon_s}"),
        });
    }

    let margins_at = |alpha: T| {
        constraint_margins(
            device,
            rate_per_s,
            alpha,
            policy,
            horizon_s,
            temp_limit_c,
            constraints,
        )
    };

    let at_zero = margins_at(T::zero())?;
    if let Some((which, margin)) = binding_in(&at_zero, constraints) {
        if margin < T::zero() {
            return Err(Error::InfeasibleAtZero(format!(
                "device {}: {} constraint has margin {} with no local load",
                device.id,
                which.as_str(),
                margin
            )));
        }
    }

    let at_one = margins_at(T::one())?;
    if feasible(&at_one, constraints) {
        let slack = binding_in(&at_one, constraints)
            .map(|(_, m)| m)
            .unwrap_or_else(|| T::one() - policy.omega);
        return Ok(AlphaSolution {
            device: device.id.clone(),
            alpha: T::one(),
            binding: Binding::None,
            slack_at_alpha: slack,
            margins: at_one,
        });
    }

    // invariant: lo feasible, hi infeasible
    let mut lo = T::zero();
    let mut lo_margins = at_zero;
    let mut hi = T::one();
    let half = cast::<T>(0.5);
    let tol = cast::<T>(ALPHA_TOLERANCE);
    while hi - lo > tol {
        let mid = (lo + hi) * half;
        if mid <= lo || mid >= hi {
            break; // grid exhausted (possible in f32 before reaching tol)
        }
        let m = margins_at(mid)?;
        if feasible(&m, constraints) {
            lo = mid;
            lo_margins = m;
        } else {
            hi = mid;
        }
    }

    let (binding, slack) = binding_in(&lo_margins, constraints)
        .expect("the infeasible-at-one branch implies at least one enabled constraint");
    Ok(AlphaSolution {
        device: device.id.clone(),
        alpha: lo,
        binding,
        slack_at_alpha: slack,
        margins: lo_margins,
    })
}

/// [`solve_alpha_with`] over the full constraint set.
pub fn solve_alpha<T: Scalar>(
    device: &DeviceSpec<T>,
    rate_per_s: T,
    policy: &ConfidencePolicy<T>,
    horizon_s: T,
    temp_limit_c: T,
) -> Result<AlphaSolution<T>> {
    solve_alpha_with(
        device,
        rate_per_s,
        policy,
        horizon_s,
        temp_limit_c,
        &ConstraintSet::default(),
    )
}
