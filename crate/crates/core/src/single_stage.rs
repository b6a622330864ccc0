//! Operating characteristics and design search for the one-stage K-arm
//! trial: the best-performing arm is carried forward when its statistic
//! exceeds the critical value.

use crate::error::{Error, Result};
use crate::kernel::{bisect, gauss_weighted_integral_1d, BisectionSpec, QuadratureSpec};
use crate::kernel::std_normal_cdf as phi_cdf;
use crate::params::{OperatingTargets, TrialParams};
use serde::{Deserialize, Serialize};

/// Cap on the per-arm size search.
pub const MAX_PER_ARM_N: u64 = 1_000_000;

/// How achieved power is evaluated once the integer design is fixed.
///
/// `IdealizedRatio` uses the requested ratio R in the power integral and
/// reproduces the published sample-size tables. `RealizedRatio` replaces R
/// with `ceil(R * n) / n`, the ratio actually delivered after rounding the
/// control arm up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PowerEvaluation {
    #[default]
    IdealizedRatio,
    RealizedRatio,
}

/// A solved single-stage design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub critical_value: f64,
    pub per_arm_n: u64,
    pub control_n: u64,
    pub total_n: u64,
    pub achieved_alpha: f64,
    pub achieved_power: f64,
}

/// Type I error for critical value `C`: the probability that the maximum
/// of the K correlated arm statistics exceeds `C` under the global null.
/// Depends only on K and R.
pub fn type1_error(critical_value: f64, params: &TrialParams, quad: &QuadratureSpec) -> Result<f64> {
    if !critical_value.is_finite() {
        return Err(Error::InvalidParams {
            field: "critical_value",
            message: "must be finite".into(),
        });
    }
    let k = params.active_arms as i32;
    let r = params.allocation_ratio;
    let shift = critical_value * ((r + 1.0) / r).sqrt();
    let inv_sqrt_r = r.sqrt().recip();
    let keep = gauss_weighted_integral_1d(|x| phi_cdf(shift + x * inv_sqrt_r).powi(k), quad)?;
    Ok(1.0 - keep)
}

/// Power under the least favourable configuration at per-arm size `n`:
/// one arm at `delta`, the rest at `delta0`, and the best arm must both
/// win the comparison and clear the critical value.
pub fn power(
    critical_value: f64,
    per_arm_n: u64,
    params: &TrialParams,
    quad: &QuadratureSpec,
) -> Result<f64> {
    power_at_ratio(critical_value, per_arm_n, params.allocation_ratio, params, quad)
}

/// Power with an explicit ratio slot, so callers can substitute the
/// realized `ceil(R n) / n` for the idealized R.
pub fn power_at_ratio(
    critical_value: f64,
    per_arm_n: u64,
    ratio: f64,
    params: &TrialParams,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if per_arm_n < 1 {
        return Err(Error::InvalidParams {
            field: "per_arm_n",
            message: "must be at least 1".into(),
        });
    }
    let k = params.active_arms as i32;
    let n = per_arm_n as f64;
    let sep = n.sqrt() * (params.delta - params.delta0) / params.sigma;
    let sqrt_r = ratio.sqrt();
    let drift = (ratio * n).sqrt() * params.delta / params.sigma
        - critical_value * (ratio + 1.0).sqrt();
    gauss_weighted_integral_1d(
        |w| phi_cdf(w + sep).powi(k - 1) * phi_cdf(w * sqrt_r + drift),
        quad,
    )
}

/// Dunnett's heuristic for the optimal allocation ratio, `sqrt(K)`.
pub fn dunnett_heuristic_ratio(active_arms: u32) -> f64 {
    (active_arms as f64).sqrt()
}

/// Smallest critical value with type I error at most `targets.alpha`,
/// found by bisection to 1e-6.
pub fn solve_critical_value(
    params: &TrialParams,
    targets: &OperatingTargets,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let spec = BisectionSpec::new(-10.0, 15.0);
    let alpha = targets.alpha;
    // type1_error is strictly decreasing in C.
    let mut c = bisect(|c| type1_error(c, params, quad).unwrap_or(f64::NAN) - alpha, &spec)?;
    let mut guard = 0;
    while type1_error(c, params, quad)? > alpha {
        c += spec.x_tolerance;
        guard += 1;
        if guard > 8 {
            break;
        }
    }
    Ok(c)
}

/// Smallest integer per-arm size meeting the power target at the solved
/// critical value, with `control_n = ceil(R * n)`.
pub fn solve_sample_size(
    params: &TrialParams,
    targets: &OperatingTargets,
    quad: &QuadratureSpec,
    evaluation: PowerEvaluation,
) -> Result<DesignPoint> {
    let c = solve_critical_value(params, targets, quad)?;
    let power_at = |n: u64| -> Result<f64> {
        let ratio = match evaluation {
            PowerEvaluation::IdealizedRatio => params.allocation_ratio,
            PowerEvaluation::RealizedRatio => params.control_size(n) as f64 / n as f64,
        };
        power_at_ratio(c, n, ratio, params, quad)
    };
    let n = smallest_n_meeting(power_at, targets.power)?;
    let control_n = params.control_size(n);
    Ok(DesignPoint {
        critical_value: c,
        per_arm_n: n,
        control_n,
        total_n: control_n + params.active_arms as u64 * n,
        achieved_alpha: type1_error(c, params, quad)?,
        achieved_power: power_at(n)?,
    })
}

/// Exponential bracketing followed by integer bisection: O(log n) power
/// evaluations.
pub(crate) fn smallest_n_meeting<F>(power_at: F, target: f64) -> Result<u64>
where
    F: Fn(u64) -> Result<f64>,
{
    let mut hi = 1u64;
    while power_at(hi)? < target {
        hi *= 2;
        if hi > MAX_PER_ARM_N {
            return Err(Error::InfeasibleDesign { cap: MAX_PER_ARM_N });
        }
    }
    let mut lo = hi / 2; // power(lo) < target, power(hi) >= target
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if power_at(mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
