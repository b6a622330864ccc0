//! Scenario inputs shared by the single-stage, two-stage and simulation
//! modules.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Fixed scenario inputs for a K-arm trial with a shared control.
///
/// The control arm receives `ceil(R * n)` patients for every `n` patients
/// per active arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialParams {
    /// Number of active treatment arms, K.
    pub active_arms: u32,
    /// Allocation ratio R (control : each active arm), R >= 1.
    pub allocation_ratio: f64,
    /// Common outcome standard deviation.
    pub sigma: f64,
    /// Clinically relevant effect.
    pub delta: f64,
    /// Largest uninteresting effect, 0 <= delta0 < delta.
    pub delta0: f64,
}

impl TrialParams {
    pub fn new(
        active_arms: u32,
        allocation_ratio: f64,
        sigma: f64,
        delta: f64,
        delta0: f64,
    ) -> Result<Self> {
        if active_arms < 1 {
            return Err(Error::InvalidParams {
                field: "active_arms",
                message: "must be at least 1".into(),
            });
        }
        if !allocation_ratio.is_finite() || allocation_ratio < 1.0 {
            return Err(Error::InvalidParams {
                field: "allocation_ratio",
                message: format!("must be finite and >= 1, got {allocation_ratio}"),
            });
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidParams {
                field: "sigma",
                message: format!("must be positive, got {sigma}"),
            });
        }
        if !delta.is_finite() || !delta0.is_finite() || !(delta0 >= 0.0 && delta0 < delta) {
            return Err(Error::InvalidParams {
                field: "delta0",
                message: format!("need 0 <= delta0 < delta, got delta0={delta0}, delta={delta}"),
            });
        }
        Ok(Self {
            active_arms,
            allocation_ratio,
            sigma,
            delta,
            delta0,
        })
    }

    /// Same scenario with a different allocation ratio.
    pub fn with_ratio(&self, allocation_ratio: f64) -> Result<Self> {
        Self::new(
            self.active_arms,
            allocation_ratio,
            self.sigma,
            self.delta,
            self.delta0,
        )
    }

    /// Control-arm size for a given per-arm size, `ceil(R * n)`.
    pub fn control_size(&self, per_arm_n: u64) -> u64 {
        (self.allocation_ratio * per_arm_n as f64).ceil() as u64
    }
}

/// Required type I error and power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingTargets {
    pub alpha: f64,
    pub power: f64,
}

impl OperatingTargets {
    pub fn new(alpha: f64, power: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParams {
                field: "alpha",
                message: format!("must be in (0,1), got {alpha}"),
            });
        }
        if !(power > 0.0 && power < 1.0) {
            return Err(Error::InvalidParams {
                field: "power",
                message: format!("must be in (0,1), got {power}"),
            });
        }
        Ok(Self { alpha, power })
    }
}
