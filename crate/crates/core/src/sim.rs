//! Monte Carlo verification engine. Arm outcome totals are drawn directly
//! from their exact normal distributions, the trial statistics are formed
//! with the realized (ceiled) control count, and the single- and
//! two-stage decision rules are applied replicate by replicate.
//!
//! Replicates are seeded by a counter-based scheme (one RNG stream per
//! replicate index), so estimates are identical under any partitioning of
//! the work across threads.

use crate::error::{Error, Result};
use crate::params::TrialParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// True arm means, control first: `mu[0]` is the control, `mu[1..=K]` the
/// active arms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanVector {
    pub mu: Vec<f64>,
}

impl MeanVector {
    /// Global null: every arm at zero.
    pub fn null_config(active_arms: u32) -> Self {
        Self {
            mu: vec![0.0; active_arms as usize + 1],
        }
    }

    /// Least favourable configuration: control at 0, arms 1..K-1 at
    /// `delta0`, arm K at `delta`.
    pub fn lfc_config(params: &TrialParams) -> Self {
        let k = params.active_arms as usize;
        let mut mu = vec![params.delta0; k + 1];
        mu[0] = 0.0;
        mu[k] = params.delta;
        Self { mu }
    }

    fn check(&self, params: &TrialParams) -> Result<()> {
        if self.mu.len() != params.active_arms as usize + 1 {
            return Err(Error::InvalidParams {
                field: "mean_vector",
                message: format!(
                    "expected {} means (control + {} arms), got {}",
                    params.active_arms + 1,
                    params.active_arms,
                    self.mu.len()
                ),
            });
        }
        Ok(())
    }
}

/// One simulated trial: arm sums, standardized statistics, the selected
/// arm, and the pooled second-stage statistic when a second stage ran.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialReplicate {
    pub sums: Vec<f64>,
    pub z_stats: Vec<f64>,
    pub z_max_index: usize,
    pub stage2_z: Option<f64>,
}

/// An empirical error-rate estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub estimate: f64,
    pub replicates: u64,
    pub std_error: f64,
    pub seed: u64,
}

impl SimEstimate {
    fn from_count(hits: u64, replicates: u64, seed: u64) -> Self {
        let p = hits as f64 / replicates as f64;
        Self {
            estimate: p,
            replicates,
            std_error: (p * (1.0 - p) / replicates as f64).sqrt(),
            seed,
        }
    }
}

/// Which event the two-stage simulation counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoStageEvent {
    /// The selected arm clears the critical value, whichever arm it is.
    AnySelected,
    /// Arm K is selected at the interim and then clears the critical
    /// value (the power event under the least favourable configuration).
    LastArmSelected,
}

fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn draw_sums(
    rng: &mut ChaCha8Rng,
    mu: &[f64],
    per_arm_n: u64,
    control_n: u64,
    sigma: f64,
) -> Vec<f64> {
    let n = per_arm_n as f64;
    let n0 = control_n as f64;
    let mut sums = Vec::with_capacity(mu.len());
    sums.push(
        Normal::new(n0 * mu[0], n0.sqrt() * sigma)
            .unwrap()
            .sample(rng),
    );
    for &m in &mu[1..] {
        sums.push(Normal::new(n * m, n.sqrt() * sigma).unwrap().sample(rng));
    }
    sums
}

fn z_stats(sums: &[f64], per_arm_n: u64, control_n: u64, sigma: f64) -> Vec<f64> {
    let n = per_arm_n as f64;
    // Realized ratio after the control count was rounded up.
    let r = control_n as f64 / n;
    let denom = sigma * (r * (r + 1.0) * n).sqrt();
    sums[1..].iter().map(|&s| (r * s - sums[0]) / denom).collect()
}

fn argmax(z: &[f64]) -> usize {
    // Ties (probability zero) go to the lowest index.
    let mut best = 0;
    for (i, &v) in z.iter().enumerate().skip(1) {
        if v > z[best] {
            best = i;
        }
    }
    best
}

/// Simulate one single-stage trial.
pub fn run_single_replicate(
    rng: &mut ChaCha8Rng,
    per_arm_n: u64,
    params: &TrialParams,
    means: &MeanVector,
) -> TrialReplicate {
    let control_n = params.control_size(per_arm_n);
    let sums = draw_sums(rng, &means.mu, per_arm_n, control_n, params.sigma);
    let z = z_stats(&sums, per_arm_n, control_n, params.sigma);
    let m = argmax(&z);
    TrialReplicate {
        sums,
        z_stats: z,
        z_max_index: m,
        stage2_z: None,
    }
}

/// Simulate one two-stage trial: select the best arm at the interim, pool
/// its stage-1 data with the second stage, and test the pooled statistic.
pub fn run_two_stage_replicate(
    rng: &mut ChaCha8Rng,
    per_arm_stage_n: u64,
    params: &TrialParams,
    means: &MeanVector,
) -> TrialReplicate {
    let control_n = params.control_size(per_arm_stage_n);
    let sums = draw_sums(rng, &means.mu, per_arm_stage_n, control_n, params.sigma);
    let z = z_stats(&sums, per_arm_stage_n, control_n, params.sigma);
    let m = argmax(&z);

    let n = per_arm_stage_n as f64;
    let n0 = control_n as f64;
    let r = n0 / n;
    let stage2_sum = Normal::new(n * means.mu[m + 1], n.sqrt() * params.sigma)
        .unwrap()
        .sample(rng);
    let stage2_control = Normal::new(n0 * means.mu[0], n0.sqrt() * params.sigma)
        .unwrap()
        .sample(rng);
    let pooled = r * (sums[m + 1] + stage2_sum) - (sums[0] + stage2_control);
    let z2 = pooled / (params.sigma * ((r + 1.0) * 2.0 * r * n).sqrt());
    TrialReplicate {
        sums,
        z_stats: z,
        z_max_index: m,
        stage2_z: Some(z2),
    }
}

fn estimate<F>(replicates: u64, seed: u64, hit: F) -> SimEstimate
where
    F: Fn(u64) -> bool + Sync,
{
    let hits: u64 = (0..replicates)
        .into_par_iter()
        .map(|i| hit(i) as u64)
        .sum();
    SimEstimate::from_count(hits, replicates, seed)
}

/// P(best arm clears C) under the global null.
pub fn simulate_type1_single(
    critical_value: f64,
    per_arm_n: u64,
    params: &TrialParams,
    replicates: u64,
    seed: u64,
) -> Result<SimEstimate> {
    let means = MeanVector::null_config(params.active_arms);
    simulate_single_with_means(critical_value, per_arm_n, params, replicates, seed, &means, false)
}

/// P(arm K wins the comparison and clears C) under the least favourable
/// configuration.
pub fn simulate_power_single(
    critical_value: f64,
    per_arm_n: u64,
    params: &TrialParams,
    replicates: u64,
    seed: u64,
) -> Result<SimEstimate> {
    let means = MeanVector::lfc_config(params);
    simulate_single_with_means(critical_value, per_arm_n, params, replicates, seed, &means, true)
}

/// Single-stage simulation under arbitrary means.
pub fn simulate_single_with_means(
    critical_value: f64,
    per_arm_n: u64,
    params: &TrialParams,
    replicates: u64,
    seed: u64,
    means: &MeanVector,
    require_last_arm: bool,
) -> Result<SimEstimate> {
    means.check(params)?;
    if replicates < 1 {
        return Err(Error::InvalidParams {
            field: "replicates",
            message: "must be at least 1".into(),
        });
    }
    let last = params.active_arms as usize - 1;
    Ok(estimate(replicates, seed, |i| {
        let mut rng = replicate_rng(seed, i);
        let rep = run_single_replicate(&mut rng, per_arm_n, params, means);
        let selected_ok = !require_last_arm || rep.z_max_index == last;
        selected_ok && rep.z_stats[rep.z_max_index] >= critical_value
    }))
}

/// Two-stage simulation under arbitrary means.
pub fn simulate_two_stage(
    critical_value: f64,
    per_arm_stage_n: u64,
    params: &TrialParams,
    replicates: u64,
    seed: u64,
    means: &MeanVector,
    event: TwoStageEvent,
) -> Result<SimEstimate> {
    means.check(params)?;
    if replicates < 1 {
        return Err(Error::InvalidParams {
            field: "replicates",
            message: "must be at least 1".into(),
        });
    }
    let last = params.active_arms as usize - 1;
    Ok(estimate(replicates, seed, |i| {
        let mut rng = replicate_rng(seed, i);
        let rep = run_two_stage_replicate(&mut rng, per_arm_stage_n, params, means);
        let selected_ok = match event {
            TwoStageEvent::AnySelected => true,
            TwoStageEvent::LastArmSelected => rep.z_max_index == last,
        };
        selected_ok && rep.stage2_z.unwrap() >= critical_value
    }))
}
