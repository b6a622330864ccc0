//! Cross-checks between the analytic integrals and the Monte Carlo
//! simulator, the two fully independent routes to the same probabilities.

use armalloc_core::{
    sim, single_stage, two_stage, OperatingTargets, QuadratureSpec, TrialParams,
    TwoStageFormulation,
};

const REPLICATES: u64 = 200_000;

fn se(p: f64) -> f64 {
    (p * (1.0 - p) / REPLICATES as f64).sqrt()
}

#[test]
fn simulated_alpha_matches_analytic_two_arms() {
    let quad = QuadratureSpec::default();
    let p = TrialParams::new(2, 1.0, 1.0, 0.5, 0.125).unwrap();
    let t = OperatingTargets::new(0.05, 0.9).unwrap();
    let c = single_stage::solve_critical_value(&p, &t, &quad).unwrap();
    let analytic = single_stage::type1_error(c, &p, &quad).unwrap();
    let est = sim::simulate_type1_single(c, 83, &p, REPLICATES, 101).unwrap();
    assert!(
        (est.estimate - analytic).abs() <= 3.0 * se(analytic),
        "sim {} vs analytic {analytic}",
        est.estimate
    );
}

#[test]
fn simulated_power_matches_analytic_unequal_allocation() {
    let quad = QuadratureSpec::default();
    let p = TrialParams::new(3, 2.0, 1.0, 0.5, 0.125).unwrap();
    let c = 2.0;
    let n = 70;
    let analytic = single_stage::power(c, n, &p, &quad).unwrap();
    let est = sim::simulate_power_single(c, n, &p, REPLICATES, 102).unwrap();
    assert!(
        (est.estimate - analytic).abs() <= 3.0 * se(analytic),
        "sim {} vs analytic {analytic}",
        est.estimate
    );
}

#[test]
fn simulated_two_stage_alpha_matches_analytic() {
    let quad = QuadratureSpec::default();
    let p = TrialParams::new(2, 2.0, 1.0, 0.5, 0.125).unwrap();
    let c = 2.0;
    let analytic = two_stage::type1_error(c, &p, &quad, TwoStageFormulation::Exact).unwrap();
    let means = sim::MeanVector::null_config(2);
    let est = sim::simulate_two_stage(
        c,
        60,
        &p,
        REPLICATES,
        103,
        &means,
        sim::TwoStageEvent::AnySelected,
    )
    .unwrap();
    assert!(
        (est.estimate - analytic).abs() <= 3.0 * se(analytic),
        "sim {} vs analytic {analytic}",
        est.estimate
    );
}

#[test]
fn simulated_two_stage_power_matches_analytic() {
    let quad = QuadratureSpec::default();
    let p = TrialParams::new(3, 1.5, 1.0, 0.5, 0.125).unwrap();
    let c = 1.8;
    let n = 50;
    let analytic = two_stage::power(c, n, &p, &quad, TwoStageFormulation::Exact).unwrap();
    let means = sim::MeanVector::lfc_config(&p);
    let est = sim::simulate_two_stage(
        c,
        n,
        &p,
        REPLICATES,
        104,
        &means,
        sim::TwoStageEvent::LastArmSelected,
    )
    .unwrap();
    assert!(
        (est.estimate - analytic).abs() <= 3.0 * se(analytic),
        "sim {} vs analytic {analytic}",
        est.estimate
    );
}

// Shared-control simulation as an independent oracle for the pairwise
// critical value: with C solved at K = 2, R = 1 the familywise rejection
// rate under the null must come back at 5%.
#[test]
fn familywise_error_oracle_for_solved_critical_value() {
    let quad = QuadratureSpec::default();
    let p = TrialParams::new(2, 1.0, 1.0, 0.5, 0.125).unwrap();
    let t = OperatingTargets::new(0.05, 0.9).unwrap();
    let c = single_stage::solve_critical_value(&p, &t, &quad).unwrap();
    assert!((c - 1.9163).abs() < 5e-4);
    let est = sim::simulate_type1_single(c, 200, &p, REPLICATES, 105).unwrap();
    assert!((est.estimate - 0.05).abs() <= 3.0 * se(0.05));
}
