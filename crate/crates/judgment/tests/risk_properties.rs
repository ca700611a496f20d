//! Statistical guarantees of the decision rule, checked by simulation with
//! three-standard-error acceptance bands.

use judgment::{
    dominance_check, mc_risk, power_sweep, risk_bound_sweep, theta_grid, Favored, Judgment,
    McSettings, Noise, Rule,
};

fn j(action: f64, confidence: f64) -> Judgment {
    Judgment::new(action, confidence).unwrap()
}

fn settings(draws: u64, seed: u64) -> McSettings {
    McSettings { draws, seed, ..McSettings::default() }
}

#[test]
fn prob_worse_stays_below_alpha_on_the_grid() {
    let grid = theta_grid(-3.0, 3.0, 0.5).unwrap();
    for &alpha in &[0.01, 0.05, 0.10, 0.5] {
        let checks = risk_bound_sweep(&j(0.0, alpha), &grid, &settings(100_000, 42)).unwrap();
        for check in &checks {
            assert!(
                !check.violated,
                "alpha {alpha}, theta {}: prob_worse {} over limit {}",
                check.report.theta, check.report.prob_worse, check.limit
            );
        }
    }
}

#[test]
fn prob_worse_at_the_judgment_equals_alpha() {
    for &alpha in &[0.01, 0.05, 0.10, 0.5] {
        let report = mc_risk(
            &Rule::Judgment(j(0.0, alpha)),
            0.0,
            &j(0.0, alpha),
            &settings(200_000, 42),
        )
        .unwrap();
        let se = (alpha * (1.0 - alpha) / 200_000.0).sqrt();
        assert!(
            (report.prob_worse - alpha).abs() <= 3.0 * se,
            "alpha {alpha}: prob_worse {}",
            report.prob_worse
        );
    }
}

#[test]
fn rejection_rate_never_falls_below_alpha() {
    let grid = theta_grid(-3.0, 3.0, 0.5).unwrap();
    for &alpha in &[0.01, 0.05, 0.10] {
        let points = power_sweep(&j(0.0, alpha), &grid, &settings(100_000, 42)).unwrap();
        for p in &points {
            let se = (alpha * (1.0 - alpha) / 100_000.0f64).sqrt();
            assert!(
                p.reject_rate >= alpha - 3.0 * se,
                "alpha {alpha}, theta {}: reject_rate {}",
                p.theta,
                p.reject_rate
            );
        }
    }
}

#[test]
fn rejection_rate_at_the_judgment_has_size_alpha() {
    let points = power_sweep(&j(0.0, 0.05), &[0.0], &settings(200_000, 42)).unwrap();
    let se = (0.05f64 * 0.95 / 200_000.0).sqrt();
    assert!((points[0].reject_rate - 0.05).abs() <= 3.0 * se);
}

#[test]
fn power_far_from_the_judgment_is_high() {
    let points = power_sweep(&j(0.0, 0.05), &[5.0], &settings(100_000, 42)).unwrap();
    assert!(points[0].reject_rate > 0.8, "reject_rate {}", points[0].reject_rate);
}

#[test]
fn heavy_tailed_noise_is_reported_without_a_guarantee() {
    // The coverage bound assumes Gaussian observations, so under t(5)
    // noise the result is recorded as a stress diagnostic only.
    let s = McSettings { noise: Noise::StudentT { dof: 5 }, ..settings(100_000, 42) };
    let report = mc_risk(&Rule::Judgment(j(0.0, 0.05)), 0.0, &j(0.0, 0.05), &s).unwrap();
    assert!(report.prob_worse >= 0.0 && report.prob_worse <= 1.0);
    assert!(report.reject_rate > 0.0);
    println!(
        "t(5) noise at the judgment: prob_worse {:.4} (Gaussian target 0.05)",
        report.prob_worse
    );
}

#[test]
fn neither_judgment_nor_ml_dominates_the_other() {
    let grid = theta_grid(-3.0, 3.0, 0.5).unwrap();
    let report = dominance_check(
        &Rule::Judgment(j(0.0, 0.05)),
        &Rule::MaximumLikelihood,
        &j(0.0, 0.05),
        &grid,
        &settings(100_000, 42),
    )
    .unwrap();
    assert!(report.a_wins > 0, "judgment never wins");
    assert!(report.b_wins > 0, "ml never wins");
    let at_zero = report.points.iter().find(|p| p.theta == 0.0).unwrap();
    assert_eq!(at_zero.favored, Some(Favored::RuleA));
    assert!(at_zero.mean_loss_a < 0.5);
    assert!((at_zero.mean_loss_b - 0.5).abs() < 0.02);
}

#[test]
fn ml_beats_a_fixed_action_far_from_the_truth() {
    let report = dominance_check(
        &Rule::Fixed(0.0),
        &Rule::MaximumLikelihood,
        &j(0.0, 0.05),
        &[4.0],
        &settings(50_000, 42),
    )
    .unwrap();
    assert_eq!(report.points[0].favored, Some(Favored::RuleB));
}

#[test]
fn zero_confidence_sweep_never_does_worse() {
    let grid = theta_grid(-2.0, 2.0, 1.0).unwrap();
    let checks = risk_bound_sweep(&j(0.0, 0.0), &grid, &settings(20_000, 42)).unwrap();
    for check in &checks {
        assert_eq!(check.report.prob_worse, 0.0);
        assert!(!check.violated);
    }
}

#[test]
fn full_confidence_bound_is_trivial() {
    let checks = risk_bound_sweep(&j(0.0, 1.0), &[0.0], &settings(20_000, 42)).unwrap();
    assert!(checks[0].report.prob_worse >= 0.999);
    assert!(!checks[0].violated);
}
