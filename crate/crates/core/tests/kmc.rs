use coarse_manifold::blackbox::sim_rng;
use coarse_manifold::models::kmc::lift_with;
use coarse_manifold::models::{kmc_timestepper, restrict, KmcParams, KmcVariant, LiftMode};
use coarse_manifold::*;

#[test]
fn inert_channel_relaxes_to_balance() {
    // only inert adsorption and desorption: θC → μ/(μ+η)
    let params = KmcParams { alpha: 0.0, beta: 0.0, gamma: 0.0, k_r: 0.0, ..KmcParams::default() };
    let config = TimestepperConfig { micro_horizon: 1.0, reporting_horizon: 30.0, realizations: 16, master_seed: 3 };
    let ts = kmc_timestepper(params, KmcVariant::WellMixed, 64, 64, LiftMode::ExactCount, config).unwrap();
    let stats = ts.evaluate_stats(&[0.0, 0.0, 0.0], &[0.0]).unwrap();
    let target = params.mu / (params.mu + params.eta);
    assert!((target - 0.9574).abs() < 1e-4);
    assert!((stats.mean[2] - target).abs() < 5.0 * stats.std_error[2] + 1e-3, "{:?}", stats);
}

#[test]
fn independent_lift_is_binomial() {
    let theta = [0.3, 0.05, 0.6];
    let n = 128 * 128;
    let mut rng = sim_rng(11);
    let reps = 40;
    let mut sums = [0.0; 3];
    for _ in 0..reps {
        let s = lift_with(&theta, 128, 128, LiftMode::Independent, &mut rng).unwrap();
        let c = restrict(&s);
        for i in 0..3 {
            sums[i] += c[i];
        }
    }
    for i in 0..3 {
        let mean = sums[i] / reps as f64;
        let sd = (theta[i] * (1.0 - theta[i]) / (n * reps) as f64).sqrt();
        assert!((mean - theta[i]).abs() < 5.0 * sd, "component {i}: {mean}");
    }
}

#[test]
fn exact_count_lift_hits_counts() {
    let theta = [0.25, 0.125, 0.5];
    let mut rng = sim_rng(1);
    let s = lift_with(&theta, 32, 32, LiftMode::ExactCount, &mut rng).unwrap();
    assert_eq!(restrict(&s), [0.25, 0.125, 0.5]);
    assert!(s.is_consistent());
}

#[test]
fn infeasible_states_are_rejected() {
    let mut rng = sim_rng(1);
    assert!(matches!(lift_with(&[0.7, 0.4, 0.0], 8, 8, LiftMode::Independent, &mut rng), Err(Error::InfeasibleState(_))));
    assert!(matches!(lift_with(&[-0.1, 0.4, 0.0], 8, 8, LiftMode::ExactCount, &mut rng), Err(Error::InfeasibleState(_))));
}

#[test]
fn ensemble_tracks_mean_field_at_the_saddle() {
    let config = TimestepperConfig { micro_horizon: 0.05, reporting_horizon: 0.25, realizations: 40, master_seed: 9 };
    let ts = kmc_timestepper(KmcParams::default(), KmcVariant::WellMixed, 64, 64, LiftMode::ExactCount, config).unwrap();
    let x = [0.35, 0.02, 0.6];
    let stats = ts.evaluate_stats(&x, &[20.7]).unwrap();
    let mf = coarse_manifold::models::rk4_tmap(KmcParams::default(), 0.25, 0.005).unwrap().evaluate(&x, &[20.7]).unwrap();
    for i in 0..3 {
        assert!((stats.mean[i] - mf[i]).abs() < 5.0 * stats.std_error[i] + 2e-3, "{i}: {:?} vs {mf:?}", stats.mean);
    }
}
