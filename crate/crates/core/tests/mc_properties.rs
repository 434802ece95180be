use sabr_vix_core::mc::*;
use sabr_vix_core::{CappedModel, SabrParams};

#[test]
fn forward_close_to_first_order_drift() {
    // E[v_T] = v0 (1 + mu_V(v0) T) + O(T^2): 0.100388 for rho = -0.7
    let model = CappedModel::reference(-0.7);
    let ps = simulate_capped_paths(&model, &McConfig::default()).unwrap();
    let f = estimate_forward(&ps).unwrap();
    let first_order = 0.1 * (1.0 + model.params.mu_v(0.1) * 0.1);
    assert!((f.value - first_order).abs() < 4.0 * f.std_error, "{f:?}");
    assert_eq!(f.n_effective, 100_000);
}

#[test]
fn log_euler_weak_order_one() {
    let model = CappedModel::reference(-0.7);
    let m = McConfig {
        n_paths: 50_000,
        horizon: 1.0,
        ..Default::default()
    };
    let counts = [2, 4, 8, 16, 32, 512];
    let tv = terminal_values_common_noise(&model, &m, &counts, 512).unwrap();
    let fine = &tv[5];
    let mut log_dt = Vec::new();
    let mut log_err = Vec::new();
    for (j, &n) in counts[..5].iter().enumerate() {
        let diffs: Vec<f64> = tv[j]
            .iter()
            .zip(fine)
            .map(|(a, b)| (a - 0.12).max(0.0) - (b - 0.12).max(0.0))
            .collect();
        let e = McEstimate::from_samples(&diffs).unwrap();
        assert!(
            e.value.abs() > 3.0 * e.std_error,
            "n={n}: bias not resolved"
        );
        log_dt.push((1.0 / n as f64).ln());
        log_err.push(e.value.abs().ln());
    }
    let mx = log_dt.iter().sum::<f64>() / 5.0;
    let my = log_err.iter().sum::<f64>() / 5.0;
    let sxy: f64 = log_dt
        .iter()
        .zip(&log_err)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    let sxx: f64 = log_dt.iter().map(|x| (x - mx) * (x - mx)).sum();
    let order = sxy / sxx;
    assert!((order - 1.0).abs() < 0.3, "weak order {order}");
}

#[test]
fn two_factor_and_capped_forwards_agree() {
    // caps far beyond the sampled range make the capped SDE the uncapped volatility process
    let p = SabrParams::reference(-0.7);
    let m = McConfig {
        n_paths: 20_000,
        horizon: 0.05,
        ..Default::default()
    };
    let two = simulate_sabr_2d(&p, 1.0, &m).unwrap();
    assert_eq!(two.absorbed_fraction, 0.0);
    let model = CappedModel::new(p, 50.0, 1e4).unwrap();
    let one = simulate_capped_paths(&model, &m).unwrap();
    let a = McEstimate::from_samples(&two.v_t).unwrap();
    let b = estimate_forward(&one).unwrap();
    let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    assert!((a.value - b.value).abs() < 4.0 * se, "{a:?} vs {b:?}");
}

#[test]
fn nested_sandwich_rarely_violated() {
    let model = CappedModel::reference(-0.7);
    let m = McConfig {
        n_paths: 500,
        n_steps: 50,
        inner_paths: 200,
        inner_steps: 10,
        ..Default::default()
    };
    let est = estimate_vix_nested(&model, &m, 0.1, 30.0 / 365.0).unwrap();
    assert!(est.violation_fraction <= 0.01, "{}", est.violation_fraction);
    assert!(est.vix.iter().all(|e| e.value > 0.0 && e.std_error >= 0.0));
}

#[test]
fn deterministic_given_seed() {
    let model = CappedModel::reference(0.0);
    let m = McConfig {
        n_paths: 4096,
        ..Default::default()
    };
    let a = simulate_capped_paths(&model, &m).unwrap();
    let b = simulate_capped_paths(&model, &m).unwrap();
    assert_eq!(a, b);
    let nested = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let m = McConfig {
                    n_paths: 64,
                    inner_paths: 16,
                    ..Default::default()
                };
                estimate_vix_nested(&model, &m, 0.1, 0.05).unwrap()
            })
    };
    assert_eq!(nested(1), nested(3));
}
