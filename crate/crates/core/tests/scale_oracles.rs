use sabr_vix_core::quadrature::{integrate, QuadratureConfig};
use sabr_vix_core::scale::*;
use sabr_vix_core::SabrParams;

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn params(beta: f64, rho: f64) -> SabrParams {
    SabrParams::new(beta, rho, 1.0, 0.1).unwrap()
}

// F(x) = \int_0^x (alpha y + delta) / sigma_V^2(y) dy, integrated numerically.
fn f_oracle(x: f64, p: &SabrParams) -> f64 {
    let (alpha, delta) = (p.alpha(), p.delta());
    integrate(|y| (alpha * y + delta) / p.sigma_v_sq(y), 0.0, x, &cfg()).unwrap()
}

#[test]
fn closed_form_exponent_matches_quadrature() {
    for (beta, rho) in [
        (0.5, -0.7),
        (0.0, -0.5),
        (0.25, -0.9),
        (0.9, -0.1),
        (0.5, 0.0),
        (0.75, 0.7),
    ] {
        let p = params(beta, rho);
        for i in 0..=100 {
            let x = 0.5 * i as f64;
            let got = f_closed(x, &p);
            let want = f_oracle(x, &p);
            assert!(
                (got - want).abs() <= 1e-10 * want.abs().max(1.0),
                "beta={beta} rho={rho} x={x}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn closed_form_exponent_at_unit_level() {
    let p = params(0.5, -0.7);
    let want = f_oracle(1.0, &p);
    assert!((f_closed(1.0, &p) - want).abs() < 1e-10);
}

#[test]
fn zero_beta_drops_arctan_term() {
    for rho in [-0.9, -0.3] {
        let p = params(0.0, rho);
        for x in [0.1, 1.0, 7.0] {
            let expected = 0.5 * (r_quadratic(x, &p) / 1.0).ln();
            assert!((f_closed(x, &p) - expected).abs() < 1e-14);
        }
    }
}

#[test]
fn r_matches_sigma_squared() {
    let p = params(0.5, -0.7);
    assert_eq!(r_quadratic(0.0, &p), 1.0);
    assert!((r_quadratic(0.1, &p) - 1.0725).abs() < 1e-15);
    assert!((r_quadratic(p.v_hat(2.0), &p) - 4.0).abs() < 1e-12);
}

#[test]
fn bounds_sandwich_on_dense_grid() {
    let grid: Vec<f64> = (0..=1000).map(|i| 0.1 * i as f64).collect();
    for beta in [0.0, 0.25, 0.5, 0.75, 0.9] {
        for rho in [-0.9, -0.5, -0.1] {
            let check = exp_f_bounds_check(&grid, &params(beta, rho));
            assert!(check.holds, "beta={beta} rho={rho}: {:?}", check.violation);
        }
    }
    // beta = 0: kappa = 1 and both envelopes coincide with exp(-2F)
    let p = params(0.0, -0.5);
    assert_eq!(kappa(&p), 1.0);
    for x in [0.5, 5.0, 50.0] {
        let e = (-2.0 * f_closed(x, &p)).exp();
        assert!((e / envelope(x, &p) - 1.0).abs() < 1e-13);
    }
}

#[test]
fn scale_function_between_envelope_integrals() {
    for (beta, rho) in [(0.5, -0.7), (0.25, -0.5), (0.75, -0.9)] {
        let p = params(beta, rho);
        let sa = ScaleAnalysis::new(p, cfg());
        let k = kappa(&p);
        for x in [0.1, 1.0, 10.0, 100.0] {
            let lower = integrate(|y| envelope(y, &p), 0.0, x, &cfg()).unwrap();
            let px = sa.scale_p(x).unwrap();
            assert!(lower <= px * (1.0 + 1e-10), "beta={beta} x={x}");
            assert!(px <= k * lower * (1.0 + 1e-10), "beta={beta} x={x}");
        }
    }
}

#[test]
fn scale_function_rebased_identity() {
    // \int_c^x e^{-2(F(xi) - F(c))} d xi = e^{2F(c)} (p(x) - p(c))
    let p = params(0.5, -0.7);
    let sa = ScaleAnalysis::new(p, cfg());
    for c in [0.05, 0.5, 3.0] {
        let fc = f_closed(c, &p);
        for x in [c + 0.1, 10.0, 40.0] {
            let direct =
                integrate(|xi| (-2.0 * (f_closed(xi, &p) - fc)).exp(), c, x, &cfg()).unwrap();
            let via_p = (2.0 * fc).exp() * (sa.scale_p(x).unwrap() - sa.scale_p(c).unwrap());
            assert!((direct - via_p).abs() <= 1e-9 * direct.abs(), "c={c} x={x}");
        }
    }
}

#[test]
fn scale_function_monotone() {
    let sa = ScaleAnalysis::new(params(0.5, -0.7), cfg());
    let mut prev = -1.0;
    for i in 0..60 {
        let x = 1e-3 * 1.3f64.powi(i);
        let v = sa.scale_p(x).unwrap();
        assert!(v > prev);
        prev = v;
    }
    assert_eq!(sa.scale_p(0.0).unwrap(), 0.0);
}

#[test]
fn limit_is_finite_on_parameter_grid() {
    for beta in [0.0, 0.25, 0.5, 0.75, 0.9] {
        for rho in [-0.9, -0.5, -0.1] {
            let sa = ScaleAnalysis::new(params(beta, rho), cfg());
            let fit = sa.p_infinity().unwrap();
            assert!(fit.p_infinity.is_finite() && fit.p_infinity > 0.0);
            assert!(fit.c1 > 0.0, "beta={beta} rho={rho}: c1={}", fit.c1);
            assert!(fit.residual <= TAIL_FIT_TOLERANCE);
            assert_eq!(fit.tail_exponent, 1.0 / (1.0 - beta));
        }
    }
}

#[test]
fn tail_slope_for_half_beta() {
    let sa = ScaleAnalysis::new(params(0.5, -0.7), cfg());
    let fit = sa.p_infinity().unwrap();
    assert!(
        (fit.fitted_slope + 2.0).abs() < 0.05,
        "{}",
        fit.fitted_slope
    );
}

#[test]
fn far_tail_increment_follows_tail_law() {
    // p(1e6) - p(1e5) = c1 (1e-10 - 1e-12) for beta = 1/2, about 1e-9: well below any
    // practical scale but above the default abs_tol of 1e-12.
    let sa = ScaleAnalysis::new(params(0.5, -0.7), cfg());
    let fit = sa.p_infinity().unwrap();
    let inc = sa.scale_p(1e6).unwrap() - sa.scale_p(1e5).unwrap();
    let expected = fit.c1 * (1e-10 - 1e-12);
    assert!(inc > 0.0 && inc < 1e-8);
    assert!((inc / expected - 1.0).abs() < 1e-2, "{inc} vs {expected}");
    let direct = sa.scale_tail(1e5).unwrap() - sa.scale_tail(1e6).unwrap();
    assert!((direct / inc - 1.0).abs() < 1e-3);
}

#[test]
fn inverse_round_trip() {
    let sa = ScaleAnalysis::new(params(0.5, -0.7), cfg());
    assert_eq!(sa.q_inverse(0.0).unwrap(), 0.0);
    for i in 0..=40 {
        let x = 0.01 * 10f64.powf(i as f64 / 10.0);
        let back = sa.q_inverse(sa.scale_p(x).unwrap()).unwrap();
        assert!((back - x).abs() <= 1e-8 * x.max(1.0), "x={x}: {back}");
    }
    for x in [0.1, 1.0, 10.0] {
        let back = sa.q_inverse(sa.scale_p(x).unwrap()).unwrap();
        assert!((back - x).abs() < 1e-8);
    }
    let p_inf = sa.p_infinity().unwrap().p_infinity;
    assert!(sa.q_inverse(p_inf).is_err());
    assert!(sa.q_inverse(-1e-3).is_err());
}

#[test]
fn inverse_tail_exponent() {
    let sa = ScaleAnalysis::new(params(0.5, -0.7), cfg());
    let fit = sa.p_infinity().unwrap().clone();
    let mut prev_err = f64::INFINITY;
    for k in 3..=6 {
        let y = fit.p_infinity * (1.0 - 10f64.powi(-k));
        let q = sa.q_inverse(y).unwrap();
        let ratio = q.ln() / (fit.c1 / (fit.p_infinity - y)).ln();
        let err = (ratio - 0.5).abs();
        assert!(err < prev_err, "k={k}: ratio {ratio}");
        prev_err = err;
    }
    assert!(prev_err < 0.05);
}

#[test]
fn natural_scale_volatility_limits() {
    let sa = ScaleAnalysis::new(params(0.5, -0.7), cfg());
    for y in [1e-4, 1e-6] {
        let s = sa.natural_scale_sigma(y).unwrap();
        assert!((s / y - 1.0).abs() < 10.0 * y.sqrt(), "y={y}: {}", s / y);
    }
    // log sigma_bar(y) / log(p_inf - y) -> beta; the local log-log slope removes the prefactor
    let p_inf = sa.p_infinity().unwrap().p_infinity;
    let mut prev = f64::INFINITY;
    for k in 4..=8 {
        let y = p_inf * (1.0 - 10f64.powi(-k));
        let ratio = sa.natural_scale_sigma(y).unwrap().ln() / (p_inf - y).ln();
        let err = (ratio - 0.5).abs();
        assert!(err < prev, "k={k}: {ratio}");
        prev = err;
    }
    let y1 = p_inf * (1.0 - 1e-6);
    let y2 = p_inf * (1.0 - 1e-8);
    let slope = (sa.natural_scale_sigma(y2).unwrap() / sa.natural_scale_sigma(y1).unwrap()).ln()
        / ((p_inf - y2) / (p_inf - y1)).ln();
    assert!((slope - 0.5).abs() < 0.01, "{slope}");
    assert_eq!(sa.natural_scale_sigma(0.0).unwrap(), 0.0);
    assert_eq!(sa.natural_scale_sigma(p_inf).unwrap(), 0.0);
    assert_eq!(sa.natural_scale_sigma(-1.0).unwrap(), 0.0);
}

#[test]
fn feller_function_nondecreasing_and_stabilising() {
    let sa = ScaleAnalysis::new(params(0.5, -0.7), cfg());
    let xs: Vec<f64> = (0..12).map(|i| 0.1 * 10f64.powf(i as f64 * 0.5)).collect();
    let nus = sa.feller_nu_profile(&xs).unwrap();
    assert!(nus.windows(2).all(|w| w[1] >= w[0]));
    for (x, nu) in xs.iter().zip(&nus).take(4) {
        assert!((sa.feller_nu(*x).unwrap() - nu).abs() <= 1e-9 * nu.max(1e-12));
    }
    let d = |i: usize| nus[i + 2] - nus[i];
    assert!(d(9) < d(5) && d(5) < d(1));
}

#[test]
fn explosion_on_both_beta_regimes() {
    for beta in [0.4, 0.5, 0.6] {
        let report = ScaleAnalysis::new(params(beta, -0.7), cfg())
            .explosion_verdict()
            .unwrap();
        assert!(
            report.explosion_flag,
            "beta={beta}: {:?}",
            report.nu_profile
        );
        assert!(report.nu_zero_divergent);
        assert!(report.kappa > 1.0);
    }
}

#[test]
fn martingale_on_mixed_sign_grid() {
    for beta in [0.0, 0.5, 0.9] {
        for rho in [-0.7, 0.5, 0.7] {
            let d = ScaleAnalysis::new(params(beta, rho), cfg())
                .martingale_diagnostic()
                .unwrap();
            assert!(d.true_martingale, "beta={beta} rho={rho}");
        }
    }
}

#[test]
fn boundary_classes() {
    assert_eq!(
        classify_boundary(&params(0.3, -0.5)).upper,
        BoundaryClass::Regular
    );
    assert_eq!(
        classify_boundary(&params(0.5, -0.5)).upper,
        BoundaryClass::Exit
    );
    assert_eq!(
        classify_boundary(&params(0.9, -0.5)).upper,
        BoundaryClass::Exit
    );
    assert_eq!(
        classify_boundary(&params(0.0, -0.5)).upper,
        BoundaryClass::Unclassified
    );
    assert_eq!(
        classify_boundary(&params(0.3, -0.5)).lower,
        BoundaryClass::Natural
    );
}

#[test]
fn report_serialises_full_precision() {
    let report = ScaleAnalysis::new(params(0.5, -0.7), cfg())
        .explosion_verdict()
        .unwrap();
    let json = serde_json::to_string(&report).unwrap();
    let back: ScaleReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, report);
}
