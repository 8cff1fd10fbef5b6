use compwave::{
    minimal_speed, solve_wave_profile, spectral_exponents, verify_asymptotics, Params, SpeedSearch,
    WaveConfig, WaveError,
};
use std::sync::OnceLock;

fn pushed() -> Params {
    Params::new(0.9, 5.0, 1.0, 1.0).unwrap()
}

fn pushed_c_star() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| minimal_speed(&pushed(), 1e-3, &SpeedSearch::default()).unwrap().c_star)
}

#[test]
fn existence_is_monotone_in_speed() {
    let cfg = WaveConfig::default();
    for p in [pushed(), Params::new(0.5, 1.5, 1.0, 1.0).unwrap(), Params::new(0.3, 3.0, 2.0, 0.5).unwrap()] {
        let lin = p.linear_speed();
        let exists: Vec<bool> = (0..=24)
            .map(|k| lin + (2.2 - lin) * k as f64 / 24.0)
            .map(|c| solve_wave_profile(c, &p, &cfg, None).is_ok())
            .collect();
        let first = exists.iter().position(|&e| e).expect("no wave on the grid");
        assert!(exists[first..].iter().all(|&e| e), "{p:?}: {exists:?}");
    }
}

#[test]
fn minimal_speed_independent_of_scan() {
    let p = pushed();
    let tol = 1e-3;
    for m in [3, 5, 13] {
        let s = SpeedSearch {
            scan_intervals: m,
            ..SpeedSearch::default()
        };
        let c = minimal_speed(&p, tol, &s).unwrap().c_star;
        assert!((c - pushed_c_star()).abs() <= tol, "{m}: {c}");
    }
}

#[test]
fn fast_wave_has_predicted_tails() {
    let p = Params::new(0.5, 1.5, 1.0, 1.0).unwrap();
    let w = solve_wave_profile(1.45, &p, &WaveConfig::default(), None).unwrap();
    let rep = verify_asymptotics(&w, 0.05).unwrap();
    assert!(rep.u_plus.pass && rep.v_minus.pass, "{rep:#?}");
    assert!(!rep.u_uses_fast_rate);
}

#[test]
fn pushed_minimal_wave_decays_at_fast_rate() {
    let ms = minimal_speed(&pushed(), 1e-3, &SpeedSearch::default()).unwrap();
    let rep = verify_asymptotics(&ms.profile, 0.05).unwrap();
    let s = spectral_exponents(ms.c_star, &pushed()).unwrap();
    assert!(rep.u_uses_fast_rate);
    assert!((rep.u_plus.predicted.abs() - s.lambda_u_minus.abs()).abs() < 1e-12, "{} {}", rep.u_plus.predicted, s.lambda_u_minus);
    assert!(rep.u_plus.pass && rep.v_minus.pass, "{rep:#?}");
}

#[test]
fn below_linear_speed_is_a_precondition_error() {
    let p = pushed();
    let err = solve_wave_profile(0.5 * p.linear_speed(), &p, &WaveConfig::default(), None).unwrap_err();
    assert!(!matches!(err, WaveError::NoMonotoneConnection { .. }), "{err}");
}

#[test]
fn residual_second_order_under_refinement() {
    let p = pushed();
    let c = 1.3;
    let r: Vec<f64> = [401, 801, 1601]
        .iter()
        .map(|&n| {
            solve_wave_profile(c, &p, &WaveConfig::with_domain(40.0, n), None)
                .unwrap()
                .ode_residual_fd4()
        })
        .collect();
    for k in 0..2 {
        assert!((r[k] / r[k + 1]).log2() >= 1.9, "{r:?}");
    }
}

#[test]
fn resonant_right_tail_prefers_xi_factor() {
    // At c = 1.5, a = 0.5: lambda_u+ = -0.5, and d = 4, r = 0.25 puts the
    // negative root of 4 l^2 + 1.5 l - 0.25 at -0.5 as well.
    let p = Params::new(0.5, 5.0, 4.0, 0.25).unwrap();
    let s = spectral_exponents(1.5, &p).unwrap();
    assert!((s.lambda_v_minus - s.lambda_u_plus).abs() < 1e-14);
    let w = solve_wave_profile(1.5, &p, &WaveConfig::with_domain(80.0, 3201), None).unwrap();
    let rep = verify_asymptotics(&w, 0.05).unwrap();
    assert_eq!(rep.right_case, compwave::wave::RightTailCase::Resonant);
    let alt = rep.v_plus.alternative_rms.unwrap();
    assert!(rep.v_plus.residual_rms < alt, "{:#?}", rep.v_plus);
}
