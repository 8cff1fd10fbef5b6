use compwave::model::is_pushed;
use compwave::{
    aux_f, aux_f_inverse, capital_lambda, classify_determinacy, spectral_exponents, speed_regime,
    Params, RegimeTag, Verdict,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn strong_weak() -> impl Strategy<Value = Params> {
    (0.01f64..0.99, 1.01f64..8.0, 0.1f64..5.0, 0.1f64..5.0)
        .prop_map(|(a, b, d, r)| Params::strong_weak(a, b, d, r).unwrap())
}

fn rel(residual: f64, scale: f64) -> f64 {
    residual.abs() / scale
}

proptest! {
    #[test]
    fn aux_f_decreasing_and_inverted(a in 0.01f64..0.99, eps in 1e-6f64..0.5, k in 0usize..200) {
        let lin = 2.0 * (1.0 - a).sqrt();
        let c = lin + eps + (10.0 - lin - eps) * k as f64 / 200.0;
        let c2 = c + 1e-3;
        let (f1, f2) = (aux_f(c, a).unwrap(), aux_f(c2, a).unwrap());
        prop_assert!(f2 < f1);
        prop_assert!((aux_f_inverse(f1, a).unwrap() - c).abs() <= 1e-10 * c.max(1.0));
    }

    #[test]
    fn f_of_two_is_two(a in 1e-6f64..(1.0 - 1e-6)) {
        // sqrt(4a) is computed from a difference of O(1) terms: round-off
        // is amplified by 1/sqrt(a).
        prop_assert!((aux_f(2.0, a).unwrap() - 2.0).abs() <= 4.0 * f64::EPSILON * a.sqrt().recip());
    }

    #[test]
    fn exponents_solve_their_quadratics(p in strong_weak(), extra in 0.0f64..5.0) {
        let c = p.linear_speed() + extra;
        let s = spectral_exponents(c, &p).unwrap();
        let (a, b, d, r) = (p.a, p.b, p.d, p.r);
        for l in [s.lambda_u_minus, s.lambda_u_plus] {
            prop_assert!(rel(l * l + c * l + 1.0 - a, l * l + c * l.abs() + 1.0) <= 1e-12);
        }
        for l in [s.lambda_v_minus, s.lambda_v_plus] {
            prop_assert!(rel(d * l * l + c * l - r, d * l * l + c * l.abs() + r) <= 1e-12);
        }
        for m in [s.mu_u_minus, s.mu_u_plus] {
            prop_assert!(rel(m * m + c * m - 1.0, m * m + c * m.abs() + 1.0) <= 1e-12);
        }
        let k = r * (b - 1.0);
        for m in [s.mu_v_minus, s.mu_v_plus] {
            prop_assert!(rel(d * m * m + c * m - k, d * m * m + c * m.abs() + k) <= 1e-12);
        }
        prop_assert!(s.lambda_u_minus <= s.lambda_u_plus && s.lambda_u_plus < 0.0);
        prop_assert!(s.mu_u_plus > 0.0 && s.mu_v_plus > 0.0 && s.lambda_v_minus < 0.0);
    }

    #[test]
    fn capital_lambda_is_smaller_root(a in 0.01f64..0.99, extra in 0.0f64..3.0, gap in 0.0f64..3.0) {
        let c = 2.0 * (1.0 - a).sqrt() + extra;
        let cp = c.max(aux_f(c, a).unwrap()) + gap;
        let (big, small) = capital_lambda(c, cp, a).unwrap();
        let k = 1.0 + small * (cp - c);
        let scale = big * big + cp * big + k;
        prop_assert!(rel(big * big - cp * big + k, scale) <= 1e-12);
        let other = cp - big;
        prop_assert!(big <= other + 1e-12);
    }

    #[test]
    fn c_star_star_inside_interval(p in strong_weak(), w in 0.0f64..1.0) {
        let c_star = p.linear_speed() + w * (2.0 - p.linear_speed());
        let reg = speed_regime(&p, c_star).unwrap();
        if let Some(css) = reg.c_star_star {
            prop_assert_eq!(reg.case_tag, RegimeTag::SlowFrontCStarStar);
            prop_assert!(css > c_star && css < 2.0);
            let inv = aux_f_inverse(2.0 * (p.r * p.d).sqrt(), p.a).unwrap();
            prop_assert!((css - inv).abs() <= 1e-12 * css);
        }
    }
}

#[test]
fn classifier_never_contradicts_itself() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut counts = [0usize; 3];
    for _ in 0..10_000 {
        let p = Params::strong_weak(
            rng.gen_range(0.01..0.99),
            rng.gen_range(1.01..10.0),
            rng.gen_range(0.05..6.0),
            rng.gen_range(0.05..6.0),
        )
        .unwrap();
        let v = classify_determinacy(&p).expect("linear and nonlinear conditions both fired");
        counts[match v.verdict {
            Verdict::LinearSufficient => 0,
            Verdict::NonlinearSufficient => 1,
            Verdict::Inconclusive => 2,
        }] += 1;
        if p.d <= 2.0 {
            assert_eq!(v.llw_holds, v.huang_holds, "{p:?}");
        }
    }
    assert!(counts.iter().all(|&n| n > 0), "{counts:?}");
}

#[test]
fn regime_example_with_fixed_c_star() {
    let p = Params::new(0.5, 1.5, 4.0, 1.0).unwrap();
    assert!((aux_f(1.6, 0.5).unwrap() - 2.265_882_085_018_306_8).abs() <= 1e-14);
    let reg = speed_regime(&p, 1.6).unwrap();
    assert_eq!(reg.case_tag, RegimeTag::SlowFrontCStar);
    assert_eq!(reg.script_c, 1.6);
}

#[test]
fn pushed_predicate_uses_linear_speed() {
    let p = Params::new(0.9, 5.0, 1.0, 1.0).unwrap();
    let lin = 2.0 * 0.1f64.sqrt();
    assert!(!is_pushed(&p, lin, 1e-9));
    assert!(is_pushed(&p, lin + 0.01, 1e-9));
}
