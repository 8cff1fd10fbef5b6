use compwave::comparison::{
    build_sub_pair, build_super_pair, check_local_stability, check_sandwich, choose_parameters,
    choose_parameters_scaled, discretization_slack, Branch, FieldPair, PairKind, SubSuperSpec,
};
use compwave::front::{profile_convergence, ConvergenceWindow};
use compwave::pde::{run, InitialSpec, SimConfig, Trajectory};
use compwave::{minimal_speed, MinimalSpeed, Params, SpeedSearch};
use proptest::prelude::*;
use std::sync::OnceLock;

fn params() -> Params {
    Params::new(0.9, 5.0, 1.0, 1.0).unwrap()
}

fn wave() -> &'static MinimalSpeed {
    static W: OnceLock<MinimalSpeed> = OnceLock::new();
    W.get_or_init(|| minimal_speed(&params(), 1e-3, &SpeedSearch::default()).unwrap())
}

fn pairs() -> &'static (FieldPair, FieldPair) {
    static P: OnceLock<(FieldPair, FieldPair)> = OnceLock::new();
    P.get_or_init(|| {
        let w = &wave().profile;
        let (sub, _) = choose_parameters(&params(), w, PairKind::Sub).unwrap();
        let (sup, _) = choose_parameters(&params(), w, PairKind::Super).unwrap();
        (
            build_sub_pair(&params(), w, &sub).unwrap(),
            build_super_pair(&params(), w, &sup).unwrap(),
        )
    })
}

fn pushed_run() -> &'static Trajectory {
    static R: OnceLock<Trajectory> = OnceLock::new();
    R.get_or_init(|| {
        let mut cfg = SimConfig::standard(params(), InitialSpec::scenario_a(5.0), 150.0).unwrap();
        cfg.field_stride = 1;
        run(&cfg).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn branches_agree_on_the_kink(t in 0.0f64..400.0, sub in any::<bool>()) {
        let (lo, hi) = pairs();
        let pair = if sub { lo } else { hi };
        let x = pair.kink(t);
        let (u1, v1) = pair.eval_branch(t, x, Branch::Tail);
        let (u2, v2) = pair.eval_branch(t, x, Branch::Flat);
        prop_assert!((u1 - u2).abs() <= 1e-12 && (v1 - v2).abs() <= 1e-12);
    }

    #[test]
    fn exact_wave_pairs_are_the_wave(t in 0.0f64..50.0, xi in -30.0f64..30.0) {
        let w = &wave().profile;
        let spec = SubSuperSpec::exact_wave(&params(), w.c, PairKind::Sub).unwrap();
        let pair = build_sub_pair(&params(), w, &spec).unwrap();
        let x = w.c * t + xi;
        let r = pair.residual(t, x, pair.branch(t, x));
        let scale = pair.derivative_scale();
        prop_assert!(r.n1.abs() <= 1e-6 * scale && r.n2.abs() <= 1e-6 * scale, "{r:?}");
    }
}

#[test]
fn halving_mu_costs_at_most_one_doubling() {
    let w = &wave().profile;
    for kind in [PairKind::Sub, PairKind::Super] {
        let mut last = None;
        for f in [1.0, 0.5, 0.25] {
            let (_, rep) = choose_parameters_scaled(&params(), w, kind, f).unwrap();
            if let Some(t) = last {
                assert!(rep.t_star <= 2.0 * t, "{kind:?} factor {f}: {} after {t}", rep.t_star);
            }
            last = Some(rep.t_star);
        }
    }
}

#[test]
fn sandwich_shifts_order_sub_below_super() {
    let (lo, hi) = pairs();
    let tr = pushed_run();
    let slack = discretization_slack(tr.grid.h, tr.dt, lo.derivative_scale());
    let rep = check_sandwich(tr, lo, hi, 0.0, 0.0, slack).unwrap();
    assert!(rep.pass, "{rep:?}");
    let shift = rep.lower.shift + rep.upper.shift;
    let c = wave().c_star;
    let mut worst = f64::MIN;
    for k in 0..=100 {
        let t = k as f64;
        for j in 0..=160 {
            let x = c * t - 40.0 + 0.5 * j as f64;
            let (su, sv) = lo.eval(t, x);
            let (pu, pv) = hi.eval(t + shift, x);
            worst = worst.max(su - pu).max(pv - sv);
        }
    }
    assert!(worst <= 2.0 * slack, "{worst}");
}

#[test]
fn trajectory_stays_near_the_wave() {
    let ms = wave();
    let series = profile_convergence(pushed_run(), &ms.profile, ms.c_star, ConvergenceWindow::RightHalf).unwrap();
    for eps in [0.05, 0.02] {
        let rep = check_local_stability(&series, eps);
        assert!(rep.pass, "{rep:?}");
    }
}
