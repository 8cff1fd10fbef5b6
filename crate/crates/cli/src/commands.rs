//! Subcommand bodies. Each writes its artifacts through the [`RunDir`] and
//! returns the verdicts plus the fields of the one-line summary.

use crate::config::{Config, ScenarioName};
use crate::rundir::{find_run, num, opt, render_report, RunDir, RunManifest, Verdict};
use crate::svg::{line_plot, Series};
use crate::{Outcome, UsageError};
use anyhow::{anyhow, Result};
use compwave::comparison::{
    build_sub_pair, build_super_pair, check_comparison_principle, check_sandwich,
    choose_parameters_scaled, discretization_slack, ComparisonError, PairKind, ResidualReport,
    SubSuperSpec,
};
use compwave::front::{
    detect_regimes, fit_log_drift, fit_speed, track_level_set, Direction, FrontTrace,
    RegimeOptions, Species,
};
use compwave::model::is_pushed;
use compwave::pde::{run, Grid1D, InitialCondition, InitialSpec, SimConfig, Trajectory};
use compwave::{
    classify_determinacy, minimal_speed, solve_wave_profile, speed_regime, verify_asymptotics,
    Params, RegimeTag, SpeedSearch, WaveConfig, WaveProfile,
};
use serde_json::{json, Map, Value};
use std::path::Path;

/// Argument checks that should fail with the usage exit code.
pub fn precheck(command: &str, c: &Config) -> Result<(), UsageError> {
    let usage = |e: &dyn std::fmt::Display| UsageError(e.to_string());
    let p = c.params().map_err(|e| usage(&e))?;
    if command == "sweep" {
        let s = &c.sweep;
        for (name, vals) in [("a", &s.a), ("b", &s.b), ("d", &s.d), ("r", &s.r)] {
            if vals.is_empty() || vals.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(UsageError(format!("sweep values of {name} must be positive and non-empty")));
            }
        }
        return Ok(());
    }
    p.require_strong_weak().map_err(|e| usage(&e))?;
    if !(c.wave.tol > 0.0) {
        return Err(UsageError(format!("tol = {} must be positive", c.wave.tol)));
    }
    if !(c.sim.t_end > 0.0 && c.sim.h > 0.0 && c.sim.half_width > 0.0) {
        return Err(UsageError("t_end, h and half_width must be positive".into()));
    }
    if !(c.verify.mu_factor > 0.0 && c.verify.mu_factor <= 1.0) {
        return Err(UsageError(format!("mu_factor = {} not in (0, 1]", c.verify.mu_factor)));
    }
    Ok(())
}

pub fn dispatch(command: &str, c: &Config, dir: &mut RunDir) -> Result<Outcome> {
    match command {
        "classify" => classify(c, dir),
        "wave" => wave(c, dir),
        "simulate" => simulate(c, dir),
        "track" => track(c, dir),
        "verify-residuals" => verify_residuals(c, dir),
        "verify-sandwich" => verify_sandwich(c, dir),
        "verify-cp" => verify_cp(c, dir),
        "sweep" => crate::sweep::sweep(c, dir),
        other => Err(anyhow!("unknown command {other}")),
    }
}

pub fn report(root: &Path, id: &str) -> Result<String> {
    let path = find_run(root, id)?;
    let m = RunManifest::load(&path)?;
    Ok(render_report(&m))
}

fn map(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn classify(c: &Config, dir: &mut RunDir) -> Result<Outcome> {
    let p = c.params()?;
    let v = classify_determinacy(&p)?;
    let body = json!({
        "verdict": v.verdict,
        "llw_holds": v.llw_holds,
        "huang_holds": v.huang_holds,
        "ao_nonlinear_holds": v.ao_nonlinear_holds,
        "firing_condition": v.firing_condition(),
        "linear_speed": p.linear_speed(),
        "c_u": p.c_u(),
        "c_v": p.c_v(),
    });
    dir.write("data/classification.json", &(serde_json::to_string_pretty(&body)? + "\n"))?;
    Ok(Outcome {
        verdicts: vec![Verdict::new("classification", true, v.firing_condition())],
        summary: map(body),
    })
}

fn wave_config(c: &Config) -> WaveConfig {
    WaveConfig::with_domain(c.wave.half_length, c.wave.n)
}

fn find_minimal(c: &Config, p: &Params) -> Result<compwave::MinimalSpeed> {
    let search = SpeedSearch {
        wave: wave_config(c),
        ..SpeedSearch::default()
    };
    Ok(minimal_speed(p, c.wave.tol, &search)?)
}

fn write_profile(dir: &mut RunDir, w: &WaveProfile) -> Result<()> {
    let rows: Vec<Vec<String>> = (0..w.len())
        .map(|i| vec![num(w.xi[i]), num(w.u[i]), num(w.v[i])])
        .collect();
    dir.write_csv("data/profile.csv", &["xi", "u", "v"], &rows)?;
    let svg = line_plot(
        &format!("traveling wave, c = {:.6}", w.c),
        "xi",
        "value",
        &[
            Series { label: "U", x: &w.xi, y: &w.u },
            Series { label: "V", x: &w.xi, y: &w.v },
        ],
    );
    dir.write("plots/profile.svg", &svg)
}

fn wave(c: &Config, dir: &mut RunDir) -> Result<Outcome> {
    let p = c.params()?;
    let lin = p.linear_speed();
    let mut summary = Map::new();
    let mut verdicts = Vec::new();
    let profile = match c.wave.c {
        Some(speed) => {
            let w = solve_wave_profile(speed, &p, &wave_config(c), None)?;
            summary.insert("c".into(), speed.into());
            verdicts.push(Verdict::new("wave", true, format!("monotone wave at c = {speed}")));
            w
        }
        None => {
            let ms = find_minimal(c, &p)?;
            let inside = ms.c_star >= lin * (1.0 - 1e-12) && ms.c_star <= 2.0;
            summary.insert("c_star".into(), ms.c_star.into());
            summary.insert("bracket".into(), json!([ms.bracket.0, ms.bracket.1]));
            summary.insert("pushed".into(), is_pushed(&p, ms.c_star, c.wave.tol).into());
            summary.insert("solves".into(), ms.solves.into());
            verdicts.push(Verdict::new(
                "minimal speed in [2 sqrt(1-a), 2]",
                inside,
                format!("c* = {} (linear speed {lin})", ms.c_star),
            ));
            let reg = speed_regime(&p, ms.c_star)?;
            summary.insert("regime".into(), serde_json::to_value(reg.case_tag)?);
            if let Some(css) = reg.c_star_star {
                summary.insert("c_star_star".into(), css.into());
            }
            ms.profile
        }
    };
    summary.insert("linear_speed".into(), lin.into());
    summary.insert("gap".into(), (profile.c - lin).into());
    write_profile(dir, &profile)?;
    match verify_asymptotics(&profile, 0.05) {
        Ok(rep) => dir.write("data/asymptotics.json", &(serde_json::to_string_pretty(&rep)? + "\n"))?,
        Err(e) => dir.write("data/asymptotics.json", &(json!({ "error": e.to_string() }).to_string() + "\n"))?,
    }
    Ok(Outcome { verdicts, summary })
}

fn initial_spec(c: &Config) -> InitialSpec {
    match c.sim.scenario {
        ScenarioName::A => InitialSpec::scenario_a(c.sim.half_width),
        ScenarioName::B => InitialSpec::scenario_b(c.sim.half_width),
    }
}

/// Simulation configuration from the `[sim]` table.
pub fn sim_config(c: &Config, p: Params, spec: InitialSpec) -> Result<SimConfig> {
    let mut cfg = SimConfig::standard(p, spec, c.sim.t_end)?;
    if c.sim.h != cfg.grid.h {
        cfg.grid = Grid1D::with_spacing(cfg.grid.x_min, cfg.grid.x_max, c.sim.h)?;
    }
    if let Some(dt) = c.sim.dt {
        cfg.dt = dt;
        cfg.snapshot_stride = (1.0 / dt).round().max(1.0) as usize;
    }
    cfg.field_stride = c.sim.field_stride;
    for t in &mut cfg.track {
        t.level = c.sim.level;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn traces(tr: &Trajectory, level: f64) -> (FrontTrace, FrontTrace) {
    (
        track_level_set(tr, Species::U, level, Direction::Rightmost),
        track_level_set(tr, Species::V, level, Direction::Rightmost),
    )
}

/// Observables, fronts and the final state, with plots.
fn write_trajectory(dir: &mut RunDir, tr: &Trajectory, level: f64) -> Result<()> {
    let (fu, fv) = traces(tr, level);
    let rows: Vec<Vec<String>> = tr
        .observations
        .iter()
        .enumerate()
        .map(|(k, o)| {
            vec![
                num(o.t),
                num(o.sup_u),
                num(o.sup_v),
                num(o.min_u),
                num(o.min_v),
                num(o.sup_v_right),
                opt(o.u_at_0),
                opt(o.v_at_0),
                opt(fu.positions.get(k).copied().flatten()),
                opt(fv.positions.get(k).copied().flatten()),
            ]
        })
        .collect();
    dir.write_csv(
        "data/observations.csv",
        &["t", "sup_u", "sup_v", "min_u", "min_v", "sup_v_right", "u_at_0", "v_at_0", "front_u", "front_v"],
        &rows,
    )?;
    let last = tr.last();
    let x = tr.grid.points();
    let rows: Vec<Vec<String>> = (0..x.len())
        .map(|i| vec![num(x[i]), num(last.u[i]), num(last.v[i])])
        .collect();
    dir.write_csv("data/final_state.csv", &["x", "u", "v"], &rows)?;
    let pos = |f: &FrontTrace| -> Vec<f64> { f.positions.iter().map(|p| p.unwrap_or(f64::NAN)).collect() };
    let (pu, pv) = (pos(&fu), pos(&fv));
    dir.write(
        "plots/fronts.svg",
        &line_plot(
            "front positions",
            "t",
            "x",
            &[
                Series { label: "u front", x: &fu.times, y: &pu },
                Series { label: "v front", x: &fv.times, y: &pv },
            ],
        ),
    )?;
    dir.write(
        "plots/final_state.svg",
        &line_plot(
            &format!("state at t = {}", last.t),
            "x",
            "value",
            &[
                Series { label: "u", x: &x, y: &last.u },
                Series { label: "v", x: &x, y: &last.v },
            ],
        ),
    )
}

fn warning_verdict(tr: &Trajectory) -> Verdict {
    let detail = match tr.warnings.first() {
        None => "no front within 10% of the domain ends".to_string(),
        Some(w) => format!("{} warning(s), first: {w:?}", tr.warnings.len()),
    };
    Verdict::new("domain margin", tr.warnings.is_empty(), detail)
}

fn simulate(c: &Config, dir: &mut RunDir) -> Result<Outcome> {
    let p = c.params()?;
    let cfg = sim_config(c, p, initial_spec(c))?;
    let tr = run(&cfg)?;
    write_trajectory(dir, &tr, c.sim.level)?;
    let (fu, fv) = traces(&tr, c.sim.level);
    let summary = map(json!({
        "t_end": tr.last().t,
        "grid_points": cfg.grid.n,
        "dt": cfg.dt,
        "front_u": fu.last_position(),
        "front_v": fv.last_position(),
        "sup_u": tr.observations.last().map(|o| o.sup_u),
        "sup_v": tr.observations.last().map(|o| o.sup_v),
    }));
    Ok(Outcome {
        verdicts: vec![
            Verdict::new("integration", true, format!("{} steps", cfg.n_steps())),
            warning_verdict(&tr),
        ],
        summary,
    })
}

fn track(c: &Config, dir: &mut RunDir) -> Result<Outcome> {
    let p = c.params()?;
    let cfg = sim_config(c, p, initial_spec(c))?;
    let tr = run(&cfg)?;
    write_trajectory(dir, &tr, c.sim.level)?;
    let ms = find_minimal(c, &p)?;
    let reg = speed_regime(&p, ms.c_star)?;
    let t_end = tr.last().t;
    let window = (c.track.window.0 * t_end, c.track.window.1 * t_end);
    let (fu, fv) = traces(&tr, c.sim.level);
    let su = fit_speed(&fu, window).ok();
    let sv = fit_speed(&fv, window).ok();
    let mut verdicts = vec![warning_verdict(&tr)];
    let mut summary = map(json!({
        "c_star": ms.c_star,
        "regime": reg.case_tag,
        "u_speed": su.map(|f| f.speed),
        "v_speed": sv.map(|f| f.speed),
    }));
    let mut fits = Map::new();
    fits.insert("u_speed".into(), serde_json::to_value(su)?);
    fits.insert("v_speed".into(), serde_json::to_value(sv)?);
    match c.sim.scenario {
        ScenarioName::A => {
            let measured = su.map_or(f64::NAN, |f| f.speed);
            let rel = ((measured - ms.c_star) / ms.c_star).abs();
            verdicts.push(Verdict::new(
                "u-front speed matches c*",
                rel <= 0.03,
                format!("measured {measured:.5} vs c* = {:.5} ({:.2}%)", ms.c_star, 100.0 * rel),
            ));
        }
        ScenarioName::B => {
            let opts = RegimeOptions {
                window_fraction: c.track.window,
                ..RegimeOptions::default()
            };
            let rep = detect_regimes(&tr, &p, &reg, &opts)?;
            for chk in &rep.checks {
                verdicts.push(Verdict::new(
                    &chk.name,
                    chk.pass,
                    format!("measured {:.5}, reference {:.5}", chk.measured, chk.predicted),
                ));
            }
            fits.insert("regime".into(), serde_json::to_value(&rep)?);
        }
    }
    // Logarithmic delay of the fastest front behind its linear speed.
    let (trace, c_fixed) = match reg.case_tag {
        RegimeTag::FasterU | RegimeTag::Degenerate => (&fu, p.c_u()),
        _ => (&fv, p.c_v()),
    };
    if t_end > c.track.drift_from {
        if let Ok(d) = fit_log_drift(trace, c_fixed, (c.track.drift_from, t_end)) {
            summary.insert("kappa".into(), d.kappa.into());
            fits.insert("drift".into(), serde_json::to_value(d)?);
        }
    }
    dir.write("data/fits.json", &(serde_json::to_string_pretty(&Value::Object(fits))? + "\n"))?;
    Ok(Outcome { verdicts, summary })
}

fn residual_verdict(kind: &str, spec: &SubSuperSpec, r: &ResidualReport) -> Verdict {
    Verdict::new(
        &format!("{kind}-solution residual signs"),
        r.pass,
        format!(
            "x0-zeta0 = {}, T = {}, worst violation {:.3e} at (t, x) = ({:.2}, {:.2}), slack {:.3e}",
            spec.tail_anchor(),
            r.t_star,
            r.violation,
            r.worst_at.0,
            r.worst_at.1,
            r.slack
        ),
    )
}

fn residual_row(kind: &str, s: &SubSuperSpec, r: &ResidualReport) -> Vec<String> {
    vec![
        kind.into(),
        num(s.alpha),
        num(s.mu),
        num(s.tau),
        num(s.p),
        num(s.q),
        num(s.zeta0),
        num(s.x0),
        num(r.t_star),
        num(r.max_n1),
        num(r.min_n1),
        num(r.max_n2),
        num(r.min_n2),
        num(r.violation),
        num(r.worst_at.0),
        num(r.worst_at.1),
        num(r.slack),
        r.kink_points.to_string(),
        r.pass.to_string(),
    ]
}

const RESIDUAL_HEADER: [&str; 19] = [
    "kind", "alpha", "mu", "tau", "p", "q", "zeta0", "x0", "t_star", "max_n1", "min_n1", "max_n2", "min_n2",
    "violation", "worst_t", "worst_x", "slack", "kink_points", "pass",
];

/// Minimal wave plus both chosen sub/super-solution specs; `Ok(None)` when the
/// front is not pushed.
fn chosen_pairs(
    c: &Config,
    p: &Params,
) -> Result<(compwave::MinimalSpeed, Option<[(SubSuperSpec, ResidualReport); 2]>)> {
    let ms = find_minimal(c, p)?;
    let mut out = Vec::new();
    for kind in [PairKind::Sub, PairKind::Super] {
        match choose_parameters_scaled(p, &ms.profile, kind, c.verify.mu_factor) {
            Ok(x) => out.push(x),
            Err(ComparisonError::NotPushed { .. }) => return Ok((ms, None)),
            Err(e) => return Err(e.into()),
        }
    }
    let sup = out.pop().unwrap();
    let sub = out.pop().unwrap();
    Ok((ms, Some([sub, sup])))
}

fn not_pushed(ms: &compwave::MinimalSpeed, p: &Params) -> Outcome {
    Outcome {
        verdicts: vec![Verdict::new(
            "pushed front",
            false,
            format!("c* = {} equals the linear speed {}", ms.c_star, p.linear_speed()),
        )],
        summary: map(json!({ "c_star": ms.c_star, "pushed": false })),
    }
}

fn verify_residuals(c: &Config, dir: &mut RunDir) -> Result<Outcome> {
    let p = c.params()?;
    let (ms, pairs) = chosen_pairs(c, &p)?;
    let Some([(sub, rs), (sup, ru)]) = pairs else {
        return Ok(not_pushed(&ms, &p));
    };
    dir.write_csv(
        "data/residuals.csv",
        &RESIDUAL_HEADER,
        &[residual_row("sub", &sub, &rs), residual_row("super", &sup, &ru)],
    )?;
    let summary = map(json!({
        "c_star": ms.c_star,
        "t_star_sub": rs.t_star,
        "t_star_super": ru.t_star,
        "violation_sub": rs.violation,
        "violation_super": ru.violation,
    }));
    Ok(Outcome {
        verdicts: vec![residual_verdict("sub", &sub, &rs), residual_verdict("super", &sup, &ru)],
        summary,
    })
}

fn verify_sandwich(c: &Config, dir: &mut RunDir) -> Result<Outcome> {
    let p = c.params()?;
    let (ms, pairs) = chosen_pairs(c, &p)?;
    let Some([(sub, _), (sup, _)]) = pairs else {
        return Ok(not_pushed(&ms, &p));
    };
    let mut cfg = sim_config(c, p, InitialSpec::scenario_a(c.sim.half_width))?;
    cfg.field_stride = 1;
    let tr = run(&cfg)?;
    let lo = build_sub_pair(&p, &ms.profile, &sub)?;
    let hi = build_super_pair(&p, &ms.profile, &sup)?;
    let slack = discretization_slack(cfg.grid.h, cfg.dt, lo.derivative_scale());
    let rep = match check_sandwich(&tr, &lo, &hi, c.verify.t_min, 0.0, slack) {
        Ok(r) => r,
        Err(ComparisonError::NoShiftFound { side, max_shift, best_shift, violation, worst_at }) => {
            let detail = format!(
                "no shift in [0, {max_shift}] within the run; best {best_shift} with worst violation {violation:.3e} at (t, x) = ({:.2}, {:.2}), slack {slack:.3e}",
                worst_at.0, worst_at.1
            );
            return Ok(Outcome {
                verdicts: vec![Verdict::new(&format!("{side} pair ordering"), false, detail)],
                summary: map(json!({ "c_star": ms.c_star, "side": side, "best_shift": best_shift, "violation": violation })),
            });
        }
        Err(e) => return Err(e.into()),
    };
    dir.write("data/sandwich.json", &(serde_json::to_string_pretty(&rep)? + "\n"))?;

    let last = tr.last();
    let x = tr.grid.points();
    let t = last.t;
    let below: Vec<f64> = x.iter().map(|&x| lo.eval(t - rep.lower.shift, x).0).collect();
    let above: Vec<f64> = x.iter().map(|&x| hi.eval(t + rep.upper.shift, x).0).collect();
    dir.write(
        "plots/sandwich.svg",
        &line_plot(
            &format!("u at t = {t} between shifted sub- and super-solutions"),
            "x",
            "u",
            &[
                Series { label: "sub", x: &x, y: &below },
                Series { label: "u", x: &x, y: &last.u },
                Series { label: "super", x: &x, y: &above },
            ],
        ),
    )?;
    let side = |name: &str, s: &compwave::comparison::SandwichSide| {
        Verdict::new(
            name,
            s.violation <= rep.slack,
            format!(
                "shift {}, worst violation {:.3e} at (t, x) = ({:.2}, {:.2}), slack {:.3e}",
                s.shift, s.violation, s.worst_at.0, s.worst_at.1, rep.slack
            ),
        )
    };
    let summary = map(json!({
        "c_star": ms.c_star,
        "t_star": rep.lower.shift,
        "t_star_star": rep.upper.shift,
        "violation_lower": rep.lower.violation,
        "violation_upper": rep.upper.violation,
    }));
    Ok(Outcome {
        verdicts: vec![side("sub-solution below u", &rep.lower), side("u below super-solution", &rep.upper)],
        summary,
    })
}

fn verify_cp(c: &Config, dir: &mut RunDir) -> Result<Outcome> {
    let p = c.params()?;
    let low = sim_config(c, p, initial_spec(c))?;
    let mut high = low.clone();
    if let InitialCondition::Smoothed(s) = &mut high.ic {
        s.u_lift = c.verify.lift;
    }
    let rep = check_comparison_principle(&low, &high);
    let (verdict, summary) = match &rep {
        Ok(r) => {
            dir.write("data/ordering.json", &(serde_json::to_string_pretty(r)? + "\n"))?;
            (
                Verdict::new(
                    "ordering preserved",
                    true,
                    format!(
                        "{} snapshots, max u excess {:.3e}, max v excess {:.3e} (tolerance {:.0e})",
                        r.snapshots, r.max_u_excess, r.max_v_excess, r.tolerance
                    ),
                ),
                map(json!({ "snapshots": r.snapshots, "max_u_excess": r.max_u_excess, "max_v_excess": r.max_v_excess })),
            )
        }
        Err(ComparisonError::OrderingViolated { t, x, species, amount }) => (
            Verdict::new(
                "ordering preserved",
                false,
                format!("{species:?} ordering violated by {amount:.3e} at (t, x) = ({t:.2}, {x:.2})"),
            ),
            map(json!({ "violation": amount, "t": t, "x": x })),
        ),
        Err(e) => return Err(anyhow!("{e}")),
    };
    Ok(Outcome {
        verdicts: vec![verdict],
        summary,
    })
}
