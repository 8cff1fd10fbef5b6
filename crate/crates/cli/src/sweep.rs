//! Parallel parameter sweeps with a deterministic, grid-ordered merge.

use crate::commands::sim_config;
use crate::config::{Config, ScenarioName, SweepKind};
use crate::rundir::{csv, num, opt, RunDir, Verdict};
use crate::svg::heatmap;
use crate::Outcome;
use anyhow::{anyhow, Result};
use compwave::comparison::{choose_parameters, ComparisonError, PairKind};
use compwave::front::{detect_regimes, fit_speed, track_level_set, Direction, RegimeOptions, Species};
use compwave::pde::{run, InitialSpec};
use compwave::{classify_determinacy, minimal_speed, speed_regime, Params, SpeedSearch, WaveConfig};
use rayon::prelude::*;
use serde_json::json;

/// Grid points in row-major order over `(a, b, d, r)`.
pub fn grid_points(c: &Config) -> Vec<[f64; 4]> {
    let s = &c.sweep;
    let mut out = Vec::new();
    for &a in &s.a {
        for &b in &s.b {
            for &d in &s.d {
                for &r in &s.r {
                    out.push([a, b, d, r]);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointResult {
    pub index: usize,
    pub params: [f64; 4],
    /// Whether `0 < a < 1 < b` holds; other points are skipped.
    pub strong_weak: bool,
    pub verdict: Option<String>,
    pub c_star: Option<f64>,
    pub linear_speed: Option<f64>,
    pub u_speed: Option<f64>,
    pub v_speed: Option<f64>,
    /// Outcome of the kind-specific check, when there is one.
    pub check: Option<bool>,
    pub error: Option<String>,
}

pub const HEADER: [&str; 14] = [
    "index", "a", "b", "d", "r", "strong_weak", "verdict", "c_star", "linear_speed", "gap", "u_speed", "v_speed",
    "check", "error",
];

impl PointResult {
    pub fn gap(&self) -> Option<f64> {
        Some(self.c_star? - self.linear_speed?)
    }

    pub fn row(&self) -> Vec<String> {
        let [a, b, d, r] = self.params;
        vec![
            self.index.to_string(),
            num(a),
            num(b),
            num(d),
            num(r),
            self.strong_weak.to_string(),
            self.verdict.clone().unwrap_or_default(),
            opt(self.c_star),
            opt(self.linear_speed),
            opt(self.gap()),
            opt(self.u_speed),
            opt(self.v_speed),
            self.check.map_or_else(String::new, |b| b.to_string()),
            self.error.clone().unwrap_or_default().replace([',', '\n'], ";"),
        ]
    }
}

/// Evaluates one grid point; failures are recorded, not propagated.
pub fn evaluate(c: &Config, index: usize, params: [f64; 4]) -> PointResult {
    let mut out = PointResult {
        index,
        params,
        ..PointResult::default()
    };
    let [a, b, d, r] = params;
    let p = match Params::new(a, b, d, r) {
        Ok(p) => p,
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    };
    out.strong_weak = p.is_strong_weak();
    if !out.strong_weak {
        out.error = Some("skipped: not strong-weak (need 0 < a < 1 < b)".into());
        return out;
    }
    out.linear_speed = Some(p.linear_speed());
    if let Err(e) = fill(c, &p, &mut out) {
        out.error = Some(format!("{e:#}"));
    }
    out
}

fn fill(c: &Config, p: &Params, out: &mut PointResult) -> Result<()> {
    let v = classify_determinacy(p)?;
    out.verdict = Some(format!("{:?}", v.verdict));
    let kind = c.sweep.kind;
    if kind == SweepKind::Classify {
        return Ok(());
    }
    let search = SpeedSearch {
        wave: WaveConfig::with_domain(c.wave.half_length, c.wave.n),
        ..SpeedSearch::default()
    };
    let ms = minimal_speed(p, c.wave.tol, &search)?;
    out.c_star = Some(ms.c_star);
    match kind {
        SweepKind::Classify | SweepKind::Wave => {}
        SweepKind::Verify => {
            let mut ok = true;
            for k in [PairKind::Sub, PairKind::Super] {
                match choose_parameters(p, &ms.profile, k) {
                    Ok((_, rep)) => ok &= rep.pass,
                    Err(ComparisonError::NotPushed { .. }) => {
                        out.error = Some("not pushed: no sub/super-solution check".into());
                        return Ok(());
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            out.check = Some(ok);
        }
        SweepKind::Simulate | SweepKind::Track => {
            let spec = match c.sim.scenario {
                ScenarioName::A => InitialSpec::scenario_a(c.sim.half_width),
                ScenarioName::B => InitialSpec::scenario_b(c.sim.half_width),
            };
            let cfg = sim_config(c, *p, spec)?;
            let tr = run(&cfg)?;
            let t_end = tr.last().t;
            let window = (c.track.window.0 * t_end, c.track.window.1 * t_end);
            let speed = |s| {
                fit_speed(&track_level_set(&tr, s, c.sim.level, Direction::Rightmost), window)
                    .ok()
                    .map(|f| f.speed)
            };
            out.u_speed = speed(Species::U);
            out.v_speed = speed(Species::V);
            if kind == SweepKind::Track {
                let reg = speed_regime(p, ms.c_star)?;
                out.check = Some(match c.sim.scenario {
                    ScenarioName::A => out
                        .u_speed
                        .is_some_and(|s| ((s - ms.c_star) / ms.c_star).abs() <= 0.03),
                    ScenarioName::B => {
                        let opts = RegimeOptions {
                            window_fraction: c.track.window,
                            ..RegimeOptions::default()
                        };
                        detect_regimes(&tr, p, &reg, &opts)?.pass
                    }
                });
            }
        }
    }
    Ok(())
}

/// Runs all points on a pool of `jobs` threads; results come back in grid
/// order regardless of scheduling.
pub fn run_points(c: &Config) -> Result<Vec<PointResult>> {
    let points = grid_points(c);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(c.sweep.jobs)
        .build()
        .map_err(|e| anyhow!("thread pool: {e}"))?;
    Ok(pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(i, &q)| evaluate(c, i, q))
            .collect()
    }))
}

pub fn sweep_csv(results: &[PointResult]) -> String {
    let rows: Vec<Vec<String>> = results.iter().map(PointResult::row).collect();
    csv(&HEADER, &rows)
}

fn fmt_value(v: f64) -> String {
    format!("{v}").replace('.', "p")
}

pub fn sweep(c: &Config, dir: &mut RunDir) -> Result<Outcome> {
    let results = run_points(c)?;
    dir.write("data/sweep.csv", &sweep_csv(&results))?;

    // One regime map over (a, b) per (d, r) combination.
    let s = &c.sweep;
    let mut maps = Vec::new();
    for &d in &s.d {
        for &r in &s.r {
            let values: Vec<Vec<Option<f64>>> = s
                .b
                .iter()
                .map(|&b| {
                    s.a.iter()
                        .map(|&a| {
                            results
                                .iter()
                                .find(|x| x.params == [a, b, d, r])
                                .and_then(PointResult::gap)
                        })
                        .collect()
                })
                .collect();
            let name = if s.d.len() * s.r.len() == 1 {
                "plots/regime_map.svg".to_string()
            } else {
                format!("plots/regime_map_d{}_r{}.svg", fmt_value(d), fmt_value(r))
            };
            let svg = heatmap(
                &format!("c* - 2 sqrt(1-a) at d = {d}, r = {r}"),
                "a",
                "b",
                &s.a,
                &s.b,
                &values,
            );
            dir.write(&name, &svg)?;
            maps.push(name);
        }
    }
    let skipped = results.iter().filter(|r| !r.strong_weak).count();
    let failed: Vec<usize> = results
        .iter()
        .filter(|r| r.strong_weak && r.error.is_some() && !r.error.as_deref().unwrap_or("").starts_with("not pushed"))
        .map(|r| r.index)
        .collect();
    let check_failed: Vec<usize> = results
        .iter()
        .filter(|r| r.check == Some(false))
        .map(|r| r.index)
        .collect();
    let mut verdicts = vec![Verdict::new(
        "all points evaluated",
        failed.is_empty(),
        format!("{} points, {skipped} skipped (not strong-weak), failed: {failed:?}", results.len()),
    )];
    if results.iter().any(|r| r.check.is_some()) {
        verdicts.push(Verdict::new(
            "per-point checks",
            check_failed.is_empty(),
            format!("failed at points {check_failed:?}"),
        ));
    }
    let summary = match json!({
        "points": results.len(),
        "skipped": skipped,
        "failed": failed.len(),
        "regime_maps": maps,
    }) {
        serde_json::Value::Object(m) => m,
        _ => unreachable!(),
    };
    Ok(Outcome { verdicts, summary })
}
