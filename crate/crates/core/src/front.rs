//! Front positions, spreading speeds, logarithmic drift and convergence to
//! traveling-wave profiles.

use crate::model::{Params, RegimeTag, SpeedRegime};
use crate::pde::{Grid1D, Trajectory};
use crate::stats::{ols, LineFit};
use crate::wave::{WaveEval, WaveProfile};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Minimum number of samples for a speed or drift fit.
pub const MIN_SAMPLES: usize = 20;
/// Minimum length of a speed-fit window.
pub const MIN_WINDOW: f64 = 20.0;
/// Earliest admissible start of a drift-fit window.
pub const DRIFT_T_MIN: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrontError {
    #[error("only {got} samples in window, need {need}")]
    InsufficientData { got: usize, need: usize },
    #[error("window [{0}, {1}] is not admissible")]
    BadWindow(f64, f64),
    #[error("u never crosses 1/2")]
    NoFront,
    #[error("nonpositive imposed speed {0}")]
    BadSpeed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Species {
    U,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Rightmost,
    Leftmost,
}

/// Position where `f` crosses `level`, by linear interpolation in the
/// rightmost (or leftmost) grid interval containing a crossing.
pub fn level_crossing(grid: &Grid1D, f: &[f64], level: f64, dir: Direction) -> Option<f64> {
    let n = f.len();
    let at = |i: usize| {
        let a = f[i] - level;
        let b = f[i + 1] - level;
        if (a >= 0.0) != (b >= 0.0) {
            Some(grid.x(i) + grid.h * a / (a - b))
        } else {
            None
        }
    };
    match dir {
        Direction::Rightmost => (0..n - 1).rev().find_map(at),
        Direction::Leftmost => (0..n - 1).find_map(at),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontTrace {
    pub species: Species,
    pub level: f64,
    pub direction: Direction,
    pub times: Vec<f64>,
    /// `None` where the level set is absent.
    pub positions: Vec<Option<f64>>,
}

impl FrontTrace {
    /// Defined samples with `t` in `[t1, t2]`.
    pub fn samples(&self, (t1, t2): (f64, f64)) -> (Vec<f64>, Vec<f64>) {
        self.times
            .iter()
            .zip(&self.positions)
            .filter_map(|(&t, x)| match x {
                Some(x) if t >= t1 && t <= t2 => Some((t, *x)),
                _ => None,
            })
            .unzip()
    }

    pub fn last_position(&self) -> Option<f64> {
        self.positions.iter().rev().find_map(|x| *x)
    }
}

/// Level-set positions at every observation. Uses the positions recorded
/// during the run when available, the stored snapshots otherwise.
pub fn track_level_set(traj: &Trajectory, species: Species, level: f64, direction: Direction) -> FrontTrace {
    let (times, positions) = match traj.tracked(species, level, direction) {
        Some(j) => traj
            .observations
            .iter()
            .map(|o| (o.t, o.fronts[j]))
            .unzip(),
        None => traj
            .snapshots
            .iter()
            .map(|s| (s.t, level_crossing(&traj.grid, s.field(species), level, direction)))
            .unzip(),
    };
    FrontTrace {
        species,
        level,
        direction,
        times,
        positions,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedFit {
    pub speed: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

fn check_samples(n: usize) -> Result<(), FrontError> {
    if n < MIN_SAMPLES {
        Err(FrontError::InsufficientData {
            got: n,
            need: MIN_SAMPLES,
        })
    } else {
        Ok(())
    }
}

fn fit_or_err(x: &[f64], y: &[f64]) -> Result<LineFit, FrontError> {
    ols(x, y).ok_or(FrontError::InsufficientData {
        got: x.len(),
        need: MIN_SAMPLES,
    })
}

/// Least-squares slope of position against time on `window`.
pub fn fit_speed(trace: &FrontTrace, window: (f64, f64)) -> Result<SpeedFit, FrontError> {
    if !(window.1 - window.0 >= MIN_WINDOW) {
        return Err(FrontError::BadWindow(window.0, window.1));
    }
    let (t, x) = trace.samples(window);
    check_samples(t.len())?;
    let f = fit_or_err(&t, &x)?;
    Ok(SpeedFit {
        speed: f.slope,
        intercept: f.intercept,
        stderr: f.slope_stderr,
        window,
        samples: t.len(),
    })
}

/// `x(t) ~ c_fixed t - kappa ln t + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftFit {
    pub c_fixed: f64,
    pub kappa: f64,
    pub kappa_stderr: f64,
    pub offset: f64,
    pub residual_sup: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

/// Regresses `c_fixed t - x(t)` on `ln t`.
pub fn fit_log_drift(trace: &FrontTrace, c_fixed: f64, window: (f64, f64)) -> Result<DriftFit, FrontError> {
    if !(c_fixed > 0.0) {
        return Err(FrontError::BadSpeed(c_fixed));
    }
    if !(window.0 >= DRIFT_T_MIN && window.1 > window.0) {
        return Err(FrontError::BadWindow(window.0, window.1));
    }
    let (t, x) = trace.samples(window);
    check_samples(t.len())?;
    let lt: Vec<f64> = t.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = t.iter().zip(&x).map(|(t, x)| c_fixed * t - x).collect();
    let f = fit_or_err(&lt, &y)?;
    Ok(DriftFit {
        c_fixed,
        kappa: f.slope,
        kappa_stderr: f.slope_stderr,
        offset: -f.intercept,
        residual_sup: f.residual_sup,
        window,
        samples: t.len(),
    })
}

/// Exponential decay rate of a positive series: `-slope` of `ln y` against `t`
/// over samples in `window` with `y > floor`.
pub fn fit_decay_rate(t: &[f64], y: &[f64], window: (f64, f64), floor: f64) -> Result<LineFit, FrontError> {
    let (tt, ly): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(y)
        .filter(|(&t, &y)| t >= window.0 && t <= window.1 && y > floor)
        .map(|(&t, &y)| (t, y.ln()))
        .unzip();
    check_samples(tt.len())?;
    let mut f = fit_or_err(&tt, &ly)?;
    f.slope = -f.slope;
    Ok(f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeCheck {
    pub name: String,
    pub measured: f64,
    pub predicted: f64,
    /// Relative tolerance, or absolute bound for threshold checks.
    pub tolerance: f64,
    pub pass: bool,
}

impl RegimeCheck {
    fn relative(name: &str, measured: f64, predicted: f64, tol: f64) -> Self {
        RegimeCheck {
            name: name.into(),
            measured,
            predicted,
            tolerance: tol,
            pass: ((measured - predicted) / predicted).abs() <= tol,
        }
    }

    fn at_most(name: &str, measured: f64, bound: f64) -> Self {
        RegimeCheck {
            name: name.into(),
            measured,
            predicted: bound,
            tolerance: 0.0,
            pass: measured <= bound,
        }
    }

    fn at_least(name: &str, measured: f64, bound: f64) -> Self {
        RegimeCheck {
            name: name.into(),
            measured,
            predicted: bound,
            tolerance: 0.0,
            pass: measured >= bound,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeOptions {
    /// Speed-fit window as fractions of the final time.
    pub window_fraction: (f64, f64),
    pub fast_tol: f64,
    pub slow_tol: f64,
    /// Margin around the predicted speeds delimiting the plateau region.
    pub epsilon: f64,
    pub plateau_min: f64,
    pub extinction_max: f64,
    /// Bound on `sup u` ahead of `(C + epsilon) t`.
    pub ahead_max: f64,
}

impl Default for RegimeOptions {
    fn default() -> Self {
        RegimeOptions {
            window_fraction: (0.5, 1.0),
            fast_tol: 0.03,
            slow_tol: 0.05,
            epsilon: 0.1,
            plateau_min: 0.95,
            extinction_max: 0.01,
            ahead_max: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub case_tag: RegimeTag,
    pub t_end: f64,
    pub fast_speed: Option<SpeedFit>,
    pub slow_speed: Option<SpeedFit>,
    pub sup_v_right: f64,
    pub plateau_min: Option<f64>,
    pub sup_u_ahead: Option<f64>,
    pub checks: Vec<RegimeCheck>,
    /// False when a check fails (a regime mismatch).
    pub pass: bool,
}

/// Measures the fast `v`-front and slow `u`-front of a scenario-B run and
/// checks them against the predicted spreading regime.
pub fn detect_regimes(
    traj: &Trajectory,
    p: &Params,
    regime: &SpeedRegime,
    opts: &RegimeOptions,
) -> Result<RegimeReport, FrontError> {
    let t_end = traj.observations.last().map_or(0.0, |o| o.t);
    let window = (opts.window_fraction.0 * t_end, opts.window_fraction.1 * t_end);
    let u_tr = track_level_set(traj, Species::U, 0.5, Direction::Rightmost);
    let v_tr = track_level_set(traj, Species::V, 0.5, Direction::Rightmost);
    let last_obs = traj.observations.last().expect("trajectory has observations");
    let mut checks = Vec::new();
    let mut report = RegimeReport {
        case_tag: regime.case_tag,
        t_end,
        fast_speed: None,
        slow_speed: None,
        sup_v_right: last_obs.sup_v_right,
        plateau_min: None,
        sup_u_ahead: None,
        checks: Vec::new(),
        pass: true,
    };
    match regime.case_tag {
        RegimeTag::Degenerate => {}
        RegimeTag::FasterU => {
            let slow = fit_speed(&u_tr, window)?;
            checks.push(RegimeCheck::relative("u-front speed", slow.speed, p.c_u(), opts.fast_tol));
            checks.push(RegimeCheck::at_most(
                "sup v on x >= 0",
                last_obs.sup_v_right,
                opts.extinction_max,
            ));
            report.slow_speed = Some(slow);
        }
        RegimeTag::SlowFrontCStar | RegimeTag::SlowFrontCStarStar => {
            let fast = fit_speed(&v_tr, window)?;
            let slow = fit_speed(&u_tr, window)?;
            checks.push(RegimeCheck::relative("v-front speed", fast.speed, p.c_v(), opts.fast_tol));
            checks.push(RegimeCheck::at_most("v-front KPP bound", fast.speed, p.c_v() + 0.1));
            checks.push(RegimeCheck::relative(
                "u-front speed",
                slow.speed,
                regime.script_c,
                opts.slow_tol,
            ));
            let last = traj.last();
            let t = last.t;
            let lo = (regime.script_c + opts.epsilon) * t;
            let hi = (p.c_v() - opts.epsilon) * t;
            let g = &traj.grid;
            let mut plateau = f64::INFINITY;
            let mut ahead = 0.0f64;
            for i in 0..g.n {
                let x = g.x(i);
                if x >= lo && x <= hi {
                    plateau = plateau.min(last.v[i]);
                }
                if x >= lo {
                    ahead = ahead.max(last.u[i]);
                }
            }
            if plateau.is_finite() {
                checks.push(RegimeCheck::at_least("v plateau between fronts", plateau, opts.plateau_min));
                report.plateau_min = Some(plateau);
            }
            checks.push(RegimeCheck::at_most("sup u ahead of slow front", ahead, opts.ahead_max));
            report.sup_u_ahead = Some(ahead);
            report.fast_speed = Some(fast);
            report.slow_speed = Some(slow);
        }
    }
    report.pass = checks.iter().all(|c| c.pass);
    report.checks = checks;
    Ok(report)
}

/// Where the sup-distance to the wave is taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ConvergenceWindow {
    /// `x >= 0` within the domain.
    RightHalf,
    /// `0 <= x < c0 t`.
    Interior { c0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub t: f64,
    /// Fitted phase: `u(t, x)` is compared with `U(x - c t - shift)`.
    pub shift: f64,
    pub sup_distance: f64,
}

/// Sup over the window of `|u - U| + |v - V|` after aligning the `u = 1/2`
/// crossings, for every stored snapshot.
pub fn profile_convergence(
    traj: &Trajectory,
    w: &WaveProfile,
    c: f64,
    window: ConvergenceWindow,
) -> Result<Vec<ConvergencePoint>, FrontError> {
    let xi_half = w.crossing(0.5).ok_or(FrontError::NoFront)?;
    let eval = WaveEval::new(w);
    let g = &traj.grid;
    let mut out = Vec::with_capacity(traj.snapshots.len());
    for s in &traj.snapshots {
        let x_half = level_crossing(g, &s.u, 0.5, Direction::Rightmost).ok_or(FrontError::NoFront)?;
        let offset = x_half - xi_half;
        let x_hi = match window {
            ConvergenceWindow::RightHalf => g.x_max,
            ConvergenceWindow::Interior { c0 } => c0 * s.t,
        };
        let mut sup = 0.0f64;
        for i in 0..g.n {
            let x = g.x(i);
            if x < 0.0 || x >= x_hi {
                continue;
            }
            let pt = eval.eval(x - offset);
            sup = sup.max((s.u[i] - pt.u).abs() + (s.v[i] - pt.v).abs());
        }
        out.push(ConvergencePoint {
            t: s.t,
            shift: offset - c * s.t,
            sup_distance: sup,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f: impl Fn(f64) -> f64, t0: f64, t1: f64, dt: f64) -> FrontTrace {
        let n = ((t1 - t0) / dt).round() as usize + 1;
        let times: Vec<f64> = (0..n).map(|k| t0 + k as f64 * dt).collect();
        FrontTrace {
            species: Species::U,
            level: 0.5,
            direction: Direction::Rightmost,
            positions: times.iter().map(|&t| Some(f(t))).collect(),
            times,
        }
    }

    #[test]
    fn crossing_of_step_profile() {
        let g = Grid1D::new(0.0, 10.0, 101).unwrap();
        let f: Vec<f64> = g.points().iter().map(|&x| if x <= 5.0 { 1.0 } else { 0.0 }).collect();
        let x = level_crossing(&g, &f, 0.5, Direction::Rightmost).unwrap();
        assert!((x - 5.0).abs() <= g.h);
        assert_eq!(level_crossing(&g, &vec![0.0; 101], 0.5, Direction::Rightmost), None);
    }

    #[test]
    fn crossing_exact_on_piecewise_linear() {
        let g = Grid1D::new(-3.0, 7.0, 51).unwrap();
        let f: Vec<f64> = g
            .points()
            .iter()
            .map(|&x| (1.0 - (x - 1.234) / 2.0).clamp(0.0, 1.0).min(((x + 2.0) / 0.8).max(0.0)))
            .collect();
        let r = level_crossing(&g, &f, 0.25, Direction::Rightmost).unwrap();
        assert!((r - (1.234 + 1.5)).abs() < 1e-12, "{r}");
        let l = level_crossing(&g, &f, 0.25, Direction::Leftmost).unwrap();
        assert!((l - (-2.0 + 0.2)).abs() < 1e-12, "{l}");
    }

    #[test]
    fn linear_trace_speed() {
        let tr = synthetic(|t| 1.3 * t + 2.0, 0.0, 100.0, 1.0);
        let f = fit_speed(&tr, (10.0, 90.0)).unwrap();
        assert!((f.speed - 1.3).abs() < 1e-8 && (f.intercept - 2.0).abs() < 1e-8);
        assert!(f.stderr < 1e-10);
        assert!(matches!(fit_speed(&tr, (10.0, 15.0)), Err(FrontError::BadWindow(..))));
    }

    #[test]
    fn log_corrected_trace_speed_below_two() {
        let tr = synthetic(|t| 2.0 * t - 1.5 * t.ln() + 0.3, 1.0, 2000.0, 1.0);
        let a = fit_speed(&tr, (100.0, 200.0)).unwrap().speed;
        let b = fit_speed(&tr, (1000.0, 1100.0)).unwrap().speed;
        assert!(a < 2.0 && b < 2.0 && b > a);
    }

    #[test]
    fn drift_fit_exact() {
        let tr = synthetic(|t| 2.0 * t - 1.5 * t.ln() + 0.3, 1.0, 500.0, 1.0);
        let f = fit_log_drift(&tr, 2.0, (50.0, 500.0)).unwrap();
        assert!((f.kappa - 1.5).abs() < 1e-8 && (f.offset - 0.3).abs() < 1e-8);
        assert!(f.residual_sup < 1e-8);
        assert!(matches!(fit_log_drift(&tr, 2.0, (10.0, 500.0)), Err(FrontError::BadWindow(..))));
    }

    #[test]
    fn gaps_are_skipped_and_counted() {
        let mut tr = synthetic(|t| t, 0.0, 30.0, 1.0);
        for k in 0..20 {
            tr.positions[k] = None;
        }
        assert!(matches!(
            fit_speed(&tr, (0.0, 30.0)),
            Err(FrontError::InsufficientData { got: 11, .. })
        ));
    }

    #[test]
    fn decay_rate_exact() {
        let t: Vec<f64> = (0..100).map(|k| k as f64 * 0.5).collect();
        let y: Vec<f64> = t.iter().map(|t| 3.0 * (-0.7 * t).exp()).collect();
        let f = fit_decay_rate(&t, &y, (0.0, 50.0), 1e-300).unwrap();
        assert!((f.slope - 0.7).abs() < 1e-12);
    }
}
