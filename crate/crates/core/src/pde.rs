//! Finite-difference integration of the Cauchy problem on a truncated line.
//!
//! Strang splitting: half a reaction step (pointwise RK4), one Crank-Nicolson
//! diffusion step with homogeneous Neumann ends, half a reaction step. The
//! first two diffusion steps are replaced by pairs of backward-Euler half
//! steps to damp the stiff modes of rough initial data.

use crate::front::{level_crossing, Direction, Species};
use crate::linalg::Tridiagonal;
use crate::model::{reaction_terms, Params};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Samples above this magnitude are treated as a numerical instability.
pub const BLOWUP_BOUND: f64 = 10.0;
const DAMPED_STEPS: u64 = 2;
/// Magnitudes below this are set to zero; far tails otherwise decay into
/// subnormal numbers, which are very slow to compute with.
const FLUSH_BELOW: f64 = 1e-200;

#[inline]
fn flush(x: f64) -> f64 {
    if x.abs() < FLUSH_BELOW {
        0.0
    } else {
        x
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PdeError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("support [{lo}, {hi}] leaves less than {margin} to the domain edge")]
    SupportOutOfDomain { lo: f64, hi: f64, margin: f64 },
    #[error("initial u vanishes identically")]
    ZeroInitialData,
    #[error("blow-up at t = {t}, x = {x}: value {value}")]
    Blowup { t: f64, x: f64, value: f64 },
}

/// Uniform vertex-centred grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub h: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self, PdeError> {
        if n < 3 || !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(PdeError::InvalidGrid(format!(
                "need n >= 3 and x_min < x_max, got n = {n}, [{x_min}, {x_max}]"
            )));
        }
        Ok(Grid1D {
            x_min,
            x_max,
            h: (x_max - x_min) / (n - 1) as f64,
            n,
        })
    }

    /// Grid starting at `x_min` with spacing `h`, extended to cover `x_max`.
    pub fn with_spacing(x_min: f64, x_max: f64, h: f64) -> Result<Self, PdeError> {
        if !(h > 0.0) {
            return Err(PdeError::InvalidGrid(format!("spacing {h}")));
        }
        let cells = ((x_max - x_min) / h).ceil().max(2.0) as usize;
        Ok(Grid1D {
            x_min,
            x_max: x_min + cells as f64 * h,
            h,
            n: cells + 1,
        })
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.h
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// Linear interpolation of nodal values `f` at `x`; `None` outside.
    pub fn interpolate(&self, f: &[f64], x: f64) -> Option<f64> {
        if x < self.x_min || x > self.x_max {
            return None;
        }
        let s = (x - self.x_min) / self.h;
        let i = (s.floor() as usize).min(self.n - 2);
        let t = s - i as f64;
        Some((1.0 - t) * f[i] + t * f[i + 1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl FieldState {
    pub fn constant(grid: &Grid1D, u: f64, v: f64) -> Self {
        FieldState {
            t: 0.0,
            u: vec![u; grid.n],
            v: vec![v; grid.n],
        }
    }

    pub fn field(&self, s: Species) -> &[f64] {
        match s {
            Species::U => &self.u,
            Species::V => &self.v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    /// `u0` compactly supported, `v0` bounded below by a positive constant.
    A,
    /// Both components compactly supported.
    B,
}

/// Shape of the smoothed-indicator initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialSpec {
    pub scenario: Scenario,
    pub u_support: (f64, f64),
    pub u_amplitude: f64,
    /// Support of the compact part of `v0` (required for scenario B).
    pub v_support: Option<(f64, f64)>,
    pub v_amplitude: f64,
    /// Scenario A: `v0 >= v_floor` everywhere.
    pub v_floor: f64,
    /// Added to `u0` before capping at 1.
    pub u_lift: f64,
}

impl InitialSpec {
    pub fn scenario_a(half_width: f64) -> Self {
        InitialSpec {
            scenario: Scenario::A,
            u_support: (-half_width, half_width),
            u_amplitude: 1.0,
            v_support: None,
            v_amplitude: 1.0,
            v_floor: 1.0,
            u_lift: 0.0,
        }
    }

    pub fn scenario_b(half_width: f64) -> Self {
        InitialSpec {
            scenario: Scenario::B,
            u_support: (-half_width, half_width),
            u_amplitude: 1.0,
            v_support: Some((-half_width, half_width)),
            v_amplitude: 1.0,
            v_floor: 0.0,
            u_lift: 0.0,
        }
    }

    fn right_edge(&self) -> f64 {
        let mut r = self.u_support.1;
        if let Some(s) = self.v_support {
            r = r.max(s.1);
        }
        r
    }

    fn left_edge(&self) -> f64 {
        let mut l = self.u_support.0;
        if let Some(s) = self.v_support {
            l = l.min(s.0);
        }
        l
    }
}

/// Indicator of `[l, r]` with linear ramps of width `2h` outside the interval.
pub fn smoothed_indicator(x: f64, (l, r): (f64, f64), h: f64) -> f64 {
    (1.0 + (x - l).min(r - x) / (2.0 * h)).clamp(0.0, 1.0)
}

/// Builds scenario-A or scenario-B data. With `half_line` the left boundary
/// is a symmetry axis and only the right margin is checked.
pub fn make_initial_data(spec: &InitialSpec, grid: &Grid1D, half_line: bool) -> Result<FieldState, PdeError> {
    let margin = 0.2 * grid.length();
    let (lo, hi) = (spec.left_edge(), spec.right_edge());
    if grid.x_max - hi < margin || (!half_line && lo - grid.x_min < margin) {
        return Err(PdeError::SupportOutOfDomain { lo, hi, margin });
    }
    for (name, val) in [
        ("u_amplitude", spec.u_amplitude),
        ("v_amplitude", spec.v_amplitude),
        ("v_floor", spec.v_floor),
    ] {
        if !(0.0..=1.0).contains(&val) {
            return Err(PdeError::InvalidConfig(format!("{name} = {val} not in [0, 1]")));
        }
    }
    match spec.scenario {
        Scenario::A if !(spec.v_floor > 0.0) => {
            return Err(PdeError::InvalidConfig("scenario A needs v_floor > 0".into()))
        }
        Scenario::B if spec.v_support.is_none() || spec.v_amplitude <= 0.0 => {
            return Err(PdeError::InvalidConfig(
                "scenario B needs a nonzero compactly supported v0".into(),
            ))
        }
        _ => {}
    }
    let mut u = Vec::with_capacity(grid.n);
    let mut v = Vec::with_capacity(grid.n);
    for i in 0..grid.n {
        let x = grid.x(i);
        let ui = spec.u_amplitude * smoothed_indicator(x, spec.u_support, grid.h);
        let ui = if ui > 0.0 { (ui + spec.u_lift).min(1.0) } else { 0.0 };
        u.push(ui);
        let vc = spec
            .v_support
            .map_or(0.0, |s| spec.v_amplitude * smoothed_indicator(x, s, grid.h));
        v.push(match spec.scenario {
            Scenario::A => vc.max(spec.v_floor),
            Scenario::B => vc,
        });
    }
    if u.iter().all(|&x| x == 0.0) {
        return Err(PdeError::ZeroInitialData);
    }
    Ok(FieldState { t: 0.0, u, v })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialCondition {
    Smoothed(InitialSpec),
    Explicit(FieldState),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    /// Homogeneous Neumann at both ends (ghost-node reflection).
    Neumann,
}

/// A level set recorded online at every snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackSpec {
    pub species: Species,
    pub level: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: Params,
    pub grid: Grid1D,
    pub dt: f64,
    pub t_end: f64,
    /// Steps between recorded observables.
    pub snapshot_stride: usize,
    /// Full fields are kept every `field_stride` snapshots (0 keeps only the
    /// first and last).
    pub field_stride: usize,
    pub ic: InitialCondition,
    pub boundary: Boundary,
    /// The left end is a symmetry axis of even data.
    pub half_line: bool,
    pub track: Vec<TrackSpec>,
}

/// Default time step, tightened for fast diffusion or fast growth of `v`.
pub fn default_dt(p: &Params) -> f64 {
    let m = p.d.max(p.r);
    if m > 2.0 {
        0.05 * 2.0 / m
    } else {
        0.05
    }
}

/// Right end large enough that no front reaches it before `t_end`.
pub fn auto_x_max(p: &Params, support_right: f64, t_end: f64) -> f64 {
    support_right + (p.c_u().max(p.c_v()) + 1.0) * t_end + 50.0
}

impl SimConfig {
    /// Standard run: `h = 0.1`, default `dt`, auto-sized half line, unit
    /// snapshot interval, `u` and `v` fronts at level 1/2.
    pub fn standard(params: Params, spec: InitialSpec, t_end: f64) -> Result<Self, PdeError> {
        let h = 0.1;
        let dt = default_dt(&params);
        let x_max = auto_x_max(&params, spec.right_edge(), t_end);
        let grid = Grid1D::with_spacing(0.0, x_max, h)?;
        let stride = (1.0 / dt).round().max(1.0) as usize;
        let cfg = SimConfig {
            params,
            grid,
            dt,
            t_end,
            snapshot_stride: stride,
            field_stride: 10,
            ic: InitialCondition::Smoothed(spec),
            boundary: Boundary::Neumann,
            half_line: true,
            track: vec![
                TrackSpec {
                    species: Species::U,
                    level: 0.5,
                    direction: Direction::Rightmost,
                },
                TrackSpec {
                    species: Species::V,
                    level: 0.5,
                    direction: Direction::Rightmost,
                },
            ],
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), PdeError> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(PdeError::InvalidConfig(format!("dt = {}", self.dt)));
        }
        // Crank-Nicolson is unconditionally stable; RK4 on the reaction is
        // kept well inside its stability interval.
        let rate = 1.0f64.max(self.params.r) * (1.0 + self.params.a.max(self.params.b));
        if self.dt * rate > 1.0 {
            return Err(PdeError::InvalidConfig(format!(
                "dt = {} too large for reaction rate {rate}",
                self.dt
            )));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(PdeError::InvalidConfig(format!("t_end = {}", self.t_end)));
        }
        if self.snapshot_stride == 0 {
            return Err(PdeError::InvalidConfig("snapshot_stride = 0".into()));
        }
        for t in &self.track {
            if !(t.level > 0.0 && t.level < 1.0) {
                return Err(PdeError::InvalidConfig(format!("level {} not in (0, 1)", t.level)));
            }
        }
        if let InitialCondition::Explicit(s) = &self.ic {
            if s.u.len() != self.grid.n || s.v.len() != self.grid.n {
                return Err(PdeError::InvalidConfig("initial state does not match grid".into()));
            }
        }
        Ok(())
    }

    pub fn initial_state(&self) -> Result<FieldState, PdeError> {
        match &self.ic {
            InitialCondition::Smoothed(spec) => make_initial_data(spec, &self.grid, self.half_line),
            InitialCondition::Explicit(s) => Ok(s.clone()),
        }
    }

    pub fn n_steps(&self) -> u64 {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as u64
    }
}

/// Precomputed diffusion solves for one configuration.
#[derive(Debug, Clone)]
pub struct Stepper {
    params: Params,
    dt: f64,
    sigma_u: f64,
    sigma_v: f64,
    lhs_u: Tridiagonal,
    lhs_v: Tridiagonal,
    x_min: f64,
    h: f64,
    steps: u64,
    t0: f64,
    scratch: Vec<f64>,
}

fn diffusion_lhs(n: usize, sigma: f64) -> Tridiagonal {
    // I - (sigma/2) D2 with reflected ghost nodes.
    let mut lower = vec![-0.5 * sigma; n];
    let diag = vec![1.0 + sigma; n];
    let mut upper = vec![-0.5 * sigma; n];
    lower[0] = 0.0;
    upper[0] = -sigma;
    lower[n - 1] = -sigma;
    upper[n - 1] = 0.0;
    Tridiagonal::new(&lower, &diag, &upper)
}

/// `out = (I + (sigma/2) D2) f`.
fn explicit_half(f: &[f64], sigma: f64, out: &mut [f64]) {
    let n = f.len();
    let s = 0.5 * sigma;
    out[0] = f[0] + sigma * (f[1] - f[0]);
    for i in 1..n - 1 {
        out[i] = f[i] + s * (f[i - 1] - 2.0 * f[i] + f[i + 1]);
    }
    out[n - 1] = f[n - 1] + sigma * (f[n - 2] - f[n - 1]);
}

impl Stepper {
    pub fn new(cfg: &SimConfig) -> Result<Self, PdeError> {
        cfg.validate()?;
        let h2 = cfg.grid.h * cfg.grid.h;
        let sigma_u = cfg.dt / h2;
        let sigma_v = cfg.params.d * cfg.dt / h2;
        Ok(Stepper {
            params: cfg.params,
            dt: cfg.dt,
            sigma_u,
            sigma_v,
            lhs_u: diffusion_lhs(cfg.grid.n, sigma_u),
            lhs_v: diffusion_lhs(cfg.grid.n, sigma_v),
            x_min: cfg.grid.x_min,
            h: cfg.grid.h,
            steps: 0,
            t0: 0.0,
            scratch: vec![0.0; cfg.grid.n],
        })
    }

    /// Pointwise RK4 for the reaction ODEs over `tau`.
    pub fn react(&self, s: &mut FieldState, tau: f64) {
        let p = &self.params;
        for (u, v) in s.u.iter_mut().zip(s.v.iter_mut()) {
            let (u0, v0) = (*u, *v);
            let (k1u, k1v) = reaction_terms(u0, v0, p);
            let (k2u, k2v) = reaction_terms(u0 + 0.5 * tau * k1u, v0 + 0.5 * tau * k1v, p);
            let (k3u, k3v) = reaction_terms(u0 + 0.5 * tau * k2u, v0 + 0.5 * tau * k2v, p);
            let (k4u, k4v) = reaction_terms(u0 + tau * k3u, v0 + tau * k3v, p);
            *u = flush(u0 + tau / 6.0 * (k1u + 2.0 * (k2u + k3u) + k4u));
            *v = flush(v0 + tau / 6.0 * (k1v + 2.0 * (k2v + k3v) + k4v));
        }
    }

    /// One diffusion step of length `dt`: Crank-Nicolson, or two
    /// backward-Euler half steps when `damped`.
    pub fn diffuse(&mut self, s: &mut FieldState, damped: bool) {
        if damped {
            for _ in 0..2 {
                self.lhs_u.solve_flushed(&mut s.u, FLUSH_BELOW);
                self.lhs_v.solve_flushed(&mut s.v, FLUSH_BELOW);
            }
        } else {
            explicit_half(&s.u, self.sigma_u, &mut self.scratch);
            std::mem::swap(&mut s.u, &mut self.scratch);
            self.lhs_u.solve_flushed(&mut s.u, FLUSH_BELOW);
            explicit_half(&s.v, self.sigma_v, &mut self.scratch);
            std::mem::swap(&mut s.v, &mut self.scratch);
            self.lhs_v.solve_flushed(&mut s.v, FLUSH_BELOW);
        }
    }

    /// Advances `s` by one step; the step counter sets the damped start.
    pub fn step(&mut self, s: &mut FieldState) -> Result<(), PdeError> {
        if self.steps == 0 {
            self.t0 = s.t;
        }
        let half = 0.5 * self.dt;
        self.react(s, half);
        self.diffuse(s, self.steps < DAMPED_STEPS);
        self.react(s, half);
        self.steps += 1;
        s.t = self.t0 + self.steps as f64 * self.dt;
        self.check(s)
    }

    fn check(&self, s: &FieldState) -> Result<(), PdeError> {
        for (i, (&u, &v)) in s.u.iter().zip(&s.v).enumerate() {
            let bad = if !(u.abs() <= BLOWUP_BOUND) {
                Some(u)
            } else if !(v.abs() <= BLOWUP_BOUND) {
                Some(v)
            } else {
                None
            };
            if let Some(value) = bad {
                return Err(PdeError::Blowup {
                    t: s.t,
                    x: self.x_min + i as f64 * self.h,
                    value,
                });
            }
        }
        Ok(())
    }
}

/// One step from `s` with a fresh stepper (damped start).
pub fn step(s: &FieldState, cfg: &SimConfig) -> Result<FieldState, PdeError> {
    let mut st = Stepper::new(cfg)?;
    let mut out = s.clone();
    st.step(&mut out)?;
    Ok(out)
}

/// Observables recorded at every snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub t: f64,
    pub sup_u: f64,
    pub sup_v: f64,
    pub min_u: f64,
    pub min_v: f64,
    /// `sup v` over `x >= 0`.
    pub sup_v_right: f64,
    pub u_at_0: Option<f64>,
    pub v_at_0: Option<f64>,
    /// One entry per [`TrackSpec`] of the configuration.
    pub fronts: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SimWarning {
    FrontNearBoundary {
        t: f64,
        species: Species,
        position: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub grid: Grid1D,
    pub params: Params,
    pub dt: f64,
    pub track: Vec<TrackSpec>,
    pub observations: Vec<Observation>,
    /// Stored full fields, in time order; always contains the first and last.
    pub snapshots: Vec<FieldState>,
    pub warnings: Vec<SimWarning>,
}

impl Trajectory {
    pub fn last(&self) -> &FieldState {
        self.snapshots.last().expect("trajectory has the initial state")
    }

    pub fn times(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.t).collect()
    }

    /// Index into `track` of a recorded level set.
    pub fn tracked(&self, species: Species, level: f64, direction: Direction) -> Option<usize> {
        self.track
            .iter()
            .position(|t| t.species == species && t.level == level && t.direction == direction)
    }

    /// Snapshot nearest to `t`.
    pub fn snapshot_near(&self, t: f64) -> &FieldState {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .expect("nonempty")
    }
}

fn observe(s: &FieldState, grid: &Grid1D, track: &[TrackSpec]) -> Observation {
    let fold = |f: &[f64]| {
        f.iter()
            .fold((f64::MIN, f64::MAX), |(hi, lo), &x| (hi.max(x), lo.min(x)))
    };
    let (sup_u, min_u) = fold(&s.u);
    let (sup_v, min_v) = fold(&s.v);
    let first_right = if grid.x_min >= 0.0 {
        0
    } else {
        (((-grid.x_min) / grid.h).ceil() as usize).min(grid.n)
    };
    let sup_v_right = s.v[first_right..].iter().copied().fold(0.0f64, f64::max);
    let fronts = track
        .iter()
        .map(|tr| level_crossing(grid, s.field(tr.species), tr.level, tr.direction))
        .collect();
    Observation {
        t: s.t,
        sup_u,
        sup_v,
        min_u,
        min_v,
        sup_v_right,
        u_at_0: grid.interpolate(&s.u, 0.0),
        v_at_0: grid.interpolate(&s.v, 0.0),
        fronts,
    }
}

/// Integrates `cfg` from its initial condition up to `t_end`.
pub fn run(cfg: &SimConfig) -> Result<Trajectory, PdeError> {
    let s = cfg.initial_state()?;
    run_from(cfg, s)
}

/// Integrates from an explicit state (which need not lie in `[0,1]`).
pub fn run_from(cfg: &SimConfig, mut s: FieldState) -> Result<Trajectory, PdeError> {
    cfg.validate()?;
    if s.u.len() != cfg.grid.n || s.v.len() != cfg.grid.n {
        return Err(PdeError::InvalidConfig("state does not match grid".into()));
    }
    let mut stepper = Stepper::new(cfg)?;
    stepper.check(&s)?;
    let grid = cfg.grid;
    let n_steps = cfg.n_steps();
    let edge = 0.1 * grid.length();
    let mut warned = vec![false; cfg.track.len()];
    let mut traj = Trajectory {
        grid,
        params: cfg.params,
        dt: cfg.dt,
        track: cfg.track.clone(),
        observations: vec![observe(&s, &grid, &cfg.track)],
        snapshots: vec![s.clone()],
        warnings: Vec::new(),
    };
    let mut snap_count = 0usize;
    for k in 1..=n_steps {
        stepper.step(&mut s)?;
        let at_end = k == n_steps;
        if k % cfg.snapshot_stride as u64 == 0 || at_end {
            let obs = observe(&s, &grid, &cfg.track);
            for (j, pos) in obs.fronts.iter().enumerate() {
                if let Some(x) = *pos {
                    let near_left = !cfg.half_line && x - grid.x_min < edge;
                    if !warned[j] && (grid.x_max - x < edge || near_left) {
                        warned[j] = true;
                        traj.warnings.push(SimWarning::FrontNearBoundary {
                            t: s.t,
                            species: cfg.track[j].species,
                            position: x,
                        });
                    }
                }
            }
            traj.observations.push(obs);
            snap_count += 1;
            let keep = cfg.field_stride > 0 && snap_count % cfg.field_stride == 0;
            if keep || at_end {
                traj.snapshots.push(s.clone());
            }
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Anchor {
    /// `xi = x - c t`.
    Origin,
    /// Additionally shifted so that the rightmost `u = level` crossing sits at `xi = 0`.
    Front { level: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComovingProfile {
    pub xi: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Total shift applied: `xi = x - c t - shift`.
    pub shift: f64,
}

/// Re-expresses a state in the frame moving at speed `c`, resampled onto a
/// uniform `xi`-grid with the spacing of `grid` and covering the domain.
pub fn comoving_extract(s: &FieldState, grid: &Grid1D, c: f64, anchor: Anchor) -> ComovingProfile {
    let mut shift = c * s.t;
    if let Anchor::Front { level } = anchor {
        if let Some(x) = level_crossing(grid, &s.u, level, Direction::Rightmost) {
            shift = x;
        }
    }
    let xi0 = grid.x_min - shift;
    let mut xi = Vec::with_capacity(grid.n);
    let mut u = Vec::with_capacity(grid.n);
    let mut v = Vec::with_capacity(grid.n);
    for i in 0..grid.n {
        let z = xi0 + i as f64 * grid.h;
        let x = z + shift;
        let x = x.clamp(grid.x_min, grid.x_max);
        xi.push(z);
        u.push(grid.interpolate(&s.u, x).unwrap_or(f64::NAN));
        v.push(grid.interpolate(&s.v, x).unwrap_or(f64::NAN));
    }
    ComovingProfile { xi, u, v, shift }
}

/// Samples `s` at `x = xi + shift` for the given `xi` values; `NaN` outside
/// the domain.
pub fn comoving_resample(s: &FieldState, grid: &Grid1D, shift: f64, xi: &[f64]) -> ComovingProfile {
    let (u, v) = xi
        .iter()
        .map(|&z| {
            let x = z + shift;
            (
                grid.interpolate(&s.u, x).unwrap_or(f64::NAN),
                grid.interpolate(&s.v, x).unwrap_or(f64::NAN),
            )
        })
        .unzip();
    ComovingProfile {
        xi: xi.to_vec(),
        u,
        v,
        shift,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> Params {
        Params::new(0.5, 1.5, 1.0, 1.0).unwrap()
    }

    fn small_cfg(p: Params, n: usize, dt: f64, t_end: f64, ic: InitialCondition) -> SimConfig {
        let grid = Grid1D::new(0.0, (n - 1) as f64 * 0.1, n).unwrap();
        SimConfig {
            params: p,
            grid,
            dt,
            t_end,
            snapshot_stride: 1,
            field_stride: 1,
            ic,
            boundary: Boundary::Neumann,
            half_line: true,
            track: vec![],
        }
    }

    #[test]
    fn equilibria_are_preserved() {
        for (u0, v0) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)] {
            let g = Grid1D::new(0.0, 10.0, 101).unwrap();
            let s = FieldState::constant(&g, u0, v0);
            let cfg = small_cfg(params(), 101, 0.05, 5.0, InitialCondition::Explicit(s));
            let tr = run(&cfg).unwrap();
            let last = tr.last();
            assert!((last.t - 5.0).abs() < 1e-12);
            for i in 0..g.n {
                assert!((last.u[i] - u0).abs() < 1e-13 && (last.v[i] - v0).abs() < 1e-13);
            }
        }
    }

    fn logistic_error(dt: f64) -> f64 {
        let g = Grid1D::new(0.0, 1.0, 11).unwrap();
        let u0 = 0.1;
        let s = FieldState::constant(&g, u0, 0.0);
        let cfg = small_cfg(params(), 11, dt, 4.0, InitialCondition::Explicit(s));
        let tr = run(&cfg).unwrap();
        let t: f64 = 4.0;
        let exact = u0 * t.exp() / (1.0 + u0 * (t.exp() - 1.0));
        tr.last().u.iter().fold(0.0f64, |m, &u| m.max((u - exact).abs()))
    }

    #[test]
    fn logistic_oracle() {
        let e1 = logistic_error(0.1);
        let e2 = logistic_error(0.05);
        assert!(e1 < 0.1 * 0.1, "{e1}");
        assert!(e1 / e2 > 3.5, "{e1} {e2}");
    }

    #[test]
    fn splitting_is_second_order_in_time() {
        let p = Params::new(0.5, 1.5, 2.0, 1.0).unwrap();
        let n = 201;
        let g = Grid1D::new(0.0, 20.0, n).unwrap();
        let s = FieldState {
            t: 0.0,
            u: g.points().iter().map(|x| 0.8 * (-(x - 8.0).powi(2) / 4.0).exp()).collect(),
            v: g.points().iter().map(|x| 0.6 * (-(x - 12.0).powi(2) / 4.0).exp()).collect(),
        };
        let solve = |dt: f64| {
            let mut cfg = small_cfg(p, n, dt, 2.0, InitialCondition::Explicit(s.clone()));
            cfg.snapshot_stride = 1000;
            let mut st = Stepper::new(&cfg).unwrap();
            // Undamped scheme throughout for a clean order measurement.
            st.steps = DAMPED_STEPS;
            let mut x = s.clone();
            for _ in 0..cfg.n_steps() {
                st.step(&mut x).unwrap();
            }
            x
        };
        let r = solve(0.0125);
        let err = |x: &FieldState| {
            x.u.iter()
                .zip(&r.u)
                .chain(x.v.iter().zip(&r.v))
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        };
        let e1 = err(&solve(0.1));
        let e2 = err(&solve(0.05));
        let ratio = e1 / e2;
        assert!(ratio > 3.5 && ratio < 5.0, "{e1} {e2} {ratio}");
    }

    fn gaussian_error(h: f64) -> f64 {
        // Heat kernel started at time t0 on [0, 20] (even about 0).
        let t0: f64 = 1.0;
        let t_end: f64 = 2.0;
        let n = (20.0 / h).round() as usize + 1;
        let g = Grid1D::new(0.0, 20.0, n).unwrap();
        let exact = |x: f64, t: f64| (t0 / (t0 + t)).sqrt() * (-x * x / (4.0 * (t0 + t))).exp();
        let s = FieldState {
            t: 0.0,
            u: g.points().iter().map(|&x| exact(x, 0.0)).collect(),
            v: vec![0.0; n],
        };
        let dt = h;
        let mut cfg = small_cfg(params(), n, dt, t_end, InitialCondition::Explicit(s.clone()));
        cfg.grid = g;
        let mut st = Stepper::new(&cfg).unwrap();
        let mut x = s;
        for _ in 0..cfg.n_steps() {
            st.diffuse(&mut x, false);
        }
        g.points()
            .iter()
            .zip(&x.u)
            .fold(0.0f64, |m, (&xx, &u)| m.max((u - exact(xx, t_end)).abs()))
    }

    #[test]
    fn diffusion_is_second_order_in_space() {
        let e1 = gaussian_error(0.2);
        let e2 = gaussian_error(0.1);
        let ratio = e1 / e2;
        assert!(ratio > 3.5 && ratio < 4.5, "{e1} {e2} {ratio}");
    }

    #[test]
    fn zero_end_time_keeps_initial_state() {
        let p = params();
        let cfg = SimConfig::standard(p, InitialSpec::scenario_a(5.0), 0.0).unwrap();
        let tr = run(&cfg).unwrap();
        assert_eq!(tr.snapshots.len(), 1);
        assert_eq!(tr.observations.len(), 1);
        assert_eq!(tr.snapshots[0], cfg.initial_state().unwrap());
    }

    #[test]
    fn initial_data_scenarios() {
        let g = Grid1D::new(-50.0, 50.0, 1001).unwrap();
        let a = make_initial_data(&InitialSpec::scenario_a(5.0), &g, false).unwrap();
        assert!(a.v.iter().all(|&v| v == 1.0));
        assert!(a.u.iter().all(|&u| (0.0..=1.0).contains(&u)));
        assert_eq!(a.u[500], 1.0);
        assert_eq!(a.u[0], 0.0);
        let b = make_initial_data(&InitialSpec::scenario_b(5.0), &g, false).unwrap();
        assert_eq!(b.v[500], 1.0);
        assert_eq!(b.v[0], 0.0);

        let mut zero = InitialSpec::scenario_a(5.0);
        zero.u_amplitude = 0.0;
        assert_eq!(make_initial_data(&zero, &g, false), Err(PdeError::ZeroInitialData));
        let wide = InitialSpec::scenario_a(45.0);
        assert!(matches!(
            make_initial_data(&wide, &g, false),
            Err(PdeError::SupportOutOfDomain { .. })
        ));
    }

    #[test]
    fn blowup_is_reported() {
        let g = Grid1D::new(0.0, 1.0, 11).unwrap();
        let s = FieldState::constant(&g, 0.0, 0.0);
        let mut bad = s.clone();
        bad.u[3] = 20.0;
        let cfg = small_cfg(params(), 11, 0.05, 1.0, InitialCondition::Explicit(s));
        assert!(matches!(run_from(&cfg, bad), Err(PdeError::Blowup { .. })));
    }

    #[test]
    fn runs_are_bit_identical() {
        let cfg = SimConfig::standard(params(), InitialSpec::scenario_b(5.0), 10.0).unwrap();
        assert_eq!(run(&cfg).unwrap(), run(&cfg).unwrap());
    }

    #[test]
    fn comoving_identity_cases() {
        let g = Grid1D::new(0.0, 10.0, 101).unwrap();
        let s = FieldState {
            t: 3.0,
            u: g.points().iter().map(|x| (-x).exp()).collect(),
            v: g.points().iter().map(|x| x / 10.0).collect(),
        };
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12);
        let p = comoving_extract(&s, &g, 0.0, Anchor::Origin);
        assert!(close(&p.u, &s.u) && close(&p.v, &s.v));
        assert_eq!(p.xi, g.points());
        let mut s0 = s.clone();
        s0.t = 0.0;
        let p = comoving_extract(&s0, &g, 1.7, Anchor::Origin);
        assert!(close(&p.u, &s.u));
        let p = comoving_extract(&s, &g, 1.0, Anchor::Origin);
        assert!((p.xi[0] + 3.0).abs() < 1e-12);
        assert!((p.u[40] - s.u[40]).abs() < 1e-12);
        let xi = [-3.0, -2.95, 0.0];
        let r = comoving_resample(&s, &g, p.shift, &xi);
        assert!((r.u[0] - s.u[0]).abs() < 1e-12);
        assert!((r.u[1] - 0.5 * (s.u[0] + s.u[1])).abs() < 1e-12);
        assert!((r.v[2] - s.v[30]).abs() < 1e-12);
    }
}
