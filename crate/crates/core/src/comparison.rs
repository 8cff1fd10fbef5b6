//! Explicit sub- and super-solutions built from the minimal wave, checks of
//! their differential inequalities, and comparison orderings on simulations.
//!
//! Sub-solution (`kind = Sub`):
//! ```text
//! u = U(x - c t + z(t)) - P(t) min{W, 1},   v = V(x - c t + z(t)) + Q(t)
//! ```
//! Super-solution (`kind = Super`):
//! ```text
//! u = U(x - c t - z(t)) + P(t) min{W, 1},   v = V(x - c t - z(t)) - Q(t)
//! ```
//! with `z = zeta0 - e^{-tau t}`, `P = p e^{-mu t}`, `Q = q e^{-mu t}` and
//! `W = e^{-alpha (x - c t + x0)}`. Mirrored variants are evaluated at `-x`.

use crate::front::{ConvergencePoint, Species};
use crate::model::{reaction_terms, spectral_exponents, ModelError, Params};
use crate::pde::{PdeError, SimConfig, Stepper, Trajectory};
use crate::wave::{WaveError, WaveEval, WaveProfile};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Candidate values of `x0 - zeta0`, tried in order.
pub const TAIL_ANCHORS: [f64; 4] = [10.0, 20.0, 40.0, 80.0];
/// First activation time of the doubling search.
pub const T_START: f64 = 10.0;
/// Activation times beyond this are reported as failures.
pub const T_LIMIT: f64 = 5120.0;
/// Largest time shift tried by [`check_sandwich`].
pub const MAX_SHIFT: f64 = 200.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComparisonError {
    #[error("invalid sub/super specification: {0}")]
    SpecInvalid(String),
    #[error("no admissible parameters: {binding}")]
    Infeasible { binding: String },
    #[error("front is not pushed: c* = {c_star} <= {linear}")]
    NotPushed { c_star: f64, linear: f64 },
    #[error("no time shift in [0, {max_shift}] orders the {side} pair; best {best_shift} with violation {violation:e} at (t, x) = {worst_at:?}")]
    NoShiftFound {
        side: String,
        max_shift: f64,
        best_shift: f64,
        violation: f64,
        worst_at: (f64, f64),
    },
    #[error("ordering violated at t = {t}, x = {x}: {species:?} off by {amount:e}")]
    OrderingViolated {
        t: f64,
        x: f64,
        species: Species,
        amount: f64,
    },
    #[error("configurations are not comparable: {0}")]
    Incomparable(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Wave(#[from] WaveError),
    #[error(transparent)]
    Pde(#[from] PdeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairKind {
    Sub,
    Super,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubSuperSpec {
    pub alpha: f64,
    pub mu: f64,
    pub tau: f64,
    pub p: f64,
    pub q: f64,
    pub zeta0: f64,
    pub x0: f64,
    pub kind: PairKind,
    pub mirrored: bool,
}

impl SubSuperSpec {
    /// Perturbation-free pair with frozen phase: the wave itself.
    pub fn exact_wave(p: &Params, c: f64, kind: PairKind) -> Result<Self, ComparisonError> {
        let s = spectral_exponents(c, p)?;
        Ok(SubSuperSpec {
            alpha: -0.5 * (s.lambda_u_plus + s.lambda_u_minus),
            mu: 0.5 * p.mu_bound(),
            tau: 0.0,
            p: 0.0,
            q: 0.0,
            zeta0: 1.0,
            x0: 11.0,
            kind,
            mirrored: false,
        })
    }

    /// Checks conditions (1)-(2) on the exponents and the signs of the rest.
    pub fn validate(&self, params: &Params, c: f64) -> Result<(), ComparisonError> {
        let s = spectral_exponents(c, params)?;
        let (lo, hi) = (-s.lambda_u_plus, -s.lambda_u_minus);
        let bad = |m: String| Err(ComparisonError::SpecInvalid(m));
        if !(self.alpha > lo && self.alpha < hi) {
            return bad(format!("alpha = {} not in ({lo}, {hi})", self.alpha));
        }
        let mb = params.mu_bound();
        if !(self.tau >= 0.0 && self.tau < self.mu && self.mu < mb) {
            return bad(format!(
                "need 0 <= tau < mu < {mb}, got tau = {}, mu = {}",
                self.tau, self.mu
            ));
        }
        if !(self.p >= 0.0 && self.q >= 0.0) {
            return bad(format!("negative amplitudes p = {}, q = {}", self.p, self.q));
        }
        if !(self.x0 - self.zeta0 > 0.0) {
            return bad(format!("x0 - zeta0 = {} must be positive", self.x0 - self.zeta0));
        }
        Ok(())
    }

    pub fn tail_anchor(&self) -> f64 {
        self.x0 - self.zeta0
    }

    pub fn mirror(mut self) -> Self {
        self.mirrored = !self.mirrored;
        self
    }
}

/// Branch of `min{W, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// `W` (right of the kink, where `W <= 1`).
    Tail,
    /// `1` (left of the kink).
    Flat,
}

/// An evaluable sub- or super-solution pair.
#[derive(Debug, Clone)]
pub struct FieldPair {
    pub spec: SubSuperSpec,
    pub params: Params,
    pub c: f64,
    wave: WaveEval,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub n1: f64,
    pub n2: f64,
}

fn build(p: &Params, w: &WaveProfile, s: &SubSuperSpec, kind: PairKind) -> Result<FieldPair, ComparisonError> {
    if s.kind != kind {
        return Err(ComparisonError::SpecInvalid(format!(
            "expected a {kind:?} spec, got {:?}",
            s.kind
        )));
    }
    s.validate(p, w.c)?;
    Ok(FieldPair {
        spec: *s,
        params: *p,
        c: w.c,
        wave: WaveEval::new(w),
    })
}

/// `(u_, v^)` below the solution.
pub fn build_sub_pair(p: &Params, w: &WaveProfile, s: &SubSuperSpec) -> Result<FieldPair, ComparisonError> {
    build(p, w, s, PairKind::Sub)
}

/// `(u^, v_)` above the solution.
pub fn build_super_pair(p: &Params, w: &WaveProfile, s: &SubSuperSpec) -> Result<FieldPair, ComparisonError> {
    build(p, w, s, PairKind::Super)
}

impl FieldPair {
    fn sign(&self) -> f64 {
        match self.spec.kind {
            PairKind::Sub => 1.0,
            PairKind::Super => -1.0,
        }
    }

    fn local_x(&self, x: f64) -> f64 {
        if self.spec.mirrored {
            -x
        } else {
            x
        }
    }

    pub fn zeta(&self, t: f64) -> f64 {
        self.spec.zeta0 - (-self.spec.tau * t).exp()
    }

    /// Wave coordinate at `(t, x)` (unmirrored `x`).
    fn xi(&self, t: f64, x: f64) -> f64 {
        x - self.c * t + self.sign() * self.zeta(t)
    }

    /// Kink location `Gamma(t)` in the unmirrored frame.
    pub fn kink(&self, t: f64) -> f64 {
        self.c * t - self.spec.x0
    }

    fn w(&self, t: f64, x: f64) -> f64 {
        (-self.spec.alpha * (x - self.c * t + self.spec.x0)).exp()
    }

    /// Branch of `min{W, 1}` that is active at `(t, x)`.
    pub fn branch(&self, t: f64, x: f64) -> Branch {
        if self.local_x(x) >= self.kink(t) {
            Branch::Tail
        } else {
            Branch::Flat
        }
    }

    /// `(u, v)` at `(t, x)`.
    pub fn eval(&self, t: f64, x: f64) -> (f64, f64) {
        self.eval_branch(t, x, self.branch(t, x))
    }

    /// `(u, v)` with a prescribed branch of `min{W, 1}`.
    pub fn eval_branch(&self, t: f64, x: f64, b: Branch) -> (f64, f64) {
        let x = self.local_x(x);
        let pt = self.wave.eval(self.xi(t, x));
        let decay = (-self.spec.mu * t).exp();
        let m = match b {
            Branch::Tail => self.w(t, x),
            Branch::Flat => 1.0,
        };
        let s = self.sign();
        (
            pt.u - s * self.spec.p * decay * m,
            pt.v + s * self.spec.q * decay,
        )
    }

    /// `N1 = u_t - u_xx - F(u,v)`, `N2 = v_t - d v_xx - G(u,v)` in closed
    /// form, with the second derivatives of the wave taken from its ODEs.
    pub fn residual(&self, t: f64, x: f64, b: Branch) -> Residual {
        let sp = &self.spec;
        let s = self.sign();
        let x = self.local_x(x);
        let pt = self.wave.eval(self.xi(t, x));
        let decay = (-sp.mu * t).exp();
        let (pp, qq) = (sp.p * decay, sp.q * decay);
        let dzeta = sp.tau * (-sp.tau * t).exp();
        let (m, m_t_minus_m_xx) = match b {
            Branch::Tail => {
                let w = self.w(t, x);
                (w, (sp.alpha * self.c - sp.alpha * sp.alpha) * w)
            }
            Branch::Flat => (1.0, 0.0),
        };
        let u = pt.u - s * pp * m;
        let v = pt.v + s * qq;
        let (f0, g0) = reaction_terms(pt.u, pt.v, &self.params);
        let (f, g) = reaction_terms(u, v, &self.params);
        // u_t - u_xx = U'(xi_t) - U'' -/+ (P' m + P (m_t - m_xx)), and
        // -U'' = c U' + F(U,V).
        let n1 = s * dzeta * pt.du + f0 - f + s * sp.mu * pp * m - s * pp * m_t_minus_m_xx;
        let n2 = s * dzeta * pt.dv - s * sp.mu * qq + g0 - g;
        Residual { n1, n2 }
    }

    /// Residuals by fourth-order central differences of [`FieldPair::eval_branch`].
    pub fn residual_fd(&self, t: f64, x: f64, b: Branch, hx: f64, ht: f64) -> Residual {
        let f = |tt: f64, xx: f64| self.eval_branch(tt, xx, b);
        let c0 = f(t, x);
        let (xm2, xm1, xp1, xp2) = (f(t, x - 2.0 * hx), f(t, x - hx), f(t, x + hx), f(t, x + 2.0 * hx));
        let (tm2, tm1, tp1, tp2) = (f(t - 2.0 * ht, x), f(t - ht, x), f(t + ht, x), f(t + 2.0 * ht, x));
        let d2 = |m2: f64, m1: f64, z: f64, p1: f64, p2: f64| {
            (-p2 + 16.0 * p1 - 30.0 * z + 16.0 * m1 - m2) / (12.0 * hx * hx)
        };
        let d1 = |m2: f64, m1: f64, p1: f64, p2: f64| (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * ht);
        let u_xx = d2(xm2.0, xm1.0, c0.0, xp1.0, xp2.0);
        let v_xx = d2(xm2.1, xm1.1, c0.1, xp1.1, xp2.1);
        let u_t = d1(tm2.0, tm1.0, tp1.0, tp2.0);
        let v_t = d1(tm2.1, tm1.1, tp1.1, tp2.1);
        let (fu, gv) = reaction_terms(c0.0, c0.1, &self.params);
        Residual {
            n1: u_t - u_xx - fu,
            n2: v_t - self.params.d * v_xx - gv,
        }
    }

    /// Largest `|U'|`, `|V'|` of the underlying wave.
    pub fn derivative_scale(&self) -> f64 {
        self.wave.derivative_scale()
    }
}

/// How residuals are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ResidualMode {
    Analytic,
    FiniteDifference { hx: f64, ht: f64 },
}

/// Rectangle in `(t, xi)` with `xi = x - c t` (or `-x - c t` when mirrored).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub t_min: f64,
    pub t_max: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    pub dt: f64,
    pub dx: f64,
}

impl Region {
    /// `t in [t0, t0 + 100]`, `x in [c t - 40, c t + 40]`.
    pub fn standard(t0: f64) -> Self {
        Region {
            t_min: t0,
            t_max: t0 + 100.0,
            xi_min: -40.0,
            xi_max: 40.0,
            dt: 1.0,
            dx: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub kind: PairKind,
    pub max_n1: f64,
    pub min_n1: f64,
    pub max_n2: f64,
    pub min_n2: f64,
    /// Largest signed violation of the required inequalities.
    pub violation: f64,
    /// `(t, x)` where `violation` occurs.
    pub worst_at: (f64, f64),
    pub region: Region,
    /// Activation time: start of the checked window.
    pub t_star: f64,
    pub slack: f64,
    /// Points within `3 dx` of the kink, checked on both branches.
    pub kink_points: usize,
    pub pass: bool,
}

/// Discretization credit `10 (h^2 + dt^2) * scale`.
pub fn discretization_slack(h: f64, dt: f64, scale: f64) -> f64 {
    10.0 * (h * h + dt * dt) * scale
}

/// Default slack for a pair: wave grid spacing and derivative scale.
pub fn pair_slack(pair: &FieldPair, wave_h: f64) -> f64 {
    discretization_slack(wave_h, 0.0, pair.derivative_scale())
}

/// Evaluates `N1`, `N2` over `region` and checks the sign conditions:
/// `N1 <= slack`, `N2 >= -slack` for sub-solutions and the reverse for
/// super-solutions. Near the kink both branches are checked separately.
pub fn check_residuals(pair: &FieldPair, region: &Region, mode: ResidualMode, slack: f64) -> ResidualReport {
    let s = pair.sign();
    let nt = ((region.t_max - region.t_min) / region.dt).round().max(0.0) as usize;
    let nx = ((region.xi_max - region.xi_min) / region.dx).round().max(0.0) as usize;
    let mut rep = ResidualReport {
        kind: pair.spec.kind,
        max_n1: f64::NEG_INFINITY,
        min_n1: f64::INFINITY,
        max_n2: f64::NEG_INFINITY,
        min_n2: f64::INFINITY,
        violation: f64::NEG_INFINITY,
        worst_at: (f64::NAN, f64::NAN),
        region: *region,
        t_star: region.t_min,
        slack,
        kink_points: 0,
        pass: false,
    };
    let mirror = if pair.spec.mirrored { -1.0 } else { 1.0 };
    let near = 3.0 * region.dx;
    for it in 0..=nt {
        let t = region.t_min + it as f64 * region.dt;
        let gamma = pair.kink(t);
        for ix in 0..=nx {
            let lx = pair.c * t + region.xi_min + ix as f64 * region.dx;
            let x = mirror * lx;
            let branches: &[Branch] = if (lx - gamma).abs() <= near {
                rep.kink_points += 1;
                &[Branch::Tail, Branch::Flat]
            } else if lx >= gamma {
                &[Branch::Tail]
            } else {
                &[Branch::Flat]
            };
            for &b in branches {
                let r = match mode {
                    ResidualMode::Analytic => pair.residual(t, x, b),
                    ResidualMode::FiniteDifference { hx, ht } => pair.residual_fd(t, x, b, hx, ht),
                };
                rep.max_n1 = rep.max_n1.max(r.n1);
                rep.min_n1 = rep.min_n1.min(r.n1);
                rep.max_n2 = rep.max_n2.max(r.n2);
                rep.min_n2 = rep.min_n2.min(r.n2);
                // Sub: N1 <= 0 <= N2. Super: N2 <= 0 <= N1.
                let viol = (s * r.n1).max(-s * r.n2);
                if viol > rep.violation {
                    rep.violation = viol;
                    rep.worst_at = (t, x);
                }
            }
        }
    }
    rep.pass = rep.violation <= slack;
    rep
}

/// Doubling search for the activation time: the first `T = 10 * 2^k` for
/// which the standard window starting at `T` passes.
pub fn find_activation(pair: &FieldPair, slack: f64, margin: f64) -> ResidualReport {
    let mut t0 = T_START;
    loop {
        let rep = check_residuals(pair, &Region::standard(t0), ResidualMode::Analytic, slack);
        if rep.violation <= slack / margin || t0 >= T_LIMIT {
            return ResidualReport {
                pass: rep.violation <= slack / margin,
                ..rep
            };
        }
        t0 *= 2.0;
    }
}

/// Constructive choice of a spec satisfying the exponent conditions and the
/// amplitude inequalities with a factor-2 margin; `x0 - zeta0` is the first
/// of [`TAIL_ANCHORS`] for which the residual check passes with margin 2.
pub fn choose_parameters(
    params: &Params,
    w: &WaveProfile,
    kind: PairKind,
) -> Result<(SubSuperSpec, ResidualReport), ComparisonError> {
    choose_parameters_scaled(params, w, kind, 1.0)
}

/// [`choose_parameters`] with the decay rate `mu` multiplied by `mu_factor`
/// in `(0, 1]`.
pub fn choose_parameters_scaled(
    params: &Params,
    w: &WaveProfile,
    kind: PairKind,
    mu_factor: f64,
) -> Result<(SubSuperSpec, ResidualReport), ComparisonError> {
    if !(mu_factor > 0.0 && mu_factor <= 1.0) {
        return Err(ComparisonError::SpecInvalid(format!("mu factor {mu_factor} not in (0, 1]")));
    }
    let c = w.c;
    let lin = params.linear_speed();
    if !(c > lin * (1.0 + 1e-9)) {
        return Err(ComparisonError::NotPushed { c_star: c, linear: lin });
    }
    let s = spectral_exponents(c, params)?;
    let alpha = -0.5 * (s.lambda_u_plus + s.lambda_u_minus);
    // The tail of W must dominate the linear growth ahead of the front:
    // mu <= c^2/4 - (1-a).
    let far_tail = 0.25 * (c * c - 4.0 * (1.0 - params.a));
    let mu = 0.5 * mu_factor * params.mu_bound().min(far_tail);
    let tau = 0.5 * mu;
    let q = 0.05;
    // p > q and p > a q (sub); a q < p (super); with margin 2.
    let p_amp = 2.0 * q * params.a.max(1.0);
    let wave_h = w.h();
    let mut last = None;
    for &m in &TAIL_ANCHORS {
        // Far-field inequality: q/2 (1 - 2 mu / r) > b p e^{-2 alpha M}, with margin 2.
        let lhs = 0.5 * q * (1.0 - 2.0 * mu / params.r);
        let rhs = params.b * p_amp * (-2.0 * alpha * m).exp();
        if lhs < 2.0 * rhs {
            last = Some(format!(
                "q/2 (1 - 2mu/r) = {lhs:e} < 2 b p e^(-2 alpha M) = {:e} at M = {m}",
                2.0 * rhs
            ));
            continue;
        }
        let spec = SubSuperSpec {
            alpha,
            mu,
            tau,
            p: p_amp,
            q,
            zeta0: 1.0,
            x0: 1.0 + m,
            kind,
            mirrored: false,
        };
        let pair = build(params, w, &spec, kind)?;
        let slack = pair_slack(&pair, wave_h);
        let rep = find_activation(&pair, slack, 2.0);
        if rep.pass {
            return Ok((spec, rep));
        }
        last = Some(format!(
            "residual sign violated by {:e} at (t, x) = {:?} with M = {m}",
            rep.violation, rep.worst_at
        ));
    }
    Err(ComparisonError::Infeasible {
        binding: last.unwrap_or_default(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichSide {
    pub shift: f64,
    /// Largest violation of the ordering over the checked snapshots.
    pub violation: f64,
    /// `(t, x)` of the largest violation.
    pub worst_at: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub lower: SandwichSide,
    pub upper: SandwichSide,
    pub slack: f64,
    /// Snapshots from `t_min` on were checked.
    pub t_min: f64,
    pub pass: bool,
}

/// Worst ordering defect between stored snapshots and a pair at time offsets.
/// For the sub pair: `max(u_ - u(t + shift), v(t + shift) - v^)`; for the
/// super pair: `max(u(t) - u^(t + shift), v_(t + shift) - v(t))`.
fn side_violation(
    traj: &Trajectory,
    pair: &FieldPair,
    shift_steps: usize,
    t_min: f64,
    x_min: f64,
    stop_above: f64,
) -> (f64, (f64, f64)) {
    let snaps = &traj.snapshots;
    let g = &traj.grid;
    let mut worst = f64::NEG_INFINITY;
    let mut at = (f64::NAN, f64::NAN);
    let first = g.x_min.max(x_min);
    let i0 = ((first - g.x_min) / g.h).ceil().max(0.0) as usize;
    for k in 0..snaps.len().saturating_sub(shift_steps) {
        let (early, late) = (&snaps[k], &snaps[k + shift_steps]);
        if early.t < t_min {
            continue;
        }
        for i in i0..g.n {
            let x = g.x(i);
            let d = match pair.spec.kind {
                PairKind::Sub => {
                    let (pu, pv) = pair.eval(early.t, x);
                    (pu - late.u[i]).max(late.v[i] - pv)
                }
                PairKind::Super => {
                    let (pu, pv) = pair.eval(late.t, x);
                    (early.u[i] - pu).max(pv - early.v[i])
                }
            };
            if d > worst {
                worst = d;
                at = (early.t, x);
                if worst > stop_above {
                    return (worst, at);
                }
            }
        }
    }
    (worst, at)
}

/// Searches time shifts `T*` (trajectory ahead of the sub pair) and `T**`
/// (super pair ahead of the trajectory) among the stored snapshot spacings,
/// up to [`MAX_SHIFT`]. Only snapshots with `t >= t_min` and `x >= x_min` are
/// checked.
pub fn check_sandwich(
    traj: &Trajectory,
    sub: &FieldPair,
    sup: &FieldPair,
    t_min: f64,
    x_min: f64,
    slack: f64,
) -> Result<SandwichReport, ComparisonError> {
    if sub.spec.kind != PairKind::Sub || sup.spec.kind != PairKind::Super {
        return Err(ComparisonError::SpecInvalid("need a sub pair and a super pair".into()));
    }
    let snaps = &traj.snapshots;
    if snaps.len() < 2 {
        return Err(ComparisonError::Incomparable("trajectory has fewer than two snapshots".into()));
    }
    let spacing = snaps[1].t - snaps[0].t;
    let uniform = snaps
        .windows(2)
        .all(|w| ((w[1].t - w[0].t) - spacing).abs() < 1e-6 * spacing.max(1.0));
    if !uniform {
        return Err(ComparisonError::Incomparable("snapshots are not equally spaced".into()));
    }
    let max_steps = ((MAX_SHIFT / spacing).floor() as usize).min(snaps.len() - 1);
    let search = |pair: &FieldPair, name: &str| -> Result<SandwichSide, ComparisonError> {
        let mut best = (f64::INFINITY, 0.0, (f64::NAN, f64::NAN));
        for k in 0..=max_steps {
            let (v, at) = side_violation(traj, pair, k, t_min, x_min, slack);
            if v < best.0 {
                best = (v, k as f64 * spacing, at);
            }
            if v <= slack {
                return Ok(SandwichSide {
                    shift: k as f64 * spacing,
                    violation: v,
                    worst_at: at,
                });
            }
        }
        Err(ComparisonError::NoShiftFound {
            side: name.into(),
            max_shift: MAX_SHIFT,
            best_shift: best.1,
            violation: best.0,
            worst_at: best.2,
        })
    };
    let lower = search(sub, "sub")?;
    let upper = search(sup, "super")?;
    Ok(SandwichReport {
        pass: lower.violation <= slack && upper.violation <= slack,
        lower,
        upper,
        slack,
        t_min,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    /// `max (u_low - u_high)` over all snapshots.
    pub max_u_excess: f64,
    /// `max (v_high - v_low)` over all snapshots.
    pub max_v_excess: f64,
    pub snapshots: usize,
    pub tolerance: f64,
}

/// Tolerance for the ordering checks of [`check_comparison_principle`].
pub const ORDER_TOL: f64 = 1e-8;

/// Runs both configurations in lockstep and checks `u_low <= u_high` and
/// `v_low >= v_high` at every snapshot.
pub fn check_comparison_principle(low: &SimConfig, high: &SimConfig) -> Result<OrderingReport, ComparisonError> {
    if low.grid != high.grid || low.dt != high.dt || low.params != high.params {
        return Err(ComparisonError::Incomparable(
            "grids, steps and parameters must be identical".into(),
        ));
    }
    if low.t_end != high.t_end || low.snapshot_stride != high.snapshot_stride {
        return Err(ComparisonError::Incomparable("time windows differ".into()));
    }
    let mut a = low.initial_state()?;
    let mut b = high.initial_state()?;
    let g = low.grid;
    let mut rep = OrderingReport {
        max_u_excess: f64::NEG_INFINITY,
        max_v_excess: f64::NEG_INFINITY,
        snapshots: 0,
        tolerance: ORDER_TOL,
    };
    let mut compare = |a: &crate::pde::FieldState, b: &crate::pde::FieldState, tol: f64| {
        rep.snapshots += 1;
        for i in 0..g.n {
            let du = a.u[i] - b.u[i];
            let dv = b.v[i] - a.v[i];
            rep.max_u_excess = rep.max_u_excess.max(du);
            rep.max_v_excess = rep.max_v_excess.max(dv);
            if du > tol || dv > tol {
                let (species, amount) = if du > tol { (Species::U, du) } else { (Species::V, dv) };
                return Err(ComparisonError::OrderingViolated {
                    t: a.t,
                    x: g.x(i),
                    species,
                    amount,
                });
            }
        }
        Ok(())
    };
    // Initial data must be ordered exactly.
    compare(&a, &b, 0.0)?;
    let mut sa = Stepper::new(low)?;
    let mut sb = Stepper::new(high)?;
    let n = low.n_steps();
    for k in 1..=n {
        sa.step(&mut a)?;
        sb.step(&mut b)?;
        if k % low.snapshot_stride as u64 == 0 || k == n {
            compare(&a, &b, ORDER_TOL)?;
        }
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub epsilon: f64,
    pub nu: f64,
    /// First time the distance is within `epsilon`.
    pub entered_at: Option<f64>,
    /// Largest distance from then on.
    pub max_after: f64,
    pub pass: bool,
}

/// Once within `epsilon` of a shifted wave, the distance must stay below
/// `nu = 3 epsilon`.
pub fn check_local_stability(series: &[ConvergencePoint], epsilon: f64) -> StabilityReport {
    let nu = 3.0 * epsilon;
    let k = series.iter().position(|p| p.sup_distance <= epsilon);
    let max_after = k.map_or(f64::NAN, |k| {
        series[k..].iter().fold(0.0f64, |m, p| m.max(p.sup_distance))
    });
    StabilityReport {
        epsilon,
        nu,
        entered_at: k.map(|k| series[k].t),
        max_after,
        pass: k.is_some() && max_after <= nu,
    }
}
