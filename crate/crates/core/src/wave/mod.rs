//! Monotone traveling waves `(U,V)(x - ct)` connecting `(1,0)` at `-inf` to
//! `(0,1)` at `+inf`:
//!
//! ```text
//! U'' + c U' + F(U,V) = 0
//! d V'' + c V' + G(U,V) = 0
//! ```
//!
//! The problem is discretized with second-order centered differences on a
//! truncated interval `[-L, L]` and solved by damped Newton with a banded LU.

mod asymptotics;
mod eval;
mod speed;

pub use asymptotics::{
    verify_asymptotics, LeftTailCase, RateCheck, RightTailCase, WaveAsymptoticsReport,
};
pub use eval::WaveEval;
pub use speed::{minimal_speed, MinimalSpeed, SpeedSearch};

use crate::linalg::BandedMatrix;
use crate::model::{reaction_terms, spectral_exponents, ModelError, Params, SpectralExponents};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WaveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no monotone connection at c = {c}: {reason}")]
    NoMonotoneConnection { c: f64, reason: String },
    #[error("Jacobian singular at c = {c}")]
    IllConditioned { c: f64 },
    #[error("decay not resolved on [-{half_length}, {half_length}]: {detail}")]
    DomainTooSmall { half_length: f64, detail: String },
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("existence predicate flips {flips} times on the scan; refine the grid")]
    PredicateNonMonotone { flips: usize },
    #[error("fitting window has {got} samples, need at least {need}")]
    WindowTooShort { got: usize, need: usize },
}

/// Truncation and Newton settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveConfig {
    pub half_length: f64,
    pub n: usize,
    pub max_newton: usize,
    /// Sup-norm of the residual accepted as converged.
    pub residual_tol: f64,
    /// Tolerated negative undershoot of `U`.
    pub neg_tol: f64,
    /// Tolerated monotonicity defect between neighbouring nodes.
    pub mono_tol: f64,
    /// Largest acceptable distance of the end values from `(1,0)`/`(0,1)`.
    pub end_tol: f64,
}

impl Default for WaveConfig {
    fn default() -> Self {
        WaveConfig {
            half_length: 60.0,
            n: 6001,
            max_newton: 50,
            residual_tol: 1e-9,
            neg_tol: 1e-10,
            mono_tol: 1e-6,
            end_tol: 2e-2,
        }
    }
}

impl WaveConfig {
    pub fn with_domain(half_length: f64, n: usize) -> Self {
        WaveConfig {
            half_length,
            n,
            ..Default::default()
        }
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_length / (self.n as f64 - 1.0)
    }
}

/// A converged discrete wave.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveProfile {
    pub c: f64,
    pub params: Params,
    pub xi: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub converged: bool,
    pub newton_iterations: usize,
    pub residual: f64,
    /// Weight of the slow decay mode of `U` relative to the fast one at the
    /// right end. Vanishes for the minimal pushed wave.
    pub slow_mode: f64,
    /// Set by [`minimal_speed`] for the wave at `c*`.
    pub minimal: bool,
}

impl WaveProfile {
    pub fn h(&self) -> f64 {
        self.xi[1] - self.xi[0]
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    /// Position where `U` crosses `level`, by linear interpolation.
    pub fn crossing(&self, level: f64) -> Option<f64> {
        self.u.windows(2).enumerate().find_map(|(i, w)| {
            if (w[0] - level) * (w[1] - level) <= 0.0 && w[0] != w[1] {
                let s = (w[0] - level) / (w[0] - w[1]);
                Some(self.xi[i] + s * self.h())
            } else {
                None
            }
        })
    }

    /// Max of the continuous-ODE residual evaluated with fourth-order
    /// stencils on the nodal values. Measures the discretization error of
    /// the second-order scheme.
    pub fn ode_residual_fd4(&self) -> f64 {
        let h = self.h();
        let p = &self.params;
        let c = self.c;
        let n = self.len();
        let mut worst = 0.0f64;
        for i in 2..n - 2 {
            let d1 = |f: &[f64]| (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * h);
            let d2 = |f: &[f64]| {
                (-f[i + 2] + 16.0 * f[i + 1] - 30.0 * f[i] + 16.0 * f[i - 1] - f[i - 2])
                    / (12.0 * h * h)
            };
            let (fu, gv) = reaction_terms(self.u[i], self.v[i], p);
            let r1 = d2(&self.u) + c * d1(&self.u) + fu;
            let r2 = p.d * d2(&self.v) + c * d1(&self.v) + gv;
            worst = worst.max(r1.abs()).max(r2.abs());
        }
        worst
    }
}

/// Ratio of the slow to the fast decay mode of `U` in the last two nodes.
///
/// With `U_i = A z+^i + B z-^i` this is `(A/B) (z+/z-)^i`. Its sign is the
/// sign of `A`; it is reported as `+-inf` when the fast mode is below
/// round-off.
pub(crate) fn slow_mode_ratio(u: &[f64], c: f64, p: &Params, h: f64) -> f64 {
    let (zm, zp) = discrete_roots(c, 1.0 - p.a, h);
    let e = u.len() - 1;
    let num = u[e] - zm * u[e - 1];
    let den = zp * u[e - 1] - u[e];
    let scale = u[e].abs().max(u[e - 1].abs());
    if den > 1e-12 * scale {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else if num < 0.0 {
        f64::NEG_INFINITY
    } else {
        0.0
    }
}

/// Roots `z-` < `z+` of the discrete characteristic equation of
/// `U'' + cU' + kU = 0` under centered differences with spacing `h`.
fn discrete_roots(c: f64, k: f64, h: f64) -> (f64, f64) {
    let a2 = 1.0 + 0.5 * c * h;
    let a1 = k * h * h - 2.0;
    let a0 = 1.0 - 0.5 * c * h;
    let disc = (a1 * a1 - 4.0 * a2 * a0).max(0.0).sqrt();
    ((-a1 - disc) / (2.0 * a2), (-a1 + disc) / (2.0 * a2))
}

struct System<'a> {
    p: &'a Params,
    c: f64,
    n: usize,
    h: f64,
    pin: usize,
    s: SpectralExponents,
}

impl<'a> System<'a> {
    fn left_u_coupling(&self) -> f64 {
        self.p.a / (self.s.mu_v_plus - self.s.mu_u_minus)
    }

    fn right_gains(&self) -> (f64, f64) {
        let gm = 1.0 / (self.s.lambda_v_plus - self.s.lambda_u_minus);
        let gp = 1.0 / (self.s.lambda_v_plus - self.s.lambda_u_plus);
        (gm, gp)
    }

    /// Residual, and optionally the Jacobian, at interleaved state `x`.
    fn eval(&self, x: &[f64], res: &mut [f64], jac: Option<&mut BandedMatrix>) {
        let n = self.n;
        let h = self.h;
        let c = self.c;
        let p = self.p;
        let ih2 = 1.0 / (h * h);
        let ic = c / (2.0 * h);
        let u = |i: usize| x[2 * i];
        let v = |i: usize| x[2 * i + 1];
        let cu = |i: usize| 2 * i;
        let cv = |i: usize| 2 * i + 1;
        let mut jac = jac;
        if let Some(j) = jac.as_deref_mut() {
            j.clear();
        }
        macro_rules! put {
            ($r:expr, $c:expr, $v:expr) => {
                if let Some(j) = jac.as_deref_mut() {
                    j.add($r, $c, $v);
                }
            };
        }

        // U rows
        let row = 0;
        let mu_up = self.s.mu_u_plus;
        let kl = self.left_u_coupling();
        res[row] = (-3.0 * u(0) + 4.0 * u(1) - u(2)) / (2.0 * h) - mu_up * (u(0) - 1.0) - kl * v(0);
        put!(row, cu(0), -1.5 / h - mu_up);
        put!(row, cu(1), 2.0 / h);
        put!(row, cu(2), -0.5 / h);
        put!(row, cv(0), -kl);
        for k in 1..n {
            let row = 2 * k;
            if k == self.pin {
                res[row] = u(k) - 0.5;
                put!(row, cu(k), 1.0);
                continue;
            }
            let i = if k < self.pin { k } else { k - 1 };
            let (f, _) = reaction_terms(u(i), v(i), p);
            res[row] = (u(i + 1) - 2.0 * u(i) + u(i - 1)) * ih2 + ic * (u(i + 1) - u(i - 1)) + f;
            put!(row, cu(i - 1), ih2 - ic);
            put!(row, cu(i), -2.0 * ih2 + 1.0 - 2.0 * u(i) - p.a * v(i));
            put!(row, cu(i + 1), ih2 + ic);
            put!(row, cv(i), -p.a * u(i));
        }

        // V rows
        let row = 1;
        let mu_vp = self.s.mu_v_plus;
        res[row] = (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * h) - mu_vp * v(0);
        put!(row, cv(0), -1.5 / h - mu_vp);
        put!(row, cv(1), 2.0 / h);
        put!(row, cv(2), -0.5 / h);
        let dh2 = p.d * ih2;
        for i in 1..n - 1 {
            let row = 2 * i + 1;
            let (_, g) = reaction_terms(u(i), v(i), p);
            res[row] = (v(i + 1) - 2.0 * v(i) + v(i - 1)) * dh2 + ic * (v(i + 1) - v(i - 1)) + g;
            put!(row, cv(i - 1), dh2 - ic);
            put!(row, cv(i), -2.0 * dh2 + p.r * (1.0 - 2.0 * v(i) - p.b * u(i)));
            put!(row, cv(i + 1), dh2 + ic);
            put!(row, cu(i), -p.r * p.b * v(i));
        }
        // Right end: no growing mode in 1-V, forced by the decaying U.
        let row = 2 * n - 1;
        let (gm, gp) = self.right_gains();
        let lvm = self.s.lambda_v_minus;
        let lum = self.s.lambda_u_minus;
        let k = p.r * p.b / p.d;
        let e = n - 1;
        let dv = (3.0 * v(e) - 4.0 * v(e - 1) + v(e - 2)) / (2.0 * h);
        let du = (3.0 * u(e) - 4.0 * u(e - 1) + u(e - 2)) / (2.0 * h);
        res[row] = -dv - lvm * (1.0 - v(e)) - k * (gm * u(e) + gp * gm * (du - lum * u(e)));
        put!(row, cv(e), -1.5 / h + lvm);
        put!(row, cv(e - 1), 2.0 / h);
        put!(row, cv(e - 2), -0.5 / h);
        put!(row, cu(e), -k * (gm + gp * gm * (1.5 / h - lum)));
        put!(row, cu(e - 1), -k * gp * gm * (-2.0 / h));
        put!(row, cu(e - 2), -k * gp * gm * (0.5 / h));
    }
}

fn sup(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Grid `xi_i = -L + i h`.
pub fn wave_grid(cfg: &WaveConfig) -> Vec<f64> {
    let h = cfg.h();
    (0..cfg.n)
        .map(|i| -cfg.half_length + i as f64 * h)
        .collect()
}

/// Smooth initial guess for Newton.
pub fn tanh_guess(cfg: &WaveConfig) -> (Vec<f64>, Vec<f64>) {
    let xi = wave_grid(cfg);
    let u = xi.iter().map(|x| 0.5 * (1.0 - (0.5 * x).tanh())).collect();
    let v = xi.iter().map(|x| 0.5 * (1.0 + (0.5 * x).tanh())).collect();
    (u, v)
}

/// Converged Newton iterate before the existence checks.
#[derive(Debug, Clone)]
pub struct RawWave {
    pub c: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub slow_mode: f64,
}

pub fn newton_solve(
    c: f64,
    p: &Params,
    cfg: &WaveConfig,
    guess: Option<(&[f64], &[f64])>,
) -> Result<RawWave, WaveError> {
    p.require_strong_weak()?;
    let s = spectral_exponents(c, p)?;
    if cfg.n < 11 || !(cfg.half_length > 0.0) {
        return Err(WaveError::BadGrid(format!(
            "need n >= 11 and L > 0, got n={} L={}",
            cfg.n, cfg.half_length
        )));
    }
    let n = cfg.n;
    let h = cfg.h();
    let pin = ((cfg.half_length / h).round() as usize).clamp(2, n - 3);
    let sys = System { p, c, n, h, pin, s };

    let mut x = vec![0.0; 2 * n];
    let fill = |x: &mut [f64], u0: &[f64], v0: &[f64]| {
        for i in 0..n {
            x[2 * i] = u0[i];
            x[2 * i + 1] = v0[i];
        }
    };
    match guess {
        Some((u0, v0)) if u0.len() == n && v0.len() == n => fill(&mut x, u0, v0),
        _ => {
            let (u0, v0) = tanh_guess(cfg);
            fill(&mut x, &u0, &v0);
        }
    }

    let mut res = vec![0.0; 2 * n];
    let mut trial_res = vec![0.0; 2 * n];
    let mut jac = BandedMatrix::zeros(2 * n, 5, 4);
    let mut trial = vec![0.0; 2 * n];
    sys.eval(&x, &mut res, None);
    let mut norm = sup(&res);
    let mut iterations = 0;
    let mut polish = 0;
    loop {
        if iterations >= cfg.max_newton {
            return Err(WaveError::NoMonotoneConnection {
                c,
                reason: format!(
                    "Newton did not converge in {} iterations (residual {norm:.3e})",
                    cfg.max_newton
                ),
            });
        }
        iterations += 1;
        sys.eval(&x, &mut res, Some(&mut jac));
        let lu = jac
            .clone()
            .factor()
            .ok_or(WaveError::IllConditioned { c })?;
        let mut delta = res.clone();
        lu.solve(&mut delta);
        if delta.iter().any(|d| !d.is_finite()) {
            return Err(WaveError::IllConditioned { c });
        }
        let step = sup(&delta);
        let mut lambda = 1.0;
        loop {
            for k in 0..2 * n {
                trial[k] = x[k] - lambda * delta[k];
            }
            sys.eval(&trial, &mut trial_res, None);
            let tn = sup(&trial_res);
            if tn.is_finite() && (tn < (1.0 - 1e-4 * lambda) * norm || tn <= cfg.residual_tol) {
                std::mem::swap(&mut x, &mut trial);
                std::mem::swap(&mut res, &mut trial_res);
                norm = tn;
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-4 {
                // accept a small step to escape stagnation
                for k in 0..2 * n {
                    x[k] -= lambda * delta[k];
                }
                sys.eval(&x, &mut res, None);
                norm = sup(&res);
                break;
            }
        }
        if norm <= cfg.residual_tol && lambda * step < 1e-8 {
            // extra full steps bring the tiny tail values to round-off accuracy
            polish += 1;
            if polish >= 2 {
                break;
            }
        }
    }
    let u: Vec<f64> = x.iter().step_by(2).copied().collect();
    let v: Vec<f64> = x.iter().skip(1).step_by(2).copied().collect();
    let slow_mode = slow_mode_ratio(&u, c, p, h);
    Ok(RawWave {
        c,
        u,
        v,
        iterations,
        residual: norm,
        slow_mode,
    })
}

/// Applies the existence criteria to a converged iterate.
pub fn accept(raw: RawWave, p: &Params, cfg: &WaveConfig) -> Result<WaveProfile, WaveError> {
    let c = raw.c;
    let (u, v) = (&raw.u, &raw.v);
    let n = u.len();
    let (lo, hi) = u
        .iter()
        .chain(v.iter())
        .fold((f64::MAX, f64::MIN), |(a, b), &y| (a.min(y), b.max(y)));
    if lo < -0.05 || hi > 1.05 {
        return Err(WaveError::NoMonotoneConnection {
            c,
            reason: format!("iterate left the box [-0.05,1.05]^2 (range [{lo:.3e}, {hi:.3e}])"),
        });
    }
    let min_u = u.iter().copied().fold(f64::MAX, f64::min);
    if min_u < -cfg.neg_tol {
        return Err(WaveError::NoMonotoneConnection {
            c,
            reason: format!("U undershoots zero (min U = {min_u:.3e})"),
        });
    }
    if !(raw.slow_mode >= 0.0) {
        return Err(WaveError::NoMonotoneConnection {
            c,
            reason: format!("slow decay mode of U has negative weight ({:.3e})", raw.slow_mode),
        });
    }
    let mono = u
        .windows(2)
        .map(|w| w[1] - w[0])
        .chain(v.windows(2).map(|w| w[0] - w[1]))
        .fold(f64::MIN, f64::max);
    if mono > cfg.mono_tol {
        return Err(WaveError::NoMonotoneConnection {
            c,
            reason: format!("monotonicity defect {mono:.3e}"),
        });
    }
    let e = n - 1;
    let ends = [1.0 - u[0], v[0], u[e], 1.0 - v[e]];
    let worst = ends.iter().copied().fold(0.0f64, f64::max);
    if worst > cfg.end_tol {
        return Err(WaveError::DomainTooSmall {
            half_length: cfg.half_length,
            detail: format!(
                "end values 1-U(-L)={:.2e}, V(-L)={:.2e}, U(L)={:.2e}, 1-V(L)={:.2e}",
                ends[0], ends[1], ends[2], ends[3]
            ),
        });
    }
    Ok(WaveProfile {
        c,
        params: *p,
        xi: wave_grid(cfg),
        u: raw.u,
        v: raw.v,
        converged: true,
        newton_iterations: raw.iterations,
        residual: raw.residual,
        slow_mode: raw.slow_mode,
        minimal: false,
    })
}

/// Solves the truncated wave problem at speed `c`.
///
/// `guess` supplies starting values on the same grid (continuation); a
/// `tanh` front is used otherwise. On the right end only `V` gets a boundary
/// condition: for `c > 2 sqrt(1-a)` both decay modes of `U` are admissible,
/// and the sign of the slow one decides whether the connection is a
/// nonnegative monotone wave.
pub fn solve_wave_profile(
    c: f64,
    p: &Params,
    cfg: &WaveConfig,
    guess: Option<(&[f64], &[f64])>,
) -> Result<WaveProfile, WaveError> {
    let raw = newton_solve(c, p, cfg, guess)?;
    accept(raw, p, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn llw() -> Params {
        Params::new(0.5, 1.5, 1.0, 1.0).unwrap()
    }

    #[test]
    fn converges_above_minimal_speed() {
        let w = solve_wave_profile(1.45, &llw(), &WaveConfig::default(), None).unwrap();
        assert!(w.converged);
        assert!(w.slow_mode > 0.0);
        assert!((w.u[3000] - 0.5).abs() < 1e-12);
        for k in 1..w.len() {
            assert!(w.u[k] <= w.u[k - 1] + 1e-9);
            assert!(w.v[k] >= w.v[k - 1] - 1e-9);
        }
    }

    #[test]
    fn fast_wave_exists() {
        let p = Params::new(0.9, 5.0, 1.0, 1.0).unwrap();
        let cfg = WaveConfig::with_domain(150.0, 7501);
        let w = solve_wave_profile(5.0, &p, &cfg, None).unwrap();
        assert!(w.converged);
    }

    #[test]
    fn below_linear_speed_is_rejected() {
        let r = solve_wave_profile(1.0, &llw(), &WaveConfig::default(), None);
        assert!(matches!(r, Err(WaveError::Model(ModelError::DiscriminantNegative { .. }))));
    }

    #[test]
    fn shifted_guess_gives_same_profile() {
        let cfg = WaveConfig::with_domain(40.0, 2001);
        let w = solve_wave_profile(1.6, &llw(), &cfg, None).unwrap();
        let mut us = w.u.clone();
        let mut vs = w.v.clone();
        us.rotate_right(1);
        vs.rotate_right(1);
        us[0] = w.u[0];
        vs[0] = w.v[0];
        let w2 = solve_wave_profile(1.6, &llw(), &cfg, Some((&us, &vs))).unwrap();
        let d = w
            .u
            .iter()
            .zip(&w2.u)
            .chain(w.v.iter().zip(&w2.v))
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(d < 1e-6, "{d}");
    }

    #[test]
    fn second_order_discretization() {
        let p = Params::new(0.9, 5.0, 1.0, 1.0).unwrap();
        let r1 = solve_wave_profile(1.5, &p, &WaveConfig::with_domain(40.0, 801), None)
            .unwrap()
            .ode_residual_fd4();
        let r2 = solve_wave_profile(1.5, &p, &WaveConfig::with_domain(40.0, 1601), None)
            .unwrap()
            .ode_residual_fd4();
        let order = (r1 / r2).log2();
        assert!(order >= 1.9, "order {order} ({r1:e} -> {r2:e})");
    }
}
