use super::{WaveError, WaveProfile};
use crate::model::{spectral_exponents, SpectralExponents};
use crate::stats::ols;
use serde::{Deserialize, Serialize};

const WINDOW_LO: f64 = 1e-8;
const WINDOW_HI: f64 = 1e-3;
const MIN_SAMPLES: usize = 20;
/// Relative distance below which two exponents are treated as equal.
const EQUAL_TOL: f64 = 1e-2;

/// Which decay law of `1-V` at `+inf` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RightTailCase {
    /// `lambda_v- < lambda_U`: `1-V ~ e^{lambda_U xi}`.
    FollowsU,
    /// equal exponents: `1-V ~ xi e^{lambda xi}`.
    Resonant,
    /// `lambda_v- > lambda_U`: `1-V ~ e^{lambda_v- xi}`.
    Own,
}

/// Which decay law of `1-U` at `-inf` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LeftTailCase {
    /// `mu_u+ > mu_v+`: `1-U ~ e^{mu_v+ xi}`.
    FollowsV,
    /// equal exponents: `1-U ~ |xi| e^{mu xi}`.
    Resonant,
    /// `mu_u+ < mu_v+`: `1-U ~ e^{mu_u+ xi}`.
    Own,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateCheck {
    pub fitted: f64,
    pub predicted: f64,
    pub rel_error: f64,
    pub pass: bool,
    pub samples: usize,
    pub window: (f64, f64),
    /// Fitted prefactor of the decay law.
    pub amplitude: f64,
    pub residual_rms: f64,
    /// RMS of the competing fit (pure exponential vs. `xi e^{..}`), when
    /// the resonant case applies.
    pub alternative_rms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveAsymptoticsReport {
    pub c: f64,
    pub predicted: SpectralExponents,
    /// `U` near `+inf`.
    pub u_plus: RateCheck,
    /// `1-V` near `+inf`.
    pub v_plus: RateCheck,
    /// `V` near `-inf`.
    pub v_minus: RateCheck,
    /// `1-U` near `-inf`.
    pub u_minus: RateCheck,
    pub right_case: RightTailCase,
    pub left_case: LeftTailCase,
    /// Whether `U` was compared with the fast exponent (minimal pushed wave)
    /// or the slow one.
    pub u_uses_fast_rate: bool,
    pub rel_tol: f64,
}

impl WaveAsymptoticsReport {
    pub fn all_pass(&self) -> bool {
        self.u_plus.pass && self.v_plus.pass && self.v_minus.pass && self.u_minus.pass
    }
}

/// Fits `ln g = alpha + rho xi (+ ln|xi|)` on samples with `g` inside the window.
fn fit_tail(
    xi: &[f64],
    g: &[f64],
    predicted: f64,
    resonant: bool,
    rel_tol: f64,
) -> Result<RateCheck, WaveError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ys_res = Vec::new();
    for (&x, &y) in xi.iter().zip(g) {
        if (WINDOW_LO..=WINDOW_HI).contains(&y) && x.abs() > 1.0 {
            xs.push(x);
            ys.push(y.ln());
            ys_res.push(y.ln() - x.abs().ln());
        }
    }
    if xs.len() < MIN_SAMPLES {
        return Err(WaveError::WindowTooShort {
            got: xs.len(),
            need: MIN_SAMPLES,
        });
    }
    let plain = ols(&xs, &ys).ok_or(WaveError::WindowTooShort {
        got: xs.len(),
        need: MIN_SAMPLES,
    })?;
    let with_xi = ols(&xs, &ys_res);
    let (fit, alt) = match (resonant, with_xi) {
        (true, Some(f)) => (f, Some(plain.residual_rms)),
        (false, Some(f)) => (plain, Some(f.residual_rms)),
        (_, None) => (plain, None),
    };
    let rel_error = ((fit.slope - predicted) / predicted).abs();
    let window = (
        xs.iter().copied().fold(f64::MAX, f64::min),
        xs.iter().copied().fold(f64::MIN, f64::max),
    );
    Ok(RateCheck {
        fitted: fit.slope,
        predicted,
        rel_error,
        pass: rel_error <= rel_tol,
        samples: xs.len(),
        window,
        amplitude: fit.intercept.exp(),
        residual_rms: fit.residual_rms,
        alternative_rms: alt,
    })
}

fn nearly_equal(x: f64, y: f64) -> bool {
    (x - y).abs() <= EQUAL_TOL * x.abs().max(y.abs())
}

/// Log-linear fits of the four tails against the linearized exponents.
pub fn verify_asymptotics(w: &WaveProfile, rel_tol: f64) -> Result<WaveAsymptoticsReport, WaveError> {
    if !w.converged {
        return Err(WaveError::NoMonotoneConnection {
            c: w.c,
            reason: "profile not converged".into(),
        });
    }
    let s = spectral_exponents(w.c, &w.params)?;
    // The minimal wave has no slow component; at the linear speed the two
    // rates coincide and U carries a factor xi.
    let u_uses_fast_rate = w.minimal;
    let u_resonant = nearly_equal(s.lambda_u_minus, s.lambda_u_plus);
    let lam_u = if u_uses_fast_rate {
        s.lambda_u_minus
    } else {
        s.lambda_u_plus
    };
    let right_case = if nearly_equal(s.lambda_v_minus, lam_u) {
        RightTailCase::Resonant
    } else if s.lambda_v_minus < lam_u {
        RightTailCase::FollowsU
    } else {
        RightTailCase::Own
    };
    let left_case = if nearly_equal(s.mu_u_plus, s.mu_v_plus) {
        LeftTailCase::Resonant
    } else if s.mu_u_plus > s.mu_v_plus {
        LeftTailCase::FollowsV
    } else {
        LeftTailCase::Own
    };

    let one_minus_v: Vec<f64> = w.v.iter().map(|v| 1.0 - v).collect();
    let one_minus_u: Vec<f64> = w.u.iter().map(|u| 1.0 - u).collect();
    let right_xi: Vec<f64> = w.xi.iter().map(|&x| if x > 0.0 { x } else { f64::NAN }).collect();
    let left_xi: Vec<f64> = w.xi.iter().map(|&x| if x < 0.0 { x } else { f64::NAN }).collect();
    let mask = |xi: &[f64], g: &[f64]| -> (Vec<f64>, Vec<f64>) {
        xi.iter()
            .zip(g)
            .filter(|(x, _)| x.is_finite())
            .map(|(x, y)| (*x, *y))
            .unzip()
    };

    let (x, g) = mask(&right_xi, &w.u);
    let u_plus = fit_tail(&x, &g, lam_u, u_resonant, rel_tol)?;
    let (x, g) = mask(&right_xi, &one_minus_v);
    let v_pred = match right_case {
        RightTailCase::FollowsU => lam_u,
        _ => s.lambda_v_minus,
    };
    let v_resonant = right_case == RightTailCase::Resonant
        || (right_case == RightTailCase::FollowsU && u_resonant);
    let v_plus = fit_tail(&x, &g, v_pred, v_resonant, rel_tol)?;
    let (x, g) = mask(&left_xi, &w.v);
    let v_minus = fit_tail(&x, &g, s.mu_v_plus, false, rel_tol)?;
    let (x, g) = mask(&left_xi, &one_minus_u);
    let u_pred = match left_case {
        LeftTailCase::Own => s.mu_u_plus,
        _ => s.mu_v_plus,
    };
    let u_minus = fit_tail(&x, &g, u_pred, left_case == LeftTailCase::Resonant, rel_tol)?;
    Ok(WaveAsymptoticsReport {
        c: w.c,
        predicted: s,
        u_plus,
        v_plus,
        v_minus,
        u_minus,
        right_case,
        left_case,
        u_uses_fast_rate,
        rel_tol,
    })
}
