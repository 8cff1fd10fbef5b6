//! Model constants, reaction terms and the closed-form speed quantities of the
//! strong-weak competition system
//!
//! ```text
//! u_t = u_xx + u(1 - u - a v)
//! v_t = d v_xx + r v(1 - v - b u)
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative slack used when a discriminant that is zero in exact arithmetic
/// comes out slightly negative.
const DISCRIMINANT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("parameter {name} must be strictly positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("discriminant is negative ({value:e}); speed below the admissible range")]
    DiscriminantNegative { value: f64 },
    #[error("c' = {c_prime} must exceed 2*sqrt(a) = {bound}")]
    Domain { c_prime: f64, bound: f64 },
    #[error("parameters violate 0 < a < 1 < b (a = {a}, b = {b})")]
    NotStrongWeak { a: f64, b: f64 },
    #[error("c* = {c_star} lies outside [{lo}, 2]")]
    SpeedOutOfRange { c_star: f64, lo: f64 },
    #[error("accelerated speed {c_star_star} not in ({c_star}, 2)")]
    InvalidInterval { c_star_star: f64, c_star: f64 },
    #[error("linear and nonlinear sufficient conditions both hold for {0:?}")]
    ConflictingConditions(Params),
}

/// The four positive constants of the competition system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Competition pressure of `v` on `u`.
    pub a: f64,
    /// Competition pressure of `u` on `v`.
    pub b: f64,
    /// Diffusion rate of `v`.
    pub d: f64,
    /// Growth rate of `v`.
    pub r: f64,
}

impl Params {
    pub fn new(a: f64, b: f64, d: f64, r: f64) -> Result<Self, ModelError> {
        for (name, value) in [("a", a), ("b", b), ("d", d), ("r", r)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ModelError::NonPositive { name, value });
            }
        }
        Ok(Params { a, b, d, r })
    }

    /// Like [`Params::new`] but additionally requires `0 < a < 1 < b`.
    pub fn strong_weak(a: f64, b: f64, d: f64, r: f64) -> Result<Self, ModelError> {
        let p = Self::new(a, b, d, r)?;
        p.require_strong_weak()?;
        Ok(p)
    }

    pub fn is_strong_weak(&self) -> bool {
        0.0 < self.a && self.a < 1.0 && 1.0 < self.b
    }

    pub fn require_strong_weak(&self) -> Result<(), ModelError> {
        if self.is_strong_weak() {
            Ok(())
        } else {
            Err(ModelError::NotStrongWeak { a: self.a, b: self.b })
        }
    }

    /// KPP speed of `u` alone.
    pub fn c_u(&self) -> f64 {
        2.0
    }

    /// KPP speed of `v` alone, `2 sqrt(rd)`.
    pub fn c_v(&self) -> f64 {
        2.0 * (self.r * self.d).sqrt()
    }

    /// Linearized speed at the unstable state (0,1), `2 sqrt(1-a)`.
    pub fn linear_speed(&self) -> f64 {
        2.0 * (1.0 - self.a).sqrt()
    }

    /// Upper bound on the exponent `mu` used by the sub/super-solutions:
    /// `min{1-a, r(b-1), r/2}`.
    pub fn mu_bound(&self) -> f64 {
        (1.0 - self.a).min(self.r * (self.b - 1.0)).min(self.r / 2.0)
    }
}

/// `F(u,v) = u(1-u-av)` and `G(u,v) = rv(1-v-bu)`.
#[inline]
pub fn reaction_terms(u: f64, v: f64, p: &Params) -> (f64, f64) {
    (u * (1.0 - u - p.a * v), p.r * v * (1.0 - v - p.b * u))
}

/// `c^2 - 4(1-a)` in factored form, so that it vanishes exactly at
/// `c = 2 sqrt(1-a)` as computed in floating point.
fn u_discriminant(c: f64, a: f64) -> f64 {
    let lin = 2.0 * (1.0 - a).sqrt();
    (c - lin) * (c + lin)
}

fn checked_sqrt(disc: f64, scale: f64) -> Result<f64, ModelError> {
    if disc >= 0.0 {
        Ok(disc.sqrt())
    } else if disc >= -DISCRIMINANT_SLACK * scale.max(1.0) {
        Ok(0.0)
    } else {
        Err(ModelError::DiscriminantNegative { value: disc })
    }
}

/// Exponential rates of the linearizations at both ends of a wave of speed `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralExponents {
    pub c: f64,
    /// Roots of `l^2 + c l + (1-a) = 0` (decay of `U` at `+inf`).
    pub lambda_u_minus: f64,
    pub lambda_u_plus: f64,
    /// Roots of `d l^2 + c l - r = 0` (decay of `1-V` at `+inf`).
    pub lambda_v_minus: f64,
    pub lambda_v_plus: f64,
    /// Roots of `m^2 + c m - 1 = 0` (behaviour of `1-U` at `-inf`).
    pub mu_u_minus: f64,
    pub mu_u_plus: f64,
    /// Roots of `d m^2 + c m - r(b-1) = 0` (behaviour of `V` at `-inf`).
    pub mu_v_minus: f64,
    pub mu_v_plus: f64,
}

pub fn spectral_exponents(c: f64, p: &Params) -> Result<SpectralExponents, ModelError> {
    let su = checked_sqrt(u_discriminant(c, p.a), c * c)?;
    let sv = (c * c + 4.0 * p.r * p.d).sqrt();
    let smu = (c * c + 4.0).sqrt();
    let smv = (c * c + 4.0 * p.r * p.d * (p.b - 1.0)).sqrt();
    Ok(SpectralExponents {
        c,
        lambda_u_minus: (-c - su) / 2.0,
        lambda_u_plus: (-c + su) / 2.0,
        lambda_v_minus: (-c - sv) / (2.0 * p.d),
        lambda_v_plus: (-c + sv) / (2.0 * p.d),
        mu_u_minus: (-c - smu) / 2.0,
        mu_u_plus: (-c + smu) / 2.0,
        mu_v_minus: (-c - smv) / (2.0 * p.d),
        mu_v_plus: (-c + smv) / (2.0 * p.d),
    })
}

/// `f(c) = c - sqrt(c^2 - 4(1-a)) + 2 sqrt(a)`, decreasing on `c >= 2 sqrt(1-a)`.
pub fn aux_f(c: f64, a: f64) -> Result<f64, ModelError> {
    let s = checked_sqrt(u_discriminant(c, a), c * c)?;
    Ok(c - s + 2.0 * a.sqrt())
}

/// Inverse of [`aux_f`]: `c'/2 - sqrt(a) + 2(1-a)/(c' - 2 sqrt(a))`.
pub fn aux_f_inverse(c_prime: f64, a: f64) -> Result<f64, ModelError> {
    let bound = 2.0 * a.sqrt();
    if !(c_prime > bound) {
        return Err(ModelError::Domain { c_prime, bound });
    }
    Ok(c_prime / 2.0 - a.sqrt() + 2.0 * (1.0 - a) / (c_prime - bound))
}

/// `lambda(c) = (c - sqrt(c^2 - 4(1-a)))/2`, the slow decay rate of a wave of
/// speed `c` (sign flipped).
pub fn small_lambda(c: f64, a: f64) -> Result<f64, ModelError> {
    let s = checked_sqrt(u_discriminant(c, a), c * c)?;
    Ok((c - s) / 2.0)
}

/// Leading-edge exponent of `u` ahead of a fast front.
///
/// Returns `(Lambda(c, c'), lambda(c))` where `Lambda` is the smaller root of
/// `L^2 - c' L + (1 + lambda(c)(c' - c)) = 0`. Real only when `c' >= f(c)`.
pub fn capital_lambda(c: f64, c_prime: f64, a: f64) -> Result<(f64, f64), ModelError> {
    let lam = small_lambda(c, a)?;
    let disc = c_prime * c_prime - 4.0 * lam * (c_prime - c) - 4.0;
    let s = checked_sqrt(disc, c_prime * c_prime)?;
    Ok(((c_prime - s) / 2.0, lam))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeTag {
    /// `c_u > c_v`: `u` is the only survivor and the fastest species.
    FasterU,
    /// `c_v = c_u`, excluded from the classification.
    Degenerate,
    /// `c_v >= f(c*)`: the slow front moves at `c*`.
    SlowFrontCStar,
    /// `c_v in (2, f(c*))`: the slow front is pulled up to `c_**`.
    SlowFrontCStarStar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedRegime {
    pub c_u: f64,
    pub c_v: f64,
    pub c_star: f64,
    /// Accelerated speed, present only in the nonlocal pulling case.
    pub c_star_star: Option<f64>,
    /// Speed of the slow front when `c_v > c_u`; `c_u` otherwise.
    pub script_c: f64,
    pub case_tag: RegimeTag,
}

/// Relative tolerance for declaring `c_v == c_u`.
const DEGENERATE_TOL: f64 = 1e-12;

pub fn speed_regime(p: &Params, c_star: f64) -> Result<SpeedRegime, ModelError> {
    p.require_strong_weak()?;
    let lo = p.linear_speed();
    if !(c_star >= lo * (1.0 - 1e-12) && c_star <= 2.0 * (1.0 + 1e-12)) {
        return Err(ModelError::SpeedOutOfRange { c_star, lo });
    }
    let c_u = p.c_u();
    let c_v = p.c_v();
    let base = SpeedRegime {
        c_u,
        c_v,
        c_star,
        c_star_star: None,
        script_c: c_u,
        case_tag: RegimeTag::FasterU,
    };
    if (c_v - c_u).abs() <= DEGENERATE_TOL * c_u {
        return Ok(SpeedRegime {
            case_tag: RegimeTag::Degenerate,
            ..base
        });
    }
    if c_v < c_u {
        return Ok(base);
    }
    let f_star = aux_f(c_star, p.a)?;
    if c_v >= f_star {
        return Ok(SpeedRegime {
            script_c: c_star,
            case_tag: RegimeTag::SlowFrontCStar,
            ..base
        });
    }
    let root = (p.r * p.d).sqrt();
    let sa = p.a.sqrt();
    let c_ss = root - sa + (1.0 - p.a) / (root - sa);
    if !(c_ss > c_star && c_ss < 2.0) {
        return Err(ModelError::InvalidInterval {
            c_star_star: c_ss,
            c_star,
        });
    }
    Ok(SpeedRegime {
        c_star_star: Some(c_ss),
        script_c: c_ss,
        case_tag: RegimeTag::SlowFrontCStarStar,
        ..base
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    LinearSufficient,
    NonlinearSufficient,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeterminacyVerdict {
    /// `0 < d < 2` and `r(ab-1) <= (2-d)(1-a)`.
    pub llw_holds: bool,
    /// `((2-d)(1-a)+r)/(rb) >= max{a, (d-2)/(2|d-1|)}`.
    pub huang_holds: bool,
    /// `((d+2)(1-a)+r)/(rb) < 1 - 2(1-a)`.
    pub ao_nonlinear_holds: bool,
    pub verdict: Verdict,
}

impl DeterminacyVerdict {
    /// Name of the condition that decided the verdict, for reports.
    pub fn firing_condition(&self) -> &'static str {
        match (self.llw_holds, self.huang_holds, self.ao_nonlinear_holds) {
            (true, _, _) => "linear determinacy: 0<d<2 and r(ab-1) <= (2-d)(1-a)",
            (false, true, _) => "linear determinacy: ((2-d)(1-a)+r)/(rb) >= max{a,(d-2)/(2|d-1|)}",
            (false, false, true) => "nonlinear determinacy: ((d+2)(1-a)+r)/(rb) < 1-2(1-a)",
            _ => "none (both sufficient conditions fail)",
        }
    }
}

/// Evaluates the sufficient conditions for linear and nonlinear selection of
/// the minimal speed. None of them is necessary; `Inconclusive` defers to the
/// numerically computed `c*`.
pub fn classify_determinacy(p: &Params) -> Result<DeterminacyVerdict, ModelError> {
    p.require_strong_weak()?;
    let Params { a, b, d, r } = *p;
    let llw_holds = d < 2.0 && r * (a * b - 1.0) <= (2.0 - d) * (1.0 - a);
    // For d <= 2 the second argument of the max is negative (or singular at
    // d = 1), so the max is a.
    let rhs = if d <= 2.0 {
        a
    } else {
        a.max((d - 2.0) / (2.0 * (d - 1.0).abs()))
    };
    let huang_holds = ((2.0 - d) * (1.0 - a) + r) / (r * b) >= rhs;
    let ao_nonlinear_holds = ((d + 2.0) * (1.0 - a) + r) / (r * b) < 1.0 - 2.0 * (1.0 - a);
    let linear = llw_holds || huang_holds;
    if linear && ao_nonlinear_holds {
        return Err(ModelError::ConflictingConditions(*p));
    }
    let verdict = if linear {
        Verdict::LinearSufficient
    } else if ao_nonlinear_holds {
        Verdict::NonlinearSufficient
    } else {
        Verdict::Inconclusive
    };
    Ok(DeterminacyVerdict {
        llw_holds,
        huang_holds,
        ao_nonlinear_holds,
        verdict,
    })
}

/// Pushed-front predicate `c* > 2 sqrt(1-a)`, with a relative margin to
/// absorb the bisection tolerance.
pub fn is_pushed(p: &Params, c_star: f64, margin: f64) -> bool {
    c_star > p.linear_speed() + margin
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(a: f64, b: f64, d: f64, r: f64) -> Params {
        Params::new(a, b, d, r).unwrap()
    }

    #[test]
    fn reaction_equilibria_and_values() {
        let q = p(0.5, 2.0, 1.0, 1.0);
        assert_eq!(reaction_terms(0.0, 0.0, &q), (0.0, 0.0));
        assert_eq!(reaction_terms(1.0, 0.0, &q), (0.0, 0.0));
        assert_eq!(reaction_terms(0.0, 1.0, &q), (0.0, 0.0));
        let (f, g) = reaction_terms(0.5, 0.5, &q);
        assert_relative_eq!(f, 0.125, epsilon = 1e-15);
        assert_relative_eq!(g, -0.25, epsilon = 1e-15);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(matches!(
            Params::new(0.5, 0.0, 1.0, 1.0),
            Err(ModelError::NonPositive { name: "b", .. })
        ));
        assert!(Params::new(f64::NAN, 2.0, 1.0, 1.0).is_err());
        assert!(Params::strong_weak(1.5, 2.0, 1.0, 1.0).is_err());
        assert!(p(0.5, 1.5, 1.0, 1.0).is_strong_weak());
        assert!(!p(0.5, 0.9, 1.0, 1.0).is_strong_weak());
    }

    #[test]
    fn spectral_values() {
        let q = p(0.75, 2.0, 1.0, 1.0);
        let s = spectral_exponents(1.0, &q).unwrap();
        assert_relative_eq!(s.lambda_u_minus, -0.5, epsilon = 1e-12);
        assert_relative_eq!(s.lambda_u_plus, -0.5, epsilon = 1e-12);
        let s = spectral_exponents(2.0, &q).unwrap();
        assert_relative_eq!(s.lambda_u_minus, -1.866_025_403_784_438_6, epsilon = 1e-14);
        assert_relative_eq!(s.lambda_u_plus, -0.133_974_596_215_561_35, epsilon = 1e-14);
        assert_relative_eq!(s.lambda_v_plus, 0.414_213_562_373_095_05, epsilon = 1e-14);
        assert_relative_eq!(s.lambda_v_minus, -2.414_213_562_373_095, epsilon = 1e-14);
        assert_relative_eq!(s.mu_u_plus, 0.414_213_562_373_095_05, epsilon = 1e-14);
        assert!(matches!(
            spectral_exponents(0.9, &q),
            Err(ModelError::DiscriminantNegative { .. })
        ));
    }

    #[test]
    fn aux_f_values() {
        for a in [0.1, 0.25, 0.5, 0.9] {
            assert_relative_eq!(aux_f(2.0, a).unwrap(), 2.0, epsilon = 1e-14);
            assert_relative_eq!(aux_f_inverse(2.0, a).unwrap(), 2.0, epsilon = 1e-14);
        }
        let lin = 2.0 * 0.5f64.sqrt();
        assert_relative_eq!(aux_f(lin, 0.5).unwrap(), 2.0 * 2f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(aux_f(1.8, 0.5).unwrap(), 2.100_660_689_807_090_7, epsilon = 1e-14);
        assert!(aux_f(1.0, 0.5).is_err());
    }

    #[test]
    fn aux_f_inverse_values() {
        assert_relative_eq!(
            aux_f_inverse(2.0 * 2f64.sqrt(), 0.5).unwrap(),
            2f64.sqrt(),
            epsilon = 1e-14
        );
        assert_relative_eq!(aux_f_inverse(2.2, 0.25).unwrap(), 1.85, epsilon = 1e-14);
        assert!(matches!(
            aux_f_inverse(1.0, 0.25),
            Err(ModelError::Domain { .. })
        ));
    }

    #[test]
    fn capital_lambda_values() {
        for a in [0.2, 0.5, 0.8] {
            let (big, small) = capital_lambda(2.0, 2.0, a).unwrap();
            assert_relative_eq!(small, 1.0 - a.sqrt(), epsilon = 1e-14);
            assert_relative_eq!(big, 1.0, epsilon = 1e-14);
        }
        let (big, small) = capital_lambda(2.0, 3.0, 0.75).unwrap();
        assert_relative_eq!(small, 0.133_974_596_215_561_35, epsilon = 1e-14);
        assert_relative_eq!(big, 0.443_578_964_718_877_5, epsilon = 1e-14);

        let c = 2.0 * 0.5f64.sqrt();
        let cp = aux_f(c, 0.5).unwrap();
        let (big, _) = capital_lambda(c, cp, 0.5).unwrap();
        assert_relative_eq!(big, cp / 2.0, epsilon = 1e-7);
        assert!(capital_lambda(1.6, 1.7, 0.5).is_err());
    }

    #[test]
    fn regime_cases() {
        let q = p(0.5, 1.5, 1.0, 1.0);
        let reg = speed_regime(&q, 1.5).unwrap();
        assert_eq!(reg.case_tag, RegimeTag::Degenerate);

        let q = p(0.5, 1.5, 0.5, 1.0);
        assert_eq!(speed_regime(&q, 1.5).unwrap().case_tag, RegimeTag::FasterU);

        let q = p(0.5, 1.5, 4.0, 1.0);
        let reg = speed_regime(&q, 1.6).unwrap();
        assert_eq!(reg.case_tag, RegimeTag::SlowFrontCStar);
        assert_eq!(reg.script_c, 1.6);
        assert!(reg.c_star_star.is_none());

        let q = p(0.25, 1.5, 1.1, 1.1);
        let reg = speed_regime(&q, 3f64.sqrt()).unwrap();
        assert_eq!(reg.case_tag, RegimeTag::SlowFrontCStarStar);
        assert_relative_eq!(reg.c_star_star.unwrap(), 1.85, epsilon = 1e-12);
        assert_relative_eq!(reg.script_c, 1.85, epsilon = 1e-12);

        // c* = 1.9 gives f(c*) < 2.2, so the slow front is c* again
        let reg = speed_regime(&q, 1.9).unwrap();
        assert_eq!(reg.case_tag, RegimeTag::SlowFrontCStar);
        assert!(speed_regime(&q, 2.5).is_err());
    }

    #[test]
    fn classify_examples() {
        let v = classify_determinacy(&p(0.5, 1.5, 1.0, 1.0)).unwrap();
        assert!(v.llw_holds);
        assert_eq!(v.verdict, Verdict::LinearSufficient);

        let v = classify_determinacy(&p(0.9, 5.0, 1.0, 1.0)).unwrap();
        assert!(v.ao_nonlinear_holds);
        assert!(!v.llw_holds && !v.huang_holds);
        assert_eq!(v.verdict, Verdict::NonlinearSufficient);

        let v = classify_determinacy(&p(0.5, 1.5, 4.0, 1.0)).unwrap();
        assert_eq!(v.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn huang_singular_at_d_one() {
        let v = classify_determinacy(&p(0.3, 2.0, 1.0, 0.5)).unwrap();
        assert_eq!(v.llw_holds, v.huang_holds);
    }
}
