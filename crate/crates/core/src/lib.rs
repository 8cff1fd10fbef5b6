//! Numerical laboratory for the strong-weak Lotka-Volterra competition-diffusion
//! system
//!
//! ```text
//! u_t = u_xx + u(1 - u - a v)
//! v_t = d v_xx + r v(1 - v - b u)
//! ```
//!
//! with `0 < a < 1 < b`: minimal traveling-wave speeds, spreading regimes,
//! front tracking, and numerical checks of explicit sub/super-solutions.

pub mod comparison;
pub mod front;
pub mod linalg;
pub mod model;
pub mod pde;
pub mod stats;
pub mod wave;

pub use model::{
    aux_f, aux_f_inverse, capital_lambda, classify_determinacy, reaction_terms, small_lambda,
    spectral_exponents, speed_regime, DeterminacyVerdict, ModelError, Params, RegimeTag,
    SpectralExponents, SpeedRegime, Verdict,
};
pub use wave::{
    minimal_speed, solve_wave_profile, verify_asymptotics, MinimalSpeed, SpeedSearch,
    WaveAsymptoticsReport, WaveConfig, WaveError, WaveEval, WaveProfile,
};
