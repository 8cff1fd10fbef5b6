//! Shared fixtures for the benchmarks.

use compwave::Params;

/// Linearly selected front: `c* = 2 sqrt(1-a)`.
pub fn linear_params() -> Params {
    Params::new(0.5, 1.5, 1.0, 1.0).expect("valid parameters")
}

/// Pushed front with `c*` well above the linear speed.
pub fn pushed_params() -> Params {
    Params::new(0.9, 5.0, 1.0, 1.0).expect("valid parameters")
}
