use super::WaveProfile;
use crate::model::{reaction_terms, Params};

/// Continuous evaluation of a discrete wave: cubic Hermite interpolation
/// between nodes, exponential tails outside the grid.
#[derive(Debug, Clone)]
pub struct WaveEval {
    pub c: f64,
    pub params: Params,
    x0: f64,
    h: f64,
    u: Vec<f64>,
    v: Vec<f64>,
    du: Vec<f64>,
    dv: Vec<f64>,
    /// log-slopes of `1-U`, `V` on the left and `U`, `1-V` on the right
    left_rate_u: f64,
    left_rate_v: f64,
    right_rate_u: f64,
    right_rate_v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePoint {
    pub u: f64,
    pub du: f64,
    pub v: f64,
    pub dv: f64,
}

fn nodal_derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    d
}

fn log_slope(a: f64, b: f64, h: f64, fallback: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        let s = (b / a).ln() / h;
        if s.is_finite() {
            return s;
        }
    }
    fallback
}

impl WaveEval {
    pub fn new(w: &WaveProfile) -> Self {
        let h = w.h();
        let n = w.len();
        let du = nodal_derivative(&w.u, h);
        let dv = nodal_derivative(&w.v, h);
        // Left: 1-U and V grow with xi; right: U and 1-V decay.
        let left_rate_u = log_slope(1.0 - w.u[0], 1.0 - w.u[1], h, 1.0);
        let left_rate_v = log_slope(w.v[0], w.v[1], h, 1.0);
        let right_rate_u = log_slope(w.u[n - 2], w.u[n - 1], h, -1.0);
        let right_rate_v = log_slope(1.0 - w.v[n - 2], 1.0 - w.v[n - 1], h, -1.0);
        WaveEval {
            c: w.c,
            params: w.params,
            x0: w.xi[0],
            h,
            u: w.u.clone(),
            v: w.v.clone(),
            du,
            dv,
            left_rate_u,
            left_rate_v,
            right_rate_u,
            right_rate_v,
        }
    }

    pub fn xi_min(&self) -> f64 {
        self.x0
    }

    pub fn xi_max(&self) -> f64 {
        self.x0 + self.h * (self.u.len() - 1) as f64
    }

    /// `(U, U', V, V')` at `xi`.
    pub fn eval(&self, xi: f64) -> WavePoint {
        let n = self.u.len();
        let s = (xi - self.x0) / self.h;
        if s <= 0.0 {
            let dx = xi - self.x0;
            let eu = (1.0 - self.u[0]) * (self.left_rate_u * dx).exp();
            let ev = self.v[0] * (self.left_rate_v * dx).exp();
            return WavePoint {
                u: 1.0 - eu,
                du: -self.left_rate_u * eu,
                v: ev,
                dv: self.left_rate_v * ev,
            };
        }
        if s >= (n - 1) as f64 {
            let dx = xi - self.xi_max();
            let eu = self.u[n - 1] * (self.right_rate_u * dx).exp();
            let ev = (1.0 - self.v[n - 1]) * (self.right_rate_v * dx).exp();
            return WavePoint {
                u: eu,
                du: self.right_rate_u * eu,
                v: 1.0 - ev,
                dv: -self.right_rate_v * ev,
            };
        }
        let i = (s.floor() as usize).min(n - 2);
        let t = s - i as f64;
        let h = self.h;
        let herm = |f: &[f64], d: &[f64]| {
            let t2 = t * t;
            let t3 = t2 * t;
            let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
            let h10 = t3 - 2.0 * t2 + t;
            let h01 = -2.0 * t3 + 3.0 * t2;
            let h11 = t3 - t2;
            let val = h00 * f[i] + h10 * h * d[i] + h01 * f[i + 1] + h11 * h * d[i + 1];
            let g00 = 6.0 * t2 - 6.0 * t;
            let g10 = 3.0 * t2 - 4.0 * t + 1.0;
            let g01 = -6.0 * t2 + 6.0 * t;
            let g11 = 3.0 * t2 - 2.0 * t;
            let der = (g00 * f[i] + g01 * f[i + 1]) / h + g10 * d[i] + g11 * d[i + 1];
            (val, der)
        };
        let (u, du) = herm(&self.u, &self.du);
        let (v, dv) = herm(&self.v, &self.dv);
        WavePoint { u, du, v, dv }
    }

    /// Second derivatives from the wave equations themselves.
    pub fn second_derivatives(&self, pt: &WavePoint) -> (f64, f64) {
        let (f, g) = reaction_terms(pt.u, pt.v, &self.params);
        (-self.c * pt.du - f, (-self.c * pt.dv - g) / self.params.d)
    }

    pub fn tail_rates(&self) -> [f64; 4] {
        [
            self.left_rate_u,
            self.left_rate_v,
            self.right_rate_u,
            self.right_rate_v,
        ]
    }

    /// Largest `|U'|`, `|V'|` over the nodes.
    pub fn derivative_scale(&self) -> f64 {
        self.du
            .iter()
            .chain(self.dv.iter())
            .fold(0.0f64, |m, d| m.max(d.abs()))
    }
}
