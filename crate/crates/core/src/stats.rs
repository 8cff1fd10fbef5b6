//! Small least-squares helpers shared by the fitting code.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub slope_stderr: f64,
    /// Max absolute residual.
    pub residual_sup: f64,
    /// Root-mean-square residual.
    pub residual_rms: f64,
}

/// Ordinary least squares `y = slope x + intercept`. Needs at least two
/// distinct abscissae.
pub fn ols(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    if !(sxx > 0.0) {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss = 0.0;
    let mut sup = 0.0f64;
    for (xi, yi) in x.iter().zip(y) {
        let r = yi - (slope * xi + intercept);
        ss += r * r;
        sup = sup.max(r.abs());
    }
    let slope_stderr = if n > 2 {
        (ss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some(LineFit {
        slope,
        intercept,
        slope_stderr,
        residual_sup: sup,
        residual_rms: (ss / nf).sqrt(),
    })
}
