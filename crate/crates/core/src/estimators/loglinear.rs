//! Poisson maximum likelihood for the intensity `exp(β₀ + β₁x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::summaries::{PointPattern, Window};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLinearFit {
    pub beta0: f64,
    pub beta1: f64,
    pub iterations: usize,
}

impl LogLinearFit {
    pub fn homogeneous(rho: f64) -> Self {
        Self {
            beta0: rho.ln(),
            beta1: 0.0,
            iterations: 0,
        }
    }

    pub fn intensity(&self, x: f64) -> f64 {
        (self.beta0 + self.beta1 * x).exp()
    }

    pub fn max_over(&self, window: &Window) -> f64 {
        self.intensity(window.x0).max(self.intensity(window.x1))
    }

    /// Intensity at each point of the pattern.
    pub fn at_points(&self, pattern: &PointPattern) -> Vec<f64> {
        pattern.points().iter().map(|p| self.intensity(p[0])).collect()
    }

    /// `∫_W ρ / |W|`.
    pub fn mean_intensity(&self, window: &Window) -> f64 {
        self.beta0.exp() * tilted_moments(self.beta1, window.x0, window.x1)[0] / window.width()
    }
}

/// `E_k(z) = ∫₀¹ tᵏ e^{zt} dt` for `k = 0, 1, 2`.
fn e_moments(z: f64) -> [f64; 3] {
    if z.abs() < 1.0 {
        let mut out = [0.0; 3];
        for (k, o) in out.iter_mut().enumerate() {
            let mut term = 1.0;
            let mut s = 0.0;
            for m in 0..60 {
                let add = term / (k + m + 1) as f64;
                s += add;
                if add.abs() < 1e-18 * s.abs() {
                    break;
                }
                term *= z / (m + 1) as f64;
            }
            *o = s;
        }
        out
    } else {
        let ez = z.exp();
        let e0 = z.exp_m1() / z;
        let e1 = (ez - e0) / z;
        let e2 = (ez - 2.0 * e1) / z;
        [e0, e1, e2]
    }
}

/// `∫_{x0}^{x1} xᵏ e^{βx} dx` for `k = 0, 1, 2`.
pub(crate) fn tilted_moments(beta: f64, x0: f64, x1: f64) -> [f64; 3] {
    let l = x1 - x0;
    let [e0, e1, e2] = e_moments(beta * l);
    let scale = l * (beta * x0).exp();
    [
        scale * e0,
        scale * (x0 * e0 + l * e1),
        scale * (x0 * x0 * e0 + 2.0 * x0 * l * e1 + l * l * e2),
    ]
}

/// Log likelihood `Σᵢ (β₀ + β₁xᵢ) − ∫_W e^{β₀+β₁x}`.
pub fn loglinear_loglik(pattern: &PointPattern, beta0: f64, beta1: f64) -> f64 {
    let w = pattern.window();
    let sx: f64 = pattern.points().iter().map(|p| p[0]).sum();
    let n = pattern.len() as f64;
    let i0 = tilted_moments(beta1, w.x0, w.x1)[0];
    n * beta0 + beta1 * sx - beta0.exp() * w.height() * i0
}

/// Newton iterations on the concave log likelihood, started at the
/// homogeneous fit and safeguarded by step halving.
pub fn fit_loglinear_intensity(pattern: &PointPattern) -> Result<LogLinearFit> {
    if pattern.is_empty() {
        return Err(Error::EmptyPattern);
    }
    let w = pattern.window();
    let n = pattern.len() as f64;
    let sx: f64 = pattern.points().iter().map(|p| p[0]).sum();
    let h = w.height();
    let mut b0 = (n / w.area()).ln();
    let mut b1 = 0.0;
    let grad = |b0: f64, b1: f64| {
        let m = tilted_moments(b1, w.x0, w.x1);
        let s = b0.exp() * h;
        ([n - s * m[0], sx - s * m[1]], [s * m[0], s * m[1], s * m[2]])
    };
    for it in 0..100 {
        let (g, hm) = grad(b0, b1);
        if (g[0] * g[0] + g[1] * g[1]).sqrt() < 1e-10 {
            return Ok(LogLinearFit {
                beta0: b0,
                beta1: b1,
                iterations: it,
            });
        }
        // Negative Hessian is [[h0, h1], [h1, h2]].
        let det = hm[0] * hm[2] - hm[1] * hm[1];
        if !(det > 0.0) {
            return Err(Error::NonConvergence { iterations: it });
        }
        let d0 = (hm[2] * g[0] - hm[1] * g[1]) / det;
        let d1 = (hm[0] * g[1] - hm[1] * g[0]) / det;
        let l0 = loglinear_loglik(pattern, b0, b1);
        let mut t = 1.0;
        loop {
            let (c0, c1) = (b0 + t * d0, b1 + t * d1);
            if loglinear_loglik(pattern, c0, c1) >= l0 - 1e-12 * l0.abs() || t < 1e-10 {
                b0 = c0;
                b1 = c1;
                break;
            }
            t *= 0.5;
        }
    }
    Err(Error::NonConvergence { iterations: 100 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tilted_moments_match_quadrature() {
        for &beta in &[0.0, 0.3, 4.0, -7.5] {
            let (x0, x1) = (-0.5, 1.5);
            let n = 200_000;
            let mut q = [0.0; 3];
            for i in 0..n {
                let x = x0 + (i as f64 + 0.5) * (x1 - x0) / n as f64;
                let e = (beta * x).exp() * (x1 - x0) / n as f64;
                q[0] += e;
                q[1] += x * e;
                q[2] += x * x * e;
            }
            let m = tilted_moments(beta, x0, x1);
            for k in 0..3 {
                assert!((m[k] - q[k]).abs() < 1e-8 * q[k].abs().max(1.0), "beta {beta} k {k}");
            }
        }
    }

    #[test]
    fn symmetric_pattern_has_flat_slope() {
        let pts: Vec<[f64; 2]> = (0..10).map(|i| [(i as f64 + 0.5) / 10.0, 0.5]).collect();
        let p = PointPattern::new(pts, Window::unit()).unwrap();
        let f = fit_loglinear_intensity(&p).unwrap();
        assert!(f.beta1.abs() < 1e-9);
        assert!((f.beta0 - 10f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn empty_pattern_rejected() {
        let p = PointPattern::empty(Window::unit());
        assert_eq!(fit_loglinear_intensity(&p), Err(Error::EmptyPattern));
    }
}
