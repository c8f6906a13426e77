//! Gaussian-kernel determinantal point processes.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::summaries::{PointPattern, Window};

/// Largest scale for which the Gaussian kernel with intensity `rho_max` exists.
pub fn dpp_alpha_max(rho_max: f64) -> f64 {
    1.0 / (PI * rho_max).sqrt()
}

pub fn dpp_theory_g(alpha: f64, r: f64) -> f64 {
    -(-2.0 * r * r / (alpha * alpha)).exp_m1()
}

pub fn dpp_theory_k(alpha: f64, r: f64) -> f64 {
    PI * r * r + 0.5 * PI * alpha * alpha * (-2.0 * r * r / (alpha * alpha)).exp_m1()
}

/// Log-linear intensity `exp(β₀ + β₁x)` with Gaussian kernel scale `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DppGauss {
    pub beta0: f64,
    pub beta1: f64,
    pub alpha: f64,
}

/// Relative slack allowed on the existence bound, for bounds computed by
/// rounding-sensitive routes.
const EXISTENCE_SLACK: f64 = 1e-12;

impl DppGauss {
    pub fn homogeneous(rho: f64, alpha: f64) -> Self {
        Self {
            beta0: rho.ln(),
            beta1: 0.0,
            alpha,
        }
    }

    pub fn intensity(&self, x: f64) -> f64 {
        (self.beta0 + self.beta1 * x).exp()
    }

    pub fn rho_max(&self, window: &Window) -> f64 {
        self.intensity(window.x0).max(self.intensity(window.x1))
    }

    pub fn alpha_max(&self, window: &Window) -> f64 {
        dpp_alpha_max(self.rho_max(window))
    }

    pub fn check(&self, window: &Window) -> Result<()> {
        let alpha_max = self.alpha_max(window);
        if !(self.alpha > 0.0) || self.alpha > alpha_max * (1.0 + EXISTENCE_SLACK) {
            return Err(Error::ExistenceViolated {
                alpha: self.alpha,
                alpha_max,
            });
        }
        Ok(())
    }
}

/// Truncation of the Fourier approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    /// Largest admissible sum of excluded eigenvalues.
    pub tail_cap: f64,
    /// Hard limit on the number of retained frequencies.
    pub max_frequencies: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            tail_cap: 1e-3,
            max_frequencies: 200_000,
        }
    }
}

/// `Σ_{k∈ℤ} exp(−c k²)`.
fn theta(c: f64) -> f64 {
    let mut s = 1.0;
    let mut k = 1.0f64;
    loop {
        let t = (-c * k * k).exp();
        s += 2.0 * t;
        if t < 1e-18 * s {
            return s;
        }
        k += 1.0;
    }
}

/// Retained frequencies `(k₁, k₂, λ_k)` inside an ellipse chosen so the
/// excluded eigenvalues sum below the cap.
fn spectrum(rho: f64, alpha: f64, window: &Window, opts: &SpectralOptions) -> Result<Vec<(i64, i64, f64)>> {
    let (l1, l2) = (window.width(), window.height());
    let lead = rho * PI * alpha * alpha;
    let c = PI * PI * alpha * alpha;
    let total = lead * theta(c / (l1 * l1)) * theta(c / (l2 * l2));
    // Radius in frequency space where eigenvalues fall below the cap.
    let mut radius = ((lead / opts.tail_cap).max(1.0).ln() / c).sqrt().max(1.0 / l1.min(l2));
    loop {
        let k1max = (radius * l1).floor() as i64;
        let k2max = (radius * l2).floor() as i64;
        let approx = (2 * k1max + 1) as f64 * (2 * k2max + 1) as f64;
        if approx > 2.0 * opts.max_frequencies as f64 {
            return Err(Error::TruncationTooCoarse {
                cap: opts.tail_cap,
            });
        }
        let mut kept = Vec::new();
        let mut mass = 0.0;
        for k1 in -k1max..=k1max {
            let f1 = k1 as f64 / l1;
            for k2 in -k2max..=k2max {
                let f2 = k2 as f64 / l2;
                let w2 = f1 * f1 + f2 * f2;
                if w2 <= radius * radius {
                    let lambda = lead * (-c * w2).exp();
                    mass += lambda;
                    kept.push((k1, k2, lambda));
                }
            }
        }
        if total - mass < opts.tail_cap {
            if kept.len() > opts.max_frequencies {
                return Err(Error::TruncationTooCoarse {
                    cap: opts.tail_cap,
                });
            }
            return Ok(kept);
        }
        radius *= 1.1;
    }
}

/// Projection process with the selected Fourier eigenfunctions, sampled
/// point by point with a Gram–Schmidt update of the conditional kernel.
fn sample_projection<R: Rng + ?Sized>(freqs: &[(f64, f64)], window: &Window, rng: &mut R) -> Vec<[f64; 2]> {
    let n = freqs.len();
    // Orthonormal basis of the span of feature vectors at accepted points,
    // stored as separate real and imaginary parts.
    let mut basis_re: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut basis_im: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut vre = vec![0.0; n];
    let mut vim = vec![0.0; n];
    let mut coef = vec![(0.0, 0.0); n];
    let mut points = Vec::with_capacity(n);
    let (l1, l2) = (window.width(), window.height());
    while points.len() < n {
        let ux = rng.random::<f64>();
        let uy = rng.random::<f64>();
        for (k, &(f1, f2)) in freqs.iter().enumerate() {
            let phase = 2.0 * PI * (f1 * ux + f2 * uy);
            let (s, c) = phase.sin_cos();
            vre[k] = c;
            vim[k] = s;
        }
        // Squared norm of the component orthogonal to the basis; the full
        // feature vector has squared norm n.
        let mut resid = n as f64;
        for (m, (bre, bim)) in basis_re.iter().zip(&basis_im).enumerate() {
            let mut cr = 0.0;
            let mut ci = 0.0;
            for k in 0..n {
                // conj(b) · v
                cr += bre[k] * vre[k] + bim[k] * vim[k];
                ci += bre[k] * vim[k] - bim[k] * vre[k];
            }
            coef[m] = (cr, ci);
            resid -= cr * cr + ci * ci;
        }
        let accept = rng.random::<f64>() * (n as f64) < resid;
        if !accept {
            continue;
        }
        let mut ere = vre.clone();
        let mut eim = vim.clone();
        for (m, (bre, bim)) in basis_re.iter().zip(&basis_im).enumerate() {
            let (cr, ci) = coef[m];
            for k in 0..n {
                ere[k] -= cr * bre[k] - ci * bim[k];
                eim[k] -= cr * bim[k] + ci * bre[k];
            }
        }
        let norm = ere.iter().chain(&eim).map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 1e-12) {
            continue;
        }
        for k in 0..n {
            ere[k] /= norm;
            eim[k] /= norm;
        }
        basis_re.push(ere);
        basis_im.push(eim);
        points.push([window.x0 + ux * l1, window.y0 + uy * l2]);
    }
    points
}

/// Spectral simulation: homogeneous at the maximal intensity, then thinning
/// to the log-linear intensity.
pub fn simulate_dpp_gauss<R: Rng + ?Sized>(
    spec: &DppGauss,
    window: &Window,
    rng: &mut R,
) -> Result<PointPattern> {
    simulate_dpp_gauss_with(spec, window, &SpectralOptions::default(), rng)
}

pub fn simulate_dpp_gauss_with<R: Rng + ?Sized>(
    spec: &DppGauss,
    window: &Window,
    opts: &SpectralOptions,
    rng: &mut R,
) -> Result<PointPattern> {
    spec.check(window)?;
    let rho_max = spec.rho_max(window);
    let spectrum = spectrum(rho_max, spec.alpha, window, opts)?;
    let mut freqs = Vec::new();
    for &(k1, k2, lambda) in &spectrum {
        if rng.random::<f64>() < lambda {
            freqs.push((k1 as f64, k2 as f64));
        }
    }
    let mut points = sample_projection(&freqs, window, rng);
    if spec.beta1 != 0.0 {
        points.retain(|p| rng.random::<f64>() * rho_max < spec.intensity(p[0]));
    }
    PointPattern::new(points, *window)
}
