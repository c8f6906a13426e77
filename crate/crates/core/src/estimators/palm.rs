//! Palm likelihood fits for the Thomas process and the Gaussian DPP.

use std::f64::consts::PI;

use super::contrast::{search, thomas_bounds, DppFit, ThomasFit};
use super::loglinear::LogLinearFit;
use crate::error::{Error, Result};
use crate::models::{dpp_alpha_max, dpp_theory_k, thomas_theory_k};
use crate::summaries::{close_pairs, PointPattern};

/// Pair distances within the cutoff and the intensity terms of the Palm
/// likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct PalmData {
    /// Squared distances of unordered pairs `i < j` with `dᵢⱼ ≤ R`.
    pub d2: Vec<f64>,
    /// `log ρ̂` attached to each pair (geometric mean of the two point
    /// intensities in the inhomogeneous case).
    pub log_rho: Vec<f64>,
    pub n: usize,
    /// Intensity used in the integral term.
    pub rho_bar: f64,
    pub cutoff: f64,
}

impl PalmData {
    /// `cutoff` defaults to a quarter of the shorter window side. With an
    /// intensity fit, pairs use `√(ρ̂(xᵢ)ρ̂(xⱼ))` and the integral uses the
    /// window average of `ρ̂`.
    pub fn new(pattern: &PointPattern, cutoff: Option<f64>, intensity: Option<&LogLinearFit>) -> Result<Self> {
        let r = cutoff.unwrap_or(pattern.window().min_side() / 4.0);
        if !(r > 0.0) {
            return Err(Error::NonpositiveR);
        }
        let pairs = close_pairs(pattern, r);
        if pairs.is_empty() {
            return Err(Error::NoPairs { r });
        }
        let (log_rho, rho_bar) = match intensity {
            Some(fit) => {
                let pts = pattern.points();
                let lr: Vec<f64> = pairs
                    .iter()
                    .map(|p| fit.beta0 + 0.5 * fit.beta1 * (pts[p.i][0] + pts[p.j][0]))
                    .collect();
                (lr, fit.mean_intensity(pattern.window()))
            }
            None => {
                let rho = pattern.intensity();
                (vec![rho.ln(); pairs.len()], rho)
            }
        };
        Ok(Self {
            d2: pairs.iter().map(|p| p.d * p.d).collect(),
            log_rho,
            n: pattern.len(),
            rho_bar,
            cutoff: r,
        })
    }

    fn log_rho_sum(&self) -> f64 {
        self.log_rho.iter().sum()
    }
}

/// `Σ_{i≠j, dᵢⱼ≤R} log(ρ̂ g(dᵢⱼ)) − n ρ̂ K(R)` for the Thomas process.
pub fn palm_loglik_thomas(data: &PalmData, kappa: f64, sigma2: f64) -> f64 {
    let a = 1.0 / (4.0 * PI * kappa * sigma2);
    let c = -1.0 / (4.0 * sigma2);
    let pair: f64 = data.d2.iter().map(|&d2| (a * (c * d2).exp()).ln_1p()).sum();
    2.0 * (pair + data.log_rho_sum()) - data.n as f64 * data.rho_bar * thomas_theory_k(kappa, sigma2.sqrt(), data.cutoff)
}

/// Same objective for the Gaussian DPP with `g = 1 − e^{−2r²/α²}`.
pub fn palm_loglik_dpp(data: &PalmData, alpha: f64) -> f64 {
    let c = -2.0 / (alpha * alpha);
    let pair: f64 = data.d2.iter().map(|&d2| (-(c * d2).exp_m1()).ln()).sum();
    2.0 * (pair + data.log_rho_sum()) - data.n as f64 * data.rho_bar * dpp_theory_k(alpha, data.cutoff)
}

fn check_not_flat(values: &[f64]) -> Result<()> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    if finite.len() < 2 || hi - lo <= 1e-12 * (1.0 + hi.abs()) {
        return Err(Error::DegenerateLikelihood);
    }
    Ok(())
}

/// Maximises the Thomas Palm likelihood over `(κ, σ²)` in the box of
/// [`thomas_bounds`].
pub fn fit_palm_thomas(pattern: &PointPattern, cutoff: Option<f64>) -> Result<ThomasFit> {
    let data = PalmData::new(pattern, cutoff, None)?;
    let bounds = thomas_bounds(pattern);
    let log_bounds: Vec<(f64, f64)> = bounds.iter().map(|&(lo, hi)| (lo.ln(), hi.ln())).collect();
    let corners: Vec<f64> = [0.0, 0.5, 1.0]
        .iter()
        .map(|&t| {
            let k = (log_bounds[0].0 + t * (log_bounds[0].1 - log_bounds[0].0)).exp();
            let s = (log_bounds[1].0 + t * (log_bounds[1].1 - log_bounds[1].0)).exp();
            palm_loglik_thomas(&data, k, s)
        })
        .collect();
    check_not_flat(&corners)?;
    let fit = search(
        |u| {
            let k = u[0].clamp(log_bounds[0].0, log_bounds[0].1).exp();
            let s = u[1].clamp(log_bounds[1].0, log_bounds[1].1).exp();
            -palm_loglik_thomas(&data, k, s)
        },
        &log_bounds,
    )?;
    let kappa = fit.params[0];
    Ok(ThomasFit {
        kappa,
        sigma2: fit.params[1],
        mu: pattern.len() as f64 / (pattern.window().area() * kappa),
        boundary_hit: fit.boundary_hit,
        converged: fit.converged,
    })
}

/// Maximises the DPP Palm likelihood over `α ∈ (α_max·1e−3, α_max]`.
pub fn fit_palm_dpp(pattern: &PointPattern, cutoff: Option<f64>, intensity: &LogLinearFit) -> Result<DppFit> {
    let inhomogeneous = intensity.beta1 != 0.0;
    let data = PalmData::new(pattern, cutoff, inhomogeneous.then_some(intensity))?;
    let alpha_max = dpp_alpha_max(intensity.max_over(pattern.window()));
    let log_bounds = [((alpha_max * 1e-3).ln(), alpha_max.ln())];
    let probe: Vec<f64> = [1e-3, 0.1, 0.5, 1.0]
        .iter()
        .map(|&t| palm_loglik_dpp(&data, alpha_max * t))
        .collect();
    check_not_flat(&probe)?;
    let fit = search(
        |u| -palm_loglik_dpp(&data, u[0].clamp(log_bounds[0].0, log_bounds[0].1).exp()),
        &log_bounds,
    )?;
    Ok(DppFit {
        alpha: fit.params[0],
        alpha_max,
        boundary_hit: fit.boundary_hit,
        converged: fit.converged,
    })
}
