//! Minimum contrast fits on Ripley's K and the pair correlation function.

use serde::{Deserialize, Serialize};

use super::loglinear::LogLinearFit;
use super::optimize::{clamp_box, golden_section, nelder_mead, NelderMeadOptions};
use crate::error::{Error, Result};
use crate::models::{dpp_alpha_max, dpp_theory_g, dpp_theory_k, thomas_theory_g, thomas_theory_k};
use crate::summaries::{linspace, pcf_estimate, ripley_k, PointPattern, SummaryFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    K,
    Pcf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastConfig {
    pub q: f64,
    pub rmin: f64,
    /// Upper limit; `None` means a quarter of the shorter window side.
    pub rmax: Option<f64>,
    /// Number of grid points on `[rmin, rmax]`.
    pub grid: usize,
}

impl ContrastConfig {
    pub fn k_default() -> Self {
        Self {
            q: 0.25,
            rmin: 0.0,
            rmax: None,
            grid: 128,
        }
    }

    pub fn pcf_default() -> Self {
        Self {
            q: 0.5,
            rmin: 0.01,
            rmax: None,
            grid: 128,
        }
    }

    pub fn default_for(stat: Statistic) -> Self {
        match stat {
            Statistic::K => Self::k_default(),
            Statistic::Pcf => Self::pcf_default(),
        }
    }

    fn check(&self, rmax: f64) -> Result<()> {
        if !(self.q > 0.0 && self.q <= 1.0) {
            return Err(Error::InvalidArgument(format!("contrast exponent {} outside (0, 1]", self.q)));
        }
        if !(self.rmin >= 0.0 && self.rmin < rmax) || self.grid < 2 {
            return Err(Error::InvalidArgument(format!(
                "invalid contrast range [{}, {rmax}] with {} points",
                self.rmin, self.grid
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContrastFit {
    pub params: Vec<f64>,
    pub contrast: f64,
    /// Optimum within 1e-6 of a search bound (in the search coordinates).
    pub boundary_hit: bool,
    pub converged: bool,
}

/// `∫ (Ŝ^q − S^q)² dr` by the trapezoid rule over the grid points of
/// `observed` that lie in `[rmin, rmax]`.
pub fn contrast(observed: &SummaryFunction, theory: impl Fn(f64) -> f64, q: f64, rmin: f64, rmax: f64) -> f64 {
    let mut prev: Option<(f64, f64)> = None;
    let mut total = 0.0;
    for (&r, &s) in observed.r().iter().zip(observed.values()) {
        if r < rmin - 1e-12 || r > rmax + 1e-12 {
            continue;
        }
        let d = s.max(0.0).powf(q) - theory(r).max(0.0).powf(q);
        let v = d * d;
        if let Some((r0, v0)) = prev {
            total += 0.5 * (r - r0) * (v + v0);
        }
        prev = Some((r, v));
    }
    total
}

/// Minimises the contrast over a box, searching in log coordinates.
///
/// One parameter uses golden-section search, two or more use Nelder–Mead
/// from three starting points spread along the diagonal of the box.
pub fn min_contrast(
    observed: &SummaryFunction,
    theory: impl Fn(&[f64], f64) -> f64,
    cfg: &ContrastConfig,
    bounds: &[(f64, f64)],
) -> Result<ContrastFit> {
    let rmax = cfg.rmax.unwrap_or(*observed.r().last().unwrap());
    cfg.check(rmax)?;
    let (first, last) = (observed.r()[0], *observed.r().last().unwrap());
    if first > cfg.rmin + 1e-12 || last < rmax - 1e-12 {
        return Err(Error::InvalidArgument("observed function does not cover the contrast range".into()));
    }
    if bounds.iter().any(|&(lo, hi)| !(lo > 0.0 && hi > lo)) {
        return Err(Error::InvalidArgument("contrast bounds must be positive intervals".into()));
    }
    let log_bounds: Vec<(f64, f64)> = bounds.iter().map(|&(lo, hi)| (lo.ln(), hi.ln())).collect();
    let objective = |u: &[f64]| {
        let theta: Vec<f64> = clamp_box(u, &log_bounds).iter().map(|v| v.exp()).collect();
        contrast(observed, |r| theory(&theta, r), cfg.q, cfg.rmin, rmax)
    };
    search(objective, &log_bounds)
}

pub(crate) fn search(objective: impl Fn(&[f64]) -> f64, log_bounds: &[(f64, f64)]) -> Result<ContrastFit> {
    let best = if log_bounds.len() == 1 {
        let (lo, hi) = log_bounds[0];
        golden_section(|u| objective(&[u]), lo, hi, 24, 1e-10)
    } else {
        let opts = NelderMeadOptions::default();
        let mut best: Option<super::optimize::Minimum> = None;
        for frac in [0.25, 0.5, 0.75] {
            let x0: Vec<f64> = log_bounds.iter().map(|&(lo, hi)| lo + frac * (hi - lo)).collect();
            let step: Vec<f64> = log_bounds.iter().map(|&(lo, hi)| 0.1 * (hi - lo)).collect();
            let m = nelder_mead(&objective, &x0, &step, &opts);
            if best.as_ref().is_none_or(|b| m.value < b.value) {
                best = Some(m);
            }
        }
        best.unwrap()
    };
    let u = clamp_box(&best.x, log_bounds);
    let boundary_hit = u
        .iter()
        .zip(log_bounds)
        .any(|(&v, &(lo, hi))| v - lo < 1e-6 || hi - v < 1e-6);
    Ok(ContrastFit {
        params: u.iter().map(|v| v.exp()).collect(),
        contrast: best.value,
        boundary_hit,
        converged: best.converged,
    })
}

/// Grid on which the observed summary is tabulated for a contrast fit.
pub fn contrast_grid(pattern: &PointPattern, cfg: &ContrastConfig) -> Vec<f64> {
    let rmax = cfg.rmax.unwrap_or(pattern.window().min_side() / 4.0);
    linspace(cfg.rmin, rmax, cfg.grid)
}

pub fn observed_summary(
    pattern: &PointPattern,
    stat: Statistic,
    cfg: &ContrastConfig,
    intensities: Option<&[f64]>,
) -> Result<SummaryFunction> {
    let r = contrast_grid(pattern, cfg);
    match stat {
        Statistic::K => ripley_k(pattern, &r, intensities),
        Statistic::Pcf => pcf_estimate(pattern, &r, None, intensities),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DppFit {
    pub alpha: f64,
    pub alpha_max: f64,
    pub boundary_hit: bool,
    pub converged: bool,
}

/// Contrast fit of the Gaussian DPP scale on `(α_max·1e−3, α_max]`, where
/// `α_max` comes from the fitted intensity. With an inhomogeneous intensity the
/// summaries are reweighted by the fitted values at the points.
pub fn fit_dpp_contrast(
    pattern: &PointPattern,
    stat: Statistic,
    cfg: &ContrastConfig,
    intensity: &LogLinearFit,
) -> Result<DppFit> {
    let rho = intensity.at_points(pattern);
    let weights = (intensity.beta1 != 0.0).then_some(rho.as_slice());
    let observed = observed_summary(pattern, stat, cfg, weights)?;
    let alpha_max = dpp_alpha_max(intensity.max_over(pattern.window()));
    let fit = min_contrast(
        &observed,
        |t, r| match stat {
            Statistic::K => dpp_theory_k(t[0], r),
            Statistic::Pcf => dpp_theory_g(t[0], r),
        },
        cfg,
        &[(alpha_max * 1e-3, alpha_max)],
    )?;
    Ok(DppFit {
        alpha: fit.params[0],
        alpha_max,
        boundary_hit: fit.boundary_hit,
        converged: fit.converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThomasFit {
    pub kappa: f64,
    pub sigma2: f64,
    pub mu: f64,
    pub boundary_hit: bool,
    pub converged: bool,
}

/// Box for `(κ, σ²)`: `κ ∈ [ρ̂·1e−3, 10ρ̂]`, `σ ∈ [side·1e−3, side/2]`.
pub fn thomas_bounds(pattern: &PointPattern) -> [(f64, f64); 2] {
    let rho = pattern.intensity();
    let side = pattern.window().min_side();
    [(rho * 1e-3, 10.0 * rho), ((side * 1e-3).powi(2), (side / 2.0).powi(2))]
}

/// `μ̂ = n / (|W| κ̂)`.
pub fn fit_thomas_mu(pattern: &PointPattern, kappa_hat: f64) -> Result<f64> {
    if !(kappa_hat > 0.0) {
        return Err(Error::InvalidArgument("kappa estimate must be positive".into()));
    }
    Ok(pattern.len() as f64 / (pattern.window().area() * kappa_hat))
}

pub fn fit_thomas_contrast(pattern: &PointPattern, stat: Statistic, cfg: &ContrastConfig) -> Result<ThomasFit> {
    if pattern.is_empty() {
        return Err(Error::EmptyPattern);
    }
    let observed = observed_summary(pattern, stat, cfg, None)?;
    let fit = min_contrast(
        &observed,
        |t, r| {
            let sigma = t[1].sqrt();
            match stat {
                Statistic::K => thomas_theory_k(t[0], sigma, r),
                Statistic::Pcf => thomas_theory_g(t[0], sigma, r),
            }
        },
        cfg,
        &thomas_bounds(pattern),
    )?;
    Ok(ThomasFit {
        kappa: fit.params[0],
        sigma2: fit.params[1],
        mu: fit_thomas_mu(pattern, fit.params[0])?,
        boundary_hit: fit.boundary_hit,
        converged: fit.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tabulate(r: &[f64], f: impl Fn(f64) -> f64) -> SummaryFunction {
        SummaryFunction::new(r.to_vec(), r.iter().map(|&x| f(x)).collect()).unwrap()
    }

    #[test]
    fn dpp_theory_curve_is_a_fixed_point() {
        let alpha = 0.04;
        let cfg = ContrastConfig::pcf_default();
        let r = linspace(0.01, 0.25, 128);
        let obs = tabulate(&r, |x| dpp_theory_g(alpha, x));
        let cfg = ContrastConfig { rmax: Some(0.25), ..cfg };
        let fit = min_contrast(&obs, |t, x| dpp_theory_g(t[0], x), &cfg, &[(1e-4, 0.056)]).unwrap();
        assert!((fit.params[0] - alpha).abs() < 1e-7, "{:?}", fit);
        assert!(fit.contrast < 1e-12);
        assert!(!fit.boundary_hit);
    }

    #[test]
    fn thomas_theory_curve_is_a_fixed_point() {
        let (kappa, s2) = (10.0, 0.0025f64);
        let r = linspace(0.0, 0.5, 128);
        let obs = tabulate(&r, |x| thomas_theory_k(kappa, s2.sqrt(), x));
        let cfg = ContrastConfig {
            rmax: Some(0.5),
            ..ContrastConfig::k_default()
        };
        let fit = min_contrast(
            &obs,
            |t, x| thomas_theory_k(t[0], t[1].sqrt(), x),
            &cfg,
            &[(0.1, 1000.0), (4e-6, 1.0)],
        )
        .unwrap();
        assert!(fit.contrast < 1e-12, "{:?}", fit);
        assert!((fit.params[0] / kappa - 1.0).abs() < 1e-4, "{:?}", fit);
        assert!((fit.params[1] / s2 - 1.0).abs() < 1e-4, "{:?}", fit);
    }

    #[test]
    fn boundary_flag() {
        let r = linspace(0.01, 0.25, 64);
        let obs = tabulate(&r, |x| dpp_theory_g(0.09, x));
        let cfg = ContrastConfig {
            rmax: Some(0.25),
            ..ContrastConfig::pcf_default()
        };
        let fit = min_contrast(&obs, |t, x| dpp_theory_g(t[0], x), &cfg, &[(1e-4, 0.056)]).unwrap();
        assert!(fit.boundary_hit);
        assert!((fit.params[0] - 0.056).abs() < 1e-9);
    }

    #[test]
    fn trapezoid_contrast_by_hand() {
        let obs = tabulate(&[0.0, 0.5, 1.0], |x| x * x);
        // (x − 0)² integrand with q = 1 → x⁴ at nodes 0, 1/16, 1.
        let c = contrast(&obs, |_| 0.0, 1.0, 0.0, 1.0);
        assert!((c - (0.25 * (0.0 + 0.0625) + 0.25 * (0.0625 + 1.0))).abs() < 1e-15);
    }

    #[test]
    fn mu_from_kappa() {
        let pts: Vec<[f64; 2]> = (0..100).map(|i| [(i as f64 + 0.5) / 100.0, 0.5]).collect();
        let p = PointPattern::new(pts, crate::summaries::Window::unit()).unwrap();
        assert!((fit_thomas_mu(&p, 10.0).unwrap() - 10.0).abs() < 1e-12);
        assert!((fit_thomas_mu(&p, 20.0).unwrap() - 5.0).abs() < 1e-12);
    }
}
