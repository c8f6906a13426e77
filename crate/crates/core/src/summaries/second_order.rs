//! Ripley's K and the pair correlation function with translation edge correction.

use std::f64::consts::PI;

use super::{check_rgrid, PointPattern, SummaryFunction, Window};
use crate::error::{Error, Result};

/// Unordered pair `i < j` at distance `d` with translation weight `e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    pub i: usize,
    pub j: usize,
    pub d: f64,
    pub e: f64,
}

/// `|W| / |W ∩ (W + v)|`, infinite when the translate misses the window.
pub fn translation_weight(window: &Window, dx: f64, dy: f64) -> f64 {
    let overlap = window.translated_overlap(dx, dy);
    if overlap > 0.0 {
        window.area() / overlap
    } else {
        f64::INFINITY
    }
}

/// All unordered pairs closer than `rmax` (inclusive), found by an x-sorted sweep.
pub fn close_pairs(pattern: &PointPattern, rmax: f64) -> Vec<Pair> {
    let pts = pattern.points();
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| pts[a][0].total_cmp(&pts[b][0]).then(a.cmp(&b)));
    let r2 = rmax * rmax;
    let mut pairs = Vec::new();
    for (a, &ia) in order.iter().enumerate() {
        let pa = pts[ia];
        for &ib in &order[a + 1..] {
            let pb = pts[ib];
            let dx = pb[0] - pa[0];
            if dx > rmax {
                break;
            }
            let dy = pb[1] - pa[1];
            let dd = dx * dx + dy * dy;
            if dd <= r2 {
                let e = translation_weight(pattern.window(), dx, dy);
                if e.is_finite() {
                    let (i, j) = if ia < ib { (ia, ib) } else { (ib, ia) };
                    pairs.push(Pair { i, j, d: dd.sqrt(), e });
                }
            }
        }
    }
    pairs
}

fn pair_weight(pattern: &PointPattern, intensities: Option<&[f64]>, pair: &Pair) -> f64 {
    match intensities {
        Some(rho) => 1.0 / (rho[pair.i] * rho[pair.j]),
        None => 1.0 / squared_intensity(pattern),
    }
}

/// `n(n−1)/|W|²`, the unbiased estimate of `ρ²` for a Poisson count.
pub fn squared_intensity(pattern: &PointPattern) -> f64 {
    let n = pattern.len() as f64;
    let a = pattern.window().area();
    n * (n - 1.0) / (a * a)
}

fn check_intensities(pattern: &PointPattern, intensities: Option<&[f64]>) -> Result<()> {
    if let Some(rho) = intensities {
        if rho.len() != pattern.len() {
            return Err(Error::DimensionMismatch {
                expected: pattern.len(),
                found: rho.len(),
            });
        }
        if rho.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "point intensities must be positive and finite".into(),
            ));
        }
    }
    Ok(())
}

/// Translation-corrected estimate of Ripley's K on `rgrid`.
///
/// Homogeneous pairs are weighted by `|W|²/(n(n−1))`; supplying
/// per-point intensities gives the inhomogeneous estimator with weights
/// `1/(ρ̂(xᵢ)ρ̂(xⱼ))`.
pub fn ripley_k(
    pattern: &PointPattern,
    rgrid: &[f64],
    intensities: Option<&[f64]>,
) -> Result<SummaryFunction> {
    if pattern.len() < 2 {
        return Err(Error::TooFewPoints {
            required: 2,
            found: pattern.len(),
        });
    }
    check_rgrid(rgrid)?;
    check_intensities(pattern, intensities)?;
    let rmax = *rgrid.last().unwrap();
    let limit = pattern.window().min_side() / 4.0;
    if rmax > limit * (1.0 + 1e-12) {
        return Err(Error::RangeTooLarge { r: rmax, max: limit });
    }
    let area = pattern.window().area();
    let mut bins = vec![0.0; rgrid.len()];
    for pair in close_pairs(pattern, rmax) {
        let k = rgrid.partition_point(|&r| r < pair.d);
        if k < bins.len() {
            bins[k] += 2.0 * pair_weight(pattern, intensities, &pair) * pair.e / area;
        }
    }
    let mut acc = 0.0;
    let values = bins
        .into_iter()
        .map(|b| {
            acc += b;
            acc
        })
        .collect();
    SummaryFunction::new(rgrid.to_vec(), values)
}

/// Stoyan's rule of thumb `0.15/√ρ̂` for the Epanechnikov half-width.
pub fn stoyan_bandwidth(intensity: f64) -> f64 {
    0.15 / intensity.sqrt()
}

fn epanechnikov(t: f64, h: f64) -> f64 {
    let u = t / h;
    if u.abs() >= 1.0 {
        0.0
    } else {
        0.75 * (1.0 - u * u) / h
    }
}

/// Kernel estimate of the pair correlation function.
///
/// `ĝ(r) = Σ_{i≠j} k_b(r − dᵢⱼ) eᵢⱼ wᵢⱼ / (2πr|W|)` with an Epanechnikov kernel
/// of half-width `b` (default [`stoyan_bandwidth`]).
pub fn pcf_estimate(
    pattern: &PointPattern,
    rgrid: &[f64],
    bandwidth: Option<f64>,
    intensities: Option<&[f64]>,
) -> Result<SummaryFunction> {
    if pattern.len() < 2 {
        return Err(Error::TooFewPoints {
            required: 2,
            found: pattern.len(),
        });
    }
    check_rgrid(rgrid)?;
    if rgrid[0] <= 0.0 {
        return Err(Error::NonpositiveR);
    }
    check_intensities(pattern, intensities)?;
    let b = bandwidth.unwrap_or_else(|| stoyan_bandwidth(pattern.intensity()));
    if !(b > 0.0) {
        return Err(Error::InvalidArgument("pcf bandwidth must be positive".into()));
    }
    let area = pattern.window().area();
    let rmax = *rgrid.last().unwrap();
    let mut sums = vec![0.0; rgrid.len()];
    for pair in close_pairs(pattern, rmax + b) {
        let w = 2.0 * pair_weight(pattern, intensities, &pair) * pair.e;
        let lo = rgrid.partition_point(|&r| r <= pair.d - b);
        for (k, &r) in rgrid.iter().enumerate().skip(lo) {
            if r >= pair.d + b {
                break;
            }
            sums[k] += w * epanechnikov(r - pair.d, b);
        }
    }
    let values = rgrid
        .iter()
        .zip(sums)
        .map(|(&r, s)| s / (2.0 * PI * r * area))
        .collect();
    SummaryFunction::new(rgrid.to_vec(), values)
}
