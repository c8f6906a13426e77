use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::summaries::{IntensityField, PointPattern, Window};

/// Intensity of an inhomogeneous Poisson process.
#[derive(Debug, Clone, PartialEq)]
pub enum PoissonIntensity {
    /// One of the four benchmark intensities on the unit square.
    Preset(u8),
    Constant(f64),
    /// Piecewise constant over the pixels of a field.
    Field(IntensityField),
}

const SD3: f64 = 0.05;
const CENTRES3: [(f64, f64); 4] = [(0.25, 0.25), (0.25, 0.75), (0.75, 0.25), (0.75, 0.75)];

fn gauss_bump(x: f64, y: f64, a: f64, b: f64) -> f64 {
    let d2 = (x - a) * (x - a) + (y - b) * (y - b);
    (-d2 / (2.0 * SD3 * SD3)).exp() / (2.0 * PI * SD3 * SD3)
}

/// Benchmark intensities: 100; 1000; four Gaussian clusters of total mass
/// 100; `1000·e^{−3x}`.
pub fn poisson_intensity(preset: u8, x: f64, y: f64) -> Result<f64> {
    match preset {
        1 => Ok(100.0),
        2 => Ok(1000.0),
        3 => Ok(25.0 * CENTRES3.iter().map(|&(a, b)| gauss_bump(x, y, a, b)).sum::<f64>()),
        4 => Ok(1000.0 * (-3.0 * x).exp()),
        p => Err(Error::UnknownPreset(p)),
    }
}

impl PoissonIntensity {
    pub fn value(&self, x: f64, y: f64) -> Result<f64> {
        match self {
            PoissonIntensity::Preset(p) => poisson_intensity(*p, x, y),
            PoissonIntensity::Constant(c) => Ok(*c),
            PoissonIntensity::Field(f) => Ok(f.value_at(x, y)),
        }
    }

    /// Upper bound of the intensity over `window`.
    pub fn bound(&self, window: &Window) -> Result<f64> {
        let b = match self {
            PoissonIntensity::Preset(1) => 100.0,
            PoissonIntensity::Preset(2) => 1000.0,
            PoissonIntensity::Preset(3) => 25.0 / (2.0 * PI * SD3 * SD3) * (1.0 + 1e-6),
            PoissonIntensity::Preset(4) => 1000.0 * (-3.0 * window.x0).exp(),
            PoissonIntensity::Preset(p) => return Err(Error::UnknownPreset(*p)),
            PoissonIntensity::Constant(c) => *c,
            PoissonIntensity::Field(f) => f.max(),
        };
        if !b.is_finite() || b < 0.0 {
            return Err(Error::UnboundedIntensity);
        }
        Ok(b)
    }

    /// Samples the intensity at pixel centres of an `nx × ny` grid.
    pub fn to_field(&self, window: Window, nx: usize, ny: usize) -> Result<IntensityField> {
        self.bound(&window)?;
        IntensityField::from_fn(window, nx, ny, |x, y| self.value(x, y).unwrap_or(0.0))
    }
}

pub(crate) fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as usize
}

/// Homogeneous Poisson points on `window`: count first, then uniform locations.
pub fn homogeneous_points<R: Rng + ?Sized>(rho: f64, window: &Window, rng: &mut R) -> Vec<[f64; 2]> {
    let n = poisson_count(rho * window.area(), rng);
    (0..n)
        .map(|_| {
            [
                window.x0 + rng.random::<f64>() * window.width(),
                window.y0 + rng.random::<f64>() * window.height(),
            ]
        })
        .collect()
}

/// Homogeneous simulation at the bound followed by independent thinning.
pub fn simulate_poisson<R: Rng + ?Sized>(
    intensity: &PoissonIntensity,
    window: &Window,
    rng: &mut R,
) -> Result<PointPattern> {
    let bound = intensity.bound(window)?;
    let homogeneous = matches!(
        intensity,
        PoissonIntensity::Constant(_) | PoissonIntensity::Preset(1) | PoissonIntensity::Preset(2)
    );
    let mut pts = homogeneous_points(bound, window, rng);
    if !homogeneous {
        let mut kept = Vec::with_capacity(pts.len());
        for p in pts {
            let u: f64 = rng.random();
            if u * bound < intensity.value(p[0], p[1])? {
                kept.push(p);
            }
        }
        pts = kept;
    }
    PointPattern::new(pts, *window)
}
