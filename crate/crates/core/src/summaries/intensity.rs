//! Pixel grids of intensity values and the Gaussian kernel estimator.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt::Write as _;

use super::{PointPattern, Window};
use crate::error::{Error, Result};

/// Intensity values at the centres of an `nx × ny` pixel grid.
///
/// `values` is row-major with rows along y: pixel `(i, j)` (column `i`, row
/// `j`) is stored at `j * nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityField {
    window: Window,
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

const BINARY_HEADER: usize = 2 * 8 + 4 * 8;

impl IntensityField {
    pub fn new(window: Window, nx: usize, ny: usize, values: Vec<f64>) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidArgument("intensity grid needs at least 2x2 pixels".into()));
        }
        if values.len() != nx * ny {
            return Err(Error::DimensionMismatch {
                expected: nx * ny,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("intensity values must be finite".into()));
        }
        Ok(Self {
            window,
            nx,
            ny,
            values,
        })
    }

    pub fn zeros(window: Window, nx: usize, ny: usize) -> Result<Self> {
        Self::new(window, nx, ny, vec![0.0; nx * ny])
    }

    /// Samples `f` at every pixel centre.
    pub fn from_fn(window: Window, nx: usize, ny: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(nx * ny);
        let (dx, dy) = (window.width() / nx as f64, window.height() / ny as f64);
        for j in 0..ny {
            let y = window.y0 + (j as f64 + 0.5) * dy;
            for i in 0..nx {
                values.push(f(window.x0 + (i as f64 + 0.5) * dx, y));
            }
        }
        Self::new(window, nx, ny, values)
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn pixel_area(&self) -> f64 {
        self.window.area() / (self.nx * self.ny) as f64
    }

    pub fn pixel_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.window.x0 + (i as f64 + 0.5) * self.window.width() / self.nx as f64,
            self.window.y0 + (j as f64 + 0.5) * self.window.height() / self.ny as f64,
        )
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    /// Piecewise-constant lookup; zero outside the window.
    pub fn value_at(&self, x: f64, y: f64) -> f64 {
        if !self.window.contains(x, y) {
            return 0.0;
        }
        let fx = (x - self.window.x0) / self.window.width() * self.nx as f64;
        let fy = (y - self.window.y0) / self.window.height() * self.ny as f64;
        let i = (fx as usize).min(self.nx - 1);
        let j = (fy as usize).min(self.ny - 1);
        self.get(i, j)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// `pixelArea · Σ values`.
    pub fn integral(&self) -> f64 {
        self.pixel_area() * self.values.iter().sum::<f64>()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn same_grid(&self, other: &IntensityField) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.window == other.window
    }

    /// Discretised `∫ (f − h)(g − h)` over the window.
    pub fn centered_inner(&self, other: &IntensityField, center: &IntensityField) -> Result<f64> {
        if !self.same_grid(other) || !self.same_grid(center) {
            return Err(Error::GridMismatch);
        }
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .zip(&center.values)
            .map(|((a, b), c)| (a - c) * (b - c))
            .sum();
        Ok(self.pixel_area() * s)
    }

    /// Pixelwise linear combination `Σ wₖ fₖ`.
    pub fn linear_combination(fields: &[&IntensityField], weights: &[f64]) -> Result<Self> {
        let first = fields
            .first()
            .ok_or_else(|| Error::InvalidArgument("no fields to combine".into()))?;
        if fields.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: fields.len(),
                found: weights.len(),
            });
        }
        if fields.iter().any(|f| !f.same_grid(first)) {
            return Err(Error::GridMismatch);
        }
        let mut values = vec![0.0; first.values.len()];
        for (f, &w) in fields.iter().zip(weights) {
            for (v, &fv) in values.iter_mut().zip(&f.values) {
                *v += w * fv;
            }
        }
        Self::new(first.window, first.nx, first.ny, values)
    }

    /// Projection onto nonnegative functions.
    pub fn clamped_nonnegative(&self) -> Self {
        Self {
            values: self.values.iter().map(|&v| v.max(0.0)).collect(),
            ..self.clone()
        }
    }

    /// Flat `x,y,value` CSV over pixel centres.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,value\n");
        for j in 0..self.ny {
            for i in 0..self.nx {
                let (x, y) = self.pixel_center(i, j);
                let _ = writeln!(out, "{},{},{}", x, y, self.get(i, j));
            }
        }
        out
    }

    /// Compact binary grid: `nx`, `ny` as u64 then `x0, x1, y0, y1` and the
    /// row-major values as f64, all little-endian.
    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(BINARY_HEADER + 8 * self.values.len());
        out.extend_from_slice(&(self.nx as u64).to_le_bytes());
        out.extend_from_slice(&(self.ny as u64).to_le_bytes());
        for v in [self.window.x0, self.window.x1, self.window.y0, self.window.y1] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_binary(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < BINARY_HEADER {
            return Err(Error::Parse("truncated intensity grid header".into()));
        }
        let word = |k: usize| -> [u8; 8] { bytes[8 * k..8 * k + 8].try_into().unwrap() };
        let nx = u64::from_le_bytes(word(0)) as usize;
        let ny = u64::from_le_bytes(word(1)) as usize;
        let w: Vec<f64> = (2..6).map(|k| f64::from_le_bytes(word(k))).collect();
        let window = Window::new(w[0], w[1], w[2], w[3])?;
        let expected = nx.checked_mul(ny).ok_or_else(|| Error::Parse("grid too large".into()))?;
        if bytes.len() != BINARY_HEADER + 8 * expected {
            return Err(Error::Parse(format!(
                "intensity grid payload has {} bytes, expected {}",
                bytes.len() - BINARY_HEADER,
                8 * expected
            )));
        }
        let values = bytes[BINARY_HEADER..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::new(window, nx, ny, values)
    }
}

pub(crate) fn normal_cdf(z: f64) -> f64 {
    if z < 0.0 {
        0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
    } else {
        1.0 - 0.5 * libm::erfc(z * FRAC_1_SQRT_2)
    }
}

/// Mass of the interval `[lo, hi]` under `N(x, b²)`.
pub(crate) fn interval_mass(x: f64, lo: f64, hi: f64, b: f64) -> f64 {
    let a = (lo - x) / b;
    let c = (hi - x) / b;
    if a > 0.0 {
        // Both tails on the right: subtract upper tails to keep precision.
        0.5 * (libm::erfc(a * FRAC_1_SQRT_2) - libm::erfc(c * FRAC_1_SQRT_2))
    } else if c < 0.0 {
        0.5 * (libm::erfc(-c * FRAC_1_SQRT_2) - libm::erfc(-a * FRAC_1_SQRT_2))
    } else {
        normal_cdf(c) - normal_cdf(a)
    }
}

/// `c_b(x) = ∫_W φ_b(v − x) dv` for the isotropic Gaussian kernel.
pub(crate) fn edge_mass(window: &Window, x: f64, y: f64, b: f64) -> f64 {
    interval_mass(x, window.x0, window.x1, b) * interval_mass(y, window.y0, window.y1, b)
}

/// Gaussian kernel estimate `ρ̂(u) = Σᵢ φ_b(u − xᵢ)/c_b(xᵢ)` at pixel centres.
///
/// The kernel is separable, so each point contributes an outer product of two
/// 1-D profiles.
pub fn kernel_intensity(
    pattern: &PointPattern,
    grid: (usize, usize),
    bandwidth: f64,
) -> Result<IntensityField> {
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(Error::InvalidArgument("bandwidth must be positive".into()));
    }
    let (nx, ny) = grid;
    let window = *pattern.window();
    let mut field = IntensityField::zeros(window, nx, ny)?;
    let xs: Vec<f64> = (0..nx).map(|i| field.pixel_center(i, 0).0).collect();
    let ys: Vec<f64> = (0..ny).map(|j| field.pixel_center(0, j).1).collect();
    let norm = 1.0 / (2.0 * PI * bandwidth * bandwidth);
    let inv2b2 = 1.0 / (2.0 * bandwidth * bandwidth);
    let mut px = vec![0.0; nx];
    let mut py = vec![0.0; ny];
    for p in pattern.points() {
        let c = edge_mass(&window, p[0], p[1], bandwidth);
        let scale = norm / c;
        for (v, &x) in px.iter_mut().zip(&xs) {
            let d = x - p[0];
            *v = (-d * d * inv2b2).exp();
        }
        for (v, &y) in py.iter_mut().zip(&ys) {
            let d = y - p[1];
            *v = (-d * d * inv2b2).exp() * scale;
        }
        for (j, &wy) in py.iter().enumerate() {
            if wy == 0.0 {
                continue;
            }
            let row = &mut field.values[j * nx..(j + 1) * nx];
            for (v, &wx) in row.iter_mut().zip(&px) {
                *v += wx * wy;
            }
        }
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_pattern_gives_zero_field() {
        let f = kernel_intensity(&PointPattern::empty(Window::unit()), (16, 16), 0.1).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_central_point_has_unit_mass() {
        let p = PointPattern::new(vec![[0.5, 0.5]], Window::unit()).unwrap();
        for b in [0.02, 0.1, 0.3] {
            let f = kernel_intensity(&p, (128, 128), b).unwrap();
            assert!((f.integral() - 1.0).abs() < 1e-3, "b={b}: {}", f.integral());
        }
    }

    #[test]
    fn edge_mass_matches_quadrature() {
        let w = Window::new(0.0, 2.0, 0.0, 1.0).unwrap();
        let (x, y, b) = (0.1, 0.95, 0.2);
        let n = 2000;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n / 2 {
                let u = (i as f64 + 0.5) * 2.0 / n as f64;
                let v = (j as f64 + 0.5) * 2.0 / n as f64;
                let d2 = (u - x).powi(2) + (v - y).powi(2);
                s += (-d2 / (2.0 * b * b)).exp() / (2.0 * PI * b * b);
            }
        }
        s *= (2.0 / n as f64).powi(2);
        assert!((edge_mass(&w, x, y, b) - s).abs() < 1e-5);
    }

    #[test]
    fn binary_round_trip_and_layout() {
        let w = Window::new(0.0, 2.0, 0.0, 1.0).unwrap();
        let f = IntensityField::from_fn(w, 3, 2, |x, y| x + 10.0 * y).unwrap();
        let bytes = f.to_binary();
        assert_eq!(&bytes[0..8], &3u64.to_le_bytes());
        assert_eq!(&bytes[8..16], &2u64.to_le_bytes());
        // First value is pixel (0, 0) at centre (1/3, 0.25).
        let first = f64::from_le_bytes(bytes[48..56].try_into().unwrap());
        assert!((first - (1.0 / 3.0 + 2.5)).abs() < 1e-15);
        assert_eq!(IntensityField::from_binary(&bytes).unwrap(), f);
        assert!(IntensityField::from_binary(&bytes[..60]).is_err());
    }

    #[test]
    fn value_lookup_and_inner_product() {
        let w = Window::unit();
        let f = IntensityField::new(w, 2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(f.value_at(0.75, 0.25), 2.0);
        assert_eq!(f.value_at(0.25, 0.75), 3.0);
        assert_eq!(f.value_at(1.5, 0.5), 0.0);
        let g = IntensityField::new(w, 2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let z = IntensityField::zeros(w, 2, 2).unwrap();
        assert!((f.centered_inner(&g, &z).unwrap() - 0.25 * 5.0).abs() < 1e-15);
        let other = IntensityField::zeros(w, 3, 2).unwrap();
        assert_eq!(f.centered_inner(&other, &z), Err(Error::GridMismatch));
    }
}
