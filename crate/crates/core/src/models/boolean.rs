use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::distr::Open01;
use rand::Rng;

use super::poisson::homogeneous_points;
use crate::error::{Error, Result};
use crate::summaries::{parse_table, Window};

/// Largest grain radius of the disc model.
pub const MAX_RADIUS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BooleanModel {
    /// Germ intensity.
    pub rho: f64,
    /// Shape of the radius law `0.1·Beta(1, α)`.
    pub alpha_r: f64,
}

impl BooleanModel {
    pub fn check(&self) -> Result<()> {
        if !(self.rho >= 0.0 && self.alpha_r > 0.0) || !self.rho.is_finite() || !self.alpha_r.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "invalid Boolean parameters rho={}, alpha={}",
                self.rho, self.alpha_r
            )));
        }
        Ok(())
    }
}

/// `E[R]` and `E[R²]` for `R = 0.1·Beta(1, α)`.
pub fn radius_moments(alpha_r: f64) -> (f64, f64) {
    (
        MAX_RADIUS / (1.0 + alpha_r),
        2.0 * MAX_RADIUS * MAX_RADIUS / ((1.0 + alpha_r) * (2.0 + alpha_r)),
    )
}

/// Area fraction `p` and boundary length per unit area `L_A`.
pub fn boolean_theory(rho: f64, alpha_r: f64) -> (f64, f64) {
    let (m1, m2) = radius_moments(alpha_r);
    let p = -(-rho * PI * m2).exp_m1();
    (p, 2.0 * PI * rho * m1 * (1.0 - p))
}

/// Discs observed through a window; germs may fall outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct GermGrainSet {
    germs: Vec<[f64; 2]>,
    radii: Vec<f64>,
    window: Window,
}

impl GermGrainSet {
    pub fn new(germs: Vec<[f64; 2]>, radii: Vec<f64>, window: Window) -> Result<Self> {
        if germs.len() != radii.len() {
            return Err(Error::DimensionMismatch {
                expected: germs.len(),
                found: radii.len(),
            });
        }
        if radii.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
            return Err(Error::InvalidArgument("grain radii must be positive".into()));
        }
        if germs.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("germ coordinates must be finite".into()));
        }
        Ok(Self {
            germs,
            radii,
            window,
        })
    }

    pub fn germs(&self) -> &[[f64; 2]] {
        &self.germs
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn len(&self) -> usize {
        self.germs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.germs.is_empty()
    }

    /// CSV with a `# window:` comment line and an `x,y,r` header.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# window: {}\nx,y,r\n", self.window.to_spec_string());
        for (g, r) in self.germs.iter().zip(&self.radii) {
            let _ = writeln!(out, "{},{},{}", g[0], g[1], r);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (window, rows) = parse_table(text, 3)?;
        let germs = rows.iter().map(|r| [r[0], r[1]]).collect();
        let radii = rows.iter().map(|r| r[2]).collect();
        Self::new(germs, radii, window)
    }
}

/// Germs on the window dilated by the maximal radius, radii by inverse transform.
pub fn simulate_boolean<R: Rng + ?Sized>(spec: &BooleanModel, window: &Window, rng: &mut R) -> Result<GermGrainSet> {
    spec.check()?;
    let germs = homogeneous_points(spec.rho, &window.dilate(MAX_RADIUS), rng);
    let radii = germs
        .iter()
        .map(|_| {
            let u: f64 = rng.sample(Open01);
            // 0.1·(1 − u^{1/α}) without cancellation for u near 1.
            -MAX_RADIUS * (u.ln() / spec.alpha_r).exp_m1()
        })
        .collect();
    GermGrainSet::new(germs, radii, *window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamSeed;

    #[test]
    fn theory_values() {
        assert_eq!(boolean_theory(0.0, 1.0), (0.0, 0.0));
        let (p, _) = boolean_theory(100.0, 1.0);
        assert!((p - (1.0 - (-PI / 3.0).exp())).abs() < 1e-14);
    }

    #[test]
    fn radii_in_range_and_csv_round_trip() {
        let spec = BooleanModel {
            rho: 50.0,
            alpha_r: 2.0,
        };
        let set = simulate_boolean(&spec, &Window::unit(), &mut StreamSeed::new(3).rng()).unwrap();
        assert!(set.radii().iter().all(|&r| r > 0.0 && r <= MAX_RADIUS));
        assert_eq!(GermGrainSet::from_csv(&set.to_csv()).unwrap(), set);
    }

    #[test]
    fn no_germs_no_grains() {
        let spec = BooleanModel { rho: 0.0, alpha_r: 1.0 };
        let set = simulate_boolean(&spec, &Window::unit(), &mut StreamSeed::new(3).rng()).unwrap();
        assert!(set.is_empty());
    }
}
