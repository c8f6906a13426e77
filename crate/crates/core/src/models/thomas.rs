use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::poisson::{homogeneous_points, poisson_count};
use crate::error::{Error, Result};
use crate::summaries::{PointPattern, Window};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thomas {
    /// Parent intensity.
    pub kappa: f64,
    /// Mean number of children per parent.
    pub mu: f64,
    /// Standard deviation of each child coordinate around its parent.
    pub sigma: f64,
}

impl Thomas {
    pub fn check(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.mu >= 0.0 && self.sigma > 0.0)
            || !(self.kappa.is_finite() && self.mu.is_finite() && self.sigma.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "invalid Thomas parameters kappa={}, mu={}, sigma={}",
                self.kappa, self.mu, self.sigma
            )));
        }
        Ok(())
    }
}

pub fn thomas_theory_g(kappa: f64, sigma: f64, r: f64) -> f64 {
    let s2 = sigma * sigma;
    1.0 + (-r * r / (4.0 * s2)).exp() / (4.0 * PI * kappa * s2)
}

pub fn thomas_theory_k(kappa: f64, sigma: f64, r: f64) -> f64 {
    PI * r * r - (-r * r / (4.0 * sigma * sigma)).exp_m1() / kappa
}

/// Parents on the window dilated by `5σ`; children kept when they land in the window.
pub fn simulate_thomas<R: Rng + ?Sized>(spec: &Thomas, window: &Window, rng: &mut R) -> Result<PointPattern> {
    spec.check()?;
    let parents = homogeneous_points(spec.kappa, &window.dilate(5.0 * spec.sigma), rng);
    let offset = Normal::new(0.0, spec.sigma).expect("positive sigma");
    let mut children = Vec::new();
    for p in parents {
        for _ in 0..poisson_count(spec.mu, rng) {
            let x = p[0] + offset.sample(rng);
            let y = p[1] + offset.sample(rng);
            if window.contains(x, y) {
                children.push([x, y]);
            }
        }
    }
    PointPattern::new(children, *window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamSeed;

    #[test]
    fn no_children_means_empty() {
        let spec = Thomas {
            kappa: 10.0,
            mu: 0.0,
            sigma: 0.05,
        };
        for s in 0..20 {
            let p = simulate_thomas(&spec, &Window::unit(), &mut StreamSeed::new(s).rng()).unwrap();
            assert!(p.is_empty());
        }
    }

    #[test]
    fn long_range_limits() {
        let r = 5.0;
        assert!((thomas_theory_g(10.0, 0.05, r) - 1.0).abs() < 1e-12);
        assert!((thomas_theory_k(10.0, 0.05, r) - PI * r * r - 0.1).abs() < 1e-12);
    }
}
